//! Agreement between subset and full-population system rankings.

mod baselines;
mod kendall;
mod report;
mod wilcoxon;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use baselines::{
    ablation_subset, heuristic_baseline, random_baseline, random_subset, AblationMode,
    HeuristicSubset, RandomRun,
};
pub use kendall::{kendall_tau_b, TauB};
pub use report::{build_report, MethodRuns, RankingReport, ReportAggregate, ReportRow};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult, EXACT_LIMIT};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Mean human score of every system on one aspect over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemMeans {
    pub aspect: String,
    pub means: BTreeMap<String, f64>,
}

impl SystemMeans {
    /// Means in the dataset's system order.
    pub fn values(&self) -> Vec<f64> {
        self.means.values().copied().collect()
    }

    /// Systems sharing the maximum mean.
    pub fn top(&self) -> Vec<&str> {
        let best = self.means.values().copied().fold(f64::NEG_INFINITY, f64::max);
        self.means
            .iter()
            .filter(|(_, v)| **v == best)
            .map(|(k, _)| k.as_str())
            .collect()
    }
}

fn resolve<'a>(d: &'a Dataset, subset: &[String]) -> Result<Vec<&'a crate::dataset::Sample>> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("empty subset".into()));
    }
    subset
        .iter()
        .map(|id| d.sample(id).ok_or_else(|| Error::sample(id, "not in dataset")))
        .collect()
}

pub fn system_means(d: &Dataset, subset: &[String], aspect: &str) -> Result<SystemMeans> {
    let samples = resolve(d, subset)?;
    let mut means = BTreeMap::new();
    for sys in d.systems() {
        let mut total = 0.0;
        for s in &samples {
            total += s.human_score(sys, aspect).ok_or_else(|| {
                Error::sample(&s.sample_id, format!("no `{aspect}` score for `{sys}`"))
            })?;
        }
        means.insert(sys.clone(), total / samples.len() as f64);
    }
    Ok(SystemMeans {
        aspect: aspect.to_string(),
        means,
    })
}

/// Population means of every sample in the dataset.
pub fn population_means(d: &Dataset, aspect: &str) -> Result<SystemMeans> {
    let all: Vec<String> = d.samples().iter().map(|s| s.sample_id.clone()).collect();
    system_means(d, &all, aspect)
}

/// Tau-b between subset and population system means on one aspect.
pub fn subset_tau(d: &Dataset, subset: &[String], aspect: &str) -> Result<TauB> {
    let sub = system_means(d, subset, aspect)?;
    let full = population_means(d, aspect)?;
    kendall_tau_b(&sub.values(), &full.values())
}

/// True when the subset's best systems include one of the population's.
pub fn top_ranked_hit(subset_means: &SystemMeans, full_means: &SystemMeans) -> Result<bool> {
    if subset_means.means.len() != full_means.means.len()
        || subset_means
            .means
            .keys()
            .zip(full_means.means.keys())
            .any(|(a, b)| a != b)
    {
        return Err(Error::InvalidInput("system sets differ".into()));
    }
    let full_top = full_means.top();
    Ok(subset_means.top().iter().any(|s| full_top.contains(s)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairVerdict {
    FirstBetter,
    SecondBetter,
    NotSignificant,
}

/// Significance class of one system pair on one aspect over a sample set.
pub fn pair_verdict(
    samples: &[&crate::dataset::Sample],
    first: &str,
    second: &str,
    aspect: &str,
    alpha: f64,
) -> Result<PairVerdict> {
    let mut x = Vec::with_capacity(samples.len());
    let mut y = Vec::with_capacity(samples.len());
    for s in samples {
        let missing = || Error::sample(&s.sample_id, format!("no `{aspect}` score"));
        x.push(s.human_score(first, aspect).ok_or_else(missing)?);
        y.push(s.human_score(second, aspect).ok_or_else(missing)?);
    }
    let w = wilcoxon_signed_rank(&x, &y)?;
    Ok(if w.p_value >= alpha {
        PairVerdict::NotSignificant
    } else if w.w_plus > w.w_minus {
        PairVerdict::FirstBetter
    } else {
        PairVerdict::SecondBetter
    })
}

/// Fraction of (aspect, system pair) cells whose Wilcoxon verdict on the
/// subset matches the verdict on the full dataset.
pub fn significance_retention(d: &Dataset, subset: &[String], alpha: f64) -> Result<f64> {
    let sub = resolve(d, subset)?;
    let full: Vec<_> = d.samples().iter().collect();
    let systems = d.systems();
    let mut cells = 0usize;
    let mut agree = 0usize;
    for aspect in d.aspects() {
        for (i, a) in systems.iter().enumerate() {
            for b in &systems[i + 1..] {
                cells += 1;
                if pair_verdict(&sub, a, b, aspect, alpha)?
                    == pair_verdict(&full, a, b, aspect, alpha)?
                {
                    agree += 1;
                }
            }
        }
    }
    if cells == 0 {
        return Err(Error::InvalidInput("no aspects to compare".into()));
    }
    Ok(agree as f64 / cells as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Sample;

    fn means(pairs: &[(&str, f64)]) -> SystemMeans {
        SystemMeans {
            aspect: "q".into(),
            means: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    fn scored(id: &str, a: f64, b: f64) -> Sample {
        Sample {
            sample_id: id.into(),
            source: String::new(),
            references: vec![],
            outputs: [("A".into(), String::new()), ("B".into(), String::new())].into(),
            human_scores: Some(
                [
                    ("A".to_string(), [("q".to_string(), a)].into()),
                    ("B".to_string(), [("q".to_string(), b)].into()),
                ]
                .into(),
            ),
            external_metrics: None,
        }
    }

    #[test]
    fn means_over_subsets() {
        let d = Dataset::from_samples(vec![scored("1", 1.0, 0.0), scored("2", 3.0, 1.0)]).unwrap();
        let m = system_means(&d, &["1".into(), "2".into()], "q").unwrap();
        assert_eq!(m.means["A"], 2.0);
        assert_eq!(m, population_means(&d, "q").unwrap());
        let single = system_means(&d, &["2".into()], "q").unwrap();
        assert_eq!(single.means["A"], 3.0);
        assert_eq!(single.means["B"], 1.0);
        assert!(system_means(&d, &[], "q").is_err());
        assert!(system_means(&d, &["1".into()], "other").is_err());
    }

    #[test]
    fn top_hits() {
        let full = means(&[("A", 3.0), ("B", 2.0), ("C", 1.0)]);
        assert!(top_ranked_hit(&full, &full).unwrap());
        let wrong = means(&[("A", 2.0), ("B", 3.0), ("C", 1.0)]);
        assert!(!top_ranked_hit(&wrong, &full).unwrap());
        let tied = means(&[("A", 3.0), ("B", 3.0), ("C", 1.0)]);
        assert!(top_ranked_hit(&tied, &full).unwrap());
        let other = means(&[("A", 3.0), ("X", 2.0), ("C", 1.0)]);
        assert!(top_ranked_hit(&other, &full).is_err());
    }

    #[test]
    fn retention_single_cell() {
        let samples: Vec<Sample> = (0..8)
            .map(|i| scored(&format!("s{i}"), 2.0 + i as f64, 1.0))
            .collect();
        let d = Dataset::from_samples(samples).unwrap();
        let all: Vec<String> = d.samples().iter().map(|s| s.sample_id.clone()).collect();
        assert_eq!(significance_retention(&d, &all, 0.05).unwrap(), 1.0);
        // 3 positive differences: p = 0.25, not significant, unlike the full set
        assert_eq!(significance_retention(&d, &all[..3], 0.05).unwrap(), 0.0);
    }
}

//! Per-(aspect, method) agreement table with aggregate rows, as JSON and as
//! a Markdown table.
//!
//! A method with several subsets (seeded baselines) expands into one column
//! per subset, `<label>1..<label>n`, followed by `<label> Mean`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{population_means, significance_retention, system_means, top_ranked_hit, kendall_tau_b, TauB};
use crate::dataset::Dataset;
use crate::error::Result;

/// Subsets produced by one method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRuns {
    pub label: String,
    pub subsets: Vec<Vec<String>>,
    /// Seed of each subset, when the method is seeded.
    pub seeds: Vec<u64>,
}

impl MethodRuns {
    pub fn single(label: &str, subset: Vec<String>) -> Self {
        MethodRuns {
            label: label.to_string(),
            subsets: vec![subset],
            seeds: Vec::new(),
        }
    }

    pub fn seeded(label: &str, runs: Vec<(u64, Vec<String>)>) -> Self {
        let (seeds, subsets) = runs.into_iter().unzip();
        MethodRuns {
            label: label.to_string(),
            subsets,
            seeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub aspect: String,
    pub method: String,
    pub tau: TauB,
    /// 1 or 0 for a single subset; the hit rate for a mean column.
    pub top_hit: f64,
    pub subset_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportAggregate {
    pub method: String,
    /// Mean over aspects with a defined tau.
    pub mean_tau: TauB,
    pub undefined_aspects: usize,
    pub top1_accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub significance_retention: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub dataset: String,
    pub config_digest: String,
    pub correlation: String,
    pub columns: Vec<String>,
    pub aspects: Vec<String>,
    pub rows: Vec<ReportRow>,
    pub aggregates: Vec<ReportAggregate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub footnotes: Vec<String>,
}

struct Cell {
    tau: TauB,
    hit: f64,
    retention: Option<f64>,
}

fn mean_defined(values: impl IntoIterator<Item = TauB>) -> (TauB, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    let mut undefined = 0usize;
    for t in values {
        match t {
            TauB::Value(v) => {
                sum += v;
                count += 1;
            }
            TauB::Undefined => undefined += 1,
        }
    }
    let tau = if count == 0 {
        TauB::Undefined
    } else {
        TauB::Value(sum / count as f64)
    };
    (tau, undefined)
}

/// Compares every subset with the full dataset on every aspect.
/// `alpha` enables the significance-retention aggregate.
pub fn build_report(
    d: &Dataset,
    dataset_name: &str,
    config_digest: &str,
    runs: &[MethodRuns],
    alpha: Option<f64>,
) -> Result<RankingReport> {
    let aspects = d.aspects().to_vec();
    let full: Vec<_> = aspects
        .iter()
        .map(|a| population_means(d, a))
        .collect::<Result<_>>()?;

    let mut columns = Vec::new();
    let mut rows = Vec::new();
    let mut aggregates = Vec::new();
    let mut footnotes = Vec::new();

    for method in runs {
        // per subset, per aspect
        let mut cells: Vec<Vec<Cell>> = Vec::with_capacity(method.subsets.len());
        for subset in &method.subsets {
            let retention = alpha
                .map(|a| significance_retention(d, subset, a))
                .transpose()?;
            let mut per_aspect = Vec::with_capacity(aspects.len());
            for (aspect, full_means) in aspects.iter().zip(&full) {
                let sub = system_means(d, subset, aspect)?;
                per_aspect.push(Cell {
                    tau: kendall_tau_b(&sub.values(), &full_means.values())?,
                    hit: if top_ranked_hit(&sub, full_means)? { 1.0 } else { 0.0 },
                    retention,
                });
            }
            cells.push(per_aspect);
        }

        let expanded = method.subsets.len() > 1;
        let mut emit = |name: String, per_aspect: Vec<Cell>, size: usize, seed: Option<u64>| {
            for (aspect, c) in aspects.iter().zip(&per_aspect) {
                rows.push(ReportRow {
                    aspect: aspect.clone(),
                    method: name.clone(),
                    tau: c.tau,
                    top_hit: c.hit,
                    subset_size: size,
                    seed,
                });
            }
            let (mean_tau, undefined) = mean_defined(per_aspect.iter().map(|c| c.tau));
            if undefined > 0 {
                footnotes.push(format!(
                    "{name}: {undefined} aspect(s) with undefined tau excluded from the mean"
                ));
            }
            aggregates.push(ReportAggregate {
                method: name.clone(),
                mean_tau,
                undefined_aspects: undefined,
                top1_accuracy: per_aspect.iter().map(|c| c.hit).sum::<f64>()
                    / per_aspect.len().max(1) as f64,
                significance_retention: per_aspect.first().and_then(|c| c.retention),
            });
            columns.push(name);
        };

        if expanded {
            let n_runs = cells.len();
            let mean_cells: Vec<Cell> = (0..aspects.len())
                .map(|k| Cell {
                    tau: mean_defined(cells.iter().map(|run| run[k].tau)).0,
                    hit: cells.iter().map(|run| run[k].hit).sum::<f64>() / n_runs as f64,
                    retention: cells[0][k]
                        .retention
                        .map(|_| cells.iter().filter_map(|run| run[k].retention).sum::<f64>() / n_runs as f64),
                })
                .collect();
            for (i, per_aspect) in cells.into_iter().enumerate() {
                emit(
                    format!("{}{}", method.label, i + 1),
                    per_aspect,
                    method.subsets[i].len(),
                    method.seeds.get(i).copied(),
                );
            }
            emit(
                format!("{} Mean", method.label),
                mean_cells,
                method.subsets[0].len(),
                None,
            );
        } else if let Some(per_aspect) = cells.pop() {
            emit(
                method.label.clone(),
                per_aspect,
                method.subsets[0].len(),
                method.seeds.first().copied(),
            );
        }
    }

    Ok(RankingReport {
        dataset: dataset_name.to_string(),
        config_digest: config_digest.to_string(),
        correlation: "kendall_tau_b".to_string(),
        columns,
        aspects,
        rows,
        aggregates,
        footnotes,
    })
}

impl RankingReport {
    pub fn row(&self, aspect: &str, method: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.aspect == aspect && r.method == method)
    }

    pub fn aggregate(&self, method: &str) -> Option<&ReportAggregate> {
        self.aggregates.iter().find(|a| a.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report always serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "| Dataset | HE Metric | {} |", self.columns.join(" | "));
        let _ = writeln!(out, "|---|---|{}", "---|".repeat(self.columns.len()));
        for aspect in &self.aspects {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|m| self.row(aspect, m).map(|r| r.tau.to_string()).unwrap_or_default())
                .collect();
            let _ = writeln!(out, "| {} | {} | {} |", self.dataset, aspect, cells.join(" | "));
        }
        let overall: Vec<String> = self
            .columns
            .iter()
            .map(|m| {
                let a = self.aggregate(m).expect("one aggregate per column");
                match a.undefined_aspects {
                    0 => a.mean_tau.to_string(),
                    _ => format!("{}*", a.mean_tau),
                }
            })
            .collect();
        let _ = writeln!(out, "| Overall | | {} |", overall.join(" | "));
        let top: Vec<String> = self
            .columns
            .iter()
            .map(|m| format!("{:.2}", self.aggregate(m).map_or(0.0, |a| a.top1_accuracy)))
            .collect();
        let _ = writeln!(out, "| Top-1 accuracy | | {} |", top.join(" | "));
        if self.aggregates.iter().any(|a| a.significance_retention.is_some()) {
            let sig: Vec<String> = self
                .columns
                .iter()
                .map(|m| {
                    self.aggregate(m)
                        .and_then(|a| a.significance_retention)
                        .map(|v| format!("{v:.4}"))
                        .unwrap_or_default()
                })
                .collect();
            let _ = writeln!(out, "| Significance retention | | {} |", sig.join(" | "));
        }
        if !self.footnotes.is_empty() {
            out.push('\n');
            for f in &self.footnotes {
                let _ = writeln!(out, "\\* {f}");
            }
        }
        let _ = writeln!(
            out,
            "\nCorrelation: Kendall tau-b between subset and full-dataset system means."
        );
        out
    }
}

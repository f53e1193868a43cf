//! Independent reference implementations and fixtures shared by the
//! integration tests. The oracles favour obviousness over speed: greedy
//! matching of n-gram lists, subset enumeration for LCS, and pair
//! enumeration for Kendall's tau-b.

#![allow(dead_code)]

use casf::dataset::{Dataset, Sample};
use proptest::prelude::*;

pub fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(|w| w.to_lowercase()).collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

/// Matches each candidate n-gram to a distinct unused equal reference n-gram.
fn greedy_matches(cand: &[Vec<String>], reference: &[Vec<String>]) -> usize {
    let mut used = vec![false; reference.len()];
    let mut matched = 0;
    for g in cand {
        if let Some(k) = (0..reference.len()).find(|&k| !used[k] && &reference[k] == g) {
            used[k] = true;
            matched += 1;
        }
    }
    matched
}

fn f1(m: usize, c: usize, r: usize) -> f64 {
    if m == 0 || c == 0 || r == 0 {
        return 0.0;
    }
    let p = m as f64 / c as f64;
    let rr = m as f64 / r as f64;
    2.0 * p * rr / (p + rr)
}

pub fn rouge_n_oracle(candidate: &str, references: &[String], n: usize) -> f64 {
    let cg = grams(&words(candidate), n);
    if cg.is_empty() {
        return 0.0;
    }
    let mut best = 0.0f64;
    for r in references {
        let rg = grams(&words(r), n);
        best = best.max(f1(greedy_matches(&cg, &rg), cg.len(), rg.len()));
    }
    best
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|w| it.any(|h| h == *w))
}

/// Longest common subsequence by enumerating every subset of `a`.
pub fn lcs_oracle(a: &[String], b: &[String]) -> usize {
    assert!(a.len() <= 16, "subset enumeration is exponential");
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let pick: Vec<&String> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| &a[i]).collect();
        if is_subsequence(&pick, b) {
            best = size;
        }
    }
    best
}

pub fn rouge_l_oracle(candidate: &str, references: &[String]) -> f64 {
    let c = words(candidate);
    if c.is_empty() {
        return 0.0;
    }
    let mut best = 0.0f64;
    for r in references {
        let rt = words(r);
        best = best.max(f1(lcs_oracle(&c, &rt), c.len(), rt.len()));
    }
    best
}

pub fn dice_oracle(a: &str, b: &str) -> f64 {
    let (ta, tb) = (words(a), words(b));
    let (ga, gb) = (grams(&ta, 2), grams(&tb, 2));
    if ga.is_empty() || gb.is_empty() {
        return if ta.len() < 2 && tb.len() < 2 && ta == tb { 1.0 } else { 0.0 };
    }
    2.0 * greedy_matches(&ga, &gb) as f64 / (ga.len() + gb.len()) as f64
}

/// Kendall's tau-b by enumerating all pairs; `None` when undefined.
pub fn tau_b_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    let (mut concordant, mut discordant, mut tie_x, mut tie_y) = (0i64, 0i64, 0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                tie_x += 1;
            }
            if dy == 0.0 {
                tie_y += 1;
            }
            if dx != 0.0 && dy != 0.0 {
                if (dx > 0.0) == (dy > 0.0) {
                    concordant += 1;
                } else {
                    discordant += 1;
                }
            }
        }
    }
    let n0 = (n * n.saturating_sub(1) / 2) as i64;
    let den = ((n0 - tie_x) as f64 * (n0 - tie_y) as f64).sqrt();
    if den == 0.0 {
        return None;
    }
    Some((concordant - discordant) as f64 / den)
}

/// Short sentences over a tiny vocabulary so that overlaps are common.
pub fn sentence(max_len: usize) -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(vec!["the", "a", "cat", "sat", "on", "mat", "The", "dog"]), 0..=max_len)
        .prop_map(|w| w.join(" "))
}

/// Vectors with frequent ties.
pub fn tied_vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0u8..5).prop_map(f64::from), len)
}

pub fn sample(id: &str, outputs: &[(&str, &str)], scores: Option<&[(&str, f64)]>) -> Sample {
    Sample {
        sample_id: id.to_string(),
        source: format!("source of {id}"),
        references: vec!["reference text".to_string()],
        outputs: outputs.iter().map(|(s, t)| (s.to_string(), t.to_string())).collect(),
        human_scores: scores.map(|sc| {
            sc.iter()
                .map(|(sys, v)| (sys.to_string(), [("quality".to_string(), *v)].into()))
                .collect()
        }),
        external_metrics: None,
    }
}

/// Dataset whose single aspect equals a single external metric. Ids ascend
/// as quality descends, so score ties resolve in quality order.
pub fn metric_equals_score(n: usize) -> Dataset {
    let samples = (0..n)
        .map(|i| {
            let q = (n - i) as f64 / 10.0;
            let mut s = sample(
                &format!("m{i:03}"),
                &[("A", &format!("alpha {i} beta")), ("B", &format!("gamma {i} delta"))],
                Some(&[("A", q), ("B", q + 1.0)]),
            );
            s.external_metrics = Some(
                [(
                    "oracle_metric".to_string(),
                    [("A".to_string(), q), ("B".to_string(), q + 1.0)].into(),
                )]
                .into(),
            );
            s
        })
        .collect();
    Dataset::from_samples(samples).unwrap()
}

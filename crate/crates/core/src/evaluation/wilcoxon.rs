//! Two-sided Wilcoxon signed-rank test.
//!
//! Zero differences are dropped. Tied magnitudes get average ranks. With at
//! most [`EXACT_LIMIT`] nonzero differences the null distribution of W+ is
//! enumerated exactly over the observed (tie-adjusted) ranks; above that a
//! tie-corrected normal approximation with continuity correction is used.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const EXACT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Sum of ranks of positive differences.
    pub w_plus: f64,
    /// Sum of ranks of negative differences.
    pub w_minus: f64,
    pub n_nonzero: usize,
    pub p_value: f64,
    pub exact: bool,
}

pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.is_empty() {
        return Err(Error::InvalidInput("wilcoxon test needs at least one pair".into()));
    }
    let mut diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(Error::InvalidInput("wilcoxon input is not finite".into()));
    }
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult {
            w_plus: 0.0,
            w_minus: 0.0,
            n_nonzero: 0,
            p_value: 1.0,
            exact: true,
        });
    }

    diffs.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    // doubled average ranks stay integral
    let mut doubled = vec![0u64; n];
    let mut tie_correction = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && diffs[j].abs() == diffs[i].abs() {
            j += 1;
        }
        let r2 = (i + 1 + j) as u64; // 2 * mean of ranks i+1..=j
        doubled[i..j].fill(r2);
        let t = (j - i) as f64;
        tie_correction += t * t * t - t;
        i = j;
    }

    let w2_plus: u64 = diffs
        .iter()
        .zip(&doubled)
        .filter(|(d, _)| **d > 0.0)
        .map(|(_, r)| r)
        .sum();
    let total2: u64 = doubled.iter().sum();
    let w_plus = w2_plus as f64 / 2.0;
    let w_minus = (total2 - w2_plus) as f64 / 2.0;

    let (p_value, exact) = if n <= EXACT_LIMIT {
        (exact_p(&doubled, w2_plus), true)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_correction / 48.0;
        let z = ((w_plus - mean).abs() - 0.5) / var.sqrt();
        let normal = Normal::standard();
        ((2.0 * (1.0 - normal.cdf(z))).min(1.0), false)
    };

    Ok(WilcoxonResult {
        w_plus,
        w_minus,
        n_nonzero: n,
        p_value,
        exact,
    })
}

/// Two-sided exact p-value: `2 * min(P(W <= w), P(W >= w))`, capped at 1.
fn exact_p(doubled_ranks: &[u64], w2: u64) -> f64 {
    let total: u64 = doubled_ranks.iter().sum();
    let mut ways = vec![0f64; total as usize + 1];
    ways[0] = 1.0;
    let mut reach = 0usize;
    for &r in doubled_ranks {
        let r = r as usize;
        for s in (0..=reach).rev() {
            if ways[s] != 0.0 {
                ways[s + r] += ways[s];
            }
        }
        reach += r;
    }
    let all = 2f64.powi(doubled_ranks.len() as i32);
    let w2 = w2 as usize;
    let lower: f64 = ways[..=w2].iter().sum();
    let upper: f64 = ways[w2..].iter().sum();
    (2.0 * lower.min(upper) / all).min(1.0)
}

//! Kendall's tau-b in O(n log n): sort by (x, y), count discordant pairs as
//! merge-sort inversions on y, and correct the denominator for ties.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tau-b, or `Undefined` when either vector is entirely tied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauB {
    Value(f64),
    Undefined,
}

impl TauB {
    pub fn value(self) -> Option<f64> {
        match self {
            TauB::Value(v) => Some(v),
            TauB::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, TauB::Value(_))
    }
}

impl fmt::Display for TauB {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauB::Value(v) => write!(f, "{v:.2}"),
            TauB::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for TauB {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TauB::Value(v) => s.serialize_f64(*v),
            TauB::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for TauB {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = TauB;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"undefined\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<TauB, E> {
                Ok(TauB::Value(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<TauB, E> {
                Ok(TauB::Value(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<TauB, E> {
                Ok(TauB::Value(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<TauB, E> {
                match v {
                    "undefined" => Ok(TauB::Undefined),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

fn tied_pairs(sorted: &[f64]) -> u64 {
    let mut total = 0;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Stable merge sort of `v`, returning the number of strict inversions.
fn sort_counting_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let (lo, hi) = v.split_at_mut(mid);
    let mut swaps = sort_counting_inversions(lo, &mut buf[..mid])
        + sort_counting_inversions(hi, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    let k = k + mid - i;
    buf[k..n].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

pub fn kendall_tau_b(x: &[f64], y: &[f64]) -> Result<TauB> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "kendall tau-b needs at least 2 observations, got {n}"
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("kendall tau-b input is not finite".into()));
    }

    // +0.0 folds -0.0 into 0.0 so total_cmp sees them as tied
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let n1 = tied_pairs(&xs);

    let mut joint = 0u64;
    let mut run = 1u64;
    for w in pairs.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            joint += run * (run - 1) / 2;
            run = 1;
        }
    }
    joint += run * (run - 1) / 2;

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = sort_counting_inversions(&mut ys, &mut buf);
    let n2 = tied_pairs(&ys);

    if n1 == n0 || n2 == n0 {
        return Ok(TauB::Undefined);
    }
    let concordant = n0 - n1 - n2 + joint - discordant;
    let num = concordant as f64 - discordant as f64;
    let den = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    Ok(TauB::Value((num / den).clamp(-1.0, 1.0)))
}

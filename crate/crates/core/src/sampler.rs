//! Systematic sampling over a quality ranking.
//!
//! With `N` ranked samples and a quota `n`, the interval is `w = N / n`
//! (floor). Bucket `e` covers ranks `[e*w, (e+1)*w)`; the last bucket also
//! takes the `N mod n` leftover ranks. The member at rank `e*w` is the
//! bucket's initial selection sample.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learner::QualityRanking;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub index: usize,
    pub ranks: Range<usize>,
    /// Sample ids in ascending rank order; `members[0]` is the initial.
    pub members: Vec<String>,
}

impl Bucket {
    pub fn initial(&self) -> &str {
        &self.members[0]
    }

    pub fn initial_rank(&self) -> usize {
        self.ranks.start
    }

    /// (rank, sample id) pairs.
    pub fn ranked_members(&self) -> impl Iterator<Item = (usize, &str)> {
        self.ranks.clone().zip(self.members.iter().map(String::as_str))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn make_buckets(ranking: &QualityRanking, quota: usize) -> Result<Vec<Bucket>> {
    let pool = ranking.len();
    if quota == 0 || quota > pool {
        return Err(Error::InvalidQuota { quota, pool });
    }
    let width = pool / quota;
    Ok((0..quota)
        .map(|e| {
            let start = e * width;
            let end = if e + 1 == quota { pool } else { start + width };
            Bucket {
                index: e,
                ranks: start..end,
                members: ranking.ranked()[start..end]
                    .iter()
                    .map(|r| r.sample_id.clone())
                    .collect(),
            }
        })
        .collect())
}

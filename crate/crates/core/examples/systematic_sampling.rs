//! Systematic buckets over a quality ranking, and the redundancy controller
//! choosing one sample per bucket.
//!
//! The fixture mirrors the paper's worked example: nine ranked samples in
//! three buckets, where the controller keeps the initial choice, swaps to
//! the only non-redundant sample, or settles for the least redundant one.
//!
//! cargo run --example systematic_sampling

use std::collections::BTreeMap;

use casf::controller::{initials, select_phase, ControllerConfig, Redundancy};
use casf::learner::QualityRanking;
use casf::sampler::make_buckets;

/// Similarities looked up from a table; unlisted pairs are unrelated.
struct Table(BTreeMap<(String, String), f64>);

impl Table {
    fn new(pairs: &[(&str, &str, f64)]) -> Self {
        let mut m = BTreeMap::new();
        for &(a, b, s) in pairs {
            m.insert((a.to_string(), b.to_string()), s);
            m.insert((b.to_string(), a.to_string()), s);
        }
        Table(m)
    }
}

impl Redundancy for Table {
    fn similarity(&self, a: &str, b: &str) -> f64 {
        self.0.get(&(a.to_string(), b.to_string())).copied().unwrap_or(0.0)
    }
}

pub fn run_example() -> casf::Result<(Vec<String>, Vec<String>)> {
    // predicted quality, best first: 7 3 1 | 2 0 8 | 5 4 6
    let order = ["7", "3", "1", "2", "0", "8", "5", "4", "6"];
    let ranking = QualityRanking::from_scores(
        order.iter().enumerate().map(|(rank, id)| (id.to_string(), 10.0 - rank as f64)),
    );
    let buckets = make_buckets(&ranking, 3)?;
    let prior = vec!["a".to_string(), "b".to_string()];
    let table = Table::new(&[
        ("7", "a", 0.8),
        ("1", "b", 0.9),
        ("2", "a", 0.9),
        ("0", "3", 0.6),
        ("8", "b", 0.7),
    ]);
    let chosen = select_phase(&buckets, &prior, &table, &ControllerConfig::default());
    Ok((initials(&buckets), chosen))
}

fn main() -> casf::Result<()> {
    let (initial, chosen) = run_example()?;
    println!("initial selection: {initial:?}");
    println!("controller choice: {chosen:?}");
    Ok(())
}

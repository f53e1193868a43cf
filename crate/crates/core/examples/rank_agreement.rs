//! Agreement statistics between system rankings: Kendall tau-b with ties and
//! the exact Wilcoxon signed-rank test.
//!
//! cargo run --example rank_agreement

use casf::evaluation::{kendall_tau_b, wilcoxon_signed_rank, TauB, WilcoxonResult};

pub fn run_example() -> casf::Result<(Vec<TauB>, WilcoxonResult)> {
    let full = [3.1, 2.4, 2.4, 1.0];
    let taus = vec![
        kendall_tau_b(&[0.9, 0.5, 0.5, 0.1], &full)?,
        kendall_tau_b(&[0.1, 0.5, 0.5, 0.9], &full)?,
        kendall_tau_b(&[2.0, 2.0, 2.0, 2.0], &full)?,
    ];
    // system A beats B on every one of six samples
    let a = [4.0, 3.5, 5.0, 4.5, 3.0, 4.0];
    let b = [3.0, 3.0, 4.0, 2.5, 2.0, 3.5];
    Ok((taus, wilcoxon_signed_rank(&a, &b)?))
}

fn main() -> casf::Result<()> {
    let (taus, w) = run_example()?;
    for t in taus {
        println!("tau-b: {t}");
    }
    println!(
        "wilcoxon: W+ {} W- {} p {:.5} ({})",
        w.w_plus,
        w.w_minus,
        w.p_value,
        if w.exact { "exact" } else { "normal approximation" }
    );
    Ok(())
}

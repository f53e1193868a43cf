//! Lexical overlap metrics on short worked pairs.
//!
//! cargo run --example lexical_metrics

use casf::text_metrics::{bigram_dice, bleu, rouge_l, rouge_n, tokenize};

pub fn run_example() -> casf::Result<Vec<(String, f64)>> {
    let refs = |r: &str| vec![r.to_string()];
    let rows = vec![
        ("tokens".to_string(), tokenize("The cat, sat.").len() as f64),
        ("dice(the cat sat | the cat ran)".into(), bigram_dice("the cat sat", "the cat ran")),
        ("rouge_1(the cat sat | the cat ran)".into(), rouge_n("the cat sat", &refs("the cat ran"), 1)),
        ("rouge_2(the cat sat | the cat ran)".into(), rouge_n("the cat sat", &refs("the cat ran"), 2)),
        ("rouge_l(a b c d | a c d)".into(), rouge_l("a b c d", &refs("a c d"))),
        (
            "bleu(the cat sat on the mat | the cat sat on a mat)".into(),
            bleu("the cat sat on the mat", &refs("the cat sat on a mat"), 4),
        ),
        (
            "bleu, best of two references".into(),
            bleu(
                "the cat sat on the mat",
                &["a dog sat".to_string(), "the cat sat on the mat".to_string()],
                4,
            ),
        ),
    ];
    Ok(rows)
}

fn main() -> casf::Result<()> {
    for (name, value) in run_example()? {
        println!("{name:55} {value:.6}");
    }
    Ok(())
}

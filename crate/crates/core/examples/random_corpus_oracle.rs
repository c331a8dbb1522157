//! Generated sim classes: every mutant labelled by the pipeline with an
//! exhaustive plan, compared with brute force over all permutations.
//!
//! ```text
//! cargo run --release --example random_corpus_oracle -- 200
//! ```

use flaker::selftest::oracle_agreement;
use flaker::sim::{GeneratorParams, SimClassGenerator};

fn main() {
    let classes = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let params = GeneratorParams {
        classes,
        ..GeneratorParams::default()
    };
    let seed = params.seed;
    let suite = SimClassGenerator::new(params).suite("generated", "gen");
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let summary = oracle_agreement(&suite, seed, workers);
    println!(
        "{} classes, {} mutants, {} labels compared in {:.1?}",
        summary.classes, summary.mutants, summary.pairs, summary.elapsed
    );
    for line in summary.disagreements.iter().take(10) {
        println!("disagreement: {line}");
    }
    println!("{}", if summary.agrees() { "all labels agree" } else { "labels disagree" });
}

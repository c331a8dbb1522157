//! Class features against injected order-dependent mutants on the generated
//! corpus, plus the statistics on hand-made samples.
//!
//! ```text
//! cargo run --release --example rank_statistics
//! ```

use flaker::analytics::{cliffs_delta, mann_whitney_u, class_feature_rows, feature_statistics, spearman_rho, StatOutcome};
use flaker::model::CampaignConfig;
use flaker::pipeline::run_campaign;
use flaker::sim::{GeneratorParams, SimClassGenerator, SimFactory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let y = [2.0, 1.0, 4.0, 3.0, 5.0];
    println!("spearman {:.3}", spearman_rho(&x, &y)?);
    let mw = mann_whitney_u(&[1.0, 2.0, 2.0, 3.0], &[2.0, 4.0, 5.0])?;
    println!("mann-whitney U {} p {:.4}", mw.u, mw.p);
    println!("cliff's delta {:.3}", cliffs_delta(&[1.0, 2.0, 2.0, 3.0], &[2.0, 4.0, 5.0])?);

    let params = GeneratorParams {
        classes: 60,
        ..GeneratorParams::default()
    };
    let suite = SimClassGenerator::new(params).suite("generated", "gen");
    let cfg = CampaignConfig {
        isolation_runs: 5,
        ..CampaignConfig::with_seed(3)
    };
    let report = run_campaign("generated", "state keys", &SimFactory::new(suite), &cfg)?;
    let rows = class_feature_rows(&report);
    println!("{} classes retained after step 1", rows.len());
    let stats = feature_statistics(&rows);
    let show = |name: &str, outcome: &StatOutcome<f64>| match outcome {
        StatOutcome::Value { value } => println!("{name}: {value:.3}"),
        StatOutcome::InsufficientData { reason } => println!("{name}: insufficient data ({reason})"),
    };
    show("rho(class size, OD mutants)", &stats.class_size_rho);
    show("rho(shared keys, OD mutants)", &stats.shared_fields_rho);
    match &stats.fixture_split {
        StatOutcome::Value { value } => println!(
            "fixture vs none: U {} p {:.4} delta {:.3}",
            value.mwu_u, value.mwu_p, value.cliffs_delta
        ),
        StatOutcome::InsufficientData { reason } => println!("fixture split: {reason}"),
    }
    Ok(())
}

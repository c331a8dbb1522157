//! Runs the three bundled scenarios through a full campaign and prints what
//! each step concluded.
//!
//! ```text
//! cargo run --example listing_scenarios
//! ```

use flaker::model::CampaignConfig;
use flaker::pipeline::{run_campaign, status_name};
use flaker::sim::{listings_suite, SimFactory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = CampaignConfig {
        isolation_runs: 20,
        ..CampaignConfig::with_seed(7)
    };
    let report = run_campaign("listings", "state keys", &SimFactory::new(listings_suite()), &cfg)?;

    println!("step 1");
    for class in &report.classes {
        let verdicts: Vec<String> = class
            .verdicts
            .iter()
            .map(|v| format!("{}={}", v.test.test_name(), status_name(v.status)))
            .collect();
        match &class.excluded {
            Some(reason) => println!("  {} excluded: {reason}", class.class_id),
            None => println!("  {} kept: {}", class.class_id, verdicts.join(", ")),
        }
    }

    println!("step 2");
    for mutant in &report.mutants {
        print!("  {}\n{}", mutant.id, indent(&mutant.diff));
    }

    println!("step 3");
    for evaluation in &report.evaluations {
        for (test, label) in &evaluation.labels {
            println!("  {:<48} {:<36} {}", evaluation.mutant.id.as_str(), test, label.name());
        }
    }
    Ok(())
}

fn indent(text: &str) -> String {
    text.lines().map(|l| format!("      {l}\n")).collect()
}

//! One mutant by hand: open a session, delete a helper statement, run the
//! mutant class in every order and label each test.
//!
//! ```text
//! cargo run --example mutate_and_classify
//! ```

use flaker::model::{CampaignConfig, ClassId};
use flaker::pipeline::evaluate_mutant;
use flaker::protocol::SessionFactory;
use flaker::sim::{listings_suite, SimFactory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let factory = SimFactory::new(listings_suite());
    let mut session = factory.open()?;
    let class = ClassId::new("listings", "PathGlob")?;
    let test = class.test("testAbsoluteGlob")?;

    for (index, point) in session.mutation_points(&test)?.iter().enumerate() {
        println!("mutation point {index}: line {}", point.span.start_line);
    }
    let mutant = session.materialize(&test, 0)?;
    println!("{}", mutant.diff);

    let cfg = CampaignConfig {
        isolation_runs: 10,
        ..CampaignConfig::with_seed(1)
    };
    let evaluation = evaluate_mutant(&mut session, &mutant, &cfg)?;
    println!("plan: {} orders, exhaustive={}", evaluation.plan.orders, evaluation.plan.exhaustive);
    for (name, dossier) in &evaluation.dossiers {
        println!(
            "{name}: {} passing, {} failing, {} erroring orders -> {}",
            dossier.passing_orders.len(),
            dossier.failing_orders.len(),
            dossier.erroring_orders.len(),
            evaluation.labels[name].name()
        );
        if let (Some(pass), Some(fail)) = (dossier.witness_passing(), dossier.witness_failing()) {
            println!("  passes in [{}], fails in [{}]", pass.names(), fail.names());
        }
        if let Some(profile) = evaluation.isolation.get(name) {
            let passes = profile.outcomes.iter().filter(|o| o.is_pass()).count();
            println!("  alone: {passes}/{} passes", profile.outcomes.len());
        }
    }
    Ok(())
}

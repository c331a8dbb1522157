//! Order plans: exhaustive when the class is small enough, seeded random
//! sampling otherwise. The same seed always gives the same plan.
//!
//! ```text
//! cargo run --example order_plans
//! ```

use flaker::model::{ClassId, TestId};
use flaker::order::{generate_orders, phase_seed, EVALUATION_TAG, STABILITY_TAG};

fn tests(class: &ClassId, n: usize) -> Vec<TestId> {
    (0..n).map(|i| class.test(format!("t{i}")).unwrap()).collect()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let class = ClassId::new("demo", "Small")?;
    let plan = generate_orders(&tests(&class, 3), 20, 1)?;
    println!("3 tests, budget 20: exhaustive={} ({} orders)", plan.exhaustive, plan.orders.len());
    for order in &plan.orders {
        println!("  {}", order.names());
    }

    let class = ClassId::new("demo", "Large")?;
    let campaign = 42;
    for tag in [STABILITY_TAG, EVALUATION_TAG] {
        // Mixed with the class identity inside the generator.
        let seed = phase_seed(campaign, tag);
        let plan = generate_orders(&tests(&class, 6), 5, seed)?;
        println!("6 tests, budget 5, {tag} seed {seed}: exhaustive={}", plan.exhaustive);
        for order in &plan.orders {
            println!("  {}", order.names());
        }
    }
    Ok(())
}

//! A cached campaign written to disk: report, metrics, dataset and the
//! excluded ledger. Running it twice reuses every stored execution.
//!
//! ```text
//! cargo run --example campaign_artifacts -- target/flaker-demo
//! ```

use std::path::PathBuf;
use std::sync::Arc;

use flaker::cache::{sha256_hex, CachingFactory, RunCache};
use flaker::dataset::read_dataset_file;
use flaker::model::CampaignConfig;
use flaker::pipeline::run_campaign;
use flaker::report::{write_artifacts, DATASET_FILE};
use flaker::sim::{listings_suite, SimFactory};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args_os()
        .nth(1)
        .map_or_else(|| std::env::temp_dir().join("flaker-demo"), PathBuf::from);
    std::fs::create_dir_all(out.join("cache"))?;

    let suite = listings_suite();
    let cfg = CampaignConfig {
        isolation_runs: 10,
        ..CampaignConfig::with_seed(7)
    };
    let cache = Arc::new(RunCache::open(&out.join("cache").join("runs.jsonl"))?);
    let suite_hash = sha256_hex(&serde_json::to_vec(&suite)?);
    let factory = CachingFactory::new(SimFactory::new(suite), Arc::clone(&cache), suite_hash, &cfg.snapshot());

    let report = run_campaign("listings", "state keys", &factory, &cfg)?;
    write_artifacts(&report, &out)?;
    let stats = cache.stats();
    println!("executions {}, cache hits {}", stats.misses, stats.hits);

    for entry in read_dataset_file(&out.join(DATASET_FILE))? {
        println!(
            "{:?} {} (passes in [{}], fails in [{}])",
            entry.label,
            entry.test,
            entry.witness_passing_order.names(),
            entry.witness_failing_order.names()
        );
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

//! The sim adapter as a separate process speaking the line protocol on
//! stdin/stdout, usable with `--adapter exec:PATH`.
//!
//! ```text
//! cargo build --example sim_stdio_adapter
//! cargo run -- run --adapter exec:target/debug/examples/sim_stdio_adapter --suite crates/core/corpus/listings.json
//! ```
//!
//! The optional first argument is a corpus file; without it the bundled
//! scenarios are served.

use std::io;
use std::sync::Arc;

use flaker::protocol::serve;
use flaker::sim::{listings_suite, SimAdapter, SimSuite};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let suite = match std::env::args().nth(1) {
        Some(path) => serde_json::from_str::<SimSuite>(&std::fs::read_to_string(path)?)?.expanded(),
        None => listings_suite(),
    };
    suite.validate()?;
    let mut adapter = SimAdapter::new(Arc::new(suite));
    serve(&mut adapter, io::stdin().lock(), io::stdout().lock())?;
    Ok(())
}

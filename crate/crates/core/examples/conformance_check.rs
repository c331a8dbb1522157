//! Protocol conformance of an adapter. With no arguments the in-process sim
//! is checked; otherwise the arguments are the adapter command line.
//!
//! ```text
//! cargo run --example conformance_check
//! cargo run --example conformance_check -- target/debug/examples/sim_stdio_adapter
//! ```

use std::time::Duration;

use flaker::protocol::conformance::{run_conformance, ConformanceReport};
use flaker::protocol::AdapterCommand;
use flaker::sim::{listings_suite, SimFactory};

fn main() {
    let mut args = std::env::args().skip(1);
    let timeout = Duration::from_secs(10);
    let report: ConformanceReport = match args.next() {
        Some(program) => {
            let command = args.fold(AdapterCommand::new(program), AdapterCommand::arg);
            run_conformance(&command, timeout)
        }
        None => run_conformance(&SimFactory::new(listings_suite()), timeout),
    };
    for check in &report.checks {
        println!("{:<5} {:<26} {}", if check.passed { "ok" } else { "FAIL" }, check.name, check.detail);
    }
    std::process::exit(if report.passed() { 0 } else { 1 });
}

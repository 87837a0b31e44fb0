//! Run the benchmark suite and compare with a stored baseline.
//!
//! cargo run --release --example bench_suite [baseline.json]
//!
//! Without an existing baseline the report is printed and written to the
//! given path for next time.

use softsplat::bench::{load_baseline, run_suite, SuiteConfig};

fn main() -> softsplat::Result<()> {
    let baseline_path = std::env::args().nth(1).unwrap_or_else(|| "softsplat-bench.json".into());
    let baseline = load_baseline(&baseline_path)?;
    let report = run_suite(&SuiteConfig::standard(), baseline.as_ref())?;
    print!("{}", report.to_markdown());
    if baseline.is_none() {
        std::fs::write(&baseline_path, report.to_json())?;
        println!("\nno baseline found; saved this run to {baseline_path}");
    } else if report.regressions().count() > 0 {
        println!("\n{} regression(s) above 15%", report.regressions().count());
    }
    Ok(())
}

//! Convergence table for test 1 through the batch driver, with 4 and 16
//! subdomains and the oracle stop rule.
//!
//! ```text
//! cargo run --release --example convergence_table -- [degree]
//! ```

use wgdd::convergence::TableFormat;
use wgdd::driver::{run, PartitionSpec, RunConfig};

fn main() -> wgdd::Result<()> {
    let k: usize = std::env::args().nth(1).map_or(Ok(1), |s| s.parse()).expect("degree");
    for m in [2, 4] {
        let config = RunConfig {
            degree: k,
            partition: PartitionSpec::Grid(m),
            levels: 1..=(7 - k as u32).min(6),
            format: TableFormat::Markdown,
            ..RunConfig::default()
        };
        let report = run(&config)?;
        println!("{}", report.table.emit(config.format));
    }
    Ok(())
}

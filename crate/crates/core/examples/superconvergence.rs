//! The {P_k, P_k} element with Raviart-Thomas weak gradient on test 3, solved
//! by the subdomain iteration with beta = 4.

use wgdd::driver::{run, RunConfig, StopMode};
use wgdd::problem::TestCase;
use wgdd::wgcore::FamilyKind;

fn main() -> wgdd::Result<()> {
    for k in 1..=3usize {
        let config = RunConfig {
            test: TestCase::Test3,
            family: FamilyKind::Superconvergent,
            degree: k,
            levels: 1..=(6 - k as u32),
            stop: StopMode::Oracle,
            ..RunConfig::default()
        };
        let report = run(&config)?;
        println!("{}", report.table.emit(config.format));
    }
    Ok(())
}

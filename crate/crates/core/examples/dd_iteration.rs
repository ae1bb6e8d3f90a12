//! The parallel Robin-type subdomain iteration run to a residual tolerance,
//! printing the interface residual history.
//!
//! ```text
//! cargo run --release --example dd_iteration -- [blocks per side] [beta]
//! ```

use wgdd::assembly::solve_monolithic;
use wgdd::dd::{build_subdomain_systems, InitialGuess, StopRule};
use wgdd::mesh::{build_uniform_triangle_mesh, partition_grid};
use wgdd::problem::test1;
use wgdd::wgcore::ElementFamily;

fn main() -> wgdd::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(Ok(2), |s| s.parse()).expect("block count");
    let beta: f64 = args.next().map_or(Ok(8.0), |s| s.parse()).expect("beta");

    let mesh = build_uniform_triangle_mesh(16)?;
    let part = partition_grid(&mesh, m)?;
    let problem = test1();
    let mono = solve_monolithic(&mesh, ElementFamily::standard(1)?, &problem)?;
    let systems = build_subdomain_systems(&mesh, &part, &mono.ops, &problem, beta)?;

    let state = systems.initial_state(&mesh, InitialGuess::Zero);
    let stop = StopRule::Residual { tol: 1e-10, max_iters: 2000 };
    let out = systems.run(&mesh, &mono.ops, state, stop, None);

    for r in out.log.records.iter().filter(|r| r.n % 10 == 0 || r.n == out.state.n) {
        println!("n = {:>4}  residual {:.3e}  jump {:.3e}  lambda sum {:.3e}", r.n, r.residual, r.jump, r.multiplier_sum);
    }
    println!(
        "{} after {} iterations; max|u - u_mono| = {:.2e}",
        if out.converged { "converged" } else { "stopped" },
        out.log.iterations(),
        out.state.u.max_abs_diff(&mono.solution, &mesh)
    );
    Ok(())
}

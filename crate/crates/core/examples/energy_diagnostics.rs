//! Energy functional of the iteration error against the directly solved
//! coupled system, with the per-step decrement identity
//! `E_{n-1} - E_n = 4 beta energy(e^(n-1))`.

use wgdd::assembly::solve_monolithic;
use wgdd::dd::{build_subdomain_systems, solve_hybrid_direct, InitialGuess, StopRule};
use wgdd::mesh::{build_uniform_triangle_mesh, partition_grid};
use wgdd::problem::test1;
use wgdd::wgcore::ElementFamily;

fn main() -> wgdd::Result<()> {
    let beta = 8.0;
    let mesh = build_uniform_triangle_mesh(8)?;
    let part = partition_grid(&mesh, 2)?;
    let problem = test1();
    let mono = solve_monolithic(&mesh, ElementFamily::standard(1)?, &problem)?;
    let hybrid = solve_hybrid_direct(&mesh, &part, &mono.ops, &problem)?;
    let systems = build_subdomain_systems(&mesh, &part, &mono.ops, &problem, beta)?;

    for guess in [InitialGuess::Zero, InitialGuess::LocalSolve] {
        println!("initial guess {guess:?}");
        let state = systems.initial_state(&mesh, guess);
        let stop = StopRule::Residual { tol: 1e-9, max_iters: 40 };
        let out = systems.run(&mesh, &mono.ops, state, stop, Some(&hybrid));
        let e0 = out.log.records[0].energy.as_ref().unwrap().functional;
        for (n, dec, pred) in out.log.decrements(beta).into_iter().take(12) {
            let e = out.log.records[n].energy.as_ref().unwrap();
            println!(
                "  n = {n:>2}  E = {:.6e}  split form = {:.6e}  identity residual / E0 = {:+.2e}",
                e.functional,
                e.split_form,
                (dec - pred) / e0
            );
        }
    }
    Ok(())
}

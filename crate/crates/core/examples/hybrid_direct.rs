//! The coupled multiplier system solved directly, compared with the
//! monolithic solution for a block partition and the per-element limit.

use wgdd::assembly::solve_monolithic;
use wgdd::dd::{interface_residual, solve_hybrid_direct};
use wgdd::mesh::{build_uniform_triangle_mesh, partition_grid, partition_per_element};
use wgdd::problem::test1;
use wgdd::wgcore::ElementFamily;

fn main() -> wgdd::Result<()> {
    let mesh = build_uniform_triangle_mesh(8)?;
    let problem = test1();
    for k in 1..=3 {
        let family = ElementFamily::standard(k)?;
        let mono = solve_monolithic(&mesh, family, &problem)?;
        for (label, part) in [
            ("4 subdomains", partition_grid(&mesh, 2)?),
            ("16 subdomains", partition_grid(&mesh, 4)?),
            ("per-element", partition_per_element(&mesh)),
        ] {
            let h = solve_hybrid_direct(&mesh, &part, &mono.ops, &problem)?;
            let (_, jump, sum) = interface_residual(&h.interfaces, &mono.ops, &h.u, &h.lambda);
            println!(
                "{family:<6} {label:<14} interface edges {:>4}  max|u - u_mono| {:.2e}  jump {:.1e}  lambda sum {:.1e}",
                h.interfaces.len(),
                h.u.max_abs_diff(&mono.solution, &mesh),
                jump,
                sum
            );
        }
    }
    Ok(())
}

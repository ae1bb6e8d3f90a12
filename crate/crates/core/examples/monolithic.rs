//! Single-domain weak Galerkin solve of test 1 on a uniform triangle mesh.
//!
//! ```text
//! cargo run --release --example monolithic -- [degree] [n]
//! ```

use wgdd::assembly::solve_monolithic;
use wgdd::convergence::error_norms;
use wgdd::mesh::build_uniform_triangle_mesh;
use wgdd::problem::test1;
use wgdd::wgcore::ElementFamily;

fn main() -> wgdd::Result<()> {
    let mut args = std::env::args().skip(1);
    let k: usize = args.next().map_or(Ok(2), |s| s.parse()).expect("degree");
    let n: usize = args.next().map_or(Ok(16), |s| s.parse()).expect("intervals per side");

    let mesh = build_uniform_triangle_mesh(n)?;
    let family = ElementFamily::standard(k)?;
    let problem = test1();
    let sol = solve_monolithic(&mesh, family, &problem)?;
    let exact = problem.exact.clone().expect("test1 has an exact solution");
    let err = error_norms(&mesh, &sol.ops, &*exact, &sol.solution)?;

    println!("{family} on {} triangles, h = {:.4}", mesh.num_cells(), mesh.h());
    println!("||Q0 u - u0||           = {:.3e}", err.l2);
    println!("||grad_w(Qh u - u_h)||  = {:.3e}", err.energy);
    Ok(())
}

//! Quadrilateral/pentagon meshes: writes the level files and runs test 2 on
//! them through the driver.
//!
//! ```text
//! cargo run --release --example polygonal_meshes -- [output dir]
//! ```

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use wgdd::driver::{run, RunConfig};
use wgdd::mesh::{quad_pentagon_mesh, write_mesh};
use wgdd::problem::TestCase;

fn main() -> wgdd::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/meshes"), PathBuf::from);
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    for level in 1..=5 {
        let mesh = quad_pentagon_mesh(level)?;
        let path = dir.join(format!("quad_pentagon_level{level}.mesh"));
        write_mesh(&mesh, BufWriter::new(File::create(&path)?))?;
        println!("wrote {} ({} cells)", path.display(), mesh.num_cells());
        files.push(path);
    }
    for k in 2..=3usize {
        let config = RunConfig {
            test: TestCase::Test2,
            degree: k,
            levels: 1..=5,
            mesh_files: files.clone(),
            ..RunConfig::default()
        };
        println!("\n{}", run(&config)?.table.emit(config.format));
    }
    Ok(())
}

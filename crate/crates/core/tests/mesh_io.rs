use std::path::PathBuf;

use wgdd::mesh::{build_uniform_triangle_mesh, load_mesh, load_mesh_file, write_mesh};

fn shipped(level: u32) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("data/meshes/quad_pentagon_level{level}.mesh"))
}

#[test]
fn shipped_meshes_load() {
    for level in 1..=5u32 {
        let mesh = load_mesh_file(shipped(level)).unwrap();
        assert_eq!(mesh.num_cells(), 4usize.pow(level + 1));
        let area: f64 = (0..mesh.num_cells()).map(|c| mesh.geometry(c).area).sum();
        assert!((area - 1.0).abs() < 1e-12, "level {level}: area {area}");
        let sides: Vec<usize> = mesh.cells().iter().map(|c| c.len()).collect();
        assert!(sides.contains(&4) && sides.contains(&5));
    }
}

#[test]
fn round_trip() {
    for mesh in [build_uniform_triangle_mesh(4).unwrap(), load_mesh_file(shipped(2)).unwrap()] {
        let mut buf = Vec::new();
        write_mesh(&mesh, &mut buf).unwrap();
        let back = load_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.vertices(), mesh.vertices());
        assert_eq!(back.cells(), mesh.cells());
        assert_eq!(back.num_edges(), mesh.num_edges());
        let mut again = Vec::new();
        write_mesh(&back, &mut again).unwrap();
        assert_eq!(buf, again);
    }
}

#[test]
fn malformed_input_reports_line() {
    let text = "wgmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n3 0 1 7\n";
    let e = load_mesh(text.as_bytes()).unwrap_err().to_string();
    assert!(e.contains("line 7"), "{e}");
    assert!(load_mesh("wgmesh 1\nvertices 2\n0 0\n".as_bytes()).is_err());
}

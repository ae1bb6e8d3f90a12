use std::collections::HashMap;

use super::Mesh;
use crate::error::{Error, Result};

/// Quadrilateral/pentagon mesh of the unit square.
///
/// The square is tiled by `2^level` × `2^level` macro blocks. Each block is
/// cut into two convex pentagons and two quadrilaterals by a short slanted
/// segment through its centre, so block lines (and therefore the `m`×`m`
/// subdomain lines for any `m` dividing `2^level`) are followed by mesh
/// edges. Successive levels halve `h` exactly.
pub fn quad_pentagon_mesh(level: u32) -> Result<Mesh> {
    if level > 10 {
        return Err(Error::InvalidParameter(format!("level {level} is too large")));
    }
    let blocks = 1usize << level;
    // integer lattice: one macro block spans 40 units
    const S: i64 = 40;
    let scale = 1.0 / (blocks as f64 * S as f64);
    let local: [(i64, i64); 10] = [
        (0, 0),   // 0 lower-left corner
        (20, 0),  // 1 bottom midpoint
        (40, 0),  // 2 lower-right corner
        (40, 20), // 3 right midpoint
        (40, 40), // 4 upper-right corner
        (20, 40), // 5 top midpoint
        (0, 40),  // 6 upper-left corner
        (0, 20),  // 7 left midpoint
        (15, 22), // 8 inner point P
        (25, 18), // 9 inner point Q
    ];
    let pieces: [&[usize]; 4] = [
        &[0, 1, 9, 8, 7],
        &[1, 2, 3, 9],
        &[9, 3, 4, 5, 8],
        &[7, 8, 5, 6],
    ];

    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut cells = Vec::with_capacity(4 * blocks * blocks);
    for bj in 0..blocks as i64 {
        for bi in 0..blocks as i64 {
            let ids: Vec<usize> = local
                .iter()
                .map(|&(x, y)| {
                    let key = (bi * S + x, bj * S + y);
                    *index.entry(key).or_insert_with(|| {
                        vertices.push([key.0 as f64 * scale, key.1 as f64 * scale]);
                        vertices.len() - 1
                    })
                })
                .collect();
            for piece in pieces {
                cells.push(piece.iter().map(|&l| ids[l]).collect());
            }
        }
    }
    Mesh::new(vertices, cells)
}

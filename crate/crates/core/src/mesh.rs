//! Boundary shells of deformed structured grids.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::Domain;
use crate::report::{g9, to_canonical_json, SCHEMA};

/// Vertices are the boundary nodes of the grid in X-fastest order; quads
/// are 1-based and wound counter-clockwise seen from outside the
/// reference box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeshArtifact {
    pub schema: u32,
    pub metadata: BTreeMap<String, String>,
    pub vertices: Vec<[f64; 3]>,
    pub faces: Vec<[usize; 4]>,
}

fn on_boundary(d: &Domain, ijk: [usize; 3]) -> bool {
    (0..3).any(|a| ijk[a] == 0 || ijk[a] + 1 == d.counts[a])
}

/// `n` nodes per axis give `6n² − 12n + 8` vertices and `6(n − 1)²` quads.
pub fn boundary_mesh(
    d: &Domain,
    map: impl Fn([f64; 3]) -> [f64; 3],
    metadata: BTreeMap<String, String>,
) -> MeshArtifact {
    let mut slot = vec![0usize; d.len()];
    let mut vertices = Vec::new();
    for idx in 0..d.len() {
        if on_boundary(d, d.ijk(idx)) {
            vertices.push(map(d.node(idx).to_array()));
            slot[idx] = vertices.len();
        }
    }
    let mut faces = Vec::new();
    for axis in 0..3 {
        let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
        for side in [0, d.counts[axis] - 1] {
            for b in 0..d.counts[v] - 1 {
                for a in 0..d.counts[u] - 1 {
                    let at = |du: usize, dv: usize| {
                        let mut ijk = [0; 3];
                        ijk[axis] = side;
                        ijk[u] = a + du;
                        ijk[v] = b + dv;
                        slot[d.index(ijk[0], ijk[1], ijk[2])]
                    };
                    // (u, v) is right-handed about +axis.
                    let q = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)];
                    faces.push(if side == 0 {
                        [q[0], q[3], q[2], q[1]]
                    } else {
                        q
                    });
                }
            }
        }
    }
    MeshArtifact {
        schema: SCHEMA,
        metadata,
        vertices,
        faces,
    }
}

impl MeshArtifact {
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "# vertices: {}", self.vertices.len());
        let _ = writeln!(out, "# faces: {}", self.faces.len());
        for p in &self.vertices {
            let _ = writeln!(out, "v {} {} {}", g9(p[0]), g9(p[1]), g9(p[2]));
        }
        for f in &self.faces {
            let _ = writeln!(out, "f {} {} {} {}", f[0], f[1], f[2], f[3]);
        }
        out
    }

    pub fn to_json(&self) -> String {
        to_canonical_json(self)
    }
}

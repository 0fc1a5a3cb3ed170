//! Triangle meshes for chair parts and the primitive builders used by the
//! parametric generator.
//!
//! Builders only use `+ - * /` and `sqrt`, which are correctly rounded under
//! IEEE 754, so generated vertices are identical on every platform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point3 = [f64; 3];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PartMesh {
    pub vertices: Vec<Point3>,
    pub triangles: Vec<[u32; 3]>,
}

impl PartMesh {
    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len() as u32;
        if let Some(t) = self.triangles.iter().find(|t| t.iter().any(|&i| i >= n)) {
            return Err(Error::invalid(format!(
                "triangle {t:?} indexes past {n} vertices"
            )));
        }
        if self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite vertex coordinate"));
        }
        Ok(())
    }

    pub fn append(&mut self, other: PartMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend(other.vertices);
        self.triangles
            .extend(other.triangles.into_iter().map(|t| t.map(|i| i + base)));
    }

    pub fn translate(&mut self, offset: Point3) {
        for v in &mut self.vertices {
            for k in 0..3 {
                v[k] += offset[k];
            }
        }
    }

    /// Axis-aligned bounds, `None` for a mesh without vertices.
    pub fn bounds(&self) -> Option<(Point3, Point3)> {
        let first = *self.vertices.first()?;
        Some(self.vertices.iter().fold((first, first), |(mut lo, mut hi), v| {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
            (lo, hi)
        }))
    }

    /// Vertex sets of the connected components (triangles sharing a vertex index).
    pub fn components(&self) -> Vec<Vec<Point3>> {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for t in &self.triangles {
            let a = find(&mut parent, t[0] as usize);
            for &j in &t[1..] {
                let b = find(&mut parent, j as usize);
                if a != b {
                    parent[b] = a;
                }
            }
        }
        let mut used = vec![false; n];
        for t in &self.triangles {
            for &i in t {
                used[i as usize] = true;
            }
        }
        let mut groups: Vec<(usize, Vec<Point3>)> = Vec::new();
        for i in 0..n {
            if !used[i] {
                continue;
            }
            let root = find(&mut parent, i);
            match groups.iter_mut().find(|(r, _)| *r == root) {
                Some((_, g)) => g.push(self.vertices[i]),
                None => groups.push((root, vec![self.vertices[i]])),
            }
        }
        groups.into_iter().map(|(_, g)| g).collect()
    }
}

/// Closed hexahedron from eight corners: `0..4` the bottom ring and `4..8` the
/// top ring, both counter-clockwise seen from above, corner `i + 4` above `i`.
pub fn hexahedron(c: [Point3; 8]) -> PartMesh {
    const FACES: [[u32; 4]; 6] = [
        [0, 3, 2, 1], // bottom
        [4, 5, 6, 7], // top
        [0, 1, 5, 4],
        [1, 2, 6, 5],
        [2, 3, 7, 6],
        [3, 0, 4, 7],
    ];
    let triangles = FACES
        .iter()
        .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
        .collect();
    PartMesh {
        vertices: c.to_vec(),
        triangles,
    }
}

/// Axis-aligned box spanning `lo..hi`.
pub fn aabb(lo: Point3, hi: Point3) -> PartMesh {
    hexahedron([
        [lo[0], lo[1], lo[2]],
        [hi[0], lo[1], lo[2]],
        [hi[0], lo[1], hi[2]],
        [lo[0], lo[1], hi[2]],
        [lo[0], hi[1], lo[2]],
        [hi[0], hi[1], lo[2]],
        [hi[0], hi[1], hi[2]],
        [lo[0], hi[1], hi[2]],
    ])
}

/// Square post between two centers with horizontal square cross-section.
pub fn post(bottom: Point3, top: Point3, half: f64) -> PartMesh {
    let ring = |c: Point3| {
        [
            [c[0] - half, c[1], c[2] - half],
            [c[0] + half, c[1], c[2] - half],
            [c[0] + half, c[1], c[2] + half],
            [c[0] - half, c[1], c[2] + half],
        ]
    };
    let b = ring(bottom);
    let t = ring(top);
    hexahedron([b[0], b[1], b[2], b[3], t[0], t[1], t[2], t[3]])
}

/// Octagonal prism between two centers with horizontal cross-section of the
/// given circumradius.
pub fn octagonal_prism(bottom: Point3, top: Point3, radius: f64) -> PartMesh {
    let h = radius * 0.5f64.sqrt();
    let offsets: [[f64; 2]; 8] = [
        [radius, 0.0],
        [h, h],
        [0.0, radius],
        [-h, h],
        [-radius, 0.0],
        [-h, -h],
        [0.0, -radius],
        [h, -h],
    ];
    let mut vertices = Vec::with_capacity(18);
    for c in [bottom, top] {
        for o in offsets {
            vertices.push([c[0] + o[0], c[1], c[2] + o[1]]);
        }
    }
    vertices.push(bottom);
    vertices.push(top);
    let (cb, ct) = (16u32, 17u32);
    let mut triangles = Vec::with_capacity(32);
    for i in 0..8u32 {
        let j = (i + 1) % 8;
        triangles.push([i, j, j + 8]);
        triangles.push([i, j + 8, i + 8]);
        triangles.push([cb, j, i]);
        triangles.push([ct, i + 8, j + 8]);
    }
    PartMesh {
        vertices,
        triangles,
    }
}

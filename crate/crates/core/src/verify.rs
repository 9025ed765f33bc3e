//! Topology verification: edge incidence, vertex links, orientation,
//! Euler characteristic, and the face-flip metric against the input surface.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{triangle_centroid, triangle_unit_normal};
use crate::mesh_io::TriangleMesh;
use crate::octree::Octree;
use crate::project::nearest_triangle;

/// Verification result. `bad_edges` counts edges bordered by more than two
/// faces; boundary (single-face) edges show up through `is_closed` instead.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifoldReport {
    pub is_manifold: bool,
    pub is_closed: bool,
    pub is_oriented: bool,
    pub bad_edges: usize,
    pub bad_vertices: usize,
    pub euler_characteristic: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus_if_connected_closed: Option<i64>,
    pub flip_count: usize,
    pub flip_rate: f64,
}

impl ManifoldReport {
    pub fn is_watertight(&self) -> bool {
        self.is_manifold && self.is_closed && self.is_oriented
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

struct DisjointSet {
    parent: Vec<u32>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n as u32).collect(),
        }
    }

    fn find(&mut self, x: u32) -> u32 {
        let mut root = x;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = x;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra as usize] = rb;
        }
    }
}

/// Analyze a mesh. Verification never fails; it reports. Flip fields stay
/// zero here and are filled by [`count_face_flips`] when an octree of the
/// original surface is available.
pub fn check_manifold(mesh: &TriangleMesh) -> ManifoldReport {
    let nv = mesh.vertices.len();
    let nf = mesh.triangles.len();

    // Undirected edge -> (a->b traversals, b->a traversals) with a < b.
    let mut edges: HashMap<(u32, u32), (u32, u32)> = HashMap::new();
    for tri in &mesh.triangles {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            let entry = edges.entry((a.min(b), a.max(b))).or_insert((0, 0));
            if a < b {
                entry.0 += 1;
            } else {
                entry.1 += 1;
            }
        }
    }

    let ne = edges.len();
    let mut bad_edges = 0usize;
    let mut is_closed = nf > 0;
    let mut is_oriented = true;
    for &(ab, ba) in edges.values() {
        let total = ab + ba;
        if total > 2 {
            bad_edges += 1;
        }
        if total % 2 != 0 {
            is_closed = false;
        }
        if ab > 1 || ba > 1 {
            is_oriented = false;
        }
    }

    // Vertex links: faces around a vertex must form a single
    // edge-connected component (one fan). Incidence in CSR layout.
    let mut offsets = vec![0u32; nv + 1];
    for tri in &mesh.triangles {
        for &v in tri {
            offsets[v as usize + 1] += 1;
        }
    }
    for i in 0..nv {
        offsets[i + 1] += offsets[i];
    }
    let mut faces_of = vec![0u32; nf * 3];
    {
        let mut cursor = offsets.clone();
        for (ti, tri) in mesh.triangles.iter().enumerate() {
            for &v in tri {
                faces_of[cursor[v as usize] as usize] = ti as u32;
                cursor[v as usize] += 1;
            }
        }
    }

    let mut bad_vertices = 0usize;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut parent: Vec<u32> = Vec::new();
    for v in 0..nv {
        let faces = &faces_of[offsets[v] as usize..offsets[v + 1] as usize];
        if faces.len() <= 1 {
            continue;
        }
        // (opposite vertex of an edge at v, local face index), sorted so
        // faces sharing an edge become consecutive runs.
        pairs.clear();
        for (i, &f) in faces.iter().enumerate() {
            let tri = mesh.triangles[f as usize];
            for j in 0..3 {
                let (a, b) = (tri[j], tri[(j + 1) % 3]);
                if a as usize == v {
                    pairs.push((b, i as u32));
                } else if b as usize == v {
                    pairs.push((a, i as u32));
                }
            }
        }
        pairs.sort_unstable();
        parent.clear();
        parent.extend(0..faces.len() as u32);
        let find = |parent: &mut Vec<u32>, mut x: u32| {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        };
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                let (ra, rb) = (find(&mut parent, w[0].1), find(&mut parent, w[1].1));
                if ra != rb {
                    parent[ra as usize] = rb;
                }
            }
        }
        let root0 = find(&mut parent, 0);
        if (1..faces.len() as u32).any(|i| find(&mut parent, i) != root0) {
            bad_vertices += 1;
        }
    }

    let euler = nv as i64 - ne as i64 + nf as i64;
    let is_manifold = bad_edges == 0 && bad_vertices == 0;

    // Connectivity over vertices that carry faces.
    let genus = if is_manifold && is_closed && is_oriented && nf > 0 {
        let mut ds = DisjointSet::new(nv);
        for tri in &mesh.triangles {
            ds.union(tri[0], tri[1]);
            ds.union(tri[1], tri[2]);
        }
        let mut roots: Vec<u32> = (0..nv as u32)
            .filter(|&v| offsets[v as usize] != offsets[v as usize + 1])
            .map(|v| ds.find(v))
            .collect();
        roots.sort_unstable();
        roots.dedup();
        let connected = roots.len() == 1;
        if connected && (2 - euler) % 2 == 0 {
            Some((2 - euler) / 2)
        } else {
            None
        }
    } else {
        None
    };

    ManifoldReport {
        is_manifold,
        is_closed,
        is_oriented,
        bad_edges,
        bad_vertices,
        euler_characteristic: euler,
        genus_if_connected_closed: genus,
        flip_count: 0,
        flip_rate: 0.0,
    }
}

/// Count output triangles whose normal opposes the normal of the nearest
/// input triangle, looked up at the output triangle's centroid through the
/// octree's leaf triangle sets.
pub fn count_face_flips(output: &TriangleMesh, tree: &Octree) -> (usize, f64) {
    let total = output.triangles.len();
    if total == 0 {
        return (0, 0.0);
    }
    let flips = (0..total)
        .into_par_iter()
        .filter(|&t| {
            let [a, b, c] = output.triangle_points(t);
            let Some(n_out) = triangle_unit_normal(&a, &b, &c) else {
                return false;
            };
            let centroid = triangle_centroid(&a, &b, &c);
            let Some(hit) = nearest_triangle(&centroid, tree, 2) else {
                return false;
            };
            let orig = tree.triangle(hit.triangle);
            let Some(n_in) = triangle_unit_normal(&orig[0], &orig[1], &orig[2]) else {
                return false;
            };
            n_out.dot(&n_in) < 0.0
        })
        .count();
    (flips, flips as f64 / total as f64)
}

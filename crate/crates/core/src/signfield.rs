//! Inside/outside classification of empty cells.
//!
//! A cell is positive (outside) when it has a face-adjacency path through
//! non-occupied cells to the boundary of the root box. Every empty node
//! touching the root boundary seeds a BFS; whatever the expansion never
//! reaches is negative (inside). Coarse empty nodes are classified as whole
//! units since their interiors are connected and unobstructed.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::octree::{NodeId, NodeStatus, Octree};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellSign {
    Occupied,
    Positive,
    Negative,
}

impl CellSign {
    pub fn token(self) -> &'static str {
        match self {
            CellSign::Occupied => "occupied",
            CellSign::Positive => "positive",
            CellSign::Negative => "negative",
        }
    }
}

/// Per-node classification. Occupied nodes (internal or leaf) stay
/// `Occupied`; terminal empty nodes carry exactly one sign.
pub struct SignField {
    signs: Vec<CellSign>,
}

impl SignField {
    pub fn sign(&self, id: NodeId) -> CellSign {
        self.signs[id.index()]
    }

    /// (occupied leaves, positive terminals, negative terminals)
    pub fn counts(&self, tree: &Octree) -> (usize, usize, usize) {
        let mut occupied = 0;
        let mut positive = 0;
        let mut negative = 0;
        for i in 0..tree.node_count() {
            let id = node_id(i);
            let node = tree.node(id);
            if !node.is_leaf() {
                continue;
            }
            match self.signs[i] {
                CellSign::Occupied => occupied += 1,
                CellSign::Positive => positive += 1,
                CellSign::Negative => negative += 1,
            }
        }
        (occupied, positive, negative)
    }

    /// One line per terminal node: `depth i j k sign`, sorted.
    pub fn dump(&self, tree: &Octree) -> String {
        let mut lines: Vec<(u32, [u32; 3], &'static str)> = Vec::new();
        for i in 0..tree.node_count() {
            let id = node_id(i);
            let node = tree.node(id);
            if !node.is_leaf() {
                continue;
            }
            lines.push((node.depth, node.cell, self.signs[i].token()));
        }
        lines.sort_unstable();
        let mut out = String::new();
        for (d, c, s) in lines {
            writeln!(out, "{} {} {} {} {}", d, c[0], c[1], c[2], s).unwrap();
        }
        out
    }
}

fn node_id(index: usize) -> NodeId {
    // NodeId construction is private to the octree; round-trip through the
    // raw u32 is not exposed, so keep a single transmute-free helper here.
    NodeId::from_raw(index as u32)
}

/// All face-adjacent terminal nodes of an empty node, of any size, found by
/// lattice-range lookup descending from the root. The connection graph only
/// stores edges leaving occupied leaves, so the BFS needs this.
pub fn empty_adjacency(tree: &Octree, id: NodeId) -> Vec<NodeId> {
    let node = tree.node(id);
    debug_assert_eq!(node.status, NodeStatus::Empty);
    let scale = tree.max_depth() - node.depth;
    let res = tree.resolution();
    let lo = [
        node.cell[0] << scale,
        node.cell[1] << scale,
        node.cell[2] << scale,
    ];
    let hi = [
        (node.cell[0] + 1) << scale,
        (node.cell[1] + 1) << scale,
        (node.cell[2] + 1) << scale,
    ];

    let mut out = Vec::new();
    for axis in 0..3 {
        for positive in [false, true] {
            let mut slab_lo = lo;
            let mut slab_hi = hi;
            if positive {
                if hi[axis] >= res {
                    continue;
                }
                slab_lo[axis] = hi[axis];
                slab_hi[axis] = hi[axis] + 1;
            } else {
                if lo[axis] == 0 {
                    continue;
                }
                slab_lo[axis] = lo[axis] - 1;
                slab_hi[axis] = lo[axis];
            }
            out.extend(tree.terminal_nodes_in_range(slab_lo, slab_hi));
        }
    }
    out
}

fn touches_root_boundary(tree: &Octree, id: NodeId) -> bool {
    let node = tree.node(id);
    let max = (1u32 << node.depth) - 1;
    (0..3).any(|a| node.cell[a] == 0 || node.cell[a] == max)
}

/// Flood-fill classification of every terminal node.
pub fn classify_cells(tree: &Octree) -> SignField {
    let mut signs = vec![CellSign::Occupied; tree.node_count()];
    for (i, sign) in signs.iter_mut().enumerate() {
        if tree.node(node_id(i)).status == NodeStatus::Empty {
            *sign = CellSign::Negative;
        }
    }

    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for (i, sign) in signs.iter_mut().enumerate() {
        let id = node_id(i);
        if tree.node(id).status == NodeStatus::Empty && touches_root_boundary(tree, id) {
            *sign = CellSign::Positive;
            queue.push_back(id);
        }
    }

    while let Some(id) = queue.pop_front() {
        for nb in empty_adjacency(tree, id) {
            if signs[nb.index()] == CellSign::Negative {
                signs[nb.index()] = CellSign::Positive;
                queue.push_back(nb);
            }
        }
    }

    SignField { signs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::mesh_io::normalize;
    use crate::octree::{cell_box, triangle_box_intersects, Octree, OctreeConfig};
    use crate::shapes;

    fn tree_at(mesh: &crate::mesh_io::TriangleMesh, depth: u32) -> Octree {
        Octree::build(mesh, &OctreeConfig::with_depth(depth)).unwrap()
    }

    /// Dense-grid flood fill over the finest lattice.
    fn dense_signs(tree: &Octree, mesh: &crate::mesh_io::TriangleMesh) -> Vec<CellSign> {
        let res = tree.resolution();
        let at = |c: [u32; 3]| ((c[0] * res + c[1]) * res + c[2]) as usize;
        let mut signs = vec![CellSign::Negative; (res * res * res) as usize];
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let b = cell_box(tree.root_bbox(), tree.max_depth(), [i, j, k]);
                    let occ = (0..mesh.triangles.len())
                        .any(|t| triangle_box_intersects(&mesh.triangle_points(t), &b));
                    if occ {
                        signs[at([i, j, k])] = CellSign::Occupied;
                    }
                }
            }
        }
        let mut queue = std::collections::VecDeque::new();
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let boundary = [i, j, k].iter().any(|&c| c == 0 || c == res - 1);
                    if boundary && signs[at([i, j, k])] == CellSign::Negative {
                        signs[at([i, j, k])] = CellSign::Positive;
                        queue.push_back([i, j, k]);
                    }
                }
            }
        }
        while let Some(c) = queue.pop_front() {
            for axis in 0..3 {
                for d in [-1i64, 1] {
                    let mut n = [c[0] as i64, c[1] as i64, c[2] as i64];
                    n[axis] += d;
                    if n.iter().any(|&x| x < 0 || x >= res as i64) {
                        continue;
                    }
                    let nc = [n[0] as u32, n[1] as u32, n[2] as u32];
                    if signs[at(nc)] == CellSign::Negative {
                        signs[at(nc)] = CellSign::Positive;
                        queue.push_back(nc);
                    }
                }
            }
        }
        signs
    }

    fn assert_matches_dense(tree: &Octree, mesh: &crate::mesh_io::TriangleMesh) {
        let field = classify_cells(tree);
        let dense = dense_signs(tree, mesh);
        let res = tree.resolution();
        let at = |c: [u32; 3]| ((c[0] * res + c[1]) * res + c[2]) as usize;
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let node = tree.covering_node([i, j, k]);
                    assert_eq!(
                        field.sign(node),
                        dense[at([i, j, k])],
                        "cell {i},{j},{k} disagrees"
                    );
                }
            }
        }
    }

    #[test]
    fn cube_shell_interior_is_negative() {
        // A flat box: the y and z faces keep a margin of empty boundary
        // cells, so the outside is seeded while the interior stays enclosed.
        let shell = shapes::box_surface(
            &Point::new(-1.0, -0.7, -0.7),
            &Point::new(1.0, 0.7, 0.7),
        );
        let (mesh, _) = normalize(&shell).unwrap();
        let tree = tree_at(&mesh, 4);
        assert_matches_dense(&tree, &mesh);
        let field = classify_cells(&tree);
        let (_, pos, neg) = field.counts(&tree);
        assert!(neg > 0, "closed shell must enclose negative cells");
        assert!(pos > 0);
    }

    #[test]
    fn open_surface_has_no_negative_cells() {
        let (mesh, _) = normalize(&shapes::plane_grid(1.0, 4)).unwrap();
        let tree = tree_at(&mesh, 4);
        let field = classify_cells(&tree);
        let (_, _, neg) = field.counts(&tree);
        assert_eq!(neg, 0);
        assert_matches_dense(&tree, &mesh);
    }

    #[test]
    fn boundary_cells_are_never_negative() {
        let (mesh, _) = normalize(&shapes::cube(1.0)).unwrap();
        let tree = tree_at(&mesh, 4);
        let field = classify_cells(&tree);
        let res = tree.resolution();
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    if [i, j, k].iter().any(|&c| c == 0 || c == res - 1) {
                        let sign = field.sign(tree.covering_node([i, j, k]));
                        assert_ne!(sign, CellSign::Negative);
                    }
                }
            }
        }
    }

    #[test]
    fn empty_adjacency_interior_leaf() {
        // A tiny triangle pins one occupied leaf; pick an empty sibling and
        // check its neighbors are found exactly once each.
        let e = 1e-3;
        let mesh = crate::mesh_io::TriangleMesh::new(
            vec![
                crate::geom::Point::new(0.4, 0.4, 0.4),
                crate::geom::Point::new(0.4 + e, 0.4, 0.4),
                crate::geom::Point::new(0.4, 0.4 + e, 0.4 + e),
            ],
            vec![[0, 1, 2]],
        );
        let tree = tree_at(&mesh, 4);
        let leaf = tree.occupied_leaves()[0];
        let cell = tree.node(leaf).cell;
        // The face-adjacent node in +x is empty; its own neighbors must
        // include our occupied leaf exactly once.
        let nb = tree.covering_node([cell[0] + 1, cell[1], cell[2]]);
        assert_eq!(tree.node(nb).status, NodeStatus::Empty);
        let adj = empty_adjacency(&tree, nb);
        let occurrences = adj.iter().filter(|&&n| n == leaf).count();
        assert_eq!(occurrences, 1);
    }

    #[test]
    fn empty_adjacency_matches_dense_grid() {
        use std::collections::BTreeSet;
        for seed in [2u64, 5] {
            let cells = shapes::random_voxel_cells(seed, [4, 4, 4], 0.3);
            let soup = shapes::voxel_soup_mesh(&cells, 1.0);
            let (mesh, _) = normalize(&soup).unwrap();
            let tree = tree_at(&mesh, 4);
            let res = tree.resolution();
            for idx in 0..tree.node_count() {
                let id = node_id(idx);
                let node = tree.node(id);
                if node.status != NodeStatus::Empty {
                    continue;
                }
                // Expected: covering nodes of all fine cells face-adjacent to
                // this node's footprint.
                let scale = tree.max_depth() - node.depth;
                let lo: Vec<u32> = (0..3).map(|a| node.cell[a] << scale).collect();
                let hi: Vec<u32> = (0..3).map(|a| (node.cell[a] + 1) << scale).collect();
                let mut expected: BTreeSet<NodeId> = BTreeSet::new();
                for axis in 0..3 {
                    for side in [0, 1] {
                        let x = if side == 0 {
                            if lo[axis] == 0 {
                                continue;
                            }
                            lo[axis] - 1
                        } else {
                            if hi[axis] >= res {
                                continue;
                            }
                            hi[axis]
                        };
                        let others = [(axis + 1) % 3, (axis + 2) % 3];
                        for u in lo[others[0]]..hi[others[0]] {
                            for v in lo[others[1]]..hi[others[1]] {
                                let mut c = [0u32; 3];
                                c[axis] = x;
                                c[others[0]] = u;
                                c[others[1]] = v;
                                expected.insert(tree.covering_node(c));
                            }
                        }
                    }
                }
                let actual: BTreeSet<NodeId> = empty_adjacency(&tree, id).into_iter().collect();
                assert_eq!(expected, actual);
            }
        }
    }

    #[test]
    fn deleting_a_face_floods_the_interior() {
        let shell = shapes::cube(1.0);
        let (mesh, _) = normalize(&shell).unwrap();
        let tree = tree_at(&mesh, 4);
        let neg_closed = classify_cells(&tree).counts(&tree).2;
        assert!(neg_closed > 0);

        // Remove the two +z triangles; the interior becomes reachable.
        let mut open = shell.clone();
        open.triangles.retain(|t| {
            let pts = [
                open.vertices[t[0] as usize],
                open.vertices[t[1] as usize],
                open.vertices[t[2] as usize],
            ];
            !pts.iter().all(|p| p.z == 1.0)
        });
        let (mesh, _) = normalize(&open).unwrap();
        let tree = tree_at(&mesh, 4);
        let neg_open = classify_cells(&tree).counts(&tree).2;
        assert_eq!(neg_open, 0);
    }

    #[test]
    fn partition_is_exhaustive_and_disjoint() {
        let (mesh, _) = normalize(&shapes::icosphere(1)).unwrap();
        let tree = tree_at(&mesh, 4);
        let field = classify_cells(&tree);
        for i in 0..tree.node_count() {
            let id = node_id(i);
            let node = tree.node(id);
            if !node.is_leaf() {
                continue;
            }
            match node.status {
                NodeStatus::Occupied => assert_eq!(field.sign(id), CellSign::Occupied),
                NodeStatus::Empty => assert_ne!(field.sign(id), CellSign::Occupied),
            }
        }
    }
}

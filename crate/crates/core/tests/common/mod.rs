//! Shared fixtures and the uniform-grid brute-force oracle used by the
//! acceptance suite. The oracle reimplements occupancy, face adjacency, and
//! the inside/outside flood fill directly on the dense finest lattice,
//! independent of the octree construction it checks.

use std::collections::{BTreeSet, VecDeque};

use watertight_core::geom::Point;
use watertight_core::mesh_io::TriangleMesh;
use watertight_core::octree::{
    build_connections, cell_box, triangle_box_intersects, Direction, Octree, OctreeConfig,
};
use watertight_core::shapes;
use watertight_core::signfield::{classify_cells, CellSign};
use watertight_core::{PipelineConfig, ProjectionParams};

pub fn default_config() -> PipelineConfig {
    PipelineConfig::default()
}

pub fn config_at_depth(depth: u32) -> PipelineConfig {
    PipelineConfig {
        octree: OctreeConfig::with_depth(depth),
        projection: ProjectionParams::default(),
        ..PipelineConfig::default()
    }
}

/// The deterministic fixture corpus: name, mesh, pipeline config.
pub fn named_fixtures() -> Vec<(&'static str, TriangleMesh, PipelineConfig)> {
    vec![
        ("closed_cube", shapes::cube(1.0), default_config()),
        ("icosphere", shapes::icosphere(2), default_config()),
        ("torus", shapes::torus(0.65, 0.3, 32, 16), default_config()),
        ("open_plane", shapes::plane_grid(1.0, 8), default_config()),
        (
            "plane_with_hole",
            shapes::plane_with_hole(1.0, 16, 0.4),
            default_config(),
        ),
        (
            "self_intersecting_boxes",
            shapes::interpenetrating_boxes(),
            default_config(),
        ),
        (
            "vertex_touch_boxes",
            shapes::two_boxes_vertex_touch(),
            default_config(),
        ),
        (
            "edge_touch_boxes",
            shapes::two_boxes_edge_touch(),
            default_config(),
        ),
        ("thin_sheet", shapes::thin_sheet(0.9, 0.15, 12), default_config()),
        ("bowtie_soup", shapes::bowtie_soup(), default_config()),
        ("nonoriented_soup", shapes::nonoriented_soup(), default_config()),
        ("voxel_torus", shapes::voxel_ring_mesh(), config_at_depth(4)),
    ]
}

pub fn random_soups() -> Vec<(String, TriangleMesh, PipelineConfig)> {
    (0..50)
        .map(|seed| {
            let cells = shapes::random_voxel_cells(seed, [4, 4, 4], 0.4);
            (
                format!("voxel_soup_{seed}"),
                shapes::voxel_soup_mesh(&cells, 1.0),
                config_at_depth(4),
            )
        })
        .collect()
}

/// Dense uniform-grid reference built straight from the mesh.
pub struct DenseOracle {
    pub res: u32,
    occupied: Vec<bool>,
    signs: Vec<CellSign>,
}

impl DenseOracle {
    pub fn build(mesh: &TriangleMesh, tree: &Octree) -> Self {
        let res = tree.resolution();
        let n = (res as usize).pow(3);
        let mut occupied = vec![false; n];
        let triangles: Vec<[Point; 3]> = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_points(t))
            .collect();
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let b = cell_box(tree.root_bbox(), tree.max_depth(), [i, j, k]);
                    occupied[Self::at(res, [i, j, k])] =
                        triangles.iter().any(|t| triangle_box_intersects(t, &b));
                }
            }
        }

        // Flood fill from boundary cells over the 6-connected empty grid.
        let mut signs = vec![CellSign::Negative; n];
        for (i, &occ) in occupied.iter().enumerate() {
            if occ {
                signs[i] = CellSign::Occupied;
            }
        }
        let mut queue = VecDeque::new();
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    let boundary = i == 0
                        || j == 0
                        || k == 0
                        || i == res - 1
                        || j == res - 1
                        || k == res - 1;
                    let idx = Self::at(res, [i, j, k]);
                    if boundary && signs[idx] == CellSign::Negative {
                        signs[idx] = CellSign::Positive;
                        queue.push_back([i, j, k]);
                    }
                }
            }
        }
        while let Some(c) = queue.pop_front() {
            for dir in Direction::ALL {
                let o = dir.offset();
                let nc = [
                    c[0] as i64 + o[0],
                    c[1] as i64 + o[1],
                    c[2] as i64 + o[2],
                ];
                if nc.iter().any(|&x| x < 0 || x >= res as i64) {
                    continue;
                }
                let nc = [nc[0] as u32, nc[1] as u32, nc[2] as u32];
                let idx = Self::at(res, nc);
                if signs[idx] == CellSign::Negative {
                    signs[idx] = CellSign::Positive;
                    queue.push_back(nc);
                }
            }
        }
        DenseOracle {
            res,
            occupied,
            signs,
        }
    }

    fn at(res: u32, c: [u32; 3]) -> usize {
        ((c[0] as usize * res as usize) + c[1] as usize) * res as usize + c[2] as usize
    }

    pub fn is_occupied(&self, c: [u32; 3]) -> bool {
        self.occupied[Self::at(self.res, c)]
    }

    pub fn sign(&self, c: [u32; 3]) -> CellSign {
        self.signs[Self::at(self.res, c)]
    }

    /// All face adjacencies seen from occupied cells: occupied->empty
    /// ordered, occupied-occupied unordered (keyed by the lower cell).
    pub fn adjacency_pairs(&self) -> BTreeSet<(u32, u32, u32, usize, bool)> {
        let res = self.res;
        let mut out = BTreeSet::new();
        for i in 0..res {
            for j in 0..res {
                for k in 0..res {
                    if !self.is_occupied([i, j, k]) {
                        continue;
                    }
                    for dir in Direction::ALL {
                        let o = dir.offset();
                        let nc = [
                            i as i64 + o[0],
                            j as i64 + o[1],
                            k as i64 + o[2],
                        ];
                        if nc.iter().any(|&x| x < 0 || x >= res as i64) {
                            continue;
                        }
                        let nc = [nc[0] as u32, nc[1] as u32, nc[2] as u32];
                        if self.is_occupied(nc) {
                            if [i, j, k] < nc {
                                out.insert((i, j, k, dir.index(), true));
                            }
                        } else {
                            out.insert((i, j, k, dir.index(), false));
                        }
                    }
                }
            }
        }
        out
    }
}

/// Assert the octree, its connection graph, and its sign field all agree
/// exactly with the dense oracle.
pub fn assert_oracle_equivalence(name: &str, mesh: &TriangleMesh, depth: u32) {
    let (normalized, _) = watertight_core::mesh_io::normalize(mesh).unwrap();
    let tree = Octree::build(&normalized, &OctreeConfig::with_depth(depth)).unwrap();
    let oracle = DenseOracle::build(&normalized, &tree);
    let res = tree.resolution();

    // (a) occupied leaf cells
    let mut tree_cells: BTreeSet<[u32; 3]> = BTreeSet::new();
    for &leaf in tree.occupied_leaves() {
        tree_cells.insert(tree.node(leaf).cell);
    }
    let mut oracle_cells: BTreeSet<[u32; 3]> = BTreeSet::new();
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                if oracle.is_occupied([i, j, k]) {
                    oracle_cells.insert([i, j, k]);
                }
            }
        }
    }
    assert_eq!(tree_cells, oracle_cells, "{name}: occupied cells differ");

    // (b) face adjacency
    let graph = build_connections(&tree);
    let mut graph_pairs: BTreeSet<(u32, u32, u32, usize, bool)> = BTreeSet::new();
    for (from, dir, to) in graph.connections() {
        let c = tree.node(from).cell;
        if tree.node(to).is_occupied() {
            let nc = tree.node(to).cell;
            let (lo, d) = if c < nc { (c, dir) } else { (nc, dir.opposite()) };
            graph_pairs.insert((lo[0], lo[1], lo[2], d.index(), true));
        } else {
            graph_pairs.insert((c[0], c[1], c[2], dir.index(), false));
        }
    }
    assert_eq!(
        graph_pairs,
        oracle.adjacency_pairs(),
        "{name}: adjacency differs"
    );

    // (c) signs per fine cell
    let field = classify_cells(&tree);
    for i in 0..res {
        for j in 0..res {
            for k in 0..res {
                let node = tree.covering_node([i, j, k]);
                assert_eq!(
                    field.sign(node),
                    oracle.sign([i, j, k]),
                    "{name}: sign differs at {i},{j},{k}"
                );
            }
        }
    }
}

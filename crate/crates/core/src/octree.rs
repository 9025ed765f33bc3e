//! Adaptive octree over occupied cells and the multi-resolution face
//! neighbor graph.
//!
//! A node is *occupied* when its box intersects at least one input triangle;
//! occupied nodes are subdivided until they reach the finest depth, empty
//! nodes are never subdivided. Neighbor connections are built top-down: each
//! node connects its 12 face-adjacent child pairs, recursing so that every
//! occupied leaf ends up linked to the unique equal-or-coarser node across
//! each of its faces.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom::{Point, Vector};
use crate::mesh_io::TriangleMesh;

/// Closed axis-aligned box.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point,
    pub max: Point,
}

impl Aabb {
    pub fn new(min: Point, max: Point) -> Self {
        debug_assert!(min.x <= max.x && min.y <= max.y && min.z <= max.z);
        Aabb { min, max }
    }

    pub fn center(&self) -> Point {
        Point::from((self.min.coords + self.max.coords) * 0.5)
    }

    pub fn half_extents(&self) -> Vector {
        (self.max - self.min) * 0.5
    }

    pub fn size(&self) -> Vector {
        self.max - self.min
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|a| other.min[a] >= self.min[a] && other.max[a] <= self.max[a])
    }

    /// Box grown by `margin` on every side.
    pub fn inflated(&self, margin: f64) -> Aabb {
        let m = Vector::new(margin, margin, margin);
        Aabb::new(Point::from(self.min.coords - m), Point::from(self.max.coords + m))
    }

    /// Child octant `i`, with bit 0 selecting the x half, bit 1 the y half,
    /// and bit 2 the z half. Neighboring octants share the exact midpoint
    /// values, so the eight children tile the parent without gaps.
    pub fn octant(&self, i: usize) -> Aabb {
        debug_assert!(i < 8);
        let mid = self.center();
        let mut min = self.min;
        let mut max = mid;
        for a in 0..3 {
            if (i >> a) & 1 == 1 {
                min[a] = mid[a];
                max[a] = self.max[a];
            }
        }
        Aabb::new(min, max)
    }
}

/// Box of the cell at `cell` on the depth-`depth` lattice inside `root`,
/// computed by the same midpoint descent the octree build uses. This makes
/// grid-based oracles bit-compatible with stored node boxes.
pub fn cell_box(root: &Aabb, depth: u32, cell: [u32; 3]) -> Aabb {
    let mut b = *root;
    for level in (0..depth).rev() {
        let mut i = 0usize;
        for (a, &c) in cell.iter().enumerate() {
            i |= ((c as usize >> level) & 1) << a;
        }
        b = b.octant(i);
    }
    b
}

/// One of the six axis directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    PosX,
    NegX,
    PosY,
    NegY,
    PosZ,
    NegZ,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::PosX,
        Direction::NegX,
        Direction::PosY,
        Direction::NegY,
        Direction::PosZ,
        Direction::NegZ,
    ];

    pub fn axis(self) -> usize {
        match self {
            Direction::PosX | Direction::NegX => 0,
            Direction::PosY | Direction::NegY => 1,
            Direction::PosZ | Direction::NegZ => 2,
        }
    }

    pub fn is_positive(self) -> bool {
        matches!(self, Direction::PosX | Direction::PosY | Direction::PosZ)
    }

    pub fn from_axis(axis: usize, positive: bool) -> Self {
        match (axis, positive) {
            (0, true) => Direction::PosX,
            (0, false) => Direction::NegX,
            (1, true) => Direction::PosY,
            (1, false) => Direction::NegY,
            (2, true) => Direction::PosZ,
            (2, false) => Direction::NegZ,
            _ => panic!("axis out of range"),
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            Direction::PosX => Direction::NegX,
            Direction::NegX => Direction::PosX,
            Direction::PosY => Direction::NegY,
            Direction::NegY => Direction::PosY,
            Direction::PosZ => Direction::NegZ,
            Direction::NegZ => Direction::PosZ,
        }
    }

    pub fn offset(self) -> [i64; 3] {
        let mut o = [0i64; 3];
        o[self.axis()] = if self.is_positive() { 1 } else { -1 };
        o
    }

    pub fn index(self) -> usize {
        match self {
            Direction::PosX => 0,
            Direction::NegX => 1,
            Direction::PosY => 2,
            Direction::NegY => 3,
            Direction::PosZ => 4,
            Direction::NegZ => 5,
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            Direction::PosX => "+x",
            Direction::NegX => "-x",
            Direction::PosY => "+y",
            Direction::NegY => "-y",
            Direction::PosZ => "+z",
            Direction::NegZ => "-z",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeStatus {
    Occupied,
    Empty,
}

/// Arena index of an octree node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn raw(self) -> u32 {
        self.0
    }

    pub(crate) fn from_raw(raw: u32) -> Self {
        NodeId(raw)
    }
}

#[derive(Clone, Debug)]
pub struct OctreeNode {
    pub bbox: Aabb,
    pub status: NodeStatus,
    pub depth: u32,
    /// Integer lattice coordinate of this node at its own depth.
    pub cell: [u32; 3],
    pub children: Option<[NodeId; 8]>,
    /// Indices of input triangles intersecting this node's box.
    pub triangles: Vec<u32>,
}

impl OctreeNode {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn is_occupied(&self) -> bool {
        self.status == NodeStatus::Occupied
    }
}

#[derive(Clone, Debug)]
pub struct OctreeConfig {
    /// Half extent of the cubic root box. Must exceed 1 so a normalized mesh
    /// keeps a margin of empty boundary cells.
    pub root_half_extent: f64,
    /// Requested edge length of the finest cells, in normalized units.
    pub target_leaf_size: f64,
    /// Explicit subdivision depth; when absent it is derived from
    /// `target_leaf_size`, rounding to the next power of two (never coarser
    /// than requested).
    pub max_depth: Option<u32>,
}

impl Default for OctreeConfig {
    fn default() -> Self {
        OctreeConfig {
            root_half_extent: 1.1,
            target_leaf_size: 0.01,
            max_depth: None,
        }
    }
}

impl OctreeConfig {
    pub fn with_depth(depth: u32) -> Self {
        OctreeConfig {
            max_depth: Some(depth),
            ..OctreeConfig::default()
        }
    }

    pub fn effective_max_depth(&self) -> u32 {
        if let Some(d) = self.max_depth {
            return d.max(1);
        }
        let cells = 2.0 * self.root_half_extent / self.target_leaf_size;
        (cells.log2().ceil() as i64).clamp(1, 16) as u32
    }
}

/// Occupied-leaf lookup by finest cell. Dense direct indexing up to 256^3
/// cells (the nearest-triangle search hits this on every ring cell), sparse
/// beyond that.
enum LeafIndex {
    Dense(Vec<u32>),
    Sparse(HashMap<[u32; 3], NodeId>),
}

impl LeafIndex {
    const NONE: u32 = u32::MAX;

    fn new(resolution: u32) -> Self {
        let cells = (resolution as usize).pow(3);
        if cells <= 1 << 24 {
            LeafIndex::Dense(vec![Self::NONE; cells])
        } else {
            LeafIndex::Sparse(HashMap::new())
        }
    }

    fn insert(&mut self, resolution: u32, cell: [u32; 3], id: NodeId) {
        match self {
            LeafIndex::Dense(v) => {
                v[Self::dense_key(resolution, cell)] = id.raw();
            }
            LeafIndex::Sparse(m) => {
                m.insert(cell, id);
            }
        }
    }

    fn get(&self, resolution: u32, cell: [u32; 3]) -> Option<NodeId> {
        match self {
            LeafIndex::Dense(v) => {
                let raw = v[Self::dense_key(resolution, cell)];
                (raw != Self::NONE).then_some(NodeId(raw))
            }
            LeafIndex::Sparse(m) => m.get(&cell).copied(),
        }
    }

    fn dense_key(resolution: u32, cell: [u32; 3]) -> usize {
        ((cell[0] as usize * resolution as usize) + cell[1] as usize) * resolution as usize
            + cell[2] as usize
    }
}

pub struct Octree {
    nodes: Vec<OctreeNode>,
    root_bbox: Aabb,
    max_depth: u32,
    occupied_leaves: Vec<NodeId>,
    leaf_index: LeafIndex,
    triangles: Vec<[Point; 3]>,
}

impl Octree {
    /// Build the tree over a normalized mesh. Every occupied node above the
    /// finest depth is subdivided; triangle sets are reassigned to children
    /// using the exact closed triangle/box overlap test, so a triangle lying
    /// on a shared face lands in both neighbors.
    pub fn build(mesh: &TriangleMesh, cfg: &OctreeConfig) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::EmptyMesh);
        }
        assert!(
            cfg.root_half_extent > 1.0,
            "root box must cover the normalized mesh with a margin"
        );
        let h = cfg.root_half_extent;
        let root_bbox = Aabb::new(Point::new(-h, -h, -h), Point::new(h, h, h));
        let (lo, hi) = mesh.bounding_box().expect("non-empty mesh");
        assert!(
            root_bbox.contains_box(&Aabb::new(lo, hi)),
            "mesh must be normalized before building the octree"
        );

        let max_depth = cfg.effective_max_depth();
        let triangles: Vec<[Point; 3]> = (0..mesh.triangles.len())
            .map(|t| mesh.triangle_points(t))
            .collect();

        let root = OctreeNode {
            bbox: root_bbox,
            status: NodeStatus::Occupied,
            depth: 0,
            cell: [0, 0, 0],
            children: None,
            triangles: (0..triangles.len() as u32).collect(),
        };
        let mut tree = Octree {
            nodes: vec![root],
            root_bbox,
            max_depth,
            occupied_leaves: Vec::new(),
            leaf_index: LeafIndex::new(1 << max_depth),
            triangles,
        };
        tree.subdivide(NodeId(0));
        Ok(tree)
    }

    fn subdivide(&mut self, id: NodeId) {
        let node = &self.nodes[id.index()];
        if node.status == NodeStatus::Empty {
            return;
        }
        if node.depth == self.max_depth {
            let cell = node.cell;
            self.occupied_leaves.push(id);
            self.leaf_index.insert(self.resolution(), cell, id);
            return;
        }

        let bbox = node.bbox;
        let cell = node.cell;
        let depth = node.depth;
        let parent_tris = std::mem::take(&mut self.nodes[id.index()].triangles);

        // Leaf occupancy uses the exact closed-set test. Internal levels only
        // route triangles downward and test against a hair-inflated box, so a
        // triangle grazing a cell boundary can never be lost to rounding on
        // its way down: descent stays a superset of the exact leaf result.
        const ROUTING_MARGIN: f64 = 1e-9;
        let leaf_level = depth + 1 == self.max_depth;

        let mut child_ids = [NodeId(0); 8];
        for (ci, slot) in child_ids.iter_mut().enumerate() {
            let cbox = bbox.octant(ci);
            let test_box = if leaf_level {
                cbox
            } else {
                cbox.inflated(ROUTING_MARGIN)
            };
            let ccell = [
                cell[0] * 2 + (ci as u32 & 1),
                cell[1] * 2 + (ci as u32 >> 1 & 1),
                cell[2] * 2 + (ci as u32 >> 2 & 1),
            ];
            let ctris: Vec<u32> = parent_tris
                .iter()
                .copied()
                .filter(|&t| triangle_box_intersects(&self.triangles[t as usize], &test_box))
                .collect();
            let status = if ctris.is_empty() {
                NodeStatus::Empty
            } else {
                NodeStatus::Occupied
            };
            *slot = NodeId(self.nodes.len() as u32);
            self.nodes.push(OctreeNode {
                bbox: cbox,
                status,
                depth: depth + 1,
                cell: ccell,
                children: None,
                triangles: ctris,
            });
        }
        self.nodes[id.index()].children = Some(child_ids);
        self.nodes[id.index()].triangles = parent_tris;
        for cid in child_ids {
            self.subdivide(cid);
        }
    }

    pub fn root(&self) -> NodeId {
        NodeId(0)
    }

    pub fn node(&self, id: NodeId) -> &OctreeNode {
        &self.nodes[id.index()]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_depth(&self) -> u32 {
        self.max_depth
    }

    pub fn root_bbox(&self) -> &Aabb {
        &self.root_bbox
    }

    /// Number of finest-lattice cells per axis.
    pub fn resolution(&self) -> u32 {
        1 << self.max_depth
    }

    /// Edge length of a finest cell.
    pub fn leaf_size(&self) -> f64 {
        self.root_bbox.size().x / self.resolution() as f64
    }

    pub fn occupied_leaves(&self) -> &[NodeId] {
        &self.occupied_leaves
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).map(|i| NodeId(i as u32))
    }

    pub fn occupied_leaf_at(&self, cell: [u32; 3]) -> Option<NodeId> {
        self.leaf_index.get(self.resolution(), cell)
    }

    pub fn triangle(&self, t: u32) -> &[Point; 3] {
        &self.triangles[t as usize]
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Finest-lattice cell containing `p`, clamped into the lattice.
    pub fn cell_of_point(&self, p: &Point) -> [u32; 3] {
        let res = self.resolution();
        let size = self.leaf_size();
        let mut cell = [0u32; 3];
        for a in 0..3 {
            let rel = (p[a] - self.root_bbox.min[a]) / size;
            cell[a] = (rel.floor() as i64).clamp(0, res as i64 - 1) as u32;
        }
        cell
    }

    /// The terminal node (occupied leaf or empty node of any size) covering
    /// a finest-lattice cell.
    pub fn covering_node(&self, fine: [u32; 3]) -> NodeId {
        debug_assert!(fine.iter().all(|&c| c < self.resolution()));
        let mut id = self.root();
        loop {
            let node = &self.nodes[id.index()];
            let Some(children) = node.children else {
                return id;
            };
            let shift = self.max_depth - node.depth - 1;
            let mut idx = 0usize;
            for (a, &c) in fine.iter().enumerate() {
                idx |= (((c >> shift) & 1) as usize) << a;
            }
            id = children[idx];
        }
    }

    /// All terminal nodes whose finest-lattice footprint intersects the
    /// half-open range `[lo, hi)`.
    pub fn terminal_nodes_in_range(&self, lo: [u32; 3], hi: [u32; 3]) -> Vec<NodeId> {
        let mut out = Vec::new();
        if (0..3).any(|a| lo[a] >= hi[a]) {
            return out;
        }
        self.range_rec(self.root(), lo, hi, &mut out);
        out
    }

    fn range_rec(&self, id: NodeId, lo: [u32; 3], hi: [u32; 3], out: &mut Vec<NodeId>) {
        let node = &self.nodes[id.index()];
        let scale = self.max_depth - node.depth;
        for a in 0..3 {
            let nlo = node.cell[a] << scale;
            let nhi = (node.cell[a] + 1) << scale;
            if nhi <= lo[a] || nlo >= hi[a] {
                return;
            }
        }
        match node.children {
            None => out.push(id),
            Some(children) => {
                for c in children {
                    self.range_rec(c, lo, hi, out);
                }
            }
        }
    }

    /// One line per occupied leaf: `depth i j k`, sorted.
    pub fn dump_occupied(&self) -> String {
        let mut cells: Vec<[u32; 3]> = self
            .occupied_leaves
            .iter()
            .map(|&id| self.node(id).cell)
            .collect();
        cells.sort_unstable();
        let mut out = String::new();
        for c in cells {
            writeln!(out, "{} {} {} {}", self.max_depth, c[0], c[1], c[2]).unwrap();
        }
        out
    }
}

/// Exact closed-set triangle/box overlap via the separating axis theorem:
/// the three box axes, the triangle normal, and the nine edge cross
/// products. Touching counts as intersecting, and degenerate triangles fall
/// back to correct segment/point behavior because a zero axis can never
/// separate.
pub fn triangle_box_intersects(tri: &[Point; 3], aabb: &Aabb) -> bool {
    let c = aabb.center();
    let h = aabb.half_extents();
    let v = [tri[0] - c, tri[1] - c, tri[2] - c];

    // Box face axes.
    for a in 0..3 {
        let lo = v[0][a].min(v[1][a]).min(v[2][a]);
        let hi = v[0][a].max(v[1][a]).max(v[2][a]);
        if lo > h[a] || hi < -h[a] {
            return false;
        }
    }

    let edges = [v[1] - v[0], v[2] - v[1], v[0] - v[2]];

    // Cross products of box axes with triangle edges.
    for e in &edges {
        let axes = [
            Vector::new(0.0, -e.z, e.y),
            Vector::new(e.z, 0.0, -e.x),
            Vector::new(-e.y, e.x, 0.0),
        ];
        for axis in &axes {
            let r = h.x * axis.x.abs() + h.y * axis.y.abs() + h.z * axis.z.abs();
            let p0 = axis.dot(&v[0]);
            let p1 = axis.dot(&v[1]);
            let p2 = axis.dot(&v[2]);
            let lo = p0.min(p1).min(p2);
            let hi = p0.max(p1).max(p2);
            if lo > r || hi < -r {
                return false;
            }
        }
    }

    // Triangle plane.
    let n = edges[0].cross(&edges[1]);
    let r = h.x * n.x.abs() + h.y * n.y.abs() + h.z * n.z.abs();
    let d = n.dot(&v[0]);
    if d > r || d < -r {
        return false;
    }
    true
}

/// Face-neighbor graph stored outgoing from occupied leaves. A slot holds
/// the unique equal-or-coarser node across that face; occupied-occupied
/// pairs are stored once, under the lower node id.
#[derive(Default, Clone, Debug)]
pub struct ConnectionGraph {
    slots: BTreeMap<NodeId, [Option<NodeId>; 6]>,
}

impl ConnectionGraph {
    pub fn neighbor(&self, leaf: NodeId, dir: Direction) -> Option<NodeId> {
        self.slots.get(&leaf).and_then(|s| s[dir.index()])
    }

    pub fn slots(&self, leaf: NodeId) -> [Option<NodeId>; 6] {
        self.slots.get(&leaf).copied().unwrap_or([None; 6])
    }

    /// Flattened edge list `(occupied leaf, direction, neighbor)`, in
    /// deterministic order.
    pub fn connections(&self) -> Vec<(NodeId, Direction, NodeId)> {
        let mut out = Vec::new();
        for (&from, slots) in &self.slots {
            for dir in Direction::ALL {
                if let Some(to) = slots[dir.index()] {
                    out.push((from, dir, to));
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.slots
            .values()
            .map(|s| s.iter().filter(|n| n.is_some()).count())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn set(&mut self, leaf: NodeId, dir: Direction, neighbor: NodeId) {
        let slots = self.slots.entry(leaf).or_insert([None; 6]);
        debug_assert!(slots[dir.index()].is_none(), "duplicate connection slot");
        slots[dir.index()] = Some(neighbor);
    }

    /// One line per connection: `i j k dir neighbor_id`, sorted by leaf cell.
    pub fn dump(&self, tree: &Octree) -> String {
        let mut lines: Vec<([u32; 3], usize, u32)> = Vec::new();
        for (&from, slots) in &self.slots {
            let cell = tree.node(from).cell;
            for dir in Direction::ALL {
                if let Some(to) = slots[dir.index()] {
                    lines.push((cell, dir.index(), to.raw()));
                }
            }
        }
        lines.sort_unstable();
        let mut out = String::new();
        for (cell, dir, to) in lines {
            writeln!(
                out,
                "{} {} {} {} {}",
                cell[0],
                cell[1],
                cell[2],
                Direction::ALL[dir].token(),
                to
            )
            .unwrap();
        }
        out
    }
}

/// Connect every pair of face-adjacent cells reachable from the root, per
/// node: recurse into the eight children, then connect the twelve
/// face-adjacent sibling pairs.
pub fn build_connections(tree: &Octree) -> ConnectionGraph {
    let mut graph = ConnectionGraph::default();
    connect_within(tree, tree.root(), &mut graph);
    graph
}

fn connect_within(tree: &Octree, id: NodeId, graph: &mut ConnectionGraph) {
    let Some(children) = tree.node(id).children else {
        return;
    };
    for c in children {
        connect_within(tree, c, graph);
    }
    // 12 face-adjacent sibling pairs: per axis, the four pairs of children
    // differing only in that axis bit.
    for axis in 0..3 {
        let dir = Direction::from_axis(axis, true);
        for rest in 0..4u32 {
            let others = [(axis + 1) % 3, (axis + 2) % 3];
            let mut low = 0usize;
            low |= ((rest & 1) as usize) << others[0];
            low |= (((rest >> 1) & 1) as usize) << others[1];
            let high = low | (1 << axis);
            connect_nodes(tree, children[low], children[high], dir, graph);
        }
    }
}

/// Recursively connect two face-adjacent nodes, `left` on the low side of
/// `dir`'s axis. Empty-empty pairs produce nothing; an empty node is
/// replicated against the four facing children of the other side; two
/// childless nodes produce the edge itself.
pub fn connect_nodes(
    tree: &Octree,
    left: NodeId,
    right: NodeId,
    dir: Direction,
    graph: &mut ConnectionGraph,
) {
    debug_assert!(dir.is_positive());
    let l = tree.node(left);
    let r = tree.node(right);
    if l.status == NodeStatus::Empty && r.status == NodeStatus::Empty {
        return;
    }
    if l.children.is_none() && r.children.is_none() {
        match (l.status, r.status) {
            (NodeStatus::Occupied, NodeStatus::Occupied) => {
                // Both are finest-depth leaves; store once from the lower id.
                if left < right {
                    graph.set(left, dir, right);
                } else {
                    graph.set(right, dir.opposite(), left);
                }
            }
            (NodeStatus::Occupied, NodeStatus::Empty) => graph.set(left, dir, right),
            (NodeStatus::Empty, NodeStatus::Occupied) => graph.set(right, dir.opposite(), left),
            (NodeStatus::Empty, NodeStatus::Empty) => unreachable!(),
        }
        return;
    }

    let axis = dir.axis();
    let others = [(axis + 1) % 3, (axis + 2) % 3];
    for rest in 0..4u32 {
        let mut base = 0usize;
        base |= ((rest & 1) as usize) << others[0];
        base |= (((rest >> 1) & 1) as usize) << others[1];
        // Left side faces with its high children, right side with its low.
        let li = base | (1 << axis);
        let ri = base;
        let ln = l.children.map_or(left, |k| k[li]);
        let rn = r.children.map_or(right, |k| k[ri]);
        connect_nodes(tree, ln, rn, dir, graph);
    }
}

//! Boundary surface extraction and non-manifold repair.
//!
//! One quad is emitted per (occupied leaf, direction) whose neighbor side is
//! outside — a positive cell, or the exterior of the root box. Quads live on
//! the finest lattice, wound counter-clockwise seen from the outside.
//!
//! Two lattice configurations break manifoldness and are repaired before
//! triangulation:
//!
//! * an edge shared by four quads (two occupied cells diagonal across the
//!   edge) is split into two edge instances, pairing the quads that border
//!   the same outside cell so the occupied volume stays joined;
//! * a vertex whose incident quads fall into several instance-connected
//!   fans is replicated, one copy per fan.
//!
//! An instance pair that still shares both endpoint vertices after the
//! vertex pass cannot be told apart by an indexed mesh (two distinct edges
//! on one vertex pair), so each such instance is pinched through its own
//! midpoint vertex during triangulation. The copies coincide geometrically
//! and the result is a clean 2-manifold complex.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh_io::TriangleMesh;
use crate::octree::{Direction, Octree};
use crate::signfield::{CellSign, SignField};

/// Corner of the extracted surface. `key` is the corner coordinate on the
/// doubled finest lattice (even components for cell corners, odd where an
/// edge midpoint was inserted); split copies share a key.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceVertex {
    pub key: [u32; 3],
    pub position: Point,
}

/// One unit lattice square. `corners` wind counter-clockwise seen from the
/// outside cell; `edge_group` carries the per-side instance tag assigned by
/// the edge split pass (0 = manifold side).
#[derive(Clone, Debug, PartialEq)]
pub struct Quad {
    pub corners: [u32; 4],
    /// Occupied leaf this face belongs to.
    pub cell: [u32; 3],
    pub direction: Direction,
    pub edge_group: [u8; 4],
}

impl Quad {
    /// Undirected vertex-id pair of side `i` (corners\[i\] -> corners\[i+1\]).
    fn side_pair(&self, i: usize) -> (u32, u32) {
        let a = self.corners[i];
        let b = self.corners[(i + 1) % 4];
        (a.min(b), a.max(b))
    }

    /// Outside cell across this quad, on the signed finest lattice (may lie
    /// outside the root box).
    fn outside_cell(&self) -> [i64; 3] {
        let o = self.direction.offset();
        [
            self.cell[0] as i64 + o[0],
            self.cell[1] as i64 + o[1],
            self.cell[2] as i64 + o[2],
        ]
    }
}

type EdgeKey = (u32, u32);

#[derive(Clone, Debug, Default, PartialEq)]
pub struct QuadSurface {
    vertices: Vec<SurfaceVertex>,
    quads: Vec<Quad>,
    /// Edge instances realized through a midpoint vertex: (side pair, tag) ->
    /// midpoint vertex id. Filled by the vertex pass, consumed by
    /// triangulation.
    midpoints: BTreeMap<(EdgeKey, u8), u32>,
    edges_split: bool,
    vertices_split: bool,
}

/// Repair counters.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SplitReport {
    pub edge_splits: usize,
    pub vertex_splits: usize,
}

impl QuadSurface {
    pub fn vertices(&self) -> &[SurfaceVertex] {
        &self.vertices
    }

    pub fn quads(&self) -> &[Quad] {
        &self.quads
    }

    pub fn quad_count(&self) -> usize {
        self.quads.len()
    }

    /// Every quad side as `(undirected pair, quad, side)`, sorted by pair so
    /// one edge's incidences form a consecutive run.
    fn sorted_sides(&self) -> Vec<(EdgeKey, u32, u8)> {
        let mut sides = Vec::with_capacity(self.quads.len() * 4);
        for (qi, quad) in self.quads.iter().enumerate() {
            for side in 0..4 {
                sides.push((quad.side_pair(side), qi as u32, side as u8));
            }
        }
        sides.sort_unstable();
        sides
    }

    /// True when every edge instance is shared by exactly two quads.
    pub fn instances_are_two_manifold(&self) -> bool {
        let mut instances: Vec<(EdgeKey, u8)> = Vec::with_capacity(self.quads.len() * 4);
        for quad in &self.quads {
            for side in 0..4 {
                instances.push((quad.side_pair(side), quad.edge_group[side]));
            }
        }
        instances.sort_unstable();
        let mut i = 0;
        while i < instances.len() {
            let mut j = i;
            while j < instances.len() && instances[j] == instances[i] {
                j += 1;
            }
            if j - i != 2 {
                return false;
            }
            i = j;
        }
        true
    }
}

/// Emit the faces separating occupied leaves from outside cells. A missing
/// neighbor inside the lattice is an occupied twin (those edges are stored
/// once), and a neighbor outside the lattice is the exterior, which is
/// outside by definition.
pub fn extract_boundary_faces(
    tree: &Octree,
    signs: &SignField,
    graph: &crate::octree::ConnectionGraph,
) -> QuadSurface {
    let res = tree.resolution() as i64;
    let mut surface = QuadSurface::default();
    let mut vid_by_key: HashMap<[u32; 3], u32> = HashMap::new();

    for &leaf in tree.occupied_leaves() {
        let cell = tree.node(leaf).cell;
        for dir in Direction::ALL {
            let o = dir.offset();
            let neighbor = [
                cell[0] as i64 + o[0],
                cell[1] as i64 + o[1],
                cell[2] as i64 + o[2],
            ];
            let outside_lattice = neighbor.iter().any(|&c| c < 0 || c >= res);
            let emit = if outside_lattice {
                true
            } else {
                match graph.neighbor(leaf, dir) {
                    Some(n) => signs.sign(n) == CellSign::Positive,
                    None => false,
                }
            };
            if emit {
                push_quad(&mut surface, &mut vid_by_key, tree, cell, dir);
            }
        }
    }
    surface
}

fn push_quad(
    surface: &mut QuadSurface,
    vid_by_key: &mut HashMap<[u32; 3], u32>,
    tree: &Octree,
    cell: [u32; 3],
    dir: Direction,
) {
    let axis = dir.axis();
    // (u, v) chosen so that u x v points along `dir`: the quad then winds
    // counter-clockwise seen from the outside cell.
    let (u_axis, v_axis) = match dir {
        Direction::PosX => (1, 2),
        Direction::NegX => (2, 1),
        Direction::PosY => (2, 0),
        Direction::NegY => (0, 2),
        Direction::PosZ => (0, 1),
        Direction::NegZ => (1, 0),
    };
    let mut base = cell;
    if dir.is_positive() {
        base[axis] += 1;
    }
    let mut corners = [[0u32; 3]; 4];
    corners[0] = base;
    corners[1] = base;
    corners[1][u_axis] += 1;
    corners[2] = corners[1];
    corners[2][v_axis] += 1;
    corners[3] = base;
    corners[3][v_axis] += 1;

    let mut ids = [0u32; 4];
    for (slot, corner) in ids.iter_mut().zip(corners) {
        let key = [corner[0] * 2, corner[1] * 2, corner[2] * 2];
        *slot = *vid_by_key.entry(key).or_insert_with(|| {
            let position = lattice_corner_position(tree, corner);
            surface.vertices.push(SurfaceVertex { key, position });
            (surface.vertices.len() - 1) as u32
        });
    }
    surface.quads.push(Quad {
        corners: ids,
        cell,
        direction: dir,
        edge_group: [0; 4],
    });
}

fn lattice_corner_position(tree: &Octree, corner: [u32; 3]) -> Point {
    let root = tree.root_bbox();
    let res = tree.resolution() as f64;
    Point::new(
        root.min.x + corner[0] as f64 * (root.size().x / res),
        root.min.y + corner[1] as f64 * (root.size().y / res),
        root.min.z + corner[2] as f64 * (root.size().z / res),
    )
}

/// Re-pair the four quads of every non-manifold lattice edge into two edge
/// instances, grouping the two quads that border the same outside cell. The
/// occupied cells stay joined; the outside wedges are pinched apart.
pub fn split_nonmanifold_edges(mut surface: QuadSurface) -> Result<(QuadSurface, SplitReport)> {
    let mut report = SplitReport::default();
    let sides = surface.sorted_sides();
    let mut i = 0;
    while i < sides.len() {
        let pair = sides[i].0;
        let mut j = i;
        while j < sides.len() && sides[j].0 == pair {
            j += 1;
        }
        match j - i {
            2 => {}
            4 => {
                // Group by the outside cell each quad borders. The valid
                // configuration has two occupied cells diagonal across the
                // edge and two outside cells, two quads each.
                let mut members: Vec<([i64; 3], u32, u8)> = sides[i..j]
                    .iter()
                    .map(|&(_, qi, side)| (surface.quads[qi as usize].outside_cell(), qi, side))
                    .collect();
                members.sort_unstable();
                let split_ok = members[0].0 == members[1].0
                    && members[2].0 == members[3].0
                    && members[1].0 != members[2].0;
                if !split_ok {
                    return Err(Error::MalformedSurface(format!(
                        "edge {pair:?} has 4 quads but no diagonal pairing"
                    )));
                }
                for (k, &(_, qi, side)) in members.iter().enumerate() {
                    let tag = 1 + (k / 2) as u8;
                    surface.quads[qi as usize].edge_group[side as usize] = tag;
                }
                report.edge_splits += 1;
            }
            n => {
                return Err(Error::MalformedSurface(format!(
                    "edge {pair:?} borders {n} quads"
                )));
            }
        }
        i = j;
    }
    surface.edges_split = true;
    debug_assert!(surface.instances_are_two_manifold());
    Ok((surface, report))
}

/// Split every vertex whose incident quads form more than one
/// instance-connected fan, then realize edge instances that still collide on
/// a single vertex pair through midpoint vertices.
pub fn split_nonmanifold_vertices(mut surface: QuadSurface) -> Result<(QuadSurface, SplitReport)> {
    assert!(surface.edges_split, "edge split pass must run first");
    let mut report = SplitReport::default();

    // Corner incidence in CSR layout: entries are (quad << 2) | corner.
    let original = surface.vertices.len();
    let mut offsets = vec![0u32; original + 1];
    for quad in &surface.quads {
        for &v in &quad.corners {
            offsets[v as usize + 1] += 1;
        }
    }
    for i in 0..original {
        offsets[i + 1] += offsets[i];
    }
    let mut incidence = vec![0u32; surface.quads.len() * 4];
    {
        let mut cursor = offsets.clone();
        for (qi, quad) in surface.quads.iter().enumerate() {
            for (ci, &v) in quad.corners.iter().enumerate() {
                incidence[cursor[v as usize] as usize] = (qi as u32) << 2 | ci as u32;
                cursor[v as usize] += 1;
            }
        }
    }

    let mut instances: Vec<((EdgeKey, u8), u32)> = Vec::new();
    let mut component: Vec<u32> = Vec::new();
    let mut replacement: Vec<u32> = Vec::new();
    for v in 0..original as u32 {
        let incident = &incidence[offsets[v as usize] as usize..offsets[v as usize + 1] as usize];
        if incident.len() <= 1 {
            continue;
        }
        // Each quad touches v through its two sides containing v. Two quads
        // are fan-adjacent when they share an edge instance at v.
        instances.clear();
        for (local, &packed) in incident.iter().enumerate() {
            let (qi, ci) = (packed >> 2, (packed & 3) as usize);
            let quad = &surface.quads[qi as usize];
            for side in [ci, (ci + 3) % 4] {
                let key = (quad.side_pair(side), quad.edge_group[side]);
                instances.push((key, local as u32));
            }
        }
        instances.sort_unstable();

        // Union the two quads of every instance; instance runs of any other
        // length mean the surface has a hole or an unsplit edge.
        component.clear();
        component.extend(0..incident.len() as u32);
        let find = |parent: &mut Vec<u32>, mut x: u32| {
            while parent[x as usize] != x {
                parent[x as usize] = parent[parent[x as usize] as usize];
                x = parent[x as usize];
            }
            x
        };
        let mut i = 0;
        while i < instances.len() {
            let mut j = i;
            while j < instances.len() && instances[j].0 == instances[i].0 {
                j += 1;
            }
            if j - i != 2 {
                return Err(Error::MalformedSurface(format!(
                    "open fan at vertex {v}: instance {:?} has {} quads",
                    instances[i].0,
                    j - i
                )));
            }
            let (ra, rb) = (
                find(&mut component, instances[i].1),
                find(&mut component, instances[i + 1].1),
            );
            if ra != rb {
                component[ra as usize] = rb;
            }
            i = j;
        }

        // Fan count; component labels normalized in first-seen order so the
        // copy assignment is deterministic.
        replacement.clear();
        let mut roots: Vec<(u32, u32)> = Vec::new();
        for local in 0..incident.len() as u32 {
            let root = find(&mut component, local);
            if !roots.iter().any(|&(r, _)| r == root) {
                let label = roots.len() as u32;
                roots.push((root, label));
            }
        }
        if roots.len() <= 1 {
            continue;
        }
        // Component 0 keeps the original id; the rest get fresh copies at
        // the same key and position.
        replacement.push(v);
        for _ in 1..roots.len() {
            let copy = surface.vertices[v as usize];
            surface.vertices.push(copy);
            replacement.push((surface.vertices.len() - 1) as u32);
        }
        for (local, &packed) in incident.iter().enumerate() {
            let root = find(&mut component, local as u32);
            let label = roots.iter().find(|&&(r, _)| r == root).unwrap().1;
            let new = replacement[label as usize];
            if new != v {
                let (qi, ci) = (packed >> 2, (packed & 3) as usize);
                surface.quads[qi as usize].corners[ci] = new;
            }
        }
        report.vertex_splits += 1;
    }

    // Distinct instances still sharing both endpoints cannot coexist in an
    // indexed mesh; give each its own midpoint vertex.
    let mut tags_by_pair: BTreeMap<EdgeKey, BTreeSet<u8>> = BTreeMap::new();
    for quad in &surface.quads {
        for side in 0..4 {
            let tag = quad.edge_group[side];
            if tag != 0 {
                tags_by_pair.entry(quad.side_pair(side)).or_default().insert(tag);
            }
        }
    }
    for (pair, tags) in tags_by_pair {
        if tags.len() < 2 {
            continue;
        }
        for tag in tags {
            let entry = surface.midpoints.entry((pair, tag));
            if let std::collections::btree_map::Entry::Vacant(slot) = entry {
                let a = surface.vertices[pair.0 as usize];
                let b = surface.vertices[pair.1 as usize];
                let key = [
                    (a.key[0] + b.key[0]) / 2,
                    (a.key[1] + b.key[1]) / 2,
                    (a.key[2] + b.key[2]) / 2,
                ];
                let position = Point::from((a.position.coords + b.position.coords) * 0.5);
                surface.vertices.push(SurfaceVertex { key, position });
                slot.insert((surface.vertices.len() - 1) as u32);
            }
        }
    }

    surface.vertices_split = true;
    Ok((surface, report))
}

/// Turn the repaired quad surface into a triangle mesh. Plain quads split
/// along the (0, 2) diagonal; quads with midpoint sides fan out from their
/// first midpoint. Winding is preserved.
pub fn triangulate(surface: &QuadSurface) -> TriangleMesh {
    assert!(
        surface.edges_split && surface.vertices_split,
        "split passes must run before triangulation"
    );
    let vertices: Vec<Point> = surface.vertices.iter().map(|v| v.position).collect();
    let mut triangles = Vec::with_capacity(surface.quads.len() * 2);
    let mut polygon: Vec<(u32, bool)> = Vec::with_capacity(8);

    for quad in &surface.quads {
        polygon.clear();
        for side in 0..4 {
            polygon.push((quad.corners[side], false));
            let tag = quad.edge_group[side];
            if tag != 0 {
                if let Some(&mid) = surface.midpoints.get(&(quad.side_pair(side), tag)) {
                    polygon.push((mid, true));
                }
            }
        }
        if polygon.len() == 4 {
            let c = &quad.corners;
            triangles.push([c[0], c[1], c[2]]);
            triangles.push([c[0], c[2], c[3]]);
        } else {
            let pivot = polygon.iter().position(|&(_, mid)| mid).unwrap();
            let n = polygon.len();
            for i in 1..n - 1 {
                triangles.push([
                    polygon[pivot].0,
                    polygon[(pivot + i) % n].0,
                    polygon[(pivot + i + 1) % n].0,
                ]);
            }
        }
    }
    TriangleMesh::new(vertices, triangles)
}

//! Projection of the extracted surface back onto the input mesh.
//!
//! Extracted vertices sit on lattice corners, up to one cell away from the
//! surface they trace. Each iteration moves every vertex a bounded step
//! along its own normal toward the nearest input triangle, then applies one
//! uniform Laplacian smoothing pass to keep the mesh fair and flip-free.
//! Connectivity is never modified.

use rayon::prelude::*;

use crate::geom::{closest_point_on_triangle, Point, Vector};
use crate::mesh_io::TriangleMesh;
use crate::octree::Octree;

#[derive(Clone, Copy, Debug)]
pub struct ProjectionParams {
    /// Maximum per-iteration movement along the vertex normal.
    pub step_size: f64,
    pub iterations: u32,
    /// Blend factor toward the 1-ring average, in [0, 1].
    pub smoothing_weight: f64,
    /// Chebyshev radius of cells scanned before the nearest-triangle search
    /// starts expanding ring by ring.
    pub search_radius_cells: u32,
}

impl Default for ProjectionParams {
    fn default() -> Self {
        ProjectionParams {
            step_size: 0.005,
            iterations: 20,
            smoothing_weight: 0.5,
            search_radius_cells: 2,
        }
    }
}

/// Movement summary of a projection run.
#[derive(Clone, Copy, Debug, Default)]
pub struct ProjectionStats {
    pub iterations_run: u32,
    pub mean_distance_before: f64,
    pub mean_distance_after: f64,
    pub max_final_move: f64,
    pub converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct NearestHit {
    pub triangle: u32,
    pub point: Point,
    pub distance: f64,
}

/// Exact nearest input triangle to `p`, searched through the occupied-leaf
/// triangle sets. Cells are visited in Chebyshev rings around the query
/// cell; the search stops once no unvisited ring can beat the current best,
/// so the result equals an exhaustive scan.
pub fn nearest_triangle(p: &Point, tree: &Octree, initial_radius_cells: u32) -> Option<NearestHit> {
    nearest_triangle_seeded(p, tree, initial_radius_cells, None)
}

/// [`nearest_triangle`] with an optional starting candidate, used by the
/// projection loop to seed each query with the previous iteration's hit.
/// The seed only tightens the search bound; the result stays exact.
pub(crate) fn nearest_triangle_seeded(
    p: &Point,
    tree: &Octree,
    initial_radius_cells: u32,
    seed: Option<u32>,
) -> Option<NearestHit> {
    thread_local! {
        // Triangles already evaluated for the current query. Queries are
        // hot (one per vertex per iteration); reuse keeps them alloc-free.
        static TESTED: std::cell::RefCell<Vec<u32>> = const { std::cell::RefCell::new(Vec::new()) };
    }

    let res = tree.resolution();
    let cell_size = tree.leaf_size();
    let root_min = tree.root_bbox().min;
    let center = tree.cell_of_point(p);
    let mut best: Option<NearestHit> = None;

    TESTED.with(|scratch| {
        let mut tested = scratch.borrow_mut();
        tested.clear();

        let consider = |t: u32, tested: &mut Vec<u32>, best: &mut Option<NearestHit>| {
            if tested.contains(&t) {
                return;
            }
            tested.push(t);
            let tri = tree.triangle(t);
            let q = closest_point_on_triangle(p, &tri[0], &tri[1], &tri[2]);
            let d = (p - q).norm();
            let better = match best {
                Some(b) => d < b.distance,
                None => true,
            };
            if better {
                *best = Some(NearestHit {
                    triangle: t,
                    point: q,
                    distance: d,
                });
            }
        };

        if let Some(t) = seed {
            consider(t, &mut tested, &mut best);
        }

        // Rings 0..=initial_radius_cells form the base window; expansion
        // continues past it whenever an unvisited ring could still hold a
        // closer triangle, so the result matches an exhaustive scan.
        let mut r = 0u32;
        loop {
            for_each_ring_cell(center, r, res, |cell| {
                if r > 0 {
                    if let Some(b) = &best {
                        // Conservative lower bound on the distance from p to
                        // this cell's box; a tiny slack absorbs rounding.
                        let mut sq = 0.0f64;
                        for a in 0..3 {
                            let lo = root_min[a] + cell[a] as f64 * cell_size;
                            let hi = lo + cell_size;
                            let d = (lo - p[a]).max(p[a] - hi).max(0.0);
                            sq += d * d;
                        }
                        if sq.sqrt() - 1e-12 > b.distance {
                            return;
                        }
                    }
                }
                let Some(leaf) = tree.occupied_leaf_at(cell) else {
                    return;
                };
                for &t in &tree.node(leaf).triangles {
                    consider(t, &mut tested, &mut best);
                }
            });
            if let Some(b) = &best {
                // Any cell in ring r+1 or beyond is at least r * cell_size
                // away from every point of the query's cell.
                if b.distance <= r as f64 * cell_size {
                    break;
                }
            }
            if r > 2 * res.max(initial_radius_cells) {
                break;
            }
            r += 1;
        }
    });
    best
}

/// Visit every cell whose Chebyshev distance from `center` is exactly `r`,
/// clipped to the lattice.
fn for_each_ring_cell(center: [u32; 3], r: u32, res: u32, mut f: impl FnMut([u32; 3])) {
    let c = [center[0] as i64, center[1] as i64, center[2] as i64];
    let r = r as i64;
    let res = res as i64;
    let mut push = |x: i64, y: i64, z: i64| {
        if x >= 0 && x < res && y >= 0 && y < res && z >= 0 && z < res {
            f([x as u32, y as u32, z as u32]);
        }
    };
    if r == 0 {
        push(c[0], c[1], c[2]);
        return;
    }
    for dx in -r..=r {
        for dy in -r..=r {
            if dx.abs() == r || dy.abs() == r {
                // Side walls run the z range strictly between the caps.
                for dz in -r..=r {
                    if dz.abs() < r {
                        push(c[0] + dx, c[1] + dy, c[2] + dz);
                    }
                }
            }
            push(c[0] + dx, c[1] + dy, c[2] - r);
            push(c[0] + dx, c[1] + dy, c[2] + r);
        }
    }
}

/// Angle-weighted vertex normals. Degenerate fans fall back to the
/// area-weighted average, then to +z.
pub fn vertex_normals(mesh: &TriangleMesh) -> Vec<Vector> {
    normals_for(&mesh.vertices, &mesh.triangles)
}

fn normals_for(positions: &[Point], triangles: &[[u32; 3]]) -> Vec<Vector> {
    let mut angle_sum = vec![Vector::zeros(); positions.len()];
    let mut area_sum = vec![Vector::zeros(); positions.len()];
    for tri in triangles {
        let [a, b, c] = [
            positions[tri[0] as usize],
            positions[tri[1] as usize],
            positions[tri[2] as usize],
        ];
        let cross = (b - a).cross(&(c - a));
        let len = cross.norm();
        if len <= 1e-20 {
            continue;
        }
        let unit = cross / len;
        for (i, &v) in tri.iter().enumerate() {
            let p = positions[v as usize];
            let e1 = positions[tri[(i + 1) % 3] as usize] - p;
            let e2 = positions[tri[(i + 2) % 3] as usize] - p;
            let denom = e1.norm() * e2.norm();
            if denom <= 1e-30 {
                continue;
            }
            let angle = (e1.dot(&e2) / denom).clamp(-1.0, 1.0).acos();
            angle_sum[v as usize] += unit * angle;
        }
        for &v in tri {
            area_sum[v as usize] += cross;
        }
    }
    angle_sum
        .into_iter()
        .zip(area_sum)
        .map(|(a, ar)| {
            if a.norm() > 1e-12 {
                a.normalize()
            } else if ar.norm() > 1e-12 {
                ar.normalize()
            } else {
                Vector::z()
            }
        })
        .collect()
}

fn neighbor_lists(vertex_count: usize, triangles: &[[u32; 3]]) -> Vec<Vec<u32>> {
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); vertex_count];
    for tri in triangles {
        for i in 0..3 {
            let (a, b) = (tri[i], tri[(i + 1) % 3]);
            neighbors[a as usize].push(b);
            neighbors[b as usize].push(a);
        }
    }
    for list in &mut neighbors {
        list.sort_unstable();
        list.dedup();
    }
    neighbors
}

fn smooth_positions(positions: &[Point], neighbors: &[Vec<u32>], weight: f64) -> Vec<Point> {
    positions
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let list = &neighbors[i];
            if list.is_empty() || weight == 0.0 {
                return *p;
            }
            let mut avg = Vector::zeros();
            for &n in list {
                avg += positions[n as usize].coords;
            }
            avg /= list.len() as f64;
            Point::from(p.coords * (1.0 - weight) + avg * weight)
        })
        .collect()
}

/// Move every vertex to `(1 - weight) * v + weight * mean(1-ring)`.
pub fn laplacian_smooth(mesh: &TriangleMesh, weight: f64) -> TriangleMesh {
    let neighbors = neighbor_lists(mesh.vertices.len(), &mesh.triangles);
    TriangleMesh::new(
        smooth_positions(&mesh.vertices, &neighbors, weight),
        mesh.triangles.clone(),
    )
}

/// Iteratively pull the extracted vertices onto the input surface held by
/// the octree. Triangle connectivity is returned bit-identical.
pub fn project_to_surface(
    extracted: &TriangleMesh,
    tree: &Octree,
    params: &ProjectionParams,
) -> (TriangleMesh, ProjectionStats) {
    const NO_SEED: u32 = u32::MAX;

    let triangles = extracted.triangles.clone();
    let mut positions = extracted.vertices.clone();
    let neighbors = neighbor_lists(positions.len(), &triangles);
    let radius = params.search_radius_cells;
    let vertex_count = positions.len().max(1);
    let mut last_hit: Vec<u32> = vec![NO_SEED; positions.len()];
    let mut stats = ProjectionStats::default();

    let mean_with_seeds = |pts: &[Point], seeds: &[u32]| -> f64 {
        let total: f64 = pts
            .par_iter()
            .zip(seeds)
            .map(|(p, &s)| {
                let seed = (s != NO_SEED).then_some(s);
                nearest_triangle_seeded(p, tree, radius, seed).map_or(0.0, |h| h.distance)
            })
            .sum();
        total / vertex_count as f64
    };

    for iter in 0..params.iterations {
        let normals = normals_for(&positions, &triangles);
        let results: Vec<(Point, u32, f64)> = positions
            .par_iter()
            .enumerate()
            .map(|(i, p)| {
                let seed = (last_hit[i] != NO_SEED).then_some(last_hit[i]);
                let Some(hit) = nearest_triangle_seeded(p, tree, radius, seed) else {
                    return (*p, NO_SEED, 0.0);
                };
                let gap = (hit.point - p).dot(&normals[i]);
                let step = gap.clamp(-params.step_size, params.step_size);
                (p + normals[i] * step, hit.triangle, hit.distance)
            })
            .collect();
        if iter == 0 {
            stats.mean_distance_before =
                results.iter().map(|r| r.2).sum::<f64>() / vertex_count as f64;
        }
        for (slot, r) in last_hit.iter_mut().zip(&results) {
            *slot = r.1;
        }
        let moved: Vec<Point> = results.into_iter().map(|r| r.0).collect();
        let smoothed = smooth_positions(&moved, &neighbors, params.smoothing_weight);
        let max_move = positions
            .iter()
            .zip(&smoothed)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        positions = smoothed;
        stats.iterations_run += 1;
        stats.max_final_move = max_move;
        if max_move < 1e-6 {
            stats.converged = true;
            break;
        }
    }

    if params.iterations == 0 {
        stats.mean_distance_before = mean_with_seeds(&positions, &last_hit);
        stats.mean_distance_after = stats.mean_distance_before;
    } else {
        stats.mean_distance_after = mean_with_seeds(&positions, &last_hit);
    }
    (TriangleMesh::new(positions, triangles), stats)
}

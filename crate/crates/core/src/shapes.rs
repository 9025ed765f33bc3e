//! Procedural test and demo geometry: primitives, soups, and the awkward
//! configurations the repair passes exist for.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geom::Point;
use crate::mesh_io::TriangleMesh;

/// Closed axis-aligned box surface, outward counter-clockwise winding.
pub fn box_surface(min: &Point, max: &Point) -> TriangleMesh {
    let (n, x) = (min, max);
    let vertices = vec![
        Point::new(n.x, n.y, n.z),
        Point::new(x.x, n.y, n.z),
        Point::new(x.x, x.y, n.z),
        Point::new(n.x, x.y, n.z),
        Point::new(n.x, n.y, x.z),
        Point::new(x.x, n.y, x.z),
        Point::new(x.x, x.y, x.z),
        Point::new(n.x, x.y, x.z),
    ];
    let triangles = vec![
        [0, 3, 2],
        [0, 2, 1],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [3, 7, 6],
        [3, 6, 2],
        [0, 4, 7],
        [0, 7, 3],
        [1, 2, 6],
        [1, 6, 5],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Cube centered at the origin with the given half extent.
pub fn cube(half: f64) -> TriangleMesh {
    box_surface(
        &Point::new(-half, -half, -half),
        &Point::new(half, half, half),
    )
}

/// Unit icosphere: subdivided icosahedron projected onto the sphere.
pub fn icosphere(subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5.0f64.sqrt()) / 2.0;
    let raw = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ];
    let mut vertices: Vec<Point> = raw
        .iter()
        .map(|&(x, y, z)| {
            let len = (x * x + y * y + z * z).sqrt();
            Point::new(x / len, y / len, z / len)
        })
        .collect();
    let mut triangles: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];

    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for tri in &triangles {
            let mut mids = [0u32; 3];
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mids[i] = *midpoint.entry(key).or_insert_with(|| {
                    let m = (vertices[a as usize].coords + vertices[b as usize].coords) * 0.5;
                    let m = m / m.norm();
                    vertices.push(Point::from(m));
                    (vertices.len() - 1) as u32
                });
            }
            next.push([tri[0], mids[0], mids[2]]);
            next.push([tri[1], mids[1], mids[0]]);
            next.push([tri[2], mids[2], mids[1]]);
            next.push([mids[0], mids[1], mids[2]]);
        }
        triangles = next;
    }
    TriangleMesh::new(vertices, triangles)
}

/// Parametric torus around the z axis. `major` is the center-circle radius,
/// `minor` the tube radius.
pub fn torus(major: f64, minor: f64, segments_u: u32, segments_v: u32) -> TriangleMesh {
    let (nu, nv) = (segments_u.max(3), segments_v.max(3));
    let mut vertices = Vec::with_capacity((nu * nv) as usize);
    for i in 0..nu {
        let theta = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let ring = major + minor * phi.cos();
            vertices.push(Point::new(
                ring * theta.cos(),
                ring * theta.sin(),
                minor * phi.sin(),
            ));
        }
    }
    let mut triangles = Vec::with_capacity((nu * nv * 2) as usize);
    let at = |i: u32, j: u32| (i % nu) * nv + (j % nv);
    for i in 0..nu {
        for j in 0..nv {
            let a = at(i, j);
            let b = at(i + 1, j);
            let c = at(i + 1, j + 1);
            let d = at(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Open square plane grid in the z = 0 plane, normals up.
pub fn plane_grid(half: f64, cells: u32) -> TriangleMesh {
    plane_grid_filtered(half, cells, |_, _| true)
}

/// Plane grid with a circular hole of the given radius around the origin.
pub fn plane_with_hole(half: f64, cells: u32, hole_radius: f64) -> TriangleMesh {
    plane_grid_filtered(half, cells, |cx, cy| {
        (cx * cx + cy * cy).sqrt() > hole_radius
    })
}

/// Narrow one-sided ribbon, the classic flip-prone thin structure.
pub fn thin_sheet(half_length: f64, half_width: f64, cells: u32) -> TriangleMesh {
    let n = cells.max(1);
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for i in 0..=n {
        let x = -half_length + 2.0 * half_length * i as f64 / n as f64;
        vertices.push(Point::new(x, -half_width, 0.0));
        vertices.push(Point::new(x, half_width, 0.0));
    }
    for i in 0..n {
        let a = 2 * i;
        triangles.push([a, a + 2, a + 3]);
        triangles.push([a, a + 3, a + 1]);
    }
    TriangleMesh::new(vertices, triangles)
}

fn plane_grid_filtered(half: f64, cells: u32, keep: impl Fn(f64, f64) -> bool) -> TriangleMesh {
    let n = cells.max(1);
    let step = 2.0 * half / n as f64;
    let mut vertices = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(-half + i as f64 * step, -half + j as f64 * step, 0.0));
        }
    }
    let at = |i: u32, j: u32| j * (n + 1) + i;
    let mut triangles = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let cx = -half + (i as f64 + 0.5) * step;
            let cy = -half + (j as f64 + 0.5) * step;
            if !keep(cx, cy) {
                continue;
            }
            let a = at(i, j);
            let b = at(i + 1, j);
            let c = at(i + 1, j + 1);
            let d = at(i, j + 1);
            triangles.push([a, b, c]);
            triangles.push([a, c, d]);
        }
    }
    TriangleMesh::new(vertices, triangles)
}

/// Soup of independent unit-cube surfaces, one per cell coordinate.
/// Shared faces between neighboring cells are duplicated on purpose.
pub fn voxel_soup_mesh(cells: &[[i32; 3]], cell_size: f64) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for c in cells {
        let min = Point::new(
            c[0] as f64 * cell_size,
            c[1] as f64 * cell_size,
            c[2] as f64 * cell_size,
        );
        let max = Point::new(min.x + cell_size, min.y + cell_size, min.z + cell_size);
        let cube = box_surface(&min, &max);
        let base = vertices.len() as u32;
        vertices.extend(cube.vertices);
        triangles.extend(cube.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
    TriangleMesh::new(vertices, triangles)
}

/// Deterministic random cell pattern inside `dims`, at least one cell.
pub fn random_voxel_cells(seed: u64, dims: [u32; 3], fill: f64) -> Vec<[i32; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cells = Vec::new();
    for x in 0..dims[0] {
        for y in 0..dims[1] {
            for z in 0..dims[2] {
                if rng.gen::<f64>() < fill {
                    cells.push([x as i32, y as i32, z as i32]);
                }
            }
        }
    }
    if cells.is_empty() {
        cells.push([0, 0, 0]);
    }
    cells
}

/// The 3x3x1 voxel ring: a solid torus of eight cells around a hollow
/// center column.
pub fn voxel_ring_mesh() -> TriangleMesh {
    let cells: Vec<[i32; 3]> = (0..3)
        .flat_map(|x| (0..3).map(move |y| [x, y, 0]))
        .filter(|c| !(c[0] == 1 && c[1] == 1))
        .collect();
    voxel_soup_mesh(&cells, 1.0)
}

/// Two cubes whose voxelizations meet at exactly one lattice corner.
///
/// The gap `2*delta` is smaller than a leaf cell at the default depth, so the
/// occupied cells touch diagonally across the origin corner without any
/// shared occupied cell between them.
pub fn two_boxes_vertex_touch() -> TriangleMesh {
    let delta = 0.002;
    let a = box_surface(&Point::new(delta, delta, delta), &Point::new(0.9, 0.9, 0.9));
    let b = box_surface(
        &Point::new(-0.9, -0.9, -0.9),
        &Point::new(-delta, -delta, -delta),
    );
    merge(&[a, b])
}

/// Two prisms whose voxelizations meet along a lattice edge column.
pub fn two_boxes_edge_touch() -> TriangleMesh {
    let delta = 0.002;
    let a = box_surface(
        &Point::new(delta, delta, -0.45),
        &Point::new(0.9, 0.9, 0.45),
    );
    let b = box_surface(
        &Point::new(-0.9, -0.9, -0.45),
        &Point::new(-delta, -delta, 0.45),
    );
    merge(&[a, b])
}

/// Two interpenetrating cube shells (a self-intersecting soup).
pub fn interpenetrating_boxes() -> TriangleMesh {
    let a = box_surface(&Point::new(-0.7, -0.7, -0.7), &Point::new(0.25, 0.25, 0.25));
    let b = box_surface(&Point::new(-0.25, -0.25, -0.25), &Point::new(0.7, 0.7, 0.7));
    merge(&[a, b])
}

/// Two triangles sharing a single vertex.
pub fn bowtie_soup() -> TriangleMesh {
    let vertices = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(-0.8, -0.3, 0.1),
        Point::new(-0.8, 0.3, -0.1),
        Point::new(0.8, 0.3, 0.1),
        Point::new(0.8, -0.3, -0.1),
    ];
    let triangles = vec![[0, 1, 2], [0, 3, 4]];
    TriangleMesh::new(vertices, triangles)
}

/// A strip whose windings disagree between neighboring triangles.
pub fn nonoriented_soup() -> TriangleMesh {
    let vertices = vec![
        Point::new(-0.9, -0.3, 0.0),
        Point::new(-0.3, -0.3, 0.05),
        Point::new(0.3, -0.3, 0.0),
        Point::new(0.9, -0.3, -0.05),
        Point::new(-0.9, 0.3, 0.05),
        Point::new(-0.3, 0.3, 0.0),
        Point::new(0.3, 0.3, -0.05),
        Point::new(0.9, 0.3, 0.0),
    ];
    let triangles = vec![
        [0, 1, 5],
        [0, 4, 5], // flipped relative to its neighbor
        [1, 2, 6],
        [1, 6, 5],
        [2, 6, 3], // flipped
        [3, 6, 7],
    ];
    TriangleMesh::new(vertices, triangles)
}

/// Concatenate meshes into one soup.
pub fn merge(meshes: &[TriangleMesh]) -> TriangleMesh {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for m in meshes {
        let base = vertices.len() as u32;
        vertices.extend(m.vertices.iter().copied());
        triangles.extend(m.triangles.iter().map(|t| [t[0] + base, t[1] + base, t[2] + base]));
    }
    TriangleMesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{triangle_centroid, triangle_unit_normal};

    fn normals_point_outward(mesh: &TriangleMesh) -> bool {
        // Valid for shapes that are star-shaped around the origin.
        mesh.triangles.iter().all(|t| {
            let [a, b, c] = [
                mesh.vertices[t[0] as usize],
                mesh.vertices[t[1] as usize],
                mesh.vertices[t[2] as usize],
            ];
            let n = triangle_unit_normal(&a, &b, &c).unwrap();
            let centroid = triangle_centroid(&a, &b, &c);
            n.dot(&centroid.coords) > 0.0
        })
    }

    #[test]
    fn cube_winds_outward() {
        assert!(normals_point_outward(&cube(1.0)));
    }

    #[test]
    fn icosphere_winds_outward_and_is_unit() {
        let s = icosphere(2);
        assert!(normals_point_outward(&s));
        for v in &s.vertices {
            assert!((v.coords.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.triangles.len(), 320);
    }

    #[test]
    fn torus_winds_outward_from_tube_center() {
        let t = torus(0.7, 0.25, 24, 12);
        for tri in &t.triangles {
            let [a, b, c] = [
                t.vertices[tri[0] as usize],
                t.vertices[tri[1] as usize],
                t.vertices[tri[2] as usize],
            ];
            let n = triangle_unit_normal(&a, &b, &c).unwrap();
            let centroid = triangle_centroid(&a, &b, &c);
            // Direction from the tube's center circle to the centroid.
            let ring = 0.7;
            let radial = nalgebra::Vector2::new(centroid.x, centroid.y).normalize() * ring;
            let tube_center = Point::new(radial.x, radial.y, 0.0);
            assert!(n.dot(&(centroid - tube_center)) > 0.0);
        }
    }

    #[test]
    fn voxel_ring_has_eight_cubes() {
        let m = voxel_ring_mesh();
        assert_eq!(m.triangles.len(), 8 * 12);
    }

    #[test]
    fn random_cells_deterministic() {
        let a = random_voxel_cells(3, [4, 4, 4], 0.4);
        let b = random_voxel_cells(3, [4, 4, 4], 0.4);
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }
}

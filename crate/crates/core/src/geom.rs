//! Small geometric primitives shared across the crate.

pub type Point = nalgebra::Point3<f64>;
pub type Vector = nalgebra::Vector3<f64>;

pub fn triangle_area(a: &Point, b: &Point, c: &Point) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

pub fn triangle_centroid(a: &Point, b: &Point, c: &Point) -> Point {
    Point::new(
        (a.x + b.x + c.x) / 3.0,
        (a.y + b.y + c.y) / 3.0,
        (a.z + b.z + c.z) / 3.0,
    )
}

/// Unit normal of the triangle, or `None` when the triangle is degenerate.
pub fn triangle_unit_normal(a: &Point, b: &Point, c: &Point) -> Option<Vector> {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len > 1e-20 {
        Some(n / len)
    } else {
        None
    }
}

fn closest_point_on_segment(p: &Point, a: &Point, b: &Point) -> Point {
    let ab = b - a;
    let denom = ab.norm_squared();
    if denom <= 0.0 {
        return *a;
    }
    let t = ((p - a).dot(&ab) / denom).clamp(0.0, 1.0);
    a + ab * t
}

/// Closest point on the closed triangle `abc` to `p`, by Voronoi-region
/// classification. Falls back to edge projections when the triangle is
/// (numerically) degenerate.
pub fn closest_point_on_triangle(p: &Point, a: &Point, b: &Point, c: &Point) -> Point {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;

    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }

    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }

    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let t = d1 / (d1 - d3);
        return a + ab * t;
    }

    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }

    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let t = d2 / (d2 - d6);
        return a + ac * t;
    }

    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * t;
    }

    let sum = va + vb + vc;
    if !sum.is_finite() || sum.abs() <= 1e-300 {
        // Degenerate triangle: nearest point lies on one of the edges.
        let candidates = [
            closest_point_on_segment(p, a, b),
            closest_point_on_segment(p, b, c),
            closest_point_on_segment(p, c, a),
        ];
        return candidates
            .into_iter()
            .min_by(|x, y| (p - x).norm().partial_cmp(&(p - y).norm()).unwrap())
            .unwrap();
    }
    let denom = 1.0 / sum;
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closest_point_interior() {
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        let c = Point::new(0.0, 1.0, 0.0);
        let p = Point::new(0.25, 0.25, 1.0);
        let q = closest_point_on_triangle(&p, &a, &b, &c);
        assert!((q - Point::new(0.25, 0.25, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closest_point_vertex_and_edge_regions() {
        let a = Point::new(0.0, 0.0, 0.0);
        let b = Point::new(1.0, 0.0, 0.0);
        let c = Point::new(0.0, 1.0, 0.0);

        let q = closest_point_on_triangle(&Point::new(-1.0, -1.0, 0.5), &a, &b, &c);
        assert!((q - a).norm() < 1e-12);

        let q = closest_point_on_triangle(&Point::new(0.5, -2.0, 0.0), &a, &b, &c);
        assert!((q - Point::new(0.5, 0.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn closest_point_matches_dense_sampling() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mut pt = || {
                Point::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            };
            let (a, b, c, p) = (pt(), pt(), pt(), pt());
            let q = closest_point_on_triangle(&p, &a, &b, &c);
            let best = (p - q).norm();
            // Dense barycentric sampling can only find worse-or-equal points.
            let n = 40;
            for i in 0..=n {
                for j in 0..=(n - i) {
                    let u = i as f64 / n as f64;
                    let v = j as f64 / n as f64;
                    let w = 1.0 - u - v;
                    let s = Point::from(a.coords * u + b.coords * v + c.coords * w);
                    assert!((p - s).norm() >= best - 1e-9);
                }
            }
        }
    }
}

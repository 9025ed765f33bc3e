//! Triangle mesh loading, serialization, and normalization.
//!
//! Both supported formats are ASCII. OBJ honors `v`/`f` records, `#`
//! comments, negative (relative) indices, and `f 1/2/3` style sub-indices;
//! everything else (normals, materials, groups) is ignored. OFF is the
//! standard header/counts/vertices/faces layout. Faces with more than three
//! corners are fan-triangulated, and degenerate triangles are dropped on
//! load so the rest of the pipeline can assume clean index triples.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geom::{triangle_area, Point, Vector};

/// Area below which a triangle is considered degenerate and dropped.
const DEGENERATE_AREA: f64 = 1e-12;

/// Indexed triangle soup. Triangles wind counter-clockwise seen from the
/// outward-facing side.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[u32; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[u32; 3]>) -> Self {
        let mesh = TriangleMesh {
            vertices,
            triangles,
        };
        debug_assert!(mesh
            .triangles
            .iter()
            .all(|t| t.iter().all(|&i| (i as usize) < mesh.vertices.len())));
        mesh
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [
            self.vertices[tri[0] as usize],
            self.vertices[tri[1] as usize],
            self.vertices[tri[2] as usize],
        ]
    }

    /// Componentwise (min, max) over all vertices, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        let mut lo = first;
        let mut hi = first;
        for v in &self.vertices {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        Some((lo, hi))
    }
}

/// Supported ASCII mesh formats.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Off,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "obj" => Some(MeshFormat::Obj),
            "off" => Some(MeshFormat::Off),
            _ => None,
        }
    }
}

/// Counters reported alongside a successful load.
#[derive(Clone, Copy, Debug, Default)]
pub struct LoadStats {
    /// Triangles dropped because they repeat an index or have ~zero area.
    pub dropped_degenerate: usize,
}

pub fn load_mesh(source: impl Read, format: MeshFormat) -> Result<TriangleMesh> {
    load_mesh_with_stats(source, format).map(|(mesh, _)| mesh)
}

pub fn load_mesh_with_stats(
    source: impl Read,
    format: MeshFormat,
) -> Result<(TriangleMesh, LoadStats)> {
    let reader = BufReader::new(source);
    let (vertices, raw_triangles) = match format {
        MeshFormat::Obj => parse_obj(reader)?,
        MeshFormat::Off => parse_off(reader)?,
    };
    let mut triangles = Vec::with_capacity(raw_triangles.len());
    let mut dropped = 0usize;
    for t in raw_triangles {
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            dropped += 1;
            continue;
        }
        let area = triangle_area(
            &vertices[t[0] as usize],
            &vertices[t[1] as usize],
            &vertices[t[2] as usize],
        );
        if area <= DEGENERATE_AREA {
            dropped += 1;
            continue;
        }
        triangles.push(t);
    }
    if triangles.is_empty() {
        return Err(Error::EmptyMesh);
    }
    Ok((
        TriangleMesh::new(vertices, triangles),
        LoadStats {
            dropped_degenerate: dropped,
        },
    ))
}

fn parse_obj(reader: impl BufRead) -> Result<(Vec<Point>, Vec<[u32; 3]>)> {
    let mut vertices: Vec<Point> = Vec::new();
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_ascii_whitespace();
        match fields.next() {
            Some("v") => {
                let mut coords = [0.0f64; 3];
                for c in &mut coords {
                    let tok = fields
                        .next()
                        .ok_or_else(|| Error::parse_at(line_no, "vertex needs 3 coordinates"))?;
                    *c = tok.parse().map_err(|_| {
                        Error::parse_at(line_no, format!("bad coordinate `{tok}`"))
                    })?;
                }
                vertices.push(Point::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut face: Vec<u32> = Vec::with_capacity(4);
                for tok in fields {
                    // "i", "i/j", "i/j/k", "i//k" — only the vertex slot matters.
                    let vtok = tok.split('/').next().unwrap_or("");
                    let raw: i64 = vtok.parse().map_err(|_| {
                        Error::parse_at(line_no, format!("bad face index `{tok}`"))
                    })?;
                    let resolved = match raw {
                        0 => return Err(Error::parse_at(line_no, "face index 0 is invalid")),
                        n if n > 0 => (n - 1) as usize,
                        n => {
                            let back = (-n) as usize;
                            if back > vertices.len() {
                                return Err(Error::parse_at(
                                    line_no,
                                    format!("relative index {n} out of range"),
                                ));
                            }
                            vertices.len() - back
                        }
                    };
                    if resolved >= vertices.len() {
                        return Err(Error::parse_at(
                            line_no,
                            format!("face index {raw} out of range"),
                        ));
                    }
                    face.push(resolved as u32);
                }
                if face.len() < 3 {
                    return Err(Error::parse_at(line_no, "face needs at least 3 vertices"));
                }
                for i in 1..face.len() - 1 {
                    triangles.push([face[0], face[i], face[i + 1]]);
                }
            }
            // vn/vt/g/o/s/usemtl/mtllib and friends are ignored.
            _ => {}
        }
    }
    Ok((vertices, triangles))
}

fn parse_off(reader: impl BufRead) -> Result<(Vec<Point>, Vec<[u32; 3]>)> {
    // Tokenize the whole stream, remembering line numbers for diagnostics.
    let mut tokens: Vec<(usize, String)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        for tok in line.split_ascii_whitespace() {
            tokens.push((idx + 1, tok.to_string()));
        }
    }
    let mut cursor = 0usize;
    let mut next = |what: &str| -> Result<(usize, String)> {
        let t = tokens
            .get(cursor)
            .cloned()
            .ok_or_else(|| Error::parse_at(tokens.last().map_or(1, |t| t.0), format!("unexpected end of file, expected {what}")))?;
        cursor += 1;
        Ok(t)
    };

    let (line, header) = next("OFF header")?;
    if !header.eq_ignore_ascii_case("OFF") {
        return Err(Error::parse_at(line, format!("expected OFF header, found `{header}`")));
    }
    let mut counts = [0usize; 3];
    for c in &mut counts {
        let (line, tok) = next("count")?;
        *c = tok
            .parse()
            .map_err(|_| Error::parse_at(line, format!("bad count `{tok}`")))?;
    }
    let (nv, nf) = (counts[0], counts[1]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut coords = [0.0f64; 3];
        for c in &mut coords {
            let (line, tok) = next("coordinate")?;
            *c = tok
                .parse()
                .map_err(|_| Error::parse_at(line, format!("bad coordinate `{tok}`")))?;
        }
        vertices.push(Point::new(coords[0], coords[1], coords[2]));
    }

    let mut triangles = Vec::new();
    for _ in 0..nf {
        let (line, tok) = next("face size")?;
        let k: usize = tok
            .parse()
            .map_err(|_| Error::parse_at(line, format!("bad face size `{tok}`")))?;
        if k < 3 {
            return Err(Error::parse_at(line, "face needs at least 3 vertices"));
        }
        let mut face = Vec::with_capacity(k);
        for _ in 0..k {
            let (line, tok) = next("face index")?;
            let i: usize = tok
                .parse()
                .map_err(|_| Error::parse_at(line, format!("bad face index `{tok}`")))?;
            if i >= vertices.len() {
                return Err(Error::parse_at(line, format!("face index {i} out of range")));
            }
            face.push(i as u32);
        }
        for i in 1..k - 1 {
            triangles.push([face[0], face[i], face[i + 1]]);
        }
    }
    Ok((vertices, triangles))
}

/// Serialize a mesh. The float formatting round-trips exactly, so
/// write → load → write is byte-stable.
pub fn write_mesh(mesh: &TriangleMesh, format: MeshFormat) -> Vec<u8> {
    let mut out = String::new();
    match format {
        MeshFormat::Obj => {
            for v in &mesh.vertices {
                writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
            }
            for t in &mesh.triangles {
                writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
            }
        }
        MeshFormat::Off => {
            writeln!(out, "OFF").unwrap();
            writeln!(out, "{} {} 0", mesh.vertices.len(), mesh.triangles.len()).unwrap();
            for v in &mesh.vertices {
                writeln!(out, "{} {} {}", v.x, v.y, v.z).unwrap();
            }
            for t in &mesh.triangles {
                writeln!(out, "3 {} {} {}", t[0], t[1], t[2]).unwrap();
            }
        }
    }
    out.into_bytes()
}

/// Translation applied before a uniform scale: `p' = (p + translation) * scale`.
#[derive(Clone, Copy, Debug)]
pub struct NormalizationTransform {
    pub translation: Vector,
    pub scale: f64,
}

impl NormalizationTransform {
    pub fn identity() -> Self {
        NormalizationTransform {
            translation: Vector::zeros(),
            scale: 1.0,
        }
    }

    pub fn apply(&self, p: &Point) -> Point {
        Point::from((p.coords + self.translation) * self.scale)
    }

    pub fn invert(&self, p: &Point) -> Point {
        Point::from(p.coords / self.scale - self.translation)
    }
}

/// Center the bounding box at the origin and scale uniformly so the largest
/// axis spans exactly [-1, 1].
pub fn normalize(mesh: &TriangleMesh) -> Result<(TriangleMesh, NormalizationTransform)> {
    let (lo, hi) = mesh.bounding_box().ok_or(Error::EmptyMesh)?;
    let extent = (hi - lo).max();
    if !extent.is_finite() || extent <= 0.0 {
        return Err(Error::ZeroExtent);
    }
    let scale = 2.0 / extent;
    if !scale.is_finite() {
        return Err(Error::ZeroExtent);
    }
    let center = Point::from((lo.coords + hi.coords) * 0.5);
    let transform = NormalizationTransform {
        translation: -center.coords,
        scale,
    };
    let vertices = mesh.vertices.iter().map(|v| transform.apply(v)).collect();
    Ok((
        TriangleMesh::new(vertices, mesh.triangles.clone()),
        transform,
    ))
}

/// Undo [`normalize`], mapping a mesh back into the input coordinate frame.
pub fn denormalize(mesh: &TriangleMesh, transform: &NormalizationTransform) -> TriangleMesh {
    let vertices = mesh.vertices.iter().map(|v| transform.invert(v)).collect();
    TriangleMesh::new(vertices, mesh.triangles.clone())
}

//! End-to-end conversion: normalize, voxelize, classify, extract, repair,
//! triangulate, optionally project, and verify.

use crate::error::{Error, Result};
use crate::extract::{
    extract_boundary_faces, split_nonmanifold_edges, split_nonmanifold_vertices, triangulate,
    SplitReport,
};
use crate::mesh_io::{denormalize, normalize, MeshFormat, TriangleMesh};
use crate::octree::{build_connections, Octree, OctreeConfig};
use crate::project::{project_to_surface, ProjectionParams, ProjectionStats};
use crate::signfield::classify_cells;
use crate::verify::{check_manifold, count_face_flips, ManifoldReport};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub octree: OctreeConfig,
    pub projection: ProjectionParams,
    pub project_enabled: bool,
    pub output_format: MeshFormat,
    pub emit_report: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            octree: OctreeConfig::default(),
            projection: ProjectionParams::default(),
            project_enabled: true,
            output_format: MeshFormat::Obj,
            emit_report: true,
        }
    }
}

/// Counters describing one conversion run.
#[derive(Clone, Debug, Default)]
pub struct PipelineStats {
    pub occupied_leaves: usize,
    pub quad_count: usize,
    pub splits: SplitReport,
    pub projection: Option<ProjectionStats>,
}

pub struct PipelineResult {
    /// Watertight output mesh, in the input coordinate frame.
    pub mesh: TriangleMesh,
    pub report: ManifoldReport,
    pub stats: PipelineStats,
}

/// Run the full conversion. The returned report describes the final mesh;
/// verification runs in the normalized frame, which is equivalent under the
/// translation + uniform scale applied on output.
pub fn run_pipeline(input: &TriangleMesh, cfg: &PipelineConfig) -> Result<PipelineResult> {
    if input.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let (normalized, transform) = normalize(input)?;
    let tree = Octree::build(&normalized, &cfg.octree)?;
    let graph = build_connections(&tree);
    let signs = classify_cells(&tree);

    let surface = extract_boundary_faces(&tree, &signs, &graph);
    let quad_count = surface.quad_count();
    let (surface, edge_report) = split_nonmanifold_edges(surface)?;
    let (surface, vertex_report) = split_nonmanifold_vertices(surface)?;
    let extracted = triangulate(&surface);

    // Contract check: the repaired surface is watertight before projection
    // ever touches it. Failure here is an internal bug, not bad input.
    let topo = check_manifold(&extracted);
    if !topo.is_watertight() {
        return Err(Error::MalformedSurface(format!(
            "extracted surface is not watertight: bad_edges={} bad_vertices={} closed={} oriented={}",
            topo.bad_edges, topo.bad_vertices, topo.is_closed, topo.is_oriented
        )));
    }

    let (final_mesh, projection_stats) = if cfg.project_enabled && cfg.projection.iterations > 0 {
        let (projected, stats) = project_to_surface(&extracted, &tree, &cfg.projection);
        (projected, Some(stats))
    } else {
        (extracted, None)
    };

    let mut report = check_manifold(&final_mesh);
    let (flip_count, flip_rate) = count_face_flips(&final_mesh, &tree);
    report.flip_count = flip_count;
    report.flip_rate = flip_rate;

    let mesh = denormalize(&final_mesh, &transform);
    Ok(PipelineResult {
        mesh,
        report,
        stats: PipelineStats {
            occupied_leaves: tree.occupied_leaves().len(),
            quad_count,
            splits: SplitReport {
                edge_splits: edge_report.edge_splits,
                vertex_splits: vertex_report.vertex_splits,
            },
            projection: projection_stats,
        },
    })
}

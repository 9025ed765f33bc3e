//! Watertight 2-manifold surface generation from arbitrary triangle soups.
//!
//! The pipeline voxelizes a normalized input mesh into an adaptive octree of
//! occupied cells, flood-fills the empty cells from the domain boundary to
//! tell outside from inside, extracts the quad surface between outside and
//! occupied cells, repairs the two non-manifold lattice configurations,
//! triangulates, and optionally projects the result back onto the input
//! surface. Every output is a closed, consistently oriented 2-manifold,
//! regardless of holes, self-intersections, or inconsistent winding in the
//! input.

pub mod error;
pub mod extract;
pub mod geom;
pub mod mesh_io;
pub mod octree;
pub mod pipeline;
pub mod project;
pub mod shapes;
pub mod signfield;
pub mod verify;

pub use error::{Error, Result};
pub use extract::{QuadSurface, SplitReport};
pub use mesh_io::{LoadStats, MeshFormat, NormalizationTransform, TriangleMesh};
pub use octree::{Aabb, ConnectionGraph, Direction, NodeId, Octree, OctreeConfig};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineResult, PipelineStats};
pub use project::{ProjectionParams, ProjectionStats};
pub use signfield::{CellSign, SignField};
pub use verify::ManifoldReport;

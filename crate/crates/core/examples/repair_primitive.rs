//! Convert a built-in test shape and print the verification report.
//!
//!     cargo run --release -p watertight-core --example repair_primitive -- torus out.obj

use watertight_core::{mesh_io, run_pipeline, shapes, MeshFormat, PipelineConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let shape = args.next().unwrap_or_else(|| "torus".to_string());
    let output = args.next().unwrap_or_else(|| "repaired.obj".to_string());

    let mesh = match shape.as_str() {
        "cube" => shapes::cube(1.0),
        "icosphere" => shapes::icosphere(3),
        "torus" => shapes::torus(0.65, 0.3, 48, 24),
        "sheet" => shapes::thin_sheet(0.9, 0.15, 12),
        "bowtie" => shapes::bowtie_soup(),
        other => {
            eprintln!("unknown shape `{other}` (try cube|icosphere|torus|sheet|bowtie)");
            std::process::exit(1);
        }
    };

    let result = run_pipeline(&mesh, &PipelineConfig::default()).expect("pipeline");
    std::fs::write(&output, mesh_io::write_mesh(&result.mesh, MeshFormat::Obj)).expect("write");
    println!(
        "{shape}: {} occupied cells, {} quads, {} edge splits, {} vertex splits",
        result.stats.occupied_leaves,
        result.stats.quad_count,
        result.stats.splits.edge_splits,
        result.stats.splits.vertex_splits
    );
    println!("{}", result.report.to_json());
    println!("wrote {output}");
}

//! Command line front end: single-file conversion, batch processing over a
//! JSON manifest, and standalone topology verification.
//!
//! Exit codes: 0 success, 1 input or I/O error, 2 internal contract
//! violation (the pipeline produced a surface that failed verification).

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use watertight_core::{
    mesh_io, run_pipeline, Error as CoreError, ManifoldReport, MeshFormat, OctreeConfig,
    PipelineConfig, ProjectionParams, TriangleMesh,
};

#[derive(Parser)]
#[command(
    name = "watertight",
    version,
    about = "Convert triangle soups into watertight 2-manifold meshes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert one mesh into a watertight 2-manifold.
    Convert(ConvertArgs),
    /// Convert every entry of a JSON manifest.
    Batch(BatchArgs),
    /// Verify a mesh and report its topology without converting.
    Check(CheckArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Obj,
    Off,
}

impl From<FormatArg> for MeshFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Obj => MeshFormat::Obj,
            FormatArg::Off => MeshFormat::Off,
        }
    }
}

#[derive(Args, Clone)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Output format; defaults to the output file extension, then OBJ.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Target edge length of the finest cells, in normalized units.
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    /// Explicit octree depth, overriding --resolution.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10))]
    depth: Option<u32>,
    /// Skip the projection stage; emit the raw lattice surface.
    #[arg(long)]
    no_project: bool,
    /// Projection iterations.
    #[arg(long, default_value_t = 20)]
    steps: u32,
    /// Maximum per-iteration vertex movement.
    #[arg(long, default_value_t = 0.005)]
    step_size: f64,
    /// Laplacian smoothing weight in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    smooth_weight: f64,
    /// Write the verification report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    /// JSON manifest: {"entries": [{"input": ..., "output": ...}], "on_error": "skip"|"abort"}
    #[arg(long)]
    manifest: PathBuf,
    /// Worker threads for batch entries.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the aggregated summary as JSON.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Conversion options shared by all entries.
    #[command(flatten)]
    options: SharedOptions,
}

#[derive(Args, Clone)]
struct SharedOptions {
    #[arg(long, default_value_t = 0.01)]
    resolution: f64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..=10))]
    depth: Option<u32>,
    #[arg(long)]
    no_project: bool,
    #[arg(long, default_value_t = 20)]
    steps: u32,
    #[arg(long, default_value_t = 0.005)]
    step_size: f64,
    #[arg(long, default_value_t = 0.5)]
    smooth_weight: f64,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    input: PathBuf,
    /// Write the verification report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn from_core(err: &CoreError) -> Self {
        let code = match err {
            CoreError::MalformedSurface(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Convert(args) => convert(&args),
        Command::Batch(args) => batch(&args),
        Command::Check(args) => check(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn detect_format(path: &Path, flag: Option<FormatArg>) -> MeshFormat {
    flag.map(MeshFormat::from)
        .or_else(|| MeshFormat::from_path(path))
        .unwrap_or(MeshFormat::Obj)
}

fn load(path: &Path) -> Result<TriangleMesh, Failure> {
    let format = MeshFormat::from_path(path)
        .ok_or_else(|| Failure::input(format!("{}: unknown mesh extension", path.display())))?;
    let file = File::open(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let (mesh, stats) = mesh_io::load_mesh_with_stats(BufReader::new(file), format)
        .map_err(|e| Failure::from_core(&e))?;
    if stats.dropped_degenerate > 0 {
        eprintln!(
            "{}: dropped {} degenerate triangle(s)",
            path.display(),
            stats.dropped_degenerate
        );
    }
    Ok(mesh)
}

fn pipeline_config(
    resolution: f64,
    depth: Option<u32>,
    no_project: bool,
    steps: u32,
    step_size: f64,
    smooth_weight: f64,
    output_format: MeshFormat,
) -> Result<PipelineConfig, Failure> {
    if !(resolution > 0.0 && resolution < 2.2) {
        return Err(Failure::input("--resolution must be in (0, 2.2)"));
    }
    if !(0.0..=1.0).contains(&smooth_weight) {
        return Err(Failure::input("--smooth-weight must be in [0, 1]"));
    }
    if !step_size.is_finite() || step_size <= 0.0 {
        return Err(Failure::input("--step-size must be positive"));
    }
    Ok(PipelineConfig {
        octree: OctreeConfig {
            root_half_extent: 1.1,
            target_leaf_size: resolution,
            max_depth: depth,
        },
        projection: ProjectionParams {
            step_size,
            iterations: steps,
            smoothing_weight: smooth_weight,
            ..ProjectionParams::default()
        },
        project_enabled: !no_project,
        output_format,
        emit_report: true,
    })
}

fn write_output(path: &Path, mesh: &TriangleMesh, format: MeshFormat) -> Result<(), Failure> {
    let bytes = mesh_io::write_mesh(mesh, format);
    std::fs::write(path, bytes)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_report(path: &Path, report: &ManifoldReport) -> Result<(), Failure> {
    let mut file = File::create(path)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    file.write_all(report.to_json().as_bytes())
        .and_then(|()| file.write_all(b"\n"))
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn convert(args: &ConvertArgs) -> Result<(), Failure> {
    let mesh = load(&args.input)?;
    let format = detect_format(&args.output, args.format);
    let cfg = pipeline_config(
        args.resolution,
        args.depth,
        args.no_project,
        args.steps,
        args.step_size,
        args.smooth_weight,
        format,
    )?;
    let result = run_pipeline(&mesh, &cfg).map_err(|e| Failure::from_core(&e))?;
    write_output(&args.output, &result.mesh, format)?;
    if let Some(report_path) = &args.report {
        write_report(report_path, &result.report)?;
    }
    println!(
        "{} -> {}: {} vertices, {} triangles, manifold={}, flips={}",
        args.input.display(),
        args.output.display(),
        result.mesh.vertices.len(),
        result.mesh.triangles.len(),
        result.report.is_watertight(),
        result.report.flip_count
    );
    Ok(())
}

fn check(args: &CheckArgs) -> Result<(), Failure> {
    let mesh = load(&args.input)?;
    let report = watertight_core::verify::check_manifold(&mesh);
    if let Some(report_path) = &args.report {
        write_report(report_path, &report)?;
    }
    println!(
        "{}: manifold={} closed={} oriented={} euler={}",
        args.input.display(),
        report.is_manifold,
        report.is_closed,
        report.is_oriented,
        report.euler_characteristic
    );
    Ok(())
}

#[derive(Deserialize)]
struct BatchManifest {
    entries: Vec<BatchEntry>,
    #[serde(default)]
    on_error: OnError,
}

#[derive(Clone, Deserialize)]
struct BatchEntry {
    input: PathBuf,
    output: PathBuf,
}

#[derive(Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum OnError {
    #[default]
    Skip,
    Abort,
}

#[derive(Serialize)]
struct EntryOutcome {
    input: PathBuf,
    output: PathBuf,
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<ManifoldReport>,
}

#[derive(Serialize)]
struct BatchSummary {
    total: usize,
    succeeded: usize,
    failed: usize,
    manifold_pass: usize,
    models_with_flips: usize,
    total_flip_count: usize,
    entries: Vec<EntryOutcome>,
}

fn batch(args: &BatchArgs) -> Result<(), Failure> {
    let file = File::open(&args.manifest)
        .map_err(|e| Failure::input(format!("{}: {e}", args.manifest.display())))?;
    let manifest: BatchManifest = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| Failure::input(format!("{}: {e}", args.manifest.display())))?;

    let mut outputs = std::collections::BTreeSet::new();
    for entry in &manifest.entries {
        if entry.input.as_os_str().is_empty() || entry.output.as_os_str().is_empty() {
            return Err(Failure::input("manifest entries need input and output paths"));
        }
        if !outputs.insert(entry.output.clone()) {
            return Err(Failure::input(format!(
                "duplicate output path {}",
                entry.output.display()
            )));
        }
    }

    let o = &args.options;
    let run_entry = |entry: &BatchEntry| -> EntryOutcome {
        let attempt = || -> Result<ManifoldReport, Failure> {
            let mesh = load(&entry.input)?;
            let format = detect_format(&entry.output, None);
            let cfg = pipeline_config(
                o.resolution,
                o.depth,
                o.no_project,
                o.steps,
                o.step_size,
                o.smooth_weight,
                format,
            )?;
            let result = run_pipeline(&mesh, &cfg).map_err(|e| Failure::from_core(&e))?;
            write_output(&entry.output, &result.mesh, format)?;
            Ok(result.report)
        };
        match attempt() {
            Ok(report) => EntryOutcome {
                input: entry.input.clone(),
                output: entry.output.clone(),
                status: "ok",
                error: None,
                report: Some(report),
            },
            Err(f) => EntryOutcome {
                input: entry.input.clone(),
                output: entry.output.clone(),
                status: "error",
                error: Some(f.message),
                report: None,
            },
        }
    };

    // Entries are independent; abort mode runs sequentially so nothing past
    // the first failure is touched.
    let outcomes: Vec<EntryOutcome> = if manifest.on_error == OnError::Abort {
        let mut v = Vec::with_capacity(manifest.entries.len());
        for entry in &manifest.entries {
            let outcome = run_entry(entry);
            let failed = outcome.status == "error";
            v.push(outcome);
            if failed {
                break;
            }
        }
        v
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.jobs.unwrap_or(0))
            .build()
            .map_err(|e| Failure::input(e.to_string()))?;
        pool.install(|| {
            use rayon::prelude::*;
            manifest.entries.par_iter().map(run_entry).collect()
        })
    };

    for outcome in &outcomes {
        match (&outcome.status, &outcome.error) {
            (&"ok", _) => println!("ok    {}", outcome.input.display()),
            (_, Some(e)) => println!("error {}: {e}", outcome.input.display()),
            _ => {}
        }
    }

    let succeeded = outcomes.iter().filter(|o| o.status == "ok").count();
    let failed = outcomes.iter().filter(|o| o.status == "error").count();
    let manifold_pass = outcomes
        .iter()
        .filter(|o| o.report.as_ref().is_some_and(|r| r.is_watertight()))
        .count();
    let models_with_flips = outcomes
        .iter()
        .filter(|o| o.report.as_ref().is_some_and(|r| r.flip_count > 0))
        .count();
    let total_flip_count = outcomes
        .iter()
        .filter_map(|o| o.report.as_ref().map(|r| r.flip_count))
        .sum();
    let summary = BatchSummary {
        total: manifest.entries.len(),
        succeeded,
        failed,
        manifold_pass,
        models_with_flips,
        total_flip_count,
        entries: outcomes,
    };

    if let Some(path) = &args.summary {
        let json = serde_json::to_string_pretty(&summary)
            .expect("summary serializes");
        std::fs::write(path, json + "\n")
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    }
    println!(
        "batch: {}/{} converted, {} manifold, {} failed",
        summary.succeeded, summary.total, summary.manifold_pass, summary.failed
    );

    if manifest.on_error == OnError::Abort && failed > 0 {
        return Err(Failure::input("batch aborted on first error"));
    }
    Ok(())
}

//! End-to-end tests of the `watertight` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use watertight_core::mesh_io::{load_mesh, write_mesh, MeshFormat};
use watertight_core::{shapes, verify};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_watertight"))
}

fn write_fixture(dir: &Path, name: &str, mesh: &watertight_core::TriangleMesh) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, write_mesh(mesh, MeshFormat::Obj)).unwrap();
    path
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

#[test]
fn convert_produces_watertight_output_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "cube.obj", &shapes::cube(1.0));
    let output = dir.path().join("out.obj");
    let report = dir.path().join("report.json");

    let result = run(bin()
        .arg("convert")
        .args(["--input", input.to_str().unwrap()])
        .args(["--output", output.to_str().unwrap()])
        .args(["--depth", "5"])
        .args(["--report", report.to_str().unwrap()]));
    assert!(result.status.success(), "{result:?}");

    let mesh = load_mesh(fs::File::open(&output).unwrap(), MeshFormat::Obj).unwrap();
    let check = verify::check_manifold(&mesh);
    assert!(check.is_manifold && check.is_closed && check.is_oriented);

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["is_manifold"], serde_json::Value::Bool(true));
    assert_eq!(json["flip_count"], serde_json::Value::from(0));
}

#[test]
fn convert_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let soup = shapes::voxel_soup_mesh(&shapes::random_voxel_cells(9, [4, 4, 4], 0.45), 1.0);
    let input = write_fixture(dir.path(), "soup.obj", &soup);

    let mut artifacts = Vec::new();
    for pass in 0..2 {
        let output = dir.path().join(format!("out{pass}.obj"));
        let report = dir.path().join(format!("report{pass}.json"));
        let result = run(bin()
            .arg("convert")
            .args(["--input", input.to_str().unwrap()])
            .args(["--output", output.to_str().unwrap()])
            .args(["--depth", "4"])
            .args(["--report", report.to_str().unwrap()]));
        assert!(result.status.success());
        artifacts.push((fs::read(&output).unwrap(), fs::read(&report).unwrap()));
    }
    assert_eq!(artifacts[0].0, artifacts[1].0, "mesh bytes differ");
    assert_eq!(artifacts[0].1, artifacts[1].1, "report bytes differ");
}

#[test]
fn convert_supports_off_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "cube.obj", &shapes::cube(1.0));
    let output = dir.path().join("out.off");
    let result = run(bin()
        .arg("convert")
        .args(["--input", input.to_str().unwrap()])
        .args(["--output", output.to_str().unwrap()])
        .args(["--depth", "4", "--no-project"]));
    assert!(result.status.success());
    let mesh = load_mesh(fs::File::open(&output).unwrap(), MeshFormat::Off).unwrap();
    assert!(verify::check_manifold(&mesh).is_manifold);
}

#[test]
fn missing_input_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let result = run(bin()
        .arg("convert")
        .args(["--input", dir.path().join("absent.obj").to_str().unwrap()])
        .args(["--output", dir.path().join("out.obj").to_str().unwrap()]));
    assert_eq!(result.status.code(), Some(1));
}

#[test]
fn check_reports_without_converting() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_fixture(dir.path(), "bowtie.obj", &shapes::bowtie_soup());
    let report = dir.path().join("report.json");
    let result = run(bin()
        .arg("check")
        .args(["--input", input.to_str().unwrap()])
        .args(["--report", report.to_str().unwrap()]));
    assert!(result.status.success());
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["is_manifold"], serde_json::Value::Bool(false));
    assert_eq!(json["bad_vertices"], serde_json::Value::from(1));
}

#[test]
fn batch_runs_manifest_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let fixtures = [
        ("a.obj", shapes::cube(1.0)),
        ("b.obj", shapes::voxel_soup_mesh(&shapes::random_voxel_cells(1, [3, 3, 3], 0.5), 1.0)),
        ("c.obj", shapes::plane_grid(1.0, 4)),
        ("d.obj", shapes::icosphere(1)),
        ("e.obj", shapes::bowtie_soup()),
    ];
    let mut entries = Vec::new();
    for (name, mesh) in &fixtures {
        let input = write_fixture(dir.path(), name, mesh);
        let output = dir.path().join(format!("out_{name}"));
        entries.push(serde_json::json!({ "input": input, "output": output }));
    }
    let manifest_path = dir.path().join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::json!({ "entries": entries, "on_error": "skip" }).to_string(),
    )
    .unwrap();
    let summary_path = dir.path().join("summary.json");

    let result = run(bin()
        .arg("batch")
        .args(["--manifest", manifest_path.to_str().unwrap()])
        .args(["--summary", summary_path.to_str().unwrap()])
        .args(["--depth", "4", "--jobs", "1"]));
    assert!(result.status.success(), "{result:?}");

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary["total"], serde_json::Value::from(5));
    assert_eq!(summary["succeeded"], serde_json::Value::from(5));
    assert_eq!(summary["manifold_pass"], serde_json::Value::from(5));
    for entry in summary["entries"].as_array().unwrap() {
        let out = PathBuf::from(entry["output"].as_str().unwrap());
        assert!(out.exists());
        let mesh = load_mesh(fs::File::open(&out).unwrap(), MeshFormat::Obj).unwrap();
        assert!(verify::check_manifold(&mesh).is_manifold);
    }
}

#[test]
fn batch_skip_policy_records_errors() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_fixture(dir.path(), "good.obj", &shapes::cube(1.0));
    let manifest_path = dir.path().join("manifest.json");
    let entries = serde_json::json!([
        { "input": good, "output": dir.path().join("out_good.obj") },
        { "input": dir.path().join("missing.obj"), "output": dir.path().join("out_missing.obj") },
    ]);
    fs::write(
        &manifest_path,
        serde_json::json!({ "entries": entries, "on_error": "skip" }).to_string(),
    )
    .unwrap();
    let summary_path = dir.path().join("summary.json");

    let result = run(bin()
        .arg("batch")
        .args(["--manifest", manifest_path.to_str().unwrap()])
        .args(["--summary", summary_path.to_str().unwrap()])
        .args(["--depth", "4"]));
    assert!(result.status.success());

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary["succeeded"], serde_json::Value::from(1));
    assert_eq!(summary["failed"], serde_json::Value::from(1));
    let entries = summary["entries"].as_array().unwrap();
    assert_eq!(entries[1]["status"], serde_json::Value::from("error"));
    assert!(entries[1]["error"].as_str().is_some());
}

#[test]
fn batch_abort_policy_stops_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let good = write_fixture(dir.path(), "good.obj", &shapes::cube(1.0));
    let manifest_path = dir.path().join("manifest.json");
    let entries = serde_json::json!([
        { "input": dir.path().join("missing.obj"), "output": dir.path().join("out_missing.obj") },
        { "input": good, "output": dir.path().join("out_good.obj") },
    ]);
    fs::write(
        &manifest_path,
        serde_json::json!({ "entries": entries, "on_error": "abort" }).to_string(),
    )
    .unwrap();

    let result = run(bin()
        .arg("batch")
        .args(["--manifest", manifest_path.to_str().unwrap()])
        .args(["--depth", "4"]));
    assert_eq!(result.status.code(), Some(1));
    // The entry after the failure is never processed.
    assert!(!dir.path().join("out_good.obj").exists());
}

#[test]
fn batch_empty_manifest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let manifest_path = dir.path().join("manifest.json");
    fs::write(
        &manifest_path,
        serde_json::json!({ "entries": [] }).to_string(),
    )
    .unwrap();
    let summary_path = dir.path().join("summary.json");
    let result = run(bin()
        .arg("batch")
        .args(["--manifest", manifest_path.to_str().unwrap()])
        .args(["--summary", summary_path.to_str().unwrap()]));
    assert!(result.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&summary_path).unwrap()).unwrap();
    assert_eq!(summary["total"], serde_json::Value::from(0));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use emacfem_bench::csv::{read_diagnostics, HEADER};
use emacfem_bench::{parse_pairs, RunConfig};

fn emacfem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emacfem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, extra: &[&str]) -> Output {
    let out = dir.to_str().unwrap();
    let mut args = vec!["run", "--out", out];
    args.extend_from_slice(extra);
    emacfem(&args)
}

#[test]
fn lattice_run_writes_one_row_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &[
            "--problem", "planar_lattice", "--scheme", "coupled_cn", "--form", "emac", "--nx", "24", "--dt",
            "2e-3", "--t-end", "0.1",
        ],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("diagnostics.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
    let rows = read_diagnostics(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), 51);
    assert_eq!(rows[50].step, 50);
    assert!((rows[50].t - 0.1).abs() < 1e-12);
    assert!(rows.iter().all(|r| r.l2_error.is_some()));

    let echo = fs::read_to_string(dir.path().join("config.txt")).unwrap();
    let cfg = RunConfig::from_pairs(&parse_pairs(&echo).unwrap()).unwrap();
    assert_eq!((cfg.nx, cfg.ny, cfg.dt), (24, 24, 2e-3));
}

#[test]
fn missing_form_lists_choices() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--problem", "gresho", "--scheme", "be_proj"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("{emac, skew, conv}"), "{err}");
    assert!(!dir.path().join("diagnostics.csv").exists());
}

#[test]
fn unknown_names_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["--problem", "river", "--scheme", "be_proj", "--form", "emac"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("planar_lattice"), "{err}");
    let o = run_in(dir.path(), &["--problem", "gresho", "--scheme", "be_proj", "--form", "emac", "--dt", "fast"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let args = [
        "--problem", "gresho", "--scheme", "be_proj", "--form", "skew", "--nx", "8", "--dt", "0.01", "--t-end",
        "0.05", "--deterministic",
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = run_in(d.path(), &args);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn config_file_with_flag_override_and_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "# channel smoke run\nproblem = channel_transport\nscheme = be_proj\nform = emac\nnx = 40\nny = 10\ndt = 0.01\nt_end = 0.05\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = emacfem(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--t-end",
        "0.02",
        "--vtk-stride",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = read_diagnostics(fs::read_to_string(out.join("diagnostics.csv")).unwrap().as_bytes()).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.l2_error.is_none()));
    let mass = fs::read_to_string(out.join("scalar.csv")).unwrap();
    assert_eq!(mass.lines().count(), 4);
    for k in 0..3 {
        let vtk = fs::read_to_string(out.join(format!("snapshot_{k:05}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(vtk.contains("SCALARS concentration double 1"));
    }
}

#[test]
fn sweep_writes_one_directory_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = emacfem(&[
        "sweep",
        "--problem",
        "gresho",
        "--nx",
        "4",
        "--dt",
        "0.05",
        "--t-end",
        "0.1",
        "--schemes",
        "be_proj,coupled_cn",
        "--forms",
        "emac",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["be_proj_emac", "coupled_cn_emac"] {
        assert!(dir.path().join(name).join("diagnostics.csv").exists(), "{name}");
    }
}

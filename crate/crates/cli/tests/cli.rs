use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use subquantum_cli::output::sha256_hex;

const BIN: &str = env!("CARGO_BIN_EXE_subquantum");

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(cwd)
        .env_remove("SUBQUANTUM_OUTPUT_DIR")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const SMALL: &str = "\
lattice.cell_count = 256
lattice.outputs = 20
ensemble.n_walkers = 20000
ensemble.horizon = 1
ensemble.outputs = 4
";

#[test]
fn scenario_only_config_runs_with_defaults() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scenario = entangle\n");
    let out = tmp.path().join("out");
    let o = run(
        &[
            "entangle",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(!files.is_empty());
    for f in files {
        let bytes = fs::read(out.join(f["name"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
    assert_eq!(manifest["config"]["packet.sigma0"], "1");
    assert_eq!(manifest["seed"], subquantum_cli::config::DEFAULT_SEED);
    assert!(manifest["timings"]["total"].as_f64().unwrap() >= 0.0);
    let leftovers = fs::read_dir(&out)
        .unwrap()
        .filter(|e| {
            e.as_ref()
                .unwrap()
                .file_name()
                .to_string_lossy()
                .ends_with(".tmp")
        })
        .count();
    assert_eq!(leftovers, 0);
}

#[test]
fn unknown_key_is_a_config_error_with_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "# comment\npacket.sigmaO = 1\n");
    let o = run(&["dispersion", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("line 2") && err.contains("unknown key"),
        "{err}"
    );
}

#[test]
fn invalid_value_names_key_and_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scenario = dispersion\npacket.sigma0 = -1\n");
    let o = run(&["dispersion", "--config", &cfg], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(
        err.contains("line 2") && err.contains("packet.sigma0") && err.contains("> 0"),
        "{err}"
    );
}

#[test]
fn unknown_scenario_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["teleport"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = run(
        &[
            "entangle",
            "--output-dir",
            blocker.join("sub").to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn env_var_sets_default_output_dir() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from-env");
    let o = Command::new(BIN)
        .args(["entangle"])
        .current_dir(tmp.path())
        .env("SUBQUANTUM_OUTPUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(target.join("entangle.csv").exists());
    assert!(target.join("manifest.json").exists());
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| {
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

#[test]
fn outputs_are_byte_identical_across_workers_and_reruns() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for scenario in ["dispersion", "trajectories", "collapse", "interfere"] {
        let mut runs = Vec::new();
        for (i, workers) in ["1", "4", "1"].iter().enumerate() {
            let dir = tmp.path().join(format!("{scenario}-{i}"));
            let o = run(
                &[
                    scenario,
                    "--config",
                    &cfg,
                    "--workers",
                    workers,
                    "--output-dir",
                    dir.to_str().unwrap(),
                ],
                tmp.path(),
            );
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            runs.push(csv_files(&dir));
        }
        assert!(!runs[0].is_empty());
        assert_eq!(runs[0], runs[1], "{scenario}: workers changed output");
        assert_eq!(runs[0], runs[2], "{scenario}: rerun changed output");
    }
}

#[test]
fn seed_flag_changes_stochastic_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    run(
        &[
            "dispersion",
            "--config",
            &cfg,
            "--seed",
            "1",
            "--output-dir",
            a.to_str().unwrap(),
        ],
        tmp.path(),
    );
    run(
        &[
            "dispersion",
            "--config",
            &cfg,
            "--seed",
            "2",
            "--output-dir",
            b.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(
        fs::read(a.join("variance.csv")).unwrap(),
        fs::read(b.join("variance.csv")).unwrap()
    );
    assert_ne!(
        fs::read(a.join("walkers.csv")).unwrap(),
        fs::read(b.join("walkers.csv")).unwrap()
    );
}

fn parse_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn dispersion_variance_table() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "ensemble.n_walkers = 20000\n");
    let o = run(
        &[
            "dispersion",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = parse_csv(&out.join("variance.csv"));
    assert_eq!(header, ["t", "sigma2_analytic", "sigma2_cml", "rel_err"]);
    assert_eq!(rows.len(), 41);
    assert!(rows.iter().all(|r| r[3] < 0.01));
    let text = fs::read_to_string(out.join("variance.csv")).unwrap();
    let cell = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    assert_eq!(cell, "1.0000000000000000e0");
}

#[test]
fn interfere_endpoints() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = write_config(tmp.path(), "superposition.n_samples = 10000\n");
    let o = run(
        &[
            "interfere",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = parse_csv(&out.join("interference.csv"));
    assert_eq!(header[1], "p_double_slit");
    assert_eq!(rows.len(), 361);
    assert!((rows[0][1] - 1.0).abs() < 1e-15);
    assert!(rows[180][1].abs() < 1e-15);
}

#[test]
fn trajectories_emit_time_vertical_svg() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(
        &[
            "trajectories",
            "--emit-svg",
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = parse_csv(&out.join("trajectories.csv"));
    assert_eq!(header.len(), 12);
    assert_eq!(rows.len(), 41);
    let svg = fs::read_to_string(out.join("trajectories.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 9);
    assert!(svg.contains(r#">t</text>"#));
}

#[test]
fn collapse_table_is_monotone() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = run(
        &["collapse", "--output-dir", out.to_str().unwrap()],
        tmp.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = parse_csv(&out.join("collapse.csv"));
    assert_eq!(header, ["A", "visibility", "stderr"]);
    assert_eq!(rows[0][1], 1.0);
    for w in rows.windows(2) {
        assert!(w[1][1] <= w[0][1] + 3.0 * w[0][2].max(w[1][2]));
    }
}

fn validate_with(extra: &str) -> Output {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        &format!("scenario = validate\nensemble.n_walkers = 100000\n{extra}"),
    );
    let out = tmp.path().join("out");
    run(
        &[
            "validate",
            "--config",
            &cfg,
            "--output-dir",
            out.to_str().unwrap(),
        ],
        tmp.path(),
    )
}

#[test]
fn coarse_lattice_fails_validation() {
    let o = validate_with("lattice.cell_count = 64\n");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL [2]"), "{}", stdout(&o));
}

#[test]
fn tampered_diffusivity_exponent_fails_variance_check() {
    let o = validate_with("lattice.diffusivity_exponent = 1.1\n");
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL [1]"), "{}", stdout(&o));
}

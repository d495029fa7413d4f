use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use rmwalk_cli::{run_scenario, CliError, OutputFormat, Overrides, RunConfig, RunStatus, Scenario, MANIFEST_FILE};
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rmwalk"));
    cmd.env_remove("RMWALK_SEED");
    cmd
}

fn config(scenario: Scenario, dir: &Path, set: &[&str]) -> RunConfig {
    let overrides = Overrides {
        scenario: Some(scenario),
        output_dir: Some(dir.to_path_buf()),
        set: set.iter().map(|s| s.to_string()).collect(),
        ..Overrides::default()
    };
    RunConfig::resolve(None, &overrides, None).unwrap()
}

/// Result files by name, manifest excluded.
fn results(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != MANIFEST_FILE)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(dir.join(MANIFEST_FILE)).unwrap()).unwrap()
}

#[test]
fn estimate_reports_spreading_time() {
    let tmp = TempDir::new().unwrap();
    let out = run_scenario(&config(Scenario::Estimate, tmp.path(), &[])).unwrap();
    assert_eq!(out.exit_code(), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("estimate.json")).unwrap()).unwrap();
    let t_spr = report["report"]["t_spr"].as_f64().unwrap();
    assert!(t_spr > 1e16 / 3.0 && t_spr < 3e16, "T_spr = {t_spr}");
    let table = std::fs::read_to_string(tmp.path().join("estimate.txt")).unwrap();
    assert!(table.lines().any(|l| l.starts_with("t_spr")));
    assert!(tmp.path().join("estimate.csv").exists());
}

#[test]
fn pure_born_state_lands_on_outcome_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        Scenario::Born,
        tmp.path(),
        &["born.weights=[1.0, 0.0]", "born.n_runs=150", "born.n_steps_max=50"],
    );
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.status, RunStatus::Ok);
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(tmp.path().join("born.json")).unwrap()).unwrap();
    assert_eq!(report["counts"], serde_json::json!([150, 0]));
    assert_eq!(report["valid"], true);
    let runs = std::fs::read_to_string(tmp.path().join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 150);
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let cases: [(Scenario, &[&str]); 5] = [
        (Scenario::Born, &["born.n_runs=96", "born.n_steps_max=40"]),
        (Scenario::Survival, &["survival.n_walks=25000"]),
        (Scenario::Trajectory, &["trajectory.n_seeds=12"]),
        (Scenario::Renewal, &["renewal.n_chains=20", "renewal.n_cycles=500", "renewal.plane_n_max=5000"]),
        (Scenario::GueStats, &["gue.n_matrices=3", "gue.dimension=40"]),
    ];
    for (scenario, set) in cases {
        let a = TempDir::new().unwrap();
        let b = TempDir::new().unwrap();
        let mut ca = config(scenario, a.path(), set);
        ca.master_seed = 99;
        ca.n_workers = 1;
        let mut cb = ca.clone();
        cb.output_dir = b.path().to_path_buf();
        cb.n_workers = 3;
        run_scenario(&ca).unwrap();
        run_scenario(&cb).unwrap();
        let (ra, rb) = (results(a.path()), results(b.path()));
        assert!(ra.len() >= 3, "{scenario:?}: {:?}", ra.keys());
        assert_eq!(ra, rb, "{scenario:?}");
    }
}

#[test]
fn manifest_hashes_every_file() {
    let tmp = TempDir::new().unwrap();
    run_scenario(&config(Scenario::Survival, tmp.path(), &["survival.n_walks=1000"])).unwrap();
    let m = manifest(tmp.path());
    let files = m["files"].as_array().unwrap();
    let on_disk = results(tmp.path());
    assert_eq!(files.len(), on_disk.len());
    for f in files {
        let bytes = &on_disk[f["path"].as_str().unwrap()];
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(bytes)));
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
    }
    assert_eq!(m["config"]["survival"]["n_walks"], 1000);
    assert_eq!(m["exit_code"], 0);
    assert!(m["created_unix"].as_u64().unwrap() > 0);
    // timestamps stay out of the result files
    let log = String::from_utf8(on_disk["run.log"].clone()).unwrap();
    assert!(!log.contains(&m["created_unix"].to_string()));
}

#[test]
fn format_selects_files() {
    let json = TempDir::new().unwrap();
    let mut cfg = config(Scenario::GeometryCheck, json.path(), &["geometry.n_separations=5", "geometry.lattice_size=2"]);
    cfg.format = OutputFormat::Json;
    run_scenario(&cfg).unwrap();
    let names: Vec<String> = results(json.path()).into_keys().collect();
    assert_eq!(names, ["geometry.json", "run.log"]);
    let csv = TempDir::new().unwrap();
    cfg.format = OutputFormat::Csv;
    cfg.output_dir = csv.path().to_path_buf();
    run_scenario(&cfg).unwrap();
    let names: Vec<String> = results(csv.path()).into_keys().collect();
    assert_eq!(names, ["isometry.csv", "run.log"]);
}

#[test]
fn invalid_section_values_name_their_key() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        (Scenario::Born, "born.weights=[0.5, 0.6]", "born.weights"),
        (Scenario::Born, "born.centers=[-2.0, 2.0]", "born.centers"),
        (Scenario::Born, "born.sigma=0.5", "born.sigma"),
        (Scenario::Trajectory, "trajectory.n_seeds=1", "trajectory.n_seeds"),
        (Scenario::Renewal, "renewal.quantile=1.5", "renewal.quantile"),
        (Scenario::Estimate, "estimate.environment.body_mass=0.0", "estimate.environment.body_mass"),
    ];
    for (scenario, set, want) in cases {
        match run_scenario(&config(scenario, tmp.path(), &[set])) {
            Err(CliError::Validation { key, .. }) => assert_eq!(key, want, "{set}"),
            other => panic!("{set}: {other:?}"),
        }
    }
}

#[test]
fn unknown_key_exits_with_two() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "[survival]\nn_walks = 10\nwalkers = 3\n").unwrap();
    let out = bin()
        .args(["simulate", "survival", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("survival.walkers"), "{stderr}");
    assert!(!tmp.path().join("out").join(MANIFEST_FILE).exists());
}

#[test]
fn timeouts_exit_with_three_and_keep_a_manifest() {
    let tmp = TempDir::new().unwrap();
    let out = bin()
        .args(["simulate", "born", "--set", "born.n_runs=64", "--set", "born.n_steps_max=5", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(tmp.path());
    assert_eq!(m["exit_code"], 3);
    assert_eq!(m["status"], "invalidated");
    assert_eq!(m["key"], "born.n_steps_max");
    assert!(tmp.path().join("born_runs.csv").exists());
}

#[test]
fn seed_sources_in_order() {
    let run = |env: Option<&str>, flag: Option<&str>, dir: &Path| {
        let mut cmd = bin();
        cmd.args(["simulate", "survival", "--set", "survival.n_walks=2000", "--format", "csv", "--out"])
            .arg(dir);
        if let Some(e) = env {
            cmd.env("RMWALK_SEED", e);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        assert!(cmd.output().unwrap().status.success());
        manifest(dir)["config"]["master_seed"].as_u64().unwrap()
    };
    let tmp = TempDir::new().unwrap();
    assert_eq!(run(None, None, &tmp.path().join("a")), 0);
    assert_eq!(run(Some("17"), None, &tmp.path().join("b")), 17);
    assert_eq!(run(Some("17"), Some("18446744073709551615"), &tmp.path().join("c")), u64::MAX);
    let a = results(&tmp.path().join("a"));
    let b = results(&tmp.path().join("b"));
    assert_ne!(a["survival.csv"], b["survival.csv"]);
}

#[test]
fn print_defaults_is_a_valid_config() {
    let out = bin().arg("print-defaults").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(RunConfig::from_toml_str(&text).unwrap(), RunConfig::default());
    for section in ["[born]", "[survival]", "[trajectory]", "[renewal]", "[geometry]", "[velocity]", "[gue]"] {
        assert!(text.contains(section), "{section}");
    }
}

#[test]
fn subcommand_must_match_config_scenario() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(&cfg, "scenario = \"born\"\n").unwrap();
    let out = bin().args(["estimate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`scenario`"));
}

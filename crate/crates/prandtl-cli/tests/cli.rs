use std::path::Path;
use std::process::{Command, Output};

use prandtl_cli::config::DEFAULT_TOML;

fn prandtl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_prandtl")).args(args).output().expect("binary runs")
}

fn small_config(dir: &Path, edit: impl Fn(String) -> String) -> String {
    let text = DEFAULT_TOML
        .replace("nx = 32", "nx = 16")
        .replace("ny = 257", "ny = 129")
        .replace("dt = 0.01", "dt = 0.02")
        .replace("t_final = 1.0", "t_final = 0.4");
    let path = dir.join("small.toml");
    std::fs::write(&path, edit(text)).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_artifacts_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |t| t);
    let out = tmp.path().join("out");
    let o = prandtl(&["run", "--config", &cfg, "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("verdict: PASS"));
    let files = csv_files(&out);
    let names: Vec<&str> = files.iter().map(|f| f.0.as_str()).collect();
    assert_eq!(names, ["convergence.csv", "energy.csv", "hardy.csv", "residuals.csv", "snapshots.csv"]);
    let snaps = String::from_utf8(files[4].1.clone()).unwrap();
    assert!(snaps.starts_with("level,t,min_omega,"));
    assert_eq!(snaps.lines().count(), 1 + 21);
    let energy = String::from_utf8(files[1].1.clone()).unwrap();
    assert!(energy.starts_with("t,part_t0x0y0,"));

    let text = std::fs::read_to_string(&cfg).unwrap();
    let hash = prandtl_cli::config::RunConfig::from_toml(&text).unwrap().hash();
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("verdict.json")).unwrap()).unwrap();
    assert_eq!(v["config_hash"], hash.as_str());
    assert_eq!(v["pass"], true);
    assert_eq!(std::fs::read_dir(out.join("checkpoints")).unwrap().count(), 21);
}

#[test]
fn usage_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.cfg");
    let o = prandtl(&["run", "--config", s(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing.cfg"));
    assert_eq!(prandtl(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(prandtl(&["run", "--config", "x", "--bogus"]).status.code(), Some(2));
    assert_eq!(prandtl(&["run"]).status.code(), Some(2));
    let o = prandtl(&["verify-identities", "--refinements", "1"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = small_config(tmp.path(), |t| t.replace("theta = 3.0", "theta = 1.2"));
    let o = prandtl(&["run", "--config", &bad, "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));

    let cfg = small_config(tmp.path(), |t| t);
    let o = prandtl(&["sweep-beta", "--config", &cfg, "--betas", "10,40,100,640", "--out", s(&tmp.path().join("w"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("geometric"));
}

#[test]
fn failed_verdict_exits_one_and_names_the_check() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |t| t.replace("max_iters = 30", "max_iters = 2"));
    let o = prandtl(&["run", "--config", &cfg, "--out", s(&tmp.path().join("o"))]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("failing checks: picard_convergence"), "{err}");
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |t| t);
    let mut runs = Vec::new();
    for (k, w) in ["1", "3", "1"].iter().enumerate() {
        let out = tmp.path().join(format!("w{k}"));
        let o = prandtl(&["run", "--config", &cfg, "--out", s(&out), "--workers", w]);
        assert_eq!(o.status.code(), Some(0));
        runs.push(out);
    }
    let first = csv_files(&runs[0]);
    assert_eq!(first.len(), 5);
    for r in &runs[1..] {
        assert_eq!(csv_files(r), first);
        assert_eq!(std::fs::read(r.join("verdict.json")).unwrap(), std::fs::read(runs[0].join("verdict.json")).unwrap());
        for n in [0, 10, 20] {
            let name = format!("checkpoints/level_{n:05}.ckpt");
            assert_eq!(std::fs::read(r.join(&name)).unwrap(), std::fs::read(runs[0].join(&name)).unwrap());
        }
    }
}

#[test]
fn report_reproduces_the_run_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |t| t);
    let run_dir = tmp.path().join("run");
    assert_eq!(prandtl(&["run", "--config", &cfg, "--out", s(&run_dir)]).status.code(), Some(0));
    let rep = tmp.path().join("rep");
    let o = prandtl(&["report", "--dir", s(&run_dir), "--out", s(&rep)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(csv_files(&rep), csv_files(&run_dir));
    assert_eq!(std::fs::read(rep.join("verdict.json")).unwrap(), std::fs::read(run_dir.join("verdict.json")).unwrap());

    // a checkpoint from another grid is refused
    let other = tmp.path().join("other");
    let cfg2 = small_config(tmp.path(), |t| t.replace("ny = 129", "ny = 65"));
    assert_eq!(prandtl(&["run", "--config", &cfg2, "--out", s(&other)]).status.code(), Some(0));
    std::fs::copy(other.join("checkpoints/level_00003.ckpt"), run_dir.join("checkpoints/level_00003.ckpt")).unwrap();
    let o = prandtl(&["report", "--dir", s(&run_dir), "--out", s(&rep)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("ny mismatch") && err.contains("65") && err.contains("129"), "{err}");
}

#[test]
fn identity_study_prints_the_ratio_table() {
    let tmp = tempfile::tempdir().unwrap();
    let o = prandtl(&["verify-identities", "--refinements", "2", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.lines().next().unwrap().contains("ratio"));
    for name in ["yy", "time", "space", "recursion", "wall"] {
        assert!(stdout.contains(&format!("PASS {name}")), "{stdout}");
    }
    assert!(std::fs::read_to_string(tmp.path().join("identities.csv")).unwrap().starts_with("identity,alpha,"));
}

#[test]
fn stability_command_on_a_small_grid() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path(), |t| t);
    let o = prandtl(&["stability", "--config", &cfg, "--eta", "1e-3", "--out", s(tmp.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let t = std::fs::read_to_string(tmp.path().join("stability.csv")).unwrap();
    assert!(t.starts_with("amplitude,t,du,domega,wall_du,residual\n"));
    // repeated run plus three amplitudes, 21 levels each
    assert_eq!(t.lines().count(), 1 + 4 * 21);
}

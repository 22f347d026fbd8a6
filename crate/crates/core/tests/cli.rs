use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const ROTATION: &str = "symbols = [{ name = \"a\", expr = \"sqrt(2)-1\" }, { name = \"b\", expr = \"sqrt(3)-1\" }]\n\
[system]\nkind = \"translation\"\na = [\"@a\", \"@b\"]\n";

fn write_config(dir: &Path, src: &str) -> PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, src).unwrap();
    path
}

fn pmlab(args: &[&str], envs: &[(&str, &Path)]) -> (i32, String) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pmlab"));
    cmd.args(args).env_remove("PMLAB_OUT_DIR").env_remove("PMLAB_WORKERS");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stdout).into_owned())
}

fn run(dir: &TempDir, src: &str, command: &str) -> i32 {
    let cfg = write_config(dir.path(), src);
    let out = dir.path().join("out");
    pmlab(&[command, "-c", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], &[]).0
}

fn report(dir: &TempDir, command: &str) -> Value {
    let text = std::fs::read_to_string(dir.path().join("out").join(format!("{command}.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn step_cap_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let src = format!("{ROTATION}[analysis]\nsteps = 1000000000000\n");
    assert_eq!(run(&dir, &src, "coverage"), 2);
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&dir, &format!("{ROTATION}bogus = 1\n"), "coverage"), 2);
}

#[test]
fn undeclared_symbols_are_rejected() {
    let dir = TempDir::new().unwrap();
    let src = "[system]\nkind = \"translation\"\na = [\"@nope\", \"1/2\"]\n";
    assert_eq!(run(&dir, src, "coverage"), 2);
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(pmlab(&["coverage"], &[]).0, 2);
    assert_eq!(pmlab(&["no-such-command"], &[]).0, 2);
}

#[test]
fn rational_translation_is_not_minimal() {
    let dir = TempDir::new().unwrap();
    let src = "[system]\nkind = \"translation\"\na = [\"1/2\", \"1/3\"]\n";
    assert_eq!(run(&dir, src, "decide-affine"), 0);
    let r = report(&dir, "decide-affine");
    assert_eq!(r["results"]["verdict"], "not_minimal");
    assert_eq!(r["results"]["certificate_verified"], true);
    assert_eq!(r["schema_version"], 1);
}

#[test]
fn unstabilized_dichotomy_exits_inconclusive() {
    let dir = TempDir::new().unwrap();
    let src = "symbols = [{ name = \"g\", expr = \"(sqrt(5)-1)/2\" }]\n\
        [system]\nkind = \"translation\"\na = [\"@g\"]\n\
        [sets]\ndomain = { kind = \"torus\" }\ndim = 1\nresolution = 256\nn_max = 1\n\
        map = { kind = \"system\" }\nk = { shape = \"box\", lo = [0.2], hi = [0.3] }\n";
    assert_eq!(run(&dir, src, "dichotomy"), 3);
    assert_eq!(report(&dir, "dichotomy")["results"]["verdict"], "inconclusive");
    assert!(dir.path().join("out/dichotomy.pmrs").exists());
}

#[test]
fn environment_overrides_out_dir_and_workers() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &format!("{ROTATION}[analysis]\nsteps = 2000\nseeds = 2\n"));
    let out = dir.path().join("env-out");
    let workers = Path::new("3");
    let (code, stdout) = pmlab(
        &["coverage", "-c", cfg.to_str().unwrap()],
        &[("PMLAB_OUT_DIR", &out), ("PMLAB_WORKERS", workers)],
    );
    assert_eq!(code, 0);
    assert!(stdout.trim().ends_with("coverage.json"));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("coverage.json")).unwrap()).unwrap();
    assert_eq!(r["config"]["workers"], 3);
    assert_eq!(r["config"]["output"]["dir"], out.to_str().unwrap());

    let (code, _) = pmlab(
        &["coverage", "-c", cfg.to_str().unwrap(), "--deterministic"],
        &[("PMLAB_OUT_DIR", &out), ("PMLAB_WORKERS", workers)],
    );
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out.join("coverage.json")).unwrap()).unwrap();
    assert_eq!(r["config"]["workers"], 1);
}

#[test]
fn csv_outputs_have_documented_headers() {
    let dir = TempDir::new().unwrap();
    let src = format!("{ROTATION}[analysis]\nsteps = 500\nseeds = 1\nprimes = [2]\n");
    for command in ["coverage", "orbit", "powers"] {
        assert_eq!(run(&dir, &src, command), 0, "{command}");
    }
    let header = |name: &str| {
        let text = std::fs::read_to_string(dir.path().join("out").join(name)).unwrap();
        text.lines().next().unwrap().to_string()
    };
    assert_eq!(header("coverage.csv"), "seed,direction,step,fraction");
    assert_eq!(header("powers.csv"), "seed,p,step,fraction");
    assert_eq!(header("orbit.csv"), "seed,step,x0,x1");
    let rows = std::fs::read_to_string(dir.path().join("out/orbit.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 501);
}

#[test]
fn report_embeds_config_and_independence() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&dir, &format!("{ROTATION}[analysis]\nsteps = 1000\nseeds = 1\n"), "coverage"), 0);
    let r = report(&dir, "coverage");
    assert_eq!(r["command"], "coverage");
    assert_eq!(r["config"]["system"]["kind"], "translation");
    assert_eq!(r["config"]["analysis"]["steps"], 1000);
    let symbols = &r["independence"]["symbols"];
    assert!(symbols["a"].is_array() && symbols["b"].is_array());
    assert!(r["independence"]["assumption"].as_str().unwrap().len() > 10);
    assert!(r["timestamp"].is_u64());
    assert_eq!(r["system"]["dim"], 2);
}

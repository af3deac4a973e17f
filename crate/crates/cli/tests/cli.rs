use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const PARAMS: &str = r#"
[params]
alpha = 2.0
d = 1
H = 0.75
beta1 = 1.0
beta2 = 1.0
gamma1 = 1.0
gamma2 = 1.0
k = [[0.5, 0.5], [0.5, 0.5]]
"#;

const RUN: &str = r#"
[grid]
t_end = 10.0
n_steps = 500

[ensemble]
n_paths = 40
query_times = [2.0]
"#;

fn blowup(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blowup"))
        .args(args)
        .env_remove("BLOWUP_SEED")
        .output()
        .unwrap()
}

fn config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("c.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn bounds_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &format!("{PARAMS}{RUN}"));
    let c = c.to_str().unwrap();
    let a = blowup(&["bounds", "--config", c, "--seed", "42"]);
    let b = blowup(&["bounds", "--config", c, "--seed", "42"]);
    assert_eq!(json(&a), json(&b));
    assert_eq!(a.stdout, b.stdout);
    let other = json(&blowup(&["bounds", "--config", c, "--seed", "43"]));
    assert_ne!(json(&a)["bounds"], other["bounds"]);
    assert_eq!(json(&a)["config"]["seed"], 42);
}

#[test]
fn density_at_origin() {
    let out = blowup(&["density", "--alpha", "2", "--d", "1", "--at", "0"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "0.2820948");
}

#[test]
fn missing_hurst_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &PARAMS.replace("H = 0.75\n", ""));
    let out = blowup(&["bounds", "--config", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("`H`") && err.contains("line"), "{err}");
}

#[test]
fn unknown_key_names_key_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &format!("{PARAMS}\n[pde]\nsteps = 3\n"));
    let out = blowup(&["pde", "--config", c.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("steps") && err.contains("line 13"), "{err}");
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let bare = config(dir.path(), &format!("{PARAMS}{RUN}"));
    let run = |path: &Path, env: Option<&str>, extra: &[&str]| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_blowup"));
        cmd.args(["bounds", "--config", path.to_str().unwrap()])
            .args(extra)
            .env_remove("BLOWUP_SEED");
        if let Some(v) = env {
            cmd.env("BLOWUP_SEED", v);
        }
        json(&cmd.output().unwrap())["seed"].as_u64().unwrap()
    };
    assert_eq!(run(&bare, None, &[]), 0);
    assert_eq!(run(&bare, Some("7"), &[]), 7);
    let seeded = dir.path().join("s.toml");
    std::fs::write(&seeded, format!("seed = 5\n{PARAMS}{RUN}")).unwrap();
    assert_eq!(run(&seeded, Some("7"), &[]), 5);
    assert_eq!(run(&seeded, Some("7"), &["--set", "seed=6"]), 6);
    assert_eq!(
        run(&seeded, Some("7"), &["--set", "seed=6", "--seed", "9"]),
        9
    );
}

#[test]
fn ensemble_is_thread_independent_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &format!("{PARAMS}{RUN}"));
    let c = c.to_str().unwrap();
    let one = blowup(&["--threads", "1", "ensemble", "--config", c, "--seed", "3"]);
    let many = blowup(&["--threads", "4", "ensemble", "--config", c, "--seed", "3"]);
    assert_eq!(one.stdout, many.stdout);
    let doc = json(&one);
    assert_eq!(doc["n_paths"], 40);

    let emitted = dir.path().join("e.json");
    std::fs::write(&emitted, &one.stdout).unwrap();
    let replay = blowup(&["ensemble", "--config", emitted.to_str().unwrap()]);
    assert_eq!(replay.stdout, one.stdout);
}

#[test]
fn out_dir_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &format!("{PARAMS}{RUN}"));
    let c = c.to_str().unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    assert!(
        blowup(&["bounds", "--config", c, "--out", o, "--dump-integrals"])
            .status
            .success()
    );
    assert!(
        blowup(&["ensemble", "--config", c, "--out", o, "--paths", "12"])
            .status
            .success()
    );
    for f in ["bounds.json", "integrals.csv", "ensemble.json", "paths.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let paths_csv = std::fs::read_to_string(out.join("paths.csv")).unwrap();
    assert_eq!(paths_csv.lines().count(), 13);

    let rep = dir.path().join("rep");
    let status = blowup(&[
        "report",
        out.join("bounds.json").to_str().unwrap(),
        out.join("ensemble.json").to_str().unwrap(),
        "--out",
        rep.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    let csv = std::fs::read_to_string(rep.join("report.csv")).unwrap();
    assert!(csv.starts_with("source,command,quantity,t,value,ci_lo,ci_hi"));
    assert!(csv.contains("bounds.json,bounds,tau_star,"));
    assert!(rep.join("plot_report.py").exists());

    let bad = blowup(&["report", c]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn unresolved_spectral_run_is_a_numerical_failure() {
    // zero noise reduces to v' = v + v^2 from 1; a step of 0.2 cannot
    // resolve the blow-up near ln 2 before t = 1
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{PARAMS}\n[init]\nkind = \"scaled\"\nc1 = 1.0\nc2 = 1.0\npsi = {{ shape = \"constant\", value = 1.0 }}\n\
         [grid]\nt_end = 2.0\nn_steps = 100\n[pde]\nL = 5.0\nn = 8\nzero_noise = true\ndt = 0.2\nt_end = 1.0\n"
    );
    let c = config(dir.path(), &text);
    let out = blowup(&["pde", "--config", c.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // the report is still emitted
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["report"]["resolved"], false);

    let fine = blowup(&[
        "pde",
        "--config",
        c.to_str().unwrap(),
        "--set",
        "pde.dt=1e-3",
    ]);
    let tau = json(&fine)["report"]["tau_num"].as_f64().unwrap();
    assert!((tau - 2f64.ln()).abs() < 0.02 * 2f64.ln(), "{tau}");
}

#[test]
fn fbm_dump_has_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let c = config(dir.path(), &format!("{PARAMS}{RUN}"));
    let out = blowup(&["fbm", "--config", c.to_str().unwrap(), "--seed", "1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("t,b1,b2"));
    assert_eq!(text.lines().count(), 502);
}

use std::path::Path;
use std::process::{Command, Output};

fn hlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hlab"))
        .args(args)
        .output()
        .expect("hlab runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn config_path(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.toml"))
        .display()
        .to_string()
}

#[test]
fn lists_every_scenario() {
    let o = hlab(&["scenarios"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "torus-hormander",
        "power-weights",
        "dirichlet-domain",
        "schrodinger",
        "holomorphic",
        "avakumovic",
        "plancherel-sweep",
        "mollification",
        "am-criterion",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn describe_prints_default_config() {
    let o = hlab(&["scenarios", "--describe", "avakumovic"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("scenario = \"avakumovic\""), "{text}");
    let unknown = hlab(&["scenarios", "--describe", "nope"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn run_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("mollification");
    let mut csvs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(k.to_string());
        let o = hlab(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).trim_end().ends_with("PASS"));
        csvs.push(std::fs::read(out.join("mollification.csv")).unwrap());
        assert!(out.join("mollification.json").exists());
    }
    assert_eq!(csvs[0], csvs[1]);
    let header = String::from_utf8(csvs[0].clone()).unwrap();
    assert!(header.starts_with("scenario,n_pts,p,q,s,beta,constant,lower,upper,pass,hypothesis"));
}

#[test]
fn thread_cap_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_path("avakumovic");
    let mut csvs = Vec::new();
    for threads in ["1", "3"] {
        let out = dir.path().join(threads);
        let o = Command::new(env!("CARGO_BIN_EXE_hlab"))
            .args(["run", &cfg, "--out", out.to_str().unwrap()])
            .env("HLAB_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success());
        csvs.push(std::fs::read(out.join("avakumovic.csv")).unwrap());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn bad_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "scenario = \"mollification\"\n[weights]\np = [0.5]\n",
    )
    .unwrap();
    let o = hlab(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("weights.p"));

    std::fs::write(&path, "scenario = \"mollification\"\nbogus = 1\n").unwrap();
    let o = hlab(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn weights_check_reports_constants() {
    let o = hlab(&[
        "weights", "check", "--p", "2", "--q", "2", "--beta", "0.5", "--size", "32",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let ap = v["ap_constant"].as_f64().unwrap();
    assert!((ap - 1.294405855869361).abs() < 1e-12);
    assert_eq!(v["in_ap_range"], true);
}

#[test]
fn norms_eval_outputs_json() {
    for which in ["sobolev", "hormander", "nq"] {
        let o = hlab(&["norms", "eval", "--which", which]);
        assert!(o.status.success(), "{which}");
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        assert_eq!(v["norm"], which);
        assert_eq!(v["q"], "inf");
        assert!(v["value"].as_f64().unwrap().is_finite());
    }
    let o = hlab(&["norms", "eval", "--which", "nq", "--q", "inf"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"].as_f64().unwrap(), 1.0);
}

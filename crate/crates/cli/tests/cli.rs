use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_affwalk"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(format!("{name}.json"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn compare_on_simple_walk() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config("z1_simple");
    let o = run(&["compare", "--config", cfg.to_str().unwrap(), "--n", "200", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("compare.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(
        header,
        "step_n,omega_coords,exact,estimate,ratio,regime,dist_boundary,det_nB,phi"
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("compare_summary.json")).unwrap()).unwrap();
    let spread = summary["max_ratio"].as_f64().unwrap() / summary["min_ratio"].as_f64().unwrap();
    assert!(spread <= 1.1, "{spread}");
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("tree_q2");
    for d in [&a, &b] {
        let o = run(&[
            "compare",
            "--config",
            cfg.to_str().unwrap(),
            "--n",
            "20,40",
            "--grid",
            "64",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let x = std::fs::read(a.path().join("compare.csv")).unwrap();
    let y = std::fs::read(b.path().join("compare.csv")).unwrap();
    assert!(!x.is_empty());
    assert_eq!(x, y);
}

#[test]
fn lemma5_is_seeded() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["lemma5", "--seed", "7", "--count", "50", "--out", d.path().to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(
        std::fs::read(a.path().join("lemma5.json")).unwrap(),
        std::fs::read(b.path().join("lemma5.json")).unwrap()
    );
}

#[test]
fn green_estimate_refuses_origin() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("tree_q2");
    let o = run(&[
        "estimate",
        "--config",
        cfg.to_str().unwrap(),
        "--estimator",
        "green",
        "--omega",
        "0",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("for all x ≠ O"), "{err}");
}

#[test]
fn interior_estimate_names_its_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("tree_q2");
    let o = run(&[
        "estimate",
        "--config",
        cfg.to_str().unwrap(),
        "--estimator",
        "interior",
        "--omega",
        "40",
        "--n",
        "40",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dist(w/n, boundary) >="), "{err}");
}

#[test]
fn selftest_on_tree_config() {
    let cfg = config("tree_q2");
    let o = run(&["selftest", "--config", cfg.to_str().unwrap()]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}");
    assert!(text.lines().all(|l| l.starts_with("[PASS]")), "{text}");
}

#[test]
fn rate_and_exact_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config("z2_simple");
    let o = run(&["rate", "--config", cfg.to_str().unwrap(), "--out", out]);
    assert!(o.status.success());
    let rate = std::fs::read_to_string(dir.path().join("rate.csv")).unwrap();
    assert_eq!(rate.lines().next().unwrap(), "delta_coords,s_coords,phi,det_B,dist_boundary");
    let o = run(&["exact", "--config", cfg.to_str().unwrap(), "--n", "4", "--out", out]);
    assert!(o.status.success());
    let exact = std::fs::read_to_string(dir.path().join("exact.csv")).unwrap();
    let total: f64 = exact.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse::<f64>().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn bad_config_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, std::fs::read_to_string(config("z1_simple")).unwrap().replace("0.5", "0.4")).unwrap();
    let o = run(&["exact", "--config", path.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("walk.steps probabilities must sum to 1"));
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use schatten_rigidity::group::planted_family;
use schatten_rigidity::sweep::spearman_rho;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_schatten-rigidity");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("SCHATTEN_RIGIDITY_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Data rows of a CSV written with a `#` manifest preamble.
fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# command: "));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let _header = lines.next().expect("header row");
    lines.map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn construct(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["construct", "--out", p(&path)];
    args.extend(extra);
    ok(&args);
    path
}

#[test]
fn construct_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = construct(dir.path(), "c4.json", &["--n", "4"]);
    let v = json(&c4);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["manifest"]["command"], "construct");
    let r2 = construct(dir.path(), "r2.json", &["--n", "2", "--real"]);
    let v = json(&r2);
    assert_eq!(v["dim"], 4);
    let out = run(&["construct", "--n", "0"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["construct"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = construct(dir.path(), "c4.json", &["--n", "4"]);
    let rep = dir.path().join("v.json");
    ok(&["verify", p(&c4), "--out", p(&rep)]);
    assert!(json(&rep)["delta_observed"].as_f64().unwrap() <= 1e-10);
    assert!(!csv_rows(&rep.with_extension("csv")).is_empty());

    let mut cfg = json(&c4);
    let entry = cfg["X"][0]["data"][0][0].as_f64().unwrap();
    cfg["X"][0]["data"][0][0] = (entry + 0.2).into();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, serde_json::to_string(&cfg).unwrap()).unwrap();
    let rep = dir.path().join("vb.json");
    ok(&["verify", p(&bad), "--out", p(&rep)]);
    assert!(json(&rep)["delta_observed"].as_f64().unwrap() > 0.01);

    let text = std::fs::read_to_string(&c4).unwrap();
    let trunc = dir.path().join("trunc.json");
    std::fs::write(&trunc, &text[..text.len() / 2]).unwrap();
    let out = run(&["verify", p(&trunc)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let out = run(&["verify", p(&dir.path().join("missing.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sampled_verify() {
    let dir = tempfile::tempdir().unwrap();
    let c = construct(dir.path(), "c.json", &["--n", "6"]);
    let out = ok(&["verify", p(&c), "--mode", "sampled", "--samples", "5", "--seed", "2"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pairs_checked"], 5);
    assert_eq!(run(&["verify", p(&c), "--mode", "exhaustive"]).status.code(), Some(1));
}

fn final_value(csv: &Path) -> f64 {
    csv_rows(csv)
        .iter()
        .find(|r| r[0] == "final" && r[2] == "final_ac_mean_sq")
        .map(|r| r[3].parse().unwrap())
        .unwrap()
}

#[test]
fn certify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = construct(dir.path(), "c4.json", &["--n", "4"]);
    let rep = dir.path().join("cert.json");
    ok(&["certify", p(&c4), "--out", p(&rep)]);
    assert!(final_value(&rep.with_extension("csv")) <= 1e-10);

    let pert = construct(dir.path(), "p4.json", &["--n", "4", "--delta", "1e-3", "--seed", "9"]);
    let rep = dir.path().join("certp.json");
    ok(&["certify", p(&pert), "--out", p(&rep)]);
    let rows = csv_rows(&rep.with_extension("csv"));
    for section in ["pairs", "anticommutators", "block", "final"] {
        assert!(rows.iter().any(|r| r[0] == section), "{section}");
    }

    let c1 = construct(dir.path(), "c1.json", &["--n", "1"]);
    let out = run(&["certify", p(&c1)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("need at least two pairs"));
}

#[test]
fn sweep_examples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    ok(&["sweep", "--n", "4", "--grid", "1e-6,1e-4,1e-2", "--seeds", "10", "--out", p(&out)]);
    let rows = csv_rows(&out);
    assert_eq!(rows.iter().filter(|r| r[0] == "cell").count(), 30);
    let medians: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "median").collect();
    assert_eq!(medians.len(), 3);
    let d: Vec<f64> = medians.iter().map(|r| r[2].parse().unwrap()).collect();
    let f: Vec<f64> = medians.iter().map(|r| r[8].parse().unwrap()).collect();
    assert!(spearman_rho(&d, &f) >= 0.0);

    let zero = dir.path().join("zero.csv");
    ok(&["sweep", "--n", "4", "--grid", "0", "--seeds", "2", "--out", p(&zero)]);
    for r in csv_rows(&zero) {
        assert!(r[8].parse::<f64>().unwrap() <= 1e-10);
    }
    assert_eq!(run(&["sweep", "--n", "4", "--grid", ""]).status.code(), Some(1));
}

#[test]
fn embed_examples() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    ok(&["embed", "--n", "4", "--delta", "0.5", "--seed", "1", "--out", p(&a)]);
    ok(&["embed", "--n", "4", "--delta", "0.5", "--seed", "1", "--out", p(&b)]);
    let stats = json(&dir.path().join("a.stats.json"));
    assert!(stats["distortion"].as_f64().unwrap() <= 1.5);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(
        std::fs::read(dir.path().join("a.stats.json")).unwrap(),
        std::fs::read(dir.path().join("b.stats.json")).unwrap()
    );
    assert_eq!(run(&["embed", "--n", "4", "--delta", "1.5"]).status.code(), Some(1));
}

#[test]
fn group_check_examples() {
    let dir = tempfile::tempdir().unwrap();
    let f4 = construct(dir.path(), "f4.json", &["--n", "4", "--family"]);
    let out = dir.path().join("g.json");
    ok(&["group-check", p(&f4), "--out", p(&out)]);
    let v = json(&out);
    assert!(v["eta_max"].as_f64().unwrap() <= 1e-10);
    assert_eq!(v["j_image_distance"].as_f64().unwrap(), 2.0);
    assert_eq!(v["dimension_bound"]["c_small"].as_f64().unwrap(), 0.1);

    let planted = planted_family(4, 0.01).unwrap();
    let eps = planted.max_anticommutator().unwrap();
    let pf = dir.path().join("planted.json");
    std::fs::write(&pf, serde_json::to_string(&planted).unwrap()).unwrap();
    let out = ok(&["group-check", p(&pf)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["eta_max"].as_f64().unwrap() <= 16.0 * eps + 1e-9);

    let f13 = construct(dir.path(), "f13.json", &["--n", "13", "--family"]);
    let out = run(&["group-check", p(&f13)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("too large, use sampled"));
    ok(&["group-check", p(&f13), "--mode", "sampled", "--samples", "8"]);

    let c4 = construct(dir.path(), "c4.json", &["--n", "4"]);
    let out = ok(&["group-check", p(&c4)]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["eta_max"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn round_trip_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for tag in ["a", "b"] {
        let c = construct(dir.path(), &format!("{tag}-c.json"), &["--n", "4"]);
        let v = dir.path().join(format!("{tag}-v.json"));
        let r = dir.path().join(format!("{tag}-r.json"));
        ok(&["verify", p(&c), "--out", p(&v)]);
        ok(&["certify", p(&c), "--out", p(&r)]);
        outputs.push([c, v.clone(), v.with_extension("csv"), r.clone(), r.with_extension("csv")]);
    }
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        let (ta, tb) = (std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
        // The config path is part of the manifest; it is the only difference.
        assert_eq!(ta.replace("a-c.json", "X"), tb.replace("b-c.json", "X"));
    }
}

#[test]
fn thread_cap_environment() {
    let out = Command::new(BIN)
        .args(["sweep", "--n", "2", "--grid", "1e-3", "--seeds", "2"])
        .env("SCHATTEN_RIGIDITY_THREADS", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = Command::new(BIN)
        .args(["sweep", "--n", "2", "--grid", "1e-3", "--seeds", "2"])
        .env("SCHATTEN_RIGIDITY_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

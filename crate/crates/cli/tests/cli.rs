use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn jointspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jointspec")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_real(dir: &Path, name: &str, rows: &[&[f64]]) -> PathBuf {
    let d = rows.len();
    let m = json!({
        "d": d,
        "re": rows,
        "im": vec![vec![0.0; d]; d],
    });
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    path
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Atom weights sorted by the first coordinate's real part.
fn weights_by_real_part(mu: &Value) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = mu["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| (a["z"][0][0].as_f64().unwrap(), a["w"].as_f64().unwrap()))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

#[test]
fn gen_writes_tuple_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let o = jointspec(&["gen", "--spec", r#"{"kind":"conjugated_diagonal","d":4,"n":2,"seed":7}"#, "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["T0.json", "T1.json", "oracle.json", "spec.json"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    assert!(!out.join("T2.json").exists());
    let t0 = read_json(&out.join("T0.json"));
    assert_eq!(t0["d"], 4);
    let oracle = read_json(&out.join("oracle.json"));
    let total: f64 = oracle["atoms"].as_array().unwrap().iter().map(|a| a["w"].as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert!(oracle["atoms"].as_array().unwrap().len() <= 4);
}

#[test]
fn generated_brown_measure_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    let spec = r#"{"kind":"conjugated_diagonal","d":6,"n":2,"seed":3}"#;
    assert_eq!(code(&jointspec(&["gen", "--spec", spec, "--out", p(&out)])), 0);
    let mu_path = dir.path().join("mu.json");
    let o = jointspec(&["brown", p(&out.join("T0.json")), p(&out.join("T1.json")), "--out", p(&mu_path)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mu = read_json(&mu_path);
    let oracle = read_json(&out.join("oracle.json"));
    let (a, b) = (mu["atoms"].as_array().unwrap(), oracle["atoms"].as_array().unwrap());
    assert_eq!(a.len(), b.len());
    // Every oracle atom has a computed atom of the same weight within 1e-8.
    for atom in b {
        let near = a.iter().find(|x| {
            let dz: f64 = (0..2)
                .map(|i| {
                    let dr = x["z"][i][0].as_f64().unwrap() - atom["z"][i][0].as_f64().unwrap();
                    let di = x["z"][i][1].as_f64().unwrap() - atom["z"][i][1].as_f64().unwrap();
                    dr * dr + di * di
                })
                .sum();
            dz.sqrt() < 1e-8
        });
        let near = near.expect("oracle atom found");
        assert!((near["w"].as_f64().unwrap() - atom["w"].as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn explicit_gen_copies_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_real(dir.path(), "a.json", &[&[1.0, 0.0], &[0.0, 2.0]]);
    let b = write_real(dir.path(), "b.json", &[&[3.0, 0.0], &[0.0, -1.0]]);
    let out = dir.path().join("copy");
    assert_eq!(code(&jointspec(&["gen", "--explicit", p(&a), p(&b), "--out", p(&out)])), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(out.join("T0.json")).unwrap());
    assert_eq!(fs::read(&b).unwrap(), fs::read(out.join("T1.json")).unwrap());
}

#[test]
fn brown_of_a_diagonal_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_real(
        dir.path(),
        "t.json",
        &[&[1.0, 0.0, 0.0, 0.0], &[0.0, 2.0, 0.0, 0.0], &[0.0, 0.0, 2.0, 0.0], &[0.0, 0.0, 0.0, 3.0]],
    );
    let csv = dir.path().join("mu.csv");
    let o = jointspec(&["brown", p(&t), "--csv", p(&csv)]);
    assert_eq!(code(&o), 0);
    let mu: Value = serde_json::from_slice(&o.stdout).unwrap();
    let w = weights_by_real_part(&mu);
    let expected = [(1.0, 0.25), (2.0, 0.5), (3.0, 0.25)];
    assert_eq!(w.len(), 3);
    for ((z, m), (ez, em)) in w.iter().zip(expected) {
        assert!((z - ez).abs() < 1e-12 && (m - em).abs() < 1e-15);
    }
    assert!(fs::read_to_string(&csv).unwrap().lines().count() >= 3);
}

#[test]
fn joint_alias_and_decompose() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_real(dir.path(), "t.json", &[&[2.0, 1.0], &[0.0, 2.0]]);
    let o = jointspec(&["joint", p(&t)]);
    assert_eq!(code(&o), 0);
    let mu: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(mu["atoms"].as_array().unwrap().len(), 1);
    let o = jointspec(&["decompose", p(&t)]);
    assert_eq!(code(&o), 0);
    let dec: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(dec["clusters"][0]["multiplicity"], 2);
}

#[test]
fn subspace_of_a_disk() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_real(dir.path(), "t.json", &[&[1.0, 5.0, 0.0], &[0.0, -1.0, 0.0], &[0.0, 0.0, 1.0]]);
    let region = r#"{"type":"open_ball","center":[[1.0,0.0]],"radius":0.5}"#;
    let o = jointspec(&["subspace", p(&t), "--region", region, "--idempotent"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(s["dim"], 2);
    assert!((s["trace"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(s["idempotent"]["matrix"]["d"], 3);
    // A disk through an eigenvalue is refused as ambiguous.
    let edge = r#"{"type":"open_ball","center":[[0.0,0.0]],"radius":1.0}"#;
    assert_eq!(code(&jointspec(&["subspace", p(&t), "--region", edge])), 3);
}

#[test]
fn non_commuting_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_real(dir.path(), "a.json", &[&[0.0, 1.0], &[0.0, 0.0]]);
    let b = write_real(dir.path(), "b.json", &[&[0.0, 0.0], &[1.0, 0.0]]);
    let o = jointspec(&["brown", p(&a), p(&b)]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(code(&jointspec(&["gen", "--explicit", p(&a), p(&b), "--out", p(&dir.path().join("x"))])), 2);
}

#[test]
fn bad_input_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&jointspec(&["brown", p(&dir.path().join("missing.json"))])), 5);
    let junk = dir.path().join("junk.json");
    fs::write(&junk, "{\"d\": 2, \"re\": [[1.0]], \"im\": [[0.0]]}").unwrap();
    assert_eq!(code(&jointspec(&["brown", p(&junk)])), 5);
    assert_eq!(code(&jointspec(&["no-such-command"])), 5);
    assert_eq!(code(&jointspec(&["--help"])), 0);
}

#[test]
fn verify_runs_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = jointspec(&[
        "verify", "--suite", "lattice,box-formula", "--model", "conjugated_diagonal", "--seeds", "1..3", "--max-dim", "8",
        "--tol-subspace", "1e-9", "--out", p(&report),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = read_json(&report);
    assert_eq!(r["passed"], true);
    assert_eq!(r["runs"].as_array().unwrap().len(), 6);
    assert_eq!(r["tolerances"]["subspace"].as_f64().unwrap(), 1e-9);
}

#[test]
fn verify_with_empty_selection_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = jointspec(&["verify", "--suite", "", "--out", p(&report)]);
    assert_eq!(code(&o), 0);
    let r = read_json(&report);
    assert_eq!(r["checks"], 0);
    assert_eq!(r["passed"], true);
}

#[test]
fn verify_explicit_tuple() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_real(dir.path(), "a.json", &[&[1.0, 1.0], &[0.0, 2.0]]);
    let b = write_real(dir.path(), "b.json", &[&[2.0, 0.0], &[0.0, 2.0]]);
    let o = jointspec(&["verify", "--suite", "box-formula,maximality", "--input", p(&a), p(&b), "--seeds", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn grid_brown_writes_csv_and_ppm() {
    let dir = tempfile::tempdir().unwrap();
    let t = write_real(dir.path(), "t.json", &[&[0.5, 0.0], &[0.0, -0.5]]);
    let (csv, ppm) = (dir.path().join("g.csv"), dir.path().join("g.ppm"));
    let o = jointspec(&["grid-brown", p(&t), "--nx", "40", "--ny", "40", "--csv", p(&csv), "--ppm", p(&ppm)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("total mass"));
    assert!(fs::read(&ppm).unwrap().starts_with(b"P6"));
    assert!(fs::read_to_string(&csv).unwrap().lines().count() > 40 * 40);
    // A window that misses the spectrum cannot hold the mass.
    let miss = jointspec(&["grid-brown", p(&t), "--radius", "0.1", "--nx", "20", "--ny", "20", "--csv", p(&csv)]);
    assert_eq!(code(&miss), 4);
}

#[test]
fn cover_of_a_disk_under_addition() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("cover.csv");
    let target = r#"{"type":"open_ball","center":[[0.0,0.0]],"radius":1.0}"#;
    let o = jointspec(&["cover", "--target", target, "--map", "add", "--depth", "3", "--domain", "1", "--csv", p(&csv)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("structural checks pass"));
    assert!(fs::read_to_string(&csv).unwrap().lines().count() > 1);
}

#[test]
fn outputs_are_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let spec = r#"{"kind":"poly_of_jordan","d":6,"polynomials":[{"nvars":1,"terms":[{"exp":[2],"c":[1.0,0.0]}]}],"seed":11}"#;
    let (x, y) = (dir.path().join("x"), dir.path().join("y"));
    assert_eq!(code(&jointspec(&["gen", "--spec", spec, "--out", p(&x)])), 0);
    assert_eq!(code(&jointspec(&["gen", "--spec", spec, "--out", p(&y)])), 0);
    assert_eq!(fs::read(x.join("T0.json")).unwrap(), fs::read(y.join("T0.json")).unwrap());
    let run = |d: &Path| jointspec(&["brown", p(&d.join("T0.json"))]).stdout;
    assert_eq!(run(&x), run(&y));
    let verify = || jointspec(&["verify", "--suite", "restriction", "--seeds", "1,2", "--max-dim", "8"]).stdout;
    assert_eq!(verify(), verify());
}

use std::path::Path;
use std::process::{Command, Output};

fn magcross(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magcross"))
        .arg("--out-dir")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn records(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn table1_single_degree() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["table1", "--degrees", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("table1.csv"));
    assert_eq!(header, ["Q", "rho1_00", "alpha0", "rho1_alpha0"]);
    assert_eq!(rows.len(), 1);
    assert!((rows[0][1] - 0.716813090776313).abs() < 1e-13);
}

#[test]
fn quiet_prints_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["--quiet", "table1", "--degrees", "2"]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(dir.path().join("table1.csv").exists());
}

#[test]
fn empty_eps_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["quasimode", "--eps"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"schema":"magcross-config/1","ppstar":{"n":4,"width":3}}"#).unwrap();
    let out = magcross(dir.path(), &["--config", cfg.to_str().unwrap(), "ppstar"]);
    assert_eq!(out.status.code(), Some(1));
    std::fs::write(&cfg, r#"{"schema":"other/2"}"#).unwrap();
    let out = magcross(dir.path(), &["--config", cfg.to_str().unwrap(), "ppstar"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_block_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"schema":"magcross-config/1","table1":{"degrees":[3,4]}}"#).unwrap();
    let out = magcross(dir.path(), &["--config", cfg.to_str().unwrap(), "table1"]);
    assert!(out.status.success());
    let (_, rows) = records(&dir.path().join("table1.csv"));
    assert_eq!(rows.iter().map(|r| r[0] as usize).collect::<Vec<_>>(), [3, 4]);
}

#[test]
fn ladder_single_level() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["kappa-ladder", "--l", "0", "--neigs", "3", "--degree", "6", "--resolution", "21"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = records(&dir.path().join("kappa_ladder.csv"));
    assert_eq!(header, ["l", "epsilon", "kappa1", "kappa2", "kappa3"]);
    let k = &rows[0][2..];
    assert!(k[0] > 0.0 && k.windows(2).all(|w| w[0] <= w[1]), "{k:?}");
    let (header, rows) = records(&dir.path().join("modulus_0.csv"));
    assert_eq!(header, ["sigma", "tau", "abs_psi"]);
    assert_eq!(rows.len(), 21 * 21);
    let (header, rows) = records(&dir.path().join("decay.csv"));
    assert_eq!(header, ["l", "R", "tail_mass"]);
    assert_eq!(rows[0][2], 1.0);
}

#[test]
fn ppstar_holds() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["ppstar"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_reader(std::fs::File::open(dir.path().join("ppstar.json")).unwrap()).unwrap();
    assert_eq!(v["mu_star"].as_array().unwrap().len(), 4);
    let out = magcross(dir.path(), &["ppstar", "--half-width", "0.5"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn lambda_set_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["lambda-set", "--degree", "4", "--n-per-point", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value =
        serde_json::from_reader(std::fs::File::open(dir.path().join("lambda_set.json")).unwrap()).unwrap();
    let e = v["entries"].as_array().unwrap();
    assert_eq!(e.len(), 2);
    let (a, b) = (e[0]["value"].as_f64().unwrap(), e[1]["value"].as_f64().unwrap());
    assert_eq!(e[0]["label"], "x1");
    assert!((b / a - 2.0).abs() < 1e-10);
}

#[test]
fn coarse_ladder_is_tolerance_miss() {
    let dir = tempfile::tempdir().unwrap();
    let out = magcross(dir.path(), &["-q", "kappa-ladder", "--l", "0", "--degree", "4", "--resolution", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(dir.path().join("kappa_ladder.csv").exists());
}

#[test]
fn thread_count_does_not_change_artifacts() {
    let bytes = |threads: &str| {
        let dir = tempfile::tempdir().unwrap();
        let out = magcross(dir.path(), &["-q", "--threads", threads, "band-scan", "--axis-only", "--step", "0.1", "--refine", "1"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (std::fs::read(dir.path().join("band_grid.csv")).unwrap(), std::fs::read(dir.path().join("min_result.json")).unwrap())
    };
    assert_eq!(bytes("1"), bytes("2"));
}

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qdarwin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdarwin"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QDARWIN_THREADS")
        .output()
        .expect("binary runs")
}

fn manifest(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

#[test]
fn cnot_pip_has_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdarwin(&["pip", "--model", "cnot", "--n", "50"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(dir.path(), "pip.csv");
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("f,sharpF,meanI_nats,stddev,samples"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 51);
    let ln2 = std::f64::consts::LN_2;
    for r in &rows[1..50] {
        assert!((r[2] - ln2).abs() < 1e-12);
    }
    assert!((rows[50][2] - 2.0 * ln2).abs() < 1e-12);
    assert!(!csv.contains('\r'));
    let m = manifest(dir.path(), "pip");
    assert_eq!(m["report"]["r_delta"], 50.0);
}

#[test]
fn photon_dust_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdarwin(&["photon", "--preset", "dust-grain-sunlight", "--t", "1e-6"], dir.path());
    assert!(out.status.success());
    let r = manifest(dir.path(), "photon")["report"]["r_delta"].as_f64().unwrap();
    assert!((1e7..1e9).contains(&r), "{r}");
}

#[test]
fn envariance_two_to_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdarwin(&["envariance", "--finegraining", "2:1"], dir.path());
    assert!(out.status.success());
    assert_eq!(
        read(dir.path(), "envariance.csv"),
        "outcome,mu,probability,probability_float\n0,2,2/3,0.6666666666666666\n1,1,1/3,0.3333333333333333\n"
    );
}

#[test]
fn outputs_are_byte_identical_across_runs_and_threads() {
    let args = ["pip", "--model", "central-spin", "--n", "30", "--samples", "16", "--seed", "9"];
    let mut outputs = Vec::new();
    for threads in ["1", "3", "3"] {
        let dir = tempfile::tempdir().unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_qdarwin"))
            .args(args)
            .arg("--out")
            .arg(dir.path())
            .env("QDARWIN_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        outputs.push((read(dir.path(), "pip.csv"), read(dir.path(), "pip.json")));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[run]\nseed = 5\nunits = \"bits\"\n\n[baseline]\nn = 6\nstates = 3\nsamples = 4\n").unwrap();
    let out = qdarwin(&["--config", cfg.to_str().unwrap(), "baseline", "--states", "2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let m = manifest(dir.path(), "baseline");
    assert_eq!(m["seed"], 5);
    assert_eq!(m["units"], "bits");
    assert_eq!(m["report"]["states"], 2);
    assert_eq!(m["report"]["n"], 6);
    assert_eq!(read(dir.path(), "baseline.csv").lines().count(), 3);
}

#[test]
fn bits_rescale_information() {
    let dir = tempfile::tempdir().unwrap();
    let out = qdarwin(&["--units", "bits", "pip", "--n", "4"], dir.path());
    assert!(out.status.success());
    let csv = read(dir.path(), "pip.csv");
    assert!(csv.starts_with("f,sharpF,meanI_bits,"));
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert!((last[2].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn manifest_checksum_matches_csv() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    assert!(qdarwin(&["reversal", "--amplitudes", "1,1"], dir.path()).status.success());
    let bytes = std::fs::read(dir.path().join("reversal.csv")).unwrap();
    let hex: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(manifest(dir.path(), "reversal")["outputs"][0]["sha256"], hex);
}

#[test]
fn config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[pip]\nmodle = \"cnot\"\n").unwrap();
    let out = qdarwin(&["--config", cfg.to_str().unwrap(), "pip"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modle"));

    std::fs::write(&cfg, "[pip]\nn = = 3\n").unwrap();
    let out = qdarwin(&["--config", cfg.to_str().unwrap(), "pip"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    assert_eq!(qdarwin(&["pip", "--no-such-flag"], dir.path()).status.code(), Some(1));
    assert_eq!(qdarwin(&["envariance", "--finegraining", "2:a"], dir.path()).status.code(), Some(1));
    let out = Command::new(env!("CARGO_BIN_EXE_qdarwin")).args(["pip"]).env("QDARWIN_THREADS", "many").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn caps_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(qdarwin(&["pip", "--model", "interacting", "--n", "25"], dir.path()).status.code(), Some(2));
    assert_eq!(qdarwin(&["envariance", "--finegraining", "70000:1"], dir.path()).status.code(), Some(2));
}

#[test]
fn bundled_config_runs() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/example.toml");
    for cmd in ["pip", "photon", "envariance"] {
        let dir = tempfile::tempdir().unwrap();
        let out = qdarwin(&["--config", cfg.to_str().unwrap(), cmd], dir.path());
        assert!(out.status.success(), "{cmd}: {}", String::from_utf8_lossy(&out.stderr));
        let m = manifest(dir.path(), cmd);
        assert_eq!(m["seed"], 1);
        assert_eq!(m["units"], "bits");
    }
}

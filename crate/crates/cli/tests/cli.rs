use std::path::Path;
use std::process::{Command, Output};

fn tmscat(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmscat")).current_dir(dir).args(args).output().expect("spawn tmscat")
}

fn csv_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn threshold_gain_minimum_at_grazing() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmscat(
        dir.path(),
        &["threshold-gain", "--eta", "1.5", "--thickness", "1", "--theta-samples", "181", "-o", "g"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&dir.path().join("g.csv"));
    assert_eq!(rows.len(), 181);
    let min = rows.iter().map(|r| r[1]).fold(f64::INFINITY, f64::min);
    assert_eq!(min, 0.0);
    let last = rows.last().unwrap();
    assert_eq!((last[0], last[1]), (90.0, 0.0));
    assert!(rows.iter().all(|r| r[1] >= 0.0));
}

#[test]
fn singular_delta_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmscat(dir.path(), &["delta2d", "--strength", "4i"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("spectral singularity"), "{err}");
    let record: serde_json::Value = serde_json::from_str(err.trim()).unwrap();
    assert_eq!(record["error"]["kind"], "spectral-singularity");
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmscat(dir.path(), &["selftest"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 11);
}

#[test]
fn outputs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for prefix in ["a", "b"] {
        let out = tmscat(dir.path(), &["delta2d", "--strength", "2,-3", "--k", "1.3", "--n", "12", "-o", prefix]);
        assert!(out.status.success());
    }
    for suffix in [".csv", "_t.csv", ".meta.json"] {
        let a = std::fs::read(dir.path().join(format!("a{suffix}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b{suffix}"))).unwrap();
        assert_eq!(a, b, "{suffix}");
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    for (threads, prefix) in [("1", "one"), ("3", "three")] {
        let out = Command::new(env!("CARGO_BIN_EXE_tmscat"))
            .current_dir(dir.path())
            .env("TMSCAT_THREADS", threads)
            .args(["threshold-gain", "--eta", "3", "--theta-samples", "1001", "-o", prefix])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.path().join("one.csv")).unwrap();
    let b = std::fs::read(dir.path().join("three.csv")).unwrap();
    assert_eq!(a, b);
    let bad = Command::new(env!("CARGO_BIN_EXE_tmscat"))
        .current_dir(dir.path())
        .env("TMSCAT_THREADS", "zero")
        .args(["selftest"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        tmscat(dir.path(), &["slab", "--epsilon", "abc", "--thickness", "1", "--k", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(tmscat(dir.path(), &["delta2d"]).status.code(), Some(2));
    assert_eq!(tmscat(dir.path(), &["slab", "--epsilon", "2", "--thickness", "-1", "--k", "1"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.toml"), "k = 1\nbogus = 2\n").unwrap();
    assert_eq!(tmscat(dir.path(), &["--config", "bad.toml", "scatter"]).status.code(), Some(2));
    assert_eq!(tmscat(dir.path(), &["--config", "absent.toml", "scatter"]).status.code(), Some(2));
    assert_eq!(tmscat(dir.path(), &["--n", "0", "delta2d", "--strength", "1"]).status.code(), Some(2));
}

#[test]
fn slab_evolution_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["slab", "--epsilon", "2.25,0.1", "--thickness", "1", "--k", "2", "--n", "8"];
    let closed = tmscat(dir.path(), &[&args[..], &["-o", "c"]].concat());
    let evolved = tmscat(dir.path(), &[&args[..], &["--method", "evolve", "--steps", "2000", "-o", "e"]].concat());
    assert!(closed.status.success() && evolved.status.success());
    let (c, e) = (csv_rows(&dir.path().join("c.csv")), csv_rows(&dir.path().join("e.csv")));
    assert_eq!(c.len(), 9);
    assert!(c.windows(2).all(|w| w[0][0] < w[1][0]));
    for (rc, re) in c.iter().zip(&e) {
        for (x, y) in rc.iter().zip(re) {
            assert!((x - y).abs() <= 1e-8 * x.abs().max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn scatter_reads_config_and_reports_step_halving() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        r#"
k = "1.5"
output = "out/g"
[potential]
kind = "gaussian_bump"
amplitude = { re = "0.3", im = "0.05" }
center = ["0", "0"]
widths = ["0.5", "0.7"]
[numerics]
n = 12
steps = 200
"#,
    )
    .unwrap();
    let ok = tmscat(dir.path(), &["--config", "run.toml", "scatter"]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(dir.path().join("out/g.csv").exists());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/g.meta.json")).unwrap()).unwrap();
    assert!(meta["accuracy_warning"].is_null());
    let coarse = tmscat(dir.path(), &["--config", "run.toml", "--steps", "4", "scatter"]);
    assert!(coarse.status.success());
    assert!(String::from_utf8_lossy(&coarse.stderr).contains("accuracy_warning"));
}

#[test]
fn singularity_record_on_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = tmscat(dir.path(), &["singularity", "--eta", "1.5", "--thickness", "10", "--guess", "6.9", "-o", "s"]);
    assert!(out.status.success());
    let saved: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert!(saved["residual"].as_f64().unwrap() < 1e-10);
    assert!((saved["root_re"].as_f64().unwrap() - 2.2 * std::f64::consts::PI).abs() < 1e-6);
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"root_im\""));
}

use std::path::Path;
use std::process::{Command, Output};

use gafzeros::config::{hash_text, ExperimentConfig};
use gafzeros_core::kacrice::h_function;

fn gafzeros(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gafzeros")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rho_gef_pair_is_h() {
    let o = gafzeros(&["rho", "--model", "gef", "--radius", "3", "--point", "0,0", "--point", "1,0", "--k", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - h_function(0.5)).abs() < 1e-8);
    assert_eq!(v["k"], 2);
}

#[test]
fn rho_su2_one_point_is_n() {
    let o = gafzeros(&["rho", "--model", "su2", "--n", "64", "--point", "-0.3,2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["value"].as_f64().unwrap() - 64.0).abs() < 1e-8);
}

#[test]
fn exit_codes() {
    let coincident = gafzeros(&["rho", "--model", "gef", "--point", "1,1", "--point", "1,1"]);
    assert_eq!(coincident.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&coincident.stderr).contains("coincide"));
    assert_eq!(gafzeros(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(gafzeros(&["extremes", "--model", "plane"]).status.code(), Some(2));
    assert_eq!(gafzeros(&["extremes", "--trials", "0", "--n", "8"]).status.code(), Some(2));
    assert_eq!(gafzeros(&["verify", "h-function"]).status.code(), Some(0));
}

#[test]
fn sample_prints_all_zeros() {
    let o = gafzeros(&["sample", "--model", "torus", "--n", "12", "--seed", "3", "--trial", "5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["zeros"].as_array().unwrap().len(), 12);
    assert_eq!(v["pass"], true);
    let csv = gafzeros(&["sample", "--model", "su2", "--n", "7", "--format", "csv"]);
    assert_eq!(stdout(&csv).lines().count(), 8);
}

fn run_extremes(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["extremes", "--out-dir", dir.to_str().unwrap()];
    args.extend_from_slice(extra);
    gafzeros(&args)
}

fn integer_columns(csv: &str) -> Vec<Vec<String>> {
    // every column except the floating sigma and mark coordinates
    csv.lines()
        .skip(2)
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| ![3, 5, 6].contains(i))
                .map(|(_, f)| f.to_string())
                .collect()
        })
        .collect()
}

#[test]
fn extremes_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_extremes(dir.path(), &["--n", "8", "--trials", "1", "--kmax", "1", "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("trials.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("# schema"));
    assert_eq!(
        lines.next().unwrap(),
        "trial,model,k,sigma_rescaled,mark_chart,mark_re,mark_im,count_a1_whole,isolated_a1"
    );
    assert_eq!(lines.count(), 1);

    let config = std::fs::read_to_string(dir.path().join("config.txt")).unwrap();
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config_hash"].as_str().unwrap(), hash_text(&config));
    assert_eq!(summary["config"].as_str().unwrap(), config);
    assert_eq!(ExperimentConfig::from_text(&config).unwrap().hash(), hash_text(&config));
    assert_eq!(summary["trials"], 1);
}

#[test]
fn worker_count_invariance_on_disk() {
    let common = ["--n", "48", "--trials", "40", "--seed", "77", "--kmax", "2", "--a", "1", "--a", "2"];
    let one = tempfile::tempdir().unwrap();
    let many = tempfile::tempdir().unwrap();
    assert!(run_extremes(one.path(), &[&common[..], &["--workers", "1"]].concat()).status.success());
    assert!(run_extremes(many.path(), &[&common[..], &["--workers", "8"]].concat()).status.success());
    let read = |d: &Path| std::fs::read_to_string(d.join("trials.csv")).unwrap();
    let (a, b) = (read(one.path()), read(many.path()));
    assert_eq!(integer_columns(&a), integer_columns(&b));
    // the reduction order is fixed, so the floats agree as well
    assert_eq!(a, b);
    let report = |d: &Path| {
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.join("summary.json")).unwrap()).unwrap();
        v["report"].clone()
    };
    assert_eq!(report(one.path()), report(many.path()));
}

#[test]
fn config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.txt");
    std::fs::write(&file, "model = torus\nn = 16\ntrials = 3\nregion = whole, torus-half\n").unwrap();
    let out = dir.path().join("out");
    let o = gafzeros(&[
        "extremes",
        "--config",
        file.to_str().unwrap(),
        "--trials",
        "2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let copy = ExperimentConfig::from_text(&std::fs::read_to_string(out.join("config.txt")).unwrap()).unwrap();
    assert_eq!(copy.n, 16);
    assert_eq!(copy.trials, 2);
    assert_eq!(copy.regions.len(), 2);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rsp_core::io::{load_instance, save_instance, Instance};
use rsp_core::linalg::Matrix;
use rsp_core::problem::{Constraint, RobustProblem};
use rsp_core::sets::SetDescriptor;
use rsp_core::trace::read_records;
use rsp_qpbench::instance::{load_qp, qp_to_json};

fn rsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rsp"))
        .arg("--workdir")
        .arg(dir)
        .args(args)
        .env_remove("RSP_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// min x s.t. z − x ≤ 0 ∀|z| ≤ 1 over [−2, 2]; x* = 1, strictly feasible at 1.5.
fn write_lp1(dir: &Path) {
    let c = Constraint::biaffine(Matrix::zeros(1, 1), vec![-1.0], vec![1.0], 0.0, SetDescriptor::interval(-1.0, 1.0));
    let p = RobustProblem::new(vec![1.0], SetDescriptor::interval(-2.0, 2.0), vec![c]);
    save_instance(&Instance { problem: p, x0: Some(vec![1.5]) }, &dir.join("lp1.json")).unwrap();
}

fn csv_without_time(path: &Path) -> Vec<(u64, u64, u64)> {
    read_records(fs::File::open(path).unwrap())
        .unwrap()
        .iter()
        .map(|r| (r.iter, r.obj.to_bits(), r.feas_gap.to_bits()))
        .collect()
}

#[test]
fn gen_is_deterministic_and_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let args = ["gen", "--n", "10", "--K", "10", "--L", "10", "--m", "3", "--seed", "7"];
    let o = rsp(d.path(), &[&args[..], &["--out", "a.json"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("|P|_2=1.000000000000"));
    rsp(d.path(), &[&args[..], &["--out", "b.json"]].concat());
    let (a, b) = (fs::read(d.path().join("a.json")).unwrap(), fs::read(d.path().join("b.json")).unwrap());
    assert_eq!(a, b);
    let inst = load_qp(&d.path().join("a.json")).unwrap();
    assert_eq!(qp_to_json(&inst).unwrap().into_bytes(), a);
}

#[test]
fn seed_falls_back_to_the_environment() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rsp"))
        .args(["--workdir", d.path().to_str().unwrap(), "gen", "--n", "3", "--K", "2", "--L", "2", "--m", "1", "--out", "e.json"])
        .env("RSP_SEED", "7")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    rsp(d.path(), &["gen", "--n", "3", "--K", "2", "--L", "2", "--m", "1", "--seed", "7", "--out", "f.json"]);
    assert_eq!(fs::read(d.path().join("e.json")).unwrap(), fs::read(d.path().join("f.json")).unwrap());
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(rsp(d.path(), &["gen", "--n", "10", "--K", "10", "--L", "10", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(rsp(d.path(), &["gen", "--n", "3", "--K", "2", "--L", "2", "--m", "1"]).status.code(), Some(2));
    assert_eq!(rsp(d.path(), &["solve", "--algo", "simplex", "--instance", "x.json"]).status.code(), Some(2));
    assert_eq!(rsp(d.path(), &["solve", "--algo", "sgsp", "--instance", "missing.json"]).status.code(), Some(2));
    assert_eq!(rsp(d.path(), &["project", "--set", "ball:1", "--point", "1", "--lambda", "1"]).status.code(), Some(2));
    assert_eq!(rsp(d.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn project_prints_the_cone_projection() {
    let d = tempfile::tempdir().unwrap();
    let o = rsp(d.path(), &["project", "--set", "l2:1", "--point", "3,0", "--lambda", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("mu* = 2.000000000000"), "{s}");
    assert!(s.contains("P_U = ((2.000000000000, 0.000000000000), 2.000000000000)"), "{s}");
    assert!(s.contains("P_Z = (1.000000000000, 0.000000000000)"), "{s}");

    let s = stdout(&rsp(d.path(), &["project", "--set", "linf:1", "--point", "0.25,-0.5", "--lambda", "1"]));
    assert!(s.contains("P_U = ((0.250000000000, -0.500000000000), 1.000000000000)"), "{s}");

    let s = stdout(&rsp(d.path(), &["project", "--set", "l2:1", "--point", "-3,0", "--lambda", "-5"]));
    assert!(s.contains("mu* = 0.000000000000"), "{s}");

    let s = stdout(&rsp(d.path(), &["project", "--set", "box:-1,-1/1,2", "--point", "3,3", "--lambda", "0.5"]));
    assert!(s.contains("P_Z = (1.000000000000, 2.000000000000)"), "{s}");
}

#[test]
fn sgsp_solves_the_lp_fixture() {
    let d = tempfile::tempdir().unwrap();
    write_lp1(d.path());
    let o = rsp(d.path(), &["solve", "--algo", "sgsp", "--instance", "lp1.json", "--iters", "100000", "--out", "s.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let recs = read_records(fs::File::open(d.path().join("s.csv")).unwrap()).unwrap();
    let last = recs.last().unwrap();
    assert!(last.feas_gap <= 1e-3);
    assert!((last.obj - 1.0).abs() <= 1e-2);
}

#[test]
fn every_algorithm_runs_on_the_lp_fixture() {
    let d = tempfile::tempdir().unwrap();
    write_lp1(d.path());
    for algo in ["papc", "cutting-planes", "fo-pess", "oco"] {
        let o = rsp(d.path(), &["solve", "--algo", algo, "--instance", "lp1.json", "--iters", "50000", "--out", "t.csv"]);
        assert_eq!(o.status.code(), Some(0), "{algo}: {}", stdout(&o));
    }
}

#[test]
fn papc_rejects_quadratic_instances() {
    let d = tempfile::tempdir().unwrap();
    rsp(d.path(), &["gen", "--n", "3", "--K", "2", "--L", "2", "--m", "1", "--seed", "1", "--out", "q.json"]);
    let o = rsp(d.path(), &["solve", "--algo", "papc", "--instance", "q.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not biaffine"));
}

#[test]
fn sequential_solves_are_reproducible() {
    let d = tempfile::tempdir().unwrap();
    rsp(d.path(), &["gen", "--n", "4", "--K", "2", "--L", "3", "--m", "1", "--seed", "2", "--out", "q.json"]);
    for algo in ["sgsp", "fo-pess"] {
        for out in ["r1.csv", "r2.csv"] {
            rsp(d.path(), &["solve", "--algo", algo, "--instance", "q.json", "--iters", "2000", "--out", out]);
        }
        assert_eq!(csv_without_time(&d.path().join("r1.csv")), csv_without_time(&d.path().join("r2.csv")), "{algo}");
    }
}

#[test]
fn budget_and_numerical_exit_codes() {
    let d = tempfile::tempdir().unwrap();
    write_lp1(d.path());
    // one master round stops at the nominal point x = −2
    let o = rsp(d.path(), &["solve", "--algo", "cutting-planes", "--instance", "lp1.json", "--iters", "1"]);
    assert_eq!(o.status.code(), Some(3));

    // 1 ≤ 0 for every scenario: the master has no feasible point
    let c = Constraint::biaffine(Matrix::zeros(1, 1), vec![0.0], vec![0.0], 1.0, SetDescriptor::interval(-1.0, 1.0));
    let p = RobustProblem::new(vec![1.0], SetDescriptor::interval(-2.0, 2.0), vec![c]);
    save_instance(&Instance { problem: p, x0: None }, &d.path().join("bad.json")).unwrap();
    let o = rsp(d.path(), &["solve", "--algo", "cutting-planes", "--instance", "bad.json"]);
    assert_eq!(o.status.code(), Some(4));
    let o = rsp(d.path(), &["certify", "--instance", "bad.json", "--budget", "2000"]);
    assert!(matches!(o.status.code(), Some(3) | Some(4)));
}

#[test]
fn certify_reports_a_strict_point() {
    let d = tempfile::tempdir().unwrap();
    rsp(d.path(), &["gen", "--kind", "lp", "--n", "3", "--K", "2", "--m", "2", "--seed", "4", "--out", "l.json"]);
    assert!(load_instance(&d.path().join("l.json")).unwrap().x0.is_some());
    let o = rsp(d.path(), &["certify", "--instance", "l.json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max f = -5.000000e-1"));
}

#[test]
fn bench_writes_one_csv_per_cell_and_a_summary() {
    let d = tempfile::tempdir().unwrap();
    fs::write(
        d.path().join("b.toml"),
        "sizes = [\"4x2x3x1\"]\nseeds = [1]\nalgorithms = [\"cutting-planes\"]\nsgsp_iters = 300\n",
    )
    .unwrap();
    let o = rsp(d.path(), &["bench", "--config", "b.toml", "--jobs", "1", "--out", "res"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let mut names: Vec<String> = fs::read_dir(d.path().join("res")).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, vec!["4x2x3x1-s1-cutting-planes.csv", "summary.json"]);

    // flags override the file
    let o = rsp(d.path(), &["bench", "--config", "b.toml", "--jobs", "1", "--out", "res2", "--algorithms", "cutting-planes,sgsp"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(d.path().join("res2/4x2x3x1-s1-sgsp.csv").exists());
    assert_eq!(rsp(d.path(), &["bench", "--config", "b.toml", "--eps", "-1"]).status.code(), Some(2));
}

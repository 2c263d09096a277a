//! End-to-end tests of the command-line binary: exit codes, file outputs,
//! determinism, and parameter precedence.

use std::path::Path;
use std::process::{Command, Output};

fn ntot(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntot"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn gen_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(
        &["gen", "--m", "10", "--n", "20", "--k", "3", "--seed", "9", "--out-dir", "a"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("seed = 9"));
    let out2 = ntot(
        &["gen", "--m", "10", "--n", "20", "--k", "3", "--seed", "9", "--out-dir", "b"],
        dir.path(),
    );
    assert_eq!(code(&out2), 0);
    for f in ["A.txt", "y.txt", "x_true.txt", "manifest.txt"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between identical runs");
    }
}

#[test]
fn gen_k_zero_writes_zero_signal() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(
        &["gen", "--m", "4", "--n", "8", "--k", "0", "--seed", "1", "--out-dir", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let x = std::fs::read_to_string(dir.path().join("x_true.txt")).unwrap();
    let values: Vec<f64> = x
        .lines()
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|t| t.parse().unwrap())
        .collect();
    assert!(values.iter().all(|&v| v == 0.0));
}

#[test]
fn solve_round_trip_recovers_generated_signal() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&ntot(
            &["gen", "--m", "24", "--n", "48", "--k", "3", "--seed", "5", "--out-dir", "."],
            dir.path(),
        )),
        0
    );
    let out = ntot(
        &[
            "solve", "--algo", "ntrotp", "--matrix", "A.txt", "--rhs", "y.txt", "--truth",
            "x_true.txt", "--k", "3", "--stop", "relative-error", "--stop-tol", "1e-3",
            "--out-dir", ".",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    let header = trace
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap();
    assert_eq!(
        header,
        "algorithm,iteration,residual_l2,relative_error,qp_iters,qp_converged"
    );
    assert!(dir.path().join("x_hat.txt").exists());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("lambda = 5  # default"));
    assert!(manifest.contains("# generator = splitmix64+box-muller-v1"));
}

#[test]
fn solve_ntot_refused_beyond_enumeration_guard() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&ntot(
            &["gen", "--m", "40", "--n", "80", "--k", "12", "--seed", "2", "--out-dir", "."],
            dir.path(),
        )),
        0
    );
    let out = ntot(
        &[
            "solve", "--algo", "ntot", "--matrix", "A.txt", "--rhs", "y.txt", "--k", "12",
            "--out-dir", ".",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("exceeds"));
}

#[test]
fn require_certificate_rejects_invalid_parameters() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        code(&ntot(
            &["gen", "--m", "8", "--n", "16", "--k", "2", "--seed", "3", "--out-dir", "."],
            dir.path(),
        )),
        0
    );
    // A random 8x16 Gaussian matrix has delta_2k far above every theorem's
    // admissible range, so the certificate cannot validate.
    let out = ntot(
        &[
            "solve", "--algo", "ntot", "--matrix", "A.txt", "--rhs", "y.txt", "--k", "2",
            "--require-certificate", "1", "--out-dir", ".",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 3);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(&["sweep", "--study", "bogus"], dir.path());
    assert_eq!(code(&out), 1);
    let out = ntot(&["frobnicate"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_matrix_file_is_numerical_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(
        &["solve", "--algo", "iht", "--matrix", "absent.txt", "--rhs", "y.txt", "--out-dir", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 2);
}

#[test]
fn ric_reports_constants_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("I.txt"),
        "3 3\n1 0 0\n0 1 0\n0 0 1\n",
    )
    .unwrap();
    let out = ntot(
        &["ric", "--matrix", "I.txt", "--orders", "1,2", "--k", "1", "--eps", "2", "--lambda", "3"],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("delta_1 = 0.0000000000000000e0"));
    assert!(stdout.contains("delta_2 = 0.0000000000000000e0"));
    assert!(stdout.contains("theorem = 1"));
    assert!(stdout.contains("theorem = 3"));
    assert!(stdout.contains("valid = true"));
    assert!(stdout.contains("rho = "));
    assert!(stdout.contains("tau = "));
}

#[test]
fn ric_guard_exceeded_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cols: Vec<String> = (0..64).map(|_| "0".to_string()).collect();
    let mut text = String::from("4 64\n");
    for _ in 0..4 {
        text.push_str(&cols.join(" "));
        text.push('\n');
    }
    std::fs::write(dir.path().join("Z.txt"), text).unwrap();
    let out = ntot(&["ric", "--matrix", "Z.txt", "--orders", "10"], dir.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn oracle_check_negative_control_passes_quickly() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(&["oracle-check", "--suite", "negative-control"], dir.path());
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("negative-control"));
}

#[test]
fn config_file_supplies_defaults_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.cfg"), "m = 6\nn = 12\nk = 2\nseed = 4\n").unwrap();
    let out = ntot(
        &["gen", "--config", "run.cfg", "--k", "1", "--out-dir", "."],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("m = 6  # config"));
    assert!(manifest.contains("k = 1  # flag"));
    let a = std::fs::read_to_string(dir.path().join("A.txt")).unwrap();
    assert!(a.starts_with("6 12\n"));
}

#[test]
fn sweep_single_point_single_trial_degenerates_to_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(
        &[
            "sweep", "--study", "success", "--axis", "k_over_n", "--from", "0.1", "--to", "0.1",
            "--points", "1", "--trials", "1", "--m", "12", "--n", "24", "--algos", "omp",
            "--seed", "8", "--out", "one.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(dir.path().join("one.csv")).unwrap();
    let rows: Vec<&str> = csv
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("algorithm"))
        .collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("omp,k_over_n,"));
    assert!(rows[0].contains(",1,"));
}

#[test]
fn residual_study_emits_epsilon_lambda_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = ntot(
        &[
            "sweep", "--study", "residual", "--m", "12", "--n", "24", "--k", "2", "--seed", "6",
            "--algos", "nsiht,iht", "--max-iter", "5", "--lambda-list", "1,5", "--out", "r.csv",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(
        header,
        "epsilon,lambda,algorithm,iteration,residual_l2,relative_error"
    );
    // 2 lambdas x 2 algorithms x 6 recorded iterations (0..=5).
    let rows = csv
        .lines()
        .filter(|l| !l.starts_with('#') && *l != header)
        .count();
    assert_eq!(rows, 24);
}

use std::process::{Command, Output};

use qconnect::cli::{SuiteReport, VerifyAllReport};
use qconnect::identities::Instance;
use qconnect::qcore::{qpoch_fin, theta, Nome, Scalar, TruncationPolicy};

fn qconnect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qconnect"))
        .args(args)
        .env_remove("QCONNECT_TOL")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn eval_value(o: &Output) -> Scalar {
    let text = stdout(o);
    let mut it = text.lines().next().unwrap().split_whitespace().map(|s| s.parse::<f64>().unwrap());
    Scalar::new(it.next().unwrap(), it.next().unwrap())
}

#[test]
fn verify_passes_on_a_seeded_suite() {
    let o = qconnect(&["verify", "rp-connection", "--m", "1", "--trials", "20", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let r: SuiteReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.trials, 20);
    assert_eq!(r.passes, 20);
    assert!(r.max_rel_residual <= 1e-8);
    assert_eq!(r.rel_residuals.len(), 20);
}

#[test]
fn verify_cocycle_at_m2() {
    let o = qconnect(&["verify", "cocycle", "--m", "2", "--trials", "50"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn invalid_configurations_exit_with_2() {
    assert_eq!(qconnect(&["verify", "rp-connection", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(qconnect(&["verify", "no-such-relation"]).status.code(), Some(2));
    assert_eq!(qconnect(&["verify", "w-relation", "--m", "5"]).status.code(), Some(2));
    assert_eq!(qconnect(&["verify", "rp-connection", "--q", "1.5"]).status.code(), Some(2));
    assert_eq!(qconnect(&["verify", "mimachi", "--complex"]).status.code(), Some(2));
}

#[test]
fn tolerance_precedence_env_then_flag() {
    let tight = Command::new(env!("CARGO_BIN_EXE_qconnect"))
        .args(["verify", "rp-connection", "--trials", "3"])
        .env("QCONNECT_TOL", "1e-300")
        .output()
        .unwrap();
    assert_eq!(tight.status.code(), Some(1));
    let r: SuiteReport = serde_json::from_str(&stdout(&tight)).unwrap();
    assert_eq!(r.tol, 1e-300);
    assert_eq!(r.failures, 3);

    let flag = Command::new(env!("CARGO_BIN_EXE_qconnect"))
        .args(["verify", "rp-connection", "--trials", "3", "--tol", "1e-8"])
        .env("QCONNECT_TOL", "1e-300")
        .output()
        .unwrap();
    assert_eq!(flag.status.code(), Some(0));
}

#[test]
fn config_file_is_read_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# suite settings\ntrials = 4\nseed = 3\nm = 2\n").unwrap();
    let o = qconnect(&["verify", "rp-connection", "--config", cfg.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let r: SuiteReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!((r.trials, r.seed, r.m), (2, 3, 2));

    std::fs::write(&cfg, "trials = zero\n").unwrap();
    let o = qconnect(&["verify", "rp-connection", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_file_matches_stdout_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let o = qconnect(&["verify", "heine-connection", "--trials", "5", "--report", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let file = std::fs::read_to_string(&path).unwrap();
    assert_eq!(file.trim_end(), stdout(&o).trim_end());
    let parsed: SuiteReport = serde_json::from_str(&file).unwrap();
    assert_eq!(serde_json::to_string_pretty(&parsed).unwrap(), file.trim_end());
}

#[test]
fn verify_all_covers_every_relation() {
    let o = qconnect(&["verify", "all", "--trials", "2", "--m", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let r: VerifyAllReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.suites.len() + r.skipped.len(), qconnect::identities::RelationKind::ALL.len());
    assert!(r.suites.iter().all(SuiteReport::passed));
    assert_eq!(serde_json::to_string_pretty(&r).unwrap(), stdout(&o).trim_end());
}

#[test]
fn eval_examples() {
    let o = qconnect(&["eval", "qpoch", "0", "--q", "0.3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(eval_value(&o), Scalar::new(1.0, 0.0));

    let o = qconnect(&["eval", "theta", "0.5", "--q", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let q = Nome::real(0.5).unwrap();
    let lib = theta(Scalar::new(0.5, 0.0), q, &TruncationPolicy::default()).unwrap();
    assert!((eval_value(&o) - lib).norm() <= 1e-15 * lib.norm());
    let json: serde_json::Value = serde_json::from_str(stdout(&o).lines().nth(1).unwrap()).unwrap();
    assert_eq!(json["function"], "theta");
}

#[test]
fn eval_terminating_w87_matches_direct_sum() {
    let qv = 0.5;
    let q = Nome::real(qv).unwrap();
    // f = q^{-2}: the series stops after three terms.
    let (a, b, c, d, e, f, z) = (0.3, 0.7, 1.3, 0.45, 0.9, 4.0, 0.2);
    let args: Vec<String> = [a, b, c, d, e, f, z].iter().map(|v| v.to_string()).collect();
    let mut cmd = vec!["eval", "w87"];
    cmd.extend(args.iter().map(String::as_str));
    cmd.extend(["--q", "0.5"]);
    let o = qconnect(&cmd);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = |x: f64| Scalar::new(x, 0.0);
    let mut direct = Scalar::new(0.0, 0.0);
    for n in 0..3usize {
        let num = qpoch_fin(s(a), q, n) * qpoch_fin(s(b), q, n) * qpoch_fin(s(c), q, n) * qpoch_fin(s(d), q, n) * qpoch_fin(s(e), q, n) * qpoch_fin(s(f), q, n);
        let den = qpoch_fin(s(qv), q, n)
            * qpoch_fin(s(a * qv / b), q, n)
            * qpoch_fin(s(a * qv / c), q, n)
            * qpoch_fin(s(a * qv / d), q, n)
            * qpoch_fin(s(a * qv / e), q, n)
            * qpoch_fin(s(a * qv / f), q, n);
        let wp = (1.0 - a * qv.powi(2 * n as i32)) / (1.0 - a);
        direct += num / den * wp * z.powi(n as i32);
    }
    assert!((eval_value(&o) - direct).norm() <= 1e-13 * direct.norm());
}

#[test]
fn eval_usage_errors_exit_with_2() {
    assert_eq!(qconnect(&["eval", "nosuch", "1", "--q", "0.5"]).status.code(), Some(2));
    assert_eq!(qconnect(&["eval", "theta", "--q", "0.5"]).status.code(), Some(2));
    assert_eq!(qconnect(&["eval", "theta", "abc", "--q", "0.5"]).status.code(), Some(2));
    assert_eq!(qconnect(&["eval", "theta", "0.5", "--q", "1.2"]).status.code(), Some(2));
}

#[test]
fn eval_numeric_errors_exit_with_1() {
    assert_eq!(qconnect(&["eval", "theta", "0", "--q", "0.5"]).status.code(), Some(1));
}

#[test]
fn sample_is_reproducible_and_reloads() {
    let args = ["sample", "--m", "2", "--seed", "5", "--trial", "3"];
    let a = qconnect(&args);
    let b = qconnect(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let inst: Instance = serde_json::from_str(&stdout(&a)).unwrap();
    let Instance::Rp { q, params } = inst else { panic!("expected an rp instance") };
    assert_eq!(params.m, 2);
    params.check_balance(q).unwrap();
    let c = qconnect(&["sample", "--m", "2", "--seed", "6", "--trial", "3"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn sample_rejects_bad_requests() {
    assert_eq!(qconnect(&["sample", "--relation", "bogus"]).status.code(), Some(2));
    assert_eq!(qconnect(&["sample", "--relation", "w-relation", "--m", "6"]).status.code(), Some(2));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lts(args: &[&str], out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lts"));
    cmd.args(args);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn simulate_writes_trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = lts(
        &[
            "simulate",
            "--dim",
            "2",
            "--beta",
            "2",
            "--horizon",
            "10",
            "--episodes",
            "3",
            "--particles",
            "20",
            "--jobs",
            "2",
        ],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "episode,t,action_dot_theta,reward,inst_regret_expected,inst_regret_realized,cum_regret_realized,mutual_info,gamma,gamma_flag"
    );
    assert_eq!(lines.count(), 30);
    let summary = fs::read_to_string(dir.path().join("summary.json")).unwrap();
    assert!(summary.contains("\"bound_main\""));
    assert!(summary.contains("\"particles\": 20"));
}

#[test]
fn simulate_with_finite_prior_file() {
    let dir = tempfile::tempdir().unwrap();
    let prior = dir.path().join("prior.txt");
    fs::write(&prior, "1 0 2\n1 0.5\n-1 0.5\n").unwrap();
    let arg = format!("file:{}", prior.display());
    let o = lts(
        &[
            "simulate",
            "--dim",
            "1",
            "--beta",
            "2",
            "--horizon",
            "5",
            "--episodes",
            "2",
            "--prior",
            &arg,
        ],
        Some(&dir.path().join("out")),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/simulate.csv")).unwrap();
    // every action is ±1, so the inner product is ±1
    for line in csv.lines().skip(1) {
        let x: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(x.abs(), 1.0);
    }
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["simulate", "--dim", "2", "--beta", "-1", "--horizon", "5"][..],
        &["simulate", "--dim", "0", "--beta", "1", "--horizon", "5"],
        &[
            "simulate",
            "--dim",
            "2",
            "--beta",
            "1",
            "--horizon",
            "5",
            "--prior",
            "gaussian",
        ],
        &[
            "simulate",
            "--dim",
            "2",
            "--beta",
            "1",
            "--horizon",
            "5",
            "--epsilon",
            "3",
        ],
        &["lemma-check", "--lemma", "no_such_lemma"],
        &["net", "--dim", "2", "--epsilon", "0"],
        &["simulate", "--dim", "2"],
    ] {
        let o = lts(args, Some(dir.path()));
        assert_eq!(o.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn io_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = lts(&["figure-data", "--resolution", "5"], Some(&blocker.join("sub")));
    assert_eq!(o.status.code(), Some(1));
    let o = lts(
        &[
            "simulate",
            "--dim",
            "1",
            "--beta",
            "1",
            "--horizon",
            "5",
            "--prior",
            "file:/nonexistent/prior.txt",
        ],
        Some(dir.path()),
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn empty_scan_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = lts(&["info-ratio-scan", "--trials", "0"], Some(dir.path()));
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("info_ratio_scan.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
}

#[test]
fn small_scan_and_lemma_check_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = lts(
        &[
            "info-ratio-scan",
            "--dim",
            "1,2",
            "--beta",
            "2,50",
            "--trials",
            "50",
            "--structured-trials",
            "5",
        ],
        Some(dir.path()),
    );
    assert!(o.status.success());
    assert!(stdout(&o).contains("violations=0"));
    let o = lts(
        &["lemma-check", "--trials", "200", "--jobs", "2"],
        Some(dir.path()),
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let csv = fs::read_to_string(dir.path().join("lemma_check.csv")).unwrap();
    assert!(csv.starts_with("lemma,trial,lhs,rhs,margin,holds\n"));
}

#[test]
fn bounds_table() {
    let o = lts(&["bounds", "--dim", "2", "--beta", "1", "--horizon", "100"], None);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "d\tbeta\tT\tbound_main\tbound_quantized\tnet_size\tentropy_bound"
    );
    let row: Vec<&str> = lines.next().unwrap().split('\t').collect();
    assert_eq!(&row[..3], ["2", "1", "100"]);
    let main: f64 = row[3].parse().unwrap();
    assert!((main - 101.4).abs() < 0.05);
    let size: usize = row[5].parse().unwrap();
    let h: f64 = row[6].parse().unwrap();
    assert!((h - (size as f64).ln()).abs() < 1e-6);
}

#[test]
fn net_round_trip_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nets/net.txt");
    let o = lts(
        &["net", "--dim", "3", "--epsilon", "0.5", "--samples", "20000"],
        Some(&path),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
    assert_eq!(header[0], "3");
    let n: usize = header[2].parse().unwrap();
    assert!(n <= 125);
    assert_eq!(text.lines().count(), n + 1);
}

#[test]
fn figure_data_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = lts(
        &["figure-data", "--beta", "1,4", "--resolution", "21"],
        Some(dir.path()),
    );
    assert!(o.status.success());
    let curves = fs::read_to_string(dir.path().join("psi_curves.csv")).unwrap();
    assert_eq!(curves.lines().count(), 43);
    let deltas = fs::read_to_string(dir.path().join("delta_beta.csv")).unwrap();
    assert_eq!(deltas.lines().count(), 3);
}

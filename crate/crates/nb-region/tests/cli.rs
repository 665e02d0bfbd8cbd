use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use tempfile::TempDir;

const FIRST_SAMPLE: &str = "\
# n = 50 draws, mu = 1, P = 1
0,1,2,0,0,0,0,3,0,0,1,0,1,1,2,1,0,0,0,3,0,0,0,3,0
1,0,1,1,0,0,1,1,1,3,7,1,1,0,1,3,0,0,0,0,0,3,0,1,2
";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nb-region"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn nb-region")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn nb-region");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn csv_field(text: &str, column: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == column).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn estimate_sample_is_negative_binomial() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "first.txt", FIRST_SAMPLE);
    let out = run(&["estimate", &file, "--json"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let keys = ["n", "mean", "s2", "mu_hat", "p_hat", "log_mu_hat", "log_p1_hat", "regime"];
    assert_eq!(v.as_object().unwrap().len(), keys.len());
    for k in keys {
        assert!(v.get(k).is_some(), "missing {k}");
    }
    assert_eq!(v["n"], 50);
    assert_eq!(v["regime"], "NegativeBinomial");
    assert!(v["p_hat"].as_f64().unwrap() > 0.0);
    // sum 46, sum of squares 130
    assert!((v["mean"].as_f64().unwrap() - 0.92).abs() < 1e-12);
    assert!((v["s2"].as_f64().unwrap() - (2.6 - 0.92 * 0.92)).abs() < 1e-12);
}

#[test]
fn estimate_table_output() {
    let out = run_stdin(&["estimate"], "0 0 2 2\n");
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("mean        1\n"), "{text}");
    assert!(text.contains("s2          1\n"));
    assert!(text.contains("regime      PoissonLimit\n"));
}

#[test]
fn degenerate_samples_exit_3() {
    let dir = TempDir::new().unwrap();
    let constant = write(&dir, "c.txt", "3 3 3\n");
    let out = run(&["estimate", &constant]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ZeroVariance"));

    let zeros = write(&dir, "z.txt", "0 0 0 0\n");
    let out = run(&["estimate", &zeros]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("ZeroMean"));
}

#[test]
fn parse_failures_exit_2() {
    let out = run_stdin(&["estimate"], "1 2 x\n");
    assert_eq!(out.status.code(), Some(2));
    let out = run_stdin(&["estimate"], "4\n");
    assert_eq!(out.status.code(), Some(2));
    let out = run_stdin(&["estimate"], "1 -2 3\n");
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["region", "--estimates", "0.96,1.906", "--n", "50", "--levels", "1.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["region", "--estimates", "0.96,1.906"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["coverage", "--mu", "1", "--p", "0.3", "--n", "50", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["underdisp", "--mu", "1", "--p", "0.3", "--n", "50", "--reps", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["underdisp", "--mu", "-1", "--p", "0.3", "--n", "50", "--reps", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    let out = run(&["estimate", "/nonexistent/counts.txt"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn region_outside_the_domain_exits_4() {
    // mu + P <= 0 everywhere
    let out = run(&["region", "--estimates", "1,1", "--n", "50", "--grid", "0.1,0.2,-0.9,-0.5,4,4"]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("EmptyGrid"));
}

#[test]
fn first_example_contains_the_truth() {
    let dir = TempDir::new().unwrap();
    let svg = dir.path().join("r.svg");
    let out = run(&["region", "--estimates", "0.960,1.906", "--n", "50", "--check", "1,1", "--out", svg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    let checks: Vec<&str> = summary.lines().filter(|l| l.starts_with("check")).collect();
    assert_eq!(checks.len(), 3);
    assert!(checks.iter().all(|l| l.contains("inside=true")), "{summary}");
    let body = std::fs::read_to_string(&svg).unwrap();
    assert!(body.starts_with("<svg"));
    assert_eq!(body.matches("class=\"contour\"").count(), 3);
}

#[test]
fn second_example_straddles_the_axis() {
    let out = run(&["region", "--estimates", "2.98,0.9667", "--n", "50"]);
    assert!(out.status.success());
    // grid CSV on stdout, summary on stderr
    assert!(stdout(&out).starts_with("mu,p,stat\n"));
    let summary = stderr(&out);
    let levels: Vec<&str> = summary.lines().filter(|l| l.starts_with("level=")).collect();
    assert_eq!(levels.len(), 3);
    for line in levels {
        let count = |key: &str| -> usize {
            let tail = &line[line.find(key).unwrap() + key.len()..];
            tail.split_whitespace().next().unwrap().parse().unwrap()
        };
        assert!(count("poisson_points=") > 0 && count("nb_points=") > 0, "{line}");
    }
}

#[test]
fn format_follows_flag_then_extension() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("grid.svg");
    let p = path.to_str().unwrap();
    let out = run(&["region", "--estimates", "1,1.5", "--n", "40", "--format", "csv", "--out", p]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("mu,p,stat"));
    let out = run(&["region", "--estimates", "1,1.5", "--n", "40", "--out", p]);
    assert!(out.status.success());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("<svg"));
}

#[test]
fn estimate_then_region_round_trip() {
    let dir = TempDir::new().unwrap();
    let file = write(&dir, "first.txt", FIRST_SAMPLE);
    let est = run(&["estimate", &file, "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&est)).unwrap();
    let mu_hat = v["mu_hat"].as_f64().unwrap();
    let p1_hat = v["p_hat"].as_f64().unwrap() + 1.0;
    let n = v["n"].as_u64().unwrap().to_string();
    let estimates = format!("{mu_hat:?},{p1_hat:?}");
    let check = format!("{mu_hat:?},{:?}", p1_hat - 1.0);
    let out = run(&["region", "--estimates", &estimates, "--n", &n, "--check", &check, "--out", dir.path().join("g.csv").to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = stdout(&out);
    for line in summary.lines().filter(|l| l.starts_with("check")) {
        assert!(line.contains("inside=true") && line.ends_with("stat=0"), "{line}");
    }

    // reading the file directly builds the same grid
    let direct = run(&["region", &file]);
    let via_estimates = run(&["region", "--estimates", &estimates, "--n", &n]);
    assert_eq!(direct.stdout, via_estimates.stdout);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let cases: [&[&str]; 4] = [
        &["coverage", "--mu", "1", "--p", "0.3", "--n", "30", "--reps", "2000", "--seed", "4"],
        &["underdisp", "--mu", "0.3", "--p", "0.3", "--n", "30", "--reps", "2000", "--seed", "4"],
        &["scatter", "--mu", "1", "--p", "1", "--n", "30", "--reps", "300", "--seed", "4"],
        &["region", "--estimates", "2.98,0.9667", "--n", "50", "--format", "svg"],
    ];
    for args in cases {
        let a = run(args);
        let b = run(args);
        assert!(a.status.success());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn thread_count_does_not_change_results() {
    let args = ["coverage", "--mu", "1", "--p", "1", "--n", "40", "--reps", "3000", "--seed", "9"];
    let single = bin().args(args).env("NB_REGION_THREADS", "1").output().unwrap();
    let many = bin().args(args).env("NB_REGION_THREADS", "8").output().unwrap();
    assert!(single.status.success());
    assert_eq!(single.stdout, many.stdout);
}

#[test]
fn coverage_csv_shape() {
    let out = run(&["coverage", "--mu", "3", "--p", "0.3", "--n", "50", "--reps", "1000", "--seed", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("mu,p,n,level,reps,degenerate,coverage,std_error\n"));
    assert_eq!(csv_field(&text, "level"), ["0.5", "0.8", "0.95"]);
    let cov: Vec<f64> = csv_field(&text, "coverage").iter().map(|c| c.parse().unwrap()).collect();
    assert!(cov.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn coverage_reference_cell() {
    let out = run(&["coverage", "--mu", "1", "--p", "0.3", "--n", "100", "--levels", "0.95", "--reps", "10000", "--seed", "1"]);
    let cov: f64 = csv_field(&stdout(&out), "coverage")[0].parse().unwrap();
    assert!((cov - 0.9491).abs() <= 0.015, "{cov}");
}

#[test]
fn underdisp_reference_cell_written_to_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("u.csv");
    let out = run(&["underdisp", "--mu", "0.1", "--p", "0.1", "--n", "30", "--seed", "1", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(Path::new(&path)).unwrap();
    assert_eq!(csv_field(&text, "reps"), ["10000"]);
    let proportion: f64 = csv_field(&text, "proportion")[0].parse().unwrap();
    assert!((proportion - 0.79).abs() <= 0.02, "{proportion}");
}

#[test]
fn scatter_skips_degenerate_replicates() {
    let out = run(&["scatter", "--mu", "0.05", "--p", "0.3", "--n", "10", "--reps", "200", "--seed", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("replicate,mu_hat,p_hat,log_mu_hat,log_p1_hat\n"));
    assert!(text.lines().count() - 1 < 200);
}

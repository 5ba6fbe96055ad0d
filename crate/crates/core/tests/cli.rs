use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BASE: &str = r#"
seed = 5
frames = 60000
burn_in = 5000

[battery]
e_max = 3000.0
mu = 0.85
beta = 0.8

[policy]
kind = "constant"
theta = 9.2e-4
"#;

fn ehsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ehsim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn solve_reports_the_balance_solution() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", BASE);
    let out = dir.path().join("solve.csv");
    let r = ehsim(&["solve", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "constant");
    let p: f64 = row[2].parse().unwrap();
    assert!(p > 80.0 && p < 84.0, "{p}");
    assert_eq!(row[5], "true");
}

#[test]
fn simulate_writes_stats_and_tail() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", BASE);
    let out = dir.path().join("run.csv");
    let r = ehsim(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--seed",
        "9",
        "--workers",
        "2",
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    assert!(header(&out).starts_with("policy,theta,e_c,frames_counted,underflow_freq"));
    let tail = dir.path().join("run.tail.csv");
    assert_eq!(
        header(&tail),
        "threshold,exceedance_prob,log_prob,episodes,frames"
    );
    assert_eq!(fs::read_to_string(&tail).unwrap().lines().count(), 9);

    // Same seed, same bytes; the seed flag changes the result.
    let again = dir.path().join("again.csv");
    ehsim(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&again),
        "--seed",
        "9",
        "--workers",
        "1",
    ]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
    let other = dir.path().join("other.csv");
    ehsim(&[
        "simulate",
        "--config",
        s(&cfg),
        "--out",
        s(&other),
        "--seed",
        "10",
    ]);
    assert_ne!(fs::read(&out).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn sweep_csv_schema() {
    let dir = TempDir::new().unwrap();
    let text = format!("{BASE}\n[sweep]\ne_c = [500.0, 1000.0]\ntheta = [4.6e-4, 9.2e-4]\n");
    let cfg = write_config(&dir, "c.toml", &text);
    let out = dir.path().join("sweep.csv");
    let r = ehsim(&[
        "sweep",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--frames",
        "40000",
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "e_c,theta,empirical_underflow,approx_exp,approx_refined,delta_hat,events,low_confidence"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 8);
        let mantissa = cols[2].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 12);
        assert!(cols[7] == "true" || cols[7] == "false");
    }
}

#[test]
fn compare_csv_schema() {
    let dir = TempDir::new().unwrap();
    let text = format!(
        "{BASE}\n[compare]\npolicies = [\"constant\", \"water_filling\", \"no_storage\"]\n\
         theta = [4.6e-4]\ne_c = [200.0, 2000.0]\n"
    );
    let cfg = write_config(&dir, "c.toml", &text);
    let out = dir.path().join("cmp.csv");
    let r = ehsim(&[
        "compare",
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "--workers",
        "2",
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "policy,theta,e_c,mean_service_rate,outage_freq"
    );
    assert_eq!(text.lines().count(), 1 + 2 + 2 + 2);
    assert!(text.lines().any(|l| l.starts_with("no_storage,,")));
}

#[test]
fn configuration_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let unknown = write_config(&dir, "u.toml", &format!("{BASE}\nwidgets = 3\n"));
    assert_eq!(
        ehsim(&["simulate", "--config", s(&unknown)]).status.code(),
        Some(1)
    );
    let missing = dir.path().join("nope.toml");
    assert_eq!(
        ehsim(&["solve", "--config", s(&missing)]).status.code(),
        Some(1)
    );
    let no_sweep = write_config(&dir, "n.toml", BASE);
    assert_eq!(
        ehsim(&["sweep", "--config", s(&no_sweep)]).status.code(),
        Some(1)
    );
    assert_eq!(
        ehsim(&["simulate", "--config", s(&no_sweep), "--frames", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        ehsim(&["simulate", "--config", s(&no_sweep), "--workers", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(ehsim(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn solver_failure_exits_2() {
    // Arrivals that are always zero: the battery can never meet any demand.
    let dir = TempDir::new().unwrap();
    let text = format!("{BASE}\n[arrival]\nkind = \"empirical\"\nsamples = [0.0, 0.0]\n");
    let cfg = write_config(&dir, "z.toml", &text);
    assert_eq!(
        ehsim(&["solve", "--config", s(&cfg)]).status.code(),
        Some(2)
    );
}

#[test]
fn unstable_demand_exits_3() {
    let dir = TempDir::new().unwrap();
    let text = BASE.replace("theta = 9.2e-4", "level = 90.0");
    let cfg = write_config(&dir, "x.toml", &text);
    for cmd in ["solve", "simulate"] {
        let r = ehsim(&[cmd, "--config", s(&cfg)]);
        assert_eq!(r.status.code(), Some(3), "{cmd}");
        assert!(String::from_utf8_lossy(&r.stderr).contains("unstable"));
    }
}

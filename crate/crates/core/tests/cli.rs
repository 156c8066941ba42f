//! End-to-end checks of the `twopoint` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

use twopoint::cli::parse_config;
use twopoint::sim::run_scenario;

const HEADER: &str = "t,x,y,psi,v,theta_near,theta_far,steer_cmd,lat_err";

fn twopoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twopoint"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_owned(), v.trim().to_owned()))
        .collect()
}

#[test]
fn default_run_writes_complete_csv() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(dir.path(), "empty.toml", "");
    let out = dir.path().join("out");
    let result = twopoint(&["run", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));

    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect();
    assert!(rows.iter().all(|r| r.len() == 9 && r.iter().all(|v| v.is_finite())));

    let expected = run_scenario(&parse_config(Path::new(&cfg)).unwrap()).unwrap();
    assert_eq!(rows.len(), expected.log.len());

    // Five laps of a 30 x 22.5 m oval at 4 m/s take roughly 18 s each.
    let final_t = rows.last().unwrap()[0];
    assert!((80.0..110.0).contains(&final_t), "{final_t}");

    let metrics = key_values(&fs::read_to_string(out.join("metrics.txt")).unwrap());
    let keys: Vec<&str> = metrics.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(
        keys,
        ["mean_abs_lat_err", "std_lat_err", "laps_completed", "collided", "seed"]
    );
    assert!(metrics.contains(&("laps_completed".into(), "5".into())));
    assert!(metrics.contains(&("collided".into(), "false".into())));
}

#[test]
fn no_steering_authority_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(dir.path(), "stiff.toml", "driver.delta_max = 0.001\n");
    let out = dir.path().join("out");
    let result = twopoint(&["run", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(1));
    let metrics = fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("collided=true"));
}

#[test]
fn config_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let missing = dir.path().join("nope.toml");
    let result = twopoint(&["run", missing.to_str().unwrap(), "-o", out]);
    assert_eq!(result.status.code(), Some(2));

    let bad_dt = scenario(dir.path(), "dt.toml", "sim.dt = -1\n");
    let result = twopoint(&["run", &bad_dt, "-o", out]);
    assert_eq!(result.status.code(), Some(2));

    let unknown = scenario(dir.path(), "typo.toml", "driver.K_x = 3.0\n");
    let result = twopoint(&["run", &unknown, "-o", out]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("driver.K_a") && stderr.contains("sim.laps"), "{stderr}");
}

#[test]
fn seed_override_is_recorded() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(dir.path(), "short.toml", "[sim]\nlaps = 1\n");
    let out = dir.path().join("out");
    let result = twopoint(&["run", &cfg, "-o", out.to_str().unwrap(), "--seed", "99"]);
    assert_eq!(result.status.code(), Some(0));
    let metrics = fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.contains("seed=99"));
}

#[test]
fn batch_reports_every_experiment() {
    let dir = TempDir::new().unwrap();
    let cfg = scenario(dir.path(), "two_laps.toml", "sim.laps = 2\n");
    let out = dir.path().join("batch");
    let result = twopoint(&["batch", &cfg, "-o", out.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(0), "{}", String::from_utf8_lossy(&result.stderr));

    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    let mut lines = summary.lines();
    assert_eq!(
        lines.next(),
        Some("experiment,mean_abs_lat_err,std_lat_err,laps_completed,collided")
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    let names: Vec<&str> = rows.iter().map(|r| r[0]).collect();
    assert_eq!(names, ["baseline", "costmap", "vehicle_follow"]);
    for row in &rows {
        assert_eq!(row.len(), 5);
        assert!(row[1].parse::<f64>().unwrap() >= 0.0);
        assert!(row[2].parse::<f64>().unwrap() >= 0.0);
        assert_eq!(row[3], "2");
        assert_eq!(row[4], "false");
        assert!(out.join(row[0]).join("trajectory.csv").is_file());
    }
}

#[test]
fn selftest_passes() {
    let result = twopoint(&["selftest"]);
    assert_eq!(result.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.lines().count() >= 6);
    assert!(stdout.lines().all(|l| l.starts_with("PASS")), "{stdout}");
}

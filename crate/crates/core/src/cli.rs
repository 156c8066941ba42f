//! Scenario files and the command-line entry points.
//!
//! A scenario file is TOML restricted to one level of sections, written
//! either as `[driver]` tables or as dotted keys (`driver.K_a = 30.0`).
//! Every key is optional; missing keys keep their defaults.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{ConfigError, SimError};
use crate::sim::{run_scenario, Experiment, ScenarioConfig, ScenarioRun, Termination};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUN_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

/// Every accepted key, in the order they are documented.
pub const VALID_KEYS: &[&str] = &[
    "sim.experiment",
    "sim.laps",
    "sim.v_target",
    "sim.dt",
    "sim.plant_substeps",
    "sim.seed",
    "sim.start_arc",
    "sim.max_time",
    "driver.T_N",
    "driver.T_P",
    "driver.K_a",
    "driver.K_c",
    "driver.T_L",
    "driver.T_I",
    "driver.steer_gain",
    "driver.delta_max",
    "track.outer_diameter",
    "track.aspect_ratio",
    "track.half_width",
    "track.spacing",
    "track.centerline_csv",
    "vehicle.wheelbase",
    "pid.kp",
    "pid.ki",
    "pid.kd",
    "pid.integ_max",
    "pid.a_max",
    "perception.l_near",
    "perception.l_far",
    "perception.near_rows",
    "perception.far_rows",
    "perception.costmap_rate_hz",
    "perception.detection_rate_hz",
    "perception.dropout_timeout",
    "camera.fov_deg",
    "camera.width",
    "camera.height",
    "camera.mount_height",
    "lead.speed",
    "lead.gap",
    "lead.amplitude",
    "lead.length",
    "lead.width",
    "lead.height",
];

pub fn parse_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|e| ConfigError::Read {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    let mut cfg = parse_config_str(&text)?;
    // Relative centerline paths are resolved against the scenario file.
    if let Some(csv) = &cfg.track.centerline_csv {
        if csv.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.track.centerline_csv = Some(dir.join(csv));
            }
        }
    }
    Ok(cfg)
}

pub fn parse_config_str(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.to_string()))?;
    let mut cfg = ScenarioConfig::default();
    for (section, value) in &table {
        let toml::Value::Table(inner) = value else {
            return Err(unknown(section));
        };
        for (name, value) in inner {
            let key = format!("{section}.{name}");
            if value.is_table() {
                return Err(unknown(&format!("{key}.*")));
            }
            apply_key(&mut cfg, &key, value)?;
        }
    }
    // The controller step always follows the simulation step.
    cfg.driver.dt = cfg.dt;
    cfg.validate().map_err(|e| match e {
        SimError::Controller(c) => ConfigError::OutOfRange {
            key: "driver".into(),
            value: String::new(),
            constraint: c.to_string(),
        },
        other => ConfigError::OutOfRange {
            key: "scenario".into(),
            value: String::new(),
            constraint: other.to_string(),
        },
    })?;
    Ok(cfg)
}

fn unknown(key: &str) -> ConfigError {
    ConfigError::UnknownKey {
        key: key.to_string(),
        valid: VALID_KEYS.join(", "),
    }
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    match v {
        toml::Value::Float(f) => Ok(*f),
        toml::Value::Integer(i) => Ok(*i as f64),
        _ => Err(ConfigError::WrongType {
            key: key.into(),
            expected: "number",
        }),
    }
}

fn as_int(key: &str, v: &toml::Value) -> Result<i64, ConfigError> {
    v.as_integer().ok_or_else(|| ConfigError::WrongType {
        key: key.into(),
        expected: "integer",
    })
}

fn range(key: &str, value: impl ToString, constraint: &str) -> ConfigError {
    ConfigError::OutOfRange {
        key: key.into(),
        value: value.to_string(),
        constraint: constraint.into(),
    }
}

fn positive(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = as_f64(key, v)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(range(key, x, "must be > 0"))
    }
}

fn non_negative(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = as_f64(key, v)?;
    if x.is_finite() && x >= 0.0 {
        Ok(x)
    } else {
        Err(range(key, x, "must be >= 0"))
    }
}

fn finite(key: &str, v: &toml::Value) -> Result<f64, ConfigError> {
    let x = as_f64(key, v)?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(range(key, x, "must be finite"))
    }
}

fn count(key: &str, v: &toml::Value, min: i64) -> Result<i64, ConfigError> {
    let x = as_int(key, v)?;
    if x >= min && x <= u32::MAX as i64 {
        Ok(x)
    } else {
        Err(range(key, x, &format!("must be an integer >= {min}")))
    }
}

fn apply_key(cfg: &mut ScenarioConfig, key: &str, v: &toml::Value) -> Result<(), ConfigError> {
    match key {
        "sim.experiment" => {
            let s = v.as_str().ok_or_else(|| ConfigError::WrongType {
                key: key.into(),
                expected: "string",
            })?;
            cfg.experiment = s.parse().map_err(|e: String| range(key, s, &e))?;
        }
        "sim.laps" => cfg.laps = count(key, v, 1)? as u32,
        "sim.v_target" => cfg.v_target = positive(key, v)?,
        "sim.dt" => cfg.dt = positive(key, v)?,
        "sim.plant_substeps" => cfg.plant_substeps = count(key, v, 1)? as u32,
        "sim.seed" => cfg.rng_seed = count(key, v, 0)? as u64,
        "sim.start_arc" => cfg.start_arc = Some(non_negative(key, v)?),
        "sim.max_time" => cfg.max_time = Some(positive(key, v)?),
        "driver.T_N" => cfg.driver.t_n = positive(key, v)?,
        "driver.T_P" => cfg.driver.t_p = non_negative(key, v)?,
        "driver.K_a" => cfg.driver.k_a = finite(key, v)?,
        "driver.K_c" => cfg.driver.k_c = finite(key, v)?,
        "driver.T_L" => cfg.driver.t_l = positive(key, v)?,
        "driver.T_I" => cfg.driver.t_i = positive(key, v)?,
        "driver.steer_gain" => cfg.steer.gain = finite(key, v)?,
        "driver.delta_max" => {
            let x = positive(key, v)?;
            if x >= std::f64::consts::FRAC_PI_2 {
                return Err(range(key, x, "must be < pi/2"));
            }
            cfg.steer.max_angle = x;
        }
        "track.outer_diameter" => cfg.track.outer_diameter = positive(key, v)?,
        "track.aspect_ratio" => {
            let x = positive(key, v)?;
            if x > 1.0 {
                return Err(range(key, x, "must be in (0, 1]"));
            }
            cfg.track.aspect_ratio = x;
        }
        "track.half_width" => cfg.track.half_width = positive(key, v)?,
        "track.spacing" => {
            let x = positive(key, v)?;
            if x > crate::track::MAX_SPACING {
                return Err(range(key, x, "must be <= 0.05"));
            }
            cfg.track.spacing = x;
        }
        "track.centerline_csv" => {
            let s = v.as_str().ok_or_else(|| ConfigError::WrongType {
                key: key.into(),
                expected: "string",
            })?;
            cfg.track.centerline_csv = Some(PathBuf::from(s));
        }
        "vehicle.wheelbase" => cfg.vehicle.wheelbase = positive(key, v)?,
        "pid.kp" => cfg.pid.kp = finite(key, v)?,
        "pid.ki" => cfg.pid.ki = finite(key, v)?,
        "pid.kd" => cfg.pid.kd = finite(key, v)?,
        "pid.integ_max" => cfg.pid.integ_max = non_negative(key, v)?,
        "pid.a_max" => cfg.pid.a_max = positive(key, v)?,
        "perception.l_near" => cfg.perception.l_near = positive(key, v)?,
        "perception.l_far" => cfg.perception.l_far = positive(key, v)?,
        "perception.near_rows" => cfg.perception.near_rows = count(key, v, 1)? as usize,
        "perception.far_rows" => cfg.perception.far_rows = count(key, v, 1)? as usize,
        "perception.costmap_rate_hz" => cfg.perception.costmap_rate_hz = positive(key, v)?,
        "perception.detection_rate_hz" => cfg.perception.detection_rate_hz = positive(key, v)?,
        "perception.dropout_timeout" => cfg.perception.dropout_timeout = non_negative(key, v)?,
        "camera.fov_deg" => {
            let x = positive(key, v)?;
            if x >= 180.0 {
                return Err(range(key, x, "must be < 180"));
            }
            cfg.camera.fov_deg = x;
        }
        "camera.width" => cfg.camera.width = count(key, v, 1)? as u32,
        "camera.height" => cfg.camera.height = count(key, v, 1)? as u32,
        "camera.mount_height" => cfg.camera.mount_height = finite(key, v)?,
        "lead.speed" => cfg.lead.speed = positive(key, v)?,
        "lead.gap" => cfg.lead.gap = finite(key, v)?,
        "lead.amplitude" => cfg.lead.amplitude = non_negative(key, v)?,
        "lead.length" => cfg.lead.dims.0 = positive(key, v)?,
        "lead.width" => cfg.lead.dims.1 = positive(key, v)?,
        "lead.height" => cfg.lead.dims.2 = positive(key, v)?,
        _ => return Err(unknown(key)),
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Invocation {
    Run {
        scenario: Option<PathBuf>,
        out_dir: PathBuf,
        seed: Option<u64>,
    },
    Batch {
        scenario: Option<PathBuf>,
        out_dir: PathBuf,
        seed: Option<u64>,
    },
    Selftest,
}

fn load(scenario: &Option<PathBuf>, seed: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let mut cfg = match scenario {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.rng_seed = seed;
    }
    Ok(cfg)
}

/// Writes `trajectory.csv` and `metrics.txt` for one run.
pub fn write_run(out_dir: &Path, run: &ScenarioRun, seed: u64) -> std::io::Result<()> {
    fs::create_dir_all(out_dir)?;
    let file = fs::File::create(out_dir.join("trajectory.csv"))?;
    run.log.write_csv(std::io::BufWriter::new(file))?;
    fs::write(out_dir.join("metrics.txt"), run.metrics.to_key_value(seed))
}

fn run_succeeded(run: &ScenarioRun) -> bool {
    run.termination == Termination::Completed
}

/// Executes an invocation and returns the process exit code.
pub fn main_with(invocation: &Invocation) -> i32 {
    match invocation {
        Invocation::Run {
            scenario,
            out_dir,
            seed,
        } => {
            let cfg = match load(scenario, *seed) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            match run_scenario(&cfg) {
                Ok(run) => {
                    if let Err(e) = write_run(out_dir, &run, cfg.rng_seed) {
                        eprintln!("error: writing {}: {e}", out_dir.display());
                        return EXIT_CONFIG;
                    }
                    print!("{}", run.metrics.to_key_value(cfg.rng_seed));
                    if run_succeeded(&run) {
                        EXIT_OK
                    } else {
                        eprintln!("run ended early: {:?}", run.termination);
                        EXIT_RUN_FAILED
                    }
                }
                Err(SimError::InvalidConfig(msg)) => {
                    eprintln!("error: {msg}");
                    EXIT_CONFIG
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    EXIT_RUN_FAILED
                }
            }
        }
        Invocation::Batch {
            scenario,
            out_dir,
            seed,
        } => {
            let base = match load(scenario, *seed) {
                Ok(cfg) => cfg,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            run_batch(&base, out_dir)
        }
        Invocation::Selftest => {
            let report = crate::cli::selftest::run_all();
            for (name, result) in &report {
                match result {
                    Ok(()) => println!("PASS {name}"),
                    Err(msg) => println!("FAIL {name}: {msg}"),
                }
            }
            if report.iter().all(|(_, r)| r.is_ok()) {
                EXIT_OK
            } else {
                EXIT_RUN_FAILED
            }
        }
    }
}

/// Runs all three experiments in parallel, one output directory each, and
/// writes `summary.txt`.
pub fn run_batch(base: &ScenarioConfig, out_dir: &Path) -> i32 {
    let results: Vec<(Experiment, Result<ScenarioRun, SimError>)> = std::thread::scope(|s| {
        let handles: Vec<_> = Experiment::ALL
            .iter()
            .map(|&experiment| {
                let cfg = ScenarioConfig {
                    experiment,
                    ..base.clone()
                };
                s.spawn(move || (experiment, run_scenario(&cfg)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scenario thread panicked"))
            .collect()
    });

    let mut summary = String::from("experiment,mean_abs_lat_err,std_lat_err,laps_completed,collided\n");
    let mut code = EXIT_OK;
    for (experiment, result) in &results {
        match result {
            Ok(run) => {
                if let Err(e) = write_run(&out_dir.join(experiment.as_str()), run, base.rng_seed) {
                    eprintln!("error: writing {experiment} output: {e}");
                    return EXIT_CONFIG;
                }
                let m = &run.metrics;
                summary.push_str(&format!(
                    "{experiment},{},{},{},{}\n",
                    m.mean_abs_lat_err, m.std_lat_err, m.laps_completed, m.collided
                ));
                if !run_succeeded(run) {
                    code = EXIT_RUN_FAILED;
                }
            }
            Err(e) => {
                eprintln!("{experiment}: {e}");
                summary.push_str(&format!("{experiment},NaN,NaN,0,false\n"));
                code = match e {
                    SimError::InvalidConfig(_) => EXIT_CONFIG,
                    _ => EXIT_RUN_FAILED,
                };
            }
        }
    }
    if let Err(e) = fs::create_dir_all(out_dir).and_then(|_| fs::write(out_dir.join("summary.txt"), &summary)) {
        eprintln!("error: writing summary: {e}");
        return EXIT_CONFIG;
    }
    print!("{summary}");
    code
}

pub mod selftest;

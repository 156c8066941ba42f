//! Quick invariant checks behind `twopoint selftest`.

use nalgebra::Point2;

use crate::controller::{Controller, DriverParams, SteerMapping};
use crate::perception::{project_world_point, CameraModel, Projection};
use crate::sim::{run_scenario, ScenarioConfig};
use crate::vehicle::VehicleState;

type Check = Result<(), String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Check {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn controller(dt: f64, k_a: f64) -> Controller {
    Controller::new(
        DriverParams {
            dt,
            k_a,
            ..DriverParams::default()
        },
        SteerMapping::default(),
    )
    .expect("default driver parameters are valid")
}

fn dc_gain() -> Check {
    let p = DriverParams::default();
    let (near, far) = (0.07, -0.04);
    let mut c = controller(0.01, p.k_a);
    let settle = 10.0 * p.t_n.max(p.t_i).max(p.t_l);
    let steps = (settle / 0.01).ceil() as usize;
    let mut torque = 0.0;
    for _ in 0..steps {
        torque = c.step(near, far).map_err(|e| e.to_string())?.torque;
    }
    let expected = p.k_c * near + p.k_a * far;
    ensure((torque - expected).abs() <= 1e-6, || {
        format!("steady torque {torque} vs {expected}")
    })
}

fn delay() -> Check {
    let mut c = controller(0.01, 0.0);
    let n = c.delay_len();
    for k in 0..=n {
        let input = if k == 0 { 0.1 } else { 0.0 };
        let torque = c.step(input, 0.0).map_err(|e| e.to_string())?.torque;
        if k < n && torque != 0.0 {
            return Err(format!("non-zero torque {torque} at step {k} < {n}"));
        }
        if k == n && torque == 0.0 {
            return Err(format!("impulse never reached the output at step {n}"));
        }
    }
    Ok(())
}

fn first_order_lag() -> Check {
    // With K_c = 0 the torque is the neuromuscular lag's response to
    // K_a * theta_far.
    let dt = 0.001;
    let mut c = Controller::new(
        DriverParams {
            dt,
            k_a: 1.0,
            k_c: 0.0,
            ..DriverParams::default()
        },
        SteerMapping::default(),
    )
    .map_err(|e| e.to_string())?;
    let t_n = c.params().t_n;
    for k in 0..2000 {
        let y = c.step(0.0, 1.0).map_err(|e| e.to_string())?.torque;
        let t = (k + 1) as f64 * dt;
        let analytic = 1.0 - (-t / t_n).exp();
        if (y - analytic).abs() > 0.01 {
            return Err(format!("t={t}: {y} vs {analytic}"));
        }
    }
    Ok(())
}

fn linearity() -> Check {
    let near = |k: usize| 0.2 * (k as f64 * 0.013).sin();
    let far = |k: usize| 0.1 * (k as f64 * 0.007).cos();
    let (a, b) = (1.7, -0.6);
    let mut c1 = controller(0.01, 30.0);
    let mut c2 = controller(0.01, 30.0);
    let mut c3 = controller(0.01, 30.0);
    for k in 0..1000 {
        let y1 = c1.step(near(k), 0.0).map_err(|e| e.to_string())?.torque;
        let y2 = c2.step(0.0, far(k)).map_err(|e| e.to_string())?.torque;
        let y3 = c3.step(a * near(k), b * far(k)).map_err(|e| e.to_string())?.torque;
        if (y3 - (a * y1 + b * y2)).abs() > 1e-9 {
            return Err(format!("step {k}: {y3} vs {}", a * y1 + b * y2));
        }
    }
    Ok(())
}

fn projection_round_trip() -> Check {
    let cam = CameraModel::default();
    let pose = VehicleState::new(3.0, -1.0, 0.7, 0.0);
    let world_from_cam = (cam.camera_from_world(&pose)).inverse();
    for (u, v, depth) in [(10.0, 20.0, 2.0), (208.0, 208.0, 5.0), (400.5, 3.25, 17.0)] {
        let q = world_from_cam * cam.unproject(&Point2::new(u, v), depth);
        match project_world_point(&cam, &pose, &q) {
            Projection::Pixel(px) => {
                if (px.x - u).abs() > 1e-6 || (px.y - v).abs() > 1e-6 {
                    return Err(format!("({u},{v}) came back as ({},{})", px.x, px.y));
                }
            }
            Projection::BehindCamera => return Err("point flagged behind camera".into()),
        }
    }
    Ok(())
}

fn determinism() -> Check {
    let cfg = ScenarioConfig {
        laps: 1,
        ..ScenarioConfig::default()
    };
    let a = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let b = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    a.log.write_csv(&mut ca).map_err(|e| e.to_string())?;
    b.log.write_csv(&mut cb).map_err(|e| e.to_string())?;
    ensure(ca == cb, || "two runs with the same seed differ".into())
}

pub fn run_all() -> Vec<(&'static str, Check)> {
    vec![
        ("controller_dc_gain", dc_gain()),
        ("controller_delay", delay()),
        ("controller_first_order_lag", first_order_lag()),
        ("controller_linearity", linearity()),
        ("camera_round_trip", projection_round_trip()),
        ("scenario_determinism", determinism()),
    ]
}

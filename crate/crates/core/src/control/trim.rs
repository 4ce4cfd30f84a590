//! Steady wings-level glide in the vertical plane.

use nalgebra::{DVector, Matrix4, Vector4};

use crate::control::{ControlError, Equilibrium, Phase, Plane};
use crate::frames::{quat_from_euler, Vec3};
use crate::model::{
    dynamics_rhs, ActuatorState, ControlTargets, CurrentSample, GliderConfig, GliderState, GRAVITY,
};

pub const TRIM_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100;

/// Vertical-plane state at pitch `theta` with body velocity `(u, 0, w)` and no rotation.
pub fn glide_state(u: f64, w: f64, theta: f64, heading: f64, depth: f64) -> GliderState {
    GliderState {
        v: Vec3::new(u, 0.0, w),
        omega: Vec3::zeros(),
        q: quat_from_euler(0.0, theta, heading),
        p: Vec3::new(0.0, 0.0, depth),
    }
}

fn residual(x: &Vector4<f64>, theta: f64, speed: f64, depth: f64, cfg: &GliderConfig) -> Result<Vector4<f64>, ControlError> {
    let state = glide_state(x[0], x[1], theta, 0.0, depth);
    let act = ActuatorState::holding(0.0, x[2], x[3]);
    let acc = dynamics_rhs(&state, &act, &CurrentSample::default(), cfg)?;
    Ok(Vector4::new(acc.v_dot.x, acc.v_dot.z, acc.omega_dot.y, x[0] - speed))
}

/// Angle-of-attack magnitude at which drag over lift equals `tan(|theta| + a)`.
fn glide_alpha(theta: f64, cfg: &GliderConfig) -> f64 {
    let k = &cfg.hydro;
    let sign = -theta.signum();
    let h = |a: f64| {
        let alpha = sign * a;
        let drag = k.k_d0 + k.k_d * alpha * alpha;
        let lift = (k.k_l0 + k.k_l * alpha).abs();
        drag - lift * (theta.abs() + a).tan()
    };
    let (mut lo, mut hi) = (1e-9, std::f64::consts::FRAC_PI_2 - theta.abs() - 1e-6);
    if !(hi > lo) || h(lo) * h(hi) > 0.0 {
        return sign * 0.05;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(lo) * h(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    sign * 0.5 * (lo + hi)
}

/// Balance of forces and pitching moment ignoring every coupling term.
fn initial_guess(theta: f64, speed: f64, depth: f64, cfg: &GliderConfig) -> Vector4<f64> {
    let k = &cfg.hydro;
    let alpha = glide_alpha(theta, cfg);
    let v2 = speed * speed;
    let drag = (k.k_d0 + k.k_d * alpha * alpha) * v2;
    let lift = (k.k_l0 + k.k_l * alpha) * v2;
    let gamma = theta - alpha;
    // Drag opposes the path, lift is normal to it; weight balances both.
    let dm = (lift * gamma.cos() - drag * gamma.sin()) / GRAVITY;
    let m_b = dm + cfg.neutral_ballast(depth);
    let pitch_moment = (k.k_m0 + k.k_m * alpha) * v2;
    let z_moment = cfg.m_s * cfg.r_s.z + cfg.m_p * cfg.rp_offset;
    let x_moment = (pitch_moment / GRAVITY - z_moment * theta.sin()) / theta.cos();
    let r_p1 = (x_moment - cfg.m_s * cfg.r_s.x - m_b * cfg.r_b1) / cfg.m_p;
    Vector4::new(speed * alpha.cos(), speed * alpha.sin(), r_p1, m_b)
}

/// Finds the steady glide at `desired_pitch` and forward body speed `desired_speed`.
pub fn find_equilibrium(
    cfg: &GliderConfig,
    desired_pitch: f64,
    desired_speed: f64,
    phase: Phase,
    depth: f64,
) -> Result<Equilibrium, ControlError> {
    let lim = &cfg.pitch_limits;
    let in_range = match phase {
        Phase::Descend => desired_pitch < 0.0 && desired_pitch >= lim.descend_min,
        Phase::Ascend => desired_pitch > 0.0 && desired_pitch <= lim.ascend_max,
    };
    if !in_range {
        return Err(ControlError::PitchOutOfRange {
            pitch: desired_pitch,
            min: lim.descend_min,
            max: lim.ascend_max,
        });
    }
    if !(desired_speed > 0.0) {
        return Err(ControlError::InvalidSpeed(desired_speed));
    }
    let theta = desired_pitch;
    let mut x = initial_guess(theta, desired_speed, depth, cfg);
    let mut f = residual(&x, theta, desired_speed, depth, cfg)?;
    let mut iterations = 0;
    while f.norm() > TRIM_TOLERANCE {
        if iterations == MAX_ITERATIONS {
            return Err(ControlError::Infeasible { residual: f.norm(), iterations });
        }
        iterations += 1;
        let mut jac = Matrix4::zeros();
        for i in 0..4 {
            let h = 1e-7_f64.max(1e-7 * x[i].abs());
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let col = (residual(&xp, theta, desired_speed, depth, cfg)? - residual(&xm, theta, desired_speed, depth, cfg)?) / (2.0 * h);
            jac.set_column(i, &col);
        }
        let Some(step) = jac.lu().solve(&f) else {
            return Err(ControlError::Infeasible { residual: f.norm(), iterations });
        };
        let mut lambda = 1.0;
        loop {
            let trial = x - step * lambda;
            let ft = residual(&trial, theta, desired_speed, depth, cfg)?;
            if ft.norm() < f.norm() || lambda < 1e-6 {
                x = trial;
                f = ft;
                break;
            }
            lambda *= 0.5;
        }
    }
    let act = &cfg.actuators;
    if x[2] < act.rp1_min || x[2] > act.rp1_max || x[3] < 0.0 || x[3] > act.mb_max {
        return Err(ControlError::OutsideActuatorRange { r_p1: x[2], m_b: x[3] });
    }
    if x[0] <= 0.0 {
        return Err(ControlError::Infeasible { residual: f.norm(), iterations });
    }
    Ok(Equilibrium {
        x_eq: DVector::from_vec(vec![x[0], x[1], 0.0, theta]),
        u_eq: ControlTargets { zeta: 0.0, r_p1: x[2], m_b: x[3] },
        phase,
        plane: Plane::Vertical,
        pitch: theta,
        speed: desired_speed,
        depth,
        heading: 0.0,
        residual: f.norm(),
    })
}

//! Plane-restricted dynamics and their central-difference Jacobians.

use nalgebra::{DMatrix, DVector};

use crate::control::{ControlError, Equilibrium, PlaneModel};
use crate::frames::{quat_from_euler, Vec3};
use crate::model::{dynamics_rhs, ActuatorState, CurrentSample, GliderConfig, GliderState};

pub const VERTICAL_STATES: [&str; 4] = ["u", "w", "q", "theta"];
pub const VERTICAL_INPUTS: [&str; 2] = ["r_p1", "m_b"];
pub const LATERAL_STATES: [&str; 5] = ["v", "p", "r", "phi", "psi"];
pub const HORIZONTAL_STATES: [&str; 2] = ["r", "psi_err"];
pub const HORIZONTAL_INPUTS: [&str; 1] = ["zeta"];

/// Perturbation used for coordinate `x`.
pub fn fd_step(x: f64) -> f64 {
    1e-6_f64.max(1e-6 * x.abs())
}

/// Time derivative of the vertical states `(u, w, q, theta)` under inputs `(r_p1, m_b)`.
pub fn vertical_dynamics(
    x: &DVector<f64>,
    u: &DVector<f64>,
    eq: &Equilibrium,
    cfg: &GliderConfig,
) -> Result<DVector<f64>, ControlError> {
    let state = GliderState {
        v: Vec3::new(x[0], 0.0, x[1]),
        omega: Vec3::new(0.0, x[2], 0.0),
        q: quat_from_euler(0.0, x[3], 0.0),
        p: Vec3::new(0.0, 0.0, eq.depth),
    };
    let act = ActuatorState::holding(0.0, u[0], u[1]);
    let acc = dynamics_rhs(&state, &act, &CurrentSample::default(), cfg)?;
    Ok(DVector::from_vec(vec![acc.v_dot.x, acc.v_dot.z, acc.omega_dot.y, x[2]]))
}

/// Time derivative of the lateral states `(v, p, r, phi, psi)` about the vertical glide `eq`.
pub fn lateral_dynamics(
    x: &DVector<f64>,
    zeta: f64,
    eq: &Equilibrium,
    cfg: &GliderConfig,
) -> Result<DVector<f64>, ControlError> {
    let theta = eq.pitch;
    let (phi, psi) = (x[3], x[4]);
    let state = GliderState {
        v: Vec3::new(eq.x_eq[0], x[0], eq.x_eq[1]),
        omega: Vec3::new(x[1], 0.0, x[2]),
        q: quat_from_euler(phi, theta, psi),
        p: Vec3::new(0.0, 0.0, eq.depth),
    };
    let act = ActuatorState::holding(zeta, eq.u_eq.r_p1, eq.u_eq.m_b);
    let acc = dynamics_rhs(&state, &act, &CurrentSample::default(), cfg)?;
    let (p, r) = (x[1], x[2]);
    let cphi = phi.cos();
    let phi_dot = p + theta.tan() * r * cphi;
    let psi_dot = r * cphi / theta.cos();
    Ok(DVector::from_vec(vec![acc.v_dot.y, acc.omega_dot.x, acc.omega_dot.z, phi_dot, psi_dot]))
}

/// Central-difference Jacobian of `f` at `x0`; `names` label the coordinates for errors.
pub fn jacobian<F>(f: F, x0: &DVector<f64>, names: &[&'static str]) -> Result<DMatrix<f64>, ControlError>
where
    F: Fn(&DVector<f64>) -> Result<DVector<f64>, ControlError>,
{
    let n = x0.len();
    let mut cols = Vec::with_capacity(n);
    for i in 0..n {
        let h = fd_step(x0[i]);
        let mut xp = x0.clone();
        let mut xm = x0.clone();
        xp[i] += h;
        xm[i] -= h;
        let col = (f(&xp)? - f(&xm)?) / (2.0 * h);
        if !col.iter().all(|v| v.is_finite()) {
            return Err(ControlError::NonFiniteJacobian { coordinate: names[i] });
        }
        cols.push(col);
    }
    Ok(DMatrix::from_columns(&cols))
}

fn vertical_inputs(eq: &Equilibrium) -> DVector<f64> {
    DVector::from_vec(vec![eq.u_eq.r_p1, eq.u_eq.m_b])
}

pub fn linearize_vertical(cfg: &GliderConfig, eq: &Equilibrium) -> Result<PlaneModel, ControlError> {
    let u0 = vertical_inputs(eq);
    let a = jacobian(|x| vertical_dynamics(x, &u0, eq, cfg), &eq.x_eq, &VERTICAL_STATES)?;
    let b = jacobian(|u| vertical_dynamics(&eq.x_eq, u, eq, cfg), &u0, &VERTICAL_INPUTS)?;
    Ok(PlaneModel {
        a,
        b,
        states: VERTICAL_STATES.to_vec(),
        inputs: VERTICAL_INPUTS.to_vec(),
    })
}

/// Full lateral Jacobians `(A, B)` with states `(v, p, r, phi, psi)` and input `zeta`.
pub fn linearize_lateral(cfg: &GliderConfig, eq: &Equilibrium) -> Result<(DMatrix<f64>, DMatrix<f64>), ControlError> {
    let x0 = DVector::zeros(5);
    let a = jacobian(|x| lateral_dynamics(x, 0.0, eq, cfg), &x0, &LATERAL_STATES)?;
    let b = jacobian(
        |z| lateral_dynamics(&x0, z[0], eq, cfg),
        &DVector::zeros(1),
        &HORIZONTAL_INPUTS,
    )?;
    Ok((a, b))
}

/// Heading model `(yaw rate, yaw error)` obtained by holding sideslip, roll rate and
/// roll at their quasi-steady values.
pub fn linearize_horizontal(cfg: &GliderConfig, eq: &Equilibrium) -> Result<PlaneModel, ControlError> {
    let (a, b) = linearize_lateral(cfg, eq)?;
    let fast = [0usize, 1, 3];
    let slow = [2usize, 4];
    let pick = |m: &DMatrix<f64>, rows: &[usize], cols: &[usize]| {
        DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
    };
    let a_ff = pick(&a, &fast, &fast);
    let a_fs = pick(&a, &fast, &slow);
    let a_sf = pick(&a, &slow, &fast);
    let a_ss = pick(&a, &slow, &slow);
    let b_f = pick(&b, &fast, &[0]);
    let b_s = pick(&b, &slow, &[0]);
    let inv = a_ff.try_inverse().ok_or(ControlError::SingularLateralModel)?;
    let a_red = &a_ss - &a_sf * &inv * &a_fs;
    let b_red = &b_s - &a_sf * &inv * &b_f;
    Ok(PlaneModel {
        a: a_red,
        b: b_red,
        states: HORIZONTAL_STATES.to_vec(),
        inputs: HORIZONTAL_INPUTS.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{find_equilibrium, Phase};
    use crate::reference_config;

    fn eq() -> (GliderConfig, Equilibrium) {
        let cfg = reference_config();
        let e = find_equilibrium(&cfg, -0.6, 0.5, Phase::Descend, 15.0).unwrap();
        (cfg, e)
    }

    /// Richardson extrapolation of central differences at steps h and h/2.
    fn richardson(
        f: &dyn Fn(&DVector<f64>) -> DVector<f64>,
        x0: &DVector<f64>,
        h: f64,
    ) -> DMatrix<f64> {
        let cd = |h: f64| {
            let cols: Vec<_> = (0..x0.len())
                .map(|i| {
                    let mut xp = x0.clone();
                    let mut xm = x0.clone();
                    xp[i] += h;
                    xm[i] -= h;
                    (f(&xp) - f(&xm)) / (2.0 * h)
                })
                .collect();
            DMatrix::from_columns(&cols)
        };
        (cd(h / 2.0) * 4.0 - cd(h)) / 3.0
    }

    #[test]
    fn jacobian_matches_richardson_reference() {
        let (cfg, e) = eq();
        let m = linearize_vertical(&cfg, &e).unwrap();
        let u0 = vertical_inputs(&e);
        let fa = |x: &DVector<f64>| vertical_dynamics(x, &u0, &e, &cfg).unwrap();
        let ra = richardson(&fa, &e.x_eq, 1e-3);
        assert!((&m.a - &ra).norm() <= 1e-6 * ra.norm(), "{} vs {}", m.a, ra);
        let fb = |u: &DVector<f64>| vertical_dynamics(&e.x_eq, u, &e, &cfg).unwrap();
        let rb = richardson(&fb, &u0, 1e-4);
        assert!((&m.b - &rb).norm() <= 1e-6 * rb.norm());
    }

    #[test]
    fn prediction_error_is_second_order() {
        let (cfg, e) = eq();
        let m = linearize_vertical(&cfg, &e).unwrap();
        let u0 = vertical_inputs(&e);
        let dir = DVector::from_vec(vec![0.02, -0.01, 0.005, 0.03]);
        let err = |s: f64| {
            let dx = &dir * s;
            let f = vertical_dynamics(&(&e.x_eq + &dx), &u0, &e, &cfg).unwrap();
            (f - &m.a * dx).norm()
        };
        let ratio = err(1.0) / err(0.25);
        assert!((ratio - 16.0).abs() <= 4.0, "ratio {ratio}");
    }

    #[test]
    fn translational_rows_reduce_to_gravity_coupling_without_hydrodynamics() {
        let mut cfg = reference_config();
        let h = &mut cfg.hydro;
        *h = crate::model::HydroCoefficients {
            k_d0: 0.0, k_d: 0.0, k_beta: 0.0, k_l0: 0.0, k_l: 0.0, k_mr: 0.0,
            k_p: 0.0, k_m0: 0.0, k_m: 0.0, k_q: 0.0, k_my: 0.0, k_r: 0.0,
        };
        cfg.r_s = Vec3::zeros();
        cfg.rp_offset = 0.0;
        let e = Equilibrium {
            x_eq: DVector::from_vec(vec![0.0, 0.0, 0.0, -0.4]),
            u_eq: crate::model::ControlTargets { zeta: 0.0, r_p1: 0.0, m_b: cfg.neutral_ballast(10.0) + 0.2 },
            phase: Phase::Descend,
            plane: crate::control::Plane::Vertical,
            pitch: -0.4,
            speed: 0.0,
            depth: 10.0,
            heading: 0.0,
            residual: 0.0,
        };
        let m = linearize_vertical(&cfg, &e).unwrap();
        for row in 0..2 {
            for col in 0..3 {
                assert!(m.a[(row, col)].abs() < 1e-9, "A[{row},{col}] = {}", m.a[(row, col)]);
            }
        }
        assert!(m.a[(0, 3)].abs() > 1e-3 && m.a[(1, 3)].abs() > 1e-3);
    }

    #[test]
    fn heading_model_structure() {
        let (cfg, e) = eq();
        let m = linearize_horizontal(&cfg, &e).unwrap();
        assert!((m.a[(1, 0)] - 1.0 / e.pitch.cos()).abs() < 1e-6);
        assert!(m.a[(0, 1)].abs() < 1e-9 && m.a[(1, 1)].abs() < 1e-9);
        assert!(m.b[(0, 0)].abs() > 0.0);
    }
}

//! Trim, linearization, Riccati gains and the saturated state-feedback law.
//!
//! The vertical plane regulates `(u, w, q, theta)` with the movable mass and the
//! ballast; the horizontal plane regulates `(r, psi_err)` with the mass roll angle.

mod care;
mod linearize;
mod trim;

pub use care::{care_residual, is_stabilizable, solve_care, spectral_abscissa, CareSolution, CARE_TOLERANCE};
pub use linearize::{
    fd_step, jacobian, lateral_dynamics, linearize_horizontal, linearize_lateral, linearize_vertical,
    vertical_dynamics, HORIZONTAL_INPUTS, HORIZONTAL_STATES, LATERAL_STATES, VERTICAL_INPUTS, VERTICAL_STATES,
};
pub use trim::{find_equilibrium, glide_state, TRIM_TOLERANCE};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use thiserror::Error;

use crate::frames::{euler_angles, wrap_angle};
use crate::model::{ControlTargets, GliderConfig, GliderState, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("desired pitch {pitch} rad is outside the achievable range [{min}, {max}] for this phase")]
    PitchOutOfRange { pitch: f64, min: f64, max: f64 },
    #[error("desired speed must be > 0, got {0}")]
    InvalidSpeed(f64),
    #[error("trim did not converge after {iterations} iterations (residual {residual:e})")]
    Infeasible { residual: f64, iterations: usize },
    #[error("trim needs actuators outside their travel (r_p1 = {r_p1}, m_b = {m_b})")]
    OutsideActuatorRange { r_p1: f64, m_b: f64 },
    #[error("non-finite Jacobian entry when perturbing {coordinate}")]
    NonFiniteJacobian { coordinate: &'static str },
    #[error("lateral fast subsystem is singular")]
    SingularLateralModel,
    #[error("(A, B) is not stabilizable")]
    Unstabilizable,
    #[error("input penalty is singular")]
    SingularInputWeight,
    #[error("Riccati iteration failed to reach tolerance (residual history {residuals:?})")]
    CareDiverged { residuals: Vec<f64> },
    #[error("closed loop is not Hurwitz (spectral abscissa {abscissa})")]
    NotHurwitz { abscissa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Descend,
    Ascend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Vertical,
    Horizontal,
}

/// Operating point of one plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Equilibrium {
    pub x_eq: DVector<f64>,
    pub u_eq: ControlTargets,
    pub phase: Phase,
    pub plane: Plane,
    pub pitch: f64,
    pub speed: f64,
    pub depth: f64,
    pub heading: f64,
    /// Norm of the trim residual at this point.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlaneModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub states: Vec<&'static str>,
    pub inputs: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainEntry {
    pub phase: Phase,
    pub plane: Plane,
    pub equilibrium: Equilibrium,
    pub model: PlaneModel,
    pub k: DMatrix<f64>,
    pub p: DMatrix<f64>,
    pub care_residual: f64,
    pub closed_loop_abscissa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainSet {
    pub entries: Vec<GainEntry>,
}

impl GainSet {
    pub fn get(&self, phase: Phase, plane: Plane) -> &GainEntry {
        self.entries
            .iter()
            .find(|e| e.phase == phase && e.plane == plane)
            .expect("gain set holds every (phase, plane) pair")
    }
}

/// Guidance quantities a gain set is computed for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GainRequest {
    pub pitch_descend: f64,
    pub pitch_ascend: f64,
    pub heading: f64,
    pub speed: f64,
    /// Depth at which the glides are trimmed.
    pub depth: f64,
}

fn diag(values: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(values))
}

/// The four gains `{Descend, Ascend} x {Vertical, Horizontal}` for one work cycle.
pub fn compute_gain_set(cfg: &GliderConfig, req: &GainRequest) -> Result<GainSet, ControlError> {
    let w = &cfg.weights;
    let mut entries = Vec::with_capacity(4);
    for (phase, pitch) in [(Phase::Descend, req.pitch_descend), (Phase::Ascend, req.pitch_ascend)] {
        let vertical = find_equilibrium(cfg, pitch, req.speed, phase, req.depth)?;
        let vm = linearize_vertical(cfg, &vertical)?;
        let vs = solve_care(&vm.a, &vm.b, &diag(&w.q_vertical), &diag(&w.r_vertical))?;

        let hm = linearize_horizontal(cfg, &vertical)?;
        let hs = solve_care(&hm.a, &hm.b, &diag(&w.q_horizontal), &diag(&w.r_horizontal))?;
        let horizontal = Equilibrium {
            x_eq: DVector::from_vec(vec![0.0, req.heading]),
            plane: Plane::Horizontal,
            heading: req.heading,
            ..vertical.clone()
        };
        let vertical = Equilibrium { heading: req.heading, ..vertical };

        for (plane, eq, model, sol) in
            [(Plane::Vertical, vertical, vm, vs), (Plane::Horizontal, horizontal, hm, hs)]
        {
            assert!(sol.closed_loop_abscissa < 0.0 && sol.residual <= CARE_TOLERANCE);
            entries.push(GainEntry {
                phase,
                plane,
                equilibrium: eq,
                model,
                k: sol.k,
                p: sol.p,
                care_residual: sol.residual,
                closed_loop_abscissa: sol.closed_loop_abscissa,
            });
        }
    }
    Ok(GainSet { entries })
}

/// Actuator targets produced by the feedback law, plus what saturated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlCommand {
    pub targets: ControlTargets,
    pub clamped_r_p1: bool,
    pub clamped_m_b: bool,
    pub clamped_zeta: bool,
}

/// Vertical state error `(u, w, q, theta)` relative to `eq`.
pub fn vertical_error(state: &GliderState, eq: &Equilibrium, detach_speed: bool) -> DVector<f64> {
    let (_, pitch, _) = euler_angles(&state.q);
    let du = if detach_speed { 0.0 } else { state.v.x - eq.x_eq[0] };
    DVector::from_vec(vec![du, state.v.z - eq.x_eq[1], state.omega.y - eq.x_eq[2], pitch - eq.x_eq[3]])
}

/// Horizontal state error `(r, psi_err)` with the heading error wrapped.
pub fn horizontal_error(state: &GliderState, eq: &Equilibrium) -> DVector<f64> {
    let (_, _, yaw) = euler_angles(&state.q);
    DVector::from_vec(vec![state.omega.z - eq.x_eq[0], wrap_angle(yaw - eq.heading)])
}

/// Unsaturated targets `u_eq - K dx` for both planes.
pub fn raw_command(state: &GliderState, gains: &GainSet, phase: Phase, detach_speed: bool) -> ControlTargets {
    let v = gains.get(phase, Plane::Vertical);
    let h = gains.get(phase, Plane::Horizontal);
    let dv = &v.k * vertical_error(state, &v.equilibrium, detach_speed);
    let dh = &h.k * horizontal_error(state, &h.equilibrium);
    ControlTargets {
        r_p1: v.equilibrium.u_eq.r_p1 - dv[0],
        m_b: v.equilibrium.u_eq.m_b - dv[1],
        zeta: h.equilibrium.u_eq.zeta - dh[0],
    }
}

pub fn feedback_command(
    state: &GliderState,
    gains: &GainSet,
    phase: Phase,
    detach_speed: bool,
    cfg: &GliderConfig,
) -> ControlCommand {
    let raw = raw_command(state, gains, phase, detach_speed);
    let lim = &cfg.actuators;
    let targets = ControlTargets {
        r_p1: raw.r_p1.clamp(lim.rp1_min, lim.rp1_max),
        m_b: raw.m_b.clamp(0.0, lim.mb_max),
        zeta: raw.zeta.clamp(lim.zeta_min, lim.zeta_max),
    };
    let cmd = ControlCommand {
        targets,
        clamped_r_p1: targets.r_p1 != raw.r_p1,
        clamped_m_b: targets.m_b != raw.m_b,
        clamped_zeta: targets.zeta != raw.zeta,
    };
    if cmd.clamped_r_p1 || cmd.clamped_m_b || cmd.clamped_zeta {
        log::trace!("feedback command saturated: raw {raw:?}, applied {targets:?}");
    }
    cmd
}

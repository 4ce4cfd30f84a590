use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::frames::{rot_x, RotMat3, Vec3};
use crate::model::GliderConfig;

/// Commanded actuator positions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlTargets {
    pub zeta: f64,
    pub r_p1: f64,
    pub m_b: f64,
}

/// Current actuator positions, their targets and the rates realised over the last step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ActuatorState {
    pub zeta: f64,
    pub r_p1: f64,
    pub m_b: f64,
    pub targets: ControlTargets,
    pub zeta_dot: f64,
    pub r_p1_dot: f64,
    pub m_b_dot: f64,
}

impl ActuatorState {
    /// Actuators at rest at the given positions, with targets equal to them.
    pub fn holding(zeta: f64, r_p1: f64, m_b: f64) -> Self {
        Self {
            zeta,
            r_p1,
            m_b,
            targets: ControlTargets { zeta, r_p1, m_b },
            ..Default::default()
        }
    }

    /// Same positions with all realised rates set to zero.
    pub fn frozen(&self) -> Self {
        Self { zeta_dot: 0.0, r_p1_dot: 0.0, m_b_dot: 0.0, ..*self }
    }

    /// Positions advanced along the realised rates by `dt` (no limiting).
    pub(crate) fn extrapolated(&self, dt: f64) -> Self {
        Self {
            zeta: self.zeta + self.zeta_dot * dt,
            r_p1: self.r_p1 + self.r_p1_dot * dt,
            m_b: self.m_b + self.m_b_dot * dt,
            ..*self
        }
    }
}

/// One rate-limited move of `u` toward `target`, landing on the target once within reach.
pub fn rate_limited_step(u: f64, target: f64, rate: f64, dt: f64) -> f64 {
    let max_move = rate * dt;
    let gap = target - u;
    if gap.abs() <= max_move {
        target
    } else {
        u + max_move.copysign(gap)
    }
}

/// Advances the actuators by one simulation step of length `dt`.
pub fn actuator_step(a: &ActuatorState, dt: f64, cfg: &GliderConfig) -> ActuatorState {
    let lim = &cfg.actuators;
    let clamp = |name: &str, value: f64, lo: f64, hi: f64| {
        let c = value.clamp(lo, hi);
        if c != value {
            log::debug!("actuator target {name} clamped from {value} to {c}");
        }
        c
    };
    let targets = ControlTargets {
        zeta: clamp("zeta", a.targets.zeta, lim.zeta_min, lim.zeta_max),
        r_p1: clamp("r_p1", a.targets.r_p1, lim.rp1_min, lim.rp1_max),
        m_b: clamp("m_b", a.targets.m_b, 0.0, lim.mb_max),
    };
    let zeta = rate_limited_step(a.zeta, targets.zeta, lim.rate_zeta, dt).clamp(lim.zeta_min, lim.zeta_max);
    let r_p1 = rate_limited_step(a.r_p1, targets.r_p1, lim.rate_rp1, dt).clamp(lim.rp1_min, lim.rp1_max);
    let m_b = rate_limited_step(a.m_b, targets.m_b, lim.rate_mb, dt).clamp(0.0, lim.mb_max);
    ActuatorState {
        zeta,
        r_p1,
        m_b,
        targets,
        zeta_dot: (zeta - a.zeta) / dt,
        r_p1_dot: (r_p1 - a.r_p1) / dt,
        m_b_dot: (m_b - a.m_b) / dt,
    }
}

/// Position, velocity and inertia of the movable mass in the body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovableMass {
    pub r_p: Vec3,
    pub r_p_dot: Vec3,
    pub j_p: Matrix3<f64>,
    pub b_r_p: RotMat3,
}

pub fn movable_mass_state(a: &ActuatorState, cfg: &GliderConfig) -> MovableMass {
    let (s, c) = a.zeta.sin_cos();
    let rp = cfg.rp_offset;
    let b_r_p = rot_x(a.zeta);
    MovableMass {
        r_p: Vec3::new(a.r_p1, -rp * s, rp * c),
        r_p_dot: Vec3::new(a.r_p1_dot, -rp * c * a.zeta_dot, -rp * s * a.zeta_dot),
        // Inertia tensor carried along with the rotated mass.
        j_p: b_r_p * cfg.j_p0 * b_r_p.transpose(),
        b_r_p,
    }
}

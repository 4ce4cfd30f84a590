//! Buoyancy-driven underwater glider: six-degree-of-freedom dynamics with a movable
//! internal mass and variable ballast, an LQR autopilot about trimmed glides,
//! surface-fix waypoint guidance with an adaptive circle of acceptance, and a
//! turning-circle reachability check.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod frames;
pub mod guidance;
pub mod io;
pub mod maneuver;
pub mod model;
pub mod sim;

use thiserror::Error;

use crate::model::GliderConfig;

/// Shipped reference vehicle document.
pub const REFERENCE_CONFIG_TOML: &str = include_str!("../data/reference_glider.toml");
/// Shipped five-waypoint task document.
pub const REFERENCE_TASK_TOML: &str = include_str!("../data/five_waypoints.toml");

/// Reference vehicle parsed from [`REFERENCE_CONFIG_TOML`].
pub fn reference_config() -> GliderConfig {
    io::parse_config(REFERENCE_CONFIG_TOML).expect("shipped reference config is valid").glider
}

/// Reference vehicle made exactly symmetric under reflection through the horizontal
/// body plane: no vertical offsets and no static lift or moment.
pub fn mirror_config() -> GliderConfig {
    let mut cfg = reference_config();
    cfg.r_s = frames::Vec3::zeros();
    cfg.rp_offset = 0.0;
    cfg.r_b1 = 0.0;
    cfg.hydro.k_l0 = 0.0;
    cfg.hydro.k_m0 = 0.0;
    cfg
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Input(#[from] io::InputError),
    #[error(transparent)]
    Export(#[from] io::ExportError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Control(#[from] control::ControlError),
    #[error(transparent)]
    Maneuver(#[from] maneuver::ManeuverError),
    #[error(transparent)]
    Sim(#[from] sim::SimError),
}

impl Error {
    /// Process exit status: 1 for bad input, 2 for numerical failure, 3 for mission failure.
    pub fn exit_code(&self) -> i32 {
        use sim::SimError;
        match self {
            Error::Input(_) | Error::Export(_) | Error::Maneuver(_) => 1,
            Error::Model(_) | Error::Control(_) => 2,
            Error::Sim(SimError::Timeout { .. } | SimError::GuidanceFailure { .. }) => 3,
            Error::Sim(SimError::Control(_) | SimError::Dynamics { .. } | SimError::NonFinite { .. }) => 2,
        }
    }
}

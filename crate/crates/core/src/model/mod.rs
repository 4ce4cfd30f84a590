//! Kinetic core of the glider: rigid body with a movable internal mass,
//! variable ballast, buoyancy, viscous hydrodynamics and added mass.

mod actuator;
mod config;
mod dynamics;

pub use actuator::{actuator_step, movable_mass_state, rate_limited_step, ActuatorState, ControlTargets, MovableMass};
pub use config::{
    ActuatorLimits, AddedMass, GliderConfig, HydroCoefficients, LqrWeights, PitchLimits, GRAVITY,
};
pub use dynamics::{
    added_mass_matrix, buoyancy_wrench, dynamics_rhs, generalized_mass_matrix, kinematics,
    dynamics_terms, mechanical_energy, net_buoyancy_mass, relative_velocity, rigid_mass_matrix, viscous_wrench,
    Accelerations, DynamicsTerms, MassMatrix6,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::{Quat, RotMat3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid configuration field {field}: {reason}")]
    InvalidField { field: &'static str, reason: String },
    #[error("added-mass pair {pair} is asymmetric ({a} != {b})")]
    AsymmetricAddedMass { pair: &'static str, a: f64, b: f64 },
    #[error("{what} is not positive definite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite { what: &'static str, min_eigenvalue: f64 },
    #[error("generalized mass matrix is singular")]
    SingularMassMatrix,
    #[error("non-finite value in dynamics term `{term}`")]
    NonFinite { term: &'static str },
}

impl ModelError {
    pub(crate) fn invalid(field: &'static str, reason: String) -> Self {
        Self::InvalidField { field, reason }
    }
}

/// Vehicle state: body-frame velocities, attitude in NED and NED position (z down).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GliderState {
    pub v: Vec3,
    pub omega: Vec3,
    pub q: Quat,
    pub p: Vec3,
}

impl GliderState {
    pub fn at_rest(p: Vec3, q: Quat) -> Self {
        Self { v: Vec3::zeros(), omega: Vec3::zeros(), q, p }
    }

    /// Rotation taking body vectors into NED.
    pub fn ned_from_body(&self) -> RotMat3 {
        *self.q.to_rotation_matrix().matrix()
    }

    pub fn depth(&self) -> f64 {
        self.p.z
    }

    /// NED velocity of the body origin.
    pub fn ned_velocity(&self) -> Vec3 {
        self.q * self.v
    }

    pub fn is_finite(&self) -> bool {
        self.v.iter().chain(self.omega.iter()).chain(self.p.iter()).all(|x| x.is_finite())
            && self.q.coords.iter().all(|x| x.is_finite())
    }
}

/// Water velocity at the vehicle, expressed in the world (NED) frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CurrentSample {
    pub v_f: Vec3,
    pub omega_f: Vec3,
}

/// Drag, side force and lift (velocity frame) plus the hydrodynamic moment components.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct HydroForces {
    pub drag: f64,
    pub side_force: f64,
    pub lift: f64,
    pub moment: Vec3,
}

/// Body-frame force and moment.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct GeneralizedForce {
    pub force: Vec3,
    pub moment: Vec3,
}

impl std::ops::Add for GeneralizedForce {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { force: self.force + rhs.force, moment: self.moment + rhs.moment }
    }
}

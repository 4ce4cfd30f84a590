use nalgebra::{Matrix3, Matrix6, SymmetricEigen};
use serde::Serialize;

use crate::frames::Vec3;
use crate::model::ModelError;

pub const GRAVITY: f64 = 9.81;

/// Static viscous coefficients. Forces scale as `K * V^2` in SI units.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HydroCoefficients {
    pub k_d0: f64,
    pub k_d: f64,
    pub k_beta: f64,
    pub k_l0: f64,
    pub k_l: f64,
    pub k_mr: f64,
    pub k_p: f64,
    pub k_m0: f64,
    pub k_m: f64,
    pub k_q: f64,
    pub k_my: f64,
    pub k_r: f64,
}

/// Entries of the 6x6 added-mass matrix. Only the listed entries may be non-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct AddedMass {
    pub l11: f64,
    pub l22: f64,
    pub l33: f64,
    pub l44: f64,
    pub l55: f64,
    pub l66: f64,
    pub l26: f64,
    pub l62: f64,
    pub l35: f64,
    pub l53: f64,
}

impl AddedMass {
    pub fn matrix(&self) -> Matrix6<f64> {
        let mut m = Matrix6::zeros();
        m[(0, 0)] = self.l11;
        m[(1, 1)] = self.l22;
        m[(2, 2)] = self.l33;
        m[(3, 3)] = self.l44;
        m[(4, 4)] = self.l55;
        m[(5, 5)] = self.l66;
        m[(1, 5)] = self.l26;
        m[(5, 1)] = self.l62;
        m[(2, 4)] = self.l35;
        m[(4, 2)] = self.l53;
        m
    }
}

/// Rate limits (per second) and travel limits of the three internal actuators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActuatorLimits {
    pub rate_zeta: f64,
    pub rate_rp1: f64,
    pub rate_mb: f64,
    pub rp1_min: f64,
    pub rp1_max: f64,
    pub mb_max: f64,
    pub zeta_min: f64,
    pub zeta_max: f64,
}

/// Achievable glide pitch range. `descend_min` is negative, `ascend_max` positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PitchLimits {
    pub descend_min: f64,
    pub ascend_max: f64,
    /// Smallest pitch magnitude the guidance will command.
    pub min_glide: f64,
}

/// Diagonal LQR penalties per control plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LqrWeights {
    /// (u, w, pitch rate, pitch)
    pub q_vertical: [f64; 4],
    /// (r_p1, m_b)
    pub r_vertical: [f64; 2],
    /// (yaw rate, yaw error)
    pub q_horizontal: [f64; 2],
    /// (zeta)
    pub r_horizontal: [f64; 1],
}

impl Default for LqrWeights {
    fn default() -> Self {
        Self {
            q_vertical: [1.0; 4],
            r_vertical: [100.0, 100.0],
            q_horizontal: [1.0; 2],
            r_horizontal: [10.0],
        }
    }
}

/// Every preset quantity of the vehicle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GliderConfig {
    pub m_s: f64,
    pub r_s: Vec3,
    pub m_p: f64,
    /// Axial position of the ballast centre; `r_b = [r_b1, 0, 0]`.
    pub r_b1: f64,
    pub j_s: Matrix3<f64>,
    pub j_p0: Matrix3<f64>,
    /// Distance of the movable mass centre from the body x-axis.
    pub rp_offset: f64,
    pub rho_deep: f64,
    pub rho_surface: f64,
    pub k_vh: f64,
    /// Optional linear density gradient (kg/m^3 per metre of depth); zero keeps rho constant.
    pub rho_gradient: f64,
    /// Waterplane area used only above the free surface (z < 0).
    pub waterplane_area: f64,
    pub hydro: HydroCoefficients,
    pub added_mass: AddedMass,
    pub actuators: ActuatorLimits,
    pub pitch_limits: PitchLimits,
    pub weights: LqrWeights,
    /// Use the printed pitch-moment form `(K_M0 + K_M*beta*K_q*q_r) V^2`.
    pub tdl2_literal: bool,
    /// Use the printed drag/lift forms driven by sideslip instead of angle of attack.
    pub lift_drag_literal: bool,
}

impl GliderConfig {
    /// Density at depth `z` (positive down).
    pub fn rho(&self, z: f64) -> f64 {
        self.rho_deep + self.rho_gradient * z
    }

    /// Ballast mass for zero net buoyancy at depth `z`.
    pub fn neutral_ballast(&self, z: f64) -> f64 {
        let hull = self.m_s + self.m_p;
        self.rho(z) * (hull / self.rho_surface - self.k_vh * z) - hull
    }

    pub fn r_b(&self) -> Vec3 {
        Vec3::new(self.r_b1, 0.0, 0.0)
    }

    /// Checks every structural invariant of the configuration.
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("m_s", self.m_s),
            ("m_p", self.m_p),
            ("rho_deep", self.rho_deep),
            ("rho_surface", self.rho_surface),
            ("actuators.rate_zeta", self.actuators.rate_zeta),
            ("actuators.rate_rp1", self.actuators.rate_rp1),
            ("actuators.rate_mb", self.actuators.rate_mb),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::invalid(name, format!("must be > 0, got {value}")));
            }
        }
        let non_negative = [
            ("rp_offset", self.rp_offset),
            ("waterplane_area", self.waterplane_area),
            ("actuators.mb_max", self.actuators.mb_max),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ModelError::invalid(name, format!("must be >= 0, got {value}")));
            }
        }
        let a = &self.actuators;
        if !(a.rp1_min < a.rp1_max) {
            return Err(ModelError::invalid(
                "actuators.rp1_min",
                format!("must be below rp1_max ({} >= {})", a.rp1_min, a.rp1_max),
            ));
        }
        if !(a.zeta_min < a.zeta_max) {
            return Err(ModelError::invalid(
                "actuators.zeta_min",
                format!("must be below zeta_max ({} >= {})", a.zeta_min, a.zeta_max),
            ));
        }
        let p = &self.pitch_limits;
        if !(p.descend_min < 0.0 && p.ascend_max > 0.0 && p.min_glide >= 0.0) {
            return Err(ModelError::invalid(
                "pitch_limits",
                "need descend_min < 0 < ascend_max and min_glide >= 0".to_string(),
            ));
        }
        if p.min_glide > p.ascend_max.min(-p.descend_min) {
            return Err(ModelError::invalid(
                "pitch_limits.min_glide",
                format!("{} exceeds the pitch range", p.min_glide),
            ));
        }
        check_spd("j_s", &self.j_s)?;
        check_spd("j_p0", &self.j_p0)?;
        self.added_mass_checked()?;
        for w in self.weights.q_vertical.iter().chain(&self.weights.q_horizontal) {
            if !(*w >= 0.0) {
                return Err(ModelError::invalid("weights", "state penalties must be >= 0".into()));
            }
        }
        for w in self.weights.r_vertical.iter().chain(&self.weights.r_horizontal) {
            if !(*w > 0.0) {
                return Err(ModelError::invalid("weights", "input penalties must be > 0".into()));
            }
        }
        Ok(())
    }

    /// Added-mass matrix after checking the symmetric pairs and positive semidefiniteness.
    pub fn added_mass_checked(&self) -> Result<Matrix6<f64>, ModelError> {
        let am = &self.added_mass;
        if am.l26 != am.l62 {
            return Err(ModelError::AsymmetricAddedMass { pair: "l26/l62", a: am.l26, b: am.l62 });
        }
        if am.l35 != am.l53 {
            return Err(ModelError::AsymmetricAddedMass { pair: "l35/l53", a: am.l35, b: am.l53 });
        }
        let m = am.matrix();
        let min = SymmetricEigen::new(m).eigenvalues.min();
        if min < -1e-12 {
            return Err(ModelError::NotPositiveDefinite { what: "added mass", min_eigenvalue: min });
        }
        Ok(m)
    }
}

fn check_spd(name: &'static str, m: &Matrix3<f64>) -> Result<(), ModelError> {
    if (m - m.transpose()).abs().max() > 1e-12 {
        return Err(ModelError::invalid(name, "must be symmetric".into()));
    }
    let min = SymmetricEigen::new(*m).eigenvalues.min();
    if !(min > 0.0) {
        return Err(ModelError::NotPositiveDefinite { what: name, min_eigenvalue: min });
    }
    Ok(())
}

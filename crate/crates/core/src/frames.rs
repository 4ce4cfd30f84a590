//! Vector and rotation primitives plus the conversions between the NED world
//! frame, the ENU world frame, the kinetic body frame (x forward, z down), the
//! visual body frame (x forward, z up) and the flow-aligned velocity frame.

use nalgebra::{Matrix3, Quaternion, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub type Vec3 = Vector3<f64>;
pub type RotMat3 = Matrix3<f64>;
pub type Quat = UnitQuaternion<f64>;

/// Below this relative speed the flow angles are undefined and reported as zero.
pub const SPEED_EPSILON: f64 = 1e-6;

/// Tolerance on `|q| - 1` accepted by [`quat_to_rotmat`].
pub const QUAT_NORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrameError {
    #[error("quaternion norm {norm} deviates from 1 by more than {QUAT_NORM_TOLERANCE}")]
    NonUnitQuaternion { norm: f64 },
}

/// Skew-symmetric matrix such that `hat(v) * w == v.cross(&w)`.
pub fn hat(v: &Vec3) -> RotMat3 {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub fn rot_x(angle: f64) -> RotMat3 {
    let (s, c) = angle.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

pub fn rot_y(angle: f64) -> RotMat3 {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

pub fn rot_z(angle: f64) -> RotMat3 {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Constant map from NED coordinates to ENU coordinates.
///
/// Yaw by pi/2 after a roll by pi: the N<->E swap with the vertical flipped.
pub fn enu_from_ned() -> RotMat3 {
    rot_z(PI / 2.0) * rot_x(PI)
}

/// Constant map from the visual (z-up) body frame to the kinetic (z-down) body frame.
pub fn kinetic_from_visual() -> RotMat3 {
    rot_z(0.0) * rot_y(0.0) * rot_x(PI)
}

/// Converts a kinetic-model pose in NED into the visual-model pose in ENU.
pub fn ned_enu_pose(r_nk: &RotMat3, p_nk: &Vec3) -> (RotMat3, Vec3) {
    let e_n = enu_from_ned();
    (e_n * r_nk * kinetic_from_visual(), e_n * p_nk)
}

/// Inverse of [`ned_enu_pose`].
pub fn enu_ned_pose(r_ev: &RotMat3, p_e: &Vec3) -> (RotMat3, Vec3) {
    let e_n = enu_from_ned();
    (
        e_n.transpose() * r_ev * kinetic_from_visual().transpose(),
        e_n.transpose() * p_e,
    )
}

/// What a twist vector represents. All kinds transform identically because
/// the world frames are static and share an origin; the tag documents intent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwistKind {
    Linear,
    Angular,
    Acceleration,
}

/// Maps a body-frame (kinetic) velocity, rate or acceleration into ENU world
/// coordinates for the visual model.
pub fn ned_enu_twist(r_nk: &RotMat3, v_k: &Vec3, _kind: TwistKind) -> Vec3 {
    enu_from_ned() * r_nk * v_k
}

/// Inverse of [`ned_enu_twist`].
pub fn enu_ned_twist(r_nk: &RotMat3, v_e: &Vec3, _kind: TwistKind) -> Vec3 {
    r_nk.transpose() * enu_from_ned().transpose() * v_e
}

/// Rotation matrix of a quaternion that is expected to be unit length.
pub fn quat_to_rotmat(q: &Quaternion<f64>) -> Result<RotMat3, FrameError> {
    let norm = q.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > QUAT_NORM_TOLERANCE {
        return Err(FrameError::NonUnitQuaternion { norm });
    }
    Ok(*UnitQuaternion::from_quaternion(*q).to_rotation_matrix().matrix())
}

pub fn rotmat_to_quat(r: &RotMat3) -> Quat {
    UnitQuaternion::from_matrix(r)
}

/// Roll, pitch, yaw (ZYX convention) of a body attitude in NED.
pub fn euler_angles(q: &Quat) -> (f64, f64, f64) {
    q.euler_angles()
}

pub fn quat_from_euler(roll: f64, pitch: f64, yaw: f64) -> Quat {
    UnitQuaternion::from_euler_angles(roll, pitch, yaw)
}

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Relative-flow speed and angles. `alpha` is the angle of attack, `beta` the sideslip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowAngles {
    pub speed: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Set when the speed is below [`SPEED_EPSILON`]; callers skip viscous terms.
    pub degenerate: bool,
}

pub fn flow_angles(v_r: &Vec3) -> FlowAngles {
    let speed = v_r.norm();
    if speed < SPEED_EPSILON {
        return FlowAngles {
            speed,
            alpha: 0.0,
            beta: 0.0,
            degenerate: true,
        };
    }
    FlowAngles {
        speed,
        alpha: v_r.z.atan2(v_r.x),
        beta: (v_r.y / speed).clamp(-1.0, 1.0).asin(),
        degenerate: false,
    }
}

/// Rotation taking velocity-frame vectors into the body frame.
pub fn body_from_velocity_frame(a: &FlowAngles) -> RotMat3 {
    let (sa, ca) = a.alpha.sin_cos();
    let (sb, cb) = a.beta.sin_cos();
    Matrix3::new(
        ca * cb, -ca * sb, -sa, //
        sb, cb, 0.0, //
        sa * cb, -sa * sb, ca,
    )
}

//! Recursive surface-fix guidance: every surfacing yields a new position fix,
//! which updates the active waypoint, the desired heading and the pitch pair.

mod geodetic;

pub use geodetic::{geodetic_to_ecef, geodetic_to_ned, ned_to_geodetic, GeoOrigin, WGS84_A, WGS84_F};

use serde::{Deserialize, Serialize};

use crate::frames::{wrap_angle, Vec3};
use crate::model::PitchLimits;

/// Positions closer than this give no usable line of sight.
pub const POSITION_EPSILON: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub lat: f64,
    pub lon: f64,
    pub target_depth: f64,
    pub desired_speed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PitchMode {
    Recursive,
    /// Pitch pair taken from the task file, independent of distance.
    Fixed { descend: f64, ascend: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionTask {
    pub origin: GeoOrigin,
    pub waypoints: Vec<Waypoint>,
    pub acceptance_radius: f64,
    pub min_loops: u32,
    pub pitch_mode: PitchMode,
}

impl MissionTask {
    pub fn waypoint_ned(&self, idx: usize) -> Vec3 {
        let w = &self.waypoints[idx];
        geodetic_to_ned(w.lat, w.lon, &self.origin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GuidanceOutput {
    pub desired_heading: f64,
    pub desired_pitch_descend: f64,
    pub desired_pitch_ascend: f64,
    pub desired_speed: f64,
    pub target_depth: f64,
    pub active_waypoint: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Heading {
    pub value: f64,
    /// Set when the two points coincide and the previous heading was kept.
    pub degenerate: bool,
}

/// Line-of-sight heading from `p_t` toward `p_k` (NED, horizontal components only).
pub fn desired_heading(p_t: &Vec3, p_k: &Vec3, previous: f64) -> Heading {
    let dn = p_k.x - p_t.x;
    let de = p_k.y - p_t.y;
    if dn.hypot(de) <= POSITION_EPSILON {
        return Heading { value: previous, degenerate: true };
    }
    Heading { value: wrap_angle(de.atan2(dn)), degenerate: false }
}

/// Descend/ascend pitch pair for a remaining horizontal distance `l_t` and target depth `d`.
pub fn desired_pitch(l_t: f64, d: f64, min_loops: u32, limits: &PitchLimits) -> (f64, f64) {
    let l_d = l_t / f64::from(min_loops.max(1));
    let phi = (l_d / (2.0 * d)).atan().abs();
    let descend = phi.clamp(limits.min_glide, -limits.descend_min);
    let ascend = phi.clamp(limits.min_glide, limits.ascend_max);
    (-descend, ascend)
}

/// Depth and desired pitch magnitude of the work cycle that just finished.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrevCycle {
    pub depth: f64,
    pub phi_d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoaResult {
    pub r_a: f64,
    pub applicable: bool,
    pub cos_theta: f64,
    pub simplified: bool,
}

/// Adaptive circle of acceptance for a possible pass-by of `p_k` between the fixes `p_prev` and `p_t`.
pub fn adaptive_coa(p_t: &Vec3, p_prev: &Vec3, p_k: &Vec3, prev: &PrevCycle) -> CoaResult {
    let horizontal = |v: Vec3| Vec3::new(v.x, v.y, 0.0);
    let p_d = horizontal(p_t - p_k);
    let step = horizontal(p_t - p_prev);
    let not_applicable = CoaResult { r_a: 0.0, applicable: false, cos_theta: f64::NAN, simplified: false };
    if step.norm() == 0.0 {
        return not_applicable;
    }
    let pd = p_d.norm();
    if pd == 0.0 {
        return CoaResult { r_a: 0.0, applicable: true, cos_theta: 1.0, simplified: false };
    }
    let cos_theta = (p_d.dot(&step) / (pd * step.norm())).clamp(-1.0, 1.0);
    if cos_theta < 0.0 {
        return CoaResult { cos_theta, ..not_applicable };
    }
    if (cos_theta - 1.0).abs() < 1e-3 {
        let l = 2.0 * prev.depth / prev.phi_d.abs().tan();
        CoaResult { r_a: (l - pd).abs(), applicable: true, cos_theta, simplified: true }
    } else {
        // pd * sin(theta), taken from the cross product to avoid cancellation near collinear.
        let r_a = (p_d.x * step.y - p_d.y * step.x).abs() / step.norm();
        CoaResult { r_a, applicable: true, cos_theta, simplified: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchReason {
    Direct,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SwitchOutcome {
    Stay { coa: Option<CoaResult> },
    Advance { next: usize, reason: SwitchReason, coa: Option<CoaResult> },
    Complete { reason: SwitchReason, coa: Option<CoaResult> },
}

/// Decides whether the active waypoint counts as reached at the fix `p_t`.
pub fn check_waypoint_switch(
    p_t: &Vec3,
    p_prev: Option<&Vec3>,
    task: &MissionTask,
    active_idx: usize,
    prev_cycle: Option<&PrevCycle>,
) -> SwitchOutcome {
    let p_k = task.waypoint_ned(active_idx);
    let r = task.acceptance_radius;
    let d = Vec3::new(p_t.x - p_k.x, p_t.y - p_k.y, 0.0);
    let mut coa = None;
    let reason = if d.norm_squared() <= r * r {
        Some(SwitchReason::Direct)
    } else {
        match (p_prev, prev_cycle) {
            (Some(prev), Some(cycle)) => {
                let c = adaptive_coa(p_t, prev, &p_k, cycle);
                coa = Some(c);
                (c.applicable && c.r_a * c.r_a <= r * r).then_some(SwitchReason::Adaptive)
            }
            _ => None,
        }
    };
    match reason {
        None => SwitchOutcome::Stay { coa },
        Some(reason) if active_idx + 1 >= task.waypoints.len() => SwitchOutcome::Complete { reason, coa },
        Some(reason) => SwitchOutcome::Advance { next: active_idx + 1, reason, coa },
    }
}

/// Memory carried by the guidance between surfacings.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GuidanceMemory {
    pub last_fix: Option<Vec3>,
    pub prev_cycle: Option<PrevCycle>,
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Decision {
    Continue(GuidanceOutput),
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceUpdate {
    pub decision: Decision,
    pub position: Vec3,
    pub switch: SwitchOutcome,
    /// No fix was available and the dead-reckoned position was used.
    pub dead_reckoned: bool,
    pub heading_degenerate: bool,
}

/// One guidance iteration at the surface.
///
/// `fix` is the GNSS fix as (lat, lon); without it `dead_reckoned` is used.
/// On return `*active_idx` points at the waypoint the next cycle should steer to.
pub fn surface_update(
    fix: Option<(f64, f64)>,
    dead_reckoned: &Vec3,
    task: &MissionTask,
    active_idx: &mut usize,
    memory: &mut GuidanceMemory,
    limits: &PitchLimits,
) -> SurfaceUpdate {
    let (position, used_dr) = match fix {
        Some((lat, lon)) => (geodetic_to_ned(lat, lon, &task.origin), false),
        None => {
            log::warn!("no position fix at surfacing; using dead-reckoned position");
            (Vec3::new(dead_reckoned.x, dead_reckoned.y, 0.0), true)
        }
    };
    let switch =
        check_waypoint_switch(&position, memory.last_fix.as_ref(), task, *active_idx, memory.prev_cycle.as_ref());
    memory.last_fix = Some(position);
    let decision = match switch {
        SwitchOutcome::Complete { .. } => Decision::Complete,
        SwitchOutcome::Advance { next, .. } => {
            *active_idx = next;
            Decision::Continue(steer(&position, task, *active_idx, memory, limits))
        }
        SwitchOutcome::Stay { .. } => Decision::Continue(steer(&position, task, *active_idx, memory, limits)),
    };
    let heading_degenerate = match decision {
        Decision::Continue(_) => {
            let p_k = task.waypoint_ned(*active_idx);
            desired_heading(&position, &p_k, memory.heading).degenerate
        }
        Decision::Complete => false,
    };
    SurfaceUpdate { decision, position, switch, dead_reckoned: used_dr, heading_degenerate }
}

fn steer(
    position: &Vec3,
    task: &MissionTask,
    idx: usize,
    memory: &mut GuidanceMemory,
    limits: &PitchLimits,
) -> GuidanceOutput {
    let wp = &task.waypoints[idx];
    let p_k = task.waypoint_ned(idx);
    let heading = desired_heading(position, &p_k, memory.heading).value;
    let l_t = (p_k - position).xy().norm();
    let (descend, ascend) = match task.pitch_mode {
        PitchMode::Recursive => desired_pitch(l_t, wp.target_depth, task.min_loops, limits),
        PitchMode::Fixed { descend, ascend } => (descend, ascend),
    };
    memory.heading = heading;
    memory.prev_cycle = Some(PrevCycle { depth: wp.target_depth, phi_d: descend.abs().max(ascend.abs()) });
    GuidanceOutput {
        desired_heading: heading,
        desired_pitch_descend: descend,
        desired_pitch_ascend: ascend,
        desired_speed: wp.desired_speed,
        target_depth: wp.target_depth,
        active_waypoint: idx,
    }
}

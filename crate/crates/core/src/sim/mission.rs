use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;

use crate::control::{compute_gain_set, linearize_horizontal, GainRequest, GainSet, Phase, Plane};
use crate::frames::{euler_angles, Vec3};
use crate::guidance::{ned_to_geodetic, surface_update, Decision, GuidanceMemory, MissionTask, SwitchOutcome};
use crate::maneuver::{reachability_check, TurnSpec};
use crate::model::GliderConfig;
use crate::sim::{CurrentField, CycleReport, EventKind, SimConfig, SimError, Simulator, TrajectoryLog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MissionStatus {
    Completed,
    TimeBudgetExhausted,
    CycleLimitReached,
}

/// How many work cycles each waypoint took before it was accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproachRecord {
    pub waypoint: usize,
    pub approaches: u32,
    pub reached_at: f64,
    pub adaptive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionOutcome {
    pub status: MissionStatus,
    pub log: TrajectoryLog,
    pub cycles: Vec<CycleReport>,
    pub reached: Vec<ApproachRecord>,
    /// Horizontal distance from the last surfacing to the last active waypoint.
    pub final_position_error: f64,
}

/// Largest steady turn rate the heading model allows at full mass roll.
pub fn max_turn_rate(cfg: &GliderConfig, gains: &GainSet) -> Option<f64> {
    let eq = &gains.get(Phase::Descend, Plane::Vertical).equilibrium;
    let m = linearize_horizontal(cfg, eq).ok()?;
    let (a, b) = (m.a[(0, 0)], m.b[(0, 0)]);
    let zeta = cfg.actuators.zeta_max.abs().max(cfg.actuators.zeta_min.abs());
    (a < 0.0).then(|| (b / a).abs() * zeta)
}

fn gain_table(g: &GainSet) -> Vec<(String, Vec<Vec<f64>>)> {
    g.entries
        .iter()
        .map(|e| {
            let rows = (0..e.k.nrows()).map(|i| e.k.row(i).iter().copied().collect()).collect();
            (format!("{:?}-{:?}", e.phase, e.plane).to_lowercase(), rows)
        })
        .collect()
}

/// Flies work cycles until every waypoint has been accepted or the budget runs out.
pub fn run_mission(
    task: &MissionTask,
    cfg: &GliderConfig,
    sim: &SimConfig,
    field: &CurrentField,
) -> Result<MissionOutcome, SimError> {
    if task.waypoints.is_empty() {
        return Ok(MissionOutcome {
            status: MissionStatus::Completed,
            log: TrajectoryLog::default(),
            cycles: Vec::new(),
            reached: Vec::new(),
            final_position_error: 0.0,
        });
    }
    let mut s = Simulator::at_surface(cfg, sim, field);
    let mut rng = ChaCha8Rng::seed_from_u64(sim.seed);
    let noise = Normal::new(0.0, sim.gps_noise_std).expect("validated noise level");
    let mut memory = GuidanceMemory { heading: sim.initial_heading, ..Default::default() };
    let mut active = 0usize;
    let mut approaches = 0u32;
    let mut reached = Vec::new();
    let mut cycles = Vec::new();
    let mut last_gains: Option<GainSet> = None;

    let status = loop {
        let p = s.state.p;
        let offset = if sim.gps_noise_std > 0.0 {
            Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), 0.0)
        } else {
            Vec3::zeros()
        };
        let fix = ned_to_geodetic(&(p + offset), &task.origin);
        let before = active;
        let update = surface_update(Some(fix), &p, task, &mut active, &mut memory, &cfg.pitch_limits);
        let coa = match update.switch {
            SwitchOutcome::Stay { coa } | SwitchOutcome::Advance { coa, .. } | SwitchOutcome::Complete { coa, .. } => coa,
        };
        if let Some(c) = coa {
            s.log.push_event(
                s.t,
                EventKind::AdaptiveCoa {
                    waypoint: before,
                    r_a: c.r_a,
                    cos_theta: c.cos_theta,
                    applicable: c.applicable,
                    simplified: c.simplified,
                },
            );
        }
        match update.switch {
            SwitchOutcome::Advance { next, reason, .. } => {
                s.log.push_event(s.t, EventKind::WaypointSwitch { from: before, to: Some(next), reason, approaches });
                reached.push(ApproachRecord { waypoint: before, approaches, reached_at: s.t, adaptive: reason == crate::guidance::SwitchReason::Adaptive });
                approaches = 0;
            }
            SwitchOutcome::Complete { reason, .. } => {
                s.log.push_event(s.t, EventKind::WaypointSwitch { from: before, to: None, reason, approaches });
                reached.push(ApproachRecord { waypoint: before, approaches, reached_at: s.t, adaptive: reason == crate::guidance::SwitchReason::Adaptive });
            }
            SwitchOutcome::Stay { .. } => {}
        }
        let guidance = match update.decision {
            Decision::Complete => break MissionStatus::Completed,
            Decision::Continue(g) => g,
        };
        if approaches >= sim.max_approaches {
            let (_, _, yaw) = euler_angles(&s.state.q);
            let r_upper = last_gains.as_ref().and_then(|g| max_turn_rate(cfg, g)).unwrap_or(f64::MIN_POSITIVE);
            let spec = TurnSpec { theta_i: yaw, v_lower: guidance.desired_speed, r_upper };
            let target = task.waypoint_ned(active);
            let diagnosis = reachability_check(&update.position, &target, &spec).unwrap_or(
                crate::maneuver::ReachabilityResult {
                    reachable: true,
                    intersection: None,
                    min_turn_radius: spec.min_turn_radius(),
                    turn_sign: 1.0,
                },
            );
            return Err(SimError::GuidanceFailure {
                waypoint: active,
                approaches,
                diagnosis,
                partial: Box::new(s.log),
            });
        }
        if sim.max_cycles.is_some_and(|m| s.cycles_completed >= m) {
            break MissionStatus::CycleLimitReached;
        }
        let req = GainRequest {
            pitch_descend: guidance.desired_pitch_descend,
            pitch_ascend: guidance.desired_pitch_ascend,
            heading: guidance.desired_heading,
            speed: guidance.desired_speed,
            depth: 0.5 * guidance.target_depth,
        };
        let gains = compute_gain_set(cfg, &req)?;
        s.log.push_event(
            s.t,
            EventKind::GainRecompute { cycle: s.cycles_completed + 1, request: req, gains: gain_table(&gains) },
        );
        match s.run_work_cycle(&gains, guidance.target_depth) {
            Ok(report) => cycles.push(report),
            Err(SimError::Timeout { .. }) => break MissionStatus::TimeBudgetExhausted,
            Err(e) => return Err(e),
        }
        approaches += 1;
        last_gains = Some(gains);
    };
    match status {
        MissionStatus::Completed => s.log.push_event(s.t, EventKind::MissionComplete { cycles: s.cycles_completed }),
        MissionStatus::TimeBudgetExhausted => {
            s.log.push_event(s.t, EventKind::TimeBudgetExhausted { cycles: s.cycles_completed })
        }
        MissionStatus::CycleLimitReached => {}
    }
    let last = task.waypoint_ned(active.min(task.waypoints.len() - 1));
    let final_position_error = (s.state.p - last).xy().norm();
    Ok(MissionOutcome { status, log: s.log, cycles, reached, final_position_error })
}

//! Fixed-step time integration, the descend/ascend work cycle and the mission loop.

mod environment;
mod log;
mod mission;

pub use environment::{current_at, CurrentField, CurrentLayer};
pub use log::{Actuator, CyclePhase, Event, EventKind, LogRow, TrajectoryLog};
pub use mission::{max_turn_rate, run_mission, ApproachRecord, MissionOutcome, MissionStatus};

use nalgebra::{Quaternion, UnitQuaternion};
use serde::Serialize;
use thiserror::Error;

use crate::control::{feedback_command, ControlError, GainSet, Phase};
use crate::frames::Vec3;
use crate::maneuver::ReachabilityResult;
use crate::model::{actuator_step, dynamics_rhs, kinematics, ActuatorState, GliderConfig, GliderState, ModelError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub dt: f64,
    pub max_sim_time: f64,
    pub surface_depth_threshold: f64,
    /// Integrator steps between feedback updates.
    pub control_period_steps: u32,
    /// Allowed depth overshoot past the target, as a fraction of the target depth.
    pub overshoot_tolerance: f64,
    pub max_cycles: Option<u32>,
    /// Work cycles spent on one waypoint before the mission is declared failed.
    pub max_approaches: u32,
    pub detach_speed: bool,
    pub initial_heading: f64,
    /// Standard deviation of the horizontal GNSS fix error, metres.
    pub gps_noise_std: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            max_sim_time: 50_000.0,
            surface_depth_threshold: 0.5,
            control_period_steps: 10,
            overshoot_tolerance: 0.1,
            max_cycles: None,
            max_approaches: 12,
            detach_speed: false,
            initial_heading: 0.0,
            gps_noise_std: 0.0,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.max_sim_time > 0.0) {
            return Err(format!("max_sim_time must be > 0, got {}", self.max_sim_time));
        }
        if !(self.surface_depth_threshold >= 0.0) {
            return Err("surface_depth_threshold must be >= 0".into());
        }
        if self.control_period_steps == 0 {
            return Err("control_period_steps must be >= 1".into());
        }
        if !(self.overshoot_tolerance >= 0.0) {
            return Err("overshoot_tolerance must be >= 0".into());
        }
        if self.max_approaches == 0 {
            return Err("max_approaches must be >= 1".into());
        }
        if !(self.gps_noise_std >= 0.0) {
            return Err("gps_noise_std must be >= 0".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("non-finite state at t = {t}: {state:?}")]
    NonFinite { t: f64, state: Box<GliderState> },
    #[error("dynamics failed at t = {t}: {source}")]
    Dynamics { t: f64, source: ModelError },
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("work cycle did not finish before t = {t}")]
    Timeout { t: f64, partial: Box<TrajectoryLog> },
    #[error("waypoint {waypoint} not reached after {approaches} approaches (reachable from last fix: {})", .diagnosis.reachable)]
    GuidanceFailure { waypoint: usize, approaches: u32, diagnosis: ReachabilityResult, partial: Box<TrajectoryLog> },
}

/// Derivative of the rigid-body state; actuators fixed at `a`.
fn derivative(
    state: &GliderState,
    a: &ActuatorState,
    field: &CurrentField,
    t: f64,
    cfg: &GliderConfig,
) -> Result<(Vec3, Vec3, Vec3, Quaternion<f64>), ModelError> {
    let cur = current_at(field, &state.p, t);
    let acc = dynamics_rhs(state, a, &cur, cfg)?;
    let (p_dot, q_dot) = kinematics(state);
    Ok((acc.v_dot, acc.omega_dot, p_dot, q_dot))
}

fn advance(s: &GliderState, k: &(Vec3, Vec3, Vec3, Quaternion<f64>), h: f64) -> GliderState {
    GliderState {
        v: s.v + k.0 * h,
        omega: s.omega + k.1 * h,
        p: s.p + k.2 * h,
        // Stages stay in the ambient quaternion space; only the completed step is normalised.
        q: UnitQuaternion::new_unchecked(s.q.quaternion() + k.3 * h),
    }
}

/// One classic fourth-order step. Actuators move once per step and are interpolated
/// linearly inside it using their realised rates.
pub fn integrate_step(
    state: &GliderState,
    act: &ActuatorState,
    field: &CurrentField,
    t: f64,
    dt: f64,
    cfg: &GliderConfig,
) -> Result<(GliderState, ActuatorState), SimError> {
    let next_act = actuator_step(act, dt, cfg);
    let moving = ActuatorState { zeta: act.zeta, r_p1: act.r_p1, m_b: act.m_b, ..next_act };
    let at = |tau: f64| moving.extrapolated(tau);
    let wrap = |e: ModelError| SimError::Dynamics { t, source: e };

    let k1 = derivative(state, &at(0.0), field, t, cfg).map_err(wrap)?;
    let s2 = advance(state, &k1, dt / 2.0);
    let k2 = derivative(&s2, &at(dt / 2.0), field, t + dt / 2.0, cfg).map_err(wrap)?;
    let s3 = advance(state, &k2, dt / 2.0);
    let k3 = derivative(&s3, &at(dt / 2.0), field, t + dt / 2.0, cfg).map_err(wrap)?;
    let s4 = advance(state, &k3, dt);
    let k4 = derivative(&s4, &at(dt), field, t + dt, cfg).map_err(wrap)?;

    let w = dt / 6.0;
    let q = state.q.quaternion() + (k1.3 + k2.3 * 2.0 + k3.3 * 2.0 + k4.3) * w;
    let next = GliderState {
        v: state.v + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * w,
        omega: state.omega + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * w,
        p: state.p + (k1.2 + k2.2 * 2.0 + k3.2 * 2.0 + k4.2) * w,
        q: UnitQuaternion::new_normalize(q),
    };
    if !next.is_finite() {
        return Err(SimError::NonFinite { t: t + dt, state: Box::new(next) });
    }
    Ok((next, next_act))
}

/// Summary of one finished work cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CycleReport {
    pub cycle: u32,
    pub start_time: f64,
    pub depth_reached_time: f64,
    pub surface_time: f64,
    pub max_depth: f64,
}

/// Mutable simulation run: vehicle, actuators, clock and log.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    pub cfg: &'a GliderConfig,
    pub sim: &'a SimConfig,
    pub field: &'a CurrentField,
    pub state: GliderState,
    pub act: ActuatorState,
    pub t: f64,
    pub steps: u64,
    pub log: TrajectoryLog,
    pub cycles_completed: u32,
    clamped: [bool; 3],
}

impl<'a> Simulator<'a> {
    pub fn new(
        cfg: &'a GliderConfig,
        sim: &'a SimConfig,
        field: &'a CurrentField,
        state: GliderState,
        act: ActuatorState,
    ) -> Self {
        let mut log = TrajectoryLog::default();
        log.push_row(LogRow::new(0.0, &state, &act, CyclePhase::Surfaced));
        Self { cfg, sim, field, state, act, t: 0.0, steps: 0, log, cycles_completed: 0, clamped: [false; 3] }
    }

    /// Vehicle floating level at the origin with neutral actuators.
    pub fn at_surface(cfg: &'a GliderConfig, sim: &'a SimConfig, field: &'a CurrentField) -> Self {
        let state = GliderState::at_rest(Vec3::zeros(), crate::frames::quat_from_euler(0.0, 0.0, sim.initial_heading));
        let act = ActuatorState::holding(0.0, 0.0, cfg.neutral_ballast(0.0).clamp(0.0, cfg.actuators.mb_max));
        Self::new(cfg, sim, field, state, act)
    }

    fn time_left(&self) -> bool {
        self.t + 0.5 * self.sim.dt < self.sim.max_sim_time
    }

    fn control_tick(&mut self, gains: &GainSet, phase: Phase) {
        let cmd = feedback_command(&self.state, gains, phase, self.sim.detach_speed, self.cfg);
        self.act.targets = cmd.targets;
        let flags = [cmd.clamped_zeta, cmd.clamped_r_p1, cmd.clamped_m_b];
        for (i, actuator) in [Actuator::Zeta, Actuator::RP1, Actuator::MB].into_iter().enumerate() {
            if flags[i] != self.clamped[i] {
                self.clamped[i] = flags[i];
                self.log.push_event(self.t, EventKind::Clamping { actuator, active: flags[i] });
            }
        }
    }

    fn step(&mut self, phase: CyclePhase) -> Result<(), SimError> {
        let (s, a) = integrate_step(&self.state, &self.act, self.field, self.t, self.sim.dt, self.cfg)?;
        self.steps += 1;
        self.t = self.steps as f64 * self.sim.dt;
        self.state = s;
        self.act = a;
        self.log.push_row(LogRow::new(self.t, &self.state, &self.act, phase));
        Ok(())
    }

    /// Descends to `target_depth` under the descend gains, then returns to the surface
    /// under the ascend gains.
    pub fn run_work_cycle(&mut self, gains: &GainSet, target_depth: f64) -> Result<CycleReport, SimError> {
        let cycle = self.cycles_completed + 1;
        let start_time = self.t;
        self.log.push_event(self.t, EventKind::CycleStart { cycle, target_depth });
        let mut phase = CyclePhase::Descend;
        let mut depth_reached_time = f64::NAN;
        let mut max_depth = self.state.depth();
        let period = u64::from(self.sim.control_period_steps);
        let mut tick = 0u64;
        loop {
            if !self.time_left() {
                return Err(SimError::Timeout { t: self.t, partial: Box::new(self.log.clone()) });
            }
            if tick.is_multiple_of(period) {
                let p = if phase == CyclePhase::Descend { Phase::Descend } else { Phase::Ascend };
                self.control_tick(gains, p);
            }
            tick += 1;
            self.step(phase)?;
            max_depth = max_depth.max(self.state.depth());
            match phase {
                CyclePhase::Descend if self.state.depth() >= target_depth => {
                    phase = CyclePhase::Ascend;
                    depth_reached_time = self.t;
                    self.log.push_event(self.t, EventKind::DepthReached { cycle, depth: self.state.depth() });
                    // Switch gains immediately.
                    tick = 0;
                }
                CyclePhase::Ascend
                    if self.state.depth() < self.sim.surface_depth_threshold
                        && self.state.ned_velocity().z < 0.0 =>
                {
                    if let Some(row) = self.log.rows.last_mut() {
                        row.phase = CyclePhase::Surfaced;
                    }
                    self.cycles_completed = cycle;
                    let limit = target_depth * (1.0 + self.sim.overshoot_tolerance);
                    if max_depth > limit {
                        self.log.push_event(self.t, EventKind::DepthOvershoot { cycle, max_depth, limit });
                    }
                    self.log.push_event(
                        self.t,
                        EventKind::Surfacing { cycle, position: self.state.p, max_depth },
                    );
                    return Ok(CycleReport {
                        cycle,
                        start_time,
                        depth_reached_time,
                        surface_time: self.t,
                        max_depth,
                    });
                }
                _ => {}
            }
        }
    }
}

/// Runs one work cycle from the given state, returning the final state and the log.
pub fn run_work_cycle(
    state: &GliderState,
    act: &ActuatorState,
    gains: &GainSet,
    target_depth: f64,
    cfg: &GliderConfig,
    sim: &SimConfig,
    field: &CurrentField,
) -> Result<(GliderState, ActuatorState, TrajectoryLog, CycleReport), SimError> {
    let mut s = Simulator::new(cfg, sim, field, *state, *act);
    let report = s.run_work_cycle(gains, target_depth)?;
    Ok((s.state, s.act, s.log, report))
}

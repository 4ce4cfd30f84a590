use serde::Serialize;

use crate::control::GainRequest;
use crate::frames::{euler_angles, Vec3};
use crate::guidance::SwitchReason;
use crate::model::{ActuatorState, GliderState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CyclePhase {
    Surfaced,
    Descend,
    Ascend,
}

impl CyclePhase {
    pub fn as_str(&self) -> &'static str {
        match self {
            CyclePhase::Surfaced => "surfaced",
            CyclePhase::Descend => "descend",
            CyclePhase::Ascend => "ascend",
        }
    }
}

/// One sample of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogRow {
    pub t: f64,
    pub state: GliderState,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub zeta: f64,
    pub r_p1: f64,
    pub m_b: f64,
    pub phase: CyclePhase,
}

impl LogRow {
    pub fn new(t: f64, state: &GliderState, act: &ActuatorState, phase: CyclePhase) -> Self {
        let (roll, pitch, yaw) = euler_angles(&state.q);
        Self { t, state: *state, roll, pitch, yaw, zeta: act.zeta, r_p1: act.r_p1, m_b: act.m_b, phase }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Actuator {
    Zeta,
    RP1,
    MB,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EventKind {
    CycleStart {
        cycle: u32,
        target_depth: f64,
    },
    GainRecompute {
        cycle: u32,
        request: GainRequest,
        /// Row-major gain matrices keyed as descend/ascend x vertical/horizontal.
        gains: Vec<(String, Vec<Vec<f64>>)>,
    },
    DepthReached {
        cycle: u32,
        depth: f64,
    },
    Surfacing {
        cycle: u32,
        position: Vec3,
        max_depth: f64,
    },
    AdaptiveCoa {
        waypoint: usize,
        r_a: f64,
        cos_theta: f64,
        applicable: bool,
        simplified: bool,
    },
    WaypointSwitch {
        from: usize,
        to: Option<usize>,
        reason: SwitchReason,
        approaches: u32,
    },
    Clamping {
        actuator: Actuator,
        active: bool,
    },
    DepthOvershoot {
        cycle: u32,
        max_depth: f64,
        limit: f64,
    },
    MissionComplete {
        cycles: u32,
    },
    TimeBudgetExhausted {
        cycles: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    #[serde(flatten)]
    pub kind: EventKind,
}

/// Append-only trajectory samples and events.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct TrajectoryLog {
    pub rows: Vec<LogRow>,
    pub events: Vec<Event>,
}

impl TrajectoryLog {
    pub fn push_row(&mut self, row: LogRow) {
        if let Some(last) = self.rows.last() {
            assert!(row.t > last.t, "log times must increase ({} after {})", row.t, last.t);
        }
        self.rows.push(row);
    }

    pub fn push_event(&mut self, t: f64, kind: EventKind) {
        self.events.push(Event { t, kind });
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

use std::io::Write;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::frames::Vec3;
use crate::guidance::MissionTask;
use crate::sim::{ApproachRecord, CyclePhase, MissionOutcome, MissionStatus, TrajectoryLog};

pub const TRAJECTORY_COLUMNS: [&str; 21] = [
    "t", "x_n", "y_e", "z_d", "qw", "qx", "qy", "qz", "roll", "pitch", "yaw", "u", "v", "w", "p", "q", "r",
    "zeta", "rp1", "mb", "phase",
];

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("log has no samples")]
    EmptyLog,
    #[error("unknown plot kind {0:?} (expected depth-profile, xy-track or state-timeseries)")]
    UnknownPlot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Writes one row per sample with the fixed column set.
pub fn write_trajectory<W: Write>(log: &TrajectoryLog, out: W) -> Result<(), ExportError> {
    if log.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRAJECTORY_COLUMNS)?;
    for r in &log.rows {
        let s = &r.state;
        let q = s.q.quaternion();
        let mut rec: Vec<String> = [
            r.t, s.p.x, s.p.y, s.p.z, q.w, q.i, q.j, q.k, r.roll, r.pitch, r.yaw, s.v.x, s.v.y, s.v.z,
            s.omega.x, s.omega.y, s.omega.z, r.zeta, r.r_p1, r.m_b,
        ]
        .into_iter()
        .map(num)
        .collect();
        rec.push(r.phase.as_str().to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// One JSON object per line, in the order the events were raised.
pub fn write_events<W: Write>(log: &TrajectoryLog, mut out: W) -> Result<(), ExportError> {
    for e in &log.events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    DepthProfile,
    XyTrack,
    StateTimeseries,
}

impl FromStr for PlotKind {
    type Err = ExportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "depth-profile" => Ok(Self::DepthProfile),
            "xy-track" => Ok(Self::XyTrack),
            "state-timeseries" => Ok(Self::StateTimeseries),
            other => Err(ExportError::UnknownPlot(other.to_string())),
        }
    }
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [Self::DepthProfile, Self::XyTrack, Self::StateTimeseries];

    pub fn file_name(&self) -> &'static str {
        match self {
            Self::DepthProfile => "depth-profile.csv",
            Self::XyTrack => "xy-track.csv",
            Self::StateTimeseries => "state-timeseries.csv",
        }
    }
}

/// Plot-ready columnar data.
///
/// * `depth-profile`: `t,depth,phase`
/// * `xy-track`: `kind,t,x_n,y_e,dir_n,dir_e,label` where `kind` is `track` for each
///   sample, `waypoint` for each marker and `surfacing` for the horizontal velocity
///   direction at each surfacing.
/// * `state-timeseries`: `t,roll,pitch,yaw,u,v,w,p,q,r,zeta,rp1,mb,phase`
pub fn export_plot_data<W: Write>(
    log: &TrajectoryLog,
    which: PlotKind,
    waypoints: &[Vec3],
    out: W,
) -> Result<(), ExportError> {
    if log.is_empty() {
        return Err(ExportError::EmptyLog);
    }
    let mut w = csv::Writer::from_writer(out);
    match which {
        PlotKind::DepthProfile => {
            w.write_record(["t", "depth", "phase"])?;
            for r in &log.rows {
                w.write_record([num(r.t), num(r.state.depth()), r.phase.as_str().into()])?;
            }
        }
        PlotKind::XyTrack => {
            w.write_record(["kind", "t", "x_n", "y_e", "dir_n", "dir_e", "label"])?;
            for r in &log.rows {
                let p = r.state.p;
                w.write_record(["track".into(), num(r.t), num(p.x), num(p.y), String::new(), String::new(), String::new()])?;
            }
            for (i, p) in waypoints.iter().enumerate() {
                w.write_record(["waypoint".into(), String::new(), num(p.x), num(p.y), String::new(), String::new(), format!("wp{i}")])?;
            }
            for (k, r) in log.rows.iter().filter(|r| r.phase == CyclePhase::Surfaced).skip(1).enumerate() {
                let v = r.state.ned_velocity();
                let h = v.xy();
                let n = h.norm();
                let (dn, de) = if n > 0.0 { (h.x / n, h.y / n) } else { (0.0, 0.0) };
                w.write_record([
                    "surfacing".into(),
                    num(r.t),
                    num(r.state.p.x),
                    num(r.state.p.y),
                    num(dn),
                    num(de),
                    format!("cycle{}", k + 1),
                ])?;
            }
        }
        PlotKind::StateTimeseries => {
            w.write_record([
                "t", "roll", "pitch", "yaw", "u", "v", "w", "p", "q", "r", "zeta", "rp1", "mb", "phase",
            ])?;
            for r in &log.rows {
                let s = &r.state;
                let mut rec: Vec<String> = [
                    r.t, r.roll, r.pitch, r.yaw, s.v.x, s.v.y, s.v.z, s.omega.x, s.omega.y, s.omega.z, r.zeta,
                    r.r_p1, r.m_b,
                ]
                .into_iter()
                .map(num)
                .collect();
                rec.push(r.phase.as_str().into());
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionSummary {
    pub status: MissionStatus,
    pub cycles: u32,
    pub waypoints_total: usize,
    pub waypoints_reached: usize,
    pub reached: Vec<ApproachRecord>,
    pub final_position_error_m: f64,
    pub sim_time_s: f64,
}

pub fn mission_summary(outcome: &MissionOutcome, task: &MissionTask) -> MissionSummary {
    MissionSummary {
        status: outcome.status,
        cycles: outcome.cycles.len() as u32,
        waypoints_total: task.waypoints.len(),
        waypoints_reached: outcome.reached.len(),
        reached: outcome.reached.clone(),
        final_position_error_m: outcome.final_position_error,
        sim_time_s: outcome.log.rows.last().map_or(0.0, |r| r.t),
    }
}

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;

use glider_core::control::{compute_gain_set, find_equilibrium, GainRequest, Phase};
use glider_core::frames::Vec3;
use glider_core::guidance::MissionTask;
use glider_core::io::{
    export_plot_data, mission_summary, parse_config, parse_task, write_events, write_trajectory, ConfigDocument,
    ExportError, InputError, PlotKind,
};
use glider_core::maneuver::{reachability_check, ReachabilityResult, TurnSpec};
use glider_core::sim::{max_turn_rate, run_mission, MissionStatus, SimError, TrajectoryLog};
use glider_core::{Error, REFERENCE_CONFIG_TOML};

#[derive(Parser)]
#[command(name = "glider", version, about = "Underwater glider mission simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fly a mission and write the trajectory, events, summary and plot data.
    Run(RunArgs),
    /// Check every leg of a task against the tightest turning circle.
    Check(CheckArgs),
    /// Print the trimmed descending and ascending glides.
    Trim(GlideArgs),
    /// Print the four feedback gain matrices.
    Gains(GlideArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Vehicle document; the built-in reference vehicle when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    task: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Integration step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Simulated-time budget (s).
    #[arg(long)]
    max_time: Option<f64>,
    /// Seed for the position-fix noise.
    #[arg(long)]
    seed: Option<u64>,
    /// Stop after this many work cycles.
    #[arg(long)]
    max_cycles: Option<u32>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CheckArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    task: PathBuf,
    /// Heading at the start of the first leg (rad, clockwise from north).
    #[arg(long, default_value_t = 0.0)]
    heading: f64,
    /// Lower bound on forward speed (m/s); slowest waypoint speed by default.
    #[arg(long)]
    v_lower: Option<f64>,
    /// Upper bound on turn rate (rad/s); derived from the vehicle by default.
    #[arg(long)]
    r_upper: Option<f64>,
    /// Directory for reachability.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GlideArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = -0.6)]
    pitch_descend: f64,
    #[arg(long, default_value_t = 0.7)]
    pitch_ascend: f64,
    #[arg(long, default_value_t = 0.5)]
    speed: f64,
    #[arg(long, default_value_t = 15.0)]
    depth: f64,
    #[arg(long, default_value_t = 0.0)]
    heading: f64,
}

impl GlideArgs {
    fn request(&self) -> GainRequest {
        GainRequest {
            pitch_descend: self.pitch_descend,
            pitch_ascend: self.pitch_ascend,
            heading: self.heading,
            speed: self.speed,
            depth: self.depth,
        }
    }
}

/// Writes to stdout, ignoring a closed pipe (e.g. `glider gains | head`).
macro_rules! out {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io { path: path.display().to_string(), source })
}

fn load_config(arg: &ConfigArg) -> Result<ConfigDocument, Error> {
    let doc = match &arg.config {
        Some(p) => parse_config(&read(p)?)?,
        None => {
            info!("no --config given, using the built-in reference vehicle");
            parse_config(REFERENCE_CONFIG_TOML)?
        }
    };
    Ok(doc)
}

fn load_task(path: &Path) -> Result<MissionTask, Error> {
    Ok(parse_task(&read(path)?)?)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, ExportError> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_log(log: &TrajectoryLog, task: &MissionTask, dir: &Path) -> Result<(), ExportError> {
    write_trajectory(log, create(dir, "trajectory.csv")?)?;
    write_events(log, create(dir, "events.jsonl")?)?;
    let waypoints: Vec<Vec3> = (0..task.waypoints.len()).map(|i| task.waypoint_ned(i)).collect();
    for kind in PlotKind::ALL {
        export_plot_data(log, kind, &waypoints, create(dir, kind.file_name())?)?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<ExitCode, Error> {
    let doc = load_config(&args.config)?;
    let task = load_task(&args.task)?;
    let mut sim = doc.sim;
    if let Some(dt) = args.dt {
        sim.dt = dt;
    }
    if let Some(t) = args.max_time {
        sim.max_sim_time = t;
    }
    if let Some(seed) = args.seed {
        sim.seed = seed;
    }
    if args.max_cycles.is_some() {
        sim.max_cycles = args.max_cycles;
    }
    sim.validate().map_err(|reason| InputError::Range { field: "sim".into(), reason })?;
    fs::create_dir_all(&args.out).map_err(ExportError::from)?;

    let outcome = match run_mission(&task, &doc.glider, &sim, &doc.current) {
        Ok(o) => o,
        Err(e) => {
            // Keep whatever was flown before the failure.
            if let SimError::GuidanceFailure { partial, .. } | SimError::Timeout { partial, .. } = &e {
                if !partial.is_empty() {
                    write_log(partial, &task, &args.out)?;
                }
            }
            return Err(e.into());
        }
    };
    write_log(&outcome.log, &task, &args.out)?;
    let summary = mission_summary(&outcome, &task);
    let mut f = create(&args.out, "summary.json")?;
    serde_json::to_writer_pretty(&mut f, &summary).map_err(ExportError::from)?;
    f.write_all(b"\n").map_err(ExportError::from)?;
    f.flush().map_err(ExportError::from)?;
    out!("{}", serde_json::to_string_pretty(&summary).map_err(ExportError::from)?);
    Ok(match summary.status {
        MissionStatus::Completed | MissionStatus::CycleLimitReached => ExitCode::SUCCESS,
        MissionStatus::TimeBudgetExhausted => {
            warn!("time budget exhausted after {} cycles", summary.cycles);
            ExitCode::from(3)
        }
    })
}

#[derive(Serialize)]
struct LegVerdict {
    leg: usize,
    from: [f64; 2],
    to: [f64; 2],
    heading_in: f64,
    distance_m: f64,
    #[serde(flatten)]
    result: ReachabilityResult,
}

fn check(args: &CheckArgs) -> Result<ExitCode, Error> {
    let doc = load_config(&args.config)?;
    let task = load_task(&args.task)?;
    let cfg = &doc.glider;
    let v_lower = args
        .v_lower
        .unwrap_or_else(|| task.waypoints.iter().map(|w| w.desired_speed).fold(f64::INFINITY, f64::min));
    let r_upper = match args.r_upper {
        Some(r) => r,
        None => {
            let req = GainRequest {
                pitch_descend: cfg.pitch_limits.descend_min,
                pitch_ascend: cfg.pitch_limits.ascend_max,
                heading: args.heading,
                speed: v_lower,
                depth: 0.5 * task.waypoints[0].target_depth,
            };
            let gains = compute_gain_set(cfg, &req)?;
            max_turn_rate(cfg, &gains).ok_or_else(|| InputError::Range {
                field: "r_upper".into(),
                reason: "vehicle has no stable steady turn; pass --r-upper".into(),
            })?
        }
    };
    let mut verdicts = Vec::new();
    let mut from = Vec3::zeros();
    let mut heading = args.heading;
    for i in 0..task.waypoints.len() {
        let to = task.waypoint_ned(i);
        let spec = TurnSpec { theta_i: heading, v_lower, r_upper };
        let result = reachability_check(&from, &to, &spec)?;
        let d = to - from;
        verdicts.push(LegVerdict {
            leg: i + 1,
            from: [from.x, from.y],
            to: [to.x, to.y],
            heading_in: heading,
            distance_m: d.xy().norm(),
            result,
        });
        heading = d.y.atan2(d.x);
        from = to;
    }

    out!("min turn radius {:.1} m (v {v_lower} m/s, r {r_upper:.5} rad/s)", v_lower / r_upper);
    out!("{:>4} {:>10} {:>10} {:>10} {:>5}  verdict", "leg", "x_n", "y_e", "dist_m", "turn");
    for v in &verdicts {
        out!(
            "{:>4} {:>10.1} {:>10.1} {:>10.1} {:>5}  {}",
            v.leg,
            v.to[0],
            v.to[1],
            v.distance_m,
            if v.result.turn_sign > 0.0 { "right" } else { "left" },
            if v.result.reachable { "reachable" } else { "UNREACHABLE" }
        );
    }
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(ExportError::from)?;
        let mut f = create(dir, "reachability.json")?;
        serde_json::to_writer_pretty(&mut f, &verdicts).map_err(ExportError::from)?;
        f.flush().map_err(ExportError::from)?;
    }
    Ok(if verdicts.iter().all(|v| v.result.reachable) { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn trim(args: &GlideArgs) -> Result<ExitCode, Error> {
    let doc = load_config(&args.config)?;
    let req = args.request();
    let descend = find_equilibrium(&doc.glider, req.pitch_descend, req.speed, Phase::Descend, req.depth)?;
    let ascend = find_equilibrium(&doc.glider, req.pitch_ascend, req.speed, Phase::Ascend, req.depth)?;
    let out = serde_json::json!({ "descend": descend, "ascend": ascend });
    out!("{}", serde_json::to_string_pretty(&out).map_err(ExportError::from)?);
    Ok(ExitCode::SUCCESS)
}

fn gains(args: &GlideArgs) -> Result<ExitCode, Error> {
    let doc = load_config(&args.config)?;
    let set = compute_gain_set(&doc.glider, &args.request())?;
    let entries: Vec<_> = set
        .entries
        .iter()
        .map(|e| {
            let k: Vec<Vec<f64>> = (0..e.k.nrows()).map(|i| e.k.row(i).iter().copied().collect()).collect();
            serde_json::json!({
                "phase": e.phase,
                "plane": e.plane,
                "states": e.model.states,
                "inputs": e.model.inputs,
                "k": k,
                "care_residual": e.care_residual,
                "closed_loop_abscissa": e.closed_loop_abscissa,
            })
        })
        .collect();
    out!("{}", serde_json::to_string_pretty(&entries).map_err(ExportError::from)?);
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Check(a) => check(a),
        Command::Trim(a) => trim(a),
        Command::Gains(a) => gains(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

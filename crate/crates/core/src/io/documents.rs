//! Strict TOML documents for the vehicle configuration and the mission task.
//!
//! Every key is optional at the serde level so that missing fields can be
//! reported by name; unknown keys are rejected.

use nalgebra::Matrix3;
use serde::Deserialize;

use crate::frames::Vec3;
use crate::guidance::{GeoOrigin, MissionTask, PitchMode, Waypoint};
use crate::io::InputError;
use crate::model::{ActuatorLimits, AddedMass, GliderConfig, HydroCoefficients, LqrWeights, PitchLimits};
use crate::sim::{CurrentField, CurrentLayer, SimConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    schema_version: Option<u32>,
    m_s: Option<f64>,
    r_s: Option<[f64; 3]>,
    m_p: Option<f64>,
    r_b1: Option<f64>,
    j_s: Option<[[f64; 3]; 3]>,
    j_p0: Option<[[f64; 3]; 3]>,
    rp_offset: Option<f64>,
    rho_deep: Option<f64>,
    rho_surface: Option<f64>,
    k_vh: Option<f64>,
    rho_gradient: Option<f64>,
    waterplane_area: Option<f64>,
    tdl2_literal: Option<bool>,
    lift_drag_literal: Option<bool>,
    hydro: Option<RawHydro>,
    added_mass: Option<RawAddedMass>,
    actuators: Option<RawActuators>,
    pitch_limits: Option<RawPitchLimits>,
    weights: Option<RawWeights>,
    sim: Option<RawSim>,
    current: Option<Vec<RawCurrent>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHydro {
    k_d0: Option<f64>,
    k_d: Option<f64>,
    k_beta: Option<f64>,
    k_l0: Option<f64>,
    k_l: Option<f64>,
    k_mr: Option<f64>,
    k_p: Option<f64>,
    k_m0: Option<f64>,
    k_m: Option<f64>,
    k_q: Option<f64>,
    k_my: Option<f64>,
    k_r: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddedMass {
    l11: Option<f64>,
    l22: Option<f64>,
    l33: Option<f64>,
    l44: Option<f64>,
    l55: Option<f64>,
    l66: Option<f64>,
    l26: Option<f64>,
    l62: Option<f64>,
    l35: Option<f64>,
    l53: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawActuators {
    rate_zeta: Option<f64>,
    rate_rp1: Option<f64>,
    rate_mb: Option<f64>,
    rp1_min: Option<f64>,
    rp1_max: Option<f64>,
    mb_max: Option<f64>,
    zeta_min: Option<f64>,
    zeta_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPitchLimits {
    descend_min: Option<f64>,
    ascend_max: Option<f64>,
    min_glide: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeights {
    q_vertical: Option<[f64; 4]>,
    r_vertical: Option<[f64; 2]>,
    q_horizontal: Option<[f64; 2]>,
    r_horizontal: Option<[f64; 1]>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    dt: Option<f64>,
    max_sim_time: Option<f64>,
    surface_depth_threshold: Option<f64>,
    control_period_steps: Option<u32>,
    overshoot_tolerance: Option<f64>,
    max_cycles: Option<u32>,
    max_approaches: Option<u32>,
    detach_speed: Option<bool>,
    initial_heading: Option<f64>,
    gps_noise_std: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurrent {
    depth_min: f64,
    depth_max: f64,
    velocity: [f64; 3],
    period: Option<f64>,
    phase: Option<f64>,
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, InputError> {
    value.ok_or_else(|| InputError::MissingField(name.to_string()))
}

fn defaulted<T: std::fmt::Debug>(value: Option<T>, name: &str, default: T) -> T {
    value.unwrap_or_else(|| {
        log::info!("{name} not given; using default {default:?}");
        default
    })
}

fn check_schema(version: Option<u32>) -> Result<(), InputError> {
    match version {
        None => Err(InputError::MissingField("schema_version".into())),
        Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(InputError::UnsupportedSchema { found: v, expected: SCHEMA_VERSION }),
    }
}

fn finite(name: &str, values: &[f64]) -> Result<(), InputError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(InputError::Range { field: name.to_string(), reason: "must be finite".into() })
    }
}

fn matrix(m: [[f64; 3]; 3]) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| m[i][j])
}

/// Everything a configuration document describes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub glider: GliderConfig,
    pub sim: SimConfig,
    pub current: CurrentField,
}

/// Parses and validates a vehicle configuration document.
pub fn parse_config(text: &str) -> Result<ConfigDocument, InputError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| InputError::Syntax(e.to_string()))?;
    check_schema(raw.schema_version)?;

    let h = required(raw.hydro, "hydro")?;
    let hydro = HydroCoefficients {
        k_d0: required(h.k_d0, "hydro.k_d0")?,
        k_d: required(h.k_d, "hydro.k_d")?,
        k_beta: required(h.k_beta, "hydro.k_beta")?,
        k_l0: required(h.k_l0, "hydro.k_l0")?,
        k_l: required(h.k_l, "hydro.k_l")?,
        k_mr: required(h.k_mr, "hydro.k_mr")?,
        k_p: required(h.k_p, "hydro.k_p")?,
        k_m0: required(h.k_m0, "hydro.k_m0")?,
        k_m: required(h.k_m, "hydro.k_m")?,
        k_q: required(h.k_q, "hydro.k_q")?,
        k_my: required(h.k_my, "hydro.k_my")?,
        k_r: required(h.k_r, "hydro.k_r")?,
    };
    let am = raw.added_mass.unwrap_or_default();
    let added_mass = AddedMass {
        l11: defaulted(am.l11, "added_mass.l11", 0.0),
        l22: defaulted(am.l22, "added_mass.l22", 0.0),
        l33: defaulted(am.l33, "added_mass.l33", 0.0),
        l44: defaulted(am.l44, "added_mass.l44", 0.0),
        l55: defaulted(am.l55, "added_mass.l55", 0.0),
        l66: defaulted(am.l66, "added_mass.l66", 0.0),
        l26: defaulted(am.l26, "added_mass.l26", 0.0),
        l62: defaulted(am.l62, "added_mass.l62", 0.0),
        l35: defaulted(am.l35, "added_mass.l35", 0.0),
        l53: defaulted(am.l53, "added_mass.l53", 0.0),
    };
    let a = required(raw.actuators, "actuators")?;
    let actuators = ActuatorLimits {
        rate_zeta: required(a.rate_zeta, "actuators.rate_zeta")?,
        rate_rp1: required(a.rate_rp1, "actuators.rate_rp1")?,
        rate_mb: required(a.rate_mb, "actuators.rate_mb")?,
        rp1_min: required(a.rp1_min, "actuators.rp1_min")?,
        rp1_max: required(a.rp1_max, "actuators.rp1_max")?,
        mb_max: required(a.mb_max, "actuators.mb_max")?,
        zeta_min: required(a.zeta_min, "actuators.zeta_min")?,
        zeta_max: required(a.zeta_max, "actuators.zeta_max")?,
    };
    let p = required(raw.pitch_limits, "pitch_limits")?;
    let pitch_limits = PitchLimits {
        descend_min: required(p.descend_min, "pitch_limits.descend_min")?,
        ascend_max: required(p.ascend_max, "pitch_limits.ascend_max")?,
        min_glide: defaulted(p.min_glide, "pitch_limits.min_glide", 0.2),
    };
    let dw = LqrWeights::default();
    let w = raw.weights.unwrap_or_default();
    let weights = LqrWeights {
        q_vertical: defaulted(w.q_vertical, "weights.q_vertical", dw.q_vertical),
        r_vertical: defaulted(w.r_vertical, "weights.r_vertical", dw.r_vertical),
        q_horizontal: defaulted(w.q_horizontal, "weights.q_horizontal", dw.q_horizontal),
        r_horizontal: defaulted(w.r_horizontal, "weights.r_horizontal", dw.r_horizontal),
    };
    let glider = GliderConfig {
        m_s: required(raw.m_s, "m_s")?,
        r_s: Vec3::from(required(raw.r_s, "r_s")?),
        m_p: required(raw.m_p, "m_p")?,
        r_b1: required(raw.r_b1, "r_b1")?,
        j_s: matrix(required(raw.j_s, "j_s")?),
        j_p0: matrix(required(raw.j_p0, "j_p0")?),
        rp_offset: required(raw.rp_offset, "rp_offset")?,
        rho_deep: required(raw.rho_deep, "rho_deep")?,
        rho_surface: required(raw.rho_surface, "rho_surface")?,
        k_vh: required(raw.k_vh, "k_vh")?,
        rho_gradient: defaulted(raw.rho_gradient, "rho_gradient", 0.0),
        waterplane_area: defaulted(raw.waterplane_area, "waterplane_area", 0.0),
        hydro,
        added_mass,
        actuators,
        pitch_limits,
        weights,
        tdl2_literal: defaulted(raw.tdl2_literal, "tdl2_literal", false),
        lift_drag_literal: defaulted(raw.lift_drag_literal, "lift_drag_literal", false),
    };
    finite("r_s", glider.r_s.as_slice())?;
    finite("j_s", glider.j_s.as_slice())?;
    finite("j_p0", glider.j_p0.as_slice())?;
    let h = &glider.hydro;
    finite(
        "hydro",
        &[h.k_d0, h.k_d, h.k_beta, h.k_l0, h.k_l, h.k_mr, h.k_p, h.k_m0, h.k_m, h.k_q, h.k_my, h.k_r],
    )?;
    finite("k_vh", &[glider.k_vh, glider.rho_gradient, glider.r_b1])?;
    finite(
        "pitch_limits",
        &[glider.pitch_limits.descend_min, glider.pitch_limits.ascend_max, glider.pitch_limits.min_glide],
    )?;
    glider.validate()?;

    let d = SimConfig::default();
    let s = raw.sim.unwrap_or_default();
    let sim = SimConfig {
        dt: defaulted(s.dt, "sim.dt", d.dt),
        max_sim_time: defaulted(s.max_sim_time, "sim.max_sim_time", d.max_sim_time),
        surface_depth_threshold: defaulted(s.surface_depth_threshold, "sim.surface_depth_threshold", d.surface_depth_threshold),
        control_period_steps: defaulted(s.control_period_steps, "sim.control_period_steps", d.control_period_steps),
        overshoot_tolerance: defaulted(s.overshoot_tolerance, "sim.overshoot_tolerance", d.overshoot_tolerance),
        max_cycles: s.max_cycles,
        max_approaches: defaulted(s.max_approaches, "sim.max_approaches", d.max_approaches),
        detach_speed: defaulted(s.detach_speed, "sim.detach_speed", d.detach_speed),
        initial_heading: defaulted(s.initial_heading, "sim.initial_heading", d.initial_heading),
        gps_noise_std: defaulted(s.gps_noise_std, "sim.gps_noise_std", d.gps_noise_std),
        seed: defaulted(s.seed, "sim.seed", d.seed),
    };
    sim.validate().map_err(|reason| InputError::Range { field: "sim".into(), reason })?;

    let current = CurrentField {
        layers: raw
            .current
            .unwrap_or_default()
            .into_iter()
            .map(|c| CurrentLayer {
                depth_min: c.depth_min,
                depth_max: c.depth_max,
                velocity: Vec3::from(c.velocity),
                period: c.period,
                phase: c.phase,
            })
            .collect(),
    };
    current.validate().map_err(|reason| InputError::Range { field: "current".into(), reason })?;
    Ok(ConfigDocument { glider, sim, current })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTask {
    schema_version: Option<u32>,
    origin: Option<RawOrigin>,
    waypoints: Option<Vec<RawWaypoint>>,
    acceptance_radius_m: Option<f64>,
    min_loops: Option<u32>,
    pitch_mode: Option<String>,
    fixed_pitch_rad: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOrigin {
    lat: Option<f64>,
    lon: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWaypoint {
    lat: Option<f64>,
    lon: Option<f64>,
    depth_m: Option<f64>,
    speed_mps: Option<f64>,
}

fn check_lat_lon(prefix: &str, lat: f64, lon: f64) -> Result<(), InputError> {
    if !(-90.0..=90.0).contains(&lat) {
        return Err(InputError::Range { field: format!("{prefix}.lat"), reason: format!("{lat} not in [-90, 90]") });
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(InputError::Range { field: format!("{prefix}.lon"), reason: format!("{lon} not in [-180, 180]") });
    }
    Ok(())
}

/// Parses and validates a mission task document.
pub fn parse_task(text: &str) -> Result<MissionTask, InputError> {
    let raw: RawTask = toml::from_str(text).map_err(|e| InputError::Syntax(e.to_string()))?;
    check_schema(raw.schema_version)?;
    let o = required(raw.origin, "origin")?;
    let origin = GeoOrigin { lat0: required(o.lat, "origin.lat")?, lon0: required(o.lon, "origin.lon")? };
    check_lat_lon("origin", origin.lat0, origin.lon0)?;

    let raw_wps = required(raw.waypoints, "waypoints")?;
    if raw_wps.is_empty() {
        return Err(InputError::Range { field: "waypoints".into(), reason: "at least one waypoint is required".into() });
    }
    let mut waypoints = Vec::with_capacity(raw_wps.len());
    for (i, w) in raw_wps.into_iter().enumerate() {
        let name = |f: &str| format!("waypoints[{i}].{f}");
        let wp = Waypoint {
            lat: required(w.lat, &name("lat"))?,
            lon: required(w.lon, &name("lon"))?,
            target_depth: required(w.depth_m, &name("depth_m"))?,
            desired_speed: required(w.speed_mps, &name("speed_mps"))?,
        };
        check_lat_lon(&format!("waypoints[{i}]"), wp.lat, wp.lon)?;
        if !(wp.target_depth > 0.0 && wp.target_depth.is_finite()) {
            return Err(InputError::Range { field: name("depth_m"), reason: format!("must be > 0, got {}", wp.target_depth) });
        }
        if !(wp.desired_speed > 0.0 && wp.desired_speed.is_finite()) {
            return Err(InputError::Range { field: name("speed_mps"), reason: format!("must be > 0, got {}", wp.desired_speed) });
        }
        waypoints.push(wp);
    }
    let acceptance_radius = required(raw.acceptance_radius_m, "acceptance_radius_m")?;
    if !(acceptance_radius > 0.0 && acceptance_radius.is_finite()) {
        return Err(InputError::Range {
            field: "acceptance_radius_m".into(),
            reason: format!("must be > 0, got {acceptance_radius}"),
        });
    }
    let min_loops = defaulted(raw.min_loops, "min_loops", 1);
    if min_loops < 1 {
        return Err(InputError::Range { field: "min_loops".into(), reason: "must be >= 1".into() });
    }
    let mode = defaulted(raw.pitch_mode, "pitch_mode", "recursive".to_string());
    let pitch_mode = match (mode.as_str(), raw.fixed_pitch_rad) {
        ("recursive", None) => PitchMode::Recursive,
        ("recursive", Some(_)) => {
            return Err(InputError::Range {
                field: "fixed_pitch_rad".into(),
                reason: "only allowed with pitch_mode = \"fixed\"".into(),
            })
        }
        ("fixed", Some([descend, ascend])) => {
            if !(descend < 0.0 && ascend > 0.0 && descend.is_finite() && ascend.is_finite()) {
                return Err(InputError::Range {
                    field: "fixed_pitch_rad".into(),
                    reason: format!("need [descend < 0, ascend > 0], got [{descend}, {ascend}]"),
                });
            }
            PitchMode::Fixed { descend, ascend }
        }
        ("fixed", None) => return Err(InputError::MissingField("fixed_pitch_rad".into())),
        (other, _) => {
            return Err(InputError::Range {
                field: "pitch_mode".into(),
                reason: format!("expected \"recursive\" or \"fixed\", got {other:?}"),
            })
        }
    };
    Ok(MissionTask { origin, waypoints, acceptance_radius, min_loops, pitch_mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelError;
    use crate::{REFERENCE_CONFIG_TOML, REFERENCE_TASK_TOML};

    fn without_line(text: &str, key: &str) -> String {
        text.lines().filter(|l| !l.trim_start().starts_with(key)).collect::<Vec<_>>().join("\n")
    }

    #[test]
    fn reference_config_parses_and_validates() {
        let doc = parse_config(REFERENCE_CONFIG_TOML).unwrap();
        doc.glider.validate().unwrap();
        assert!(doc.glider.added_mass_checked().is_ok());
    }

    #[test]
    fn missing_mass_is_named() {
        let text = without_line(REFERENCE_CONFIG_TOML, "m_s ");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.to_string(), "missing field m_s");
    }

    #[test]
    fn asymmetric_added_mass_is_rejected() {
        let text = REFERENCE_CONFIG_TOML.replace("l62 = 1.0", "l62 = 2.0");
        assert_ne!(text, REFERENCE_CONFIG_TOML);
        match parse_config(&text) {
            Err(InputError::Model(ModelError::AsymmetricAddedMass { pair, .. })) => assert_eq!(pair, "l26/l62"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = REFERENCE_CONFIG_TOML.replace("[hydro]", "[hydro]\nk_dd = 1.0");
        assert!(matches!(parse_config(&text), Err(InputError::Syntax(_))));
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let text = REFERENCE_CONFIG_TOML.replace("schema_version = 1", "schema_version = 7");
        assert!(matches!(parse_config(&text), Err(InputError::UnsupportedSchema { found: 7, .. })));
    }

    #[test]
    fn reference_task_parses() {
        let task = parse_task(REFERENCE_TASK_TOML).unwrap();
        assert_eq!(task.waypoints.len(), 5);
        assert_eq!(task.pitch_mode, PitchMode::Recursive);
    }

    #[test]
    fn task_range_violations() {
        let bad_lat = REFERENCE_TASK_TOML.replacen("lat = ", "lat = 95.0 + 0 * ", 1);
        assert!(parse_task(&bad_lat).is_err());
        let bad_radius = REFERENCE_TASK_TOML.replace("acceptance_radius_m = 15.0", "acceptance_radius_m = -1.0");
        assert!(matches!(parse_task(&bad_radius), Err(InputError::Range { .. })));
        let fixed = REFERENCE_TASK_TOML.replace("pitch_mode = \"recursive\"", "pitch_mode = \"fixed\"");
        assert_eq!(parse_task(&fixed).unwrap_err().to_string(), "missing field fixed_pitch_rad");
        let fixed = format!("{}\nfixed_pitch_rad = [-0.6, 0.7]\n", fixed.replace("[[waypoints]]", "[[__wp]]"));
        let fixed = fixed.replacen("[[__wp]]", "fixed_pitch_rad_placeholder", 0);
        assert!(parse_task(&fixed).is_err());
    }

    #[test]
    fn fixed_pitch_task() {
        let text = r#"
schema_version = 1
acceptance_radius_m = 10.0
min_loops = 1
pitch_mode = "fixed"
fixed_pitch_rad = [-0.6, 0.7]

[origin]
lat = 30.0
lon = 120.0

[[waypoints]]
lat = 30.001
lon = 120.0
depth_m = 30.0
speed_mps = 0.5
"#;
        let task = parse_task(text).unwrap();
        assert_eq!(task.pitch_mode, PitchMode::Fixed { descend: -0.6, ascend: 0.7 });
        assert!(parse_task(&text.replace("[-0.6, 0.7]", "[0.6, 0.7]")).is_err());
        assert!(parse_task(&text.replace("lat = 30.001", "lat = 30.001\nspeed = 1.0")).is_err());
    }
}

//! Pre-mission reachability: where a glider turning at its tightest rate and
//! slowest speed can get, and whether a waypoint falls inside that turn.

use serde::Serialize;
use thiserror::Error;

use crate::frames::{wrap_angle, Vec3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnSpec {
    pub theta_i: f64,
    pub v_lower: f64,
    pub r_upper: f64,
}

impl TurnSpec {
    pub fn min_turn_radius(&self) -> f64 {
        self.v_lower / self.r_upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReachabilityResult {
    pub reachable: bool,
    pub intersection: Option<Vec3>,
    pub min_turn_radius: f64,
    pub turn_sign: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ManeuverError {
    #[error("start and target coincide")]
    ZeroLengthSegment,
    #[error("turn spec needs v_lower > 0 and r_upper > 0 (got {v_lower}, {r_upper})")]
    InvalidSpec { v_lower: f64, r_upper: f64 },
}

/// Horizontal displacement after turning for `t` seconds at rate `sign * r_upper`.
pub fn min_turn_position(spec: &TurnSpec, t: f64, sign: f64) -> (f64, f64) {
    let r = sign.signum() * spec.r_upper;
    let v = spec.v_lower;
    let th = spec.theta_i;
    // Chord of the arc: length v t sinc(r t / 2) along the mean heading.
    let half = 0.5 * r * t;
    let sinc = if half.abs() < 1e-8 { 1.0 - half * half / 6.0 } else { half.sin() / half };
    let chord = v * t * sinc;
    (chord * (th + half).cos(), chord * (th + half).sin())
}

/// Shortest turn direction from heading `theta_c` to `theta_d`; ties turn positive.
pub fn turn_direction(theta_c: f64, theta_d: f64) -> f64 {
    if wrap_angle(theta_d - theta_c) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Whether `p_target` can be reached from `p_init` with heading `spec.theta_i` while
/// turning no tighter than the minimum radius.
pub fn reachability_check(
    p_init: &Vec3,
    p_target: &Vec3,
    spec: &TurnSpec,
) -> Result<ReachabilityResult, ManeuverError> {
    if !(spec.v_lower > 0.0 && spec.r_upper > 0.0) {
        return Err(ManeuverError::InvalidSpec { v_lower: spec.v_lower, r_upper: spec.r_upper });
    }
    let d = Vec3::new(p_target.x - p_init.x, p_target.y - p_init.y, 0.0);
    if d.norm() == 0.0 {
        return Err(ManeuverError::ZeroLengthSegment);
    }
    let radius = spec.min_turn_radius();
    let theta_d = d.y.atan2(d.x);
    let sign = turn_direction(spec.theta_i, theta_d);
    let (s, c) = spec.theta_i.sin_cos();
    // Centre of the tightest turn on the chosen side; the start point lies on its rim.
    let centre = Vec3::new(p_init.x, p_init.y, 0.0) + sign * radius * Vec3::new(-s, c, 0.0);
    let start = Vec3::new(p_init.x, p_init.y, 0.0);
    // Second crossing of the segment start + t d with the circle (the first is t = 0).
    let t_exit = -2.0 * d.dot(&(start - centre)) / d.norm_squared();
    let reachable = t_exit <= 1.0;
    let intersection = reachable.then(|| {
        let p = start + t_exit.max(0.0) * d;
        Vec3::new(p.x, p.y, p_target.z)
    });
    Ok(ReachabilityResult { reachable, intersection, min_turn_radius: radius, turn_sign: sign })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec(theta_i: f64) -> TurnSpec {
        TurnSpec { theta_i, v_lower: 0.5, r_upper: 0.1 }
    }

    #[test]
    fn quarter_and_full_circle() {
        let (x, y) = min_turn_position(&spec(0.0), PI / (2.0 * 0.1), 1.0);
        assert_relative_eq!(x, 5.0, epsilon = 1e-12);
        assert_relative_eq!(y, 5.0, epsilon = 1e-12);
        let (x, y) = min_turn_position(&spec(0.3), 2.0 * PI / 0.1, -1.0);
        assert!(x.abs() < 1e-12 && y.abs() < 1e-12);
    }

    #[test]
    fn straight_line_limit_matches_series() {
        let s = TurnSpec { theta_i: 0.7, v_lower: 0.5, r_upper: 1e-8 };
        let t = 1.0;
        let (x, y) = min_turn_position(&s, t, 1.0);
        // Second-order Taylor expansion of the arc in r.
        let (v, th, r) = (0.5, 0.7f64, 1e-8);
        let xs = v * t * th.cos() - 0.5 * v * r * t * t * th.sin();
        let ys = v * t * th.sin() + 0.5 * v * r * t * t * th.cos();
        assert!((x - xs).abs() < 1e-9 && (y - ys).abs() < 1e-9);
    }

    #[test]
    fn turn_direction_examples() {
        assert_eq!(turn_direction(0.0, FRAC_PI_2), 1.0);
        assert_eq!(turn_direction(0.0, -FRAC_PI_2), -1.0);
        let e = -3.0 - 3.0 + 2.0 * PI;
        assert!(e > 0.28 && e < 0.29);
        assert_eq!(turn_direction(3.0, -3.0), 1.0);
        assert_eq!(turn_direction(1.0, 1.0), 1.0);
    }

    #[test]
    fn reachability_examples() {
        let s = spec(0.0);
        let r = s.min_turn_radius();
        let ahead = reachability_check(&Vec3::zeros(), &Vec3::new(10.0 * r, 0.0, 0.0), &s).unwrap();
        assert!(ahead.reachable && ahead.intersection.is_some());
        let centre = reachability_check(&Vec3::zeros(), &Vec3::new(0.0, r, 0.0), &s).unwrap();
        assert!(!centre.reachable && centre.intersection.is_none());
        let behind = reachability_check(&Vec3::zeros(), &Vec3::new(-10.0 * r, 0.0, 0.0), &s).unwrap();
        assert!(behind.reachable);
        // Arc-sweep oracle: after the half turn the vehicle sits 2R abeam heading back,
        // with the target now ahead of it and well outside the circle.
        let (x, y) = min_turn_position(&s, PI / s.r_upper, behind.turn_sign);
        assert!(x.abs() < 1e-9 && (y.abs() - 2.0 * r).abs() < 1e-9);
        let to_target = Vec3::new(-10.0 * r - x, -y, 0.0);
        assert!(to_target.x < 0.0 && to_target.norm() > 2.0 * r);
        assert_eq!(
            reachability_check(&Vec3::zeros(), &Vec3::zeros(), &s),
            Err(ManeuverError::ZeroLengthSegment)
        );
    }

    #[test]
    fn tangent_boundary_counts_as_reachable() {
        let s = spec(0.0);
        let r = s.min_turn_radius();
        let on_rim = reachability_check(&Vec3::zeros(), &Vec3::new(r, r, 0.0), &s).unwrap();
        assert!(on_rim.reachable);
    }

    proptest! {
        #[test]
        fn arc_stays_within_diameter(th in -PI..PI, v in 0.05f64..2.0, r in 0.001f64..1.0, t in 0.0f64..1e4, sign in prop::bool::ANY) {
            let s = TurnSpec { theta_i: th, v_lower: v, r_upper: r };
            let (x, y) = min_turn_position(&s, t, if sign { 1.0 } else { -1.0 });
            prop_assert!(x.hypot(y) <= 2.0 * v / r * (1.0 + 1e-12));
        }

        #[test]
        fn direction_invariant_under_full_turns(a in -10.0f64..10.0, b in -10.0f64..10.0, k in -3i32..3) {
            let shift = 2.0 * PI * f64::from(k);
            let e = wrap_angle(b - a);
            prop_assume!(e.abs() > 1e-9 && (e.abs() - PI).abs() > 1e-9);
            prop_assert_eq!(turn_direction(a, b), turn_direction(a + shift, b));
            prop_assert_eq!(turn_direction(a, b), turn_direction(a, b - shift));
        }

        #[test]
        fn reachability_monotone_along_bearing(th in -PI..PI, bearing in -PI..PI, d in 0.1f64..50.0, extra in 0.0f64..100.0) {
            let s = spec(th);
            let dir = Vec3::new(bearing.cos(), bearing.sin(), 0.0);
            let near = reachability_check(&Vec3::zeros(), &(dir * d), &s).unwrap();
            let far = reachability_check(&Vec3::zeros(), &(dir * (d + extra)), &s).unwrap();
            prop_assert!(!near.reachable || far.reachable);
        }

        #[test]
        fn reachable_iff_outside_turn_circle(th in -PI..PI, x in -30.0f64..30.0, y in -30.0f64..30.0) {
            let s = spec(th);
            let target = Vec3::new(x, y, 0.0);
            prop_assume!(target.norm() > 1e-3);
            let res = reachability_check(&Vec3::zeros(), &target, &s).unwrap();
            let r = s.min_turn_radius();
            let c = res.turn_sign * r * Vec3::new(-th.sin(), th.cos(), 0.0);
            let dist = (target - c).norm();
            prop_assume!((dist - r).abs() > 1e-6);
            prop_assert_eq!(res.reachable, dist > r);
        }
    }
}

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::frames::Vec3;
use crate::model::CurrentSample;

/// One horizontal slab of water with a uniform (optionally oscillating) current.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurrentLayer {
    pub depth_min: f64,
    pub depth_max: f64,
    /// NED velocity, m/s.
    pub velocity: Vec3,
    pub period: Option<f64>,
    pub phase: Option<f64>,
}

/// Depth-stratified current profile. Water outside every layer is still.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CurrentField {
    pub layers: Vec<CurrentLayer>,
}

impl CurrentField {
    pub fn still() -> Self {
        Self::default()
    }

    /// Checks ordering, overlap and periods. Returns a description of the first problem.
    pub fn validate(&self) -> Result<(), String> {
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.depth_min < l.depth_max) {
                return Err(format!("current layer {i}: depth_min must be below depth_max"));
            }
            if let Some(p) = l.period {
                if !(p > 0.0 && p.is_finite()) {
                    return Err(format!("current layer {i}: period must be > 0"));
                }
            }
            if !l.velocity.iter().all(|v| v.is_finite()) {
                return Err(format!("current layer {i}: velocity must be finite"));
            }
        }
        let mut sorted: Vec<_> = self.layers.iter().collect();
        sorted.sort_by(|a, b| a.depth_min.total_cmp(&b.depth_min));
        for pair in sorted.windows(2) {
            if pair[1].depth_min < pair[0].depth_max {
                return Err("current layers overlap".to_string());
            }
        }
        Ok(())
    }
}

/// Current at position `p` (NED, z down) and time `t`.
pub fn current_at(field: &CurrentField, p: &Vec3, t: f64) -> CurrentSample {
    let z = p.z;
    let layer = field
        .layers
        .iter()
        .find(|l| z >= l.depth_min && z < l.depth_max);
    let v_f = match layer {
        None => Vec3::zeros(),
        Some(l) => match l.period {
            Some(period) => l.velocity * (2.0 * PI * t / period + l.phase.unwrap_or(0.0)).cos(),
            None => l.velocity,
        },
    };
    CurrentSample { v_f, omega_f: Vec3::zeros() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layered() -> CurrentField {
        CurrentField {
            layers: vec![
                CurrentLayer {
                    depth_min: 0.0,
                    depth_max: 10.0,
                    velocity: Vec3::new(0.1, 0.0, 0.0),
                    period: None,
                    phase: None,
                },
                CurrentLayer {
                    depth_min: 10.0,
                    depth_max: 50.0,
                    velocity: Vec3::new(0.0, -0.2, 0.0),
                    period: Some(600.0),
                    phase: Some(0.3),
                },
            ],
        }
    }

    #[test]
    fn constant_layer_velocity() {
        let s = current_at(&layered(), &Vec3::new(0.0, 0.0, 5.0), 123.0);
        assert_eq!(s.v_f, Vec3::new(0.1, 0.0, 0.0));
        assert_eq!(s.omega_f, Vec3::zeros());
    }

    #[test]
    fn periodic_layer_repeats() {
        let f = layered();
        let p = Vec3::new(0.0, 0.0, 20.0);
        let a = current_at(&f, &p, 0.0);
        let b = current_at(&f, &p, 600.0);
        assert!((a.v_f - b.v_f).norm() < 1e-15);
        assert!((a.v_f.y + 0.2 * 0.3f64.cos()).abs() < 1e-15);
    }

    #[test]
    fn outside_layers_is_still() {
        let s = current_at(&layered(), &Vec3::new(0.0, 0.0, 80.0), 0.0);
        assert_eq!(s.v_f, Vec3::zeros());
        let s = current_at(&layered(), &Vec3::new(0.0, 0.0, -1.0), 0.0);
        assert_eq!(s.v_f, Vec3::zeros());
    }

    #[test]
    fn overlap_is_rejected() {
        let mut f = layered();
        f.layers[1].depth_min = 5.0;
        assert!(f.validate().is_err());
        assert!(layered().validate().is_ok());
    }
}

//! WGS84 geodetic coordinates to a local NED tangent plane and back.

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::frames::Vec3;

pub const WGS84_A: f64 = 6_378_137.0;
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// Tangent-plane anchor of the local NED frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoOrigin {
    pub lat0: f64,
    pub lon0: f64,
}

fn e2() -> f64 {
    WGS84_F * (2.0 - WGS84_F)
}

/// Earth-centred Earth-fixed position of a point on the ellipsoid surface.
pub fn geodetic_to_ecef(lat_deg: f64, lon_deg: f64) -> Vec3 {
    let (lat, lon) = (lat_deg.to_radians(), lon_deg.to_radians());
    let n = WGS84_A / (1.0 - e2() * lat.sin().powi(2)).sqrt();
    Vec3::new(
        n * lat.cos() * lon.cos(),
        n * lat.cos() * lon.sin(),
        n * (1.0 - e2()) * lat.sin(),
    )
}

/// North and east offsets of `(lat, lon)` from the origin; the down component is zero.
pub fn geodetic_to_ned(lat: f64, lon: f64, origin: &GeoOrigin) -> Vec3 {
    let d = geodetic_to_ecef(lat, lon) - geodetic_to_ecef(origin.lat0, origin.lon0);
    let (sp, cp) = origin.lat0.to_radians().sin_cos();
    let (sl, cl) = origin.lon0.to_radians().sin_cos();
    let north = -sp * cl * d.x - sp * sl * d.y + cp * d.z;
    let east = -sl * d.x + cl * d.y;
    Vec3::new(north, east, 0.0)
}

/// Inverse of [`geodetic_to_ned`] for the horizontal components, by Newton iteration.
pub fn ned_to_geodetic(p: &Vec3, origin: &GeoOrigin) -> (f64, f64) {
    let target = Vector2::new(p.x, p.y);
    let f = |x: &Vector2<f64>| {
        let n = geodetic_to_ned(x[0], x[1], origin);
        Vector2::new(n.x, n.y)
    };
    let m_per_deg = WGS84_A.to_radians();
    let mut x = Vector2::new(
        origin.lat0 + p.x / m_per_deg,
        origin.lon0 + p.y / (m_per_deg * origin.lat0.to_radians().cos().max(1e-6)),
    );
    for _ in 0..20 {
        let r = f(&x) - target;
        if r.norm() < 1e-9 {
            break;
        }
        let h = 1e-7;
        let mut jac = Matrix2::zeros();
        for i in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            jac.set_column(i, &((f(&xp) - f(&xm)) / (2.0 * h)));
        }
        match jac.lu().solve(&r) {
            Some(step) => x -= step,
            None => break,
        }
    }
    (x[0], x[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Meridian arc length from the equator by composite Simpson quadrature.
    fn meridian_arc(lat_deg: f64) -> f64 {
        let e2 = WGS84_F * (2.0 - WGS84_F);
        let m = |phi: f64| WGS84_A * (1.0 - e2) / (1.0 - e2 * phi.sin().powi(2)).powf(1.5);
        let n = 2000;
        let b = lat_deg.to_radians();
        let h = b / n as f64;
        let mut s = m(0.0) + m(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * m(i as f64 * h);
        }
        s * h / 3.0
    }

    /// Length of one degree of longitude along a parallel.
    fn parallel_degree(lat_deg: f64) -> f64 {
        let e2 = WGS84_F * (2.0 - WGS84_F);
        let phi = lat_deg.to_radians();
        let n = WGS84_A / (1.0 - e2 * phi.sin().powi(2)).sqrt();
        n * phi.cos() * 1f64.to_radians()
    }

    #[test]
    fn origin_maps_to_zero() {
        let o = GeoOrigin { lat0: 37.5, lon0: -122.1 };
        assert!(geodetic_to_ned(37.5, -122.1, &o).norm() < 1e-9);
    }

    #[test]
    fn one_degree_north_at_equator() {
        let o = GeoOrigin { lat0: 0.0, lon0: 0.0 };
        let p = geodetic_to_ned(1.0, 0.0, &o);
        let arc = meridian_arc(1.0);
        assert!((arc - 110_574.0).abs() < 2.0, "oracle arc {arc}");
        assert!((p.x - arc).abs() / arc < 1e-3, "north {} vs {arc}", p.x);
        assert!(p.y.abs() < 1e-6);
    }

    #[test]
    fn east_offset_scales_with_latitude() {
        let o = GeoOrigin { lat0: 45.0, lon0: 10.0 };
        let p = geodetic_to_ned(45.0, 10.01, &o);
        let expected = parallel_degree(45.0) * 0.01;
        let equatorial = parallel_degree(0.0) * 0.01;
        assert!((p.y - expected).abs() / expected < 5e-3);
        assert!((p.y / equatorial - 45f64.to_radians().cos()).abs() / 45f64.to_radians().cos() < 5e-3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]
        #[test]
        fn round_trip_within_ten_km(
            lat0 in -80.0f64..80.0,
            lon0 in -179.0f64..179.0,
            n in -10_000.0f64..10_000.0,
            e in -10_000.0f64..10_000.0,
        ) {
            let o = GeoOrigin { lat0, lon0 };
            let (lat, lon) = ned_to_geodetic(&Vec3::new(n, e, 0.0), &o);
            let back = geodetic_to_ned(lat, lon, &o);
            prop_assert!((back.x - n).abs() < 1e-6 && (back.y - e).abs() < 1e-6);
        }
    }
}

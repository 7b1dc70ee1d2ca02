use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::unit;

/// The cone `Σ` with vertex at the origin: the whole plane or a sector
/// swept counter-clockwise from `angle_start` to `angle_end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConeSpec {
    #[default]
    FullPlane,
    Sector { angle_start: f64, angle_end: f64 },
}

impl ConeSpec {
    pub fn sector(angle_start: f64, angle_end: f64) -> Self {
        ConeSpec::Sector {
            angle_start,
            angle_end,
        }
    }

    pub fn quarter() -> Self {
        Self::sector(0.0, std::f64::consts::FRAC_PI_2)
    }

    pub fn validate(&self) -> Result<()> {
        if let ConeSpec::Sector {
            angle_start,
            angle_end,
        } = *self
        {
            let width = angle_end - angle_start;
            if !(angle_start.is_finite() && angle_end.is_finite()) || !(width > 0.0) || width > TAU {
                return Err(Error::config(format!(
                    "sector width must lie in (0, 2π], got {width}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_full(&self) -> bool {
        matches!(self, ConeSpec::FullPlane)
    }

    /// Angular range of the cone, `(start, end)` with `end - start ∈ (0, 2π]`.
    pub fn aperture(&self) -> (f64, f64) {
        match *self {
            ConeSpec::FullPlane => (0.0, TAU),
            ConeSpec::Sector {
                angle_start,
                angle_end,
            } => (angle_start, angle_end),
        }
    }

    pub fn width(&self) -> f64 {
        let (a, b) = self.aperture();
        b - a
    }

    /// Unit directions of the two bounding rays, if any.
    pub fn rays(&self) -> Option<[[f64; 2]; 2]> {
        match *self {
            ConeSpec::FullPlane => None,
            ConeSpec::Sector {
                angle_start,
                angle_end,
            } => Some([unit(angle_start), unit(angle_end)]),
        }
    }

    /// Offset of the polar angle of `x` from the start ray, in `[0, 2π)`.
    pub fn angle_offset(&self, x: [f64; 2]) -> f64 {
        let (a, _) = self.aperture();
        (x[1].atan2(x[0]) - a).rem_euclid(TAU)
    }

    /// Closed-cone membership with an angular tolerance.
    pub fn contains(&self, x: [f64; 2], angular_tol: f64) -> bool {
        match self {
            ConeSpec::FullPlane => true,
            ConeSpec::Sector { .. } => {
                if x == [0.0, 0.0] {
                    return true;
                }
                let off = self.angle_offset(x);
                off <= self.width() + angular_tol || off >= TAU - angular_tol
            }
        }
    }

    /// Index of the ray `x` lies on (within `tol`, Euclidean distance scaled by `|x|`).
    pub fn ray_of(&self, x: [f64; 2], tol: f64) -> Option<usize> {
        let rays = self.rays()?;
        let len = x[0].hypot(x[1]);
        if len == 0.0 {
            return None;
        }
        rays.iter().position(|d| {
            let along = x[0] * d[0] + x[1] * d[1];
            let across = (x[0] * d[1] - x[1] * d[0]).abs();
            along > 0.0 && across <= tol * len.max(1.0)
        })
    }

    /// Outward unit normal of `∂Σ` along ray `k`.
    pub fn ray_outward_normal(&self, k: usize) -> Option<[f64; 2]> {
        let rays = self.rays()?;
        let d = rays[k];
        // The cone lies to the left of the start ray and to the right of the end ray.
        Some(if k == 0 { [d[1], -d[0]] } else { [-d[1], d[0]] })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn sector_membership() {
        let c = ConeSpec::quarter();
        assert!(c.contains([1.0, 1.0], 0.0));
        assert!(c.contains([1.0, 0.0], 0.0));
        assert!(!c.contains([-1.0, 1.0], 1e-12));
        assert!(!c.contains([1.0, -0.1], 1e-12));
        assert!(ConeSpec::FullPlane.contains([-3.0, -1.0], 0.0));
        let wide = ConeSpec::sector(-PI / 3.0, PI);
        assert!(wide.contains([0.5, -0.5], 0.0));
    }

    #[test]
    fn degenerate_sector_rejected() {
        assert!(ConeSpec::sector(1.0, 1.0).validate().is_err());
        assert!(ConeSpec::sector(0.0, 7.0).validate().is_err());
        assert!(ConeSpec::sector(0.0, FRAC_PI_2).validate().is_ok());
    }

    #[test]
    fn ray_normals_point_out() {
        let c = ConeSpec::quarter();
        assert_eq!(c.ray_outward_normal(0).unwrap(), [0.0, -1.0]);
        let n = c.ray_outward_normal(1).unwrap();
        assert!((n[0] + 1.0).abs() < 1e-15 && n[1].abs() < 1e-15);
        assert_eq!(c.ray_of([0.3, 0.0], 1e-12), Some(0));
        assert_eq!(c.ray_of([0.0, 0.3], 1e-12), Some(1));
        assert_eq!(c.ray_of([0.3, 0.3], 1e-12), None);
    }

    #[test]
    fn json_forms() {
        let c: ConeSpec = serde_json::from_str(r#"{"kind":"full_plane"}"#).unwrap();
        assert!(c.is_full());
        let s: ConeSpec =
            serde_json::from_str(r#"{"kind":"sector","angle_start":0,"angle_end":1.5}"#).unwrap();
        assert_eq!(s, ConeSpec::sector(0.0, 1.5));
    }
}

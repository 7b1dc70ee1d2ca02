//! A `C¹` norm whose dual is not `C¹`.
//!
//! The unit ball of the "flower" norm is the convex hull of the four discs of
//! radius 1/2 centred at `(±1/2, 0)` and `(0, ±1/2)`. Its dual unit ball is
//! bounded by four parabolic arcs with focus at the origin, e.g.
//! `ξ1 = 1 - ξ2²/4` in the right quadrant, meeting at corners
//! `(±ξ̄, ±ξ̄)` with `ξ̄ = 2(√2 - 1)`.

use std::f64::consts::FRAC_PI_4;

use crate::error::{Error, Result};

use super::NormSpec;

/// Corner coordinate `ξ̄ = 2(√2 - 1)` of the dual unit ball.
pub const FLOWER_CORNER: f64 = 2.0 * (std::f64::consts::SQRT_2 - 1.0);

pub fn flower_spec() -> NormSpec {
    NormSpec::DiscHullGauge {
        centers: vec![[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]],
        radii: vec![0.5; 4],
    }
}

/// Point of the dual unit sphere with polar angle `theta ∈ (-π/4, π/4)`.
pub fn flower_dual_boundary(theta: f64) -> Result<[f64; 2]> {
    if !(theta.abs() < FRAC_PI_4) {
        return Err(Error::domain(format!(
            "flower dual parametrization needs |θ| < π/4, got {theta}"
        )));
    }
    let c = theta.cos();
    Ok([2.0 * c / (1.0 + c), 2.0 * theta.sin() / (1.0 + c)])
}

/// The parabola bounding the right quadrant of the dual ball: `ξ1 = 1 - ξ2²/4`.
pub fn right_parabola(xi2: f64) -> f64 {
    1.0 - 0.25 * xi2 * xi2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertex_and_corner() {
        assert_eq!(flower_dual_boundary(0.0).unwrap(), [1.0, 0.0]);
        let p = flower_dual_boundary(FRAC_PI_4 - 1e-12).unwrap();
        assert!((p[0] - FLOWER_CORNER).abs() < 1e-11);
        assert!((p[1] - FLOWER_CORNER).abs() < 1e-11);
        assert!((FLOWER_CORNER - 0.828427).abs() < 1e-6);
    }

    #[test]
    fn thirty_degrees() {
        let p = flower_dual_boundary(std::f64::consts::FRAC_PI_6).unwrap();
        let c = 3f64.sqrt() / 2.0;
        assert!((p[0] - 2.0 * c / (1.0 + c)).abs() < 1e-15);
        assert!((p[1] - 1.0 / (1.0 + c)).abs() < 1e-15);
        assert!((p[0] - 0.92820).abs() < 1e-5 && (p[1] - 0.53590).abs() < 1e-5);
        assert!((p[0] - right_parabola(p[1])).abs() < 1e-14);
    }

    #[test]
    fn out_of_range_is_domain_error() {
        assert!(matches!(flower_dual_boundary(FRAC_PI_4), Err(Error::Domain(_))));
        assert!(flower_dual_boundary(f64::NAN).is_err());
    }
}

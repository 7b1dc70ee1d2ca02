use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Domain;
use crate::norm::{golden_max, Norm};

pub const RADII_SAMPLES: usize = 4096;

/// `R1 = min H0` and `R2 = max H0` over `Γ0`, with points attaining them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadiiBounds {
    pub r1: f64,
    pub r2: f64,
    pub z1: [f64; 2],
    pub z2: [f64; 2],
    /// Boundary angles of `z1` and `z2`.
    pub phi1: f64,
    pub phi2: f64,
}

/// Dense sampling of `H0` along the boundary parametrization followed by a
/// golden-section polish around the best samples. Ties go to the smallest
/// boundary parameter.
pub fn radii_bounds(domain: &Domain, norm: &Norm) -> Result<RadiiBounds> {
    let (a, b) = domain.cone().aperture();
    if !(b > a) {
        return Err(Error::domain("Γ0 is empty"));
    }
    let full = domain.cone().is_full();
    let n = RADII_SAMPLES;
    let step = (b - a) / if full { n as f64 } else { (n - 1) as f64 };
    let f = |phi: f64| norm.eval(&domain.boundary_point(phi));
    let values: Vec<f64> = (0..n).map(|k| f(a + step * k as f64)).collect();

    let pick = |sign: f64| -> (f64, f64) {
        let g = |phi: f64| sign * f(phi);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| (sign * values[j]).total_cmp(&(sign * values[i])).then(i.cmp(&j)));
        let mut best_phi = a + step * order[0] as f64;
        let mut best = g(best_phi);
        for &k in order.iter().take(8) {
            let lo = if k == 0 && !full { a } else { a + step * (k as f64 - 1.0) };
            let hi = if k == n - 1 && !full { b } else { a + step * (k as f64 + 1.0) };
            let (phi, v) = golden_max(g, lo, hi, 1e-13);
            let phi0 = a + step * k as f64;
            let v0 = g(phi0);
            let (phi, v) = if v0 >= v { (phi0, v0) } else { (phi, v) };
            let tie = (v - best).abs() <= 1e-14 * best.abs();
            let offset = |p: f64| (p - a).rem_euclid(std::f64::consts::TAU);
            if (v > best && !tie) || (tie && offset(phi) < offset(best_phi)) {
                best = v;
                best_phi = phi;
            }
        }
        let offset = |p: f64| (p - a).rem_euclid(std::f64::consts::TAU);
        if let Some(k) = (0..n).find(|&k| sign * values[k] >= best - 1e-14 * best.abs()) {
            let phi = a + step * k as f64;
            if offset(phi) < offset(best_phi) {
                best_phi = phi;
                best = best.max(sign * values[k]);
            }
        }
        (best_phi, sign * best)
    };
    let (phi1, r1) = pick(-1.0);
    let (phi2, r2) = pick(1.0);
    Ok(RadiiBounds {
        r1,
        r2: r2.max(r1),
        z1: domain.boundary_point(phi1),
        z2: domain.boundary_point(phi2),
        phi1,
        phi2,
    })
}

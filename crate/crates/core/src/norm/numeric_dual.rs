//! Dual norm by direct maximization of `x·ξ / H0(x)`.
//!
//! In the plane the quotient is a unimodal function of the polar angle on the
//! unit sphere of `H0`: a regular angular grid locates the best cell and a
//! golden-section search polishes it. In higher dimensions a multistart
//! projected gradient ascent on the Euclidean sphere is used.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::rng;

use super::{dot, euclid, Norm};

/// Number of angles in the planar multistart grid.
pub const ANGULAR_GRID: usize = 256;
/// Target width of the golden-section bracket, in radians.
pub const GOLDEN_WIDTH: f64 = 1e-12;

const RESTARTS: usize = 64;
const MAX_ASCENT_ITERS: usize = 500;

/// Result of the maximization defining the dual norm.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMaximizer {
    /// Best value found; never exceeds the true dual norm beyond rounding.
    pub value: f64,
    /// Maximizer normalised to `H0(x) = 1`, absent for `ξ = 0`.
    pub point: Option<Vec<f64>>,
    /// Polar angle of the maximizer (planar case only).
    pub angle: Option<f64>,
}

fn quotient_at(inner: &Norm, xi: &[f64], theta: f64) -> f64 {
    let u = [theta.cos(), theta.sin()];
    (u[0] * xi[0] + u[1] * xi[1]) / inner.eval(&u)
}

fn unit_sphere_point(inner: &Norm, theta: f64) -> Vec<f64> {
    inner.sphere_point(&[theta.cos(), theta.sin()], 1.0)
}

pub(crate) fn maximize(inner: &Norm, xi: &[f64]) -> DualMaximizer {
    if xi.iter().all(|c| *c == 0.0) {
        return DualMaximizer {
            value: 0.0,
            point: None,
            angle: None,
        };
    }
    if inner.dim() == 2 {
        maximize_planar(inner, xi)
    } else {
        maximize_sphere(inner, xi)
    }
}

fn maximize_planar(inner: &Norm, xi: &[f64]) -> DualMaximizer {
    let step = TAU / ANGULAR_GRID as f64;
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..ANGULAR_GRID {
        let v = quotient_at(inner, xi, k as f64 * step);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let grid_theta = best_k as f64 * step;
    let (theta, value) = golden_max(
        |t| quotient_at(inner, xi, t),
        grid_theta - step,
        grid_theta + step,
        GOLDEN_WIDTH,
    );
    let (theta, value) = if value >= best {
        (theta, value)
    } else {
        (grid_theta, best)
    };
    DualMaximizer {
        value,
        point: Some(unit_sphere_point(inner, theta)),
        angle: Some(theta.rem_euclid(TAU)),
    }
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, width: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while b - a > width && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Gradient of `H0`, falling back to central differences for families
/// without a usable gradient.
fn inner_grad(inner: &Norm, x: &[f64]) -> Vec<f64> {
    inner.grad(x).unwrap_or_else(|_| inner.fd_grad(x))
}

fn maximize_sphere(inner: &Norm, xi: &[f64]) -> DualMaximizer {
    let quotient = |x: &[f64]| dot(x, xi) / inner.eval(x);
    let mut rng = rng::seeded(rng::DEFAULT_SEED);
    let mut best_val = f64::NEG_INFINITY;
    let mut best_x = Vec::new();
    // The direction of ξ itself is a natural extra start.
    let xi_len = euclid(xi);
    let mut starts = vec![xi.iter().map(|c| c / xi_len).collect::<Vec<_>>()];
    for _ in 0..RESTARTS {
        starts.push(rng::unit_vector(&mut rng, inner.dim()));
    }
    for mut x in starts {
        let mut val = quotient(&x);
        let mut step = 1.0;
        for _ in 0..MAX_ASCENT_ITERS {
            let h = inner.eval(&x);
            let dh = inner_grad(inner, &x);
            let xd = dot(&x, xi);
            let mut g: Vec<f64> = xi
                .iter()
                .zip(&dh)
                .map(|(a, b)| a / h - xd * b / (h * h))
                .collect();
            let radial = dot(&g, &x);
            for (gi, xi_) in g.iter_mut().zip(&x) {
                *gi -= radial * xi_;
            }
            if euclid(&g) < 1e-13 * val.abs().max(1e-300) {
                break;
            }
            let mut improved = false;
            while step > 1e-16 {
                let trial: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a + step * b).collect();
                let n = euclid(&trial);
                let trial: Vec<f64> = trial.into_iter().map(|c| c / n).collect();
                let tv = quotient(&trial);
                if tv > val {
                    x = trial;
                    val = tv;
                    improved = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        if val > best_val {
            best_val = val;
            best_x = x;
        }
    }
    let h = inner.eval(&best_x);
    DualMaximizer {
        value: best_val,
        point: Some(best_x.into_iter().map(|c| c / h).collect()),
        angle: None,
    }
}

/// Relative tolerance deciding that the quotient is at its maximum.
const FLAT_REL_TOL: f64 = 64.0 * f64::EPSILON;
/// Minimum angular width of the maximizer set that counts as a flat face.
const FLAT_MIN_WIDTH: f64 = 1e-2;

/// `DH(ξ) = x*/H0(x*)`, or a non-differentiability error when the maximizer
/// set is a boundary segment of `B_1(0, H0)` (planar case).
pub(crate) fn gradient(inner: &Norm, xi: &[f64]) -> Result<Vec<f64>> {
    if xi.iter().all(|c| *c == 0.0) {
        return Err(Error::domain("dual gradient requested at the origin"));
    }
    let best = maximize(inner, xi);
    let Some(theta) = best.angle else {
        return Ok(best.point.expect("nonzero ξ has a maximizer"));
    };
    let level = best.value - FLAT_REL_TOL * best.value.abs();
    let on_top = |t: f64| quotient_at(inner, xi, t) >= level;
    // Walk outwards to the ends of the maximizer set.
    let edge = |dir: f64| {
        let mut inside = 0.0;
        let mut outside = 1e-3;
        while on_top(theta + dir * outside) {
            inside = outside;
            outside *= 2.0;
            if outside > std::f64::consts::PI {
                return inside;
            }
        }
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if on_top(theta + dir * mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let left = edge(-1.0);
    let right = edge(1.0);
    if left + right >= FLAT_MIN_WIDTH {
        return Err(Error::NonDifferentiable {
            point: xi.to_vec(),
            one_sided: Some((
                unit_sphere_point(inner, theta - left),
                unit_sphere_point(inner, theta + right),
            )),
        });
    }
    Ok(best.point.expect("nonzero ξ has a maximizer"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::NormSpec;

    #[test]
    fn dual_of_l1_is_max_norm() {
        let l1 = Norm::new(NormSpec::p_norm(1.0, 2)).unwrap();
        let m = maximize(&l1, &[3.0, -4.0]);
        assert!((m.value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn euclidean_dual_is_self() {
        let e = Norm::euclidean(2);
        let m = maximize(&e, &[3.0, 4.0]);
        assert!((m.value - 5.0).abs() < 1e-12);
        let x = m.point.unwrap();
        assert!((x[0] - 0.6).abs() < 1e-7 && (x[1] - 0.8).abs() < 1e-7);
    }

    #[test]
    fn three_dimensional_ascent_matches_closed_form() {
        let p3 = Norm::new(NormSpec::p_norm(3.0, 3)).unwrap();
        let xi = [0.3, -1.2, 0.7];
        let m = maximize(&p3, &xi);
        let q = 1.5;
        let exact: f64 = xi.iter().map(|c: &f64| c.abs().powf(q)).sum::<f64>().powf(1.0 / q);
        assert!(m.value <= exact * (1.0 + 1e-12));
        assert!((m.value - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (t, v) = golden_max(|t| -(t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-12);
        assert!((t - 0.3).abs() < 1e-7);
        assert!(v <= 0.0 && v > -1e-14);
    }

    #[test]
    fn flat_face_is_reported() {
        let l1 = Norm::new(NormSpec::p_norm(1.0, 2)).unwrap();
        let err = gradient(&l1, &[1.0, 1.0]).unwrap_err();
        match err {
            Error::NonDifferentiable { one_sided: Some((a, b)), .. } => {
                // The face of the l1 ball with normal (1,1) runs from (1,0) to (0,1).
                let ends = [a, b];
                assert!(ends.iter().any(|p| (p[0] - 1.0).abs() < 1e-6 && p[1].abs() < 1e-6));
                assert!(ends.iter().any(|p| p[0].abs() < 1e-6 && (p[1] - 1.0).abs() < 1e-6));
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}

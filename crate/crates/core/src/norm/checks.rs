//! Sampling checks of the norm axioms and of the gradient identities
//! `x·DH0(x) = H0(x)`, `DH0(tx) = sgn(t) DH0(x)`, `H(DH0(x)) = 1`.

use rand::RngExt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

use super::{dot, euclid, DualPair, Norm};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomReport {
    pub samples: usize,
    /// `H0(0)`, plus any nonpositive value found at a nonzero sample.
    pub zero_violation: f64,
    /// Max of `|H0(tx) - |t| H0(x)| / (|t| H0(x))`.
    pub homogeneity_violation: f64,
    /// Max of `max(0, H0(x+y) - H0(x) - H0(y)) / (H0(x) + H0(y))`.
    pub triangle_violation: f64,
    /// Estimated equivalence constants `σ|x| ≤ H0(x) ≤ γ|x|`.
    pub sigma: f64,
    pub gamma: f64,
}

pub fn check_norm_axioms(norm: &Norm, sample_count: usize, seed: u64) -> Result<AxiomReport> {
    if sample_count == 0 {
        return Err(Error::config("sample_count must be at least 1"));
    }
    let dim = norm.dim();
    let mut rng = rng::seeded(seed);
    let mut zero_violation = norm.eval(&vec![0.0; dim]).abs();
    let mut homogeneity: f64 = 0.0;
    let mut triangle: f64 = 0.0;
    for _ in 0..sample_count {
        let x = rng::box_vector(&mut rng, dim, 1.0);
        let y = rng::box_vector(&mut rng, dim, 1.0);
        let t: f64 = rng.random_range(-3.0..3.0);
        let hx = norm.eval(&x);
        let hy = norm.eval(&y);
        if !(hx > 0.0) {
            zero_violation = zero_violation.max(1.0);
        }
        let tx: Vec<f64> = x.iter().map(|c| t * c).collect();
        let scaled = t.abs() * hx;
        if scaled > 0.0 {
            homogeneity = homogeneity.max((norm.eval(&tx) - scaled).abs() / scaled);
        }
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        triangle = triangle.max((norm.eval(&sum) - hx - hy).max(0.0) / (hx + hy));
    }
    let (sigma, gamma) = norm.equivalence_constants(sample_count.max(256), seed);
    Ok(AxiomReport {
        samples: sample_count,
        zero_violation,
        homogeneity_violation: homogeneity,
        triangle_violation: triangle,
        sigma,
        gamma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub samples: usize,
    /// Max of `|x·DH0(x) - H0(x)| / H0(x)`.
    pub euler_max_rel: f64,
    /// Max of `|H(DH0(x)) - 1|`.
    pub unit_dual_max: f64,
    /// Max of `|DH0(tx) - sgn(t) DH0(x)|` over `t ∈ {-2, -1, 0.5, 3}`.
    pub sign_rule_max: f64,
    /// Max relative difference between `grad` and central differences.
    pub fd_agreement_max_rel: f64,
    /// Max of `|H0(x) DH(DH0(x)) - x| / |x|`, when both norms are C¹.
    pub radial_composite_max_rel: Option<f64>,
    pub analytic_gradient: bool,
}

/// Check the gradient identities at `samples` seeded random points.
pub fn check_gradient_identities(pair: &DualPair, samples: usize, seed: u64) -> Result<IdentityReport> {
    let primal = pair.primal();
    if !primal.is_c1() {
        return Err(Error::Capability(format!(
            "{} is not differentiable away from the origin",
            primal.spec().label()
        )));
    }
    let both_c1 = pair.dual().is_c1();
    let mut rng = rng::seeded(seed);
    let mut report = IdentityReport {
        samples,
        euler_max_rel: 0.0,
        unit_dual_max: 0.0,
        sign_rule_max: 0.0,
        fd_agreement_max_rel: 0.0,
        radial_composite_max_rel: both_c1.then_some(0.0),
        analytic_gradient: primal.has_analytic_gradient(),
    };
    for _ in 0..samples {
        let x = rng::box_vector(&mut rng, primal.dim(), 1.0);
        if euclid(&x) < 1e-3 {
            continue;
        }
        let h = primal.eval(&x);
        let g = primal.grad(&x)?;
        report.euler_max_rel = report.euler_max_rel.max((dot(&x, &g) - h).abs() / h);
        report.unit_dual_max = report.unit_dual_max.max((pair.dual_eval(&g) - 1.0).abs());
        for t in [-2.0, -1.0, 0.5, 3.0] {
            let tx: Vec<f64> = x.iter().map(|c| t * c).collect();
            let gt = primal.grad(&tx)?;
            let dev = gt
                .iter()
                .zip(&g)
                .map(|(a, b)| (a - f64::signum(t) * b).abs())
                .fold(0.0, f64::max);
            report.sign_rule_max = report.sign_rule_max.max(dev);
        }
        if report.analytic_gradient {
            let fd = primal.fd_grad(&x);
            let diff: Vec<f64> = fd.iter().zip(&g).map(|(a, b)| a - b).collect();
            report.fd_agreement_max_rel = report.fd_agreement_max_rel.max(euclid(&diff) / euclid(&g));
        }
        if let Some(worst) = report.radial_composite_max_rel.as_mut() {
            let dh = pair.dual_grad(&g)?;
            let diff: Vec<f64> = dh.iter().zip(&x).map(|(a, b)| h * a - b).collect();
            *worst = worst.max(euclid(&diff) / euclid(&x));
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    /// Smallest value of `((V(a) + V(b))/2 - V((a+b)/2)) / |b - a|²`.
    pub min_normalized_margin: f64,
    /// Chords whose normalized margin is below [`FLAT_MARGIN`].
    pub flagged: usize,
}

/// Normalized margins at or below this value indicate a chord on which `V`
/// is affine (up to rounding).
pub const FLAT_MARGIN: f64 = 1e-9;

/// `((V(a) + V(b))/2 - V((a+b)/2)) / |b - a|²` for the pair's Lagrangian.
pub fn chord_margin(pair: &DualPair, a: &[f64], b: &[f64]) -> f64 {
    let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let chord = 0.5 * (pair.lagrangian(a) + pair.lagrangian(b));
    (chord - pair.lagrangian(&mid)) / dot(&diff, &diff)
}

/// Midpoint convexity test of `V` on seeded random segments.
pub fn strict_convexity_check(pair: &DualPair, samples: usize, seed: u64) -> ConvexityReport {
    let mut rng = rng::seeded(seed);
    let mut min_margin = f64::INFINITY;
    let mut flagged = 0;
    for _ in 0..samples {
        let a = rng::box_vector(&mut rng, pair.dim(), 1.0);
        let b = rng::box_vector(&mut rng, pair.dim(), 1.0);
        let m = chord_margin(pair, &a, &b);
        if m <= FLAT_MARGIN {
            flagged += 1;
        }
        min_margin = min_margin.min(m);
    }
    ConvexityReport {
        samples,
        min_normalized_margin: min_margin,
        flagged,
    }
}

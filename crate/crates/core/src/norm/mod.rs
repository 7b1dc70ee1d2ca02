//! Norms `H0` on `R^N`, their gradients and dual norms.
//!
//! A [`NormSpec`] is the declarative, serializable description; [`Norm`] is
//! the validated, ready-to-evaluate form. Duality lives in [`DualPair`].

mod checks;
mod disc_hull;
mod dual;
pub mod flower;
mod numeric_dual;
mod serde_exponent;

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use disc_hull::DiscHull;

pub use checks::{
    check_gradient_identities, check_norm_axioms, chord_margin, strict_convexity_check,
    AxiomReport, ConvexityReport, IdentityReport,
};
pub use dual::DualPair;
pub use numeric_dual::{DualMaximizer, ANGULAR_GRID, GOLDEN_WIDTH};
pub(crate) use numeric_dual::golden_max;

/// Declarative description of a norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NormSpec {
    Euclidean {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// `|x|_p`; `p = 1` and `p = ∞` are evaluation-only.
    PNorm {
        #[serde(with = "serde_exponent")]
        p: f64,
        #[serde(default = "default_dim")]
        dim: usize,
    },
    /// `sqrt(xᵀ A x)` with `A` symmetric positive definite.
    Quadratic { matrix: Vec<Vec<f64>> },
    /// Gauge of the convex hull of planar discs.
    DiscHullGauge { centers: Vec<[f64; 2]>, radii: Vec<f64> },
    /// Support function of the convex hull of planar discs; the closed-form
    /// dual of [`NormSpec::DiscHullGauge`].
    DiscHullSupport { centers: Vec<[f64; 2]>, radii: Vec<f64> },
    /// Dual of `inner` computed by numeric maximization.
    NumericDualOf { inner: Box<NormSpec> },
}

fn default_dim() -> usize {
    2
}

impl NormSpec {
    pub fn euclidean(dim: usize) -> Self {
        NormSpec::Euclidean { dim }
    }

    pub fn p_norm(p: f64, dim: usize) -> Self {
        NormSpec::PNorm { p, dim }
    }

    /// Diagonal quadratic norm `sqrt(Σ d_i x_i²)`.
    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let matrix = (0..n)
            .map(|i| (0..n).map(|j| if i == j { diag[i] } else { 0.0 }).collect())
            .collect();
        NormSpec::Quadratic { matrix }
    }

    pub fn numeric_dual_of(inner: NormSpec) -> Self {
        NormSpec::NumericDualOf {
            inner: Box::new(inner),
        }
    }

    /// Closed-form dual, when the family has one.
    pub fn closed_form_dual(&self) -> Option<NormSpec> {
        match self {
            NormSpec::Euclidean { dim } => Some(NormSpec::Euclidean { dim: *dim }),
            NormSpec::PNorm { p, dim } => Some(NormSpec::PNorm {
                p: conjugate_exponent(*p),
                dim: *dim,
            }),
            NormSpec::Quadratic { matrix } => {
                let a = to_matrix(matrix).ok()?;
                let inv = a.try_inverse()?;
                let n = inv.nrows();
                Some(NormSpec::Quadratic {
                    matrix: (0..n)
                        .map(|i| (0..n).map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)])).collect())
                        .collect(),
                })
            }
            NormSpec::DiscHullGauge { centers, radii } => Some(NormSpec::DiscHullSupport {
                centers: centers.clone(),
                radii: radii.clone(),
            }),
            NormSpec::DiscHullSupport { centers, radii } => Some(NormSpec::DiscHullGauge {
                centers: centers.clone(),
                radii: radii.clone(),
            }),
            NormSpec::NumericDualOf { inner } => Some((**inner).clone()),
        }
    }

    /// Short human-readable label, e.g. `p_norm(3)`.
    pub fn label(&self) -> String {
        match self {
            NormSpec::Euclidean { .. } => "euclidean".into(),
            NormSpec::PNorm { p, .. } if p.is_infinite() => "p_norm(inf)".into(),
            NormSpec::PNorm { p, .. } => format!("p_norm({p})"),
            NormSpec::Quadratic { .. } => "quadratic".into(),
            NormSpec::DiscHullGauge { .. } => "disc_hull_gauge".into(),
            NormSpec::DiscHullSupport { .. } => "disc_hull_support".into(),
            NormSpec::NumericDualOf { inner } => format!("numeric_dual_of({})", inner.label()),
        }
    }
}

/// `q` with `1/p + 1/q = 1`, mapping `1 ↔ ∞`.
pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::config("quadratic norm needs a non-empty square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

#[derive(Debug, Clone)]
enum Kind {
    Euclidean,
    PNorm(f64),
    Quadratic(DMatrix<f64>),
    Gauge(Arc<DiscHull>),
    Support(Arc<DiscHull>),
    NumericDual(Box<Norm>),
}

/// A validated norm ready for evaluation. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct Norm {
    spec: NormSpec,
    dim: usize,
    kind: Kind,
}

impl Norm {
    pub fn new(spec: NormSpec) -> Result<Self> {
        let (dim, kind) = match &spec {
            NormSpec::Euclidean { dim } => (*dim, Kind::Euclidean),
            NormSpec::PNorm { p, dim } => {
                if !(*p >= 1.0) {
                    return Err(Error::config(format!("p-norm needs p >= 1, got {p}")));
                }
                (*dim, Kind::PNorm(*p))
            }
            NormSpec::Quadratic { matrix } => {
                let a = to_matrix(matrix)?;
                let asym = (&a - a.transpose()).abs().max();
                if asym > 1e-12 * a.abs().max().max(1.0) {
                    return Err(Error::config("quadratic norm matrix is not symmetric"));
                }
                if a.clone().cholesky().is_none() {
                    return Err(Error::config("quadratic norm matrix is not positive definite"));
                }
                (a.nrows(), Kind::Quadratic(a))
            }
            NormSpec::DiscHullGauge { centers, radii } => (
                2,
                Kind::Gauge(Arc::new(DiscHull::new(centers.clone(), radii.clone())?)),
            ),
            NormSpec::DiscHullSupport { centers, radii } => (
                2,
                Kind::Support(Arc::new(DiscHull::new(centers.clone(), radii.clone())?)),
            ),
            NormSpec::NumericDualOf { inner } => {
                let inner = Norm::new((**inner).clone())?;
                (inner.dim, Kind::NumericDual(Box::new(inner)))
            }
        };
        if dim == 0 {
            return Err(Error::config("norm dimension must be at least 1"));
        }
        Ok(Norm { spec, dim, kind })
    }

    pub fn euclidean(dim: usize) -> Self {
        Norm::new(NormSpec::euclidean(dim)).expect("euclidean norm is valid")
    }

    pub fn spec(&self) -> &NormSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn check_dim(&self, x: &[f64]) {
        assert_eq!(
            x.len(),
            self.dim,
            "vector of length {} passed to a {}-dimensional norm",
            x.len(),
            self.dim
        );
    }

    /// `H0(x)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.check_dim(x);
        match &self.kind {
            Kind::Euclidean => euclid(x),
            Kind::PNorm(p) => p_norm(x, *p),
            Kind::Quadratic(a) => quad_form(a, x).max(0.0).sqrt(),
            Kind::Gauge(hull) => hull.gauge(x),
            Kind::Support(hull) => hull.support(x),
            Kind::NumericDual(inner) => numeric_dual::maximize(inner, x).value,
        }
    }

    /// `H0(x)` for a planar point.
    pub fn eval2(&self, x: [f64; 2]) -> f64 {
        self.eval(&x)
    }

    /// Gradient `DH0(x)` for `x != 0`.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x);
        if x.iter().all(|c| *c == 0.0) {
            return Err(Error::domain("norm gradient requested at the origin"));
        }
        match &self.kind {
            Kind::Euclidean => {
                let n = euclid(x);
                Ok(x.iter().map(|c| c / n).collect())
            }
            Kind::PNorm(p) => {
                if *p == 1.0 || p.is_infinite() {
                    return Err(Error::Capability(format!(
                        "{} is evaluation-only (not differentiable)",
                        self.spec.label()
                    )));
                }
                let n = p_norm(x, *p);
                Ok(x
                    .iter()
                    .map(|c| c.signum() * (c.abs() / n).powf(p - 1.0))
                    .collect())
            }
            Kind::Quadratic(a) => {
                let n = quad_form(a, x).sqrt();
                let v = nalgebra::DVector::from_column_slice(x);
                Ok((a * v).iter().map(|c| c / n).collect())
            }
            Kind::Gauge(_) => Ok(self.fd_grad(x)),
            Kind::Support(hull) => {
                let active = hull.active_discs(x, 1e-12);
                let grads: Vec<Vec<f64>> =
                    active.iter().map(|&i| hull.piece_gradient(i, x)).collect();
                let distinct = grads
                    .iter()
                    .any(|g| euclid(&[g[0] - grads[0][0], g[1] - grads[0][1]]) > 1e-12);
                if distinct {
                    return Err(Error::NonDifferentiable {
                        point: x.to_vec(),
                        one_sided: Some((grads[0].clone(), grads[grads.len() - 1].clone())),
                    });
                }
                Ok(grads[0].clone())
            }
            Kind::NumericDual(inner) => numeric_dual::gradient(inner, x),
        }
    }

    pub fn grad2(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let g = self.grad(&x)?;
        Ok([g[0], g[1]])
    }

    /// Central differences with step `ε^(1/3)·max(1, |x|)`.
    pub fn fd_grad(&self, x: &[f64]) -> Vec<f64> {
        let h = f64::EPSILON.cbrt() * euclid(x).max(1.0);
        let mut probe = x.to_vec();
        (0..x.len())
            .map(|i| {
                probe[i] = x[i] + h;
                let fp = self.eval(&probe);
                probe[i] = x[i] - h;
                let fm = self.eval(&probe);
                probe[i] = x[i];
                (fp - fm) / (2.0 * h)
            })
            .collect()
    }

    /// Whether `H0 ∈ C¹(R^N \ {0})`.
    pub fn is_c1(&self) -> bool {
        match &self.kind {
            Kind::Euclidean | Kind::Quadratic(_) | Kind::Gauge(_) => true,
            Kind::PNorm(p) => *p > 1.0 && p.is_finite(),
            Kind::Support(hull) => hull.is_single_disc(),
            Kind::NumericDual(inner) => inner.has_strictly_convex_ball(),
        }
    }

    /// Whether the unit ball `B_1(0, H0)` is strictly convex (no boundary segments).
    pub fn has_strictly_convex_ball(&self) -> bool {
        match &self.kind {
            Kind::Euclidean | Kind::Quadratic(_) | Kind::Support(_) => true,
            Kind::PNorm(p) => *p > 1.0 && p.is_finite(),
            Kind::Gauge(hull) => hull.is_single_disc(),
            Kind::NumericDual(inner) => inner.is_c1(),
        }
    }

    /// Whether `grad` uses an analytic formula (as opposed to finite differences
    /// or a numeric maximizer).
    pub fn has_analytic_gradient(&self) -> bool {
        match &self.kind {
            Kind::Euclidean | Kind::Quadratic(_) | Kind::Support(_) => true,
            Kind::PNorm(p) => *p > 1.0 && p.is_finite(),
            Kind::Gauge(_) | Kind::NumericDual(_) => false,
        }
    }

    /// Closed-form dual when available.
    pub fn closed_form_dual(&self) -> Option<Norm> {
        self.spec.closed_form_dual().and_then(|s| Norm::new(s).ok())
    }

    /// Point of `∂B_R(0, H0)` in direction `dir`.
    pub fn sphere_point(&self, dir: &[f64], radius: f64) -> Vec<f64> {
        let h = self.eval(dir);
        dir.iter().map(|c| radius * c / h).collect()
    }

    /// Estimate `σ, γ` with `σ|x| ≤ H0(x) ≤ γ|x|` from `samples` directions.
    /// In 2D the directions form a regular angular grid; otherwise they are
    /// seeded random points of the sphere.
    pub fn equivalence_constants(&self, samples: usize, seed: u64) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi: f64 = 0.0;
        let mut visit = |u: &[f64]| {
            let v = self.eval(u);
            lo = lo.min(v);
            hi = hi.max(v);
        };
        if self.dim == 2 {
            for k in 0..samples.max(1) {
                let t = std::f64::consts::TAU * k as f64 / samples.max(1) as f64;
                visit(&[t.cos(), t.sin()]);
            }
        } else {
            let mut rng = crate::rng::seeded(seed);
            for _ in 0..samples.max(1) {
                let u = crate::rng::unit_vector(&mut rng, self.dim);
                visit(&u);
            }
        }
        (lo, hi)
    }

    pub(crate) fn quadratic_matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.kind {
            Kind::Quadratic(a) => Some(a),
            _ => None,
        }
    }

    pub(crate) fn p_exponent(&self) -> Option<f64> {
        match &self.kind {
            Kind::PNorm(p) => Some(*p),
            Kind::Euclidean => Some(2.0),
            _ => None,
        }
    }
}

pub(crate) fn euclid(x: &[f64]) -> f64 {
    match x {
        [a, b] => a.hypot(*b),
        _ => x.iter().map(|c| c * c).sum::<f64>().sqrt(),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn p_norm(x: &[f64], p: f64) -> f64 {
    let m = x.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if m == 0.0 || p.is_infinite() {
        return m;
    }
    if p == 1.0 {
        return x.iter().map(|c| c.abs()).sum();
    }
    if p == 2.0 {
        return euclid(x);
    }
    m * x.iter().map(|c| (c.abs() / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

fn quad_form(a: &DMatrix<f64>, x: &[f64]) -> f64 {
    let n = x.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += x[i] * a[(i, j)] * x[j];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_pythagoras() {
        let n = Norm::euclidean(2);
        assert_eq!(n.eval(&[3.0, 4.0]), 5.0);
        let g = n.grad(&[3.0, 4.0]).unwrap();
        assert!((g[0] - 0.6).abs() < 1e-15 && (g[1] - 0.8).abs() < 1e-15);
    }

    #[test]
    fn flower_gauge_on_axis() {
        let n = Norm::new(flower::flower_spec()).unwrap();
        assert!((n.eval(&[1.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((n.eval(&[2.0, 0.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn p_norm_gradient_on_axis() {
        let n = Norm::new(NormSpec::p_norm(4.0, 2)).unwrap();
        let g = n.grad(&[1.0, 0.0]).unwrap();
        assert_eq!(g, vec![1.0, 0.0]);
    }

    #[test]
    fn quadratic_euler_identity() {
        let n = Norm::new(NormSpec::diagonal(&[4.0, 1.0])).unwrap();
        let g = n.grad(&[1.0, 0.0]).unwrap();
        assert!((dot(&g, &[1.0, 0.0]) - 2.0).abs() < 1e-15);
        assert_eq!(n.eval(&[1.0, 0.0]), 2.0);
    }

    #[test]
    fn gradient_errors() {
        let n = Norm::euclidean(2);
        assert!(matches!(n.grad(&[0.0, 0.0]), Err(Error::Domain(_))));
        for p in [1.0, f64::INFINITY] {
            let n = Norm::new(NormSpec::p_norm(p, 2)).unwrap();
            assert!(matches!(n.grad(&[1.0, 2.0]), Err(Error::Capability(_))));
        }
    }

    #[test]
    fn invalid_specs_are_configuration_errors() {
        assert!(matches!(
            Norm::new(NormSpec::p_norm(0.5, 2)),
            Err(Error::Config(_))
        ));
        let not_spd = NormSpec::Quadratic {
            matrix: vec![vec![1.0, 2.0], vec![2.0, 1.0]],
        };
        assert!(matches!(Norm::new(not_spd), Err(Error::Config(_))));
        let asym = NormSpec::Quadratic {
            matrix: vec![vec![1.0, 0.5], vec![0.0, 1.0]],
        };
        assert!(matches!(Norm::new(asym), Err(Error::Config(_))));
    }

    #[test]
    fn json_round_trip_of_documented_forms() {
        let p: NormSpec = serde_json::from_str(r#"{"family": "p_norm", "p": 3, "dim": 2}"#).unwrap();
        assert_eq!(p, NormSpec::p_norm(3.0, 2));
        let inf: NormSpec = serde_json::from_str(r#"{"family": "p_norm", "p": "inf"}"#).unwrap();
        assert_eq!(inf, NormSpec::p_norm(f64::INFINITY, 2));
        let flower: NormSpec = serde_json::from_str(
            r#"{"family": "disc_hull_gauge", "centers": [[0.5,0],[-0.5,0],[0,0.5],[0,-0.5]], "radii": [0.5,0.5,0.5,0.5]}"#,
        )
        .unwrap();
        assert_eq!(flower, flower::flower_spec());
        let back: NormSpec = serde_json::from_str(&serde_json::to_string(&inf).unwrap()).unwrap();
        assert_eq!(back, inf);
        assert!(serde_json::from_str::<NormSpec>(r#"{"family": "p_norm", "p": 3, "bogus": 1}"#).is_err());
    }

    #[test]
    fn capability_flags_follow_duality() {
        let flower = Norm::new(flower::flower_spec()).unwrap();
        assert!(flower.is_c1());
        assert!(!flower.has_strictly_convex_ball());
        let dual = flower.closed_form_dual().unwrap();
        assert!(!dual.is_c1());
        assert!(dual.has_strictly_convex_ball());
    }
}

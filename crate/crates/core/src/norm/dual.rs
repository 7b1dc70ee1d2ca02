use crate::error::{Error, Result};

use super::{euclid, Norm, NormSpec};

/// A norm `H0` together with its dual `H` and the Lagrangian `V = H²/2`.
#[derive(Debug, Clone)]
pub struct DualPair {
    primal: Norm,
    dual: Norm,
}

impl DualPair {
    /// Pair `primal` with its closed-form dual when one exists, otherwise
    /// with the numeric dual.
    pub fn new(primal: Norm) -> Self {
        let dual = primal
            .closed_form_dual()
            .unwrap_or_else(|| Self::numeric_dual(&primal));
        DualPair { primal, dual }
    }

    pub fn from_spec(spec: NormSpec) -> Result<Self> {
        Ok(Self::new(Norm::new(spec)?))
    }

    /// Pair `primal` with the numerically maximized dual regardless of family.
    pub fn numeric(primal: Norm) -> Self {
        let dual = Self::numeric_dual(&primal);
        DualPair { primal, dual }
    }

    fn numeric_dual(primal: &Norm) -> Norm {
        Norm::new(NormSpec::numeric_dual_of(primal.spec().clone()))
            .expect("numeric dual of a valid norm is valid")
    }

    pub fn primal(&self) -> &Norm {
        &self.primal
    }

    pub fn dual(&self) -> &Norm {
        &self.dual
    }

    pub fn dim(&self) -> usize {
        self.primal.dim()
    }

    /// The pair with the roles of `H0` and `H` exchanged.
    pub fn swapped(&self) -> DualPair {
        DualPair {
            primal: self.dual.clone(),
            dual: self.primal.clone(),
        }
    }

    /// Numeric dual of the dual norm; reproduces `H0` by the involution property.
    pub fn dual_of_dual(&self) -> Norm {
        Self::numeric_dual(&self.dual)
    }

    /// `H(ξ)`.
    pub fn dual_eval(&self, xi: &[f64]) -> f64 {
        self.dual.eval(xi)
    }

    /// `DH(ξ)` for `ξ != 0`.
    pub fn dual_grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        self.dual.grad(xi)
    }

    /// `V(ξ) = H(ξ)²/2`.
    pub fn lagrangian(&self, xi: &[f64]) -> f64 {
        let h = self.dual.eval(xi);
        0.5 * h * h
    }

    /// `DV(ξ) = H(ξ) DH(ξ)`, with `DV(0) = 0`.
    pub fn lagrangian_grad(&self, xi: &[f64]) -> Result<Vec<f64>> {
        if xi.iter().all(|c| *c == 0.0) {
            return Ok(vec![0.0; xi.len()]);
        }
        if let Some(m) = self.dual.quadratic_matrix() {
            let v = nalgebra::DVector::from_column_slice(xi);
            return Ok((m * v).iter().copied().collect());
        }
        let h = self.dual.eval(xi);
        Ok(self.dual.grad(xi)?.into_iter().map(|g| h * g).collect())
    }

    /// Hessian of `V`, row-major `N×N`.
    ///
    /// `V` is only `C¹` in general. For `p`-norm duals the Hessian is
    /// homogeneous of degree zero and is evaluated at the all-ones direction
    /// when `ξ = 0`; other families without a closed form use central
    /// differences of `DV`.
    pub fn lagrangian_hessian(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let n = xi.len();
        if let Some(m) = self.dual.quadratic_matrix() {
            return Ok((0..n * n).map(|k| m[(k / n, k % n)]).collect());
        }
        let at_origin = xi.iter().all(|c| *c == 0.0);
        let ones = vec![1.0; n];
        let xi = if at_origin { &ones[..] } else { xi };
        if let Some(q) = self.dual.p_exponent() {
            if q > 1.0 && q.is_finite() {
                return Ok(p_norm_lagrangian_hessian(xi, q));
            }
        }
        let step = f64::EPSILON.cbrt() * euclid(xi).max(1.0);
        let mut hess = vec![0.0; n * n];
        let mut probe = xi.to_vec();
        for j in 0..n {
            probe[j] = xi[j] + step;
            let gp = self.lagrangian_grad(&probe)?;
            probe[j] = xi[j] - step;
            let gm = self.lagrangian_grad(&probe)?;
            probe[j] = xi[j];
            for i in 0..n {
                hess[i * n + j] = (gp[i] - gm[i]) / (2.0 * step);
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (hess[i * n + j] + hess[j * n + i]);
                hess[i * n + j] = s;
                hess[j * n + i] = s;
            }
        }
        Ok(hess)
    }

    /// Strict convexity of `V` is equivalent to `H0 ∈ C¹`; the torsion energy
    /// then has a unique minimizer.
    pub fn require_strictly_convex_lagrangian(&self) -> Result<()> {
        if self.primal.is_c1() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "V = H²/2 is not strictly convex: primal norm {} is not C¹",
                self.primal.spec().label()
            )))
        }
    }

    /// Both norms of the pair are `C¹` away from the origin.
    pub fn require_c1_pair(&self) -> Result<()> {
        self.require_strictly_convex_lagrangian()?;
        if self.dual.is_c1() {
            Ok(())
        } else {
            Err(Error::config(format!(
                "dual norm {} of {} is not C¹ away from the origin",
                self.dual.spec().label(),
                self.primal.spec().label()
            )))
        }
    }
}

/// Hessian of `V = |ξ|_q²/2`: with `y = ξ/|ξ|_q` and `g_i = sgn(y_i)|y_i|^(q-1)`,
/// `D²V = (2-q) g gᵀ + (q-1) diag(|y_i|^(q-2))`.
fn p_norm_lagrangian_hessian(xi: &[f64], q: f64) -> Vec<f64> {
    let n = xi.len();
    let m = xi.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let h = m * xi.iter().map(|c| (c.abs() / m).powf(q)).sum::<f64>().powf(1.0 / q);
    let y: Vec<f64> = xi.iter().map(|c| c / h).collect();
    // |y_i|^(q-2) blows up on the axes when q < 2.
    let floor = 1e-8;
    let g: Vec<f64> = y.iter().map(|c| c.signum() * c.abs().powf(q - 1.0)).collect();
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            hess[i * n + j] = (2.0 - q) * g[i] * g[j];
        }
        hess[i * n + i] += (q - 1.0) * y[i].abs().max(floor).powf(q - 2.0);
    }
    hess
}

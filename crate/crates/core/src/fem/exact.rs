use crate::error::{Error, Result};
use crate::norm::Norm;

/// Closed-form torsion solution `u_R = (R² − H0²)/(2N)` on the Wulff shape `B_R(O, H0)`.
#[derive(Debug, Clone)]
pub struct ExactWulff {
    norm: Norm,
    radius: f64,
    dim: usize,
}

pub fn exact_wulff_solution(norm: &Norm, radius: f64, dim: usize) -> Result<ExactWulff> {
    if !norm.is_c1() {
        return Err(Error::config(format!(
            "exact Wulff solution needs a C¹ norm, got {}",
            norm.spec().label()
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) || dim == 0 || norm.dim() != dim {
        return Err(Error::config("invalid Wulff radius or dimension"));
    }
    Ok(ExactWulff {
        norm: norm.clone(),
        radius,
        dim,
    })
}

impl ExactWulff {
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    fn n(&self) -> f64 {
        self.dim as f64
    }

    pub fn u(&self, x: &[f64]) -> f64 {
        let h = self.norm.eval(x);
        (self.radius * self.radius - h * h) / (2.0 * self.n())
    }

    /// `Du = −H0 DH0 / N`, zero at the origin.
    pub fn du(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.iter().all(|c| *c == 0.0) {
            return Ok(vec![0.0; x.len()]);
        }
        let h = self.norm.eval(x);
        Ok(self.norm.grad(x)?.into_iter().map(|g| -h * g / self.n()).collect())
    }

    /// `H(Du) = H0/N`.
    pub fn h_of_du(&self, x: &[f64]) -> f64 {
        self.norm.eval(x) / self.n()
    }

    /// `DV(Du) = −x/N`.
    pub fn dv_of_du(&self, x: &[f64]) -> Vec<f64> {
        x.iter().map(|c| -c / self.n()).collect()
    }
}

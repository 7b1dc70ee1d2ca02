use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prescribed flux profile `q` in the overdetermined condition `H(Du) = q(H0)` on `Γ0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `q(r) = c r`.
    Linear { c: f64 },
    /// `q(r) = c r^α` with `α > 1`.
    Power { c: f64, alpha: f64 },
    /// Piecewise-linear interpolation of `(r, q)` points with increasing `r`.
    Table { points: Vec<[f64; 2]> },
}

/// Behaviour of `q(r)/r` on a sampled radius range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioTrend {
    Increasing,
    /// Constant up to roundoff: the borderline linear case.
    Constant,
    NotIncreasing,
}

impl Profile {
    pub fn linear(c: f64) -> Self {
        Profile::Linear { c }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Profile::Linear { c } => *c > 0.0 && c.is_finite(),
            Profile::Power { c, alpha } => *c > 0.0 && c.is_finite() && *alpha > 1.0 && alpha.is_finite(),
            Profile::Table { points } => {
                points.len() >= 2
                    && points.iter().all(|p| p[0] > 0.0 && p[1] > 0.0 && p[0].is_finite() && p[1].is_finite())
                    && points.windows(2).all(|w| w[1][0] > w[0][0])
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid profile {self:?}")))
        }
    }

    /// `q(r)`; tables are extended linearly through the origin-free end segments.
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Profile::Linear { c } => c * r,
            Profile::Power { c, alpha } => c * r.powf(*alpha),
            Profile::Table { points } => {
                let k = match points.iter().position(|p| p[0] >= r) {
                    Some(0) => 0,
                    Some(k) => k - 1,
                    None => points.len() - 2,
                };
                let (a, b) = (points[k], points[k + 1]);
                a[1] + (b[1] - a[1]) * (r - a[0]) / (b[0] - a[0])
            }
        }
    }

    /// Sample `q(r)/r` at 100 points of `[r_min, r_max]`.
    pub fn ratio_trend(&self, r_min: f64, r_max: f64) -> RatioTrend {
        let (lo, hi) = if r_max > r_min { (r_min, r_max) } else { (r_min * 0.9, r_min * 1.1) };
        let ratios: Vec<f64> = (0..100)
            .map(|k| {
                let r = lo + (hi - lo) * k as f64 / 99.0;
                self.eval(r) / r
            })
            .collect();
        let scale = ratios.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = 1e-12 * scale;
        if ratios.windows(2).all(|w| (w[1] - w[0]).abs() <= tol) {
            RatioTrend::Constant
        } else if ratios.windows(2).all(|w| w[1] > w[0]) {
            RatioTrend::Increasing
        } else {
            RatioTrend::NotIncreasing
        }
    }

    /// `q(r)/r` strictly increasing on the sampled range.
    pub fn monotone_ratio_flag(&self, r_min: f64, r_max: f64) -> bool {
        self.ratio_trend(r_min, r_max) == RatioTrend::Increasing
    }

    /// A radius `R*` with `q(R*) = R*/n`, i.e. a Wulff shape whose exact flux
    /// obeys the profile. Every radius works for `q(r) = r/n`.
    pub fn wulff_radius(&self, n: usize, hint: f64) -> Option<f64> {
        let f = |r: f64| self.eval(r) - r / n as f64;
        if f(hint).abs() <= 1e-12 * hint {
            return Some(hint);
        }
        let mut lo = hint;
        let mut hi = hint;
        for _ in 0..40 {
            lo *= 0.7;
            hi *= 1.4;
            for (a, b) in [(lo, lo / 0.7), (hi / 1.4, hi)] {
                if f(a) * f(b) <= 0.0 {
                    let (mut a, mut b) = (a, b);
                    for _ in 0..200 {
                        let m = 0.5 * (a + b);
                        if f(a) * f(m) <= 0.0 {
                            b = m;
                        } else {
                            a = m;
                        }
                    }
                    return Some(0.5 * (a + b));
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trends() {
        assert_eq!(Profile::linear(0.5).ratio_trend(0.5, 2.0), RatioTrend::Constant);
        assert_eq!(Profile::Power { c: 1.0, alpha: 2.0 }.ratio_trend(0.5, 2.0), RatioTrend::Increasing);
        let t = Profile::Table { points: vec![[0.5, 1.0], [1.0, 1.2], [2.0, 1.3]] };
        assert_eq!(t.ratio_trend(0.5, 2.0), RatioTrend::NotIncreasing);
    }

    #[test]
    fn wulff_radius_of_square_profile() {
        let p = Profile::Power { c: 1.0, alpha: 2.0 };
        let r = p.wulff_radius(2, 1.0).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        assert_eq!(Profile::linear(0.5).wulff_radius(2, 1.3), Some(1.3));
        assert_eq!(Profile::linear(1.0).wulff_radius(2, 1.0), None);
    }

    #[test]
    fn table_interpolates() {
        let t = Profile::Table { points: vec![[1.0, 1.0], [2.0, 3.0]] };
        assert_eq!(t.eval(1.5), 2.0);
        assert_eq!(t.eval(3.0), 5.0);
        assert!(t.validate().is_ok());
        assert!(Profile::Table { points: vec![[1.0, 1.0]] }.validate().is_err());
    }
}

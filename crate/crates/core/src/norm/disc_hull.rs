//! Convex hull of finitely many planar discs.
//!
//! The hull `K = conv(D_1 ∪ … ∪ D_n)` has support function
//! `h(ξ) = max_i (c_i·ξ + r_i |ξ|)`, which is the dual norm of the gauge of
//! `K`. Its boundary is a cyclic sequence of disc arcs joined by outer common
//! tangent segments; each arc is stored by the interval of outward normal
//! angles on which its disc is the active one.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HullArc {
    pub disc: usize,
    /// Normal-angle interval `[start, end]`, `end > start`, not reduced mod 2π.
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct DiscHull {
    pub centers: Vec<[f64; 2]>,
    pub radii: Vec<f64>,
    pub arcs: Vec<HullArc>,
    /// Largest Euclidean radius of a centred disc contained in the hull.
    pub inradius: f64,
    /// Smallest Euclidean radius of a centred disc containing the hull.
    pub outradius: f64,
}

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Reduce an angle to `[0, 2π)`.
fn wrap(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Is `theta` inside the (possibly wrapping) interval `[start, end]`?
fn angle_in(theta: f64, start: f64, end: f64) -> bool {
    let offset = wrap(theta - start);
    offset <= end - start
}

impl DiscHull {
    pub fn new(centers: Vec<[f64; 2]>, radii: Vec<f64>) -> Result<Self> {
        if centers.is_empty() || centers.len() != radii.len() {
            return Err(Error::config(format!(
                "disc hull needs matching non-empty centers and radii (got {} and {})",
                centers.len(),
                radii.len()
            )));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0))
            || centers.iter().flatten().any(|c| !c.is_finite())
        {
            return Err(Error::config("disc hull radii must be positive and centers finite"));
        }

        let arcs = Self::active_arcs(&centers, &radii);
        let mut hull = DiscHull {
            centers,
            radii,
            arcs,
            inradius: 0.0,
            outradius: 0.0,
        };
        hull.inradius = hull
            .arcs
            .iter()
            .map(|a| hull.arc_min_support(a))
            .fold(f64::INFINITY, f64::min);
        hull.outradius = hull
            .arcs
            .iter()
            .map(|a| {
                let c = hull.centers[a.disc];
                c[0].hypot(c[1]) + hull.radii[a.disc]
            })
            .fold(0.0, f64::max);
        if !(hull.inradius > 1e-12) {
            return Err(Error::config(
                "disc hull must contain a neighbourhood of the origin",
            ));
        }
        Ok(hull)
    }

    fn support_piece(centers: &[[f64; 2]], radii: &[f64], i: usize, theta: f64) -> f64 {
        dot(centers[i], unit(theta)) + radii[i]
    }

    fn active_at(centers: &[[f64; 2]], radii: &[f64], theta: f64) -> usize {
        let mut best = 0;
        let mut best_val = f64::NEG_INFINITY;
        for i in 0..centers.len() {
            let v = Self::support_piece(centers, radii, i, theta);
            if v > best_val {
                best_val = v;
                best = i;
            }
        }
        best
    }

    /// Split the circle of normal directions where two support pieces tie and
    /// record which disc is active on each piece.
    fn active_arcs(centers: &[[f64; 2]], radii: &[f64]) -> Vec<HullArc> {
        let n = centers.len();
        let mut breaks = vec![0.0];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = [centers[i][0] - centers[j][0], centers[i][1] - centers[j][1]];
                let len = d[0].hypot(d[1]);
                let rhs = radii[j] - radii[i];
                if len <= 0.0 || rhs.abs() > len {
                    continue;
                }
                let psi = d[1].atan2(d[0]);
                let spread = (rhs / len).clamp(-1.0, 1.0).acos();
                breaks.push(wrap(psi + spread));
                breaks.push(wrap(psi - spread));
            }
        }
        breaks.sort_by(|a, b| a.total_cmp(b));
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-14);

        let mut arcs: Vec<HullArc> = Vec::new();
        for (k, &start) in breaks.iter().enumerate() {
            let end = if k + 1 < breaks.len() { breaks[k + 1] } else { TAU };
            if end - start < 1e-15 {
                continue;
            }
            let disc = Self::active_at(centers, radii, 0.5 * (start + end));
            match arcs.last_mut() {
                Some(last) if last.disc == disc => last.end = end,
                _ => arcs.push(HullArc { disc, start, end }),
            }
        }
        // Merge the piece that wraps through angle zero.
        if arcs.len() > 1 && arcs[0].disc == arcs[arcs.len() - 1].disc {
            let first = arcs.remove(0);
            let last = arcs.last_mut().expect("non-empty");
            last.end = first.end + TAU;
        }
        arcs
    }

    fn arc_min_support(&self, arc: &HullArc) -> f64 {
        let c = self.centers[arc.disc];
        let r = self.radii[arc.disc];
        let mut m = dot(c, unit(arc.start)).min(dot(c, unit(arc.end)));
        let norm_c = c[0].hypot(c[1]);
        if norm_c > 0.0 {
            let opposite = c[1].atan2(c[0]) + std::f64::consts::PI;
            if angle_in(opposite, arc.start, arc.end) {
                m = -norm_c;
            }
        }
        m + r
    }

    /// Support function `max_i (c_i·ξ + r_i |ξ|)`.
    pub fn support(&self, xi: &[f64]) -> f64 {
        let len = xi[0].hypot(xi[1]);
        self.centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c[0] * xi[0] + c[1] * xi[1] + r * len)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Indices of discs whose support piece attains the maximum at `xi`
    /// within a relative tolerance.
    pub fn active_discs(&self, xi: &[f64], rel_tol: f64) -> Vec<usize> {
        let len = xi[0].hypot(xi[1]);
        let vals: Vec<f64> = self
            .centers
            .iter()
            .zip(&self.radii)
            .map(|(c, r)| c[0] * xi[0] + c[1] * xi[1] + r * len)
            .collect();
        let best = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut active: Vec<usize> = (0..vals.len())
            .filter(|&i| best - vals[i] <= rel_tol * best.abs().max(f64::MIN_POSITIVE))
            .collect();
        // Coincident discs produce identical pieces; keep one representative.
        active.dedup_by(|a, b| {
            self.centers[*a] == self.centers[*b] && self.radii[*a] == self.radii[*b]
        });
        active
    }

    /// Gradient of the support piece of disc `i` at `xi != 0`.
    pub fn piece_gradient(&self, i: usize, xi: &[f64]) -> Vec<f64> {
        let len = xi[0].hypot(xi[1]);
        let c = self.centers[i];
        let r = self.radii[i];
        vec![c[0] + r * xi[0] / len, c[1] + r * xi[1] / len]
    }

    /// Exact closed-membership test `x ∈ K`: for every boundary arc, the
    /// half-planes with normals in the arc's normal interval must contain `x`.
    pub fn contains(&self, x: [f64; 2]) -> bool {
        self.arcs.iter().all(|arc| {
            let c = self.centers[arc.disc];
            let d = [x[0] - c[0], x[1] - c[1]];
            let len = d[0].hypot(d[1]);
            let reach = if len > 0.0 && angle_in(d[1].atan2(d[0]), arc.start, arc.end) {
                len
            } else {
                dot(d, unit(arc.start)).max(dot(d, unit(arc.end)))
            };
            reach <= self.radii[arc.disc]
        })
    }

    /// Minkowski functional `inf { t > 0 : x / t ∈ K }` by bisection along
    /// the ray. The bracket shrinks until it can no longer be split, which is
    /// well below the 1e-10 relative target.
    pub fn gauge(&self, x: &[f64]) -> f64 {
        let len = x[0].hypot(x[1]);
        if len == 0.0 {
            return 0.0;
        }
        let mut lo = len / self.outradius;
        let mut hi = len / self.inradius;
        // Guard against rounding at the bracket ends.
        lo *= 1.0 - 1e-12;
        hi *= 1.0 + 1e-12;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.contains([x[0] / mid, x[1] / mid]) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// The unit ball has no straight boundary pieces only when one disc is active everywhere.
    pub fn is_single_disc(&self) -> bool {
        self.arcs.len() == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flower() -> DiscHull {
        DiscHull::new(
            vec![[0.5, 0.0], [-0.5, 0.0], [0.0, 0.5], [0.0, -0.5]],
            vec![0.5; 4],
        )
        .unwrap()
    }

    #[test]
    fn flower_has_four_arcs() {
        let h = flower();
        assert_eq!(h.arcs.len(), 4);
        let total: f64 = h.arcs.iter().map(|a| a.end - a.start).sum();
        assert!((total - TAU).abs() < 1e-12);
        assert!((h.outradius - 1.0).abs() < 1e-15);
        // Support at 45° is (1/2)(1/√2) + 1/2.
        let expect = 0.5 * std::f64::consts::FRAC_1_SQRT_2 + 0.5;
        assert!((h.inradius - expect).abs() < 1e-12);
    }

    #[test]
    fn membership_on_axes_and_diagonal() {
        let h = flower();
        assert!(h.contains([1.0, 0.0]));
        assert!(!h.contains([1.0 + 1e-9, 0.0]));
        assert!(h.contains([0.0, 0.0]));
        // Tangent segment between the discs at (1/2,0) and (0,1/2) has normal (1,1)/√2
        // and support value 1/(2√2) + 1/2.
        let s = (0.5 * std::f64::consts::FRAC_1_SQRT_2 + 0.5) * std::f64::consts::FRAC_1_SQRT_2;
        assert!(h.contains([s - 1e-12, s - 1e-12]));
        assert!(!h.contains([s + 1e-9, s + 1e-9]));
    }

    #[test]
    fn gauge_on_axis() {
        let h = flower();
        assert!((h.gauge(&[1.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((h.gauge(&[0.0, -2.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_disc_hull_is_the_disc() {
        let h = DiscHull::new(vec![[0.0, 0.0]], vec![2.0]).unwrap();
        assert!(h.is_single_disc());
        assert!((h.gauge(&[3.0, 4.0]) - 2.5).abs() < 1e-14);
        assert!((h.support(&[3.0, 4.0]) - 10.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_origin_outside() {
        let err = DiscHull::new(vec![[2.0, 0.0]], vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        // A single flower petal has the origin on its boundary only.
        assert!(DiscHull::new(vec![[0.5, 0.0]], vec![0.5]).is_err());
    }
}

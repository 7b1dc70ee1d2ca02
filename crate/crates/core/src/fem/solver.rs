use std::sync::Arc;

use super::field::{FemSpace, Load, ScalarField};
use super::sparse::{reverse_cuthill_mckee, Skyline};
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::norm::DualPair;

/// Damped Newton parameters.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when the sup-norm of the energy gradient drops below this.
    pub gradient_tolerance: f64,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Backtracking factor.
    pub shrink: f64,
    pub max_backtracks: usize,
    /// `δ` added to the Hessian of `V` on each element.
    pub hessian_regularization: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-10,
            armijo: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
            hessian_regularization: 1e-10,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.gradient_tolerance > 0.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.hessian_regularization >= 0.0
            && self.max_iterations > 0)
        {
            return Err(Error::config("invalid solver options"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub residual: f64,
    /// Sup-norm of the energy gradient before each iteration.
    pub history: Vec<f64>,
    pub newton_steps: usize,
    pub gradient_steps: usize,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub field: ScalarField,
    pub stats: SolveStats,
}

/// Minimize the discrete torsion energy starting from zero.
pub fn solve_torsion(mesh: Arc<Mesh>, pair: &DualPair, load: &Load, opts: &SolverOptions) -> Result<Solution> {
    let n = mesh.num_vertices();
    solve_torsion_from(mesh, pair, load, opts, &vec![0.0; n])
}

pub fn solve_torsion_from(
    mesh: Arc<Mesh>,
    pair: &DualPair,
    load: &Load,
    opts: &SolverOptions,
    initial: &[f64],
) -> Result<Solution> {
    opts.validate()?;
    pair.require_strictly_convex_lagrangian()?;
    if pair.dim() != 2 {
        return Err(Error::config("the finite-element solver is planar"));
    }
    let space = FemSpace::new(mesh.clone())?;
    if initial.len() != space.num_nodes() {
        return Err(Error::Consistency("initial guess does not match the mesh".into()));
    }
    let load_vec = space.load_vector(load);
    let mut u: Vec<f64> = initial
        .iter()
        .zip(space.dirichlet_mask())
        .map(|(v, d)| if *d { 0.0 } else { *v })
        .collect();

    let free: Vec<usize> = (0..space.num_nodes()).filter(|&i| !space.is_dirichlet(i)).collect();
    let mut slot = vec![usize::MAX; space.num_nodes()];
    for (k, &i) in free.iter().enumerate() {
        slot[i] = k;
    }
    let mut adjacency = vec![Vec::new(); free.len()];
    for [a, b] in mesh.edges() {
        if slot[a] != usize::MAX && slot[b] != usize::MAX {
            adjacency[slot[a]].push(slot[b]);
            adjacency[slot[b]].push(slot[a]);
        }
    }
    let perm = reverse_cuthill_mckee(&adjacency);
    let mut rank = vec![0; free.len()];
    for (k, &v) in perm.iter().enumerate() {
        rank[v] = k;
    }
    // Position of each mesh node in the permuted system.
    let pos: Vec<Option<usize>> = slot
        .iter()
        .map(|&s| (s != usize::MAX).then(|| rank[s]))
        .collect();
    let mut hess = Skyline::with_pattern(
        free.len(),
        adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().map(move |&b| (a, b)))
            .map(|(a, b)| (rank[a], rank[b])),
    );

    let sup = |g: &[f64]| g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut stats = SolveStats {
        iterations: 0,
        residual: f64::INFINITY,
        history: Vec::new(),
        newton_steps: 0,
        gradient_steps: 0,
    };
    let mut g = space.energy_gradient_with(&u, pair, &load_vec)?;
    let mut energy = space.energy_with(&u, pair, &load_vec)?;
    for it in 0..opts.max_iterations {
        let r = sup(&g);
        stats.history.push(r);
        stats.residual = r;
        stats.iterations = it;
        if r <= opts.gradient_tolerance {
            break;
        }
        if free.is_empty() {
            break;
        }

        hess.clear();
        let blocks = space.element_hessians(&u, pair, opts.hessian_regularization)?;
        for (tri, block) in mesh.triangles.iter().zip(&blocks) {
            for i in 0..3 {
                let Some(pi) = pos[tri[i]] else { continue };
                for j in 0..=i {
                    let Some(pj) = pos[tri[j]] else { continue };
                    hess.add(pi, pj, block[i][j]);
                }
            }
        }
        let diag: Vec<f64> = (0..free.len()).map(|k| hess.get(k, k)).collect();
        let mut rhs = vec![0.0; free.len()];
        for (node, p) in pos.iter().enumerate() {
            if let Some(p) = p {
                rhs[*p] = -g[node];
            }
        }

        let newton = if hess.cholesky() {
            let d = hess.solve(&rhs);
            let slope: f64 = d.iter().zip(&rhs).map(|(a, b)| -a * b).sum();
            (slope < 0.0 && d.iter().all(|v| v.is_finite())).then_some(d)
        } else {
            None
        };
        let mut candidates = Vec::with_capacity(2);
        if let Some(d) = newton {
            candidates.push((d, true));
        }
        let descent: Vec<f64> = rhs
            .iter()
            .zip(&diag)
            .map(|(r, d)| if *d > 0.0 { r / d } else { *r })
            .collect();
        candidates.push((descent, false));

        let mut accepted = false;
        for (dir, is_newton) in candidates {
            let mut step = vec![0.0; u.len()];
            for (node, p) in pos.iter().enumerate() {
                if let Some(p) = p {
                    step[node] = dir[*p];
                }
            }
            let slope: f64 = step.iter().zip(&g).map(|(s, gi)| s * gi).sum();
            let mut t = 1.0;
            let mut trial = vec![0.0; u.len()];
            for _ in 0..=opts.max_backtracks {
                for k in 0..u.len() {
                    trial[k] = u[k] + t * step[k];
                }
                let e = space.energy_with(&trial, pair, &load_vec)?;
                if e < energy && e <= energy + opts.armijo * t * slope {
                    energy = e;
                    accepted = true;
                    break;
                }
                t *= opts.shrink;
            }
            if accepted && t == 1.0 {
                // A full step that still descends is extended to the line
                // minimum; this matters where V has unbounded curvature.
                if let Some(ts) = derivative_line_search(&space, pair, &load_vec, &u, &step)? {
                    if ts > 1.0 {
                        let ext: Vec<f64> = u.iter().zip(&step).map(|(a, b)| a + ts * b).collect();
                        let e = space.energy_with(&ext, pair, &load_vec)?;
                        if e <= energy {
                            trial = ext;
                            energy = e;
                        }
                    }
                }
            }
            if !accepted {
                // Near the minimizer energy differences drown in roundoff;
                // minimize along the line using the directional derivative.
                if let Some(t) = derivative_line_search(&space, pair, &load_vec, &u, &step)? {
                    for k in 0..u.len() {
                        trial[k] = u[k] + t * step[k];
                    }
                    let gt = space.energy_gradient_with(&trial, pair, &load_vec)?;
                    if sup(&gt) < r || is_newton {
                        energy = space.energy_with(&trial, pair, &load_vec)?;
                        accepted = true;
                    }
                }
            }
            if accepted {
                u = trial;
                if is_newton {
                    stats.newton_steps += 1;
                } else {
                    stats.gradient_steps += 1;
                }
                break;
            }
        }
        if !accepted {
            return Err(Error::Solver {
                iterations: it,
                residual: r,
                history: stats.history,
            });
        }
        g = space.energy_gradient_with(&u, pair, &load_vec)?;
        stats.iterations = it + 1;
    }
    let r = sup(&g);
    stats.residual = r;
    if stats.history.last() != Some(&r) {
        stats.history.push(r);
    }
    if r > opts.gradient_tolerance {
        return Err(Error::Solver {
            iterations: stats.iterations,
            residual: r,
            history: stats.history,
        });
    }
    let field = ScalarField {
        mesh,
        gradients: space.gradients(&u),
        values: u,
        energy,
    };
    Ok(Solution { field, stats })
}

/// Root of `φ'(t) = ∇F(u + t d)·d` on `t > 0` by bracketing and Illinois
/// regula falsi. `None` if `d` is not a descent direction.
fn derivative_line_search(space: &FemSpace, pair: &DualPair, load_vec: &[f64], u: &[f64], d: &[f64]) -> Result<Option<f64>> {
    let dphi = |t: f64| -> Result<f64> {
        let x: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + t * b).collect();
        let g = space.energy_gradient_with(&x, pair, load_vec)?;
        Ok(g.iter().zip(d).map(|(a, b)| a * b).sum())
    };
    let (mut lo, mut flo) = (0.0, dphi(0.0)?);
    if !(flo < 0.0) {
        return Ok(None);
    }
    let (mut hi, mut fhi) = (1.0, dphi(1.0)?);
    let mut grow = 0;
    while fhi < 0.0 {
        lo = hi;
        flo = fhi;
        hi *= 2.0;
        fhi = dphi(hi)?;
        grow += 1;
        if grow > 40 {
            return Ok(Some(hi));
        }
    }
    let mut side = 0i8;
    for _ in 0..60 {
        let t = (lo * fhi - hi * flo) / (fhi - flo);
        let ft = dphi(t)?;
        if ft == 0.0 || (hi - lo) <= 1e-14 * hi {
            return Ok(Some(t));
        }
        if ft < 0.0 {
            lo = t;
            flo = ft;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = ft;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(Some(if flo.abs() < fhi.abs() { lo } else { hi }))
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::{ExactWulff, ScalarField};
use crate::geometry::{ConeSpec, Mesh};
use crate::norm::DualPair;

/// A scalar field that can be sampled off the nodes.
pub trait FlowField {
    /// `u(x)`, or `None` when `x` is outside the domain.
    fn value(&self, x: [f64; 2]) -> Option<f64>;
    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]>;
}

impl FlowField for ExactWulff {
    fn value(&self, x: [f64; 2]) -> Option<f64> {
        (self.norm().eval(&x) <= self.radius()).then(|| self.u(&x))
    }

    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let g = self.du(&x)?;
        Ok([g[0], g[1]])
    }
}

/// Continuous reconstruction of a P1 field: area-weighted nodal gradients
/// `G_i`, and `u(x) = Σ λ_i (u_i + G_i·(x − x_i))` on the containing triangle.
pub struct DiscreteField<'a> {
    field: &'a ScalarField,
    nodal: Vec<[f64; 2]>,
    grid: Grid,
}

struct Grid {
    origin: [f64; 2],
    cell: f64,
    dims: [usize; 2],
    buckets: Vec<Vec<usize>>,
}

impl Grid {
    fn new(mesh: &Mesh) -> Self {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for v in &mesh.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let cell = mesh.h.max(extent / 512.0);
        let dims = [
            ((hi[0] - lo[0]) / cell) as usize + 1,
            ((hi[1] - lo[1]) / cell) as usize + 1,
        ];
        let mut grid = Grid {
            origin: lo,
            cell,
            dims,
            buckets: vec![Vec::new(); dims[0] * dims[1]],
        };
        for t in 0..mesh.num_triangles() {
            let c = mesh.corners(t);
            let (i0, j0) = grid.cell_of([c[0][0].min(c[1][0]).min(c[2][0]), c[0][1].min(c[1][1]).min(c[2][1])]);
            let (i1, j1) = grid.cell_of([c[0][0].max(c[1][0]).max(c[2][0]), c[0][1].max(c[1][1]).max(c[2][1])]);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    grid.buckets[j * dims[0] + i].push(t);
                }
            }
        }
        grid
    }

    fn cell_of(&self, x: [f64; 2]) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        (
            clamp((x[0] - self.origin[0]) / self.cell, self.dims[0]),
            clamp((x[1] - self.origin[1]) / self.cell, self.dims[1]),
        )
    }
}

fn barycentric(c: &[[f64; 2]; 3], x: [f64; 2]) -> [f64; 3] {
    let det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    let l1 = ((x[0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[2][0] - c[0][0]) * (x[1] - c[0][1])) / det;
    let l2 = ((c[1][0] - c[0][0]) * (x[1] - c[0][1]) - (x[0] - c[0][0]) * (c[1][1] - c[0][1])) / det;
    [1.0 - l1 - l2, l1, l2]
}

const LOCATE_TOL: f64 = 1e-9;

impl<'a> DiscreteField<'a> {
    pub fn new(field: &'a ScalarField) -> Self {
        let mesh = &field.mesh;
        let mut nodal = vec![[0.0; 2]; mesh.num_vertices()];
        let mut weight = vec![0.0; mesh.num_vertices()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let a = mesh.triangle_area(t);
            let g = field.gradients[t];
            for &i in tri {
                nodal[i][0] += a * g[0];
                nodal[i][1] += a * g[1];
                weight[i] += a;
            }
        }
        for (g, w) in nodal.iter_mut().zip(&weight) {
            g[0] /= w;
            g[1] /= w;
        }
        DiscreteField {
            field,
            nodal,
            grid: Grid::new(mesh),
        }
    }

    /// Containing triangle and barycentric coordinates of `x`.
    pub fn locate(&self, x: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let (i, j) = self.grid.cell_of(x);
        let mesh = &self.field.mesh;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.grid.buckets[j * self.grid.dims[0] + i] {
            let l = barycentric(&mesh.corners(t), x);
            let worst = l[0].min(l[1]).min(l[2]);
            if worst >= -LOCATE_TOL && best.is_none_or(|b| worst > b.2) {
                best = Some((t, l, worst));
            }
        }
        best.map(|(t, l, _)| (t, l))
    }
}

impl FlowField for DiscreteField<'_> {
    fn value(&self, x: [f64; 2]) -> Option<f64> {
        let (t, l) = self.locate(x)?;
        let mesh = &self.field.mesh;
        Some(
            mesh.triangles[t]
                .iter()
                .zip(l)
                .map(|(&i, li)| {
                    let xi = mesh.vertices[i];
                    let g = self.nodal[i];
                    li * (self.field.values[i] + g[0] * (x[0] - xi[0]) + g[1] * (x[1] - xi[1]))
                })
                .sum(),
        )
    }

    fn gradient(&self, x: [f64; 2]) -> Result<[f64; 2]> {
        let (t, l) = self
            .locate(x)
            .ok_or_else(|| Error::domain(format!("point {x:?} is outside the mesh")))?;
        let mut g = [0.0; 2];
        for (&i, li) in self.field.mesh.triangles[t].iter().zip(l) {
            g[0] += li * self.nodal[i][0];
            g[1] += li * self.nodal[i][1];
        }
        Ok(g)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowOptions {
    pub max_steps: usize,
    /// The trace stops once `H(Du)` drops below this.
    pub critical: f64,
    /// Step halvings allowed before the trace is declared stalled.
    pub max_halvings: u32,
    /// Snap to a ray when within this fraction of the step length.
    pub snap_fraction: f64,
    /// Leave a ray once the inward velocity component exceeds this fraction.
    pub release_fraction: f64,
    /// Residuals are reported only where the average `H(Du)` is at least this.
    pub residual_floor: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_steps: 20_000,
            critical: 1e-8,
            max_halvings: 40,
            snap_fraction: 0.05,
            release_fraction: 0.1,
            residual_floor: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `H(Du)` fell below the critical threshold.
    CriticalPoint,
    /// No step, however short, increases `u`: a local maximum of the field.
    LocalMaximum,
    Gamma0,
    MaxSteps,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowPoint {
    pub t: f64,
    pub x: [f64; 2],
    pub u: f64,
    pub h_of_du: f64,
    /// Ray the point is held on, if any.
    pub ray: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Flowline {
    pub points: Vec<FlowPoint>,
    pub stop: StopReason,
    /// `u` increases strictly along the accepted points.
    pub strictly_increasing: bool,
    pub reached_gamma1: bool,
    /// Per step, `|Δu/Δt − H̄|/H̄` with `H̄` the Simpson average of `H(Du)`;
    /// `None` where `H̄` is below the residual floor.
    pub residuals: Vec<Option<f64>>,
}

impl Flowline {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().flatten().copied().fold(0.0, f64::max)
    }

    pub fn end(&self) -> [f64; 2] {
        self.points.last().expect("a flowline has a start").x
    }

    pub fn length(&self) -> f64 {
        self.points
            .windows(2)
            .map(|w| (w[1].x[0] - w[0].x[0]).hypot(w[1].x[1] - w[0].x[1]))
            .sum()
    }
}

fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn axpy(x: [f64; 2], s: f64, v: [f64; 2]) -> [f64; 2] {
    [x[0] + s * v[0], x[1] + s * v[1]]
}

fn project(x: [f64; 2], d: [f64; 2]) -> [f64; 2] {
    let s = dot(x, d).max(0.0);
    [s * d[0], s * d[1]]
}

struct Stage {
    next: [f64; 2],
    k1: [f64; 2],
    k4: [f64; 2],
}

struct Tracer<'a> {
    field: &'a dyn FlowField,
    pair: &'a DualPair,
    cone: ConeSpec,
    opts: &'a FlowOptions,
}

impl Tracer<'_> {
    fn speed(&self, x: [f64; 2]) -> Result<f64> {
        Ok(self.pair.dual_eval(&self.field.gradient(x)?))
    }

    /// `DH(Du(x))`, projected onto ray `ray` when constrained. `None` at a
    /// critical point.
    fn velocity(&self, x: [f64; 2], ray: Option<usize>) -> Result<Option<[f64; 2]>> {
        let du = self.field.gradient(x)?;
        if self.pair.dual_eval(&du) < self.opts.critical {
            return Ok(None);
        }
        let g = self.pair.dual_grad(&du)?;
        let v = [g[0], g[1]];
        Ok(Some(match (ray, self.cone.rays()) {
            (Some(k), Some(rays)) => {
                let d = rays[k];
                let s = dot(v, d);
                [s * d[0], s * d[1]]
            }
            _ => v,
        }))
    }

    fn inside(&self, x: [f64; 2]) -> bool {
        self.field.value(x).is_some()
    }

    /// One RK4 step; `Err(true)` when a stage leaves the domain, `Err(false)`
    /// when a stage hits a critical point.
    fn rk4(&self, x: [f64; 2], dt: f64, ray: Option<usize>) -> Result<Result<Stage, bool>> {
        let Some(k1) = self.velocity(x, ray)? else { return Ok(Err(false)) };
        let mut stages = [k1; 4];
        for (s, frac) in [(1, 0.5), (2, 0.5), (3, 1.0)] {
            let p = axpy(x, frac * dt, stages[s - 1]);
            if !self.inside(p) {
                return Ok(Err(true));
            }
            match self.velocity(p, ray)? {
                Some(k) => stages[s] = k,
                None => return Ok(Err(false)),
            }
        }
        let [k1, k2, k3, k4] = stages;
        let step = [
            (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]) / 6.0,
            (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]) / 6.0,
        ];
        Ok(Ok(Stage {
            next: axpy(x, dt, step),
            k1,
            k4,
        }))
    }

    /// Ray to snap onto when `x` is outside the cone or close to a ray.
    fn snap(&self, x: [f64; 2], dist: f64) -> Option<(usize, [f64; 2])> {
        let rays = self.cone.rays()?;
        let outside = !self.cone.contains(x, 0.0);
        (0..2)
            .map(|k| {
                let nu = self.cone.ray_outward_normal(k).expect("sector");
                (k, dot(x, nu))
            })
            .filter(|&(_, s)| s >= -dist || outside)
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| (k, project(x, rays[k])))
    }

    fn released(&self, x: [f64; 2], ray: usize) -> Result<bool> {
        let Some(v) = self.velocity(x, None)? else { return Ok(false) };
        let nu = self.cone.ray_outward_normal(ray).expect("sector");
        let norm = v[0].hypot(v[1]);
        Ok(-dot(v, nu) > self.opts.release_fraction * norm)
    }
}

/// Integrate `ẋ = DH(Du(x))` from `x0` by RK4 with step `dt`, halving on
/// rejection. A step is rejected when the first and last stage velocities
/// point against each other or when `u` fails to increase. Near a ray of the
/// cone the point is snapped onto it and the velocity is projected along it.
pub fn trace_flowline(
    field: &dyn FlowField,
    pair: &DualPair,
    x0: [f64; 2],
    dt: f64,
    cone: &ConeSpec,
    opts: &FlowOptions,
) -> Result<Flowline> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::config("flowline step must be positive"));
    }
    if !cone.contains(x0, 1e-12) {
        return Err(Error::domain(format!("start point {x0:?} is outside the cone")));
    }
    let Some(u0) = field.value(x0) else {
        return Err(Error::domain(format!("start point {x0:?} is outside the domain")));
    };
    let tracer = Tracer {
        field,
        pair,
        cone: *cone,
        opts,
    };
    let mut ray = cone.ray_of(x0, 1e-12);
    let mut x = match (ray, cone.rays()) {
        (Some(k), Some(rays)) => project(x0, rays[k]),
        _ => x0,
    };
    let mut u = field.value(x).unwrap_or(u0);
    let mut h = tracer.speed(x)?;
    let mut t = 0.0;
    let mut points = vec![FlowPoint { t, x, u, h_of_du: h, ray }];
    let mut residuals = Vec::new();
    let mut reached_gamma1 = ray.is_some();
    let mut step = dt;
    let mut halvings = 0;

    let stop = loop {
        if h < opts.critical {
            break StopReason::CriticalPoint;
        }
        if points.len() > opts.max_steps {
            break StopReason::MaxSteps;
        }
        if let Some(k) = ray {
            if tracer.released(x, k)? {
                ray = None;
            }
        }
        let mut exits = false;
        let accepted = match tracer.rk4(x, step, ray)? {
            Ok(Stage { mut next, k1, k4 }) if dot(k1, k4) >= 0.0 => {
                let mut next_ray = ray;
                let len = step * k1[0].hypot(k1[1]);
                if ray.is_none() {
                    if let Some((k, p)) = tracer.snap(next, opts.snap_fraction * len) {
                        next = p;
                        next_ray = Some(k);
                    }
                }
                match field.value(next) {
                    Some(un) if un > u => Some((next, un, next_ray)),
                    Some(_) => None,
                    None => {
                        exits = true;
                        None
                    }
                }
            }
            Ok(_) => None,
            Err(outside) => {
                exits = outside;
                None
            }
        };
        match accepted {
            Some((next, un, next_ray)) => {
                let hn = tracer.speed(next)?;
                let mut mid = [0.5 * (x[0] + next[0]), 0.5 * (x[1] + next[1])];
                if let (Some(k), Some(rays)) = (next_ray, cone.rays()) {
                    mid = project(mid, rays[k]);
                }
                let hm = tracer.speed(mid)?;
                let avg = (h + 4.0 * hm + hn) / 6.0;
                residuals.push((avg >= opts.residual_floor).then(|| ((un - u) / step - avg).abs() / avg));
                t += step;
                x = next;
                u = un;
                h = hn;
                ray = next_ray;
                reached_gamma1 |= ray.is_some();
                points.push(FlowPoint { t, x, u, h_of_du: h, ray });
                if halvings > 0 {
                    halvings -= 1;
                    step *= 2.0;
                }
            }
            None => {
                if halvings >= opts.max_halvings {
                    break if exits { StopReason::Gamma0 } else { StopReason::LocalMaximum };
                }
                halvings += 1;
                step *= 0.5;
            }
        }
    };
    let strictly_increasing = points.windows(2).all(|w| w[1].u > w[0].u);
    Ok(Flowline {
        points,
        stop,
        strictly_increasing,
        reached_gamma1,
        residuals,
    })
}

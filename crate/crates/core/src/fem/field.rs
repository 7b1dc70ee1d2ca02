use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::norm::DualPair;

/// Right-hand side `f` of the torsion problem.
#[derive(Clone)]
pub enum Load {
    Constant(f64),
    Function(Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>),
}

impl Load {
    pub fn function(f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Load::Function(Arc::new(f))
    }

    pub fn at(&self, x: [f64; 2]) -> f64 {
        match self {
            Load::Constant(c) => *c,
            Load::Function(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Load::Constant(c) if *c == 0.0)
    }
}

impl From<f64> for Load {
    fn from(c: f64) -> Self {
        Load::Constant(c)
    }
}

impl fmt::Debug for Load {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Load::Constant(c) => write!(f, "Constant({c})"),
            Load::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// P1 finite-element space on a mesh with zero trace on `Γ0`.
#[derive(Debug, Clone)]
pub struct FemSpace {
    mesh: Arc<Mesh>,
    areas: Vec<f64>,
    /// Gradients of the three barycentric coordinates of each triangle.
    shape_grads: Vec<[[f64; 2]; 3]>,
    dirichlet: Vec<bool>,
}

impl FemSpace {
    pub fn new(mesh: Arc<Mesh>) -> Result<Self> {
        let mut areas = Vec::with_capacity(mesh.num_triangles());
        let mut shape_grads = Vec::with_capacity(mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let [p0, p1, p2] = mesh.corners(t);
            let area = mesh.triangle_area(t);
            if !(area > 0.0) {
                return Err(Error::Consistency(format!("triangle {t} has non-positive area")));
            }
            let s = 0.5 / area;
            shape_grads.push([
                [(p1[1] - p2[1]) * s, (p2[0] - p1[0]) * s],
                [(p2[1] - p0[1]) * s, (p0[0] - p2[0]) * s],
                [(p0[1] - p1[1]) * s, (p1[0] - p0[0]) * s],
            ]);
            areas.push(area);
        }
        let dirichlet = mesh.dirichlet_mask();
        Ok(FemSpace {
            mesh,
            areas,
            shape_grads,
            dirichlet,
        })
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_vertices()
    }

    pub fn area(&self, t: usize) -> f64 {
        self.areas[t]
    }

    pub fn shape_gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.shape_grads[t]
    }

    pub fn is_dirichlet(&self, node: usize) -> bool {
        self.dirichlet[node]
    }

    pub fn dirichlet_mask(&self) -> &[bool] {
        &self.dirichlet
    }

    fn check(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.num_nodes() {
            return Err(Error::Consistency(format!(
                "field has {} values but the mesh has {} vertices",
                values.len(),
                self.num_nodes()
            )));
        }
        Ok(())
    }

    /// Gradient of the linear interpolant on triangle `t`.
    pub fn element_gradient(&self, t: usize, values: &[f64]) -> [f64; 2] {
        let tri = self.mesh.triangles[t];
        let g = &self.shape_grads[t];
        let mut d = [0.0; 2];
        for k in 0..3 {
            d[0] += values[tri[k]] * g[k][0];
            d[1] += values[tri[k]] * g[k][1];
        }
        d
    }

    pub fn gradients(&self, values: &[f64]) -> Vec<[f64; 2]> {
        (0..self.mesh.num_triangles())
            .map(|t| self.element_gradient(t, values))
            .collect()
    }

    /// `∫ f φ_i` by the edge-midpoint rule, zero at Dirichlet nodes.
    pub fn load_vector(&self, load: &Load) -> Vec<f64> {
        let contributions: Vec<[f64; 3]> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let p = self.mesh.corners(t);
                let mid = |a: usize, b: usize| [0.5 * (p[a][0] + p[b][0]), 0.5 * (p[a][1] + p[b][1])];
                // Midpoint opposite vertex k is shared by the other two.
                let f = [load.at(mid(1, 2)), load.at(mid(2, 0)), load.at(mid(0, 1))];
                let w = self.areas[t] / 3.0;
                [
                    w * 0.5 * (f[1] + f[2]),
                    w * 0.5 * (f[2] + f[0]),
                    w * 0.5 * (f[0] + f[1]),
                ]
            })
            .collect();
        let mut b = vec![0.0; self.num_nodes()];
        for (tri, c) in self.mesh.triangles.iter().zip(&contributions) {
            for k in 0..3 {
                b[tri[k]] += c[k];
            }
        }
        for (bi, d) in b.iter_mut().zip(&self.dirichlet) {
            if *d {
                *bi = 0.0;
            }
        }
        b
    }

    /// `Σ_T |T| V(Du_T) − bᵀu`.
    pub fn energy_with(&self, values: &[f64], pair: &DualPair, load_vec: &[f64]) -> Result<f64> {
        self.check(values)?;
        let parts: Vec<f64> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let d = self.element_gradient(t, values);
                self.areas[t] * pair.lagrangian(&d)
            })
            .collect();
        let stored: f64 = parts.iter().sum();
        let work: f64 = values.iter().zip(load_vec).map(|(u, b)| u * b).sum();
        Ok(stored - work)
    }

    /// Gradient of the discrete energy with respect to the nodal values;
    /// Dirichlet entries are zero.
    pub fn energy_gradient_with(&self, values: &[f64], pair: &DualPair, load_vec: &[f64]) -> Result<Vec<f64>> {
        self.check(values)?;
        let parts: Vec<[f64; 3]> = (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| -> Result<[f64; 3]> {
                let d = self.element_gradient(t, values);
                let dv = pair.lagrangian_grad(&d)?;
                let g = &self.shape_grads[t];
                let a = self.areas[t];
                Ok([0, 1, 2].map(|k| a * (dv[0] * g[k][0] + dv[1] * g[k][1])))
            })
            .collect::<Result<_>>()?;
        let mut out: Vec<f64> = load_vec.iter().map(|b| -b).collect();
        for (tri, c) in self.mesh.triangles.iter().zip(&parts) {
            for k in 0..3 {
                out[tri[k]] += c[k];
            }
        }
        for (o, d) in out.iter_mut().zip(&self.dirichlet) {
            if *d {
                *o = 0.0;
            }
        }
        Ok(out)
    }

    /// Per-element `3×3` Hessian blocks `|T| ∇φ_iᵀ (Hess V + δI) ∇φ_j`.
    pub fn element_hessians(&self, values: &[f64], pair: &DualPair, delta: f64) -> Result<Vec<[[f64; 3]; 3]>> {
        self.check(values)?;
        (0..self.mesh.num_triangles())
            .into_par_iter()
            .map(|t| {
                let d = self.element_gradient(t, values);
                let h = pair.lagrangian_hessian(&d)?;
                let m = [[h[0] + delta, h[1]], [h[2], h[3] + delta]];
                let g = &self.shape_grads[t];
                let a = self.areas[t];
                let mut block = [[0.0; 3]; 3];
                for i in 0..3 {
                    let mg = [
                        m[0][0] * g[i][0] + m[0][1] * g[i][1],
                        m[1][0] * g[i][0] + m[1][1] * g[i][1],
                    ];
                    for j in 0..3 {
                        block[i][j] = a * (mg[0] * g[j][0] + mg[1] * g[j][1]);
                    }
                }
                Ok(block)
            })
            .collect()
    }
}

/// Piecewise-linear field on a mesh, vanishing at `Γ0` nodes.
#[derive(Debug, Clone)]
pub struct ScalarField {
    pub mesh: Arc<Mesh>,
    pub values: Vec<f64>,
    /// Elementwise-constant gradient of the interpolant.
    pub gradients: Vec<[f64; 2]>,
    pub energy: f64,
}

impl ScalarField {
    /// Build a field from nodal values; `Γ0` values are set to zero.
    pub fn from_values(space: &FemSpace, mut values: Vec<f64>, pair: &DualPair, load: &Load) -> Result<Self> {
        space.check(&values)?;
        for (v, d) in values.iter_mut().zip(space.dirichlet_mask()) {
            if *d {
                *v = 0.0;
            }
        }
        let load_vec = space.load_vector(load);
        let energy = space.energy_with(&values, pair, &load_vec)?;
        Ok(ScalarField {
            mesh: space.mesh().clone(),
            gradients: space.gradients(&values),
            values,
            energy,
        })
    }

    /// Nodal interpolant of `u`.
    pub fn interpolate(space: &FemSpace, u: impl Fn([f64; 2]) -> f64, pair: &DualPair, load: &Load) -> Result<Self> {
        let values = space.mesh().vertices.iter().map(|&x| u(x)).collect();
        Self::from_values(space, values, pair, load)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Value at the mesh vertex closest to `x`.
    pub fn value_near(&self, x: [f64; 2]) -> f64 {
        self.values[self.mesh.nearest_vertex(x)]
    }
}

fn space_for(field: &ScalarField) -> Result<FemSpace> {
    if field.values.len() != field.mesh.num_vertices() || field.gradients.len() != field.mesh.num_triangles() {
        return Err(Error::Consistency("field does not conform to its mesh".into()));
    }
    FemSpace::new(field.mesh.clone())
}

/// Discrete energy `F[u] = ∫ V(Du) − f u`.
pub fn energy(field: &ScalarField, pair: &DualPair, load: &Load) -> Result<f64> {
    let space = space_for(field)?;
    space.energy_with(&field.values, pair, &space.load_vector(load))
}

/// Discrete weak-form residual `∫ DV(Du)·Dφ_i − f φ_i`.
pub fn energy_gradient(field: &ScalarField, pair: &DualPair, load: &Load) -> Result<Vec<f64>> {
    let space = space_for(field)?;
    space.energy_gradient_with(&field.values, pair, &space.load_vector(load))
}

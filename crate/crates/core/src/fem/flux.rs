use std::collections::BTreeMap;

use serde::Serialize;

use super::field::ScalarField;
use crate::error::{Error, Result};
use crate::geometry::{BoundaryEdge, BoundaryTag};
use crate::norm::DualPair;

/// `H(Du)` on the triangle adjacent to a `Γ0` edge, at the edge midpoint `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxSample {
    /// Arc length along `Γ0` up to `z`.
    pub arc_param: f64,
    pub z: [f64; 2],
    pub h0_of_z: f64,
    pub h_of_du: f64,
    pub triangle: usize,
}

/// Conormal flux `DV(Du)·ν` on a `Γ1` edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeumannSample {
    pub z: [f64; 2],
    pub normal: [f64; 2],
    pub conormal_flux: f64,
    /// `|DV(Du)|` on the same triangle, for scale.
    pub dv_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxReport {
    pub gamma0: Vec<FluxSample>,
    pub gamma1: Vec<NeumannSample>,
}

impl FluxReport {
    pub fn max_relative_deviation(&self, target: impl Fn(&FluxSample) -> f64) -> f64 {
        self.gamma0
            .iter()
            .map(|s| {
                let q = target(s);
                (s.h_of_du - q).abs() / q
            })
            .fold(0.0, f64::max)
    }

    /// Largest `|DV(Du)·ν|` over `Γ1`, zero when `Γ1` is empty.
    pub fn max_conormal_flux(&self) -> f64 {
        self.gamma1
            .iter()
            .map(|s| s.conormal_flux.abs())
            .fold(0.0, f64::max)
    }
}

/// Order `Γ0` edges along the boundary: a chain in a sector, a loop starting
/// at the smallest polar angle in the full plane.
fn ordered_gamma0(edges: &[&BoundaryEdge], vertices: &[[f64; 2]]) -> Vec<usize> {
    let mut from: BTreeMap<usize, usize> = BTreeMap::new();
    let mut ends = std::collections::BTreeSet::new();
    for (k, e) in edges.iter().enumerate() {
        from.insert(e.edge[0], k);
        ends.insert(e.edge[1]);
    }
    let mut starts: Vec<usize> = edges
        .iter()
        .enumerate()
        .filter(|(_, e)| !ends.contains(&e.edge[0]))
        .map(|(k, _)| k)
        .collect();
    if starts.is_empty() {
        let angle = |k: usize| {
            let a = vertices[edges[k].edge[0]];
            a[1].atan2(a[0]).rem_euclid(std::f64::consts::TAU)
        };
        let first = (0..edges.len())
            .min_by(|&a, &b| angle(a).total_cmp(&angle(b)))
            .expect("non-empty");
        starts.push(first);
    }
    // Several chains can only arise from disconnected Γ0 pieces; keep them in
    // order of their starting angle.
    starts.sort_by(|&a, &b| {
        let pa = vertices[edges[a].edge[0]];
        let pb = vertices[edges[b].edge[0]];
        pa[1].atan2(pa[0]).total_cmp(&pb[1].atan2(pb[0]))
    });
    let mut seen = vec![false; edges.len()];
    let mut order = Vec::with_capacity(edges.len());
    for s in starts {
        let mut k = s;
        while !seen[k] {
            seen[k] = true;
            order.push(k);
            match from.get(&edges[k].edge[1]) {
                Some(&next) => k = next,
                None => break,
            }
        }
    }
    order.extend((0..edges.len()).filter(|&k| !seen[k]));
    order
}

/// Interior-limit flux data on `Γ0` and the natural boundary condition check on `Γ1`.
pub fn boundary_flux(field: &ScalarField, pair: &DualPair) -> Result<FluxReport> {
    let mesh = &field.mesh;
    if field.gradients.len() != mesh.num_triangles() {
        return Err(Error::Consistency("field does not conform to its mesh".into()));
    }
    let adjacent = mesh.boundary_triangles();
    let g0: Vec<&BoundaryEdge> = mesh.boundary_edges(BoundaryTag::Gamma0).collect();
    if g0.is_empty() {
        return Err(Error::domain("Γ0 is empty"));
    }
    let mut gamma0 = Vec::with_capacity(g0.len());
    let mut arc = 0.0;
    for k in ordered_gamma0(&g0, &mesh.vertices) {
        let e = g0[k];
        let (_, len) = mesh.edge_normal(e);
        let t = adjacent[&e.edge];
        let z = mesh.edge_midpoint(e);
        gamma0.push(FluxSample {
            arc_param: arc + 0.5 * len,
            z,
            h0_of_z: pair.primal().eval(&z),
            h_of_du: pair.dual_eval(&field.gradients[t]),
            triangle: t,
        });
        arc += len;
    }
    let mut gamma1 = Vec::new();
    for e in mesh.boundary_edges(BoundaryTag::Gamma1) {
        let (normal, _) = mesh.edge_normal(e);
        let t = adjacent[&e.edge];
        let dv = pair.lagrangian_grad(&field.gradients[t])?;
        gamma1.push(NeumannSample {
            z: mesh.edge_midpoint(e),
            normal,
            conormal_flux: dv[0] * normal[0] + dv[1] * normal[1],
            dv_norm: dv[0].hypot(dv[1]),
        });
    }
    Ok(FluxReport { gamma0, gamma1 })
}

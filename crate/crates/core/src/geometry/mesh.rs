use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boundary portion: `Γ0 = Σ ∩ ∂Ω` carries the Dirichlet condition, `Γ1`
/// (the part of `∂Σ` inside `Ω`) the natural Neumann condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryTag {
    Gamma0,
    Gamma1,
}

/// Boundary edge oriented so that the mesh interior lies on its left.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub edge: [usize; 2],
    pub tag: BoundaryTag,
}

/// Conforming triangulation of `Ω ∩ Σ`; triangles are counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    pub h: f64,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl Mesh {
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn corners(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.corners(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Interior angles of triangle `t` in degrees.
    pub fn angles_deg(&self, t: usize) -> [f64; 3] {
        let p = self.corners(t);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let a = p[k];
            let b = p[(k + 1) % 3];
            let c = p[(k + 2) % 3];
            let u = [b[0] - a[0], b[1] - a[1]];
            let v = [c[0] - a[0], c[1] - a[1]];
            let cross = u[0] * v[1] - u[1] * v[0];
            let dot = u[0] * v[0] + u[1] * v[1];
            out[k] = cross.abs().atan2(dot).to_degrees();
        }
        out
    }

    pub fn min_angle_deg(&self) -> f64 {
        (0..self.triangles.len())
            .flat_map(|t| self.angles_deg(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Unique undirected edges, sorted.
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut e: Vec<[usize; 2]> = self
            .triangles
            .iter()
            .flat_map(|t| {
                (0..3).map(move |k| {
                    let a = t[k];
                    let b = t[(k + 1) % 3];
                    [a.min(b), a.max(b)]
                })
            })
            .collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    pub fn boundary_edges(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundaryEdge> {
        self.boundary.iter().filter(move |e| e.tag == tag)
    }

    /// `true` for every vertex touched by a `Γ0` edge.
    pub fn dirichlet_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for e in self.boundary_edges(BoundaryTag::Gamma0) {
            mask[e.edge[0]] = true;
            mask[e.edge[1]] = true;
        }
        mask
    }

    /// Outward unit normal and length of a boundary edge.
    pub fn edge_normal(&self, e: &BoundaryEdge) -> ([f64; 2], f64) {
        let p = self.vertices[e.edge[0]];
        let q = self.vertices[e.edge[1]];
        let d = [q[0] - p[0], q[1] - p[1]];
        let len = d[0].hypot(d[1]);
        ([d[1] / len, -d[0] / len], len)
    }

    pub fn edge_midpoint(&self, e: &BoundaryEdge) -> [f64; 2] {
        let p = self.vertices[e.edge[0]];
        let q = self.vertices[e.edge[1]];
        [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]
    }

    /// Map from each boundary edge (as an ordered pair) to its adjacent triangle.
    pub fn boundary_triangles(&self) -> BTreeMap<[usize; 2], usize> {
        let mut map = BTreeMap::new();
        let wanted: std::collections::BTreeSet<[usize; 2]> =
            self.boundary.iter().map(|e| e.edge).collect();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let e = [tri[k], tri[(k + 1) % 3]];
                if wanted.contains(&e) {
                    map.insert(e, t);
                }
            }
        }
        map
    }

    /// Check the structural invariants: valid indices, positive orientation,
    /// every boundary edge tagged exactly once and matching the set of edges
    /// with a single adjacent triangle, no duplicated vertices.
    pub fn validate(&self) -> Result<()> {
        let n = self.vertices.len();
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= n) {
                return Err(Error::Consistency(format!("triangle {t} has an invalid vertex index")));
            }
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::Consistency(format!("triangle {t} is not positively oriented")));
            }
        }
        let mut count: BTreeMap<[usize; 2], usize> = BTreeMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                *count.entry([a.min(b), a.max(b)]).or_default() += 1;
            }
        }
        if count.values().any(|&c| c > 2) {
            return Err(Error::Consistency("edge shared by more than two triangles".into()));
        }
        let mut open: Vec<[usize; 2]> = count
            .iter()
            .filter(|(_, &c)| c == 1)
            .map(|(e, _)| *e)
            .collect();
        let mut tagged: Vec<[usize; 2]> = self
            .boundary
            .iter()
            .map(|e| [e.edge[0].min(e.edge[1]), e.edge[0].max(e.edge[1])])
            .collect();
        open.sort_unstable();
        tagged.sort_unstable();
        let before = tagged.len();
        tagged.dedup();
        if tagged.len() != before {
            return Err(Error::Consistency("boundary edge tagged more than once".into()));
        }
        if open != tagged {
            return Err(Error::Consistency(
                "tagged boundary edges do not match the mesh boundary".into(),
            ));
        }
        let mut sorted: Vec<[f64; 2]> = self.vertices.clone();
        sorted.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        for i in 0..sorted.len() {
            for j in (i + 1)..sorted.len() {
                if sorted[j][0] - sorted[i][0] > 1e-12 {
                    break;
                }
                if (sorted[j][1] - sorted[i][1]).abs() <= 1e-12 {
                    return Err(Error::Consistency("duplicated vertex".into()));
                }
            }
        }
        Ok(())
    }

    /// Index of the vertex closest to `p`.
    pub fn nearest_vertex(&self, p: [f64; 2]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, v) in self.vertices.iter().enumerate() {
            let d = (v[0] - p[0]).hypot(v[1] - p[1]);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("mesh serializes")
    }
}

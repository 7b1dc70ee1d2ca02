use std::collections::{BTreeMap, BTreeSet};

use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};

use super::domain::{arc_angles, ray_radii, Domain};
use super::mesh::{signed_area, BoundaryEdge, BoundaryTag, Mesh};
use super::{polar_angle, unit};
use crate::error::{Error, Result};

/// Mesh generation parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Target edge length.
    pub h: f64,
    /// Angle bound handed to the Delaunay refinement.
    pub angle_limit_deg: f64,
    /// Meshes whose smallest angle falls below this are rejected.
    pub min_angle_deg: f64,
    /// Refine boundary spacing along the rays near the apex of a sector.
    pub grade_apex: bool,
}

impl MeshOptions {
    pub fn new(h: f64) -> Self {
        MeshOptions {
            h,
            angle_limit_deg: 25.0,
            min_angle_deg: 20.0,
            grade_apex: true,
        }
    }
}

/// A mesh of an outer domain together with the submesh covering an inner
/// domain whose boundary arc is resolved by mesh edges.
#[derive(Debug, Clone)]
pub struct NestedMesh {
    pub outer: Mesh,
    pub inner: Mesh,
    /// Vertex `i` of `inner` is vertex `inner_to_outer[i]` of `outer`.
    pub inner_to_outer: Vec<usize>,
}

pub fn triangulate(domain: &Domain, h: f64) -> Result<Mesh> {
    triangulate_with(domain, &MeshOptions::new(h))
}

pub fn triangulate_with(domain: &Domain, opts: &MeshOptions) -> Result<Mesh> {
    let raw = build(domain, None, opts)?;
    let all: Vec<usize> = (0..raw.triangles.len()).collect();
    finish(domain, &raw, &all, opts)
}

/// Triangulate `outer` so that the curved boundary of `inner` is made of mesh
/// edges. Both domains must share the same cone and `inner ⊂ outer` strictly
/// away from the apex.
pub fn triangulate_nested(outer: &Domain, inner: &Domain, h: f64) -> Result<NestedMesh> {
    let opts = MeshOptions::new(h);
    if outer.cone() != inner.cone() {
        return Err(Error::domain("nested domains must share the cone"));
    }
    let (a, b) = outer.cone().aperture();
    for k in 0..=512 {
        let phi = a + (b - a) * k as f64 / 512.0;
        if inner.radial(phi) >= outer.radial(phi) - 0.5 * h {
            return Err(Error::domain(
                "inner domain must lie inside the outer one, at least h/2 away from its arc",
            ));
        }
    }
    let raw = build(outer, Some(inner), &opts)?;
    let all: Vec<usize> = (0..raw.triangles.len()).collect();
    let outer_mesh = finish(outer, &raw, &all, &opts)?;
    let inside: Vec<usize> = (0..raw.triangles.len())
        .filter(|&t| {
            let [p, q, r] = raw.triangles[t].map(|v| raw.vertices[v]);
            let c = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0];
            c[0].hypot(c[1]) < inner.radial(polar_angle(c))
        })
        .collect();
    let inner_mesh = finish(inner, &raw, &inside, &opts)?;
    // `finish` compacts vertices in first-use order; recover the map by position.
    let mut by_pos: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    for (i, v) in outer_mesh.vertices.iter().enumerate() {
        by_pos.insert((v[0].to_bits(), v[1].to_bits()), i);
    }
    let inner_to_outer = inner_mesh
        .vertices
        .iter()
        .map(|v| {
            by_pos
                .get(&(v[0].to_bits(), v[1].to_bits()))
                .copied()
                .ok_or_else(|| Error::Meshing("inner vertex missing from outer mesh".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NestedMesh {
        outer: outer_mesh,
        inner: inner_mesh,
        inner_to_outer,
    })
}

struct Raw {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
}

#[derive(Clone, Copy)]
enum Curve {
    Outer,
    Inner,
}

fn build(domain: &Domain, inner: Option<&Domain>, opts: &MeshOptions) -> Result<Raw> {
    let h = opts.h;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::config("mesh size h must be positive"));
    }
    let cone = domain.cone();
    if !cone.is_full() && cone.width() >= 2.0 * std::f64::consts::PI - 1e-12 {
        return Err(Error::Meshing("slit sectors (width 2π) are not supported".into()));
    }
    if domain.size() / h > 2000.0 {
        return Err(Error::Meshing(format!("h = {h} is too small for this domain")));
    }
    let (a, b) = cone.aperture();
    let mut points: Vec<[f64; 2]> = Vec::new();
    let mut edges: Vec<[usize; 2]> = Vec::new();
    let mut curve_of_point: Vec<Option<Curve>> = Vec::new();

    let push_arc = |dom: &Domain, curve: Curve, points: &mut Vec<[f64; 2]>, edges: &mut Vec<[usize; 2]>, tags: &mut Vec<Option<Curve>>, closed: bool| {
        let angles = arc_angles(dom, a, b, h, if closed { 8 } else { 2 });
        let n = if closed { angles.len() - 1 } else { angles.len() };
        let first = points.len();
        for &phi in &angles[..n] {
            points.push(dom.boundary_point(phi));
            tags.push(Some(curve));
        }
        for i in 0..n {
            if i + 1 < n {
                edges.push([first + i, first + i + 1]);
            } else if closed {
                edges.push([first + i, first]);
            }
        }
        (first, first + n - 1)
    };

    if cone.is_full() {
        points.push([0.0, 0.0]);
        curve_of_point.push(None);
        push_arc(domain, Curve::Outer, &mut points, &mut edges, &mut curve_of_point, true);
        if let Some(inner) = inner {
            push_arc(inner, Curve::Inner, &mut points, &mut edges, &mut curve_of_point, true);
        }
    } else {
        let rays = cone.rays().expect("sector");
        points.push([0.0, 0.0]);
        curve_of_point.push(None);
        let grading: Vec<f64> = if opts.grade_apex {
            vec![h / 8.0, h / 4.0, h / 2.0, h]
        } else {
            Vec::new()
        };
        let (o0, o1) = push_arc(domain, Curve::Outer, &mut points, &mut edges, &mut curve_of_point, false);
        let arc_ends = inner.map(|inner| {
            push_arc(inner, Curve::Inner, &mut points, &mut edges, &mut curve_of_point, false)
        });
        for (k, ray) in rays.iter().enumerate() {
            let len = domain.radial(if k == 0 { a } else { b });
            let mut required = grading.clone();
            let inner_len = inner.map(|d| d.radial(if k == 0 { a } else { b }));
            if let Some(r) = inner_len {
                required.push(r);
            }
            let radii = ray_radii(len, &required, h);
            let mut prev = 0usize;
            for &r in &radii[1..] {
                let idx = if (r - len).abs() <= 1e-12 * len {
                    if k == 0 { o0 } else { o1 }
                } else if inner_len.is_some_and(|l| (r - l).abs() <= 1e-12 * len) {
                    let (i0, i1) = arc_ends.expect("inner arc");
                    if k == 0 { i0 } else { i1 }
                } else {
                    points.push([r * ray[0], r * ray[1]]);
                    curve_of_point.push(None);
                    points.len() - 1
                };
                edges.push([prev, idx]);
                prev = idx;
            }
        }
    }

    let mut verts: Vec<Point2<f64>> = points.iter().map(|p| Point2::new(p[0], p[1])).collect();
    if inner.is_some() {
        // The parity rule behind `exclude_outer_faces` would drop the region
        // enclosed twice; refine inside a bounding box instead and discard
        // exterior faces afterwards.
        let lo = points.iter().fold([f64::INFINITY; 2], |m, p| [m[0].min(p[0]), m[1].min(p[1])]);
        let hi = points.iter().fold([f64::NEG_INFINITY; 2], |m, p| [m[0].max(p[0]), m[1].max(p[1])]);
        let (lo, hi) = ([lo[0] - 2.0 * h, lo[1] - 2.0 * h], [hi[0] + 2.0 * h, hi[1] + 2.0 * h]);
        for c in [lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]] {
            verts.push(Point2::new(c[0], c[1]));
            curve_of_point.push(None);
        }
    }
    let mut conflict = false;
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::try_bulk_load_cdt(verts, edges, |_| conflict = true)
            .map_err(|e| Error::Meshing(format!("triangulation failed: {e:?}")))?;
    if conflict || cdt.num_vertices() != curve_of_point.len() {
        return Err(Error::Meshing("boundary polyline self-intersects".into()));
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(opts.angle_limit_deg))
        .with_max_allowed_area(3f64.sqrt() / 4.0 * h * h)
        .with_max_additional_vertices(500 * points.len() + 40 * (domain.size() / h).powi(2) as usize)
        .exclude_outer_faces(inner.is_none());
    let result = cdt.refine(params);
    if !result.refinement_complete {
        return Err(Error::Meshing("Delaunay refinement did not complete".into()));
    }
    let excluded: BTreeSet<usize> = result.excluded_faces.iter().map(|f| f.index()).collect();

    let mut vertices: Vec<[f64; 2]> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            [p.x, p.y]
        })
        .collect();

    // Vertices created by splitting constraint edges sit on chords; move every
    // vertex of a curved constraint onto its curve.
    let mut on_curve: Vec<Option<Curve>> = (0..vertices.len()).map(|_| None).collect();
    for (i, c) in curve_of_point.into_iter().enumerate() {
        on_curve[i] = c;
    }
    for e in cdt.undirected_edges() {
        if !e.is_constraint_edge() {
            continue;
        }
        let [p, q] = e.vertices();
        let (pi, qi) = (p.fix().index(), q.fix().index());
        let (pp, qp) = (vertices[pi], vertices[qi]);
        let m = [0.5 * (pp[0] + qp[0]), 0.5 * (pp[1] + qp[1])];
        if !cone.is_full() && same_ray(cone, pp, qp) {
            continue;
        }
        let phi = polar_angle(m);
        let r = m[0].hypot(m[1]);
        let curve = match inner {
            Some(inner) if (r - inner.radial(phi)).abs() < (r - domain.radial(phi)).abs() => Curve::Inner,
            _ => Curve::Outer,
        };
        for v in [pi, qi] {
            if on_curve[v].is_none() && vertices[v] != [0.0, 0.0] {
                on_curve[v] = Some(curve);
            }
        }
    }
    for (v, c) in vertices.iter_mut().zip(&on_curve) {
        let target = match c {
            Some(Curve::Outer) => domain,
            Some(Curve::Inner) => inner.expect("inner curve"),
            None => continue,
        };
        let phi = polar_angle(*v);
        let r = target.radial(phi);
        let u = unit(phi);
        *v = [r * u[0], r * u[1]];
    }

    let triangles: Vec<[usize; 3]> = cdt
        .inner_faces()
        .filter(|f| !excluded.contains(&f.fix().index()))
        .map(|f| f.vertices().map(|v| v.fix().index()))
        .filter(|tri| {
            if inner.is_none() {
                return true;
            }
            let [p, q, r] = tri.map(|v| vertices[v]);
            let c = [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0];
            domain.contains(c, 1e-9)
        })
        .collect();
    Ok(Raw { vertices, triangles })
}

fn same_ray(cone: &super::ConeSpec, p: [f64; 2], q: [f64; 2]) -> bool {
    let tol = 1e-9;
    let rp = cone.ray_of(p, tol);
    let rq = cone.ray_of(q, tol);
    let is_apex = |x: [f64; 2]| x[0].hypot(x[1]) <= 1e-14;
    match (rp, rq) {
        (Some(a), Some(b)) => a == b,
        (Some(_), None) => is_apex(q),
        (None, Some(_)) => is_apex(p),
        (None, None) => false,
    }
}

fn finish(domain: &Domain, raw: &Raw, keep: &[usize], opts: &MeshOptions) -> Result<Mesh> {
    let mut remap: Vec<Option<usize>> = vec![None; raw.vertices.len()];
    let mut vertices = Vec::new();
    let mut triangles = Vec::with_capacity(keep.len());
    for &t in keep {
        let tri = raw.triangles[t].map(|v| {
            *remap[v].get_or_insert_with(|| {
                vertices.push(raw.vertices[v]);
                vertices.len() - 1
            })
        });
        let [p, q, r] = tri.map(|v| vertices[v]);
        if !(signed_area(p, q, r) > 0.0) {
            return Err(Error::Meshing("snapping the boundary inverted a triangle".into()));
        }
        triangles.push(tri);
    }
    if triangles.is_empty() {
        return Err(Error::Meshing("mesh has no triangles".into()));
    }
    let mut count: BTreeMap<[usize; 2], (usize, [usize; 2])> = BTreeMap::new();
    for tri in &triangles {
        for k in 0..3 {
            let e = [tri[k], tri[(k + 1) % 3]];
            let entry = count.entry([e[0].min(e[1]), e[0].max(e[1])]).or_insert((0, e));
            entry.0 += 1;
        }
    }
    let cone = domain.cone();
    let boundary = count
        .values()
        .filter(|(c, _)| *c == 1)
        .map(|&(_, edge)| {
            let tag = if !cone.is_full() && same_ray(cone, vertices[edge[0]], vertices[edge[1]]) {
                BoundaryTag::Gamma1
            } else {
                BoundaryTag::Gamma0
            };
            BoundaryEdge { edge, tag }
        })
        .collect();
    let mesh = Mesh {
        vertices,
        triangles,
        boundary,
        h: opts.h,
    };
    let min_angle = mesh.min_angle_deg();
    if min_angle < opts.min_angle_deg {
        return Err(Error::Meshing(format!(
            "minimum angle {min_angle:.2}° is below {}°",
            opts.min_angle_deg
        )));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{ConeSpec, DomainSpec};
    use crate::norm::{Norm, NormSpec};

    fn disc(cone: ConeSpec) -> Domain {
        Domain::new(&DomainSpec::wulff(1.0, cone), &Norm::euclidean(2)).unwrap()
    }

    #[test]
    fn quarter_disc_mesh() {
        let m = triangulate(&disc(ConeSpec::quarter()), 0.1).unwrap();
        m.validate().unwrap();
        assert!(m.num_triangles() > 50 && m.num_triangles() < 600, "{}", m.num_triangles());
        assert!(m.min_angle_deg() >= 20.0);
        assert!(m.boundary_edges(BoundaryTag::Gamma1).count() > 0);
        let area_err = (m.area() - std::f64::consts::FRAC_PI_4).abs();
        assert!(area_err <= 3.0 * 0.01, "{area_err}");
    }

    #[test]
    fn full_disc_is_all_dirichlet() {
        let m = triangulate(&disc(ConeSpec::FullPlane), 0.2).unwrap();
        m.validate().unwrap();
        assert!(m.boundary.iter().all(|e| e.tag == BoundaryTag::Gamma0));
        for e in &m.boundary {
            for v in e.edge {
                let p = m.vertices[v];
                assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn boundary_orientation_has_interior_on_left() {
        let m = triangulate(&disc(ConeSpec::sector(0.3, 2.0)), 0.15).unwrap();
        for e in &m.boundary {
            let (n, _) = m.edge_normal(e);
            let mid = m.edge_midpoint(e);
            let probe = [mid[0] - 1e-3 * n[0], mid[1] - 1e-3 * n[1]];
            assert!(m.triangles.iter().enumerate().any(|(t, _)| {
                let [a, b, c] = m.corners(t);
                signed_area(a, b, probe) >= 0.0 && signed_area(b, c, probe) >= 0.0 && signed_area(c, a, probe) >= 0.0
            }));
        }
    }

    #[test]
    fn p4_wulff_boundary_vertices_on_level_set() {
        let norm = Norm::new(NormSpec::p_norm(4.0, 2)).unwrap();
        let d = Domain::new(&DomainSpec::wulff(1.0, ConeSpec::quarter()), &norm).unwrap();
        let m = triangulate(&d, 0.1).unwrap();
        for e in m.boundary_edges(BoundaryTag::Gamma0) {
            for v in e.edge {
                assert!((norm.eval(&m.vertices[v]) - 1.0).abs() <= 2.0 * 0.01);
            }
        }
    }

    #[test]
    fn nested_mesh_shares_vertices() {
        let outer = disc(ConeSpec::quarter());
        let inner = Domain::new(&DomainSpec::ellipse(0.7, 0.5, ConeSpec::quarter()), &Norm::euclidean(2)).unwrap();
        let nm = triangulate_nested(&outer, &inner, 0.1).unwrap();
        nm.outer.validate().unwrap();
        nm.inner.validate().unwrap();
        for (i, &j) in nm.inner_to_outer.iter().enumerate() {
            assert_eq!(nm.inner.vertices[i], nm.outer.vertices[j]);
        }
        assert!((nm.inner.area() - std::f64::consts::PI * 0.35 / 4.0).abs() < 0.03);
    }

    #[test]
    fn rejects_slit() {
        let d = disc(ConeSpec::sector(0.0, 2.0 * std::f64::consts::PI));
        assert!(matches!(triangulate(&d, 0.2), Err(Error::Meshing(_))));
    }
}

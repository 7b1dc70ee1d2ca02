use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{Norm, NormSpec};

use super::{unit, BoundaryTag, ConeSpec};

/// Shape of the bounded domain `Ω`. Every shape is star-shaped with respect
/// to the origin and is described by its radial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShapeSpec {
    /// Wulff shape `B_R(O, H0)`. Without `norm` the problem's `H0` is used.
    Wulff {
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
    /// Axis-aligned Euclidean ellipse with semi-axes `a` (x) and `b` (y).
    Ellipse { a: f64, b: f64 },
    /// Boundary `r(φ) = R (1 + ε cos(mφ)) / H0(u(φ))`.
    PerturbedWulff {
        radius: f64,
        amplitude: f64,
        mode: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        norm: Option<NormSpec>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub shape: ShapeSpec,
    #[serde(default)]
    pub cone: ConeSpec,
}

impl DomainSpec {
    pub fn wulff(radius: f64, cone: ConeSpec) -> Self {
        DomainSpec {
            shape: ShapeSpec::Wulff { radius, norm: None },
            cone,
        }
    }

    pub fn ellipse(a: f64, b: f64, cone: ConeSpec) -> Self {
        DomainSpec {
            shape: ShapeSpec::Ellipse { a, b },
            cone,
        }
    }

    pub fn perturbed_wulff(radius: f64, amplitude: f64, mode: u32, cone: ConeSpec) -> Self {
        DomainSpec {
            shape: ShapeSpec::PerturbedWulff {
                radius,
                amplitude,
                mode,
                norm: None,
            },
            cone,
        }
    }
}

#[derive(Debug, Clone)]
enum Shape {
    Wulff { radius: f64, norm: Norm },
    Ellipse { a: f64, b: f64 },
    Perturbed { radius: f64, amplitude: f64, mode: u32, norm: Norm },
}

/// A validated domain `Ω ∩ Σ`.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: DomainSpec,
    shape: Shape,
    cone: ConeSpec,
}

impl Domain {
    /// Build the domain; Wulff-type shapes without their own norm use `problem_norm`.
    pub fn new(spec: &DomainSpec, problem_norm: &Norm) -> Result<Self> {
        spec.cone.validate()?;
        let pick_norm = |own: &Option<NormSpec>| -> Result<Norm> {
            let n = match own {
                Some(s) => Norm::new(s.clone())?,
                None => problem_norm.clone(),
            };
            if n.dim() != 2 {
                return Err(Error::config("domains are planar; norm must be 2-dimensional"));
            }
            Ok(n)
        };
        let shape = match &spec.shape {
            ShapeSpec::Wulff { radius, norm } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::config("Wulff radius must be positive"));
                }
                Shape::Wulff {
                    radius: *radius,
                    norm: pick_norm(norm)?,
                }
            }
            ShapeSpec::Ellipse { a, b } => {
                if !(*a > 0.0 && *b > 0.0 && a.is_finite() && b.is_finite()) {
                    return Err(Error::config("ellipse semi-axes must be positive"));
                }
                Shape::Ellipse { a: *a, b: *b }
            }
            ShapeSpec::PerturbedWulff {
                radius,
                amplitude,
                mode,
                norm,
            } => {
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::config("Wulff radius must be positive"));
                }
                if !(amplitude.abs() < 1.0) {
                    return Err(Error::config(format!(
                        "perturbation amplitude must satisfy |ε| < 1, got {amplitude}"
                    )));
                }
                Shape::Perturbed {
                    radius: *radius,
                    amplitude: *amplitude,
                    mode: *mode,
                    norm: pick_norm(norm)?,
                }
            }
        };
        Ok(Domain {
            spec: spec.clone(),
            shape,
            cone: spec.cone,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    /// Distance from the origin to `∂Ω` in direction `φ`.
    pub fn radial(&self, phi: f64) -> f64 {
        let u = unit(phi);
        match &self.shape {
            Shape::Wulff { radius, norm } => radius / norm.eval(&u),
            Shape::Ellipse { a, b } => {
                1.0 / ((u[0] / a).powi(2) + (u[1] / b).powi(2)).sqrt()
            }
            Shape::Perturbed {
                radius,
                amplitude,
                mode,
                norm,
            } => radius * (1.0 + amplitude * (*mode as f64 * phi).cos()) / norm.eval(&u),
        }
    }

    pub fn boundary_point(&self, phi: f64) -> [f64; 2] {
        let r = self.radial(phi);
        let u = unit(phi);
        [r * u[0], r * u[1]]
    }

    /// Closed membership in `Ω ∩ Σ`, up to a relative tolerance.
    pub fn contains(&self, x: [f64; 2], rel_tol: f64) -> bool {
        let len = x[0].hypot(x[1]);
        if len == 0.0 {
            return true;
        }
        self.cone.contains(x, rel_tol) && len <= self.radial(x[1].atan2(x[0])) * (1.0 + rel_tol)
    }

    /// Radius of the exact Wulff shape, if the domain is one for `norm`.
    pub fn wulff_radius_for(&self, norm: &Norm) -> Option<f64> {
        match &self.shape {
            Shape::Wulff { radius, norm: own } if own.spec() == norm.spec() => Some(*radius),
            _ => None,
        }
    }

    /// Representative length scale (largest boundary distance on a coarse sample).
    pub fn size(&self) -> f64 {
        let (a, b) = self.cone.aperture();
        (0..=64)
            .map(|k| self.radial(a + (b - a) * k as f64 / 64.0))
            .fold(0.0, f64::max)
    }
}

/// Point `R·u(φ)/H0(u(φ))` of the Wulff sphere in direction `φ`.
pub fn wulff_point(norm: &Norm, radius: f64, phi: f64) -> [f64; 2] {
    let p = norm.sphere_point(&unit(phi), radius);
    [p[0], p[1]]
}

/// `n` points of `∂B_R(O, H0)` spanning the cone aperture. For the full plane
/// the angles are `2πk/n`; for a sector both bounding rays are included.
pub fn wulff_boundary_points(norm: &Norm, radius: f64, n: usize, cone: &ConeSpec) -> Result<Vec<[f64; 2]>> {
    cone.validate()?;
    if n < 4 {
        return Err(Error::config("need at least 4 boundary points"));
    }
    if norm.dim() != 2 {
        return Err(Error::config("Wulff boundary sampling is planar"));
    }
    let (a, b) = cone.aperture();
    let denom = if cone.is_full() { n } else { n - 1 } as f64;
    Ok((0..n)
        .map(|k| wulff_point(norm, radius, a + (b - a) * k as f64 / denom))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundarySegment {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

/// Closed counter-clockwise polyline of `∂(Ω ∩ Σ)` with tagged segments.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPolyline {
    pub points: Vec<[f64; 2]>,
    pub segments: Vec<BoundarySegment>,
}

impl BoundaryPolyline {
    pub fn segments_with(&self, tag: BoundaryTag) -> impl Iterator<Item = &BoundarySegment> {
        self.segments.iter().filter(move |s| s.tag == tag)
    }

    pub fn length(&self, tag: BoundaryTag) -> f64 {
        self.segments_with(tag)
            .map(|s| {
                let p = self.points[s.a];
                let q = self.points[s.b];
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }
}

/// Angles in `[a, b]` at which `domain`'s boundary arc is split into pieces of
/// equal arc length no longer than `spacing`. Both ends are included.
pub(crate) fn arc_angles(domain: &Domain, a: f64, b: f64, spacing: f64, min_pieces: usize) -> Vec<f64> {
    let fine = 4096;
    let mut cumulative = Vec::with_capacity(fine + 1);
    cumulative.push(0.0);
    let mut prev = domain.boundary_point(a);
    for k in 1..=fine {
        let p = domain.boundary_point(a + (b - a) * k as f64 / fine as f64);
        let last = *cumulative.last().expect("non-empty");
        cumulative.push(last + (p[0] - prev[0]).hypot(p[1] - prev[1]));
        prev = p;
    }
    let total = cumulative[fine];
    let pieces = ((total / spacing).ceil() as usize).max(min_pieces);
    let mut angles = Vec::with_capacity(pieces + 1);
    let mut j = 0;
    for i in 0..=pieces {
        if i == 0 {
            angles.push(a);
            continue;
        }
        if i == pieces {
            angles.push(b);
            continue;
        }
        let target = total * i as f64 / pieces as f64;
        while cumulative[j + 1] < target {
            j += 1;
        }
        let frac = (target - cumulative[j]) / (cumulative[j + 1] - cumulative[j]);
        angles.push(a + (b - a) * (j as f64 + frac) / fine as f64);
    }
    angles
}

/// Radii along a ray of length `length`: the `required` radii are kept and
/// every gap is split evenly into pieces no longer than `spacing`.
pub(crate) fn ray_radii(length: f64, required: &[f64], spacing: f64) -> Vec<f64> {
    let mut anchors: Vec<f64> = vec![0.0];
    anchors.extend(required.iter().copied().filter(|r| *r > 0.0 && *r < length));
    anchors.push(length);
    anchors.sort_by(|a, b| a.total_cmp(b));
    anchors.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * length);
    let mut radii = vec![0.0];
    for w in anchors.windows(2) {
        let gap = w[1] - w[0];
        let pieces = (gap / spacing).ceil().max(1.0) as usize;
        for i in 1..=pieces {
            radii.push(if i == pieces {
                w[1]
            } else {
                w[0] + gap * i as f64 / pieces as f64
            });
        }
    }
    radii
}

/// Boundary of `Ω ∩ Σ` as a tagged polyline with segments no longer than
/// `resolution`. For a sector the two straight pieces along the rays are `Γ1`
/// and the outer arc is `Γ0`; for the full plane everything is `Γ0`.
pub fn classify_boundary(domain: &Domain, resolution: f64) -> Result<BoundaryPolyline> {
    domain.cone.validate()?;
    if !(resolution > 0.0) {
        return Err(Error::config("boundary resolution must be positive"));
    }
    let (a, b) = domain.cone.aperture();
    let mut points = Vec::new();
    let mut segments = Vec::new();
    let push_seg = |segments: &mut Vec<BoundarySegment>, a, b, tag| {
        segments.push(BoundarySegment { a, b, tag })
    };
    if domain.cone.is_full() {
        let angles = arc_angles(domain, a, b, resolution, 8);
        let n = angles.len() - 1;
        for &phi in &angles[..n] {
            points.push(domain.boundary_point(phi));
        }
        for i in 0..n {
            push_seg(&mut segments, i, (i + 1) % n, BoundaryTag::Gamma0);
        }
    } else {
        let rays = domain.cone.rays().expect("sector");
        let start_len = domain.radial(a);
        let end_len = domain.radial(b);
        points.push([0.0, 0.0]);
        for r in &ray_radii(start_len, &[], resolution)[1..] {
            points.push([r * rays[0][0], r * rays[0][1]]);
            let k = points.len() - 1;
            push_seg(&mut segments, k - 1, k, BoundaryTag::Gamma1);
        }
        let angles = arc_angles(domain, a, b, resolution, 2);
        for &phi in &angles[1..] {
            points.push(domain.boundary_point(phi));
            let k = points.len() - 1;
            push_seg(&mut segments, k - 1, k, BoundaryTag::Gamma0);
        }
        let back = ray_radii(end_len, &[], resolution);
        for r in back.iter().rev().skip(1) {
            let k = points.len() - 1;
            if *r == 0.0 {
                push_seg(&mut segments, k, 0, BoundaryTag::Gamma1);
            } else {
                points.push([r * rays[1][0], r * rays[1][1]]);
                push_seg(&mut segments, k, k + 1, BoundaryTag::Gamma1);
            }
        }
    }
    Ok(BoundaryPolyline { points, segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::flower;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn euclid() -> Norm {
        Norm::euclidean(2)
    }

    #[test]
    fn wulff_points_of_unit_circle() {
        let pts = wulff_boundary_points(&euclid(), 1.0, 4, &ConeSpec::FullPlane).unwrap();
        assert_eq!(pts.len(), 4);
        for p in pts {
            assert!((p[0].hypot(p[1]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn p4_diagonal_point() {
        let n = Norm::new(NormSpec::p_norm(4.0, 2)).unwrap();
        let p = wulff_point(&n, 1.0, FRAC_PI_4);
        let expect = 2f64.powf(-0.25);
        assert!((p[0] - expect).abs() < 1e-14 && (p[1] - expect).abs() < 1e-14);
    }

    #[test]
    fn flower_axis_point() {
        let n = Norm::new(flower::flower_spec()).unwrap();
        let p = wulff_point(&n, 1.0, 0.0);
        assert!((p[0] - 1.0).abs() < 1e-14 && p[1].abs() < 1e-14);
    }

    #[test]
    fn wulff_points_lie_on_level_set() {
        for spec in [NormSpec::p_norm(3.0, 2), NormSpec::diagonal(&[4.0, 1.0]), flower::flower_spec()] {
            let n = Norm::new(spec).unwrap();
            let pts = wulff_boundary_points(&n, 1.3, 64, &ConeSpec::quarter()).unwrap();
            for p in &pts {
                assert!((n.eval(p) - 1.3).abs() <= 1e-10);
            }
            assert!(pts[0][1].abs() < 1e-15);
            assert!(pts[63][0].abs() < 1e-12);
        }
    }

    #[test]
    fn quarter_disc_classification() {
        let d = Domain::new(&DomainSpec::wulff(1.0, ConeSpec::quarter()), &euclid()).unwrap();
        let poly = classify_boundary(&d, 0.1).unwrap();
        // The loop is closed and each segment appears once.
        assert_eq!(poly.segments.len(), poly.points.len());
        assert!((poly.length(BoundaryTag::Gamma1) - 2.0).abs() < 1e-12);
        let arc = poly.length(BoundaryTag::Gamma0);
        assert!((arc - FRAC_PI_2).abs() < 1e-3);
        let pieces: Vec<_> = poly.segments.iter().map(|s| s.tag).collect();
        let switches = pieces.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(switches, 2);
    }

    #[test]
    fn full_disc_has_no_gamma1() {
        let d = Domain::new(&DomainSpec::wulff(1.0, ConeSpec::FullPlane), &euclid()).unwrap();
        let poly = classify_boundary(&d, 0.1).unwrap();
        assert_eq!(poly.segments_with(BoundaryTag::Gamma1).count(), 0);
    }

    #[test]
    fn half_ellipse() {
        let d = Domain::new(&DomainSpec::ellipse(1.5, 1.0, ConeSpec::sector(0.0, PI)), &euclid()).unwrap();
        let poly = classify_boundary(&d, 0.05).unwrap();
        assert!((poly.length(BoundaryTag::Gamma1) - 3.0).abs() < 1e-12);
        for s in poly.segments_with(BoundaryTag::Gamma0) {
            let p = poly.points[s.a];
            assert!(((p[0] / 1.5).powi(2) + p[1].powi(2) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn invalid_domains() {
        let e = euclid();
        assert!(Domain::new(&DomainSpec::perturbed_wulff(1.0, 1.0, 3, ConeSpec::FullPlane), &e).is_err());
        assert!(Domain::new(&DomainSpec::wulff(-1.0, ConeSpec::FullPlane), &e).is_err());
        assert!(Domain::new(&DomainSpec::wulff(1.0, ConeSpec::sector(0.0, 0.0)), &e).is_err());
    }

    #[test]
    fn perturbed_radial_profile() {
        let d = Domain::new(&DomainSpec::perturbed_wulff(1.0, 0.1, 3, ConeSpec::FullPlane), &euclid()).unwrap();
        assert!((d.radial(0.0) - 1.1).abs() < 1e-15);
        assert!((d.radial(PI / 3.0) - 0.9).abs() < 1e-15);
    }

    #[test]
    fn domain_json_shape() {
        let d: DomainSpec = serde_json::from_str(
            r#"{"kind":"perturbed_wulff","radius":1,"amplitude":0.1,"mode":3,"cone":{"kind":"full_plane"}}"#,
        )
        .unwrap();
        assert_eq!(d, DomainSpec::perturbed_wulff(1.0, 0.1, 3, ConeSpec::FullPlane));
        let w: DomainSpec = serde_json::from_str(r#"{"kind":"wulff","radius":2}"#).unwrap();
        assert_eq!(w, DomainSpec::wulff(2.0, ConeSpec::FullPlane));
    }

    #[test]
    fn ray_radii_keep_required_points() {
        let r = ray_radii(1.0, &[0.025, 0.05, 0.1], 0.1);
        assert_eq!(r[0], 0.0);
        assert_eq!(*r.last().unwrap(), 1.0);
        for req in [0.025, 0.05, 0.1] {
            assert!(r.iter().any(|x| (x - req).abs() < 1e-15));
        }
        assert!(r.windows(2).all(|w| w[1] - w[0] <= 0.1 + 1e-12 && w[1] > w[0]));
    }
}

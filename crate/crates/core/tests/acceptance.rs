//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion whose failure is recorded in [`KNOWN_UNATTAINABLE`] prints
//! FAIL but does not fail the process.

use std::f64::consts::{FRAC_PI_4, SQRT_2};
use std::sync::Arc;
use std::time::{Duration, Instant};

use wulff_core::experiments::{
    overdetermined_check, radii_bounds, rigidity_claims, trace_flowline, DiscreteField, ExperimentConfig,
    FlowOptions, Problem, Profile,
};
use wulff_core::fem::{boundary_flux, exact_wulff_solution, solve_torsion, Load, SolverOptions};
use wulff_core::geometry::{triangulate, triangulate_nested, ConeSpec, Domain, DomainSpec};
use wulff_core::norm::{check_gradient_identities, check_norm_axioms, flower, DualPair, Norm, NormSpec};
use wulff_core::{rng, Error};

/// Sub-checks that cannot pass, with the reason.
const KNOWN_UNATTAINABLE: &[(&str, &str)] = &[(
    "4-norm quarter sector halving factor",
    "the exact solution on the Wulff shape of the 4/3-norm behaves like |x2|^(4/3) \
     near the axes, so the sup-norm error of P1 interpolation decays like h^(4/3): \
     the halving factor tends to 2^(4/3) = 2.52 < 3",
)];

struct Check {
    name: String,
    passed: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    checks: Vec<Check>,
}

impl Criterion {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    fn runtime(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check("runtime", t < limit, format!("{:.2} s < {:.0} s", t.as_secs_f64(), limit.as_secs_f64()));
    }
}

fn euclid() -> NormSpec {
    NormSpec::euclidean(2)
}

fn pnorm(p: f64) -> NormSpec {
    NormSpec::p_norm(p, 2)
}

fn solve(spec: &DomainSpec, pair: &DualPair, h: f64, load: Load) -> wulff_core::fem::Solution {
    let d = Domain::new(spec, pair.primal()).unwrap();
    let mesh = Arc::new(triangulate(&d, h).unwrap());
    solve_torsion(mesh, pair, &load, &SolverOptions::default()).unwrap()
}

fn norm_identities() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let seed = rng::DEFAULT_SEED;
    let specs = [
        ("euclidean", euclid()),
        ("p=1.5", pnorm(1.5)),
        ("p=2", pnorm(2.0)),
        ("p=3", pnorm(3.0)),
        ("p=4", pnorm(4.0)),
        ("quad diag(4,1)", NormSpec::diagonal(&[4.0, 1.0])),
        ("flower", flower::flower_spec()),
    ];
    for (label, spec) in specs {
        let pair = DualPair::from_spec(spec).unwrap();
        let ids = check_gradient_identities(&pair, 1000, seed).unwrap();
        let ax = check_norm_axioms(pair.primal(), 1000, seed).unwrap();
        let euler_tol = if ids.analytic_gradient { 1e-8 } else { 1e-5 };
        c.check(
            format!("{label} euler"),
            ids.euler_max_rel <= euler_tol,
            format!("{:.1e} <= {euler_tol:.0e}", ids.euler_max_rel),
        );
        c.check(
            format!("{label} unit dual gradient"),
            ids.unit_dual_max <= 1e-6,
            format!("{:.1e} <= 1e-6", ids.unit_dual_max),
        );
        c.check(
            format!("{label} triangle"),
            ax.triangle_violation <= 1e-10,
            format!("{:.1e} <= 1e-10", ax.triangle_violation),
        );
    }
    c.runtime(start, Duration::from_secs(5));
    c
}

fn duality() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let mut r = rng::seeded(rng::DEFAULT_SEED);
    for p in [1.5, 3.0, 4.0] {
        let numeric = DualPair::numeric(Norm::new(pnorm(p)).unwrap());
        let closed = DualPair::new(Norm::new(pnorm(p)).unwrap());
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let xi = rng::box_vector(&mut r, 2, 1.0);
            let exact = closed.dual_eval(&xi);
            worst = worst.max((numeric.dual_eval(&xi) - exact).abs() / exact);
        }
        c.check(format!("numeric dual of p={p}"), worst <= 1e-6, format!("{worst:.1e} <= 1e-6"));
    }
    for (label, spec) in [
        ("euclidean", euclid()),
        ("p=1.5", pnorm(1.5)),
        ("p=3", pnorm(3.0)),
        ("quad diag(4,1)", NormSpec::diagonal(&[4.0, 1.0])),
        ("flower", flower::flower_spec()),
    ] {
        let pair = DualPair::from_spec(spec).unwrap();
        let back = pair.dual_of_dual();
        let mut worst: f64 = 0.0;
        for k in 0..200 {
            let t = std::f64::consts::TAU * (k as f64 + 0.5) / 200.0;
            let x = [t.cos(), t.sin()];
            let h0 = pair.primal().eval(&x);
            worst = worst.max((back.eval(&x) - h0).abs() / h0);
        }
        c.check(format!("{label} dual of dual"), worst <= 1e-4, format!("{worst:.1e} <= 1e-4"));
    }
    c.runtime(start, Duration::from_secs(10));
    c
}

fn appendix() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let pair = DualPair::numeric(Norm::new(flower::flower_spec()).unwrap());
    let mut worst: f64 = 0.0;
    for k in 0..200 {
        let t = -FRAC_PI_4 + FRAC_PI_2 * (k as f64 + 0.5) / 200.0;
        let u = [t.cos(), t.sin()];
        let h = pair.dual_eval(&u);
        let p = [u[0] / h, u[1] / h];
        worst = worst.max((p[0] - flower::right_parabola(p[1])).abs());
    }
    c.check("parabola", worst <= 1e-3, format!("{worst:.1e} <= 1e-3"));
    let h = pair.dual_eval(&[1.0, 1.0]);
    let corner = 1.0 / h;
    c.check(
        "corner",
        (corner - 0.828427).abs() <= 1e-3,
        format!("xi_bar = {corner:.6} vs 2(sqrt2 - 1) = {:.6}", 2.0 * (SQRT_2 - 1.0)),
    );
    match pair.dual_grad(&[corner, corner]) {
        Err(Error::NonDifferentiable { one_sided: Some((a, b)), .. }) => {
            let slopes = [-a[0] / a[1], -b[0] / b[1]];
            let expect = [-(1.0 + SQRT_2), -(SQRT_2 - 1.0)];
            let matched = expect
                .iter()
                .all(|e| slopes.iter().any(|s| (s - e).abs() <= 1e-3));
            c.check(
                "one-sided tangents differ",
                (slopes[0] - slopes[1]).abs() > 0.1 && matched,
                format!("slopes {:.4}, {:.4}", slopes[0], slopes[1]),
            );
        }
        other => c.check("one-sided tangents differ", false, format!("no corner detected: {other:?}")),
    }
    c.runtime(start, Duration::from_secs(10));
    c
}

const FRAC_PI_2: f64 = std::f64::consts::FRAC_PI_2;

/// Sup error at nodes, value at the vertex and worst relative flux error on
/// `Γ0` against the exact Wulff solution.
fn wulff_run(norm: &NormSpec, cone: ConeSpec, h: f64) -> (f64, f64, f64) {
    let pair = DualPair::from_spec(norm.clone()).unwrap();
    let sol = solve(&DomainSpec::wulff(1.0, cone), &pair, h, Load::Constant(1.0));
    let exact = exact_wulff_solution(pair.primal(), 1.0, 2).unwrap();
    let field = &sol.field;
    let err = field
        .mesh
        .vertices
        .iter()
        .zip(&field.values)
        .map(|(x, u)| (u - exact.u(x)).abs())
        .fold(0.0, f64::max);
    let origin = field.value_near([0.0, 0.0]);
    let flux = boundary_flux(field, &pair).unwrap();
    let dev = flux.max_relative_deviation(|s| s.h0_of_z / 2.0);
    (err, origin, dev)
}

fn convergence_case(c: &mut Criterion, label: &str, norm: NormSpec, cone: ConeSpec, flux_tol: f64) {
    let runs: Vec<_> = [0.1, 0.05, 0.025].iter().map(|&h| wulff_run(&norm, cone, h)).collect();
    for k in 0..2 {
        let ratio = runs[k].0 / runs[k + 1].0;
        c.check(
            format!("{label} halving factor"),
            ratio >= 3.0,
            format!("h {} -> {}: {:.3e} / {:.3e} = {ratio:.2} >= 3", [0.1, 0.05][k], [0.05, 0.025][k], runs[k].0, runs[k + 1].0),
        );
    }
    let (_, origin, dev) = runs[2];
    c.check(format!("{label} u(O)"), (origin - 0.25).abs() <= 0.005, format!("{origin:.5} = 0.25 +- 0.005"));
    c.check(
        format!("{label} flux"),
        dev <= flux_tol,
        format!("max |H(Du) - 0.5|/0.5 = {:.2}% <= {:.0}%", 100.0 * dev, 100.0 * flux_tol),
    );
}

fn convergence() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    convergence_case(&mut c, "euclidean disc", euclid(), ConeSpec::FullPlane, 0.02);
    // H is the 4-norm, so H0 is the 4/3-norm.
    convergence_case(&mut c, "4-norm quarter sector", pnorm(4.0 / 3.0), ConeSpec::quarter(), 0.05);
    c.runtime(start, Duration::from_secs(120));
    c
}

fn comparison_principles() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let bump = Load::function(|x| 1.0 + (3.0 * x[0]).sin().powi(2));
    let nonneg = [
        ("euclidean ellipse, f = 1", euclid(), DomainSpec::ellipse(1.5, 1.0, ConeSpec::FullPlane), Load::Constant(1.0)),
        ("p=3 perturbed quarter, f = 1", pnorm(3.0), DomainSpec::perturbed_wulff(1.0, 0.1, 3, ConeSpec::quarter()), Load::Constant(1.0)),
        ("quad Wulff sector, f = 1 + sin^2", NormSpec::diagonal(&[4.0, 1.0]), DomainSpec::wulff(1.0, ConeSpec::sector(0.2, 2.5)), bump),
    ];
    for (label, norm, spec, load) in nonneg {
        let pair = DualPair::from_spec(norm).unwrap();
        let sol = solve(&spec, &pair, 0.05, load);
        let min = sol.field.min_value();
        c.check(format!("nonnegativity {label}"), min >= -1e-10, format!("min u = {min:.2e} >= -1e-10"));
    }
    let nested = [
        ("ellipse in disc", euclid(), DomainSpec::wulff(1.0, ConeSpec::FullPlane), DomainSpec::ellipse(0.8, 0.5, ConeSpec::FullPlane)),
        ("ellipse in disc, quarter", euclid(), DomainSpec::wulff(1.0, ConeSpec::quarter()), DomainSpec::ellipse(0.8, 0.5, ConeSpec::quarter())),
        ("p=3 ellipse in perturbed", pnorm(3.0), DomainSpec::perturbed_wulff(1.2, 0.1, 3, ConeSpec::FullPlane), DomainSpec::ellipse(0.9, 0.6, ConeSpec::FullPlane)),
    ];
    for (label, norm, outer, inner) in nested {
        let pair = DualPair::from_spec(norm).unwrap();
        let od = Domain::new(&outer, pair.primal()).unwrap();
        let id = Domain::new(&inner, pair.primal()).unwrap();
        let nm = triangulate_nested(&od, &id, 0.05).unwrap();
        let opts = SolverOptions::default();
        let uo = solve_torsion(Arc::new(nm.outer), &pair, &Load::Constant(1.0), &opts).unwrap();
        let ui = solve_torsion(Arc::new(nm.inner), &pair, &Load::Constant(1.0), &opts).unwrap();
        let worst = nm
            .inner_to_outer
            .iter()
            .enumerate()
            .map(|(i, &j)| ui.field.values[i] - uo.field.values[j])
            .fold(f64::NEG_INFINITY, f64::max);
        c.check(
            format!("monotonicity {label}"),
            worst <= 1e-8,
            format!("max (u_inner - u_outer) = {worst:.2e} <= 1e-8 on {} shared nodes", nm.inner_to_outer.len()),
        );
    }
    c.runtime(start, Duration::from_secs(60));
    c
}

fn discrimination() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    for (label, cone) in [("full plane", ConeSpec::FullPlane), ("quarter sector", ConeSpec::quarter())] {
        let run = |spec: DomainSpec| {
            let cfg = ExperimentConfig::new(euclid(), spec, 0.025).with_profile(Profile::linear(0.5));
            overdetermined_check(&Problem::new(cfg).unwrap()).unwrap()
        };
        let wulff = run(DomainSpec::wulff(1.0, cone));
        let bumpy = run(DomainSpec::perturbed_wulff(1.0, 0.1, 3, cone));
        let theta = wulff.stat("theta_pass").unwrap();
        let dev = wulff.stat("max_deviation").unwrap();
        c.check(
            format!("{label} Wulff disc passes"),
            wulff.passed() && dev <= theta,
            format!("max deviation {:.2}% <= theta_pass {:.2}%", 100.0 * dev, 100.0 * theta),
        );
        let bdev = bumpy.stat("max_deviation").unwrap();
        let btheta = bumpy.stat("theta_pass").unwrap();
        c.check(
            format!("{label} perturbed exceeds 3 theta_pass"),
            bdev > 3.0 * btheta,
            format!("max deviation {:.1}% > 3 x {:.2}%", 100.0 * bdev, 100.0 * btheta),
        );
    }
    c.runtime(start, Duration::from_secs(120));
    c
}

fn claims() -> Criterion {
    let mut c = Criterion::default();
    let configs = [
        ("euclidean disc", euclid(), ConeSpec::FullPlane),
        ("euclidean quarter", euclid(), ConeSpec::quarter()),
        ("p=3 sector", pnorm(3.0), ConeSpec::sector(0.3, 1.9)),
        ("4-norm quarter", pnorm(4.0 / 3.0), ConeSpec::quarter()),
    ];
    for (label, norm, cone) in configs {
        let cfg = ExperimentConfig::new(norm, DomainSpec::wulff(1.0, cone), 0.05).with_profile(Profile::linear(0.5));
        let r = rigidity_claims(&Problem::new(cfg).unwrap()).unwrap();
        for name in ["claim1", "claim2", "rigidity"] {
            let v = r.verdict(name).unwrap();
            c.check(
                format!("{label} {name}"),
                v.passed,
                format!("{:.2e} {} {:.2e}", v.value, v.relation, v.tolerance),
            );
        }
    }
    for (label, spec) in [
        ("euclidean", euclid()),
        ("p=1.5", pnorm(1.5)),
        ("p=3", pnorm(3.0)),
        ("p=4", pnorm(4.0)),
        ("quad diag(4,1)", NormSpec::diagonal(&[4.0, 1.0])),
        ("flower", flower::flower_spec()),
    ] {
        let norm = Norm::new(spec).unwrap();
        let mut worst: f64 = 0.0;
        for (r, cone) in [(1.0, ConeSpec::FullPlane), (0.6, ConeSpec::sector(0.3, 1.9))] {
            let d = Domain::new(&DomainSpec::wulff(r, cone), &norm).unwrap();
            let b = radii_bounds(&d, &norm).unwrap();
            worst = worst.max((b.r1 - r).abs()).max((b.r2 - r).abs());
        }
        c.check(format!("{label} radii bounds"), worst <= 1e-8, format!("{worst:.1e} <= 1e-8"));
    }
    c
}

fn flowlines() -> Criterion {
    let mut c = Criterion::default();
    let start = Instant::now();
    let pair = DualPair::from_spec(euclid()).unwrap();
    let opts = FlowOptions::default();
    let exact = exact_wulff_solution(pair.primal(), 1.0, 2).unwrap();
    let line = trace_flowline(&exact, &pair, [0.5, 0.0], 0.01, &ConeSpec::FullPlane, &opts).unwrap();
    let dev = line
        .points
        .iter()
        .map(|p| (p.x[0] - (0.5 - p.t)).abs().max(p.x[1].abs()))
        .fold(0.0, f64::max);
    c.check(
        "exact field from (0.5, 0)",
        dev <= 1e-6 && line.strictly_increasing,
        format!("max |x - (0.5 - t, 0)| = {dev:.1e} <= 1e-6, u increasing: {}", line.strictly_increasing),
    );

    let cone = ConeSpec::quarter();
    let sol = solve(&DomainSpec::ellipse(1.5, 1.0, cone), &pair, 0.025, Load::Constant(1.0));
    let field = DiscreteField::new(&sol.field);
    let mut worst: f64 = 0.0;
    let mut increasing = true;
    for x0 in [[1.0, 0.01], [0.3, 0.8], [1.4, 0.2]] {
        let line = trace_flowline(&field, &pair, x0, 0.02, &cone, &opts).unwrap();
        worst = worst.max(line.max_residual());
        increasing &= line.strictly_increasing;
        if x0 == [1.0, 0.01] {
            let on_ray: Vec<_> = line.points.iter().filter(|p| p.ray.is_some()).collect();
            let along = on_ray.len() >= 5
                && on_ray.windows(2).all(|w| w[1].u > w[0].u && w[1].x[0] < w[0].x[0] && w[1].x[1] == 0.0);
            c.check(
                "curve near Γ1 continues along the ray",
                line.reached_gamma1 && along,
                format!("{} of {} points on the ray, u increasing along it", on_ray.len(), line.points.len()),
            );
        }
    }
    c.check(
        "solved sector field residual",
        worst <= 0.05 && increasing,
        format!("max |du/dt - H(Du)|/H(Du) = {:.2}% <= 5% where H(Du) >= 0.05, u increasing: {increasing}", 100.0 * worst),
    );
    c.runtime(start, Duration::from_secs(30));
    c
}

fn main() {
    let criteria: [(&str, fn() -> Criterion); 8] = [
        ("norm identities", norm_identities),
        ("duality", duality),
        ("flower dual reproduction", appendix),
        ("Wulff-solution convergence", convergence),
        ("comparison principles", comparison_principles),
        ("rigidity discrimination", discrimination),
        ("claims 1-2 consistency", claims),
        ("flowline law", flowlines),
    ];
    let mut unexpected = 0;
    let mut passed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let crit = run();
        let ok = crit.checks.iter().all(|c| c.passed);
        println!("{} [{}] {name}", if ok { "PASS" } else { "FAIL" }, k + 1);
        for ch in &crit.checks {
            let known = KNOWN_UNATTAINABLE.iter().find(|(n, _)| *n == ch.name);
            let mark = match (ch.passed, known) {
                (true, _) => "ok  ",
                (false, Some(_)) => "FAIL (known)",
                (false, None) => "FAIL",
            };
            println!("    {mark} {}: {}", ch.name, ch.detail);
            if !ch.passed {
                match known {
                    Some((_, why)) => println!("         reason: {why}"),
                    None => unexpected += 1,
                }
            }
        }
        passed += ok as usize;
    }
    println!("acceptance: {passed}/{} criteria pass, {unexpected} unexpected failures", criteria.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use wulff_core::experiments::{
    comparison_test_detailed, config_hash, overdetermined_check_detailed, radii_bounds, trace_flowline, DiscreteField,
    ExperimentReport, FlowField, FlowOptions, Flowline, Problem, Provenance, Verdict,
};
use wulff_core::fem::{boundary_flux, exact_wulff_solution, solve_torsion, FluxReport, Load, ScalarField};
use wulff_core::geometry::{triangulate, BoundaryTag, Mesh};
use wulff_core::norm::{check_gradient_identities, check_norm_axioms, strict_convexity_check, DualPair, Norm};
use wulff_core::{rng, Error};

use crate::args::StudyKind;
use crate::config::Resolved;
use crate::output::{csv_bytes, Outputs};
use crate::svg::{chart, Canvas};

/// Why a command could not finish.
#[derive(Debug)]
pub enum Failure {
    /// Invalid configuration (exit code 2).
    Config(String),
    /// Numerical or I/O failure (exit code 1).
    Runtime(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Runtime(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } | Error::Consistency(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

pub type Outcome = Result<bool, Failure>;

pub struct Context {
    pub resolved: Resolved,
    pub seed: u64,
    pub out: Outputs,
}

impl Context {
    pub fn new(resolved: Resolved, seed: u64) -> Result<Self, Failure> {
        let out = Outputs::new(resolved.out.clone(), resolved.svg)?;
        Ok(Context { resolved, seed, out })
    }

    fn problem(&self) -> Result<Problem, Failure> {
        Ok(Problem::new(self.resolved.experiment.clone())?)
    }

    fn finish(self, command: &str) -> Result<(), Failure> {
        let hash = config_hash(&self.resolved);
        self.out.finish(command, &hash, self.seed, &self.resolved)?;
        Ok(())
    }
}

fn print_verdicts(verdicts: &[Verdict]) -> bool {
    for v in verdicts {
        println!(
            "{} {}: {:.4e} {} {:.4e}  ({})",
            if v.passed { "PASS" } else { "FAIL" },
            v.name,
            v.value,
            v.relation,
            v.tolerance,
            v.detail
        );
    }
    verdicts.iter().all(|v| v.passed)
}

fn print_stats(report: &ExperimentReport) {
    for (k, v) in &report.stats {
        println!("  {k} = {v:.6e}");
    }
    for (k, v) in &report.flags {
        println!("  {k}: {v}");
    }
}

#[derive(Serialize)]
struct NormsCheckReport {
    norm: String,
    samples: usize,
    seed: u64,
    axioms: wulff_core::norm::AxiomReport,
    identities: Option<wulff_core::norm::IdentityReport>,
    convexity: wulff_core::norm::ConvexityReport,
    verdicts: Vec<Verdict>,
}

pub fn norms_check(mut ctx: Context) -> Outcome {
    let pair = DualPair::from_spec(ctx.resolved.experiment.norm.clone())?;
    let n = ctx.resolved.samples;
    if n == 0 {
        return Err(Failure::Config("--samples must be positive".into()));
    }
    let axioms = check_norm_axioms(pair.primal(), n, ctx.seed)?;
    let identities = match check_gradient_identities(&pair, n, ctx.seed) {
        Ok(r) => Some(r),
        Err(Error::Capability(msg)) => {
            println!("gradient identities skipped: {msg}");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let convexity = strict_convexity_check(&pair, n, ctx.seed);
    let mut verdicts = vec![
        Verdict::at_most("homogeneity", axioms.homogeneity_violation, 1e-10, "relative |H0(tx) - |t|H0(x)|"),
        Verdict::at_most("triangle", axioms.triangle_violation, 1e-10, "relative excess of H0(x+y) over H0(x)+H0(y)"),
    ];
    if let Some(ids) = &identities {
        let tol = if ids.analytic_gradient { 1e-8 } else { 1e-5 };
        verdicts.push(Verdict::at_most("euler", ids.euler_max_rel, tol, "relative |x·DH0(x) - H0(x)|"));
        verdicts.push(Verdict::at_most("unit_dual_gradient", ids.unit_dual_max, 1e-6, "|H(DH0(x)) - 1|"));
    }
    println!("norm {} ({} samples, seed {})", pair.primal().spec().label(), n, ctx.seed);
    println!("  sigma = {:.6}, gamma = {:.6}", axioms.sigma, axioms.gamma);
    println!(
        "  convexity of V: min normalized chord margin {:.3e}, flagged chords {}",
        convexity.min_normalized_margin, convexity.flagged
    );
    let passed = print_verdicts(&verdicts);
    let report = NormsCheckReport {
        norm: pair.primal().spec().label(),
        samples: n,
        seed: ctx.seed,
        axioms,
        identities,
        convexity,
        verdicts,
    };
    ctx.out.json("norms_check.json", "norm axiom and identity report", &report)?;
    ctx.finish("norms-check")?;
    Ok(passed)
}

pub fn norms_dual(mut ctx: Context) -> Outcome {
    let primal = Norm::new(ctx.resolved.experiment.norm.clone())?;
    if primal.dim() != 2 {
        return Err(Failure::Config("norms-dual works with planar norms".into()));
    }
    let closed = primal.closed_form_dual().ok_or_else(|| {
        Failure::Config(format!("{} has no closed-form dual to compare with", primal.spec().label()))
    })?;
    let numeric = DualPair::numeric(primal.clone());
    let mut r = rng::seeded(ctx.seed);
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.resolved.points {
        let xi = rng::box_vector(&mut r, 2, 1.0);
        let a = numeric.dual_eval(&xi);
        let b = closed.eval(&xi);
        let rel = (a - b).abs() / b;
        worst = worst.max(rel);
        rows.push(vec![xi[0], xi[1], a, b, rel]);
    }
    let header = ["xi1", "xi2", "numeric_dual", "closed_form_dual", "rel_error"];
    if ctx.out.enabled() {
        ctx.out.csv("dual.csv", "numeric vs closed-form dual norm", &header, &rows)?;
        let m = 256;
        let sphere = |n: &Norm| -> Vec<[f64; 2]> {
            (0..=m)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / m as f64;
                    let p = n.sphere_point(&[t.cos(), t.sin()], 1.0);
                    [p[0], p[1]]
                })
                .collect()
        };
        let primal_ball = sphere(&primal);
        let dual_ball = sphere(numeric.dual());
        let ball_rows: Vec<Vec<f64>> = primal_ball
            .iter()
            .zip(&dual_ball)
            .map(|(p, d)| vec![p[0], p[1], d[0], d[1]])
            .collect();
        ctx.out.csv("unit_balls.csv", "unit spheres of H0 and of its numeric dual", &["x1", "x2", "xi1", "xi2"], &ball_rows)?;
        let mut c = Canvas::fit(primal_ball.iter().chain(&dual_ball), true);
        c.title(&format!("unit balls of {} (blue) and its dual (red)", primal.spec().label()));
        c.polyline(&primal_ball, "#1f77b4", 1.5);
        c.polyline(&dual_ball, "#d62728", 1.5);
        ctx.out.write("unit_balls.svg", "unit spheres plot (data in unit_balls.csv)", c.finish().as_bytes())?;
    } else {
        print!("{}", String::from_utf8_lossy(&csv_bytes(&header, &rows)?));
    }
    let v = Verdict::at_most("numeric_dual", worst, 1e-6, "max relative error of the numeric dual");
    eprintln!("max relative error {worst:.3e} over {} points", rows.len());
    let passed = v.passed;
    ctx.finish("norms-dual")?;
    if !passed {
        eprintln!("FAIL numeric_dual: {worst:.3e} > 1e-6");
    }
    Ok(passed)
}

fn mesh_artifacts(out: &mut Outputs, mesh: &Mesh, title: &str) -> Result<(), Failure> {
    let rows: Vec<Vec<f64>> = mesh
        .edges()
        .iter()
        .map(|e| {
            let (a, b) = (mesh.vertices[e[0]], mesh.vertices[e[1]]);
            vec![a[0], a[1], b[0], b[1]]
        })
        .collect();
    out.csv("mesh_edges.csv", "mesh edges", &["x0", "y0", "x1", "y1"], &rows)?;
    let mut c = Canvas::fit(&mesh.vertices, true);
    c.title(title);
    draw_mesh(&mut c, mesh);
    out.write("mesh.svg", "mesh with Γ0 (red) and Γ1 (blue); data in mesh_edges.csv", c.finish().as_bytes())?;
    Ok(())
}

fn draw_mesh(c: &mut Canvas, mesh: &Mesh) {
    for e in mesh.edges() {
        c.line(mesh.vertices[e[0]], mesh.vertices[e[1]], "#ccc", 0.5);
    }
    for e in &mesh.boundary {
        let color = match e.tag {
            BoundaryTag::Gamma0 => "#d62728",
            BoundaryTag::Gamma1 => "#1f77b4",
        };
        c.line(mesh.vertices[e.edge[0]], mesh.vertices[e.edge[1]], color, 1.5);
    }
}

fn flux_artifacts(
    out: &mut Outputs,
    flux: &FluxReport,
    load: f64,
    q: Option<&wulff_core::experiments::Profile>,
) -> Result<(), Failure> {
    let mut header = vec!["arc", "x", "y", "h0", "h_of_du", "wulff_flux"];
    if q.is_some() {
        header.push("q");
    }
    let rows: Vec<Vec<f64>> = flux
        .gamma0
        .iter()
        .map(|s| {
            let mut row = vec![s.arc_param, s.z[0], s.z[1], s.h0_of_z, s.h_of_du, load * s.h0_of_z / 2.0];
            if let Some(q) = q {
                row.push(q.eval(s.h0_of_z));
            }
            row
        })
        .collect();
    out.csv("flux.csv", "boundary flux H(Du) at Γ0 edge midpoints", &header, &rows)?;
    let mut series = vec![
        ("H(Du)", "#1f77b4", rows.iter().map(|r| [r[0], r[4]]).collect::<Vec<_>>()),
        ("f H0 / N", "#2ca02c", rows.iter().map(|r| [r[0], r[5]]).collect()),
    ];
    if q.is_some() {
        series.push(("q(H0)", "#d62728", rows.iter().map(|r| [r[0], r[6]]).collect()));
    }
    if !rows.is_empty() {
        let svg = chart("boundary flux along Γ0", "arc length", "flux", &series);
        out.svg("flux.svg", "flux vs arc length", &svg, "flux.csv")?;
    }
    let g1: Vec<Vec<f64>> = flux
        .gamma1
        .iter()
        .map(|s| vec![s.z[0], s.z[1], s.conormal_flux, s.dv_norm])
        .collect();
    if !g1.is_empty() {
        out.csv("gamma1_flux.csv", "conormal flux DV(Du)·ν on Γ1", &["x", "y", "conormal_flux", "dv_norm"], &g1)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SolutionFile<'a> {
    config_hash: String,
    u_origin: f64,
    energy: f64,
    stats: &'a wulff_core::fem::SolveStats,
    mesh: &'a Mesh,
    values: &'a [f64],
}

pub fn solve(mut ctx: Context) -> Outcome {
    let problem = ctx.problem()?;
    let h = problem.config.h;
    let mesh = Arc::new(triangulate(&problem.domain, h)?);
    let load = problem.config.load;
    let sol = solve_torsion(mesh.clone(), &problem.pair, &Load::Constant(load), &problem.config.solver)?;
    let field = &sol.field;
    let u0 = field.value_near([0.0, 0.0]);
    println!(
        "solved on {} vertices / {} triangles: {} iterations, residual {:.3e}",
        mesh.num_vertices(),
        mesh.num_triangles(),
        sol.stats.iterations,
        sol.stats.residual
    );
    println!("u(O) = {u0:.6}");
    println!("max u = {:.6}, energy = {:.8e}", field.max_value(), field.energy);
    let flux = boundary_flux(field, &problem.pair)?;
    if let (Some(first), true) = (flux.gamma0.first(), !flux.gamma0.is_empty()) {
        let (lo, hi) = flux
            .gamma0
            .iter()
            .fold((first.h_of_du, first.h_of_du), |(a, b), s| (a.min(s.h_of_du), b.max(s.h_of_du)));
        println!("flux on Γ0: min {lo:.6}, max {hi:.6}");
    }
    if ctx.out.enabled() {
        let file = SolutionFile {
            config_hash: problem.config.hash(),
            u_origin: u0,
            energy: field.energy,
            stats: &sol.stats,
            mesh: &mesh,
            values: &field.values,
        };
        ctx.out.json("solution.json", "mesh, nodal values and solver statistics", &file)?;
        let nodes: Vec<Vec<f64>> = mesh
            .vertices
            .iter()
            .zip(&field.values)
            .map(|(x, u)| vec![x[0], x[1], *u])
            .collect();
        ctx.out.csv("nodes.csv", "nodal solution values", &["x", "y", "u"], &nodes)?;
        flux_artifacts(&mut ctx.out, &flux, load, problem.config.profile.as_ref())?;
        if ctx.resolved.svg {
            mesh_artifacts(&mut ctx.out, &mesh, "mesh")?;
        }
    }
    ctx.finish("solve")?;
    Ok(true)
}

pub fn check_overdetermined(mut ctx: Context) -> Outcome {
    let problem = ctx.problem()?;
    if problem.config.profile.is_none() {
        return Err(Failure::Config("check-overdetermined needs a flux profile (--profile or \"profile\")".into()));
    }
    let (report, field, flux) = overdetermined_check_detailed(&problem)?;
    println!("overdetermined check on {} triangles", report.provenance.triangles);
    print_stats(&report);
    let passed = print_verdicts(&report.verdicts);
    ctx.out.json("report.json", "overdetermined-condition report", &report)?;
    if ctx.out.enabled() {
        flux_artifacts(&mut ctx.out, &flux, problem.config.load, problem.config.profile.as_ref())?;
        if ctx.resolved.svg {
            mesh_artifacts(&mut ctx.out, &field.mesh, "mesh")?;
        }
    }
    ctx.finish("check-overdetermined")?;
    Ok(passed)
}

pub fn compare(mut ctx: Context) -> Outcome {
    let problem = ctx.problem()?;
    let (report, field) = comparison_test_detailed(&problem)?;
    print_stats(&report);
    let passed = print_verdicts(&report.verdicts);
    ctx.out.json("report.json", "comparison report", &report)?;
    if ctx.out.enabled() {
        let norm = problem.pair.primal();
        let bounds = radii_bounds(&problem.domain, norm)?;
        let f = problem.config.load;
        let u1 = exact_wulff_solution(norm, bounds.r1, 2)?;
        let u2 = exact_wulff_solution(norm, bounds.r2, 2)?;
        let mut rows: Vec<Vec<f64>> = field
            .mesh
            .vertices
            .iter()
            .zip(&field.values)
            .map(|(x, u)| {
                let h0 = norm.eval(x);
                let lower = if h0 < bounds.r1 { f * u1.u(x) } else { f64::NAN };
                vec![x[0], x[1], h0, *u, lower, f * u2.u(x)]
            })
            .collect();
        rows.sort_by(|a, b| a[2].total_cmp(&b[2]));
        ctx.out.csv("comparison.csv", "nodal u with the Wulff bounds u1 (H0 < R1) and u2", &["x", "y", "h0", "u", "u1", "u2"], &rows)?;
        if ctx.resolved.svg {
            let pts: Vec<[f64; 2]> = rows.iter().map(|r| [r[2], r[3]]).collect();
            let mut c = Canvas::fit(pts.iter().chain(rows.iter().map(|r| [r[2], r[5]]).collect::<Vec<_>>().iter()), false);
            c.title("u (dots) between u1 (green) and u2 (red) against H0(x)");
            for p in &pts {
                c.dot(*p, "#1f77b4", 1.2);
            }
            let curve = |r: f64| -> Vec<[f64; 2]> {
                (0..=100).map(|k| {
                    let t = r * k as f64 / 100.0;
                    [t, f * (r * r - t * t) / 4.0]
                }).collect()
            };
            c.polyline(&curve(bounds.r1), "#2ca02c", 1.5);
            c.polyline(&curve(bounds.r2), "#d62728", 1.5);
            ctx.out.svg("comparison.svg", "comparison plot", &c.finish(), "comparison.csv")?;
        }
    }
    ctx.finish("compare")?;
    Ok(passed)
}

fn flow_report(line: &Flowline, prov: Provenance, dt: f64) -> ExperimentReport {
    let mut report = ExperimentReport::new("flow", prov);
    report.set("dt", dt);
    report.set("points", line.points.len() as f64);
    report.set("length", line.length());
    report.set("final_u", line.points.last().map_or(0.0, |p| p.u));
    report.set("max_residual", line.max_residual());
    report.flags.insert("strictly_increasing".into(), line.strictly_increasing);
    report.flags.insert("reached_gamma1".into(), line.reached_gamma1);
    report.verdicts.push(Verdict::at_least(
        "u_increasing",
        if line.strictly_increasing { 1.0 } else { 0.0 },
        1.0,
        "u strictly increases at every accepted step",
    ));
    report.verdicts.push(Verdict::at_most(
        "increase_law",
        line.max_residual(),
        0.05,
        "max |du/dt - H(Du)|/H(Du) where H(Du) >= 0.05",
    ));
    report
}

pub fn flow(mut ctx: Context) -> Outcome {
    let problem = ctx.problem()?;
    let Some(fc) = ctx.resolved.flow.clone() else {
        return Err(Failure::Config("flow needs a start point (--x0 x,y or \"flow\": {\"x0\": [x, y]})".into()));
    };
    let cone = problem.config.domain.cone;
    let opts = FlowOptions::default();
    let mut mesh = None;
    let (line, prov) = if fc.exact {
        let norm = problem.pair.primal();
        let radius = problem
            .domain
            .wulff_radius_for(norm)
            .ok_or_else(|| Failure::Config("--exact needs a Wulff domain of the problem norm".into()))?;
        if problem.config.load != 1.0 {
            return Err(Failure::Config("--exact needs f = 1".into()));
        }
        let exact = exact_wulff_solution(norm, radius, 2)?;
        let line = trace_flowline(&exact as &dyn FlowField, &problem.pair, fc.x0, fc.dt, &cone, &opts)?;
        let prov = Provenance {
            config_hash: problem.config.hash(),
            h: 0.0,
            solver_residual: 0.0,
            solver_iterations: 0,
            triangles: 0,
        };
        (line, prov)
    } else {
        let m = Arc::new(triangulate(&problem.domain, problem.config.h)?);
        let sol = solve_torsion(m.clone(), &problem.pair, &Load::Constant(problem.config.load), &problem.config.solver)?;
        let field: &ScalarField = &sol.field;
        let discrete = DiscreteField::new(field);
        let line = trace_flowline(&discrete, &problem.pair, fc.x0, fc.dt, &cone, &opts)?;
        let prov = Provenance {
            config_hash: problem.config.hash(),
            h: problem.config.h,
            solver_residual: sol.stats.residual,
            solver_iterations: sol.stats.iterations,
            triangles: m.num_triangles(),
        };
        mesh = Some(m);
        (line, prov)
    };
    let report = flow_report(&line, prov, fc.dt);
    println!("flow line from {:?}: {} points, stop {:?}, end {:?}", fc.x0, line.points.len(), line.stop, line.end());
    print_stats(&report);
    let passed = print_verdicts(&report.verdicts);
    ctx.out.json("report.json", "flow-line report", &report)?;
    if ctx.out.enabled() {
        let rows: Vec<Vec<f64>> = line
            .points
            .iter()
            .map(|p| vec![p.t, p.x[0], p.x[1], p.u, p.h_of_du, p.ray.map_or(-1.0, |k| k as f64)])
            .collect();
        ctx.out.csv("flowline.csv", "flow-line samples; ray = -1 when interior", &["t", "x", "y", "u", "h_of_du", "ray"], &rows)?;
        if ctx.resolved.svg {
            let pts: Vec<[f64; 2]> = line.points.iter().map(|p| p.x).collect();
            let boundary: Vec<[f64; 2]> = {
                let (a, b) = cone.aperture();
                let mut v: Vec<[f64; 2]> = (0..=256)
                    .map(|k| problem.domain.boundary_point(a + (b - a) * k as f64 / 256.0))
                    .collect();
                if !cone.is_full() {
                    v.insert(0, [0.0, 0.0]);
                    v.push([0.0, 0.0]);
                }
                v
            };
            let mut c = Canvas::fit(boundary.iter().chain(&pts), true);
            c.title("flow line of DH(Du)");
            if let Some(m) = &mesh {
                draw_mesh(&mut c, m);
            } else {
                c.polyline(&boundary, "#d62728", 1.5);
            }
            c.polyline(&pts, "#000", 2.0);
            if let Some(p) = pts.first() {
                c.dot(*p, "#2ca02c", 3.0);
            }
            ctx.out.svg("flowline.svg", "flow line over the domain", &c.finish(), "flowline.csv")?;
        }
    }
    ctx.finish("flow")?;
    Ok(passed)
}

pub fn study(mut ctx: Context) -> Outcome {
    let Some(study) = ctx.resolved.study.clone() else {
        return Err(Failure::Config("study needs mesh sizes (--hs 0.1,0.05 or \"study\": {\"h\": [...]})".into()));
    };
    if study.h.is_empty() {
        return Err(Failure::Config("study needs at least one mesh size".into()));
    }
    let problems: Vec<Problem> = study
        .h
        .iter()
        .map(|&h| {
            let mut cfg = ctx.resolved.experiment.clone();
            cfg.h = h;
            Problem::new(cfg).map_err(Failure::from)
        })
        .collect::<Result<_, _>>()?;
    if study.experiment == StudyKind::Overdetermined && problems[0].config.profile.is_none() {
        return Err(Failure::Config("an overdetermined study needs a flux profile".into()));
    }
    let reports: Vec<ExperimentReport> = problems
        .par_iter()
        .map(|p| match study.experiment {
            StudyKind::Overdetermined => overdetermined_check_detailed(p).map(|r| r.0),
            StudyKind::Compare => comparison_test_detailed(p).map(|r| r.0),
        })
        .collect::<Result<_, _>>()?;
    let keys: Vec<String> = reports[0].stats.keys().cloned().collect();
    let mut header: Vec<&str> = vec!["h"];
    header.extend(keys.iter().map(String::as_str));
    header.push("passed");
    let rows: Vec<Vec<f64>> = reports
        .iter()
        .map(|r| {
            let mut row = vec![r.provenance.h];
            row.extend(keys.iter().map(|k| r.stats[k]));
            row.push(if r.passed() { 1.0 } else { 0.0 });
            row
        })
        .collect();
    println!("{}", header.join(","));
    for row in &rows {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.6e}")).collect();
        println!("{}", cells.join(","));
    }
    let passed = reports.iter().all(ExperimentReport::passed);
    for (r, h) in reports.iter().zip(&study.h) {
        if !r.passed() {
            println!("h = {h}: verdicts failed");
            print_verdicts(&r.verdicts);
        }
    }
    ctx.out.json("study.json", "reports per mesh size", &reports)?;
    if ctx.out.enabled() {
        ctx.out.csv("study.csv", "statistics per mesh size", &header, &rows)?;
        if ctx.resolved.svg {
            let key = match study.experiment {
                StudyKind::Overdetermined => "max_deviation",
                StudyKind::Compare => "upper_violation",
            };
            let col = 1 + keys.iter().position(|k| k == key).unwrap_or(0);
            let mut pts: Vec<[f64; 2]> = rows.iter().map(|r| [r[0], r[col]]).collect();
            pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
            let svg = chart(&format!("{key} against h"), "h", key, &[(key, "#1f77b4", pts)]);
            ctx.out.svg("study.svg", "study plot", &svg, "study.csv")?;
        }
    }
    ctx.finish("study")?;
    Ok(passed)
}

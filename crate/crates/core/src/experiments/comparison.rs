use super::common::{provenance, solve_on};
use super::radii::radii_bounds;
use super::report::{ExperimentReport, Problem, Verdict};
use crate::error::Result;
use crate::fem::{exact_wulff_solution, ScalarField};

/// `C` in the nodal comparison tolerance `max(1e-8, C h²)`. Four times the
/// largest `|u_h − u_R|/h²` measured on the Euclidean unit disc for
/// `h ∈ {0.1, 0.05, 0.025}`, which is about 0.062.
pub const COMPARISON_CONSTANT: f64 = 0.25;

pub fn comparison_tolerance(h: f64) -> f64 {
    (COMPARISON_CONSTANT * h * h).max(1e-8)
}

/// Compare the solution on `Ω ∩ Σ` with the Wulff solutions of radii `R1`
/// and `R2`: `u1 ≤ u` on `B_R1 ∩ Σ` and `u ≤ u2` everywhere.
pub fn comparison_test(problem: &Problem) -> Result<ExperimentReport> {
    Ok(comparison_test_detailed(problem)?.0)
}

/// [`comparison_test`] together with the solved field.
pub fn comparison_test_detailed(problem: &Problem) -> Result<(ExperimentReport, ScalarField)> {
    let norm = problem.pair.primal();
    let bounds = radii_bounds(&problem.domain, norm)?;
    let solved = solve_on(problem, &problem.domain)?;
    let f = problem.config.load;
    let u1 = exact_wulff_solution(norm, bounds.r1, 2)?;
    let u2 = exact_wulff_solution(norm, bounds.r2, 2)?;
    let field = &solved.solution.field;

    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::NEG_INFINITY;
    let mut inside = 0usize;
    for (x, u) in solved.mesh.vertices.iter().zip(&field.values) {
        if norm.eval(x) < bounds.r1 {
            lower = lower.max(f * u1.u(x) - u);
            inside += 1;
        }
        upper = upper.max(u - f * u2.u(x));
    }
    let tol = comparison_tolerance(problem.config.h);
    let mut report = ExperimentReport::new("comparison", provenance(problem, &solved));
    report.set("r1", bounds.r1);
    report.set("r2", bounds.r2);
    report.set("lower_violation", lower.max(0.0));
    report.set("upper_violation", upper.max(0.0));
    report.set("lower_margin", -lower);
    report.set("upper_margin", -upper);
    report.set("tolerance", tol);
    report.set("nodes_in_b_r1", inside as f64);
    report.verdicts.push(Verdict::at_most(
        "u1_below_u",
        lower.max(0.0),
        tol,
        "max (u1 - u) over nodes with H0 < R1",
    ));
    report.verdicts.push(Verdict::at_most(
        "u_below_u2",
        upper.max(0.0),
        tol,
        "max (u - u2) over all nodes",
    ));
    Ok((report, solved.solution.field))
}

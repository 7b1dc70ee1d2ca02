use std::sync::Arc;

use super::report::{Problem, Provenance};
use crate::error::Result;
use crate::fem::{boundary_flux, solve_torsion, FluxReport, Load, Solution};
use crate::geometry::{triangulate, Domain, DomainSpec, Mesh};

pub(crate) struct Solved {
    pub mesh: Arc<Mesh>,
    pub solution: Solution,
}

pub(crate) fn solve_on(problem: &Problem, domain: &Domain) -> Result<Solved> {
    let mesh = Arc::new(triangulate(domain, problem.config.h)?);
    let solution = solve_torsion(
        mesh.clone(),
        &problem.pair,
        &Load::Constant(problem.config.load),
        &problem.config.solver,
    )?;
    Ok(Solved { mesh, solution })
}

pub(crate) fn provenance(problem: &Problem, solved: &Solved) -> Provenance {
    Provenance {
        config_hash: problem.config.hash(),
        h: problem.config.h,
        solver_residual: solved.solution.stats.residual,
        solver_iterations: solved.solution.stats.iterations,
        triangles: solved.mesh.num_triangles(),
    }
}

/// Largest relative deviation of the discrete flux on the Wulff shape of
/// radius `radius` (same norm, cone and `h`) from its exact value `f H0/N`.
/// When the problem domain is that Wulff shape its flux `own` is reused.
pub(crate) fn wulff_baseline(problem: &Problem, radius: f64, own: &FluxReport) -> Result<f64> {
    let f = problem.config.load;
    let exact = |s: &crate::fem::FluxSample| f * s.h0_of_z / 2.0;
    if problem.domain.wulff_radius_for(problem.pair.primal()) == Some(radius) {
        return Ok(own.max_relative_deviation(exact));
    }
    let spec = DomainSpec::wulff(radius, problem.config.domain.cone);
    let domain = Domain::new(&spec, problem.pair.primal())?;
    let solved = solve_on(problem, &domain)?;
    let flux = boundary_flux(&solved.solution.field, &problem.pair)?;
    Ok(flux.max_relative_deviation(exact))
}

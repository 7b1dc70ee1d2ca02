//! P1 finite elements for the anisotropic torsion problem `−div DV(Du) = f`.

mod exact;
mod field;
mod flux;
mod solver;
pub mod sparse;

pub use exact::{exact_wulff_solution, ExactWulff};
pub use field::{energy, energy_gradient, FemSpace, Load, ScalarField};
pub use flux::{boundary_flux, FluxReport, FluxSample, NeumannSample};
pub use solver::{solve_torsion, solve_torsion_from, Solution, SolveStats, SolverOptions};

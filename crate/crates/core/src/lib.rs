//! Anisotropic norms, Wulff shapes and the Finsler torsion problem in cones.
//!
//! The crate is organised bottom-up:
//!
//! * [`norm`] evaluates norms `H0`, their gradients, dual norms `H` and the
//!   Lagrangian `V = H^2 / 2`, including a gauge built from a hull of discs.
//! * [`geometry`] builds cones, Wulff shapes and perturbed domains and
//!   triangulates `Omega ∩ Sigma` with tagged Dirichlet/Neumann boundary.
//! * [`fem`] minimises the convex torsion energy over P1 elements.
//! * [`experiments`] runs the comparison, rigidity and flow-line studies.

pub mod error;
pub mod experiments;
pub mod fem;
pub mod geometry;
pub mod norm;
pub mod rng;

pub use error::{Error, Result};

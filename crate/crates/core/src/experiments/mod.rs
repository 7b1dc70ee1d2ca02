//! Numerical experiments on the overdetermined torsion problem in cones.

mod common;
mod comparison;
mod flow;
mod profile;
mod radii;
mod report;
mod rigidity;

pub use comparison::{comparison_test, comparison_test_detailed, comparison_tolerance, COMPARISON_CONSTANT};
pub use flow::{trace_flowline, DiscreteField, FlowField, FlowOptions, FlowPoint, Flowline, StopReason};
pub use profile::{Profile, RatioTrend};
pub use radii::{radii_bounds, RadiiBounds, RADII_SAMPLES};
pub use report::{config_hash, ExperimentConfig, ExperimentReport, Problem, Provenance, Verdict};
pub use rigidity::{overdetermined_check, overdetermined_check_detailed, rigidity_claims, THETA_FACTOR};

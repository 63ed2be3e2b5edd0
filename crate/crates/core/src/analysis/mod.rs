//! Executable checks of the qualitative properties of trajectories, the
//! Bessel comparison oracle, and the Wronskian of profile pairs.

mod bessel;
mod checks;
mod decay;
mod report;
mod uniqueness;
mod wronskian;

pub use bessel::{bessel_j, bessel_zeros, comparison_solution, sturm_node_bound};
pub use checks::{check_bound_state, check_profile, check_profile_with, CheckTolerances, CHECK_NAMES};
pub use decay::{decay_ratio, DecayTrace, DECAY_BAND, DECAY_KAPPA};
pub use report::{CheckResult, DiagnosticsReport};
pub use uniqueness::{ground_state_transitions, UniquenessScan};
pub use wronskian::{wronskian_scan, wronskian_scan_with_tol, WronskianTrace};

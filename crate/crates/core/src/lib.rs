//! Bound states of the Schrödinger–Newton system in one and two dimensions.
//!
//! The rescaled radial system is integrated from a regularized start near the
//! origin; initial values `u0` are classified by the number of zeros of `u`
//! before the trajectory escapes, and the bound-state values
//! `alpha_{m,n} = inf { u0 : u has exactly n zeros }` are located by bisection
//! on that classification.

pub mod analysis;
pub mod error;
pub mod integrate;
pub mod physical;
pub mod profile;
pub mod shoot;
pub mod system;
mod tail;

pub use error::{Error, Result};
pub use integrate::{
    escape_predicate, integrate, launch, profile_from_states, EventKind, EventRecord, IntegrationControls,
};
pub use profile::{Profile, Sample, Termination};
pub use system::{origin_series, rhs, FrictionModel, ProblemParams, ShootState};

/// Library version recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

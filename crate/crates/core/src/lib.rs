//! Constructive shadowing, chain recurrence and Bohr-chaos certificates.
//!
//! The crate works on two families of exactly computable systems:
//!
//! * memory-1 subshifts of finite type over eventually periodic points
//!   ([`symbolic`]), where every metric value and every shadowing step is exact;
//! * hyperbolic automorphisms of the 2-torus ([`toral`]), with eigendata and
//!   homoclinic points held in a real quadratic field and iterated orbits in
//!   floating point with stated tolerances.
//!
//! On top of the system contract in [`dynamics`] sit the chain-recurrence tools
//! ([`chain`]), the Bohr-chaos certificate builder and its independent checker
//! ([`bohr`]), and the symbolic horseshoe coding ([`horseshoe`]).

pub mod bohr;
pub mod chain;
pub mod dynamics;
pub mod error;
pub mod horseshoe;
pub mod quadratic;
pub mod registry;
pub mod symbolic;
pub mod toral;

pub use dynamics::{
    bump, expansive_separation, is_pseudo_orbit, is_shadowed_by, orbit_window, phi,
    BumpFunctionSpec, Chain, Separation,
    MetricSystem, PseudoOrbit, Shadow, Shadowing,
};
pub use error::{Error, HypothesisCondition, Result};
pub use registry::SystemSpec;
pub use symbolic::{BiInfSeq, SftSystem};
pub use toral::{ToralMap, TorusPoint};

/// Absolute tolerance for real comparisons in certificate checks.
pub const CERT_TOL: f64 = 1e-9;

/// Version string stamped into every emitted artifact.
pub const TOOL_VERSION: &str = concat!("chaoslab ", env!("CARGO_PKG_VERSION"));

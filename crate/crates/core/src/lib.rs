//! Desk-scale laboratory for finite-volume spin-glass thermodynamics:
//! exact pressures and Gibbs expectations for arbitrary multi-spin Ising
//! Hamiltonians, quenched averages over random disorder, and numerical
//! verification of the pressure bounds and correlation inequalities that
//! control the thermodynamic limit.

pub mod config;
pub mod corpus;
pub mod disorder;
pub mod engine;
mod error;
pub mod inequality;
pub mod limit;
pub mod model;
pub mod quenched;
pub mod rng;
pub mod scalar;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

// The deterministic core is generic over the scalar type; everything above
// it (disorder sampling, estimators, checks, the CLI) runs in f64 through
// these aliases.
pub type Hamiltonian = model::Hamiltonian<f64>;
pub type InteractionTerm = model::InteractionTerm<f64>;
pub type GibbsSummary = engine::GibbsSummary<f64>;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

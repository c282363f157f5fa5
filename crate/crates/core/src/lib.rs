//! Navigable small-world graphs: greedy routing with one long-range shortcut
//! per vertex, exact hitting probabilities, the balanced shortcut
//! distribution, destination-sampling rewiring and a continuum model on the
//! circle and the flat torus.

pub mod balance;
pub mod continuum;
pub mod error;
pub mod harness;
pub mod io;
pub mod rewiring;
pub mod routing;
pub mod scalar;
pub mod shortcuts;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use topology::{BaseGraph, CycleTopology, Topology, TorusGrid, VertexId};

/// Shortcut length distribution in double precision.
pub type Distribution = shortcuts::DistanceDistribution<f64>;
/// Shortcut length distribution with exact rational masses.
pub type ExactDistribution = shortcuts::DistanceDistribution<num_rational::BigRational>;
pub type Profile = balance::HittingProfile<f64>;
pub type ExactProfile = balance::HittingProfile<num_rational::BigRational>;
pub type Report = balance::FixedPointReport<f64>;

//! Continuum model: Poisson points on the circle or the flat torus, their
//! Delaunay graph, shortcut augmentation by radial measures and greedy
//! routing between points.

mod augment;
mod cap;
mod delaunay;
mod space;
mod walk;

pub use augment::{
    augment, log_bin_edges, sample_binned_shortcuts, sample_kleinberg_shortcuts, square_arc_fraction, Augmentation,
    CellLookup, ContinuumConfig, RadialMeasure,
};
pub use cap::{cap_fraction, CapEstimate};
pub use delaunay::{adaptedness_violations, build_delaunay, DelaunayGraph};
pub use space::{ball_volume, distance, max_radius, offset, sample_points, wrap, NearestIndex, Point, PointSet};
pub use walk::{
    continuum_greedy_walk, estimate_hitting_measure, mean_length, poisson_balance_iterate, run_continuum_walks,
    shell_volume, BalanceTrace, HitEstimate,
};

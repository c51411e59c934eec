//! Numerical laboratory for consecutive orthogonal projections in
//! finite-dimensional Hilbert space.
//!
//! The crate provides:
//!
//! - [`hilbert`]: dense subspace algebra (orthonormal bases, projections,
//!   complements, distances) with explicit tolerances;
//! - [`iterates`]: the three projection engines — cyclic, remotest, and
//!   greedy over finite dictionaries — producing full [`iterates::Trajectory`]
//!   records;
//! - [`quantities`]: the scalar constants governing convergence rates
//!   (Friedrichs number, sphere constants, the sum-of-norms `s`-norm,
//!   greedy direction cosines, per-cycle decay);
//! - [`constructions`]: deterministic generators for the concrete families
//!   used in the experiments (four lines, two-subspace block families,
//!   the baker's-map driven family in R^4, slow-convergence witnesses);
//! - [`certify`]: machine verification of the rate inequalities along
//!   concrete trajectories, plus log-log rate fitting.
//!
//! All types are immutable after construction and safe to share across
//! threads; operations are pure functions of their inputs.

pub mod certify;
pub mod constructions;
pub mod error;
pub mod hilbert;
pub mod iterates;
pub mod quantities;

pub use error::{Error, Result};
pub use hilbert::{Matrix, Subspace, SubspaceFamily, Vector};
pub use iterates::{Dictionary, GreedySource, Policy, RunOptions, Trajectory};

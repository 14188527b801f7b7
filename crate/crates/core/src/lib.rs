//! Household service networks, patron/client indices, and the two-period
//! clientelism game.
//!
//! The crate is organised bottom-up:
//!
//! * [`graph`] holds the multiplex directed service graph of a village and its
//!   CSV ingestion.
//! * [`indices`] computes link classes, degrees, concentration indices,
//!   patrons and clients.
//! * [`game`] solves, verifies and enumerates equilibria of the clientelism
//!   game in exact rational arithmetic.
//! * [`regression`] provides fixed-effects least squares with cluster-robust
//!   covariance, the model suite, and a synthetic survey generator.
//!
//! Batch work (grid sweeps, brute-force enumeration, Monte Carlo seeds,
//! per-village index computation) runs through [`exec::Execution`], which is
//! backed by rayon when the `parallel` feature is enabled and falls back to a
//! plain sequential loop otherwise.

pub mod exec;
pub mod game;
pub mod graph;
pub mod indices;
pub mod regression;

pub use exec::Execution;

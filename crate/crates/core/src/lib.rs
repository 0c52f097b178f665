//! Finite-size combinatorics and probability for partial transposes of
//! Wishart random matrices.
//!
//! The crate is organised bottom-up:
//!
//! * [`perms`] entry permutations of `[M]²` (partial transposes, left
//!   partial transposes, induced diagonal maps, tables) and the exact
//!   agreement counters built on them.
//! * [`partitions`] bipartite pairings, joins, noncrossing partitions and
//!   the moment/free-cumulant conversion.
//! * [`wick`] exact rational evaluation of `E∘tr(W^σ1⋯W^σm)` through the
//!   Wick expansion, including per-pairing breakdowns and trace covariances.
//! * [`asymptotics`] closed-form limit cumulants and the freeness verdict
//!   engine for families of partial transposes.
//! * [`montecarlo`] seeded Ginibre/Wishart sampling and estimators.
//! * [`literal`] the small text syntax shared by the CLI and the web demo.
//! * [`oracle`] and [`checks`] brute-force reference computations and the
//!   deterministic verification suite behind `ptlab selftest`.
//!
//! Gaussian normalisation: every Ginibre entry satisfies `E|g|² = 1/M`, so that
//! `E tr W = P/M`.

pub mod asymptotics;
pub mod checks;
pub mod error;
pub mod literal;
pub mod matrix;
pub mod montecarlo;
pub mod oracle;
pub mod partitions;
pub mod perms;
pub mod rational;
pub mod wick;

pub use error::{Error, Result};

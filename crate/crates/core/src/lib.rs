//! Excursion statistics of a one-dimensional random walk whose right-step
//! probability decays geometrically with distance from the origin and whose
//! drive parameter is resampled uniformly at the start of every excursion.
//!
//! The walk lives on `{0, 1, 2, ...}`. At the start of each excursion a drive
//! value `p` is drawn uniformly from `(0, 1)` and held fixed until the walk
//! next returns to the origin. From the origin the walk moves to 1 with
//! probability `p` and otherwise stays put, ending a one-step excursion. From
//! a state `k >= 1` it moves to `k + 1` with probability `r^k * p` and to
//! `k - 1` otherwise, so the pull back toward the origin strengthens with
//! depth. An absorbing boundary at `N` optionally kills the excursion on
//! arrival.
//!
//! The crate computes the excursion laws of this process both in closed form
//! and by reproducible simulation:
//!
//! * [`scale`] — per-environment scale function `S(k;p)`, edge weight
//!   `W(k;p)`, ruin probabilities and the discrete Green's function, all
//!   evaluated in log domain so that steeply growing ratio products cannot
//!   overflow;
//! * [`quadrature`] — adaptive Gauss–Kronrod integration on the open unit
//!   interval, backing every average over the uniform environment;
//! * [`pgf`] — generating functions of excursion durations and of the first
//!   hitting time of the boundary, via tridiagonal boundary-value problems;
//! * [`hitting`] — environment-averaged quantities: boundary-hit
//!   probability, local-time law, expected durations and the maximum
//!   penetration depth;
//! * [`simulate`] — a deterministic Monte Carlo oracle with per-excursion
//!   substreams, used to cross-check every analytic number.

pub mod error;
pub mod hitting;
pub mod model;
pub mod pgf;
pub mod quadrature;
pub mod scale;
pub mod simulate;

pub use error::{Error, Result};
pub use model::{EnvParam, PgfQuery, WalkModel};
pub use quadrature::{EstimateKind, EstimateWithError, QuadratureSpec};

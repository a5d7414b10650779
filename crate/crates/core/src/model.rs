//! Domain parameters of the walk.

use crate::error::{Error, Result};

/// The fixed model pair: spatial decay parameter `r` and absorbing upper
/// boundary `N`.
///
/// `r = 1` disables the spatial decay (the per-environment walk is then the
/// classic nearest-neighbour chain); smaller `r` pulls the walk back toward
/// the origin harder with depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkModel {
    r: f64,
    n: u32,
}

impl WalkModel {
    /// Requires `0 < r <= 1` and `N >= 1`.
    pub fn new(r: f64, n: u32) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain {
                name: "r",
                value: r,
                range: "(0, 1]",
            });
        }
        if n < 1 {
            return Err(Error::IndexRange {
                name: "N",
                value: i64::from(n),
                lo: 1,
                hi: i64::from(u32::MAX),
            });
        }
        Ok(Self { r, n })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// The absorbing upper boundary.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Same decay parameter, boundary moved to `n`. Used when a statement
    /// about the unkilled excursion is evaluated "with the boundary at k".
    pub fn with_boundary(&self, n: u32) -> Result<Self> {
        Self::new(self.r, n)
    }

    /// Probability of stepping right from state `k >= 1` under environment
    /// `p`, i.e. `r^k * p`.
    pub fn up_prob(&self, k: u32, p: EnvParam) -> f64 {
        self.r.powi(k as i32) * p.value()
    }
}

/// One sampled environment value `p`, constant within an excursion.
///
/// Endpoints are excluded: quadrature nodes and simulated draws are always
/// strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParam(f64);

impl EnvParam {
    pub fn new(p: f64) -> Result<Self> {
        if p > 0.0 && p < 1.0 {
            Ok(Self(p))
        } else {
            Err(Error::Domain {
                name: "p",
                value: p,
                range: "(0, 1)",
            })
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// Damping variable of a generating function.
///
/// `q = 1` is admitted so that limits and derivatives at 1 (expected
/// durations) can be evaluated; the series interpretation needs `q < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfQuery(f64);

impl PgfQuery {
    pub fn new(q: f64) -> Result<Self> {
        if q > 0.0 && q <= 1.0 {
            Ok(Self(q))
        } else {
            Err(Error::Domain {
                name: "q",
                value: q,
                range: "(0, 1]",
            })
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

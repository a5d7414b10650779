//! Environment-averaged excursion statistics.
//!
//! Everything here integrates a per-environment closed form over the
//! uniform drive parameter: the boundary-hit probability of a single
//! excursion, the geometric law of the number of failed excursions before
//! the first hit, expected durations, and the law of the maximum
//! penetration depth of the unkilled excursion.

use crate::error::{Error, Result};
use crate::model::{EnvParam, WalkModel};
use crate::pgf::{derivatives_at_one, pgf_success};
use crate::quadrature::{integrate_unit, EstimateWithError, QuadratureSpec};
use crate::scale::LogRatioTable;
use crate::PgfQuery;

fn env_at(p: f64) -> EnvParam {
    EnvParam::new(p).expect("quadrature nodes are interior")
}

/// Probability that one excursion reaches the boundary `N`:
/// `int_0^1 p / S(N;p) dp`. Always in `(0, 1/2]`, with the maximum at
/// `N = 1` where the first right-step already hits the boundary.
pub fn prob_reach(model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    let n = model.n() as usize;
    integrate_unit(
        |p| {
            let table = LogRatioTable::new(model, env_at(p));
            (p.ln() - table.log_scale(n)).exp()
        },
        spec,
    )
}

/// Geometric law of the number of failed excursions before the first
/// boundary hit.
///
/// Holds the boundary-hit probability so repeated evaluations cost one
/// integration, not one per point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimePmf {
    success_prob: f64,
}

impl LocalTimePmf {
    pub fn new(model: WalkModel, spec: &QuadratureSpec) -> Result<Self> {
        Ok(Self {
            success_prob: prob_reach(model, spec)?.value,
        })
    }

    pub fn success_prob(&self) -> f64 {
        self.success_prob
    }

    /// `P(L = n) = (1 - s)^n s`.
    pub fn pmf(&self, n: u64) -> f64 {
        (1.0 - self.success_prob).powi(n as i32) * self.success_prob
    }

    /// `E[L] = (1 - s) / s`.
    pub fn mean(&self) -> f64 {
        (1.0 - self.success_prob) / self.success_prob
    }
}

/// One-shot convenience for [`LocalTimePmf`].
pub fn local_time_pmf(n: u64, model: WalkModel, spec: &QuadratureSpec) -> Result<f64> {
    Ok(LocalTimePmf::new(model, spec)?.pmf(n))
}

/// Expected duration of one excursion (killed or not at the boundary):
/// `E[D] = 1 + int_0^1 p sum_{k=1..N-1} G(k;p) dp`.
///
/// For `N = 1` the interior is empty and every excursion takes exactly one
/// step.
pub fn expected_excursion_duration(
    model: WalkModel,
    spec: &QuadratureSpec,
) -> Result<EstimateWithError> {
    if model.n() == 1 {
        return Ok(EstimateWithError::quadrature(1.0, 0.0));
    }
    let inner = integrate_unit(
        |p| {
            let table = LogRatioTable::new(model, env_at(p));
            p * table.interior_visit_sum()
        },
        spec,
    )?;
    Ok(EstimateWithError::quadrature(
        1.0 + inner.value,
        inner.error_bound,
    ))
}

/// Environment-averaged expected visits to interior state `k` during one
/// excursion: `int_0^1 p G(k;p) dp`. This is what the simulator's
/// per-state visit means estimate.
pub fn expected_visits(k: u32, model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    if model.n() < 2 || k < 1 || k > model.n() - 1 {
        return Err(Error::IndexRange {
            name: "k",
            value: i64::from(k),
            lo: 1,
            hi: i64::from(model.n().saturating_sub(1)),
        });
    }
    integrate_unit(
        |p| {
            let table = LogRatioTable::new(model, env_at(p));
            p * table.green(1, k as usize)
        },
        spec,
    )
}

/// Expected first hitting time of the boundary, `E[tau] = E[D] / s`.
///
/// The value is computed on the Green-function route and cross-checked
/// against the independent generating-function route
/// `(A'(1) + B'(1)) / B(1)`; disagreement beyond ten times the combined
/// error bounds is reported as an internal-consistency error.
pub fn expected_hitting_time(model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    let duration = expected_excursion_duration(model, spec)?;
    let s = prob_reach(model, spec)?;
    let green_route = ratio_with_error(duration, s)?;

    let (a1, b1) = derivatives_at_one(model, spec)?;
    let numerator = EstimateWithError::quadrature(a1.value + b1.value, a1.error_bound + b1.error_bound);
    let b_at_one = pgf_success(PgfQuery::new(1.0).unwrap(), model, spec)?;
    let pgf_route = ratio_with_error(numerator, b_at_one)?;

    let bound = 10.0 * (green_route.error_bound + pgf_route.error_bound);
    if (green_route.value - pgf_route.value).abs() > bound {
        return Err(Error::RouteMismatch {
            a: green_route.value,
            b: pgf_route.value,
            bound,
        });
    }
    Ok(green_route)
}

fn ratio_with_error(num: EstimateWithError, den: EstimateWithError) -> Result<EstimateWithError> {
    // The denominator must be distinguishable from zero by its own bound;
    // boundary-hit probabilities can be ~1e-14 and still perfectly
    // resolvable in relative terms.
    if den.value <= den.error_bound {
        return Err(Error::PrecisionLoss {
            denominator: den.value,
            bound: den.error_bound,
        });
    }
    let value = num.value / den.value;
    let error_bound = num.error_bound / den.value + value * den.error_bound / den.value;
    Ok(EstimateWithError::quadrature(value, error_bound))
}

/// Tail of the maximum penetration depth of the unkilled excursion:
/// `P(M >= k) = int_0^1 p / S(k;p) dp` for `k >= 1`.
///
/// Deliberately independent of `model.n()`: reaching depth `k` is the
/// boundary-hit event with the boundary moved to `k`.
pub fn max_depth_tail(k: u32, model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    if k < 1 {
        return Err(Error::IndexRange {
            name: "k",
            value: i64::from(k),
            lo: 1,
            hi: i64::from(u32::MAX),
        });
    }
    let moved = model.with_boundary(k)?;
    prob_reach(moved, spec)
}

/// Result of summing the tail of the maximum penetration depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaxDepthEstimate {
    /// The tail sum converged; the bound covers both the quadrature error
    /// and the geometric extrapolation of the truncated remainder.
    Finite(EstimateWithError),
    /// Tail terms failed to decay below the truncation threshold within
    /// `k_cap` terms. For `r = 1` they approach a strictly positive
    /// plateau (the expectation is infinite), reported here.
    Divergent { plateau: f64, terms_computed: u32 },
}

/// Expected maximum penetration depth via the tail sum
/// `E[M] = sum_{k>=1} P(M >= k)`.
///
/// Terms are accumulated in ascending `k` until one drops below
/// `trunc_eps`; the remainder is bounded by geometric extrapolation from
/// the last observed ratio (for `r < 1` the tails decay faster than any
/// geometric, so this is conservative). Hitting `k_cap` first yields a
/// divergence report — a structured result, not a failure — because
/// `r = 1` is a legal model parameter with `E[M] = inf`.
pub fn expected_max_depth(
    model: WalkModel,
    spec: &QuadratureSpec,
    trunc_eps: f64,
    k_cap: u32,
) -> Result<MaxDepthEstimate> {
    if trunc_eps.is_nan() || trunc_eps <= 0.0 {
        return Err(Error::Domain {
            name: "trunc_eps",
            value: trunc_eps,
            range: "(0, inf)",
        });
    }
    if k_cap < 1 {
        return Err(Error::IndexRange {
            name: "k_cap",
            value: i64::from(k_cap),
            lo: 1,
            hi: i64::from(u32::MAX),
        });
    }

    let mut sum = 0.0;
    let mut quad_err = 0.0;
    let mut prev_term: Option<f64> = None;
    let mut last_term = 0.0;
    for k in 1..=k_cap {
        let tail = max_depth_tail(k, model, spec)?;
        sum += tail.value;
        quad_err += tail.error_bound;
        last_term = tail.value;

        if tail.value < trunc_eps {
            let remainder = match prev_term {
                Some(prev) if prev > 0.0 && tail.value < prev => {
                    let ratio = tail.value / prev;
                    tail.value * ratio / (1.0 - ratio)
                }
                // No usable ratio yet; charge one extra term.
                _ => tail.value,
            };
            return Ok(MaxDepthEstimate::Finite(EstimateWithError::quadrature(
                sum,
                quad_err + remainder,
            )));
        }
        prev_term = Some(tail.value);
    }

    Ok(MaxDepthEstimate::Divergent {
        plateau: last_term,
        terms_computed: k_cap,
    })
}

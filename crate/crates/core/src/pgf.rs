//! Generating functions of excursion durations via tridiagonal
//! boundary-value problems.
//!
//! Conditional on the environment `p`, the damped hitting functionals
//! `v(k) = E[q^T 1{...} | X_0 = k]` satisfy
//!
//! ```text
//! v(k) = q r^k p v(k+1) + q (1 - r^k p) v(k-1),   k = 1..N-1,
//! ```
//!
//! with boundary values `(1, 0)` for the failed excursion (return to 0
//! before `N`) and `(0, 1)` for the successful one (reach `N` before 0).
//! The interior system is tridiagonal and strictly diagonally dominant for
//! `q < 1`; at `q = 1` it is weakly dominant but still nonsingular, which is
//! what makes the derivative evaluations for expected durations possible.

use crate::error::{Error, Result};
use crate::model::{EnvParam, PgfQuery, WalkModel};
use crate::quadrature::{integrate_unit, EstimateWithError, QuadratureSpec};

/// Which boundary-value problem to solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BvpKind {
    /// Return to the origin before the boundary: `v(0) = 1`, `v(N) = 0`.
    Failed,
    /// Reach the boundary before returning: `v(0) = 0`, `v(N) = 1`.
    Successful,
}

impl BvpKind {
    fn boundary_values(self) -> (f64, f64) {
        match self {
            BvpKind::Failed => (1.0, 0.0),
            BvpKind::Successful => (0.0, 1.0),
        }
    }
}

/// Solution of one damped boundary-value problem, indexed `0..=N`.
#[derive(Debug, Clone)]
pub struct BvpSolution {
    pub model: WalkModel,
    pub p: EnvParam,
    pub q: PgfQuery,
    pub kind: BvpKind,
    pub values: Vec<f64>,
}

impl BvpSolution {
    /// `v(k)` for `0 <= k <= N`.
    pub fn value(&self, k: u32) -> f64 {
        self.values[k as usize]
    }
}

const PIVOT_FLOOR: f64 = 1e-300;

/// Thomas elimination for the interior system. `sub`, `diag`, `sup` hold
/// the three bands; `rhs` is overwritten with the solution.
fn solve_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &mut [f64]) -> Result<()> {
    let n = diag.len();
    debug_assert!(n >= 1 && rhs.len() == n && sub.len() == n && sup.len() == n);

    let mut c_prime = vec![0.0; n];
    let mut denom = diag[0];
    if denom.abs() < PIVOT_FLOOR {
        return Err(Error::IllConditioned {
            row: 0,
            pivot: denom,
        });
    }
    c_prime[0] = sup[0] / denom;
    rhs[0] /= denom;

    for i in 1..n {
        denom = diag[i] - sub[i] * c_prime[i - 1];
        if denom.abs() < PIVOT_FLOOR {
            return Err(Error::IllConditioned {
                row: i,
                pivot: denom,
            });
        }
        c_prime[i] = sup[i] / denom;
        rhs[i] = (rhs[i] - sub[i] * rhs[i - 1]) / denom;
    }

    for i in (0..n - 1).rev() {
        rhs[i] -= c_prime[i] * rhs[i + 1];
    }
    Ok(())
}

/// Solves the damped boundary-value problem of the given kind.
///
/// Elimination without pivoting is justified by diagonal dominance:
/// `q (1 - r^k p) + q r^k p = q <= 1`, with strict dominance for `q < 1`.
pub fn solve_bvp(kind: BvpKind, q: PgfQuery, p: EnvParam, model: WalkModel) -> Result<BvpSolution> {
    let n = model.n() as usize;
    let (at_origin, at_boundary) = kind.boundary_values();
    let mut values = vec![0.0; n + 1];
    values[0] = at_origin;
    values[n] = at_boundary;

    let interior = n - 1;
    if interior > 0 {
        let qv = q.value();
        let mut sub = vec![0.0; interior];
        let diag = vec![1.0; interior];
        let mut sup = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for k in 1..n {
            let up = model.up_prob(k as u32, p);
            let i = k - 1;
            sub[i] = -qv * (1.0 - up);
            sup[i] = -qv * up;
        }
        rhs[0] += qv * (1.0 - model.up_prob(1, p)) * at_origin;
        rhs[interior - 1] += qv * model.up_prob((n - 1) as u32, p) * at_boundary;
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs)?;
        values[1..n].copy_from_slice(&rhs);
    }

    Ok(BvpSolution {
        model,
        p,
        q,
        kind,
        values,
    })
}

/// Solves the q-derivative system at `q = 1`: differentiating the
/// recurrence gives the same matrix with right-hand side
/// `r^k p v(k+1) + (1 - r^k p) v(k-1)` and zero boundary values.
/// Returns `(v, v')`, both indexed `0..=N`.
pub fn solve_bvp_with_derivative(
    kind: BvpKind,
    p: EnvParam,
    model: WalkModel,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let q1 = PgfQuery::new(1.0).expect("1 is a valid damping value");
    let base = solve_bvp(kind, q1, p, model)?;
    let n = model.n() as usize;
    let mut derivative = vec![0.0; n + 1];

    let interior = n - 1;
    if interior > 0 {
        let mut sub = vec![0.0; interior];
        let diag = vec![1.0; interior];
        let mut sup = vec![0.0; interior];
        let mut rhs = vec![0.0; interior];
        for k in 1..n {
            let up = model.up_prob(k as u32, p);
            let i = k - 1;
            sub[i] = -(1.0 - up);
            sup[i] = -up;
            rhs[i] = up * base.values[k + 1] + (1.0 - up) * base.values[k - 1];
        }
        solve_tridiagonal(&sub, &diag, &sup, &mut rhs)?;
        derivative[1..n].copy_from_slice(&rhs);
    }

    Ok((base.values, derivative))
}

fn env_at(p: f64) -> EnvParam {
    EnvParam::new(p).expect("quadrature nodes are interior")
}

/// `A(q) = E[q^duration, excursion fails] = q/2 + int_0^1 p q b(1;p) dp`.
///
/// The `q/2` term is the one-step excursion that never leaves the origin.
pub fn pgf_failed(q: PgfQuery, model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    let qv = q.value();
    let inner = integrate_unit(
        |p| {
            // The system is nonsingular throughout (0,1) x (0,1]; a NaN here
            // would surface as an evaluation error naming the node.
            solve_bvp(BvpKind::Failed, q, env_at(p), model)
                .map(|sol| p * qv * sol.value(1))
                .unwrap_or(f64::NAN)
        },
        spec,
    )?;
    Ok(EstimateWithError::quadrature(
        0.5 * qv + inner.value,
        inner.error_bound,
    ))
}

/// `B(q) = E[q^duration, excursion reaches N] = int_0^1 p q c(1;p) dp`.
pub fn pgf_success(
    q: PgfQuery,
    model: WalkModel,
    spec: &QuadratureSpec,
) -> Result<EstimateWithError> {
    let qv = q.value();
    integrate_unit(
        |p| {
            solve_bvp(BvpKind::Successful, q, env_at(p), model)
                .map(|sol| p * qv * sol.value(1))
                .unwrap_or(f64::NAN)
        },
        spec,
    )
}

/// Generating function of the first hitting time of the boundary:
/// `E[q^tau] = B(q) / (1 - A(q))`, the geometric composition over failed
/// excursions followed by one success.
pub fn pgf_tau_n(q: PgfQuery, model: WalkModel, spec: &QuadratureSpec) -> Result<EstimateWithError> {
    let a = pgf_failed(q, model, spec)?;
    let b = pgf_success(q, model, spec)?;
    let denominator = 1.0 - a.value;
    // A's error bound is what limits how well 1 - A(q) is known.
    if denominator <= a.error_bound {
        return Err(Error::PrecisionLoss {
            denominator,
            bound: a.error_bound,
        });
    }
    let value = b.value / denominator;
    let error_bound = b.error_bound / denominator + value * a.error_bound / denominator;
    Ok(EstimateWithError::quadrature(value, error_bound))
}

/// `(A'(1), B'(1))`: q-derivatives of the failed and successful excursion
/// transforms at `q = 1`. Their sum is the expected excursion duration.
///
/// Computed from the exact derivative system, not finite differences;
/// `A'(1) = 1/2 + int p (b + b')(1;p) dp` and
/// `B'(1) = int p (c + c')(1;p) dp`.
pub fn derivatives_at_one(
    model: WalkModel,
    spec: &QuadratureSpec,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let a_inner = integrate_unit(
        |p| {
            solve_bvp_with_derivative(BvpKind::Failed, env_at(p), model)
                .map(|(v, dv)| p * (v[1] + dv[1]))
                .unwrap_or(f64::NAN)
        },
        spec,
    )?;
    let b_inner = integrate_unit(
        |p| {
            solve_bvp_with_derivative(BvpKind::Successful, env_at(p), model)
                .map(|(v, dv)| p * (v[1] + dv[1]))
                .unwrap_or(f64::NAN)
        },
        spec,
    )?;
    Ok((
        EstimateWithError::quadrature(0.5 + a_inner.value, a_inner.error_bound),
        EstimateWithError::quadrature(b_inner.value, b_inner.error_bound),
    ))
}

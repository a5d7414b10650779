//! Per-environment closed forms: scale function `S(k;p)`, edge weight
//! `W(k;p)`, ruin probability and the discrete Green's function.
//!
//! The scale function is a sum of products of the step-odds ratios
//! `(1 - r^j p) / (r^j p)`. For `r < 1` those ratios grow like `r^-j`, so the
//! products overflow `f64` already for modest depths; everything here is
//! therefore accumulated as logarithms and combined with log-sum-exp. All
//! operations share one [`LogRatioTable`] per `(model, p)` pair so a full
//! Green-function sweep stays `O(N)` per table build instead of `O(N^2)`.

use crate::error::{Error, Result};
use crate::model::{EnvParam, WalkModel};

/// Log-sum-exp over a slice: `ln(sum_i exp(x[i]))`.
///
/// Empty slices yield negative infinity (an empty sum), matching the
/// boundary conventions `S(0;p) = 0` and `S(N;p) - S(N;p) = 0`.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + sum.ln()
}

/// Cumulative log-odds table for one `(model, p)` pair.
///
/// Entry `i` holds `ln prod_{j=1..i} (1 - r^j p) / (r^j p)`, with entry 0
/// equal to zero (the empty product is one). These are exactly the
/// logarithms of the scale-function increments: `S(k+1;p) - S(k;p)
/// = exp(log_terms[k])`.
#[derive(Debug, Clone)]
pub struct LogRatioTable {
    model: WalkModel,
    p: EnvParam,
    log_terms: Vec<f64>,
}

impl LogRatioTable {
    /// Builds the table with `model.n()` entries (indices `0..N`), enough
    /// for every operation bounded by the model's boundary.
    pub fn new(model: WalkModel, p: EnvParam) -> Self {
        Self::with_len(model, p, model.n() as usize)
    }

    /// Builds `len` entries regardless of the boundary; used when the
    /// penetration depth of the unkilled excursion is probed past `N`.
    pub fn with_len(model: WalkModel, p: EnvParam, len: usize) -> Self {
        let pv = p.value();
        let mut log_terms = Vec::with_capacity(len.max(1));
        log_terms.push(0.0);
        let mut cum = 0.0;
        let mut r_pow = 1.0;
        for _ in 1..len {
            r_pow *= model.r();
            let up = r_pow * pv;
            cum += (1.0 - up).ln() - up.ln();
            log_terms.push(cum);
        }
        Self {
            model,
            p,
            log_terms,
        }
    }

    pub fn model(&self) -> WalkModel {
        self.model
    }

    pub fn p(&self) -> EnvParam {
        self.p
    }

    /// Number of stored increments; `S(k;p)` is available for `k <= len`.
    pub fn len(&self) -> usize {
        self.log_terms.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds at least the empty-product entry
    }

    /// `ln(S(k+1;p) - S(k;p))`, the k-th increment.
    pub fn log_term(&self, k: usize) -> f64 {
        self.log_terms[k]
    }

    /// `ln S(k;p)` for `0 <= k <= len` (`S(0) = 0` maps to `-inf`).
    pub fn log_scale(&self, k: usize) -> f64 {
        log_sum_exp(&self.log_terms[..k])
    }

    /// `ln(S(hi;p) - S(lo;p))` via the increments `lo..hi`.
    fn log_range(&self, lo: usize, hi: usize) -> f64 {
        log_sum_exp(&self.log_terms[lo..hi])
    }

    /// `ln W(k;p)` for `1 <= k <= len - 1`.
    pub fn log_weight(&self, k: usize) -> f64 {
        let pv = self.p.value();
        k as f64 * self.model.r().ln() + pv.ln() + self.log_terms[k]
    }

    /// Ruin probability `a(k;p)`: reach 0 before `N` starting from `k`.
    ///
    /// Evaluated as `(S(N) - S(k)) / S(N)` through the shared increments, so
    /// the boundary values `a(0) = 1` and `a(N) = 0` are exact.
    pub fn ruin(&self, k: usize) -> f64 {
        let n = self.len();
        (self.log_range(k, n) - self.log_range(0, n)).exp()
    }

    /// Two-sided Green's function `G(x, k; p)`: expected visits to `k`
    /// before absorption at `{0, N}`, starting from `x`.
    pub fn green(&self, x: usize, k: usize) -> f64 {
        let n = self.len();
        let log_s_n = self.log_scale(n);
        let log_w = self.log_weight(k);
        let log_g = if x <= k {
            self.log_scale(x) + self.log_range(k, n) - log_w - log_s_n
        } else {
            self.log_scale(k) + self.log_range(x, n) - log_w - log_s_n
        };
        log_g.exp()
    }

    /// `sum_{k=1..N-1} G(k;p)` with `G(k;p) = G(1, k; p)`, the expected
    /// interior occupation of an excursion whose first step went right.
    ///
    /// One backward suffix pass keeps the sweep `O(N)`.
    pub fn interior_visit_sum(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        let log_s_n = self.log_scale(n);
        // suffix[k] = ln(S(N) - S(k)), accumulated from the top.
        let mut total = 0.0;
        let mut suffix = f64::NEG_INFINITY;
        let mut terms = Vec::with_capacity(n - 1);
        for k in (1..n).rev() {
            suffix = log_add_exp(suffix, self.log_terms[k]);
            terms.push((k, suffix));
        }
        for &(k, log_tail) in terms.iter().rev() {
            total += (log_tail - self.log_weight(k) - log_s_n).exp();
        }
        total
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

fn check_state(name: &'static str, k: u32, lo: u32, hi: u32) -> Result<()> {
    if k < lo || k > hi {
        return Err(Error::IndexRange {
            name,
            value: i64::from(k),
            lo: i64::from(lo),
            hi: i64::from(hi),
        });
    }
    Ok(())
}

/// Scale function `S(k;p) = sum_{i=0..k-1} prod_{j=1..i} (1-r^j p)/(r^j p)`
/// for `1 <= k <= N`. `S(1) = 1` always; nondecreasing in `k`.
pub fn scale_s(k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    Ok(log_scale_s(k, p, model)?.exp())
}

/// `ln S(k;p)`; the log-domain variant used wherever `S` itself would
/// overflow.
pub fn log_scale_s(k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    check_state("k", k, 1, model.n())?;
    let table = LogRatioTable::new(model, p);
    Ok(table.log_scale(k as usize))
}

/// Edge weight `W(k;p) = r^k p prod_{j=1..k} (1-r^j p)/(r^j p)` for
/// `1 <= k <= N-1`.
///
/// Equals both conductance forms `r^k p (S(k+1) - S(k))` and
/// `(1 - r^k p)(S(k) - S(k-1))`.
pub fn weight_w(k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    Ok(log_weight_w(k, p, model)?.exp())
}

/// `ln W(k;p)`.
pub fn log_weight_w(k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    if model.n() < 2 {
        return Err(Error::IndexRange {
            name: "k",
            value: i64::from(k),
            lo: 1,
            hi: 0,
        });
    }
    check_state("k", k, 1, model.n() - 1)?;
    let table = LogRatioTable::new(model, p);
    Ok(table.log_weight(k as usize))
}

/// Probability of reaching 0 before `N` from state `k` under fixed
/// environment `p`, for `0 <= k <= N`.
pub fn ruin_prob(k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    check_state("k", k, 0, model.n())?;
    let table = LogRatioTable::new(model, p);
    Ok(table.ruin(k as usize))
}

/// Expected number of visits to state `k` before absorption at `{0, N}`,
/// starting from state `x`, under fixed environment `p`.
///
/// Requires `0 <= x <= N` and `1 <= k <= N-1`. The one-argument Green's
/// function of the excursion is `green_g(1, k, p, model)`.
pub fn green_g(x: u32, k: u32, p: EnvParam, model: WalkModel) -> Result<f64> {
    check_state("x", x, 0, model.n())?;
    if model.n() < 2 {
        return Err(Error::IndexRange {
            name: "k",
            value: i64::from(k),
            lo: 1,
            hi: 0,
        });
    }
    check_state("k", k, 1, model.n() - 1)?;
    let table = LogRatioTable::new(model, p);
    Ok(table.green(x as usize, k as usize))
}

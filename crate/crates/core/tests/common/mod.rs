//! Exhaustive path-probability enumeration for small boundaries.
//!
//! An independent oracle: probability mass is propagated step by step in
//! linear domain with absorption bookkeeping, so any quantity it produces
//! comes from nothing but the transition rule. Truncation is explicit — the
//! mass still alive at the horizon bounds what the finite sum can miss.

/// Where the enumeration starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpStart {
    /// At the origin, with the excursion's first-step rule (right with
    /// probability `p`, otherwise a one-step stay absorbed at the origin).
    Origin,
    /// At state 1, plain interior dynamics; this is the Green's-function
    /// convention.
    StateOne,
}

#[derive(Debug, Clone)]
pub struct DpOutcome {
    /// `[t]` = probability of absorption at the origin exactly at step `t`.
    pub absorbed_origin: Vec<f64>,
    /// `[t]` = probability of absorption at the boundary exactly at step `t`.
    pub absorbed_boundary: Vec<f64>,
    /// Expected occupancy per interior state over the simulated horizon.
    pub visits: Vec<f64>,
    /// Probability mass still alive after the horizon; bounds truncation.
    pub surviving_mass: f64,
}

impl DpOutcome {
    pub fn reach_prob(&self) -> f64 {
        self.absorbed_boundary.iter().sum()
    }

    pub fn return_prob(&self) -> f64 {
        self.absorbed_origin.iter().sum()
    }

    /// `sum_t q^t P(absorbed at origin at t)`.
    pub fn pgf_failed(&self, q: f64) -> f64 {
        self.absorbed_origin
            .iter()
            .enumerate()
            .map(|(t, &m)| q.powi(t as i32) * m)
            .sum()
    }

    pub fn pgf_success(&self, q: f64) -> f64 {
        self.absorbed_boundary
            .iter()
            .enumerate()
            .map(|(t, &m)| q.powi(t as i32) * m)
            .sum()
    }
}

/// Propagates the killed chain for `horizon` steps at fixed environment `p`.
pub fn enumerate_paths(r: f64, n: u32, p: f64, horizon: usize, start: DpStart) -> DpOutcome {
    let n = n as usize;
    let mut alive = vec![0.0f64; n + 1];
    match start {
        DpStart::Origin => alive[0] = 1.0,
        DpStart::StateOne => alive[1] = 1.0,
    }

    let mut absorbed_origin = vec![0.0f64; horizon + 1];
    let mut absorbed_boundary = vec![0.0f64; horizon + 1];
    let mut visits = vec![0.0f64; n + 1];

    for t in 0..horizon {
        for k in 1..n {
            visits[k] += alive[k];
        }
        let mut next = vec![0.0f64; n + 1];
        if alive[0] > 0.0 {
            if n == 1 {
                absorbed_boundary[t + 1] += alive[0] * p;
            } else {
                next[1] += alive[0] * p;
            }
            absorbed_origin[t + 1] += alive[0] * (1.0 - p);
            next[0] = 0.0;
        }
        for k in 1..n {
            let mass = alive[k];
            if mass == 0.0 {
                continue;
            }
            let up = r.powi(k as i32) * p;
            if k + 1 == n {
                absorbed_boundary[t + 1] += mass * up;
            } else {
                next[k + 1] += mass * up;
            }
            if k == 1 {
                absorbed_origin[t + 1] += mass * (1.0 - up);
            } else {
                next[k - 1] += mass * (1.0 - up);
            }
        }
        alive = next;
    }

    DpOutcome {
        absorbed_origin,
        absorbed_boundary,
        surviving_mass: alive.iter().sum(),
        visits,
    }
}

//! Deterministic Monte Carlo oracle.
//!
//! Simulates the process exactly as defined: a fresh uniform drive `p` per
//! excursion, right-step probability `r^k p` from state `k`, optional
//! killing at the boundary. Each excursion (or hitting experiment) draws
//! from its own counter-based substream keyed by `(seed, stream class,
//! index)`, so results are bit-identical regardless of how many worker
//! threads ran — which is the whole value of an oracle.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{EnvParam, WalkModel};

/// Configuration of one simulation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub model: WalkModel,
    /// Number of excursions (or hitting experiments).
    pub n_excursions: u64,
    pub seed: u64,
    /// Per-excursion step cap. Safety net for `r = 1`, where an unkilled
    /// excursion at `p > 1/2` may never return; truncations are counted
    /// and reported, never silently dropped.
    pub horizon: u64,
    /// Kill at the boundary (`true`) or run unkilled for penetration-depth
    /// statistics (`false`).
    pub killed: bool,
}

impl SimConfig {
    /// Killed-mode configuration with the default horizon of 10^6 steps.
    pub fn new(model: WalkModel, n_excursions: u64, seed: u64) -> Self {
        Self {
            model,
            n_excursions,
            seed,
            horizon: 1_000_000,
            killed: true,
        }
    }

    pub fn unkilled(mut self) -> Self {
        self.killed = false;
        self
    }

    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_excursions < 1 {
            return Err(Error::IndexRange {
                name: "n_excursions",
                value: self.n_excursions as i64,
                lo: 1,
                hi: i64::MAX,
            });
        }
        if self.horizon < 1 {
            return Err(Error::IndexRange {
                name: "horizon",
                value: self.horizon as i64,
                lo: 1,
                hi: i64::MAX,
            });
        }
        Ok(())
    }
}

/// splitmix64 finalizer; full-period, passes standard statistical batteries,
/// and cheap enough that every excursion can afford its own stream.
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// Stream classes keep independent experiments on disjoint substreams even
/// when they share a seed and an index range.
#[derive(Debug, Clone, Copy)]
pub(crate) enum StreamClass {
    Excursion = 1,
    Hitting = 2,
}

/// Counter-based generator: `(seed, class, index)` fixes the whole stream.
#[derive(Debug, Clone)]
pub struct SubstreamRng {
    state: u64,
}

impl SubstreamRng {
    pub(crate) fn for_index(seed: u64, class: StreamClass, index: u64) -> Self {
        let state = mix(seed ^ mix(index.wrapping_add(GOLDEN.wrapping_mul(class as u64))));
        Self { state }
    }

    /// Substream of the i-th plain excursion under `seed`.
    pub fn excursion_stream(seed: u64, index: u64) -> Self {
        Self::for_index(seed, StreamClass::Excursion, index)
    }

    /// Substream of the i-th hitting experiment under `seed`.
    pub fn hitting_stream(seed: u64, index: u64) -> Self {
        Self::for_index(seed, StreamClass::Hitting, index)
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform on the half-open interval `[0, 1)`; used for step decisions.
    fn next_uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform strictly inside `(0, 1)`; used for the environment draw,
    /// which must stay off the endpoints.
    fn next_uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }
}

/// How one excursion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Terminal {
    ReturnedToOrigin,
    HitBoundary,
    HorizonTruncated,
}

/// Everything recorded about one simulated excursion.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcursionOutcome {
    /// Number of steps until the excursion ended (or was truncated).
    pub duration: u64,
    pub terminal: Terminal,
    /// Highest state reached; equals `N` exactly when the boundary was hit.
    pub max_depth: u32,
    /// Time steps spent at each state `>= 1` before absorption, sparse.
    /// Together with the single step spent at the origin these account for
    /// every time step: `duration = 1 + sum(visits)` for non-truncated
    /// excursions.
    pub visits: BTreeMap<u32, u64>,
    /// The environment value sampled for this excursion.
    pub env_p: f64,
}

/// Simulates one excursion on the given substream.
pub fn run_excursion(rng: &mut SubstreamRng, config: &SimConfig) -> ExcursionOutcome {
    let model = config.model;
    let p = rng.next_uniform_open();
    let env = EnvParam::new(p).expect("open-interval draw");

    // First step from the origin: right with probability p, else the
    // excursion is the one-step stay.
    if rng.next_uniform() >= p {
        return ExcursionOutcome {
            duration: 1,
            terminal: Terminal::ReturnedToOrigin,
            max_depth: 0,
            visits: BTreeMap::new(),
            env_p: p,
        };
    }

    let mut state: u32 = 1;
    let mut duration: u64 = 1;
    let mut max_depth: u32 = 1;
    let mut visits: BTreeMap<u32, u64> = BTreeMap::new();
    // Right-step probabilities are reused every time a state is revisited.
    let mut up_probs: Vec<f64> = vec![f64::NAN; 2];
    up_probs[1] = model.up_prob(1, env);

    let terminal = loop {
        if config.killed && state == model.n() {
            break Terminal::HitBoundary;
        }
        if state == 0 {
            break Terminal::ReturnedToOrigin;
        }
        if duration >= config.horizon {
            break Terminal::HorizonTruncated;
        }

        *visits.entry(state).or_insert(0) += 1;
        let idx = state as usize;
        if idx >= up_probs.len() {
            up_probs.resize(idx + 1, f64::NAN);
        }
        if up_probs[idx].is_nan() {
            up_probs[idx] = model.up_prob(state, env);
        }
        if rng.next_uniform() < up_probs[idx] {
            state += 1;
            max_depth = max_depth.max(state);
        } else {
            state -= 1;
        }
        duration += 1;
    };

    ExcursionOutcome {
        duration,
        terminal,
        max_depth,
        visits,
        env_p: p,
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Standard error of the mean (one sigma).
    pub sem: f64,
}

impl McEstimate {
    /// The 3-sigma normal-approximation half-width reported everywhere.
    pub fn half_width(&self) -> f64 {
        3.0 * self.sem
    }
}

/// Aggregated estimator summary of one simulation run.
///
/// [`run_ensemble`] fills the per-excursion statistics (`reach_freq`,
/// `mean_duration`, `max_depth_hist`, `mean_visits`);
/// [`run_hitting_experiment`] fills the per-experiment ones (`mean_tau_n`,
/// `local_time_hist`, `tau_hist`). Histograms sum to `n`, except the
/// hitting histograms which sum to `completed = n - truncation_count`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimSummary {
    /// Number of replication units (excursions or experiments).
    pub n: u64,
    pub reach_freq: Option<McEstimate>,
    pub mean_duration: Option<McEstimate>,
    pub mean_tau_n: Option<McEstimate>,
    /// Count of experiments with exactly `n` failed excursions before the
    /// first boundary hit.
    pub local_time_hist: BTreeMap<u64, u64>,
    /// Count of experiments whose first boundary hit happened at step `t`.
    pub tau_hist: BTreeMap<u64, u64>,
    /// Count of excursions with the given maximum depth.
    pub max_depth_hist: BTreeMap<u32, u64>,
    /// Per-state mean time spent during one excursion.
    pub mean_visits: BTreeMap<u32, McEstimate>,
    /// Excursions (or experiments containing one) cut off at the horizon.
    pub truncation_count: u64,
    /// Experiments that finished within the horizon; denominators of the
    /// hitting statistics.
    pub completed: u64,
}

impl SimSummary {
    /// Empirical `P(max depth >= k)`.
    pub fn depth_tail_freq(&self, k: u32) -> f64 {
        let above: u64 = self
            .max_depth_hist
            .iter()
            .filter(|&(&depth, _)| depth >= k)
            .map(|(_, &c)| c)
            .sum();
        above as f64 / self.n as f64
    }
}

fn mean_estimate(sum: f64, sumsq: f64, n: u64) -> McEstimate {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 {
        ((sumsq - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        sem: (var / nf).sqrt(),
    }
}

fn freq_estimate(count: u64, n: u64) -> McEstimate {
    let p = count as f64 / n as f64;
    McEstimate {
        mean: p,
        sem: (p * (1.0 - p) / n as f64).sqrt(),
    }
}

// Excursions are processed in fixed-size index chunks. Integer moments make
// the merge order-independent; the chunk layout keeps any future float
// accumulation deterministic too.
const CHUNK: u64 = 4096;

fn chunk_ranges(n: u64) -> Vec<(u64, u64)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(n)))
        .collect()
}

#[derive(Default)]
struct EnsembleAgg {
    reach_count: u64,
    truncated: u64,
    dur_sum: u128,
    dur_sumsq: u128,
    max_depth_hist: BTreeMap<u32, u64>,
    visit_sum: BTreeMap<u32, u128>,
    visit_sumsq: BTreeMap<u32, u128>,
}

impl EnsembleAgg {
    fn absorb(&mut self, out: &ExcursionOutcome) {
        match out.terminal {
            Terminal::HitBoundary => self.reach_count += 1,
            Terminal::HorizonTruncated => self.truncated += 1,
            Terminal::ReturnedToOrigin => {}
        }
        self.dur_sum += u128::from(out.duration);
        self.dur_sumsq += u128::from(out.duration) * u128::from(out.duration);
        *self.max_depth_hist.entry(out.max_depth).or_insert(0) += 1;
        for (&k, &v) in &out.visits {
            *self.visit_sum.entry(k).or_insert(0) += u128::from(v);
            *self.visit_sumsq.entry(k).or_insert(0) += u128::from(v) * u128::from(v);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.reach_count += other.reach_count;
        self.truncated += other.truncated;
        self.dur_sum += other.dur_sum;
        self.dur_sumsq += other.dur_sumsq;
        for (k, v) in other.max_depth_hist {
            *self.max_depth_hist.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.visit_sum {
            *self.visit_sum.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.visit_sumsq {
            *self.visit_sumsq.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Runs `n_excursions` independent excursions and aggregates per-excursion
/// statistics. Bit-identical for a fixed config, whatever the thread count.
pub fn run_ensemble(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    let n = config.n_excursions;

    let aggs: Vec<EnsembleAgg> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut agg = EnsembleAgg::default();
            for i in lo..hi {
                let mut rng = SubstreamRng::excursion_stream(config.seed, i);
                agg.absorb(&run_excursion(&mut rng, config));
            }
            agg
        })
        .collect();
    let agg = aggs.into_iter().fold(EnsembleAgg::default(), EnsembleAgg::merge);

    let mut mean_visits = BTreeMap::new();
    if config.killed {
        // Interior states always appear, even when never visited.
        for k in 1..config.model.n() {
            mean_visits.insert(k, McEstimate { mean: 0.0, sem: 0.0 });
        }
    }
    for (&k, &sum) in &agg.visit_sum {
        let sumsq = agg.visit_sumsq[&k];
        mean_visits.insert(k, mean_estimate(sum as f64, sumsq as f64, n));
    }

    Ok(SimSummary {
        n,
        reach_freq: config.killed.then(|| freq_estimate(agg.reach_count, n)),
        mean_duration: Some(mean_estimate(agg.dur_sum as f64, agg.dur_sumsq as f64, n)),
        mean_tau_n: None,
        local_time_hist: BTreeMap::new(),
        tau_hist: BTreeMap::new(),
        max_depth_hist: agg.max_depth_hist,
        mean_visits,
        truncation_count: agg.truncated,
        completed: n - agg.truncated,
    })
}

#[derive(Default)]
struct HittingAgg {
    completed: u64,
    truncated: u64,
    tau_sum: u128,
    tau_sumsq: u128,
    local_time_hist: BTreeMap<u64, u64>,
    tau_hist: BTreeMap<u64, u64>,
}

impl HittingAgg {
    fn merge(mut self, other: Self) -> Self {
        self.completed += other.completed;
        self.truncated += other.truncated;
        self.tau_sum += other.tau_sum;
        self.tau_sumsq += other.tau_sumsq;
        for (k, v) in other.local_time_hist {
            *self.local_time_hist.entry(k).or_insert(0) += v;
        }
        for (k, v) in other.tau_hist {
            *self.tau_hist.entry(k).or_insert(0) += v;
        }
        self
    }
}

/// Runs `n_excursions` independent hitting experiments: each repeats
/// excursions until the boundary is hit, recording the number of failed
/// excursions and the total step count. Requires killed mode.
///
/// An experiment containing a horizon-truncated excursion is counted in
/// `truncation_count` and excluded from the hitting statistics.
pub fn run_hitting_experiment(config: &SimConfig) -> Result<SimSummary> {
    config.validate()?;
    if !config.killed {
        return Err(Error::Domain {
            name: "killed",
            value: 0.0,
            range: "hitting experiments require killed mode",
        });
    }
    let n = config.n_excursions;

    let aggs: Vec<HittingAgg> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut agg = HittingAgg::default();
            for i in lo..hi {
                let mut rng = SubstreamRng::hitting_stream(config.seed, i);
                let mut failed: u64 = 0;
                let mut tau: u64 = 0;
                loop {
                    let out = run_excursion(&mut rng, config);
                    tau += out.duration;
                    match out.terminal {
                        Terminal::HitBoundary => {
                            agg.completed += 1;
                            agg.tau_sum += u128::from(tau);
                            agg.tau_sumsq += u128::from(tau) * u128::from(tau);
                            *agg.local_time_hist.entry(failed).or_insert(0) += 1;
                            *agg.tau_hist.entry(tau).or_insert(0) += 1;
                            break;
                        }
                        Terminal::ReturnedToOrigin => failed += 1,
                        Terminal::HorizonTruncated => {
                            agg.truncated += 1;
                            break;
                        }
                    }
                }
            }
            agg
        })
        .collect();
    let agg = aggs.into_iter().fold(HittingAgg::default(), HittingAgg::merge);

    Ok(SimSummary {
        n,
        reach_freq: None,
        mean_duration: None,
        mean_tau_n: (agg.completed > 0)
            .then(|| mean_estimate(agg.tau_sum as f64, agg.tau_sumsq as f64, agg.completed)),
        local_time_hist: agg.local_time_hist,
        tau_hist: agg.tau_hist,
        max_depth_hist: BTreeMap::new(),
        mean_visits: BTreeMap::new(),
        truncation_count: agg.truncated,
        completed: agg.completed,
    })
}

/// Monte Carlo point estimates of the generating functions at interior `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PgfPointEstimate {
    /// `E[q^duration, excursion fails]`.
    pub failed: McEstimate,
    /// `E[q^duration, excursion reaches the boundary]`.
    pub success: McEstimate,
    /// The composed ratio `B / (1 - A)`, estimating `E[q^tau]`; its error
    /// uses the delta method with the sampled covariance of the two class
    /// averages.
    pub composed: McEstimate,
    pub truncation_count: u64,
}

/// Estimates both excursion transforms and their composition at one damping
/// value, from the same excursion ensemble [`run_ensemble`] would draw.
pub fn estimate_pgf_point(q: f64, config: &SimConfig) -> Result<PgfPointEstimate> {
    config.validate()?;
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            range: "(0, 1)",
        });
    }
    if !config.killed {
        return Err(Error::Domain {
            name: "killed",
            value: 0.0,
            range: "transform estimates require killed mode",
        });
    }
    let n = config.n_excursions;

    // Per-chunk float sums in index order; merged in chunk order.
    #[derive(Default, Clone, Copy)]
    struct Sums {
        a: f64,
        b: f64,
        aa: f64,
        bb: f64,
        ab: f64,
        truncated: u64,
    }

    let partials: Vec<Sums> = chunk_ranges(n)
        .into_par_iter()
        .map(|(lo, hi)| {
            let mut s = Sums::default();
            for i in lo..hi {
                let mut rng = SubstreamRng::excursion_stream(config.seed, i);
                let out = run_excursion(&mut rng, config);
                let damp = q.powi(out.duration.min(i32::MAX as u64) as i32);
                let (ai, bi) = match out.terminal {
                    Terminal::ReturnedToOrigin => (damp, 0.0),
                    Terminal::HitBoundary => (0.0, damp),
                    Terminal::HorizonTruncated => {
                        s.truncated += 1;
                        (0.0, 0.0)
                    }
                };
                s.a += ai;
                s.b += bi;
                s.aa += ai * ai;
                s.bb += bi * bi;
                s.ab += ai * bi;
            }
            s
        })
        .collect();

    let mut total = Sums::default();
    for s in partials {
        total.a += s.a;
        total.b += s.b;
        total.aa += s.aa;
        total.bb += s.bb;
        total.ab += s.ab;
        total.truncated += s.truncated;
    }

    let nf = n as f64;
    let mean_a = total.a / nf;
    let mean_b = total.b / nf;
    let var_a = ((total.aa - nf * mean_a * mean_a) / (nf - 1.0)).max(0.0);
    let var_b = ((total.bb - nf * mean_b * mean_b) / (nf - 1.0)).max(0.0);
    let cov_ab = (total.ab - nf * mean_a * mean_b) / (nf - 1.0);

    let denom = 1.0 - mean_a;
    let composed = mean_b / denom;
    // Delta method for f(A, B) = B / (1 - A).
    let ga = mean_b / (denom * denom);
    let gb = 1.0 / denom;
    let var_f = (ga * ga * var_a + gb * gb * var_b + 2.0 * ga * gb * cov_ab).max(0.0);

    Ok(PgfPointEstimate {
        failed: McEstimate {
            mean: mean_a,
            sem: (var_a / nf).sqrt(),
        },
        success: McEstimate {
            mean: mean_b,
            sem: (var_b / nf).sqrt(),
        },
        composed: McEstimate {
            mean: composed,
            sem: (var_f / nf).sqrt(),
        },
        truncation_count: total.truncated,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(r: f64, n: u32) -> WalkModel {
        WalkModel::new(r, n).unwrap()
    }

    #[test]
    fn stay_branch_is_a_one_step_excursion() {
        // Scan for an excursion that stayed at the origin and check its
        // shape; with P(stay) = 1/2 on average one exists almost surely.
        let config = SimConfig::new(model(1.0, 2), 64, 7);
        let mut found = false;
        for i in 0..64 {
            let mut rng = SubstreamRng::excursion_stream(config.seed, i);
            let out = run_excursion(&mut rng, &config);
            if out.terminal == Terminal::ReturnedToOrigin && out.duration == 1 {
                assert_eq!(out.max_depth, 0);
                assert!(out.visits.is_empty());
                found = true;
            }
        }
        assert!(found, "no one-step excursion among 64 draws");
    }

    #[test]
    fn boundary_adjacent_to_origin() {
        // N = 1: every excursion lasts exactly one step, and a right step
        // hits the boundary immediately.
        let config = SimConfig::new(model(0.7, 1), 1000, 11);
        let summary = run_ensemble(&config).unwrap();
        assert_eq!(summary.mean_duration.unwrap().mean, 1.0);
        let reach = summary.reach_freq.unwrap();
        assert!((reach.mean - 0.5).abs() <= 3.0 * reach.sem + 0.05);
    }

    #[test]
    fn conservation_of_time_steps() {
        let config = SimConfig::new(model(0.8, 5), 200, 3);
        for i in 0..200 {
            let mut rng = SubstreamRng::excursion_stream(config.seed, i);
            let out = run_excursion(&mut rng, &config);
            let interior: u64 = out.visits.values().sum();
            assert_eq!(out.duration, 1 + interior, "excursion {i}");
            if out.terminal == Terminal::HitBoundary {
                assert_eq!(out.max_depth, 5);
            }
        }
    }

    #[test]
    fn reach_frequency_matches_analytic_third() {
        let config = SimConfig::new(model(1.0, 2), 200_000, 42);
        let summary = run_ensemble(&config).unwrap();
        let reach = summary.reach_freq.unwrap();
        assert!(
            (reach.mean - 1.0 / 3.0).abs() <= reach.half_width(),
            "freq {} vs 1/3, hw {}",
            reach.mean,
            reach.half_width()
        );
    }

    #[test]
    fn identical_config_is_bit_identical() {
        let config = SimConfig::new(model(0.9, 4), 5000, 99);
        let a = run_ensemble(&config).unwrap();
        let b = run_ensemble(&config).unwrap();
        assert_eq!(a, b);
        let ha = run_hitting_experiment(&config).unwrap();
        let hb = run_hitting_experiment(&config).unwrap();
        assert_eq!(ha, hb);
    }

    #[test]
    fn outcome_independent_of_batch_size() {
        // Excursion #57 must come out the same whether simulated alone or
        // inside any ensemble.
        let config = SimConfig::new(model(0.8, 3), 100, 5);
        let mut rng = SubstreamRng::excursion_stream(config.seed, 57);
        let alone = run_excursion(&mut rng, &config);
        let mut rng = SubstreamRng::excursion_stream(config.seed, 57);
        let again = run_excursion(&mut rng, &config);
        assert_eq!(alone, again);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let config = SimConfig::new(model(0.9, 3), 20_000, 123);
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_ensemble(&config).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(8)
            .build()
            .unwrap()
            .install(|| run_ensemble(&config).unwrap());
        assert_eq!(single, many);
    }

    #[test]
    fn hitting_experiment_boundary_one() {
        // E[tau] = 2 at N = 1.
        let config = SimConfig::new(model(1.0, 1), 100_000, 17);
        let summary = run_hitting_experiment(&config).unwrap();
        let tau = summary.mean_tau_n.unwrap();
        assert!((tau.mean - 2.0).abs() <= tau.half_width());
        assert_eq!(summary.truncation_count, 0);
        let total: u64 = summary.local_time_hist.values().sum();
        assert_eq!(total, summary.completed);
    }

    #[test]
    fn hitting_requires_killed_mode() {
        let config = SimConfig::new(model(1.0, 2), 10, 1).unkilled();
        assert!(run_hitting_experiment(&config).is_err());
    }

    #[test]
    fn unkilled_mode_sees_past_the_boundary() {
        let config = SimConfig::new(model(0.5, 2), 50_000, 29).unkilled();
        let summary = run_ensemble(&config).unwrap();
        assert!(summary.reach_freq.is_none());
        // At r = 0.5 excursions are short; depth 2 is reachable though the
        // killed model would have stopped there.
        assert!(summary.max_depth_hist.keys().any(|&d| d > 2));
        // Tail at 1 is the probability the first step goes right: 1/2.
        let t1 = summary.depth_tail_freq(1);
        assert!((t1 - 0.5).abs() < 0.01);
        assert_eq!(summary.truncation_count, 0);
        // Deeper tail against the analytic integral.
        let tail3 = crate::hitting::max_depth_tail(
            3,
            config.model,
            &crate::quadrature::QuadratureSpec::default(),
        )
        .unwrap();
        let freq = summary.depth_tail_freq(3);
        let sem = (freq * (1.0 - freq) / summary.n as f64).sqrt();
        assert!(
            (freq - tail3.value).abs() <= 3.0 * sem + tail3.error_bound,
            "tail(3): simulated {freq} vs analytic {}",
            tail3.value
        );
    }

    #[test]
    fn horizon_truncation_is_recorded_not_raised() {
        // r = 1 unkilled with a tiny horizon: transient excursions at
        // p > 1/2 must be cut and counted.
        let config = SimConfig::new(model(1.0, 2), 2000, 31)
            .unkilled()
            .with_horizon(50);
        let summary = run_ensemble(&config).unwrap();
        assert!(summary.truncation_count > 0);
        assert_eq!(summary.completed + summary.truncation_count, summary.n);
    }

    #[test]
    fn pgf_point_estimates_match_closed_forms() {
        // N = 2, r = 1, q = 1/2: A = 7/24, B = 1/12, composed 2/17.
        let config = SimConfig::new(model(1.0, 2), 200_000, 8);
        let est = estimate_pgf_point(0.5, &config).unwrap();
        assert!((est.failed.mean - 7.0 / 24.0).abs() <= est.failed.half_width());
        assert!((est.success.mean - 1.0 / 12.0).abs() <= est.success.half_width());
        assert!((est.composed.mean - 2.0 / 17.0).abs() <= est.composed.half_width());
        assert_eq!(est.truncation_count, 0);
    }

    #[test]
    fn rejects_degenerate_configs() {
        let mut config = SimConfig::new(model(1.0, 2), 0, 1);
        assert!(run_ensemble(&config).is_err());
        config.n_excursions = 10;
        config.horizon = 0;
        assert!(run_ensemble(&config).is_err());
        let config = SimConfig::new(model(1.0, 2), 10, 1);
        assert!(estimate_pgf_point(1.0, &config).is_err());
        assert!(estimate_pgf_point(0.0, &config).is_err());
    }
}

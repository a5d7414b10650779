//! Command-line surface for the excursion-statistics library.
//!
//! Subcommands fall into three groups: analytic quantities (closed forms
//! integrated over the environment), the simulator, and a comparison mode
//! that runs both and prints a PASS/FAIL verdict per quantity.
//!
//! Records go to stdout (CSV by default, JSON lines with `--format json`),
//! diagnostics and verdicts to stderr. Exit codes: 0 success, 1 comparison
//! failure, 2 usage error, 3 numerical non-convergence.

mod record;

use clap::{Args, Parser, Subcommand};

use exwalk::hitting::{
    expected_excursion_duration, expected_hitting_time, expected_max_depth, expected_visits,
    local_time_pmf, max_depth_tail, prob_reach, LocalTimePmf, MaxDepthEstimate,
};
use exwalk::pgf::{pgf_failed, pgf_success, pgf_tau_n};
use exwalk::simulate::{
    estimate_pgf_point, run_ensemble, run_hitting_experiment, SimConfig, SimSummary,
};
use exwalk::{Error, EstimateWithError, PgfQuery, QuadratureSpec, Result as WalkResult, WalkModel};
use record::{Emitter, Format, OutputRecord};

const EXIT_OK: i32 = 0;
const EXIT_COMPARE_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_NO_CONVERGENCE: i32 = 3;

#[derive(Parser)]
#[command(
    name = "exwalk",
    version,
    about = "Excursion statistics of a spatially decaying random walk with per-excursion parameter renewal"
)]
struct Cli {
    /// Output format for records on stdout.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ModelArgs {
    /// Spatial decay parameter, in (0, 1].
    #[arg(long)]
    r: f64,

    /// Absorbing upper boundary (>= 1).
    #[arg(long = "N")]
    n_boundary: u32,

    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
}

impl ModelArgs {
    fn model(&self) -> WalkResult<WalkModel> {
        WalkModel::new(self.r, self.n_boundary)
    }

    fn spec(&self) -> WalkResult<QuadratureSpec> {
        QuadratureSpec::new(self.rel_tol, 1e-14, 40)
    }
}

#[derive(Args)]
struct SimArgs {
    #[command(flatten)]
    model: ModelArgs,

    /// Number of excursions / hitting experiments.
    #[arg(long)]
    samples: u64,

    /// Seed of the deterministic substream generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Per-excursion step cap.
    #[arg(long, default_value_t = 1_000_000)]
    horizon: u64,

    /// Run without killing at the boundary (penetration-depth statistics).
    #[arg(long)]
    unkilled: bool,
}

impl SimArgs {
    fn config(&self) -> WalkResult<SimConfig> {
        let mut config = SimConfig::new(self.model.model()?, self.samples, self.seed)
            .with_horizon(self.horizon);
        if self.unkilled {
            config = config.unkilled();
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Probability that one excursion reaches the boundary N.
    ProbReach(ModelArgs),
    /// P(L = n): chance of exactly n failed excursions before the first hit.
    LocalTimePmf {
        #[command(flatten)]
        model: ModelArgs,
        /// Number of failed excursions.
        #[arg(long)]
        n: u64,
    },
    /// Expected duration of one excursion, killed at the boundary.
    ExpectedDuration(ModelArgs),
    /// Expected first hitting time of the boundary.
    ExpectedHittingTime(ModelArgs),
    /// E[q^duration, excursion fails].
    PgfFailed {
        #[command(flatten)]
        model: ModelArgs,
        /// Damping value in (0, 1].
        #[arg(long)]
        q: f64,
    },
    /// E[q^duration, excursion reaches the boundary].
    PgfSuccess {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: f64,
    },
    /// E[q^tau]: transform of the first hitting time of the boundary.
    PgfTauN {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: f64,
    },
    /// Expected time spent at interior state k during one excursion.
    Green {
        #[command(flatten)]
        model: ModelArgs,
        /// Interior state, 1 <= k <= N-1.
        #[arg(long)]
        k: u32,
    },
    /// P(M >= k): tail of the maximum penetration depth (independent of N).
    MaxDepthTail {
        /// Spatial decay parameter, in (0, 1].
        #[arg(long)]
        r: f64,
        /// Depth threshold (>= 1).
        #[arg(long)]
        k: u32,
        /// Relative quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
    /// E[M] via the tail sum; reports divergence at r = 1.
    ExpectedMax {
        /// Spatial decay parameter, in (0, 1].
        #[arg(long)]
        r: f64,
        /// Stop once a tail term falls below this threshold.
        #[arg(long, default_value_t = 1e-12)]
        trunc_eps: f64,
        /// Hard cap on the number of tail terms.
        #[arg(long, default_value_t = 200)]
        k_cap: u32,
        /// Relative quadrature tolerance.
        #[arg(long, default_value_t = 1e-10)]
        rel_tol: f64,
    },
    /// Run the Monte Carlo oracle and emit summary records.
    Simulate(SimArgs),
    /// Run analytic and Monte Carlo side by side with a verdict per quantity.
    Compare {
        #[command(flatten)]
        sim: SimArgs,
        /// Agreement threshold in standard errors.
        #[arg(long, default_value_t = 3.0)]
        sigma: f64,
        /// Also compare the generating functions at this damping value.
        #[arg(long)]
        q: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    let mut out = Emitter::new(cli.format);
    std::process::exit(dispatch(cli.command, &mut out));
}

fn usage_error(err: &Error) -> i32 {
    eprintln!("error: {err}");
    EXIT_USAGE
}

/// Emits the estimate, downgrading a quadrature-convergence failure to a
/// flagged best-effort record with exit code 3.
fn emit_estimate(
    out: &mut Emitter,
    proto: OutputRecord,
    result: WalkResult<EstimateWithError>,
) -> i32 {
    match result {
        Ok(est) => {
            out.emit(&OutputRecord {
                value: record::RecordValue::Real(est.value),
                error_bound: Some(est.error_bound),
                ..proto
            });
            EXIT_OK
        }
        Err(Error::QuadratureNoConvergence {
            value,
            error_bound,
            max_depth,
        }) => {
            out.emit(&OutputRecord {
                value: record::RecordValue::Real(value),
                error_bound: Some(error_bound),
                ..proto
            });
            eprintln!(
                "warning: quadrature hit depth {max_depth} before tolerance; record is best-effort"
            );
            EXIT_NO_CONVERGENCE
        }
        Err(err) => usage_error(&err),
    }
}

fn dispatch(command: Command, out: &mut Emitter) -> i32 {
    match command {
        Command::ProbReach(args) => match (args.model(), args.spec()) {
            (Ok(model), Ok(spec)) => emit_estimate(
                out,
                OutputRecord::analytic("prob_reach", 0.0, 0.0).with_model(args.r, args.n_boundary),
                prob_reach(model, &spec),
            ),
            (Err(e), _) | (_, Err(e)) => usage_error(&e),
        },
        Command::LocalTimePmf { model: args, n } => match (args.model(), args.spec()) {
            (Ok(model), Ok(spec)) => {
                let result = local_time_pmf(n, model, &spec)
                    .map(|pmf| EstimateWithError::quadrature(pmf, 0.0));
                emit_estimate(
                    out,
                    OutputRecord::analytic("local_time_pmf", 0.0, 0.0)
                        .with_model(args.r, args.n_boundary)
                        .with_n(n),
                    result,
                )
            }
            (Err(e), _) | (_, Err(e)) => usage_error(&e),
        },
        Command::ExpectedDuration(args) => match (args.model(), args.spec()) {
            (Ok(model), Ok(spec)) => emit_estimate(
                out,
                OutputRecord::analytic("E_D1", 0.0, 0.0).with_model(args.r, args.n_boundary),
                expected_excursion_duration(model, &spec),
            ),
            (Err(e), _) | (_, Err(e)) => usage_error(&e),
        },
        Command::ExpectedHittingTime(args) => match (args.model(), args.spec()) {
            (Ok(model), Ok(spec)) => emit_estimate(
                out,
                OutputRecord::analytic("E_tau_N", 0.0, 0.0).with_model(args.r, args.n_boundary),
                expected_hitting_time(model, &spec),
            ),
            (Err(e), _) | (_, Err(e)) => usage_error(&e),
        },
        Command::PgfFailed { model: args, q } => pgf_command(out, args, q, "pgf_failed", pgf_failed),
        Command::PgfSuccess { model: args, q } => {
            pgf_command(out, args, q, "pgf_success", pgf_success)
        }
        Command::PgfTauN { model: args, q } => pgf_command(out, args, q, "pgf_tau_N", pgf_tau_n),
        Command::Green { model: args, k } => match (args.model(), args.spec()) {
            (Ok(model), Ok(spec)) => emit_estimate(
                out,
                OutputRecord::analytic("green", 0.0, 0.0)
                    .with_model(args.r, args.n_boundary)
                    .with_k(k),
                expected_visits(k, model, &spec),
            ),
            (Err(e), _) | (_, Err(e)) => usage_error(&e),
        },
        Command::MaxDepthTail { r, k, rel_tol } => {
            let prepared = WalkModel::new(r, k.max(1))
                .and_then(|model| QuadratureSpec::new(rel_tol, 1e-14, 40).map(|s| (model, s)));
            match prepared {
                Ok((model, spec)) => emit_estimate(
                    out,
                    OutputRecord::analytic("max_depth_tail", 0.0, 0.0)
                        .with_r(r)
                        .with_k(k),
                    max_depth_tail(k, model, &spec),
                ),
                Err(e) => usage_error(&e),
            }
        }
        Command::ExpectedMax {
            r,
            trunc_eps,
            k_cap,
            rel_tol,
        } => {
            let prepared = WalkModel::new(r, 1)
                .and_then(|model| QuadratureSpec::new(rel_tol, 1e-14, 40).map(|s| (model, s)));
            match prepared {
                Ok((model, spec)) => {
                    match expected_max_depth(model, &spec, trunc_eps, k_cap) {
                        Ok(MaxDepthEstimate::Finite(est)) => emit_estimate(
                            out,
                            OutputRecord::analytic("E_max_depth", 0.0, 0.0).with_r(r),
                            Ok(est),
                        ),
                        Ok(MaxDepthEstimate::Divergent {
                            plateau,
                            terms_computed,
                        }) => {
                            out.emit(&OutputRecord::divergent("E_max_depth", plateau).with_r(r));
                            eprintln!(
                                "note: tail terms plateau near {plateau:.6} after {terms_computed} \
                                 terms; the expected maximum depth diverges"
                            );
                            EXIT_OK
                        }
                        Err(err) => emit_estimate(
                            out,
                            OutputRecord::analytic("E_max_depth", 0.0, 0.0).with_r(r),
                            Err(err),
                        ),
                    }
                }
                Err(e) => usage_error(&e),
            }
        }
        Command::Simulate(args) => match args.config() {
            Ok(config) => simulate_command(out, &args, &config),
            Err(e) => usage_error(&e),
        },
        Command::Compare { sim, sigma, q } => match sim.config() {
            Ok(config) => compare_command(out, &sim, &config, sigma, q),
            Err(e) => usage_error(&e),
        },
    }
}

fn pgf_command(
    out: &mut Emitter,
    args: ModelArgs,
    q: f64,
    quantity: &'static str,
    op: fn(PgfQuery, WalkModel, &QuadratureSpec) -> WalkResult<EstimateWithError>,
) -> i32 {
    let prepared = args
        .model()
        .and_then(|model| args.spec().map(|s| (model, s)))
        .and_then(|(model, spec)| PgfQuery::new(q).map(|query| (model, spec, query)));
    match prepared {
        Ok((model, spec, query)) => emit_estimate(
            out,
            OutputRecord::analytic(quantity, 0.0, 0.0)
                .with_model(args.r, args.n_boundary)
                .with_q(q),
            op(query, model, &spec),
        ),
        Err(e) => usage_error(&e),
    }
}

/// Records derived from one killed ensemble: reach frequency, mean
/// duration, per-state visits, and the depth tail up to min(5, N).
fn ensemble_records(args: &SimArgs, summary: &SimSummary) -> Vec<OutputRecord> {
    let (r, n_boundary) = (args.model.r, args.model.n_boundary);
    let tag = |rec: OutputRecord| rec.with_model(r, n_boundary).with_seed(args.seed);
    let mut records = Vec::new();

    if let Some(reach) = summary.reach_freq {
        records.push(tag(
            OutputRecord::monte_carlo("prob_reach", reach.mean, reach.half_width())
                .with_n(summary.n),
        ));
    }
    if let Some(duration) = summary.mean_duration {
        records.push(tag(OutputRecord::monte_carlo(
            "E_D1",
            duration.mean,
            duration.half_width(),
        )
        .with_n(summary.n)));
    }
    for (&k, est) in &summary.mean_visits {
        records.push(tag(
            OutputRecord::monte_carlo("green", est.mean, est.half_width())
                .with_k(k)
                .with_n(summary.n),
        ));
    }
    let depth_cap = if args.unkilled { 5 } else { n_boundary.min(5) };
    for k in 1..=depth_cap {
        let freq = summary.depth_tail_freq(k);
        let sem = (freq * (1.0 - freq) / summary.n as f64).sqrt();
        records.push(tag(
            OutputRecord::monte_carlo("max_depth_tail", freq, 3.0 * sem)
                .with_k(k)
                .with_n(summary.n),
        ));
    }
    records
}

/// Records derived from hitting experiments: mean hitting time and the
/// local-time histogram head.
fn hitting_records(args: &SimArgs, summary: &SimSummary) -> Vec<OutputRecord> {
    let (r, n_boundary) = (args.model.r, args.model.n_boundary);
    let tag = |rec: OutputRecord| rec.with_model(r, n_boundary).with_seed(args.seed);
    let mut records = Vec::new();

    if let Some(tau) = summary.mean_tau_n {
        records.push(tag(OutputRecord::monte_carlo(
            "E_tau_N",
            tau.mean,
            tau.half_width(),
        )
        .with_n(summary.completed)));
    }
    for n in 0..=5u64 {
        let count = summary.local_time_hist.get(&n).copied().unwrap_or(0);
        let freq = count as f64 / summary.completed.max(1) as f64;
        let sem = (freq * (1.0 - freq) / summary.completed.max(1) as f64).sqrt();
        records.push(tag(
            OutputRecord::monte_carlo("local_time_pmf", freq, 3.0 * sem).with_n(n),
        ));
    }
    records
}

fn truncation_record(args: &SimArgs, count: u64) -> OutputRecord {
    OutputRecord::monte_carlo("truncation_count", count as f64, 0.0)
        .with_model(args.model.r, args.model.n_boundary)
        .with_seed(args.seed)
}

fn simulate_command(out: &mut Emitter, args: &SimArgs, config: &SimConfig) -> i32 {
    let ensemble = match run_ensemble(config) {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let mut truncations = ensemble.truncation_count;
    for rec in ensemble_records(args, &ensemble) {
        out.emit(&rec);
    }

    if !args.unkilled {
        let hitting = match run_hitting_experiment(config) {
            Ok(s) => s,
            Err(e) => return usage_error(&e),
        };
        truncations += hitting.truncation_count;
        for rec in hitting_records(args, &hitting) {
            out.emit(&rec);
        }
    }

    if truncations > 0 {
        out.emit(&truncation_record(args, truncations));
        eprintln!(
            "warning: {truncations} excursions hit the {}-step horizon; affected statistics are biased",
            config.horizon
        );
    }
    EXIT_OK
}

struct Verdict {
    label: String,
    analytic: f64,
    mc: f64,
    allowed: f64,
    pass: bool,
}

fn judge(label: String, analytic: EstimateWithError, mc_mean: f64, sem: f64, sigma: f64) -> Verdict {
    let allowed = sigma * sem + analytic.error_bound;
    Verdict {
        pass: (analytic.value - mc_mean).abs() <= allowed,
        label,
        analytic: analytic.value,
        mc: mc_mean,
        allowed,
    }
}

fn compare_command(
    out: &mut Emitter,
    args: &SimArgs,
    config: &SimConfig,
    sigma: f64,
    q_flag: Option<f64>,
) -> i32 {
    if args.unkilled {
        eprintln!("error: compare runs the killed process; drop --unkilled");
        return EXIT_USAGE;
    }
    let model = match args.model.model() {
        Ok(m) => m,
        Err(e) => return usage_error(&e),
    };
    let spec = match args.model.spec() {
        Ok(s) => s,
        Err(e) => return usage_error(&e),
    };
    let (r, n_boundary) = (args.model.r, args.model.n_boundary);
    let tag = |rec: OutputRecord| rec.with_model(r, n_boundary);

    macro_rules! analytic {
        ($expr:expr) => {
            match $expr {
                Ok(v) => v,
                Err(Error::QuadratureNoConvergence { .. }) => {
                    eprintln!("error: quadrature did not converge during comparison");
                    return EXIT_NO_CONVERGENCE;
                }
                Err(e) => return usage_error(&e),
            }
        };
    }

    let ensemble = analytic!(run_ensemble(config));
    let hitting = analytic!(run_hitting_experiment(config));
    let mut verdicts: Vec<Verdict> = Vec::new();

    // Reach probability.
    let s = analytic!(prob_reach(model, &spec));
    let reach = ensemble.reach_freq.expect("killed ensemble");
    out.emit(&tag(OutputRecord::analytic("prob_reach", s.value, s.error_bound)));
    out.emit(&tag(
        OutputRecord::monte_carlo("prob_reach", reach.mean, reach.half_width())
            .with_n(ensemble.n)
            .with_seed(args.seed),
    ));
    verdicts.push(judge("prob_reach".into(), s, reach.mean, reach.sem, sigma));

    // Mean excursion duration.
    let d = analytic!(expected_excursion_duration(model, &spec));
    let dur = ensemble.mean_duration.expect("ensemble duration");
    out.emit(&tag(OutputRecord::analytic("E_D1", d.value, d.error_bound)));
    out.emit(&tag(
        OutputRecord::monte_carlo("E_D1", dur.mean, dur.half_width())
            .with_n(ensemble.n)
            .with_seed(args.seed),
    ));
    verdicts.push(judge("E_D1".into(), d, dur.mean, dur.sem, sigma));

    // Per-state expected visits.
    for k in 1..n_boundary {
        let v = analytic!(expected_visits(k, model, &spec));
        let mc = ensemble.mean_visits[&k];
        out.emit(&tag(
            OutputRecord::analytic("green", v.value, v.error_bound).with_k(k),
        ));
        out.emit(&tag(
            OutputRecord::monte_carlo("green", mc.mean, mc.half_width())
                .with_k(k)
                .with_n(ensemble.n)
                .with_seed(args.seed),
        ));
        verdicts.push(judge(format!("green k={k}"), v, mc.mean, mc.sem, sigma));
    }

    // Depth tail, measurable up to the boundary in killed mode.
    for k in 1..=n_boundary.min(5) {
        let tail = analytic!(max_depth_tail(k, model, &spec));
        let freq = ensemble.depth_tail_freq(k);
        let sem = (freq * (1.0 - freq) / ensemble.n as f64).sqrt();
        out.emit(&tag(
            OutputRecord::analytic("max_depth_tail", tail.value, tail.error_bound).with_k(k),
        ));
        out.emit(&tag(
            OutputRecord::monte_carlo("max_depth_tail", freq, 3.0 * sem)
                .with_k(k)
                .with_n(ensemble.n)
                .with_seed(args.seed),
        ));
        verdicts.push(judge(format!("max_depth_tail k={k}"), tail, freq, sem, sigma));
    }

    // Mean hitting time.
    let tau = analytic!(expected_hitting_time(model, &spec));
    let mc_tau = hitting.mean_tau_n.expect("hitting statistics");
    out.emit(&tag(OutputRecord::analytic("E_tau_N", tau.value, tau.error_bound)));
    out.emit(&tag(
        OutputRecord::monte_carlo("E_tau_N", mc_tau.mean, mc_tau.half_width())
            .with_n(hitting.completed)
            .with_seed(args.seed),
    ));
    verdicts.push(judge("E_tau_N".into(), tau, mc_tau.mean, mc_tau.sem, sigma));

    // Local-time law head.
    let law = analytic!(LocalTimePmf::new(model, &spec));
    for n in 0..=5u64 {
        let pmf = EstimateWithError::quadrature(law.pmf(n), 1e-10);
        let count = hitting.local_time_hist.get(&n).copied().unwrap_or(0);
        let freq = count as f64 / hitting.completed as f64;
        let sem = (freq * (1.0 - freq) / hitting.completed as f64).sqrt();
        out.emit(&tag(
            OutputRecord::analytic("local_time_pmf", pmf.value, pmf.error_bound).with_n(n),
        ));
        out.emit(&tag(
            OutputRecord::monte_carlo("local_time_pmf", freq, 3.0 * sem)
                .with_n(n)
                .with_seed(args.seed),
        ));
        verdicts.push(judge(format!("local_time_pmf n={n}"), pmf, freq, sem, sigma));
    }

    // Generating functions at a requested damping value.
    if let Some(qv) = q_flag {
        let query = match PgfQuery::new(qv) {
            Ok(v) => v,
            Err(e) => return usage_error(&e),
        };
        let point = analytic!(estimate_pgf_point(qv, config));
        for (quantity, a, mc) in [
            ("pgf_failed", analytic!(pgf_failed(query, model, &spec)), point.failed),
            ("pgf_success", analytic!(pgf_success(query, model, &spec)), point.success),
            ("pgf_tau_N", analytic!(pgf_tau_n(query, model, &spec)), point.composed),
        ] {
            out.emit(&tag(OutputRecord::analytic(quantity, a.value, a.error_bound).with_q(qv)));
            out.emit(&tag(
                OutputRecord::monte_carlo(quantity, mc.mean, mc.half_width())
                    .with_q(qv)
                    .with_n(config.n_excursions)
                    .with_seed(args.seed),
            ));
            verdicts.push(judge(format!("{quantity} q={qv}"), a, mc.mean, mc.sem, sigma));
        }
    }

    let truncations = ensemble.truncation_count + hitting.truncation_count;
    if truncations > 0 {
        out.emit(&truncation_record(args, truncations));
        eprintln!("warning: {truncations} horizon truncations during comparison");
    }

    let mut any_fail = false;
    for v in &verdicts {
        let status = if v.pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{status} {}: analytic {} vs monte-carlo {} (allowed {:e})",
            v.label, v.analytic, v.mc, v.allowed
        );
        any_fail |= !v.pass;
    }
    if any_fail {
        EXIT_COMPARE_FAIL
    } else {
        EXIT_OK
    }
}

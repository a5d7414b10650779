//! Adaptive Gauss–Kronrod quadrature on the open unit interval.
//!
//! Every environment average in this crate is an integral over `p` in
//! `(0, 1)` of a function that is analytic inside the interval but not
//! defined at the endpoints (the log-domain scale function needs
//! `0 < p < 1`). The 7/15-point Gauss–Kronrod pair has interior nodes only,
//! and bisection keeps them interior at every depth, so endpoint exclusion
//! is structural rather than special-cased.

use crate::error::{Error, Result};

/// Tolerances and subdivision limit for [`integrate_unit`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Target relative error.
    pub rel_tol: f64,
    /// Floor absolute error; takes over when the integral is near zero.
    pub abs_tol: f64,
    /// Adaptive bisection limit per panel.
    pub max_depth: u32,
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_depth: u32) -> Result<Self> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_depth,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return Err(Error::Domain {
                name: "rel_tol",
                value: self.rel_tol,
                range: "(0, inf)",
            });
        }
        if self.abs_tol.is_nan() || self.abs_tol <= 0.0 {
            return Err(Error::Domain {
                name: "abs_tol",
                value: self.abs_tol,
                range: "(0, inf)",
            });
        }
        if self.max_depth < 1 {
            return Err(Error::Domain {
                name: "max_depth",
                value: f64::from(self.max_depth),
                range: "[1, inf)",
            });
        }
        Ok(())
    }
}

impl Default for QuadratureSpec {
    /// Tight defaults: the integrands are cheap (`O(N)` per evaluation), so
    /// a 1e-10 relative target keeps downstream identity checks meaningful.
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 40,
        }
    }
}

/// How a numeric estimate was obtained, and what its error bound means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimateKind {
    /// `error_bound` is the summed nested-rule error estimate.
    Quadrature,
    /// `error_bound` is a 3-sigma normal-approximation half-width.
    MonteCarlo,
}

/// A numeric result carrying its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithError {
    pub value: f64,
    pub error_bound: f64,
    pub kind: EstimateKind,
}

impl EstimateWithError {
    pub fn quadrature(value: f64, error_bound: f64) -> Self {
        Self {
            value,
            error_bound,
            kind: EstimateKind::Quadrature,
        }
    }

    pub fn monte_carlo(value: f64, error_bound: f64) -> Self {
        Self {
            value,
            error_bound,
            kind: EstimateKind::MonteCarlo,
        }
    }
}

// 7/15-point Gauss-Kronrod pair (positive abscissae; last entry is the
// centre). Odd-indexed abscissae carry the embedded 7-point Gauss rule.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// QUADPACK's error model for the nested pair: the raw difference
/// `|K15 - G7|` overstates the Kronrod error for smooth integrands, so it is
/// rescaled against the deviation integral, with a roundoff floor.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err > scaled {
            scaled = min_err;
        }
    }
    scaled
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    depth: u32,
    value: f64,
    error: f64,
}

fn eval_panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, depth: u32) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let mut eval = |x: f64| -> Result<f64> {
        let value = f(x);
        if value.is_finite() {
            Ok(value)
        } else {
            Err(Error::NonFiniteIntegrand { node: x, value })
        }
    };

    let f_center = eval(center)?;
    let mut res_gauss = f_center * WG[3];
    let mut res_kronrod = f_center * WGK[7];
    let mut res_abs = res_kronrod.abs();
    let mut fv = [[0.0f64; 2]; 7];

    for j in 0..7 {
        let abscissa = half * XGK[j];
        let f1 = eval(center - abscissa)?;
        let f2 = eval(center + abscissa)?;
        fv[j] = [f1, f2];
        let fsum = f1 + f2;
        res_kronrod += WGK[j] * fsum;
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_gauss += WG[j / 2] * fsum;
        }
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j][0] - mean).abs() + (fv[j][1] - mean).abs());
    }

    let raw_err = (res_kronrod - res_gauss) * half;
    Ok(Panel {
        a,
        b,
        depth,
        value: res_kronrod * half,
        error: rescale_error(raw_err, res_abs * half, res_asc * half),
    })
}

/// Integrates `f` over `(0, 1)` adaptively until the summed error estimate
/// meets `max(abs_tol, rel_tol * |integral|)`.
///
/// Evaluation nodes are strictly interior to `(0, 1)` at every depth. The
/// worst panel (largest error estimate, leftmost on ties) is bisected until
/// the tolerance holds or its depth reaches `spec.max_depth`; the final sum
/// runs over panels sorted by position, so the result is independent of the
/// refinement bookkeeping. Deterministic for fixed `f` and `spec`.
///
/// Boundary-hit integrands can be many orders of magnitude below the
/// absolute floor and still matter (they end up in denominators), so when
/// the first pass converges on `abs_tol` while the integral itself is
/// smaller, a second pass reruns with the floor tightened to the
/// integral's own scale.
pub fn integrate_unit<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<EstimateWithError> {
    spec.validate()?;
    let first = run_adaptive(&mut f, spec.rel_tol, spec.abs_tol, spec.max_depth)?;
    let scale = first.value.abs();
    if scale > 0.0
        && first.error_bound > spec.rel_tol * scale
        && spec.abs_tol > spec.rel_tol * scale
    {
        // 1e-12 relative keeps the tightened target comfortably above the
        // rule's roundoff floor of ~50 eps.
        let tightened = scale * spec.rel_tol.max(1e-12);
        return run_adaptive(&mut f, spec.rel_tol, tightened, spec.max_depth);
    }
    Ok(first)
}

fn run_adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    rel_tol: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<EstimateWithError> {
    // Splitting the worst panel first keeps the panel count near the
    // minimum; this cap only guards against a pathological integrand.
    const MAX_PANELS: usize = 4096;

    let mut panels = vec![eval_panel(f, 0.0, 1.0, 0)?];
    loop {
        let total_value: f64 = panels.iter().map(|p| p.value).sum();
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        let tolerance = abs_tol.max(rel_tol * total_value.abs());
        if total_error <= tolerance {
            break;
        }

        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| {
                x.error
                    .partial_cmp(&y.error)
                    .unwrap()
                    .then(y.a.partial_cmp(&x.a).unwrap())
            })
            .map(|(i, _)| i)
            .expect("at least one panel");

        if panels[worst].depth >= max_depth || panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureNoConvergence {
                value: total_value,
                error_bound: total_error,
                max_depth,
            });
        }

        let Panel { a, b, depth, .. } = panels[worst];
        let mid = 0.5 * (a + b);
        let left = eval_panel(f, a, mid, depth + 1)?;
        let right = eval_panel(f, mid, b, depth + 1)?;
        panels[worst] = left;
        panels.push(right);
    }

    panels.sort_by(|x, y| x.a.partial_cmp(&y.a).unwrap());
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error_bound: f64 = panels.iter().map(|p| p.error).sum();
    Ok(EstimateWithError::quadrature(value, error_bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::cell::RefCell;

    #[test]
    fn constant_and_linear_are_exact() {
        let spec = QuadratureSpec::default();
        let one = integrate_unit(|_| 1.0, &spec).unwrap();
        assert_relative_eq!(one.value, 1.0, max_relative = 1e-15);
        assert!(one.error_bound < 1e-12);

        let linear = integrate_unit(|p| p, &spec).unwrap();
        assert_relative_eq!(linear.value, 0.5, max_relative = 1e-15);
    }

    #[test]
    fn monomials_integrate_to_machine_precision() {
        let spec = QuadratureSpec::default();
        for d in 0..=22u32 {
            let est = integrate_unit(|p| p.powi(d as i32), &spec).unwrap();
            let exact = 1.0 / f64::from(d + 1);
            assert_relative_eq!(est.value, exact, max_relative = 1e-14);
        }
    }

    #[test]
    fn quadratic_from_scale_composition() {
        // p / S(2;p) with r = 1 is p^2.
        use crate::model::{EnvParam, WalkModel};
        use crate::scale::log_scale_s;
        let model = WalkModel::new(1.0, 2).unwrap();
        let spec = QuadratureSpec::default();
        let est = integrate_unit(
            |p| {
                let env = EnvParam::new(p).expect("quadrature nodes are interior");
                (p.ln() - log_scale_s(2, env, model).unwrap()).exp()
            },
            &spec,
        )
        .unwrap();
        assert_relative_eq!(est.value, 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn nodes_stay_strictly_interior() {
        let nodes = RefCell::new(Vec::new());
        // A sharp off-centre peak forces deep refinement.
        let spec = QuadratureSpec::new(1e-12, 1e-14, 40).unwrap();
        let est = integrate_unit(
            |p| {
                nodes.borrow_mut().push(p);
                1.0 / ((p - 0.123456789).powi(2) + 1e-6)
            },
            &spec,
        )
        .unwrap();
        assert!(est.value > 0.0);
        let nodes = nodes.into_inner();
        assert!(nodes.len() > 100, "expected refinement, got {} nodes", nodes.len());
        assert!(nodes.iter().all(|&x| x > 0.0 && x < 1.0));
    }

    #[test]
    fn tighter_tolerance_never_hurts() {
        use crate::model::{EnvParam, WalkModel};
        use crate::scale::log_scale_s;
        for &(r, n) in &[(0.5, 2), (0.5, 5), (0.5, 10), (0.9, 5), (1.0, 2), (1.0, 10)] {
            let model = WalkModel::new(r, n).unwrap();
            let integrand = |p: f64| {
                let env = EnvParam::new(p).expect("quadrature nodes are interior");
                (p.ln() - log_scale_s(n, env, model).unwrap()).exp()
            };
            let reference = integrate_unit(integrand, &QuadratureSpec::new(1e-13, 1e-15, 40).unwrap())
                .unwrap()
                .value;
            let mut prev_err = f64::INFINITY;
            for &tol in &[1e-6, 1e-8, 1e-10] {
                let est =
                    integrate_unit(integrand, &QuadratureSpec::new(tol, 1e-15, 40).unwrap()).unwrap();
                let achieved = (est.value - reference).abs();
                assert!(
                    achieved <= prev_err + 1e-15,
                    "halving tolerance increased error at r={r}, n={n}: {achieved:e} > {prev_err:e}"
                );
                prev_err = achieved;
            }
        }
    }

    #[test]
    fn depth_exhaustion_reports_best_estimate() {
        let spec = QuadratureSpec::new(1e-14, 1e-16, 3).unwrap();
        // A kink at an irrational point defeats a depth-3 budget.
        let kink = 1.0 / std::f64::consts::E;
        let err = integrate_unit(|p| (p - kink).abs().sqrt(), &spec).unwrap_err();
        match err {
            Error::QuadratureNoConvergence {
                value,
                error_bound,
                max_depth,
            } => {
                assert_eq!(max_depth, 3);
                assert!(error_bound > 0.0);
                // Exact value is (2/3)(a^1.5 + (1-a)^1.5) with a = 1/e.
                let kink = 1.0 / std::f64::consts::E;
                let exact = (2.0 / 3.0) * (kink.powf(1.5) + (1.0 - kink).powf(1.5));
                assert!((value - exact).abs() < 0.01, "best estimate {value}");
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_reported_with_node() {
        let spec = QuadratureSpec::default();
        let err = integrate_unit(|p| if p > 0.9 { f64::NAN } else { p }, &spec).unwrap_err();
        match err {
            Error::NonFiniteIntegrand { node, value } => {
                assert!(node > 0.9);
                assert!(value.is_nan());
            }
            other => panic!("expected evaluation error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_spec() {
        assert!(QuadratureSpec::new(0.0, 1e-14, 40).is_err());
        assert!(QuadratureSpec::new(1e-10, 0.0, 40).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 0).is_err());
    }

    #[test]
    fn deterministic_across_calls() {
        let spec = QuadratureSpec::default();
        let f = |p: f64| (5.0 * p).sin() / (0.1 + p);
        let x = integrate_unit(f, &spec).unwrap();
        let y = integrate_unit(f, &spec).unwrap();
        assert_eq!(x.value.to_bits(), y.value.to_bits());
        assert_eq!(x.error_bound.to_bits(), y.error_bound.to_bits());
    }
}

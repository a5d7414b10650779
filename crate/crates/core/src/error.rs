//! Error type shared by the analytic modules.

/// Errors reported by the analytic operations.
///
/// Simulation never fails (horizon truncation is recorded in the outcome,
/// not raised), so only parameter validation and the numerical paths appear
/// here.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A real-valued parameter is outside its valid range.
    #[error("{name} = {value} outside valid range {range}")]
    Domain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// A state or depth index is outside its valid range.
    #[error("{name} = {value} outside valid range {lo}..={hi}")]
    IndexRange {
        name: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    /// The adaptive quadrature hit its subdivision limit before meeting the
    /// requested tolerance. Carries the best estimate obtained so far.
    #[error("quadrature did not converge within depth {max_depth} (best estimate {value} ± {error_bound:e})")]
    QuadratureNoConvergence {
        value: f64,
        error_bound: f64,
        max_depth: u32,
    },

    /// The integrand produced a non-finite value at an interior node.
    #[error("integrand returned {value} at node {node}")]
    NonFiniteIntegrand { node: f64, value: f64 },

    /// A tridiagonal pivot collapsed; the boundary-value system is too close
    /// to singular to solve.
    #[error("tridiagonal pivot {pivot:e} below threshold at row {row}")]
    IllConditioned { row: usize, pivot: f64 },

    /// A denominator is smaller than the error bound of the quantities that
    /// produced it, so the ratio cannot be resolved.
    #[error("denominator {denominator:e} not resolvable within combined error bound {bound:e}")]
    PrecisionLoss { denominator: f64, bound: f64 },

    /// Two independent evaluation routes disagree by more than ten times
    /// their combined error bounds.
    #[error("independent routes disagree: {a} vs {b} (allowed {bound:e})")]
    RouteMismatch { a: f64, b: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

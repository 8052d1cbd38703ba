use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// Every variant carries the `module::operation` that raised it so that
/// command-line diagnostics can point at the failing stage.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{op}: invalid argument: {msg}")]
    InvalidArgument { op: &'static str, msg: String },

    #[error("{op}: fields live on different grids (band limits {left} and {right})")]
    GridMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },

    #[error("{op}: metric is degenerate at node {node} (det = {det:e})")]
    SingularMetric {
        op: &'static str,
        node: usize,
        det: f64,
    },

    #[error("{op}: Gauss curvature is not positive (min K = {min_curvature:e} at node {node})")]
    NotConvex {
        op: &'static str,
        node: usize,
        min_curvature: f64,
    },

    #[error("{op}: mean curvature vector is not outward spacelike at node {node} (k - |tr p| = {value:e})")]
    NotSpacelike {
        op: &'static str,
        node: usize,
        value: f64,
    },

    #[error("{op}: negative square-root argument {value:e} ({what})")]
    NumericalDomain {
        op: &'static str,
        what: &'static str,
        value: f64,
    },

    #[error("{op}: evaluation at the singular point r = 0")]
    SingularPoint { op: &'static str },

    #[error("{op}: no convergence after {iterations} iterations (best residual {best_residual:e})")]
    NoConvergence {
        op: &'static str,
        iterations: usize,
        best_residual: f64,
    },
}

impl Error {
    pub(crate) fn invalid(op: &'static str, msg: impl Into<String>) -> Self {
        Error::InvalidArgument {
            op,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Square root that tolerates floating-point dust below zero.
///
/// Arguments in `[-1e-12, 0)` are clamped to zero; anything more negative is
/// reported as a numerical-domain error.
pub(crate) fn guarded_sqrt(x: f64, op: &'static str, what: &'static str) -> Result<f64> {
    const DUST: f64 = 1e-12;
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -DUST {
        Ok(0.0)
    } else {
        Err(Error::NumericalDomain { op, what, value: x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guarded_sqrt_clamps_dust_only() {
        assert_eq!(guarded_sqrt(4.0, "t", "x").unwrap(), 2.0);
        assert_eq!(guarded_sqrt(-5e-13, "t", "x").unwrap(), 0.0);
        assert!(matches!(
            guarded_sqrt(-1e-9, "t", "x"),
            Err(Error::NumericalDomain { .. })
        ));
        assert!(guarded_sqrt(f64::NAN, "t", "x").is_err());
    }
}

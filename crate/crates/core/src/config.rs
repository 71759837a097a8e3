//! Tolerances and run configuration.
//!
//! Exact-rational checks need no tolerance at all; every constant here guards
//! a floating-point surface. The suite graphs are tiny with integer spectra,
//! so the defaults are conservative against IEEE 754 double rounding only.

use serde::{Deserialize, Serialize};

/// Relative tolerance for comparing closed-form values against the dense
/// float oracle (projector norms, tridiagonal entries, transitions).
pub const ORACLE_MATCH_REL: f64 = 1e-8;

/// Residual bound for algebra relations the oracle's operators must satisfy
/// (idempotency, orthogonality, block-tridiagonal vanishing).
pub const OPERATOR_RESIDUAL: f64 = 1e-9;

/// Residual bound for decomposition completeness and invariance tests.
pub const DECOMPOSITION_RESIDUAL: f64 = 1e-9;

/// Tolerance for float identity checks over a spectrum (used only when a
/// spectrum or parameter is irrational and the exact path is unavailable).
pub const FLOAT_IDENTITY_REL: f64 = 1e-8;

/// Relative slack when the exact spectrum is compared with a dense
/// eigendecomposition of the adjacency matrix.
pub const EIGENVALUE_AGREEMENT: f64 = 1e-10;

/// Width to which irrational eigenvalues are isolated.
pub const ROOT_INTERVAL_WIDTH: f64 = 1e-12;

/// Snapping tolerance for classifying a float local eigenvalue against the
/// boundary values of its admissible range.
pub const ETA_CLASSIFY_TOL: f64 = 1e-10;

/// Grouping tolerance when clustering float eigenvalues of the same operator.
pub const EIGEN_GROUP_TOL: f64 = 1e-8;

/// Points sampled per admissible parameter regime in sign checks.
pub const SIGN_SAMPLES: usize = 20;

/// Offset, as an exact rational 1/10^6, applied to open interval endpoints
/// before sampling.
pub const ENDPOINT_OFFSET_DEN: i64 = 1_000_000;

/// Default seed for the decomposition's reproducible eigenbasis choice.
pub const DEFAULT_SEED: u64 = 42;

/// Bundle of the float tolerances, overridable from the CLI.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Tolerances {
    pub oracle_match_rel: f64,
    pub operator_residual: f64,
    pub decomposition_residual: f64,
    pub float_identity_rel: f64,
    pub eigenvalue_agreement: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle_match_rel: ORACLE_MATCH_REL,
            operator_residual: OPERATOR_RESIDUAL,
            decomposition_residual: DECOMPOSITION_RESIDUAL,
            float_identity_rel: FLOAT_IDENTITY_REL,
            eigenvalue_agreement: EIGENVALUE_AGREEMENT,
        }
    }
}

impl Tolerances {
    /// Scales every bound by the same factor; `--tol` maps onto this.
    pub fn scaled(factor: f64) -> Self {
        let base = Tolerances::default();
        Tolerances {
            oracle_match_rel: base.oracle_match_rel * factor,
            operator_residual: base.operator_residual * factor,
            decomposition_residual: base.decomposition_residual * factor,
            float_identity_rel: base.float_identity_rel * factor,
            eigenvalue_agreement: base.eigenvalue_agreement * factor,
        }
    }
}

/// Configuration for one oracle run at a fixed base vertex.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct OracleConfig {
    pub seed: u64,
    pub tol: Tolerances,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            seed: DEFAULT_SEED,
            tol: Tolerances::default(),
        }
    }
}

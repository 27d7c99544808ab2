//! Numerical thresholds shared across the crate.
//!
//! The constants are the library defaults. [`Tolerances`] bundles the ones a
//! caller may override (the CLI exposes them as `--tol-*` flags) and is echoed
//! into every verification report.

use serde::{Deserialize, Serialize};

/// Largest matrix dimension any operation accepts.
pub const MAX_DIM: usize = 1024;

/// Relative singular-value threshold deciding subspace ranks.
pub const RANK: f64 = 1e-10;

/// A principal-angle cosine at or above `1 - ANGLE` counts as intersection.
pub const ANGLE: f64 = 1e-8;

/// Eigenvalues closer than `CLUSTER * ||A||` are chained into one cluster.
pub const CLUSTER: f64 = 1e-7;

/// Subdiagonal entries below `DEFLATION * ||A||` are set to zero during QR.
pub const DEFLATION: f64 = 4.0 * f64::EPSILON;

/// Frames must satisfy `||F^H F - I|| <= ORTHONORMAL`.
pub const ORTHONORMAL: f64 = 1e-12;

/// Commutator threshold, relative to the product of norms.
pub const COMMUTE: f64 = 1e-10;

/// Cluster points closer than this to a region boundary are rejected.
pub const BOUNDARY: f64 = 1e-9;

/// Invariance residual `||(1 - P) T P|| <= INVARIANCE * ||T||`.
pub const INVARIANCE: f64 = 1e-8;

/// Atoms closer than this are merged.
pub const MERGE: f64 = 1e-9;

/// Basis condition number above which an idempotent is not materialized.
pub const MAX_IDEMPOTENT_COND: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank: f64,
    pub angle: f64,
    pub cluster: f64,
    pub boundary: f64,
    pub commute: f64,
    pub invariance: f64,
    /// Subspace equality in verification reports (projector distance).
    pub subspace: f64,
    /// Measure equality in verification reports (matching distance).
    pub measure: f64,
    /// Characterization identity gap.
    pub gap: f64,
    /// Idempotent products and relations, scaled by operator norms.
    pub idempotent: f64,
    /// Slack for the modified spectral radius inequalities.
    pub radius_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank: RANK,
            angle: ANGLE,
            cluster: CLUSTER,
            boundary: BOUNDARY,
            commute: COMMUTE,
            invariance: INVARIANCE,
            subspace: 1e-8,
            measure: 1e-8,
            gap: 1e-8,
            idempotent: 1e-8,
            radius_slack: 1e-12,
        }
    }
}

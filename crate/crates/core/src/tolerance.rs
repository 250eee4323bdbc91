use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by the pencil routines.
///
/// All values are relative; each routine documents the scale it multiplies
/// them by.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Rank / nonsingularity threshold on singular values.
    pub rank: f64,
    /// Eigenvalue clustering threshold for general (nonsymmetric) spectra.
    pub cluster: f64,
    /// Semidefiniteness threshold on the minimum eigenvalue.
    pub psd: f64,
    /// Off-diagonal residual allowed after a simultaneous diagonalization.
    pub diag: f64,
    /// Width of the ambiguity band above `rank`, as a multiplier.
    pub ambiguity_factor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::from_base(crate::linalg::EIG_TOL)
    }
}

impl Tolerances {
    /// Derives every threshold from one base tolerance.
    ///
    /// Eigenvalue clustering never drops below `1e-6`: a defective real
    /// eigenvalue of multiplicity two splits by roughly `sqrt(eps)` under
    /// rounding and must still land in one cluster.
    pub fn from_base(tol: f64) -> Self {
        Self {
            rank: tol,
            cluster: tol.max(1e-6),
            psd: tol,
            diag: (tol * 100.0).max(1e-7),
            ambiguity_factor: 1e3,
        }
    }
}

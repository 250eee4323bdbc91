//! Positive semidefinite intervals of symmetric pencils `A + μB` and a
//! solver for the generalized trust-region subproblem
//!
//! ```text
//! min  xᵀAx + 2aᵀx   s.t.  xᵀBx + 2bᵀx + c ≤ 0.
//! ```

pub mod error;
pub mod gtrs;
pub mod interval;
pub mod linalg;
pub mod oracle;
pub mod sdc;
pub mod tolerance;

mod serde_rows;

pub use error::{Error, Result};
pub use gtrs::{
    check_kkt, find_multiplier, kkt_at_mu, phi, solve, GtrsInstance, GtrsOutcome, KktCertificate,
    OutcomeTag, SolveOptions, SolvePath, UnboundedReason,
};
pub use interval::{
    format_real, interval_from_diagonal, nonsdc_candidates, pd_interval, psd_interval,
    IntervalKind, IntervalPath, IntervalReport, MuInterval, PdInterval, PdScope,
};
pub use linalg::{PsdVerdict, SymMatrix};
pub use sdc::{
    is_sdc, simultaneous_diagonalize, singular_pair_canonical, Diagonalization, Obstruction,
    SdcReport, SdcRoute, SdcVerdict, SingularPairForm,
};
pub use tolerance::Tolerances;

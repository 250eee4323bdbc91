//! Generalized trust-region subproblem
//!
//! ```text
//! min f(x) = xᵀAx + 2aᵀx   s.t.   g(x) = xᵀBx + 2bᵀx + c ≤ 0
//! ```
//!
//! `x` is a global minimizer iff some `μ ≥ 0` satisfies
//! `(A + μB)x = -(a + μb)`, `g(x) ≤ 0`, `μ g(x) = 0` and `A + μB ⪰ 0`. The
//! solver restricts `μ` to `I⪰(A, B) ∩ [0, ∞)` and then
//!
//! * on a single point, solves the linear system there and moves inside its
//!   solution set to reach `g = 0`;
//! * on an interval with a positive definite interior, bisects the strictly
//!   decreasing `φ(μ) = g(x(μ))`, falling back to the singular pencil at an
//!   endpoint;
//! * when `A` and `B` share null directions, drops them in diagonalizing
//!   coordinates and solves the reduced problem.

mod kkt;
mod multiplier;
mod reduce;
mod witness;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::{psd_interval, IntervalPath, MuInterval, PdScope};
use crate::linalg::{is_psd, solve_consistent_with, sym_eig, PsdVerdict, SymMatrix};
use crate::serde_rows;
use crate::tolerance::Tolerances;

pub use kkt::{check_kkt, kkt_at_mu, KktAtMu, KktCertificate};
pub use multiplier::{find_multiplier, phi, MultiplierLocation, MultiplierSearch, PhiSample};
pub use reduce::{reduce_instance, Lift, Reduction};
pub(crate) use witness::feasible_point;
pub use witness::{find_ray_witness, RaySample, RayWitness};

/// Data `(A, B, a, b, c)` of a GTRS.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtrsInstance {
    #[serde(rename = "A")]
    pub a_mat: SymMatrix,
    #[serde(rename = "B")]
    pub b_mat: SymMatrix,
    #[serde(with = "serde_rows::vector")]
    pub a: DVector<f64>,
    #[serde(with = "serde_rows::vector")]
    pub b: DVector<f64>,
    pub c: f64,
}

impl GtrsInstance {
    pub fn new(
        a_mat: SymMatrix,
        b_mat: SymMatrix,
        a: DVector<f64>,
        b: DVector<f64>,
        c: f64,
    ) -> Result<Self> {
        let inst = Self {
            a_mat,
            b_mat,
            a,
            b,
            c,
        };
        inst.validate()?;
        Ok(inst)
    }

    /// Checks dimensions and finiteness; needed after deserialization.
    pub fn validate(&self) -> Result<()> {
        let n = self.a_mat.dim();
        for found in [self.b_mat.dim(), self.a.len(), self.b.len()] {
            if found != n {
                return Err(Error::DimensionMismatch { expected: n, found });
            }
        }
        if !self.c.is_finite() || self.a.iter().chain(self.b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "instance has non-finite entries".into(),
            ));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.a_mat.dim()
    }

    pub fn f(&self, x: &DVector<f64>) -> f64 {
        self.a_mat.quad(x) + 2.0 * self.a.dot(x)
    }

    pub fn g(&self, x: &DVector<f64>) -> f64 {
        self.b_mat.quad(x) + 2.0 * self.b.dot(x) + self.c
    }

    /// `max(1, ‖A‖_F, ‖B‖_F, ‖a‖, ‖b‖, |c|)`.
    pub fn scale(&self) -> f64 {
        [
            1.0,
            self.a_mat.frobenius(),
            self.b_mat.frobenius(),
            self.a.norm(),
            self.b.norm(),
            self.c.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Scale of the constraint alone, `max(1, ‖B‖_F, ‖b‖, |c|)`.
    pub fn g_scale(&self) -> f64 {
        [1.0, self.b_mat.frobenius(), self.b.norm(), self.c.abs()]
            .into_iter()
            .fold(0.0, f64::max)
    }

    /// The instance in coordinates `x = P y`.
    pub fn transformed(&self, p: &DMatrix<f64>) -> GtrsInstance {
        GtrsInstance {
            a_mat: self.a_mat.congruence(p),
            b_mat: self.b_mat.congruence(p),
            a: p.transpose() * &self.a,
            b: p.transpose() * &self.b,
            c: self.c,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub tol: Tolerances,
    /// Bisection stops when the bracket is below `tol_mu (1 + |μ|)`.
    pub tol_mu: f64,
    /// `|φ(μ)| <= tol_g · g_scale` accepts a multiplier.
    pub tol_g: f64,
    pub max_iter: usize,
    /// Relative residual accepted by the linear solve at a fixed `μ`.
    pub solve_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: Tolerances::default(),
            tol_mu: 1e-10,
            tol_g: 1e-9,
            max_iter: 200,
            solve_tol: 1e-8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeTag {
    Optimal,
    Unbounded,
    Unattained,
    Infeasible,
}

impl std::fmt::Display for OutcomeTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OutcomeTag::Optimal => "optimal",
            OutcomeTag::Unbounded => "unbounded",
            OutcomeTag::Unattained => "unattained",
            OutcomeTag::Infeasible => "infeasible",
        })
    }
}

/// Why no multiplier bounds the problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnboundedReason {
    /// `I⪰(A, B) ∩ [0, ∞)` is empty.
    EmptyMultiplierSet,
    /// The stationarity system is inconsistent at every admissible `μ`.
    InconsistentStationarity,
    /// The feasible set is `{Bx = -b}` and `f` is unbounded on it.
    UnboundedOnFeasibleSet,
}

/// How the solver reached its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolvePath {
    Infeasible,
    /// `min g = 0`; minimized over `{Bx = -b}` directly.
    SlaterBoundary,
    EmptyMultiplierSet,
    /// `I⪰ ∩ [0, ∞)` is a single point.
    SingletonMultiplier,
    /// `μ = 0` with `g(x) ≤ 0`.
    ZeroMultiplier,
    /// Interior root of `φ` found by bisection.
    PdBisection,
    /// Endpoint multiplier; solved on the singular pencil.
    EndpointPencil,
    /// Common null directions of `A`, `B` dropped; reduced problem solved.
    SingularReduction,
    /// Common null directions pin `μ` to one value.
    PinnedMultiplier,
    /// `f` is linear and unconstrained along a common null direction.
    TailInconsistent,
}

impl std::fmt::Display for SolvePath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolvePath::Infeasible => "infeasible",
            SolvePath::SlaterBoundary => "slater_boundary",
            SolvePath::EmptyMultiplierSet => "empty_multiplier_set",
            SolvePath::SingletonMultiplier => "singleton_multiplier",
            SolvePath::ZeroMultiplier => "zero_multiplier",
            SolvePath::PdBisection => "pd_bisection",
            SolvePath::EndpointPencil => "endpoint_pencil",
            SolvePath::SingularReduction => "singular_reduction",
            SolvePath::PinnedMultiplier => "pinned_multiplier",
            SolvePath::TailInconsistent => "tail_inconsistent",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `I⪰(A, B)`.
    pub psd_interval: MuInterval,
    /// `I⪰(A, B) ∩ [0, ∞)`.
    pub multiplier_interval: MuInterval,
    pub interval_path: Option<IntervalPath>,
    pub path: SolvePath,
    /// Path taken on the reduced problem, when reduced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_path: Option<SolvePath>,
    pub iterations: usize,
    pub slater_violated: bool,
    /// `inf g`, `None` when `g` is unbounded below.
    pub min_g: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GtrsOutcome {
    pub tag: OutcomeTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<KktCertificate>,
    /// Optimal value `λ*`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unbounded_reason: Option<UnboundedReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<RayWitness>,
    pub diagnostics: Diagnostics,
}

impl GtrsOutcome {
    pub fn x(&self) -> Option<DVector<f64>> {
        self.certificate
            .as_ref()
            .map(|c| DVector::from_column_slice(&c.x))
    }

    pub fn mu(&self) -> Option<f64> {
        self.certificate.as_ref().map(|c| c.mu)
    }
}

/// `inf g` and a point attaining it (when bounded below).
///
/// `g` is bounded below iff `B ⪰ 0` and `b ∈ range(B)`, with minimum
/// `c - bᵀB⁺b` at `-B⁺b`.
fn constraint_minimum(
    inst: &GtrsInstance,
    opts: &SolveOptions,
) -> Result<Option<(f64, DVector<f64>)>> {
    if is_psd(&inst.b_mat, opts.tol.psd) == PsdVerdict::No {
        return Ok(None);
    }
    let sol = solve_consistent_with(&inst.b_mat, &(-&inst.b), opts.tol.rank, opts.solve_tol)?;
    if !sol.consistent {
        return Ok(None);
    }
    let x = sol.particular;
    Ok(Some((inst.g(&x), x)))
}

/// Solves the GTRS.
pub fn solve(inst: &GtrsInstance, opts: &SolveOptions) -> Result<GtrsOutcome> {
    inst.validate()?;
    let sg = inst.g_scale();
    let min_g = constraint_minimum(inst, opts)?;
    let psd = psd_interval(&inst.a_mat, &inst.b_mat, &opts.tol)?;
    let nonneg = psd
        .interval
        .intersect(&MuInterval::from_bounds(0.0, f64::INFINITY));
    let mut diag = Diagnostics {
        psd_interval: psd.interval,
        multiplier_interval: nonneg,
        interval_path: Some(psd.path),
        path: SolvePath::Infeasible,
        reduced_path: None,
        iterations: 0,
        slater_violated: false,
        min_g: min_g.as_ref().map(|m| m.0),
    };

    if let Some((gmin, xg)) = &min_g {
        if *gmin > opts.tol_g * sg {
            return Ok(outcome(OutcomeTag::Infeasible, diag));
        }
        if *gmin >= -opts.tol_g * sg {
            diag.slater_violated = true;
            diag.path = SolvePath::SlaterBoundary;
            return slater_boundary(inst, xg, opts, diag);
        }
    }

    if nonneg.is_empty() {
        diag.path = SolvePath::EmptyMultiplierSet;
        return Ok(unbounded(
            inst,
            UnboundedReason::EmptyMultiplierSet,
            None,
            opts,
            diag,
        ));
    }

    if nonneg.is_point() {
        diag.path = SolvePath::SingletonMultiplier;
        return at_fixed_mu(inst, nonneg.lower(), opts, diag, false);
    }

    if psd.pd_interval.is_full() {
        return pd_route(inst, &psd.pd_interval.closure, opts, diag);
    }

    // Wide interval whose interior is not PD: A and B share null directions.
    debug_assert!(psd.pd_interval.is_empty() || psd.pd_interval.scope == PdScope::Reduced);
    reduction_route(inst, opts, diag)
}

fn outcome(tag: OutcomeTag, diagnostics: Diagnostics) -> GtrsOutcome {
    GtrsOutcome {
        tag,
        certificate: None,
        objective: None,
        unbounded_reason: None,
        witness: None,
        diagnostics,
    }
}

fn optimal(
    inst: &GtrsInstance,
    x: &DVector<f64>,
    mu: f64,
    diagnostics: Diagnostics,
) -> GtrsOutcome {
    let cert = check_kkt(inst, x, mu);
    GtrsOutcome {
        tag: OutcomeTag::Optimal,
        objective: Some(cert.objective),
        certificate: Some(cert),
        unbounded_reason: None,
        witness: None,
        diagnostics,
    }
}

fn unbounded(
    inst: &GtrsInstance,
    reason: UnboundedReason,
    mu_hint: Option<f64>,
    opts: &SolveOptions,
    diagnostics: Diagnostics,
) -> GtrsOutcome {
    GtrsOutcome {
        tag: OutcomeTag::Unbounded,
        certificate: None,
        objective: None,
        unbounded_reason: Some(reason),
        witness: find_ray_witness(inst, mu_hint, opts),
        diagnostics,
    }
}

/// No KKT point at the only candidate multiplier: unbounded when a ray
/// proves it or the system was inconsistent, otherwise unattained.
fn no_kkt_point(
    inst: &GtrsInstance,
    mu: f64,
    inconsistent: bool,
    opts: &SolveOptions,
    diagnostics: Diagnostics,
) -> GtrsOutcome {
    let witness = find_ray_witness(inst, Some(mu), opts);
    if inconsistent || witness.is_some() {
        GtrsOutcome {
            tag: OutcomeTag::Unbounded,
            certificate: None,
            objective: None,
            unbounded_reason: Some(UnboundedReason::InconsistentStationarity),
            witness,
            diagnostics,
        }
    } else {
        outcome(OutcomeTag::Unattained, diagnostics)
    }
}

/// The multiplier is forced to `mu`; solve the stationarity system there.
fn at_fixed_mu(
    inst: &GtrsInstance,
    mu: f64,
    opts: &SolveOptions,
    diag: Diagnostics,
    bounded: bool,
) -> Result<GtrsOutcome> {
    match kkt_at_mu(inst, mu, opts)? {
        KktAtMu::Optimal(cert) => {
            let x = DVector::from_column_slice(&cert.x);
            Ok(optimal(inst, &x, cert.mu, diag))
        }
        KktAtMu::Unattained if bounded => Ok(outcome(OutcomeTag::Unattained, diag)),
        KktAtMu::Unattained => Ok(no_kkt_point(inst, mu, false, opts, diag)),
        KktAtMu::Inconsistent => Ok(no_kkt_point(inst, mu, true, opts, diag)),
    }
}

/// `I⪰ ∩ [0, ∞)` has more than one point and a PD interior.
fn pd_route(
    inst: &GtrsInstance,
    pd_closure: &MuInterval,
    opts: &SolveOptions,
    mut diag: Diagnostics,
) -> Result<GtrsOutcome> {
    let nonneg = diag.multiplier_interval;
    if nonneg.contains(0.0) {
        if pd_closure.lower() < 0.0 {
            let s = phi(inst, 0.0)?;
            if s.phi <= opts.tol_g * inst.g_scale() {
                diag.path = SolvePath::ZeroMultiplier;
                return Ok(optimal(
                    inst,
                    &DVector::from_column_slice(&s.x_mu),
                    0.0,
                    diag,
                ));
            }
        } else if let KktAtMu::Optimal(cert) = kkt_at_mu(inst, 0.0, opts)? {
            diag.path = SolvePath::ZeroMultiplier;
            let x = DVector::from_column_slice(&cert.x);
            return Ok(optimal(inst, &x, 0.0, diag));
        }
    }
    let search = find_multiplier(inst, &nonneg, opts.tol_mu, opts.tol_g, opts.max_iter)?;
    diag.iterations = search.iterations;
    match (search.location, search.x.as_ref()) {
        (MultiplierLocation::Interior, Some(x)) => {
            diag.path = SolvePath::PdBisection;
            let x = DVector::from_column_slice(x);
            Ok(optimal(inst, &x, search.mu, diag))
        }
        _ => {
            diag.path = SolvePath::EndpointPencil;
            // A PD interior means f + μg is bounded below, so f is bounded
            // on the feasible set.
            at_fixed_mu(inst, search.mu, opts, diag, true)
        }
    }
}

fn reduction_route(
    inst: &GtrsInstance,
    opts: &SolveOptions,
    mut diag: Diagnostics,
) -> Result<GtrsOutcome> {
    let d = crate::sdc::simultaneous_diagonalize(&inst.a_mat, &inst.b_mat, &opts.tol)?;
    match reduce_instance(inst, &d, opts)? {
        Reduction::Reduced { instance, lift } => {
            diag.path = SolvePath::SingularReduction;
            let inner = solve(&instance, opts)?;
            diag.reduced_path = Some(inner.diagnostics.path);
            diag.iterations = inner.diagnostics.iterations;
            match (inner.tag, inner.certificate.as_ref()) {
                (OutcomeTag::Optimal, Some(c)) => {
                    let x = lift.apply(&DVector::from_column_slice(&c.x));
                    Ok(optimal(inst, &x, c.mu, diag))
                }
                (OutcomeTag::Unbounded, _) => Ok(unbounded(
                    inst,
                    inner
                        .unbounded_reason
                        .unwrap_or(UnboundedReason::EmptyMultiplierSet),
                    None,
                    opts,
                    diag,
                )),
                (tag, _) => Ok(outcome(tag, diag)),
            }
        }
        Reduction::Pinned { mu } => {
            diag.path = SolvePath::PinnedMultiplier;
            if diag.multiplier_interval.contains(mu) {
                at_fixed_mu(inst, mu, opts, diag, false)
            } else {
                Ok(unbounded(
                    inst,
                    UnboundedReason::InconsistentStationarity,
                    None,
                    opts,
                    diag,
                ))
            }
        }
        Reduction::Inconsistent => {
            diag.path = SolvePath::TailInconsistent;
            Ok(unbounded(
                inst,
                UnboundedReason::InconsistentStationarity,
                None,
                opts,
                diag,
            ))
        }
    }
}

/// `min g = 0`: the feasible set is the affine set `{Bx = -b}`, on which `f`
/// is minimized directly. No multiplier need exist.
fn slater_boundary(
    inst: &GtrsInstance,
    xg: &DVector<f64>,
    opts: &SolveOptions,
    diag: Diagnostics,
) -> Result<GtrsOutcome> {
    let n = inst.dim();
    let eig = sym_eig(&inst.b_mat);
    let top = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let null: Vec<DVector<f64>> = (0..n)
        .filter(|&i| eig.values[i].abs() <= opts.tol.rank * top.max(f64::MIN_POSITIVE))
        .map(|i| eig.vectors.column(i).into_owned())
        .collect();
    if null.is_empty() {
        let mu = best_multiplier(inst, xg);
        return Ok(optimal(inst, xg, mu, diag));
    }
    let nb = DMatrix::from_columns(&null);
    let h = SymMatrix::symmetrized(nb.transpose() * inst.a_mat.as_matrix() * &nb);
    let lin = nb.transpose() * (inst.a_mat.as_matrix() * xg + &inst.a);
    if is_psd(&h, opts.tol.psd) == PsdVerdict::No {
        return Ok(unbounded(
            inst,
            UnboundedReason::UnboundedOnFeasibleSet,
            None,
            opts,
            diag,
        ));
    }
    let sol = solve_consistent_with(&h, &(-lin), opts.tol.rank, opts.solve_tol)?;
    if !sol.consistent {
        return Ok(unbounded(
            inst,
            UnboundedReason::UnboundedOnFeasibleSet,
            None,
            opts,
            diag,
        ));
    }
    let x = xg + nb * sol.particular;
    let mu = best_multiplier(inst, &x);
    Ok(optimal(inst, &x, mu, diag))
}

/// `μ ≥ 0` minimizing `‖(Ax + a) + μ(Bx + b)‖`.
fn best_multiplier(inst: &GtrsInstance, x: &DVector<f64>) -> f64 {
    let r = inst.a_mat.as_matrix() * x + &inst.a;
    let s = inst.b_mat.as_matrix() * x + &inst.b;
    let ss = s.norm_squared();
    if ss.sqrt() <= 1e-8 * inst.g_scale() {
        0.0
    } else {
        (-r.dot(&s) / ss).max(0.0)
    }
}

#[cfg(test)]
mod tests;

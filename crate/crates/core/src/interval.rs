//! The set `I⪰(A, B) = {μ : A + μB ⪰ 0}` and its positive definite interior.
//!
//! `λ_min(A + μB)` is concave in `μ`, so the set is always one interval
//! (possibly empty, a point, or unbounded). The computation dispatches on
//! structure:
//!
//! * degenerate pairs (`A = 0` or `B = 0`) are settled directly;
//! * SDC pairs are diagonalized and every coordinate contributes one linear
//!   constraint `α_i + μβ_i ≥ 0`;
//! * non-SDC pairs with one nonsingular member admit at most one PSD point,
//!   found among finitely many eigenvalue candidates;
//! * non-SDC pairs with both members singular go through the singular-pair
//!   form and the interval of the reduced pair `(A₁, B₁)`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_psd, real_spectrum, PsdVerdict, SymMatrix};
use crate::sdc::{
    is_sdc, regularity, singular_pair_canonical, EigenBlock, Obstruction, Regularity, SdcVerdict,
};
use crate::serde_rows;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Empty,
    Point,
    Closed,
    LeftRay,
    RightRay,
    AllReals,
}

/// A closed, convex subset of the real line.
///
/// `lo` is present for `point`, `closed` and `right_ray`; `hi` for `point`,
/// `closed` and `left_ray`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MuInterval {
    pub kind: IntervalKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<f64>,
}

impl MuInterval {
    pub fn empty() -> Self {
        Self {
            kind: IntervalKind::Empty,
            lo: None,
            hi: None,
        }
    }

    pub fn all_reals() -> Self {
        Self {
            kind: IntervalKind::AllReals,
            lo: None,
            hi: None,
        }
    }

    pub fn point(mu: f64) -> Self {
        Self::from_bounds(mu, mu)
    }

    /// Interval `[lo, hi]`, where either bound may be infinite.
    pub fn from_bounds(lo: f64, hi: f64) -> Self {
        // `+ 0.0` turns -0.0 into 0.0
        let (lo, hi) = (lo + 0.0, hi + 0.0);
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Self::empty();
        }
        let (kind, lo, hi) = match (lo.is_finite(), hi.is_finite()) {
            (false, false) => (IntervalKind::AllReals, None, None),
            (true, false) => (IntervalKind::RightRay, Some(lo), None),
            (false, true) => (IntervalKind::LeftRay, None, Some(hi)),
            (true, true) if lo == hi => (IntervalKind::Point, Some(lo), Some(hi)),
            (true, true) => (IntervalKind::Closed, Some(lo), Some(hi)),
        };
        Self { kind, lo, hi }
    }

    /// Lower bound, `-inf` when unbounded below and `+inf` when empty.
    pub fn lower(&self) -> f64 {
        match self.kind {
            IntervalKind::Empty => f64::INFINITY,
            _ => self.lo.unwrap_or(f64::NEG_INFINITY),
        }
    }

    /// Upper bound, `+inf` when unbounded above and `-inf` when empty.
    pub fn upper(&self) -> f64 {
        match self.kind {
            IntervalKind::Empty => f64::NEG_INFINITY,
            _ => self.hi.unwrap_or(f64::INFINITY),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.kind == IntervalKind::Empty
    }

    pub fn is_point(&self) -> bool {
        self.kind == IntervalKind::Point
    }

    /// More than one point.
    pub fn is_wide(&self) -> bool {
        !matches!(self.kind, IntervalKind::Empty | IntervalKind::Point)
    }

    pub fn contains(&self, mu: f64) -> bool {
        !self.is_empty() && self.lower() <= mu && mu <= self.upper()
    }

    pub fn intersect(&self, other: &MuInterval) -> MuInterval {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        Self::from_bounds(
            self.lower().max(other.lower()),
            self.upper().min(other.upper()),
        )
    }

    pub fn translate(&self, t: f64) -> MuInterval {
        if self.is_empty() {
            return *self;
        }
        Self::from_bounds(self.lower() + t, self.upper() + t)
    }

    /// Finite endpoints, lower first.
    pub fn finite_endpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = [self.lo, self.hi].into_iter().flatten().collect();
        out.dedup();
        out
    }

    /// A point in the interior: the midpoint when bounded, one unit inside a
    /// finite endpoint of a ray, `0` for the whole line.
    pub fn interior_point(&self) -> Option<f64> {
        match self.kind {
            IntervalKind::Empty | IntervalKind::Point => None,
            IntervalKind::Closed => Some(0.5 * (self.lower() + self.upper())),
            IntervalKind::RightRay => Some(self.lower() + 1.0),
            IntervalKind::LeftRay => Some(self.upper() - 1.0),
            IntervalKind::AllReals => Some(0.0),
        }
    }
}

/// Shortest round-trip decimal; scientific notation outside `[1e-4, 1e15)`;
/// `+inf`, `-inf`, `nan`.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "+inf" } else { "-inf" }.into()
    } else if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl fmt::Display for MuInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (lo, hi) = (format_real(self.lower()), format_real(self.upper()));
        match self.kind {
            IntervalKind::Empty => write!(f, "{{}} (empty)"),
            IntervalKind::Point => write!(f, "{{{lo}}}"),
            IntervalKind::Closed => write!(f, "[{lo}, {hi}]"),
            IntervalKind::RightRay => write!(f, "[{lo}, +inf)"),
            IntervalKind::LeftRay => write!(f, "(-inf, {hi}]"),
            IntervalKind::AllReals => write!(f, "(-inf, +inf)"),
        }
    }
}

/// Which pencil a PD interval refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdScope {
    /// `A + μB` itself.
    Full,
    /// The reduced pair `(A₁, B₁)`; the full pencil is singular for every `μ`.
    Reduced,
}

/// Open interval `{μ : A + μB ≻ 0}` stored through its closure.
///
/// Finite endpoints are excluded; `kind` is never `point`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdInterval {
    #[serde(flatten)]
    pub closure: MuInterval,
    pub scope: PdScope,
}

impl PdInterval {
    pub fn empty() -> Self {
        Self {
            closure: MuInterval::empty(),
            scope: PdScope::Full,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.closure.is_empty()
    }

    /// Nonempty and about the full pencil.
    pub fn is_full(&self) -> bool {
        !self.is_empty() && self.scope == PdScope::Full
    }

    pub fn contains(&self, mu: f64) -> bool {
        !self.is_empty() && self.closure.lower() < mu && mu < self.closure.upper()
    }
}

impl fmt::Display for PdInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.closure;
        let (lo, hi) = (format_real(c.lower()), format_real(c.upper()));
        match c.kind {
            IntervalKind::Empty | IntervalKind::Point => write!(f, "{{}} (empty)"),
            IntervalKind::Closed => write!(f, "({lo}, {hi})"),
            IntervalKind::RightRay => write!(f, "({lo}, +inf)"),
            IntervalKind::LeftRay => write!(f, "(-inf, {hi})"),
            IntervalKind::AllReals => write!(f, "(-inf, +inf)"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalPath {
    SdcNonsingular,
    SdcSingularReduced,
    NonsdcCandidates,
    Degenerate,
}

impl fmt::Display for IntervalPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalPath::SdcNonsingular => "sdc_nonsingular",
            IntervalPath::SdcSingularReduced => "sdc_singular_reduced",
            IntervalPath::NonsdcCandidates => "nonsdc_candidates",
            IntervalPath::Degenerate => "degenerate",
        })
    }
}

/// Extra facts about how an interval was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalNote {
    /// Both singular with a nonzero coupling block: the finite endpoints of
    /// the reduced interval were tested on the full pair.
    CoupledEndpointTest,
    /// As above, but the reduced interval was unbounded; only its finite
    /// endpoints can carry a PSD point.
    RayExtension,
    /// A negative entry of the `A₃` block rules out every `μ`.
    NegativeA3,
}

impl fmt::Display for IntervalNote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalNote::CoupledEndpointTest => "coupled_endpoint_test",
            IntervalNote::RayExtension => "ray_extension",
            IntervalNote::NegativeA3 => "negative_a3",
        })
    }
}

/// The reduced pair `(A₁, B₁)` of the singular-pair form, with `A₃`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedPair {
    #[serde(with = "serde_rows")]
    pub a1: DMatrix<f64>,
    pub b1: Vec<f64>,
    pub a3: Vec<f64>,
    pub coupling_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    /// `μ = 0` because `A ⪰ 0`.
    ZeroPsdA,
    /// `μ = -λ` for a real eigenvalue `λ` of `B⁻¹A`.
    NegEigBInvA,
    /// `μ = -1/λ` for a real nonzero eigenvalue `λ` of `A⁻¹B`.
    NegInvEigAInvB,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub mu: f64,
    pub source: CandidateSource,
    /// Outcome of the PSD test on `A + μB`, when performed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<PsdVerdict>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub interval: MuInterval,
    pub pd_interval: PdInterval,
    pub path: IntervalPath,
    pub sdc: Option<SdcVerdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<Obstruction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_classification: Option<Vec<EigenBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_pair: Option<ReducedPair>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<Candidate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<IntervalNote>,
}

impl IntervalReport {
    fn plain(interval: MuInterval, path: IntervalPath) -> Self {
        Self {
            interval,
            pd_interval: PdInterval::empty(),
            path,
            sdc: None,
            obstruction: None,
            block_classification: None,
            reduced_pair: None,
            candidates: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Intersection of the coordinate constraints `α_i + μβ_i ≥ 0`.
pub fn interval_from_diagonal(alpha: &[f64], beta: &[f64]) -> MuInterval {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (&a, &b) in alpha.iter().zip(beta) {
        if b > 0.0 {
            lo = lo.max(-a / b);
        } else if b < 0.0 {
            hi = hi.min(-a / b);
        } else if a < 0.0 {
            return MuInterval::empty();
        }
    }
    MuInterval::from_bounds(lo, hi)
}

fn check_dims(a: &SymMatrix, b: &SymMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

fn psd_at(a: &SymMatrix, b: &SymMatrix, mu: f64, tol: &Tolerances) -> Result<bool> {
    match is_psd(&a.pencil(b, mu), tol.psd) {
        PsdVerdict::Yes => Ok(true),
        PsdVerdict::No => Ok(false),
        PsdVerdict::Ambiguous => {
            let m = crate::linalg::min_eigenvalue(&a.pencil(b, mu));
            Err(Error::Ambiguous {
                what: "A + μB ⪰ 0 at a deciding candidate".into(),
                mu: Some(mu),
                margin: m,
            })
        }
    }
}

fn push_dedup(out: &mut Vec<Candidate>, mu: f64, source: CandidateSource) {
    let mu = mu + 0.0;
    if out
        .iter()
        .any(|c| (c.mu - mu).abs() <= 1e-8 * (1.0 + mu.abs()))
    {
        return;
    }
    out.push(Candidate {
        mu,
        source,
        verdict: None,
    });
}

/// Candidate multipliers for a non-SDC pair with a nonsingular member.
///
/// With `B` nonsingular: `0` if `A ⪰ 0`, and `-λ` for every real eigenvalue
/// `λ` of `B⁻¹A`. With `B` singular and `A` nonsingular: `0` if `A ⪰ 0`, and
/// `-1/λ` for every real nonzero eigenvalue of `A⁻¹B`. A non-SDC pair is PSD
/// at most at one of these.
pub fn nonsdc_candidates(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<Vec<Candidate>> {
    check_dims(a, b)?;
    let (pivot, other, inverted) = if regularity(b, tol, "B")? == Regularity::Nonsingular {
        (b, a, false)
    } else if regularity(a, tol, "A")? == Regularity::Nonsingular {
        (a, b, true)
    } else {
        return Err(Error::ContractViolation(
            "nonsdc_candidates needs A or B nonsingular".into(),
        ));
    };
    let mut out = Vec::new();
    if is_psd(a, tol.psd) != PsdVerdict::No {
        push_dedup(&mut out, 0.0, CandidateSource::ZeroPsdA);
    }
    let c = pivot
        .as_matrix()
        .clone()
        .full_piv_lu()
        .solve(other.as_matrix())
        .ok_or_else(|| Error::Numerical("pivot matrix is numerically singular".into()))?;
    let scale = c.norm().max(1.0);
    for e in real_spectrum(&c, tol.cluster)?.real_eigs {
        if inverted {
            if e.value.abs() > tol.cluster * scale {
                push_dedup(&mut out, -1.0 / e.value, CandidateSource::NegInvEigAInvB);
            }
        } else {
            push_dedup(&mut out, -e.value, CandidateSource::NegEigBInvA);
        }
    }
    Ok(out)
}

/// `I⪰(A, B)` with the path taken and supporting data.
pub fn psd_interval(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<IntervalReport> {
    check_dims(a, b)?;
    let scale = a.max_abs().max(b.max_abs());
    if scale == 0.0 {
        let mut r = IntervalReport::plain(MuInterval::all_reals(), IntervalPath::Degenerate);
        r.pd_interval = PdInterval::empty();
        return Ok(r);
    }
    // The interval is invariant under joint positive scaling.
    let an = a.scaled(1.0 / scale);
    let bn = b.scaled(1.0 / scale);
    let mut report = dispatch(&an, &bn, tol)?;
    if let Some(rp) = report.reduced_pair.as_mut() {
        rp.a1 *= scale;
        rp.b1.iter_mut().for_each(|v| *v *= scale);
        rp.a3.iter_mut().for_each(|v| *v *= scale);
        rp.coupling_norm *= scale;
    }
    Ok(report)
}

/// Open interior of `I⪰(A, B)`; see [`PdInterval`] for the scope convention.
pub fn pd_interval(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<PdInterval> {
    Ok(psd_interval(a, b, tol)?.pd_interval)
}

fn degenerate(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<Option<IntervalReport>> {
    let n = a.dim();
    if b.max_abs() == 0.0 {
        let interval = if psd_at(a, b, 0.0, tol)? {
            MuInterval::all_reals()
        } else {
            MuInterval::empty()
        };
        let mut r = IntervalReport::plain(interval, IntervalPath::Degenerate);
        if !interval.is_empty() && regularity(a, tol, "A")? == Regularity::Nonsingular {
            r.pd_interval = PdInterval {
                closure: MuInterval::all_reals(),
                scope: PdScope::Full,
            };
        }
        return Ok(Some(r));
    }
    if a.max_abs() == 0.0 {
        let psd = psd_at(&SymMatrix::zeros(n), b, 1.0, tol)?;
        let nsd = psd_at(&SymMatrix::zeros(n), b, -1.0, tol)?;
        let interval = match (psd, nsd) {
            (true, _) => MuInterval::from_bounds(0.0, f64::INFINITY),
            (false, true) => MuInterval::from_bounds(f64::NEG_INFINITY, 0.0),
            (false, false) => MuInterval::point(0.0),
        };
        let mut r = IntervalReport::plain(interval, IntervalPath::Degenerate);
        if interval.is_wide() && regularity(b, tol, "B")? == Regularity::Nonsingular {
            r.pd_interval = PdInterval {
                closure: interval,
                scope: PdScope::Full,
            };
        }
        return Ok(Some(r));
    }
    Ok(None)
}

fn dispatch(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<IntervalReport> {
    if let Some(r) = degenerate(a, b, tol)? {
        return Ok(r);
    }
    let sdc = is_sdc(a, b, tol)?;
    let b_regular = regularity(b, tol, "B")? == Regularity::Nonsingular;

    if let Some(diag) = sdc.diagonalization.as_ref() {
        let interval = interval_from_diagonal(&diag.alpha, &diag.beta);
        let has_tail = diag
            .alpha
            .iter()
            .zip(&diag.beta)
            .any(|(&x, &y)| x == 0.0 && y == 0.0);
        let mut r = IntervalReport::plain(
            interval,
            if b_regular {
                IntervalPath::SdcNonsingular
            } else {
                IntervalPath::SdcSingularReduced
            },
        );
        r.sdc = Some(SdcVerdict::Sdc);
        if interval.is_wide() {
            r.pd_interval = PdInterval {
                closure: interval,
                scope: if has_tail {
                    PdScope::Reduced
                } else {
                    PdScope::Full
                },
            };
        }
        if b_regular {
            r.block_classification = Some(sdc.blocks.clone());
        } else {
            let form = singular_pair_canonical(a, b, tol)?;
            if let Some((a1, b1)) = form.reduced_pair() {
                let inner = is_sdc(&a1, &b1, tol)?;
                if inner.is_sdc() {
                    r.block_classification = Some(inner.blocks);
                }
            }
            if form.a3.iter().any(|&v| v < 0.0) {
                r.notes.push(IntervalNote::NegativeA3);
            }
            r.reduced_pair = Some(reduced_pair_of(&form));
        }
        return Ok(r);
    }

    let obstruction = sdc.obstruction.clone();
    let a_regular = !b_regular && regularity(a, tol, "A")? == Regularity::Nonsingular;
    if b_regular || a_regular {
        let mut cands = nonsdc_candidates(a, b, tol)?;
        let mut passing = Vec::new();
        for c in cands.iter_mut() {
            let ok = psd_at(a, b, c.mu, tol)?;
            c.verdict = Some(if ok { PsdVerdict::Yes } else { PsdVerdict::No });
            if ok {
                passing.push(c.mu);
            }
        }
        let interval = single_point(&passing, a, b)?;
        let mut r = IntervalReport::plain(interval, IntervalPath::NonsdcCandidates);
        r.sdc = Some(SdcVerdict::NotSdc);
        r.obstruction = obstruction;
        r.candidates = cands;
        return Ok(r);
    }

    // Both singular and not SDC.
    let form = singular_pair_canonical(a, b, tol)?;
    let mut r = IntervalReport::plain(MuInterval::empty(), IntervalPath::SdcSingularReduced);
    r.sdc = Some(SdcVerdict::NotSdc);
    r.obstruction = obstruction;
    r.reduced_pair = Some(reduced_pair_of(&form));
    if form.a3.iter().any(|&v| v < 0.0) {
        r.notes.push(IntervalNote::NegativeA3);
        return Ok(r);
    }
    let Some((a1, b1)) = form.reduced_pair() else {
        // p = 0 means B = 0, settled as degenerate above.
        return Err(Error::Numerical(
            "singular-pair form with an empty B₁ block".into(),
        ));
    };
    let inner = dispatch(&a1, &b1, tol)?;
    let coupled = form.a2_norm() > tol.rank * form_scale(a);
    if !coupled {
        // (A₁, B₁) itself is not SDC; its interval is the answer.
        r.interval = inner.interval;
        r.candidates = inner.candidates;
        return Ok(r);
    }
    r.notes.push(IntervalNote::CoupledEndpointTest);
    if !matches!(
        inner.interval.kind,
        IntervalKind::Closed | IntervalKind::Point | IntervalKind::Empty
    ) {
        r.notes.push(IntervalNote::RayExtension);
    }
    let mut passing = Vec::new();
    for mu in inner.interval.finite_endpoints() {
        let ok = psd_at(a, b, mu, tol)?;
        r.candidates.push(Candidate {
            mu,
            source: CandidateSource::NegEigBInvA,
            verdict: Some(if ok { PsdVerdict::Yes } else { PsdVerdict::No }),
        });
        if ok {
            passing.push(mu);
        }
    }
    r.interval = single_point(&passing, a, b)?;
    Ok(r)
}

fn form_scale(a: &SymMatrix) -> f64 {
    a.max_abs().max(f64::MIN_POSITIVE)
}

fn reduced_pair_of(form: &crate::sdc::SingularPairForm) -> ReducedPair {
    ReducedPair {
        a1: form.a1.clone(),
        b1: form.b1.clone(),
        a3: form.a3.clone(),
        coupling_norm: form.a2_norm(),
    }
}

/// A non-SDC pair is PSD at one point at most; more than one passing
/// candidate means the tolerances cannot separate them.
fn single_point(passing: &[f64], a: &SymMatrix, b: &SymMatrix) -> Result<MuInterval> {
    match passing {
        [] => Ok(MuInterval::empty()),
        [mu] => Ok(MuInterval::point(*mu)),
        [first, .., last] => {
            let gap = last - first;
            let mid = 0.5 * (first + last);
            Err(Error::Ambiguous {
                what: format!(
                    "{} separated PSD candidates for a non-SDC pair",
                    passing.len()
                ),
                mu: Some(mid),
                margin: crate::linalg::min_eigenvalue(&a.pencil(b, mid)).min(gap),
            })
        }
    }
}

//! Brute-force references for testing: a `μ`-grid scan of `λ_min(A + μB)`,
//! planted GTRS instances with known solutions, random pairs with known
//! structure, and feasible-point sampling.
//!
//! All randomness comes from ChaCha8 seeded with `seed_from_u64`; parallel
//! work uses one stream per task index, so results do not depend on thread
//! scheduling.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gtrs::GtrsInstance;
use crate::interval::MuInterval;
use crate::linalg::{min_eigenvalue, psd_verdict, sym_eig, PsdVerdict, SymMatrix};

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub mu: f64,
    pub lambda_min: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub grid: Vec<ScanPoint>,
    /// Hull of the grid points where `A + μB ⪰ 0` (within tolerance).
    pub empirical_interval: MuInterval,
    pub resolution: f64,
    /// The PSD run reaches the first / last grid point, so the true set may
    /// extend beyond the scanned range.
    pub touches_lo: bool,
    pub touches_hi: bool,
}

impl ScanReport {
    /// `λ_min` at a grid point counts as PSD when at least `-tol · scale`.
    pub fn is_psd_at(&self, k: usize, tol: f64, scale: f64) -> bool {
        psd_verdict(self.grid[k].lambda_min, tol, scale) == PsdVerdict::Yes
    }
}

/// `λ_min(A + μB)` on `steps` equispaced points of `[lo, hi]`.
pub fn scan_interval(
    a: &SymMatrix,
    b: &SymMatrix,
    lo: f64,
    hi: f64,
    steps: usize,
    tol: f64,
) -> Result<ScanReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    if !(lo < hi) || steps < 2 {
        return Err(Error::InvalidInput(
            "scan needs lo < hi and steps >= 2".into(),
        ));
    }
    let h = (hi - lo) / (steps - 1) as f64;
    let grid: Vec<ScanPoint> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let mu = if k + 1 == steps {
                hi
            } else {
                lo + h * k as f64
            };
            ScanPoint {
                mu,
                lambda_min: min_eigenvalue(&a.pencil(b, mu)),
            }
        })
        .collect();
    let scale = scan_scale(a, b, lo, hi);
    let psd: Vec<usize> = (0..steps)
        .filter(|&k| psd_verdict(grid[k].lambda_min, tol, scale) == PsdVerdict::Yes)
        .collect();
    let empirical_interval = match (psd.first(), psd.last()) {
        (Some(&f), Some(&l)) => MuInterval::from_bounds(grid[f].mu, grid[l].mu),
        _ => MuInterval::empty(),
    };
    Ok(ScanReport {
        touches_lo: psd.first() == Some(&0),
        touches_hi: psd.last() == Some(&(steps - 1)),
        grid,
        empirical_interval,
        resolution: h,
    })
}

/// `max(1, ‖A‖_max + max(|lo|, |hi|) ‖B‖_max)`: the magnitude of the
/// scanned pencil.
pub fn scan_scale(a: &SymMatrix, b: &SymMatrix, lo: f64, hi: f64) -> f64 {
    (a.max_abs() + lo.abs().max(hi.abs()) * b.max_abs()).max(1.0)
}

/// Well-conditioned random congruence: orthogonal times `diag(U(0.5, 2))`.
pub fn random_frame(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    let s = DMatrix::from_diagonal(&DVector::from_fn(n, |_, _| rng.gen_range(0.5..2.0)));
    q * s
}

fn in_frame(m: &DMatrix<f64>, q: &DMatrix<f64>) -> SymMatrix {
    SymMatrix::symmetrized(q.transpose() * m * q)
}

fn signed(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    let v = rng.gen_range(lo..hi);
    if rng.gen_bool(0.5) {
        v
    } else {
        -v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairConstruction {
    /// Diagonal pair, `B` nonsingular, in a random frame.
    SdcNonsingularB,
    /// Diagonal pair, `B` singular, `A` nonsingular.
    SdcSingularB,
    /// Diagonal pair with both singular, including common null coordinates.
    SdcBothSingular,
    /// Nilpotent 2×2 block shifted to a PSD point, plus diagonal padding.
    NonsdcNilpotent,
    /// Rotation-spectrum 2×2 block plus diagonal padding.
    NonsdcRotation,
    /// Shifted nilpotent block with `B` singular and `A` nonsingular.
    NonsdcAInverseB,
    /// Two PSD matrices `QᵢᵀDᵢQᵢ`, `Dᵢ ≥ 0`, in independent frames.
    PsdGram,
    /// Both singular with a nonzero coupling block.
    CoupledSingular,
    /// `A = 0` or `B = 0`.
    Degenerate,
}

impl PairConstruction {
    pub const ALL: [PairConstruction; 9] = [
        PairConstruction::SdcNonsingularB,
        PairConstruction::SdcSingularB,
        PairConstruction::SdcBothSingular,
        PairConstruction::NonsdcNilpotent,
        PairConstruction::NonsdcRotation,
        PairConstruction::NonsdcAInverseB,
        PairConstruction::PsdGram,
        PairConstruction::CoupledSingular,
        PairConstruction::Degenerate,
    ];

    pub fn is_sdc_by_construction(self) -> Option<bool> {
        match self {
            PairConstruction::SdcNonsingularB
            | PairConstruction::SdcSingularB
            | PairConstruction::SdcBothSingular
            | PairConstruction::PsdGram
            | PairConstruction::Degenerate => Some(true),
            PairConstruction::NonsdcNilpotent
            | PairConstruction::NonsdcRotation
            | PairConstruction::NonsdcAInverseB
            | PairConstruction::CoupledSingular => Some(false),
        }
    }

    fn min_dim(self) -> usize {
        match self {
            PairConstruction::SdcNonsingularB | PairConstruction::Degenerate => 1,
            PairConstruction::SdcSingularB
            | PairConstruction::SdcBothSingular
            | PairConstruction::NonsdcNilpotent
            | PairConstruction::NonsdcRotation
            | PairConstruction::PsdGram => 2,
            PairConstruction::NonsdcAInverseB | PairConstruction::CoupledSingular => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomPair {
    pub a: SymMatrix,
    pub b: SymMatrix,
    pub construction: PairConstruction,
    /// Condition number of the congruence frame.
    pub frame_cond: f64,
}

/// Diagonal entries `(α, β)` with `β ≠ 0` whose constraints meet in
/// `[l, h]` (possibly a ray, a point or empty).
fn head_coordinates(rng: &mut impl Rng, k: usize) -> (Vec<f64>, Vec<f64>) {
    let l = rng.gen_range(-6.0..6.0);
    let h = match rng.gen_range(0..6) {
        0 => l,                           // point
        1 => l - rng.gen_range(0.1..2.0), // empty
        _ => l + rng.gen_range(0.2..6.0),
    };
    let all_pos = rng.gen_bool(0.25);
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    for i in 0..k {
        let mag = rng.gen_range(0.5..2.0);
        let pos = if all_pos {
            true
        } else if i < 2 {
            i == 0
        } else {
            rng.gen_bool(0.5)
        };
        // tight for the first coordinate of each sign, slack otherwise
        let slack = if i < 2 { 0.0 } else { rng.gen_range(0.0..3.0) };
        if pos {
            beta.push(mag);
            alpha.push(-(l - slack) * mag);
        } else {
            beta.push(-mag);
            alpha.push(-(h + slack) * mag);
        }
    }
    (alpha, beta)
}

fn finish_pair(
    rng: &mut impl Rng,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    construction: PairConstruction,
) -> RandomPair {
    let n = a.nrows();
    // random coordinate order, then a random frame
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let p = DMatrix::from_fn(n, n, |i, j| if perm[j] == i { 1.0 } else { 0.0 });
    let q = &p * random_frame(rng, n);
    let sv = q.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min();
    RandomPair {
        a: in_frame(&a, &q),
        b: in_frame(&b, &q),
        construction,
        frame_cond: cond,
    }
}

fn pad_diagonal(m: &mut DMatrix<f64>, from: usize, values: &[f64]) {
    for (k, v) in values.iter().enumerate() {
        m[(from + k, from + k)] = *v;
    }
}

/// One random pair of the given construction, dimension at least `n`
/// (raised to the construction's minimum).
pub fn random_pair(rng: &mut impl Rng, n: usize, construction: PairConstruction) -> RandomPair {
    let n = n.max(construction.min_dim());
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    match construction {
        PairConstruction::SdcNonsingularB => {
            let (al, be) = head_coordinates(rng, n);
            pad_diagonal(&mut a, 0, &al);
            pad_diagonal(&mut b, 0, &be);
        }
        PairConstruction::SdcSingularB => {
            let mid = rng.gen_range(1..n.max(2)).min(n - 1).max(1);
            let (al, be) = head_coordinates(rng, n - mid);
            pad_diagonal(&mut a, 0, &al);
            pad_diagonal(&mut b, 0, &be);
            let neg = rng.gen_bool(0.2);
            let mids: Vec<f64> = (0..mid)
                .map(|i| {
                    let v = rng.gen_range(0.5..2.0);
                    if neg && i == 0 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            pad_diagonal(&mut a, n - mid, &mids);
            // A must stay nonsingular: replace zero head entries
            for i in 0..n - mid {
                if a[(i, i)].abs() < 1e-3 {
                    a[(i, i)] = 0.5 * b[(i, i)];
                }
            }
        }
        PairConstruction::SdcBothSingular => {
            let tail = 1 + rng.gen_range(0..(n / 2).max(1)).min(n - 1);
            let head = n - tail;
            let mid = if head > 1 { rng.gen_range(0..head) } else { 0 };
            let (al, be) = head_coordinates(rng, head - mid);
            pad_diagonal(&mut a, 0, &al);
            pad_diagonal(&mut b, 0, &be);
            let neg = rng.gen_bool(0.2);
            let mids: Vec<f64> = (0..mid)
                .map(|i| {
                    let v = rng.gen_range(0.5..2.0);
                    if neg && i == 0 {
                        -v
                    } else {
                        v
                    }
                })
                .collect();
            pad_diagonal(&mut a, head - mid, &mids);
            if head == 0 {
                b[(0, 0)] = 1.0;
            }
        }
        PairConstruction::NonsdcNilpotent => {
            let mu0 = rng.gen_range(-5.0..5.0);
            a[(0, 1)] = -mu0;
            a[(1, 0)] = -mu0;
            a[(1, 1)] = 1.0;
            b[(0, 1)] = 1.0;
            b[(1, 0)] = 1.0;
            let empty = rng.gen_bool(0.25);
            for i in 2..n {
                let be = signed(rng, 0.5, 2.0);
                let d = if empty && i == 2 {
                    -rng.gen_range(0.1..1.0)
                } else {
                    rng.gen_range(0.1..2.0)
                };
                b[(i, i)] = be;
                a[(i, i)] = d - mu0 * be;
            }
        }
        PairConstruction::NonsdcRotation => {
            a[(0, 0)] = 1.0;
            a[(1, 1)] = -1.0;
            b[(0, 1)] = 1.0;
            b[(1, 0)] = 1.0;
            for i in 2..n {
                b[(i, i)] = signed(rng, 0.5, 2.0);
                a[(i, i)] = signed(rng, 0.5, 2.0);
            }
        }
        PairConstruction::NonsdcAInverseB => {
            let mu0 = signed(rng, 0.5, 5.0);
            a[(0, 1)] = -mu0;
            a[(1, 0)] = -mu0;
            a[(1, 1)] = 1.0;
            b[(0, 1)] = 1.0;
            b[(1, 0)] = 1.0;
            // β = 0 coordinate; its sign decides point or empty
            a[(2, 2)] = if rng.gen_bool(0.75) { 1.0 } else { -1.0 } * rng.gen_range(0.5..2.0);
            for i in 3..n {
                let be = signed(rng, 0.5, 2.0);
                b[(i, i)] = be;
                a[(i, i)] = rng.gen_range(0.1..2.0) - mu0 * be;
            }
        }
        PairConstruction::PsdGram => {
            // independent frames, so the pair shares no obvious structure
            let mut psd = || {
                let d = DVector::from_fn(n, |_, _| {
                    if rng.gen_bool(0.3) {
                        0.0
                    } else {
                        rng.gen_range(0.5..2.0)
                    }
                });
                let q = random_frame(rng, n);
                SymMatrix::symmetrized(q.transpose() * DMatrix::from_diagonal(&d) * q)
            };
            let (a, b) = (psd(), psd());
            return RandomPair {
                a,
                b,
                construction,
                frame_cond: 1.0,
            };
        }
        PairConstruction::CoupledSingular => {
            a[(0, 1)] = 1.0;
            a[(1, 0)] = 1.0;
            a[(0, 0)] = rng.gen_range(-1.0..1.0);
            b[(0, 0)] = signed(rng, 0.5, 2.0);
            for i in 3..n {
                let be = signed(rng, 0.5, 2.0);
                b[(i, i)] = be;
                a[(i, i)] = signed(rng, 0.5, 2.0);
            }
        }
        PairConstruction::Degenerate => {
            let d: Vec<f64> = (0..n)
                .map(|_| match rng.gen_range(0..4) {
                    0 => 0.0,
                    1 => -rng.gen_range(0.5..2.0),
                    _ => rng.gen_range(0.5..2.0),
                })
                .collect();
            if rng.gen_bool(0.5) {
                pad_diagonal(&mut a, 0, &d);
            } else {
                pad_diagonal(&mut b, 0, &d);
            }
        }
    }
    finish_pair(rng, a, b, construction)
}

/// The `index`-th pair of a mixed stream, cycling through every
/// construction with dimensions in `1..=max_n`.
pub fn mixed_pair(seed: u64, index: u64, max_n: usize) -> RandomPair {
    let mut rng = rng_for(seed, index);
    let construction = PairConstruction::ALL[(index as usize) % PairConstruction::ALL.len()];
    let n = rng.gen_range(1..=max_n);
    random_pair(&mut rng, n, construction)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantKind {
    InteriorMu,
    BoundaryMu,
    SingletonMu,
    ReducibleSingular,
    Unbounded,
}

impl PlantKind {
    pub const ALL: [PlantKind; 5] = [
        PlantKind::InteriorMu,
        PlantKind::BoundaryMu,
        PlantKind::SingletonMu,
        PlantKind::ReducibleSingular,
        PlantKind::Unbounded,
    ];

    pub fn has_solution(self) -> bool {
        self != PlantKind::Unbounded
    }

    fn min_dim(self) -> usize {
        match self {
            PlantKind::InteriorMu | PlantKind::BoundaryMu => 1,
            PlantKind::SingletonMu | PlantKind::ReducibleSingular | PlantKind::Unbounded => 2,
        }
    }
}

impl std::str::FromStr for PlantKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "interior_mu" => PlantKind::InteriorMu,
            "boundary_mu" => PlantKind::BoundaryMu,
            "singleton_mu" => PlantKind::SingletonMu,
            "reducible_singular" => PlantKind::ReducibleSingular,
            "unbounded" => PlantKind::Unbounded,
            other => return Err(format!("unknown instance kind `{other}`")),
        })
    }
}

/// A GTRS built backwards from a chosen KKT pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedInstance {
    pub instance: GtrsInstance,
    /// Planted minimizer (absent for `unbounded`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_mu: Option<f64>,
    pub kind: PlantKind,
    pub seed: u64,
    /// `f(ref_x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ref_objective: Option<f64>,
}

struct Blocks {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
}

impl Blocks {
    fn new(n: usize) -> Self {
        Self {
            a: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
        }
    }

    fn diag(&mut self, i: usize, alpha: f64, beta: f64) {
        self.a[(i, i)] = alpha;
        self.b[(i, i)] = beta;
    }
}

/// Deterministic planted instance of the requested kind. `n` is raised to
/// the kind's minimum dimension (2 for the structured kinds).
///
/// In planted coordinates `y` the pair is block diagonal and `(y*, μ*)` is
/// chosen first; then `ã = -(Ã + μ*B̃)y* - μ*b̃` and `c` makes `g(y*) = 0`
/// (or negative when `μ* = 0`). The instance is expressed in `x = Q⁻¹y` for
/// a random frame `Q`.
pub fn plant_instance(seed: u64, n: usize, kind: PlantKind) -> PlantedInstance {
    let mut rng = rng_for(seed, kind as u64 + 1);
    let n = n.max(kind.min_dim());
    let mut blk = Blocks::new(n);
    let mut mu = rng.gen_range(0.5..3.0);
    let mut zero_mu = false;
    // coordinates whose y*-component and b-component are forced to zero
    let mut tail: Vec<usize> = Vec::new();

    let generic = |rng: &mut ChaCha8Rng, blk: &mut Blocks, i: usize, mu: f64| {
        let beta = signed(rng, 0.5, 2.0);
        blk.diag(i, rng.gen_range(0.2..2.0) - mu * beta, beta);
    };

    match kind {
        PlantKind::InteriorMu => {
            zero_mu = rng.gen_bool(0.25);
            if zero_mu {
                mu = 0.0;
            }
            for i in 0..n {
                generic(&mut rng, &mut blk, i, mu);
            }
        }
        PlantKind::BoundaryMu => {
            // coordinate 0 (and maybe 1) singular at μ*, same sign of β
            let left = rng.gen_bool(0.5);
            let cluster = if n >= 3 && rng.gen_bool(0.3) { 2 } else { 1 };
            for i in 0..n {
                if i < cluster {
                    let mag = rng.gen_range(0.5..2.0);
                    let beta = if left { mag } else { -mag };
                    blk.diag(i, -mu * beta, beta);
                } else {
                    generic(&mut rng, &mut blk, i, mu);
                }
            }
        }
        PlantKind::SingletonMu => {
            if rng.gen_bool(0.5) {
                // SDC: opposite-sign β both singular at μ*
                let (m1, m2) = (rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
                blk.diag(0, -mu * m1, m1);
                blk.diag(1, mu * m2, -m2);
            } else {
                // nilpotent block [[0,0],[0,1]] vs [[0,1],[1,0]] shifted to μ*
                blk.a[(0, 1)] = -mu;
                blk.a[(1, 0)] = -mu;
                blk.a[(1, 1)] = 1.0;
                blk.b[(0, 1)] = 1.0;
                blk.b[(1, 0)] = 1.0;
            }
            for i in 2..n {
                generic(&mut rng, &mut blk, i, mu);
            }
        }
        PlantKind::ReducibleSingular => {
            let tails = 1 + rng.gen_range(0..(n / 2).max(1)).min(n - 1);
            let rest = n - tails;
            let mids = if rest >= 2 { rng.gen_range(0..rest) } else { 0 };
            for i in 0..rest - mids {
                generic(&mut rng, &mut blk, i, mu);
            }
            for i in rest - mids..rest {
                blk.diag(i, rng.gen_range(0.5..2.0), 0.0);
            }
            if rest == mids {
                // keep at least one β ≠ 0 coordinate
                blk.diag(0, 1.0 - mu, 1.0);
            }
            tail.extend(rest..n);
        }
        PlantKind::Unbounded => {
            if rng.gen_bool(0.5) {
                // rotation block: I⪰ empty
                blk.a[(0, 0)] = 1.0;
                blk.a[(1, 1)] = -1.0;
                blk.b[(0, 1)] = 1.0;
                blk.b[(1, 0)] = 1.0;
                for i in 2..n {
                    blk.diag(i, signed(&mut rng, 0.5, 2.0), signed(&mut rng, 0.5, 2.0));
                }
            } else {
                // SDC pair whose interval misses [0, ∞)
                let (l, h) = if rng.gen_bool(0.5) {
                    let l = rng.gen_range(0.5..3.0);
                    (l, l - rng.gen_range(0.2..1.0))
                } else {
                    let h = -rng.gen_range(0.2..2.0);
                    (h - rng.gen_range(0.5..2.0), h)
                };
                let m1 = rng.gen_range(0.5..2.0);
                let m2 = rng.gen_range(0.5..2.0);
                blk.diag(0, -l * m1, m1);
                blk.diag(1, h * m2, -m2);
                for i in 2..n {
                    let beta = signed(&mut rng, 0.5, 2.0);
                    let bound = if beta > 0.0 { l } else { h };
                    blk.diag(
                        i,
                        -(bound - beta.signum() * rng.gen_range(0.0..2.0)) * beta,
                        beta,
                    );
                }
            }
        }
    }

    let q = random_frame(&mut rng, n);
    let at = SymMatrix::symmetrized(blk.a);
    let bt = SymMatrix::symmetrized(blk.b);
    let mut y = DVector::from_fn(n, |_, _| rng.gen_range(-1.5..1.5));
    let mut bv = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    for &i in &tail {
        y[i] = 0.0;
        bv[i] = 0.0;
    }
    let (planted, ref_y) = if kind == PlantKind::Unbounded {
        let av = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let c = -rng.gen_range(0.5..2.0);
        (
            GtrsInstance {
                a_mat: at,
                b_mat: bt,
                a: av,
                b: bv,
                c,
            },
            None,
        )
    } else {
        let slack = if zero_mu {
            rng.gen_range(0.1..1.0)
        } else {
            0.0
        };
        (plant_from(at, bt, &y, mu, bv, slack), Some(y))
    };
    let instance = planted.transformed(&q);
    let ref_x = ref_y.map(|y| {
        q.clone()
            .lu()
            .solve(&y)
            .expect("random frame is nonsingular")
    });
    PlantedInstance {
        ref_objective: ref_x.as_ref().map(|x| instance.f(x)),
        ref_x: ref_x.map(|x| x.iter().copied().collect()),
        ref_mu: kind.has_solution().then_some(mu),
        instance,
        kind,
        seed,
    }
}

/// The instance for which `(x, mu)` is a KKT pair: `a = -(A + μB)x - μb`
/// and `c = -xᵀBx - 2bᵀx - slack`, so `g(x) = -slack`. A positive slack
/// needs `mu = 0`.
pub fn plant_from(
    a_mat: SymMatrix,
    b_mat: SymMatrix,
    x: &DVector<f64>,
    mu: f64,
    b: DVector<f64>,
    slack: f64,
) -> GtrsInstance {
    let a = -(a_mat.pencil(&b_mat, mu).as_matrix() * x) - &b * mu;
    let c = -(b_mat.quad(x) + 2.0 * b.dot(x)) - slack;
    GtrsInstance {
        a_mat,
        b_mat,
        a,
        b,
        c,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    /// `min f(x) - λ*` over the sampled feasible points.
    pub worst_gap: f64,
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Samples feasible points and reports how far below `lambda_star` the
/// objective gets.
///
/// Each trial draws a point in a box around a feasible anchor (three box
/// sizes); a point outside the feasible set is pulled back along the segment
/// to the anchor onto the boundary `g = 0`.
pub fn sample_optimality(
    inst: &GtrsInstance,
    lambda_star: f64,
    trials: usize,
    seed: u64,
) -> SampleReport {
    let opts = crate::gtrs::SolveOptions::default();
    let Some(anchor) = crate::gtrs::feasible_point(inst, &opts) else {
        return SampleReport {
            worst_gap: f64::INFINITY,
            samples: 0,
            failure: Some("no feasible point found".into()),
        };
    };
    if inst.g(&anchor) > 0.0 {
        return SampleReport {
            worst_gap: f64::INFINITY,
            samples: 0,
            failure: Some("no feasible point found".into()),
        };
    }
    let n = inst.dim();
    let radius = 1.0 + anchor.norm() + boundary_radius(inst);
    let gaps: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_for(seed, k as u64);
            let r = radius * [0.25, 1.0, 4.0][k % 3];
            let x = &anchor + DVector::from_fn(n, |_, _| rng.gen_range(-r..r));
            let x = pull_inside(inst, &anchor, x);
            inst.f(&x) - lambda_star
        })
        .collect();
    SampleReport {
        worst_gap: gaps.iter().copied().fold(f64::INFINITY, f64::min),
        samples: gaps.len(),
        failure: None,
    }
}

/// Rough size of the region where `g ≤ 0` is bounded: `sqrt(|c| + ‖b‖²/λ)`
/// along the most positive curvature of `B`.
fn boundary_radius(inst: &GtrsInstance) -> f64 {
    let eig = sym_eig(&inst.b_mat);
    let top = eig.values[eig.values.len() - 1];
    if top <= 0.0 {
        return 1.0;
    }
    let low = eig
        .values
        .iter()
        .filter(|&&v| v > 1e-8 * top)
        .fold(top, |a, &v| a.min(v));
    ((inst.c.abs() + inst.b.norm_squared() / low) / low).sqrt() + inst.b.norm() / low
}

fn pull_inside(inst: &GtrsInstance, anchor: &DVector<f64>, x: DVector<f64>) -> DVector<f64> {
    if inst.g(&x) <= 0.0 {
        return x;
    }
    // g(anchor + t d) = α t² + 2β t + γ with γ ≤ 0 < g(x); root in (0, 1]
    let d = &x - anchor;
    let alpha = inst.b_mat.quad(&d);
    let beta = d.dot(&(inst.b_mat.as_matrix() * anchor + &inst.b));
    let gamma = inst.g(anchor);
    let t = if alpha.abs() <= 1e-300 {
        -gamma / (2.0 * beta)
    } else {
        let disc = (beta * beta - alpha * gamma).max(0.0).sqrt();
        [(-beta + disc) / alpha, (-beta - disc) / alpha]
            .into_iter()
            .filter(|t| *t >= 0.0 && *t <= 1.0 + 1e-12)
            .fold(1.0_f64, f64::min)
    };
    let mut t = t.clamp(0.0, 1.0);
    let mut p = anchor + &d * t;
    // guard against rounding putting p just outside
    while inst.g(&p) > 0.0 && t > 0.0 {
        t *= 1.0 - 1e-9;
        t -= 1e-300;
        p = anchor + &d * t.max(0.0);
        if t < 1e-12 {
            return anchor.clone();
        }
    }
    p
}

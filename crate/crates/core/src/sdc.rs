//! Simultaneous diagonalization by congruence (SDC) of a symmetric pair.
//!
//! Three routes, picked by which matrix can be inverted:
//!
//! * `B` nonsingular: `A, B` are SDC iff `B⁻¹A` has a real, non-defective
//!   spectrum. Eigenvectors grouped by eigenvalue make `PᵀBP` block diagonal;
//!   each block is then diagonalized orthogonally.
//! * `B` singular, `A` nonsingular: the same test on `A⁻¹B`.
//! * both singular: reduce to the canonical singular-pair form
//!   `UᵀBU = diag(B₁, 0)` with `UᵀAU` carrying a coupling block `A₂`; the pair
//!   is SDC iff `A₂ = 0` and `(A₁, B₁)` is SDC, the latter decided by the
//!   first route since `B₁` is nonsingular.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{real_spectrum, sym_eig, SymMatrix};
use crate::serde_rows;
use crate::tolerance::Tolerances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdcVerdict {
    Sdc,
    NotSdc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SdcRoute {
    BInverseA,
    AInverseB,
    SingularPair,
}

/// Why a pair is not SDC.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Obstruction {
    ComplexEigenvalue {
        re: f64,
        im: f64,
    },
    DefectiveRealEigenvalue {
        value: f64,
        algebraic: usize,
        geometric: usize,
    },
    OffdiagCouplingA2 {
        norm: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inertia {
    #[serde(rename = "PD")]
    Pd,
    #[serde(rename = "ND")]
    Nd,
    Indefinite,
}

/// One eigenvalue cluster of the pivot route together with the inertia of
/// the corresponding diagonal block of the pivot matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenBlock {
    pub lambda: f64,
    pub multiplicity: usize,
    pub inertia: Inertia,
}

/// A congruence `P` with `PᵀAP = diag(alpha)` and `PᵀBP = diag(beta)`.
///
/// Coordinates are ordered by descending `alpha/beta` over `beta != 0`,
/// followed by `beta = 0, alpha != 0` and finally `alpha = beta = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagonalization {
    #[serde(with = "serde_rows")]
    pub congruence: DMatrix<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Diagonalization {
    /// Largest off-diagonal entry of `PᵀMP` and largest diagonal mismatch,
    /// both relative to `max(1, ‖PᵀMP‖_max)`.
    pub fn residual(&self, m: &SymMatrix, diag: &[f64]) -> f64 {
        let t = m.congruence(&self.congruence);
        let scale = t.max_abs().max(1.0);
        let n = diag.len();
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { diag[i] } else { 0.0 };
                worst = worst.max((t.as_matrix()[(i, j)] - want).abs());
            }
        }
        worst / scale
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdcReport {
    pub verdict: SdcVerdict,
    pub route: SdcRoute,
    pub diagonalization: Option<Diagonalization>,
    pub obstruction: Option<Obstruction>,
    /// Eigenvalue clusters of `B⁻¹A` (or of `B₁⁻¹A₁` on the singular-pair
    /// route); absent on the `A⁻¹B` route.
    pub blocks: Vec<EigenBlock>,
}

impl SdcReport {
    pub fn is_sdc(&self) -> bool {
        self.verdict == SdcVerdict::Sdc
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormTag {
    /// `UᵀAU = [[A₁, A₂], [A₂ᵀ, 0]]`.
    FormA1,
    /// `UᵀAU = [[A₁, 0, A₂], [0, A₃, 0], [A₂ᵀ, 0, 0]]` with `A₃` diagonal.
    FormA3,
}

/// Canonical block form of a pair with singular `B`.
///
/// `UᵀBU = diag(B₁, 0)` with `B₁` the `p × p` nonsingular diagonal and
/// `UᵀAU` laid out according to `form`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPairForm {
    #[serde(with = "serde_rows")]
    pub u: DMatrix<f64>,
    pub p: usize,
    pub r: usize,
    pub s: usize,
    pub b1: Vec<f64>,
    #[serde(with = "serde_rows")]
    pub a1: DMatrix<f64>,
    /// `p × (r - s)` coupling block; `None` when it has no entries.
    #[serde(with = "serde_rows::option")]
    pub a2: Option<DMatrix<f64>>,
    pub a3: Vec<f64>,
    pub form: FormTag,
}

impl SingularPairForm {
    pub fn a2_norm(&self) -> f64 {
        self.a2
            .as_ref()
            .map_or(0.0, |m| m.iter().fold(0.0_f64, |a, v| a.max(v.abs())))
    }

    /// `(A₁, B₁)` as symmetric matrices, `None` when `p = 0`.
    pub fn reduced_pair(&self) -> Option<(SymMatrix, SymMatrix)> {
        if self.p == 0 {
            return None;
        }
        Some((
            SymMatrix::symmetrized(self.a1.clone()),
            SymMatrix::symmetrized(DMatrix::from_diagonal(&DVector::from_column_slice(
                &self.b1,
            ))),
        ))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Regularity {
    Nonsingular,
    Singular,
}

/// Nonsingularity with an ambiguity band `(tol, factor * tol]` on
/// `σ_min / σ_max`.
pub(crate) fn regularity(m: &SymMatrix, tol: &Tolerances, name: &str) -> Result<Regularity> {
    let vals = sym_eig(m).values;
    let top = vals.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    if top == 0.0 {
        return Ok(Regularity::Singular);
    }
    let bottom = vals.iter().fold(f64::INFINITY, |a, &v| a.min(v.abs()));
    let ratio = bottom / top;
    if ratio <= tol.rank {
        Ok(Regularity::Singular)
    } else if ratio > tol.rank * tol.ambiguity_factor {
        Ok(Regularity::Nonsingular)
    } else {
        Err(Error::Ambiguous {
            what: format!(
                "nonsingularity of {name} (candidate routes: nonsingular-{name} spectral test or singular-pair reduction)"
            ),
            mu: None,
            margin: ratio,
        })
    }
}

struct SpectralSplit {
    p: DMatrix<f64>,
    /// Exact `±1` diagonal of `PᵀGP` for the pivot `G`.
    pivot_diag: Vec<f64>,
    /// Eigenvalue of `G⁻¹H` attached to each coordinate.
    eig: Vec<f64>,
    blocks: Vec<EigenBlock>,
}

/// `k` right singular vectors of `m` with the smallest singular values.
fn smallest_right_singular_vectors(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.ncols();
    let svd = SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("v_t requested");
    DMatrix::from_fn(n, k, |i, j| v_t[(n - k + j, i)])
}

/// Spectral SDC test on `(pivot, other)` with `pivot` nonsingular.
fn spectral_route(
    pivot: &SymMatrix,
    other: &SymMatrix,
    tol: &Tolerances,
) -> Result<std::result::Result<SpectralSplit, Obstruction>> {
    let n = pivot.dim();
    let c = pivot
        .as_matrix()
        .clone()
        .full_piv_lu()
        .solve(other.as_matrix())
        .ok_or_else(|| Error::Numerical("pivot matrix is numerically singular".into()))?;
    let spec = real_spectrum(&c, tol.cluster)?;
    if let Some(&(re, im)) = spec.complex_pairs.first() {
        return Ok(Err(Obstruction::ComplexEigenvalue { re, im }));
    }
    if let Some(e) = spec.real_eigs.iter().find(|e| e.is_defective()) {
        return Ok(Err(Obstruction::DefectiveRealEigenvalue {
            value: e.value,
            algebraic: e.algebraic,
            geometric: e.geometric,
        }));
    }
    let scale = c.norm().max(1.0);
    let mut cols = Vec::with_capacity(n);
    let mut pivot_diag = Vec::with_capacity(n);
    let mut eig = Vec::with_capacity(n);
    let mut blocks = Vec::with_capacity(spec.real_eigs.len());
    for e in &spec.real_eigs {
        let lambda = if e.value.abs() <= tol.cluster * scale {
            0.0
        } else {
            e.value
        };
        let shifted = &c - DMatrix::identity(n, n) * e.value;
        let v = smallest_right_singular_vectors(&shifted, e.algebraic);
        // Orthogonalize the cluster basis in the pivot inner product.
        let g = SymMatrix::symmetrized(v.transpose() * pivot.as_matrix() * &v);
        let ge = sym_eig(&g);
        let (mut pos, mut neg) = (0, 0);
        for k in 0..e.algebraic {
            let d = ge.values[k];
            if d == 0.0 {
                return Err(Error::Numerical(
                    "pivot block vanished on an eigenspace".into(),
                ));
            }
            let col = &v * ge.vectors.column(k) / d.abs().sqrt();
            cols.push(col);
            pivot_diag.push(d.signum());
            eig.push(lambda);
            if d > 0.0 {
                pos += 1;
            } else {
                neg += 1;
            }
        }
        let inertia = match (pos, neg) {
            (_, 0) => Inertia::Pd,
            (0, _) => Inertia::Nd,
            _ => Inertia::Indefinite,
        };
        blocks.push(EigenBlock {
            lambda,
            multiplicity: e.algebraic,
            inertia,
        });
    }
    if cols.len() != n {
        return Err(Error::Numerical(format!(
            "eigenvector basis has {} columns, expected {n}",
            cols.len()
        )));
    }
    Ok(Ok(SpectralSplit {
        p: DMatrix::from_columns(&cols),
        pivot_diag,
        eig,
        blocks,
    }))
}

/// Sorts coordinates into the documented order.
fn canonical_order(p: DMatrix<f64>, alpha: Vec<f64>, beta: Vec<f64>) -> Diagonalization {
    let n = alpha.len();
    let mut idx: Vec<usize> = (0..n).collect();
    let class = |i: usize| -> u8 {
        if beta[i] != 0.0 {
            0
        } else if alpha[i] != 0.0 {
            1
        } else {
            2
        }
    };
    idx.sort_by(|&i, &j| {
        class(i).cmp(&class(j)).then_with(|| {
            if class(i) == 0 {
                (alpha[j] / beta[j]).total_cmp(&(alpha[i] / beta[i]))
            } else {
                std::cmp::Ordering::Equal
            }
        })
    });
    Diagonalization {
        congruence: DMatrix::from_fn(p.nrows(), n, |r, c| p[(r, idx[c])]),
        alpha: idx.iter().map(|&i| alpha[i]).collect(),
        beta: idx.iter().map(|&i| beta[i]).collect(),
    }
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

/// Decides whether `A, B` are simultaneously diagonalizable by congruence.
pub fn is_sdc(a: &SymMatrix, b: &SymMatrix, tol: &Tolerances) -> Result<SdcReport> {
    check_dims(a, b)?;
    if regularity(b, tol, "B")? == Regularity::Nonsingular {
        return Ok(match spectral_route(b, a, tol)? {
            Ok(split) => {
                let beta = split.pivot_diag.clone();
                let alpha: Vec<f64> = beta.iter().zip(&split.eig).map(|(s, l)| l * s).collect();
                SdcReport {
                    verdict: SdcVerdict::Sdc,
                    route: SdcRoute::BInverseA,
                    diagonalization: Some(canonical_order(split.p, alpha, beta)),
                    obstruction: None,
                    blocks: split.blocks,
                }
            }
            Err(obs) => not_sdc(SdcRoute::BInverseA, obs),
        });
    }
    if regularity(a, tol, "A")? == Regularity::Nonsingular {
        return Ok(match spectral_route(a, b, tol)? {
            Ok(split) => {
                let alpha = split.pivot_diag.clone();
                let beta: Vec<f64> = alpha.iter().zip(&split.eig).map(|(s, l)| l * s).collect();
                SdcReport {
                    verdict: SdcVerdict::Sdc,
                    route: SdcRoute::AInverseB,
                    diagonalization: Some(canonical_order(split.p, alpha, beta)),
                    obstruction: None,
                    blocks: Vec::new(),
                }
            }
            Err(obs) => not_sdc(SdcRoute::AInverseB, obs),
        });
    }
    let form = singular_pair_canonical(a, b, tol)?;
    singular_pair_sdc(&form, tol)
}

fn not_sdc(route: SdcRoute, obstruction: Obstruction) -> SdcReport {
    SdcReport {
        verdict: SdcVerdict::NotSdc,
        route,
        diagonalization: None,
        obstruction: Some(obstruction),
        blocks: Vec::new(),
    }
}

/// SDC decision and congruence for a pair already in singular-pair form.
pub(crate) fn singular_pair_sdc(form: &SingularPairForm, tol: &Tolerances) -> Result<SdcReport> {
    let a_scale = form_a_scale(form);
    let a2 = form.a2_norm();
    if a2 > tol.rank * a_scale {
        return Ok(not_sdc(
            SdcRoute::SingularPair,
            Obstruction::OffdiagCouplingA2 { norm: a2 },
        ));
    }
    let n = form.p + form.r;
    let mut inner = DMatrix::<f64>::identity(n, n);
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    let mut blocks = Vec::new();
    if let Some((a1, b1)) = form.reduced_pair() {
        match spectral_route(&b1, &a1, tol)? {
            Ok(split) => {
                inner.view_mut((0, 0), (form.p, form.p)).copy_from(&split.p);
                for k in 0..form.p {
                    beta[k] = split.pivot_diag[k];
                    alpha[k] = split.eig[k] * split.pivot_diag[k];
                }
                blocks = split.blocks;
            }
            Err(obs) => {
                return Ok(not_sdc(SdcRoute::SingularPair, obs));
            }
        }
    }
    for (k, &d) in form.a3.iter().enumerate() {
        let i = form.p + k;
        inner[(i, i)] = 1.0 / d.abs().sqrt();
        alpha[i] = d.signum();
    }
    Ok(SdcReport {
        verdict: SdcVerdict::Sdc,
        route: SdcRoute::SingularPair,
        diagonalization: Some(canonical_order(&form.u * inner, alpha, beta)),
        obstruction: None,
        blocks,
    })
}

fn form_a_scale(form: &SingularPairForm) -> f64 {
    // ‖UᵀAU‖_max is bounded by the blocks that survive the construction.
    let mut s = form.a1.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    s = form.a3.iter().fold(s, |a, v| a.max(v.abs()));
    s = s.max(form.a2_norm());
    s.max(f64::MIN_POSITIVE)
}

/// Congruence `(P, alpha, beta)` for an SDC pair.
pub fn simultaneous_diagonalize(
    a: &SymMatrix,
    b: &SymMatrix,
    tol: &Tolerances,
) -> Result<Diagonalization> {
    let report = is_sdc(a, b, tol)?;
    report.diagonalization.ok_or_else(|| {
        Error::ContractViolation(format!(
            "pair is not SDC ({:?})",
            report.obstruction.expect("not_sdc carries an obstruction")
        ))
    })
}

/// Canonical singular-pair form of `(A, B)` with `B` singular.
///
/// Orthogonally reduces `B` to `diag(B₁, 0)`, then the trailing block `M₃`
/// of `A` to `diag(A₃, 0)`, and finally eliminates the coupling between the
/// leading block and `A₃` with a block-triangular congruence.
pub fn singular_pair_canonical(
    a: &SymMatrix,
    b: &SymMatrix,
    tol: &Tolerances,
) -> Result<SingularPairForm> {
    check_dims(a, b)?;
    let n = a.dim();
    let be = sym_eig(b);
    let b_top = be.values.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let mut range_idx: Vec<usize> = (0..n)
        .filter(|&i| b_top > 0.0 && be.values[i].abs() > tol.rank * b_top)
        .collect();
    // descending eigenvalue order inside B₁
    range_idx.reverse();
    let null_idx: Vec<usize> = (0..n).filter(|i| !range_idx.contains(i)).collect();
    let p = range_idx.len();
    if p == n {
        return Err(Error::ContractViolation(
            "singular_pair_canonical needs a singular B".into(),
        ));
    }
    let order: Vec<usize> = range_idx.iter().chain(&null_idx).copied().collect();
    let q1 = DMatrix::from_fn(n, n, |r, c| be.vectors[(r, order[c])]);
    let b1: Vec<f64> = range_idx.iter().map(|&i| be.values[i]).collect();

    let a_hat = a.congruence(&q1);
    let ah = a_hat.as_matrix();
    let q = n - p;
    let m1 = ah.view((0, 0), (p, p)).into_owned();
    let m2 = ah.view((0, p), (p, q)).into_owned();
    let m3 = SymMatrix::symmetrized(ah.view((p, p), (q, q)).into_owned());

    let a_scale = a.max_abs().max(f64::MIN_POSITIVE);
    let me = sym_eig(&m3);
    let mut nz: Vec<usize> = (0..q)
        .filter(|&i| me.values[i].abs() > tol.rank * a_scale)
        .collect();
    nz.reverse();
    let zero: Vec<usize> = (0..q).filter(|i| !nz.contains(i)).collect();
    let s = nz.len();
    let m3_order: Vec<usize> = nz.iter().chain(&zero).copied().collect();
    let pm = DMatrix::from_fn(q, q, |r, c| me.vectors[(r, m3_order[c])]);
    let a3: Vec<f64> = nz.iter().map(|&i| me.values[i]).collect();

    let m2p = &m2 * &pm;
    let a4 = m2p.view((0, 0), (p, s)).into_owned();
    let a5 = m2p.view((0, s), (p, q - s)).into_owned();

    let mut u1 = DMatrix::<f64>::identity(n, n);
    u1.view_mut((p, p), (q, q)).copy_from(&pm);
    let mut u2 = DMatrix::<f64>::identity(n, n);
    let a3_inv = DVector::from_iterator(s, a3.iter().map(|d| 1.0 / d));
    // block (row p.., col 0..p) = -A₃⁻¹ A₄ᵀ
    for i in 0..s {
        for j in 0..p {
            u2[(p + i, j)] = -a3_inv[i] * a4[(j, i)];
        }
    }
    let u = &q1 * &u1 * &u2;
    let a1 = SymMatrix::symmetrized(&m1 - &a4 * DMatrix::from_diagonal(&a3_inv) * a4.transpose())
        .into_inner();

    Ok(SingularPairForm {
        u,
        p,
        r: q,
        s,
        b1,
        a1,
        a2: if p > 0 && q > s { Some(a5) } else { None },
        a3,
        form: if s > 0 {
            FormTag::FormA3
        } else {
            FormTag::FormA1
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn diag(d: &[f64]) -> SymMatrix {
        SymMatrix::from_diagonal(d).unwrap()
    }

    #[test]
    fn sdc_examples() {
        let tol = Tolerances::default();
        let r = is_sdc(&diag(&[1.0, 2.0]), &SymMatrix::identity(2), &tol).unwrap();
        assert!(r.is_sdc());
        let d = r.diagonalization.unwrap();
        assert_eq!(d.beta, vec![1.0, 1.0]);
        assert_eq!(d.alpha, vec![2.0, 1.0]);
        assert!(d.residual(&diag(&[1.0, 2.0]), &d.alpha) < 1e-12);

        let r = is_sdc(&diag(&[1.0, -1.0]), &sym(&[&[0.0, 1.0], &[1.0, 0.0]]), &tol).unwrap();
        assert_eq!(r.verdict, SdcVerdict::NotSdc);
        assert!(matches!(
            r.obstruction,
            Some(Obstruction::ComplexEigenvalue { .. })
        ));

        let r = is_sdc(&sym(&[&[0.0, 1.0], &[1.0, 0.0]]), &diag(&[1.0, 0.0]), &tol).unwrap();
        assert_eq!(r.verdict, SdcVerdict::NotSdc);
        assert_eq!(r.route, SdcRoute::AInverseB);
    }

    #[test]
    fn coupling_obstruction_on_both_singular_pair() {
        // A = [[0,1,0],[1,0,0],[0,0,0]], B = diag(1,0,0): both singular, A₂ = [1 0]
        let tol = Tolerances::default();
        let a = sym(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let b = diag(&[1.0, 0.0, 0.0]);
        let r = is_sdc(&a, &b, &tol).unwrap();
        assert_eq!(r.route, SdcRoute::SingularPair);
        assert!(matches!(
            r.obstruction,
            Some(Obstruction::OffdiagCouplingA2 { norm }) if (norm - 1.0).abs() < 1e-12
        ));
    }

    #[test]
    fn diagonalize_examples() {
        let tol = Tolerances::default();
        let a = sym(&[&[2.0, 1.0], &[1.0, 2.0]]);
        let d = simultaneous_diagonalize(&a, &SymMatrix::identity(2), &tol).unwrap();
        assert_relative_eq!(d.alpha[0], 3.0, epsilon = 1e-12);
        assert_relative_eq!(d.alpha[1], 1.0, epsilon = 1e-12);
        assert_eq!(d.beta, vec![1.0, 1.0]);

        let a = diag(&[-1.0, 2.0]);
        let b = diag(&[1.0, -1.0]);
        let d = simultaneous_diagonalize(&a, &b, &tol).unwrap();
        // ratios -1 (beta=1) and -2 (beta=-1), descending
        assert_eq!(d.beta, vec![1.0, -1.0]);
        assert_relative_eq!(d.alpha[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(d.alpha[1], 2.0, epsilon = 1e-12);
        assert!(d.residual(&a, &d.alpha) < 1e-12);
        assert!(d.residual(&b, &d.beta) < 1e-12);

        let e =
            simultaneous_diagonalize(&diag(&[1.0, -1.0]), &sym(&[&[0.0, 1.0], &[1.0, 0.0]]), &tol);
        assert!(matches!(e, Err(Error::ContractViolation(_))));
    }

    #[test]
    fn diagonalize_planted_congruence() {
        // A = QᵀDₐQ, B = QᵀD_bQ with a zero in Dₐ
        let q = DMatrix::from_row_slice(3, 3, &[1.0, 0.3, -0.2, 0.1, 1.2, 0.4, -0.5, 0.2, 0.9]);
        let da = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -2.0, 0.0]));
        let db = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0, -1.0]));
        let a = SymMatrix::symmetrized(q.transpose() * da * &q);
        let b = SymMatrix::symmetrized(q.transpose() * db * &q);
        let tol = Tolerances::default();
        let d = simultaneous_diagonalize(&a, &b, &tol).unwrap();
        assert!(d.residual(&a, &d.alpha) <= 1e-7);
        assert!(d.residual(&b, &d.beta) <= 1e-7);
        // generalized eigenvalues 0.5, -2, 0 (descending: 0.5, 0, -2)
        let ratios: Vec<f64> = d.alpha.iter().zip(&d.beta).map(|(a, b)| a / b).collect();
        assert_relative_eq!(ratios[0], 0.5, epsilon = 1e-9);
        assert_relative_eq!(ratios[1], 0.0, epsilon = 1e-9);
        assert_relative_eq!(ratios[2], -2.0, epsilon = 1e-9);
        assert!(d.congruence.clone().svd(false, false).singular_values.min() > 1e-6);
    }

    #[test]
    fn canonical_form_examples() {
        let tol = Tolerances::default();
        let f =
            singular_pair_canonical(&sym(&[&[0.0, 1.0], &[1.0, 0.0]]), &diag(&[1.0, 0.0]), &tol)
                .unwrap();
        assert_eq!((f.form, f.p, f.r, f.s), (FormTag::FormA1, 1, 1, 0));
        assert_eq!(f.b1, vec![1.0]);
        assert_relative_eq!(f.a1[(0, 0)], 0.0);
        assert_relative_eq!(f.a2.as_ref().unwrap()[(0, 0)].abs(), 1.0);

        let f = singular_pair_canonical(&diag(&[0.0, 1.0]), &diag(&[1.0, 0.0]), &tol).unwrap();
        assert_eq!((f.form, f.p, f.s), (FormTag::FormA3, 1, 1));
        assert_eq!(f.a3, vec![1.0]);
        assert!(f.a2.is_none());

        let f = singular_pair_canonical(&diag(&[1.0, 1.0]), &diag(&[1.0, 0.0]), &tol).unwrap();
        assert_eq!(f.form, FormTag::FormA3);
        assert_relative_eq!(f.a1[(0, 0)], 1.0);
        assert_eq!(f.b1, vec![1.0]);
        assert_eq!(f.a3, vec![1.0]);

        assert!(matches!(
            singular_pair_canonical(&diag(&[1.0, 1.0]), &SymMatrix::identity(2), &tol),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn canonical_form_layout_is_exact() {
        // dense frame with coupling eliminated by U₂
        let q = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.2, 0.0, -0.3, 0.1, 1.1, 0.5, 0.0, 0.0, -0.4, 0.9, 0.2, 0.3, 0.0, 0.1, 1.3,
            ],
        );
        let a0 = sym(&[
            &[2.0, 0.5, 1.0, 0.3],
            &[0.5, -1.0, 0.0, 0.7],
            &[1.0, 0.0, 3.0, 0.0],
            &[0.3, 0.7, 0.0, 0.0],
        ]);
        let b0 = diag(&[1.0, -2.0, 0.0, 0.0]);
        let a = a0.congruence(&q);
        let b = b0.congruence(&q);
        let tol = Tolerances::default();
        let f = singular_pair_canonical(&a, &b, &tol).unwrap();
        assert_eq!((f.p, f.r, f.s), (2, 2, 1));
        let ub = b.congruence(&f.u);
        let ua = a.congruence(&f.u);
        let scale = a.max_abs().max(b.max_abs());
        for i in 0..4 {
            for j in 0..4 {
                let want_b = if i == j && i < 2 { f.b1[i] } else { 0.0 };
                assert!((ub.as_matrix()[(i, j)] - want_b).abs() <= 1e-8 * scale);
            }
        }
        // A₁ block, zero cross blocks next to A₃, zero trailing block
        for i in 0..2 {
            assert!(ua.as_matrix()[(i, 2)].abs() <= 1e-8 * scale);
            for j in 0..2 {
                assert!((ua.as_matrix()[(i, j)] - f.a1[(i, j)]).abs() <= 1e-8 * scale);
            }
        }
        assert!((ua.as_matrix()[(2, 2)] - f.a3[0]).abs() <= 1e-8 * scale);
        assert!(ua.as_matrix()[(3, 3)].abs() <= 1e-8 * scale);
        assert!(ua.as_matrix()[(2, 3)].abs() <= 1e-8 * scale);
        let a2 = f.a2.as_ref().unwrap();
        for i in 0..2 {
            assert!((ua.as_matrix()[(i, 3)] - a2[(i, 0)]).abs() <= 1e-8 * scale);
        }
    }

    #[test]
    fn ambiguous_nonsingularity_is_an_error() {
        let tol = Tolerances::default();
        let b = diag(&[1.0, 1e-7]);
        let r = is_sdc(&SymMatrix::identity(2), &b, &tol);
        assert!(matches!(r, Err(Error::Ambiguous { .. })));
    }
}

//! Dense real linear algebra used throughout the crate.
//!
//! Everything here works on small dense matrices (a few hundred rows at
//! most). Symmetric problems go through a symmetric eigensolver; general
//! real spectra come from a real Schur form.

use nalgebra::{linalg::Schur, Complex, DMatrix, DVector, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default symmetry tolerance, relative to `max(1, max|m_ij|)`.
pub const SYM_TOL: f64 = 1e-10;
/// Default eigen/rank/psd tolerance.
pub const EIG_TOL: f64 = 1e-9;

/// A dense real symmetric matrix.
///
/// Construction checks symmetry up to [`SYM_TOL`] and then stores the exact
/// symmetric part, so every later product sees a bitwise-symmetric matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        Self::with_tol(m, SYM_TOL)
    }

    pub fn with_tol(m: DMatrix<f64>, sym_tol: f64) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput(format!(
                "matrix is {}x{}, expected square",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix must have n >= 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let scale = max_abs(&m).max(1.0);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                let gap = (m[(i, j)] - m[(j, i)]).abs();
                if gap > sym_tol * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not symmetric at ({i}, {j}): |{} - {}| > {:e}",
                        m[(i, j)],
                        m[(j, i)],
                        sym_tol * scale
                    )));
                }
            }
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the symmetric part of `m` without checking anything.
    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let s = (&m + m.transpose()) * 0.5;
        SymMatrix(s)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidInput("matrix must have n >= 1".into()));
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::InvalidInput(format!(
                "row of length {} in a {n}x{n} matrix",
                bad.len()
            )));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_diagonal(d: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(d)))
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix(DMatrix::zeros(n, n))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix(DMatrix::identity(n, n))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.0
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect()
    }

    /// `Pᵀ M P`.
    pub fn congruence(&self, p: &DMatrix<f64>) -> SymMatrix {
        Self::symmetrized(p.transpose() * &self.0 * p)
    }

    /// `self + mu * other`.
    pub fn pencil(&self, other: &SymMatrix, mu: f64) -> SymMatrix {
        SymMatrix(&self.0 + &other.0 * mu)
    }

    pub fn scaled(&self, c: f64) -> SymMatrix {
        SymMatrix(&self.0 * c)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.norm()
    }

    /// Quadratic form `xᵀ M x`.
    pub fn quad(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.0 * x))
    }

    /// The principal submatrix on `idx`.
    pub fn select(&self, idx: &[usize]) -> SymMatrix {
        SymMatrix(DMatrix::from_fn(idx.len(), idx.len(), |i, j| {
            self.0[(idx[i], idx[j])]
        }))
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(&rows)
    }
}

impl From<SymMatrix> for Vec<Vec<f64>> {
    fn from(m: SymMatrix) -> Self {
        m.to_rows()
    }
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Symmetric eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub values: DVector<f64>,
    /// Orthonormal eigenvectors, column `i` pairs with `values[i]`.
    pub vectors: DMatrix<f64>,
}

pub fn sym_eig(m: &SymMatrix) -> SymEig {
    let eig = SymmetricEigen::new(m.0.clone());
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    SymEig { values, vectors }
}

pub fn min_eigenvalue(m: &SymMatrix) -> f64 {
    m.0.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

/// Three-valued positive semidefiniteness test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsdVerdict {
    Yes,
    No,
    Ambiguous,
}

/// Classifies `lambda_min` against the band `[-2 tol scale, -tol scale)`.
///
/// Values at or above `-tol * scale` are PSD, values below `-2 tol scale`
/// are not, and the band in between is reported as ambiguous.
pub fn psd_verdict(lambda_min: f64, tol: f64, scale: f64) -> PsdVerdict {
    if lambda_min >= -tol * scale {
        PsdVerdict::Yes
    } else if lambda_min < -2.0 * tol * scale {
        PsdVerdict::No
    } else {
        PsdVerdict::Ambiguous
    }
}

/// PSD test with scale `max(1, spectral radius)`.
pub fn is_psd(m: &SymMatrix, tol: f64) -> PsdVerdict {
    let values = m.0.clone().symmetric_eigenvalues();
    let lo = values.iter().fold(f64::INFINITY, |a, &v| a.min(v));
    let radius = values.iter().fold(0.0_f64, |a, &v| a.max(v.abs()));
    psd_verdict(lo, tol, radius.max(1.0))
}

/// One real eigenvalue of a general matrix after clustering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RealEigenvalue {
    pub value: f64,
    pub algebraic: usize,
    pub geometric: usize,
}

impl RealEigenvalue {
    pub fn is_defective(&self) -> bool {
        self.geometric < self.algebraic
    }
}

/// Real part of the spectrum of a general square matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Distinct real eigenvalues, strictly decreasing.
    pub real_eigs: Vec<RealEigenvalue>,
    pub has_complex: bool,
    /// Eigenvalues with a significant imaginary part, `(re, im)` with `im > 0`.
    pub complex_pairs: Vec<(f64, f64)>,
}

/// Eigenvalues from a real Schur form, read off the quasi-triangular factor
/// directly: 2×2 blocks with real eigenvalues are not always split, and the
/// closed form must not take the square root of a discriminant that rounds
/// below zero.
fn schur_eigenvalues(c: &DMatrix<f64>) -> Option<Vec<Complex<f64>>> {
    let n = c.nrows();
    let t = match Schur::try_new(c.clone(), f64::EPSILON, 200 * n.max(1)) {
        Some(s) => s.unpack().1,
        None => {
            // Retry in a rotated basis with a looser deflation test.
            let v = DVector::from_fn(n, |i, _| 1.0 + i as f64);
            let h = DMatrix::identity(n, n) - &v * v.transpose() * (2.0 / v.norm_squared());
            Schur::try_new(&h * c * &h, 8.0 * f64::EPSILON, 5000 * n.max(1))?
                .unpack()
                .1
        }
    };
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        if i + 1 < n && t[(i + 1, i)] != 0.0 {
            let (a, b, cc, d) = (t[(i, i)], t[(i, i + 1)], t[(i + 1, i)], t[(i + 1, i + 1)]);
            let mid = 0.5 * (a + d);
            let disc = 0.25 * (a - d) * (a - d) + b * cc;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(Complex::new(mid + r, 0.0));
                out.push(Complex::new(mid - r, 0.0));
            } else {
                let r = (-disc).sqrt();
                out.push(Complex::new(mid, r));
                out.push(Complex::new(mid, -r));
            }
            i += 2;
        } else {
            out.push(Complex::new(t[(i, i)], 0.0));
            i += 1;
        }
    }
    out.iter()
        .all(|z| z.re.is_finite() && z.im.is_finite())
        .then_some(out)
}

/// Real eigenvalues of `c` with multiplicities.
///
/// Eigenvalues whose imaginary part is at most `tol * max(1, ‖c‖_F)` are
/// treated as real. Real values are clustered by single linkage at the same
/// threshold and replaced by the cluster mean. The geometric multiplicity of
/// each cluster is `n - rank(c - λI)` at that threshold.
pub fn real_spectrum(c: &DMatrix<f64>, tol: f64) -> Result<Spectrum> {
    let n = c.nrows();
    if c.ncols() != n {
        return Err(Error::InvalidInput(
            "real_spectrum needs a square matrix".into(),
        ));
    }
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let scale = c.norm().max(1.0);
    let eigs = schur_eigenvalues(c).ok_or_else(|| {
        Error::Numerical(format!(
            "real Schur iteration did not converge for a {n}x{n} matrix (‖C‖_F = {:e})",
            c.norm()
        ))
    })?;

    let thresh = tol * scale;
    let mut reals = Vec::new();
    let mut complex_pairs = Vec::new();
    for z in &eigs {
        if z.im.abs() <= thresh {
            reals.push(z.re);
        } else if z.im > 0.0 {
            complex_pairs.push((z.re, z.im));
        }
    }
    reals.sort_by(|a, b| b.total_cmp(a));

    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for v in reals {
        match clusters.last_mut() {
            Some(cl) if cl.last().is_some_and(|&w| w - v <= thresh) => cl.push(v),
            _ => clusters.push(vec![v]),
        }
    }

    let real_eigs = clusters
        .into_iter()
        .map(|cl| {
            let value = cl.iter().sum::<f64>() / cl.len() as f64;
            let algebraic = cl.len();
            let shifted = c - DMatrix::identity(n, n) * value;
            let r = rank_scaled(&shifted, tol, scale);
            let geometric = (n - r).clamp(1, algebraic);
            RealEigenvalue {
                value,
                algebraic,
                geometric,
            }
        })
        .collect();

    Ok(Spectrum {
        real_eigs,
        has_complex: !complex_pairs.is_empty(),
        complex_pairs,
    })
}

/// Zero-pads a wide matrix to square.
fn square_pad(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.ncols(), m.ncols());
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn singular_values(m: &DMatrix<f64>) -> DVector<f64> {
    if m.is_empty() {
        return DVector::zeros(0);
    }
    SVD::new(m.clone(), false, false).singular_values
}

/// Number of singular values above `tol * σ_max`.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().fold(0.0_f64, |a, &v| a.max(v));
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

/// Number of singular values above `tol * scale`.
pub fn rank_scaled(m: &DMatrix<f64>, tol: f64, scale: f64) -> usize {
    singular_values(m)
        .iter()
        .filter(|&&s| s > tol * scale)
        .count()
}

/// Orthonormal basis of the right nullspace, relative threshold `tol * σ_max`.
pub fn nullspace_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let top = singular_values(m).iter().fold(0.0_f64, |a, &v| a.max(v));
    nullspace_scaled(m, tol, top)
}

/// Orthonormal basis of the right nullspace, absolute threshold `tol * scale`.
pub fn nullspace_scaled(m: &DMatrix<f64>, tol: f64, scale: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if ncols == 0 {
        return DMatrix::zeros(0, 0);
    }
    if scale == 0.0 || m.iter().all(|&v| v == 0.0) {
        return DMatrix::identity(ncols, ncols);
    }
    // Pad to at least ncols rows so the SVD returns a full V.
    let padded = if m.nrows() < ncols {
        square_pad(m)
    } else {
        m.clone()
    };
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let kept = svd
        .singular_values
        .iter()
        .filter(|&&s| s > tol * scale)
        .count();
    let null_dim = ncols - kept;
    let mut basis = DMatrix::zeros(ncols, null_dim);
    for (k, row) in (kept..ncols).enumerate() {
        basis.set_column(k, &v_t.row(row).transpose());
    }
    basis
}

/// Solution set `{particular + N z}` of a symmetric linear system.
#[derive(Clone, Debug)]
pub struct AffineSolutionSet {
    pub particular: DVector<f64>,
    /// Orthonormal basis of the nullspace of the system matrix.
    pub nullspace: DMatrix<f64>,
    pub consistent: bool,
    pub residual: f64,
}

/// Minimum-norm solution of `M x = v` together with `null(M)`.
///
/// Eigenvalues with `|λ| <= tol * max|λ|` are treated as zero; the system is
/// consistent when the residual is at most `tol * (‖M‖₂‖x‖ + ‖v‖)`.
pub fn solve_consistent(m: &SymMatrix, v: &DVector<f64>, tol: f64) -> Result<AffineSolutionSet> {
    solve_consistent_with(m, v, tol, tol)
}

/// As [`solve_consistent`] with separate rank and residual tolerances.
pub fn solve_consistent_with(
    m: &SymMatrix,
    v: &DVector<f64>,
    rank_tol: f64,
    residual_tol: f64,
) -> Result<AffineSolutionSet> {
    solve_consistent_scaled(m, v, rank_tol, residual_tol, 0.0, 0.0)
}

/// As [`solve_consistent_with`], with eigenvalues judged against
/// `max(m_scale, |λ|_max)` and the residual against `max(v_scale, ‖v‖)`.
/// Pass the sizes of the data `m` and `v` were formed from, so that values
/// that are zero up to cancellation count as zero.
pub fn solve_consistent_scaled(
    m: &SymMatrix,
    v: &DVector<f64>,
    rank_tol: f64,
    residual_tol: f64,
    m_scale: f64,
    v_scale: f64,
) -> Result<AffineSolutionSet> {
    let n = m.dim();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: v.len(),
        });
    }
    let eig = sym_eig(m);
    let top = eig.values.iter().fold(m_scale, |a, &l| a.max(l.abs()));
    let mut particular = DVector::zeros(n);
    let mut null_cols = Vec::new();
    for i in 0..n {
        let col = eig.vectors.column(i);
        let lam = eig.values[i];
        if top > 0.0 && lam.abs() > rank_tol * top {
            particular += col * (col.dot(v) / lam);
        } else {
            null_cols.push(col.into_owned());
        }
    }
    let nullspace = if null_cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&null_cols)
    };
    let residual = (m.as_matrix() * &particular - v).norm();
    let bound = residual_tol * (top * particular.norm() + v.norm().max(v_scale));
    Ok(AffineSolutionSet {
        particular,
        nullspace,
        consistent: residual <= bound,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sym(rows: &[&[f64]]) -> SymMatrix {
        SymMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![f64::NAN]]).is_err());
        assert!(SymMatrix::from_rows(&[vec![1.0, 2.0]]).is_err());
        assert!(SymMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn sym_eig_examples() {
        let e = sym_eig(&SymMatrix::from_diagonal(&[3.0, 1.0]).unwrap());
        assert_eq!(e.values.as_slice(), &[1.0, 3.0]);
        assert_relative_eq!(e.vectors[(1, 0)].abs(), 1.0);

        let e = sym_eig(&sym(&[&[2.0, 1.0], &[1.0, 2.0]]));
        assert_relative_eq!(e.values[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(e.values[1], 3.0, epsilon = 1e-14);
        assert_relative_eq!(
            (e.vectors[(0, 0)] + e.vectors[(1, 0)]).abs(),
            0.0,
            epsilon = 1e-14
        );

        let e = sym_eig(&SymMatrix::zeros(3));
        assert!(e.values.iter().all(|&v| v == 0.0));
        assert_relative_eq!(
            (e.vectors.transpose() * &e.vectors - DMatrix::identity(3, 3)).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn psd_examples() {
        assert_eq!(is_psd(&SymMatrix::identity(2), 1e-9), PsdVerdict::Yes);
        assert_eq!(
            is_psd(&SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap(), 1e-9),
            PsdVerdict::No
        );
        assert_eq!(
            is_psd(&SymMatrix::from_diagonal(&[1.0, -1e-15]).unwrap(), 1e-9),
            PsdVerdict::Yes
        );
        assert_eq!(
            is_psd(&SymMatrix::from_diagonal(&[1.0, -1.5e-9]).unwrap(), 1e-9),
            PsdVerdict::Ambiguous
        );
    }

    #[test]
    fn real_spectrum_examples() {
        let nil = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        let s = real_spectrum(&nil, 1e-9).unwrap();
        assert!(!s.has_complex);
        assert_eq!(
            s.real_eigs,
            vec![RealEigenvalue {
                value: 0.0,
                algebraic: 2,
                geometric: 1
            }]
        );

        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let s = real_spectrum(&rot, 1e-9).unwrap();
        assert!(s.has_complex);
        assert!(s.real_eigs.is_empty());

        let d = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 2.0, 5.0]));
        let s = real_spectrum(&d, 1e-9).unwrap();
        assert!(!s.has_complex);
        assert_eq!(s.real_eigs.len(), 2);
        assert_eq!((s.real_eigs[0].value, s.real_eigs[0].algebraic), (5.0, 1));
        assert_eq!(s.real_eigs[1].value, 2.0);
        assert_eq!((s.real_eigs[1].algebraic, s.real_eigs[1].geometric), (2, 2));
    }

    #[test]
    fn rank_and_nullspace_examples() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(rank(&m, 1e-9), 1);
        let n = nullspace_basis(&m, 1e-9);
        assert_eq!(n.ncols(), 1);
        assert_relative_eq!(n[(1, 0)].abs(), 1.0, epsilon = 1e-14);

        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(rank(&i3, 1e-9), 3);
        assert_eq!(nullspace_basis(&i3, 1e-9).ncols(), 0);

        let ones = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(rank(&ones, 1e-9), 1);
        let n = nullspace_basis(&ones, 1e-9);
        assert_eq!(n.ncols(), 1);
        assert_relative_eq!(n[(0, 0)] + n[(1, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(n[(0, 0)].abs(), 0.5_f64.sqrt(), epsilon = 1e-14);

        // wide matrix
        let wide = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        assert_eq!(nullspace_basis(&wide, 1e-9).ncols(), 2);
    }

    #[test]
    fn solve_consistent_examples() {
        let m = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        let s = solve_consistent(&m, &DVector::from_vec(vec![2.0, 0.0]), 1e-9).unwrap();
        assert!(s.consistent);
        assert_eq!(s.particular.as_slice(), &[2.0, 0.0]);
        assert_eq!(s.nullspace.ncols(), 1);

        let s = solve_consistent(&m, &DVector::from_vec(vec![2.0, 1.0]), 1e-9).unwrap();
        assert!(!s.consistent);

        let s = solve_consistent(
            &SymMatrix::identity(2),
            &DVector::from_vec(vec![1.0, 1.0]),
            1e-9,
        )
        .unwrap();
        assert!(s.consistent);
        assert_eq!(s.nullspace.ncols(), 0);
        assert_relative_eq!(s.particular[0], 1.0, epsilon = 1e-15);
    }

    fn arb_sym(max_n: usize) -> impl Strategy<Value = SymMatrix> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(-10.0..10.0_f64, n * n)
                .prop_map(move |v| SymMatrix::symmetrized(DMatrix::from_vec(n, n, v)))
        })
    }

    proptest! {
        #[test]
        fn sym_eig_reconstructs(m in arb_sym(50)) {
            let e = sym_eig(&m);
            let rebuilt = &e.vectors * DMatrix::from_diagonal(&e.values) * e.vectors.transpose();
            let err = (m.as_matrix() - rebuilt).norm();
            prop_assert!(err <= 1e-8 * m.frobenius().max(1.0));
            let n = m.dim();
            let ortho = (e.vectors.transpose() * &e.vectors - DMatrix::identity(n, n)).norm();
            prop_assert!(ortho <= 1e-10);
            prop_assert!(e.values.as_slice().windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn is_psd_agrees_with_min_eigenvalue(m in arb_sym(8)) {
            let tol = 1e-9;
            let vals = sym_eig(&m).values;
            let lo = vals[0];
            let scale = vals.iter().fold(1.0_f64, |a, &v| a.max(v.abs()));
            if lo.abs() > 2.0 * tol * scale {
                let expect = if lo > 0.0 { PsdVerdict::Yes } else { PsdVerdict::No };
                prop_assert_eq!(is_psd(&m, tol), expect);
            }
        }

        #[test]
        fn solve_consistent_residual(m in arb_sym(8), seed in proptest::collection::vec(-5.0..5.0_f64, 8), drop in 0usize..3) {
            // knock out `drop` eigenvalues to make M singular, rhs in range(M)
            let n = m.dim();
            let e = sym_eig(&m);
            let mut vals = e.values.clone();
            for i in 0..drop.min(n - 1) { vals[i] = 0.0; }
            let ms = SymMatrix::symmetrized(&e.vectors * DMatrix::from_diagonal(&vals) * e.vectors.transpose());
            let x0 = DVector::from_iterator(n, seed.iter().copied().take(n));
            let v = ms.as_matrix() * &x0;
            let s = solve_consistent(&ms, &v, 1e-9).unwrap();
            prop_assert!(s.consistent);
            let mnorm = vals.iter().fold(0.0_f64, |a, &l| a.max(l.abs()));
            let res = (ms.as_matrix() * &s.particular - &v).norm();
            prop_assert!(res <= 1e-8 * (mnorm * s.particular.norm() + v.norm()) + 1e-300);
            let cross = s.nullspace.transpose() * &s.particular;
            prop_assert!(cross.norm() <= 1e-8 * (1.0 + s.particular.norm()));
        }
    }

    #[test]
    fn real_spectrum_recovers_diagonalizable() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.gen_range(2..=7);
            // distinct values on a coarse lattice, some repeated
            let pool: Vec<f64> = (0..3).map(|k| -3.0 + 2.5 * k as f64).collect();
            let d: Vec<f64> = (0..n).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
            let p = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.0 })
                + DMatrix::from_fn(n, n, |_, _| rng.gen_range(-0.4..0.4));
            let pinv = p.clone().try_inverse().unwrap();
            let c = &p * DMatrix::from_diagonal(&DVector::from_vec(d.clone())) * pinv;
            let s = real_spectrum(&c, 1e-6).unwrap();
            assert!(!s.has_complex);
            let mut distinct = d.clone();
            distinct.sort_by(|a, b| b.total_cmp(a));
            distinct.dedup();
            assert_eq!(s.real_eigs.len(), distinct.len());
            for (e, want) in s.real_eigs.iter().zip(&distinct) {
                assert!((e.value - want).abs() <= 1e-6);
                assert_eq!(e.geometric, e.algebraic);
                assert_eq!(e.algebraic, d.iter().filter(|&&v| v == *want).count());
            }
        }
    }
}

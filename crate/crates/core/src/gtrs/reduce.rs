use nalgebra::{DMatrix, DVector};

use super::{GtrsInstance, SolveOptions};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::sdc::Diagonalization;

/// Maps a reduced solution back: `x = P [y; 0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lift {
    pub congruence: DMatrix<f64>,
    /// Diagonal coordinates kept in the reduced instance.
    pub keep: Vec<usize>,
}

impl Lift {
    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        let mut full = DVector::zeros(self.congruence.ncols());
        for (k, &i) in self.keep.iter().enumerate() {
            full[i] = y[k];
        }
        &self.congruence * full
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Reduction {
    /// The common null coordinates carry no linear terms: drop them.
    Reduced { instance: GtrsInstance, lift: Lift },
    /// Stationarity on the common null coordinates fixes `μ`.
    Pinned { mu: f64 },
    /// Stationarity on the common null coordinates has no solution for any `μ`.
    Inconsistent,
}

/// Splits diagonal coordinates into those with `β_i ≠ 0` or `α_i ≠ 0` and
/// the tail `α_i = β_i = 0`. On the tail, stationarity reads
/// `0 = -(ã_i + μ b̃_i)` with `ã = Pᵀa`, `b̃ = Pᵀb`.
pub fn reduce_instance(
    inst: &GtrsInstance,
    diag: &Diagonalization,
    opts: &SolveOptions,
) -> Result<Reduction> {
    let n = inst.dim();
    let p = &diag.congruence;
    if p.nrows() != n || diag.alpha.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: diag.alpha.len(),
        });
    }
    let tail: Vec<usize> = (0..n)
        .filter(|&i| diag.alpha[i] == 0.0 && diag.beta[i] == 0.0)
        .collect();
    if tail.is_empty() {
        return Err(Error::ContractViolation(
            "reduce_instance needs coordinates with α = β = 0".into(),
        ));
    }
    let keep: Vec<usize> = (0..n).filter(|i| !tail.contains(i)).collect();
    let at = p.transpose() * &inst.a;
    let bt = p.transpose() * &inst.b;
    let small = |v: f64, i: usize, base: f64| {
        v.abs() <= opts.solve_tol * base * p.column(i).norm().max(1.0)
    };
    let a_base = inst.a.norm().max(1.0);
    let b_base = inst.b.norm().max(1.0);

    let pins: Vec<(usize, f64)> = tail
        .iter()
        .filter(|&&i| !small(bt[i], i, b_base))
        .map(|&i| (i, -at[i] / bt[i]))
        .collect();
    if pins.is_empty() {
        if tail.iter().any(|&i| !small(at[i], i, a_base)) {
            return Ok(Reduction::Inconsistent);
        }
        let y = |v: &DVector<f64>| DVector::from_iterator(keep.len(), keep.iter().map(|&i| v[i]));
        let instance = GtrsInstance::new(
            SymMatrix::from_diagonal(&keep.iter().map(|&i| diag.alpha[i]).collect::<Vec<_>>())?,
            SymMatrix::from_diagonal(&keep.iter().map(|&i| diag.beta[i]).collect::<Vec<_>>())?,
            y(&at),
            y(&bt),
            inst.c,
        )?;
        return Ok(Reduction::Reduced {
            instance,
            lift: Lift {
                congruence: p.clone(),
                keep,
            },
        });
    }
    let mu = pins[0].1;
    let agrees = tail
        .iter()
        .all(|&i| small(at[i] + mu * bt[i], i, a_base + mu.abs() * b_base));
    Ok(if agrees {
        Reduction::Pinned { mu }
    } else {
        Reduction::Inconsistent
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdc::simultaneous_diagonalize;

    fn inst(a: [f64; 2], b: [f64; 2]) -> GtrsInstance {
        let m = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        GtrsInstance::new(
            m.clone(),
            m,
            DVector::from_vec(a.to_vec()),
            DVector::from_vec(b.to_vec()),
            -1.0,
        )
        .unwrap()
    }

    #[test]
    fn reduction_examples() {
        let opts = SolveOptions::default();
        let i = inst([-3.0, 0.0], [0.0, 0.0]);
        let d = simultaneous_diagonalize(&i.a_mat, &i.b_mat, &opts.tol).unwrap();
        match reduce_instance(&i, &d, &opts).unwrap() {
            Reduction::Reduced { instance, lift } => {
                assert_eq!(instance.dim(), 1);
                assert_eq!(instance.a_mat.as_matrix()[(0, 0)], 1.0);
                assert_eq!(instance.b_mat.as_matrix()[(0, 0)], 1.0);
                assert_eq!(instance.a[0].abs(), 3.0);
                let x = lift.apply(&DVector::from_vec(vec![-instance.a[0].signum()]));
                assert!((x[0] - 1.0).abs() < 1e-12 && x[1] == 0.0);
            }
            other => panic!("{other:?}"),
        }
        let i = inst([-3.0, 1.0], [0.0, 0.0]);
        assert_eq!(
            reduce_instance(&i, &d, &opts).unwrap(),
            Reduction::Inconsistent
        );
        let i = inst([-3.0, 1.0], [0.0, 2.0]);
        match reduce_instance(&i, &d, &opts).unwrap() {
            Reduction::Pinned { mu } => assert!((mu + 0.5).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }
}

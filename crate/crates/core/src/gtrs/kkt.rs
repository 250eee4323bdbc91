use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::{GtrsInstance, SolveOptions};
use crate::error::Result;
use crate::linalg::{min_eigenvalue, solve_consistent_scaled, sym_eig, SymMatrix};

/// Residuals of the global optimality conditions at `(x, μ)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KktCertificate {
    pub x: Vec<f64>,
    pub mu: f64,
    /// `‖(A + μB)x + a + μb‖`.
    pub r_stationarity: f64,
    /// `g(x)`.
    pub g_value: f64,
    /// `|μ g(x)|`.
    pub r_complementarity: f64,
    /// `λ_min(A + μB)`.
    pub psd_margin: f64,
    /// `f(x)`.
    pub objective: f64,
}

impl KktCertificate {
    /// All four conditions hold to `threshold · scale`; the PSD margin is
    /// held to a tenth of that.
    pub fn passes(&self, threshold: f64, scale: f64) -> bool {
        let t = threshold * scale;
        self.mu >= 0.0
            && self.r_stationarity <= t
            && self.g_value <= t
            && self.r_complementarity <= t
            && self.psd_margin >= -0.1 * t
    }
}

pub fn check_kkt(inst: &GtrsInstance, x: &DVector<f64>, mu: f64) -> KktCertificate {
    let pencil = inst.a_mat.pencil(&inst.b_mat, mu);
    let r = pencil.as_matrix() * x + &inst.a + &inst.b * mu;
    let g = inst.g(x);
    KktCertificate {
        x: x.iter().copied().collect(),
        mu,
        r_stationarity: r.norm(),
        g_value: g,
        r_complementarity: (mu * g).abs(),
        psd_margin: min_eigenvalue(&pencil),
        objective: inst.f(x),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum KktAtMu {
    Optimal(KktCertificate),
    /// Stationary points exist but none satisfies the complementarity and
    /// feasibility conditions.
    Unattained,
    /// `(A + μB)x = -(a + μb)` has no solution.
    Inconsistent,
}

/// Solves the optimality conditions with the multiplier fixed at `mu`.
///
/// The stationary points form `x_p + N z`; on that set `g` is the quadratic
/// `q(z) = zᵀHz + 2hᵀz + q₀` with `H = NᵀBN`, `h = Nᵀ(Bx_p + b)`. For
/// `μ = 0` any point with `q ≤ 0` will do; for `μ > 0` a root of `q` is
/// needed.
pub fn kkt_at_mu(inst: &GtrsInstance, mu: f64, opts: &SolveOptions) -> Result<KktAtMu> {
    let pencil = inst.a_mat.pencil(&inst.b_mat, mu);
    let rhs = -(&inst.a + &inst.b * mu);
    let data = inst.a_mat.max_abs() + mu.abs() * inst.b_mat.max_abs();
    let rhs_data = inst.a.norm() + mu.abs() * inst.b.norm();
    let sol =
        solve_consistent_scaled(&pencil, &rhs, opts.tol.rank, opts.solve_tol, data, rhs_data)?;
    if !sol.consistent {
        return Ok(KktAtMu::Inconsistent);
    }
    let xp = sol.particular;
    let q0 = inst.g(&xp);
    let tol_q = opts.tol_g * inst.g_scale();
    if mu.abs() <= opts.tol_mu && q0 <= tol_q {
        return Ok(KktAtMu::Optimal(check_kkt(inst, &xp, mu)));
    }
    let n_basis = &sol.nullspace;
    if n_basis.ncols() == 0 {
        return Ok(if q0.abs() <= tol_q {
            KktAtMu::Optimal(check_kkt(inst, &xp, mu))
        } else {
            KktAtMu::Unattained
        });
    }
    let h = SymMatrix::symmetrized(n_basis.transpose() * inst.b_mat.as_matrix() * n_basis);
    let lin = n_basis.transpose() * (inst.b_mat.as_matrix() * &xp + &inst.b);
    Ok(match quadratic_root(&h, &lin, q0, tol_q) {
        Some(z) => KktAtMu::Optimal(check_kkt(inst, &(xp + n_basis * z), mu)),
        None => KktAtMu::Unattained,
    })
}

/// A point where `q(z) = zᵀHz + 2hᵀz + q₀` vanishes (to `tol_q`), or `None`
/// when `0` lies outside the range of `q`.
pub(crate) fn quadratic_root(
    h: &SymMatrix,
    lin: &DVector<f64>,
    q0: f64,
    tol_q: f64,
) -> Option<DVector<f64>> {
    let d = h.dim();
    if q0.abs() <= tol_q {
        return Some(DVector::zeros(d));
    }
    // Work with q₀ > 0 by flipping the sign of q.
    let s = q0.signum();
    let eig = sym_eig(&h.scaled(s));
    let top = eig.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let eps = 1e-10 * top.max(1.0);
    let hl = eig.vectors.transpose() * lin * s;
    let q0s = q0 * s;

    // Negative curvature reaches any level below q₀.
    if eig.values[0] < -eps {
        let u = eig.vectors.column(0).into_owned();
        let t = line_root(eig.values[0], hl[0], q0s)?;
        return Some(u * t);
    }
    // A flat direction with a linear term.
    let lin_scale = hl.amax().max(f64::MIN_POSITIVE);
    for k in 0..d {
        if eig.values[k].abs() <= eps && hl[k].abs() > 1e-10 * lin_scale.max(1.0) {
            let t = -q0s / (2.0 * hl[k]);
            return Some(eig.vectors.column(k) * t);
        }
    }
    // Convex with minimizer z_min = -H⁺h; q descends to q₀ - hᵀH⁺h.
    let mut zmin = DVector::zeros(d);
    let mut drop = 0.0;
    for k in 0..d {
        if eig.values[k] > eps {
            zmin -= eig.vectors.column(k) * (hl[k] / eig.values[k]);
            drop += hl[k] * hl[k] / eig.values[k];
        }
    }
    let qmin = q0s - drop;
    if qmin > tol_q {
        return None;
    }
    // Along t ↦ t z_min, q(t) = q₀ - 2t·drop + t²·drop with a root in [0, 1].
    let t = line_root(drop, -drop, q0s).unwrap_or(1.0).clamp(0.0, 1.0);
    Some(zmin * t)
}

/// Smallest nonnegative root of `α t² + 2β t + γ` (`γ > 0`), if any.
fn line_root(alpha: f64, beta: f64, gamma: f64) -> Option<f64> {
    if alpha.abs() <= 1e-300 {
        return (beta < 0.0).then(|| -gamma / (2.0 * beta));
    }
    let disc = beta * beta - alpha * gamma;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Roots r₁ r₂ = γ/α; compute the larger-magnitude root stably first.
    let big = -(beta + beta.signum() * sq) / alpha;
    let small = if big != 0.0 {
        gamma / (alpha * big)
    } else {
        0.0
    };
    [big, small]
        .into_iter()
        .filter(|t| t.is_finite() && *t >= 0.0)
        .min_by(|x, y| x.total_cmp(y))
        .or_else(|| {
            // Only negative roots; a root at -t is reached by walking along -u.
            [big, small]
                .into_iter()
                .filter(|t| t.is_finite())
                .min_by(|x, y| x.abs().total_cmp(&y.abs()))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(a: f64, b: f64, la: f64, lb: f64, c: f64) -> GtrsInstance {
        GtrsInstance::new(
            SymMatrix::from_diagonal(&[a]).unwrap(),
            SymMatrix::from_diagonal(&[b]).unwrap(),
            DVector::from_vec(vec![la]),
            DVector::from_vec(vec![lb]),
            c,
        )
        .unwrap()
    }

    #[test]
    fn check_kkt_examples() {
        let inst = one_d(1.0, 1.0, -3.0, 0.0, -1.0);
        let c = check_kkt(&inst, &DVector::from_vec(vec![1.0]), 2.0);
        assert_eq!(
            (c.r_stationarity, c.g_value, c.r_complementarity),
            (0.0, 0.0, 0.0)
        );
        assert!((c.psd_margin - 3.0).abs() < 1e-12);
        assert!(c.passes(1e-7, inst.scale()));

        let c = check_kkt(&inst, &DVector::from_vec(vec![3.0]), 0.0);
        assert_eq!(c.r_stationarity, 0.0);
        assert_eq!(c.g_value, 8.0);
        assert!(!c.passes(1e-7, inst.scale()));

        let c = check_kkt(&inst, &DVector::from_vec(vec![1.0]), 1.0);
        assert!((c.r_stationarity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kkt_at_mu_examples() {
        let opts = SolveOptions::default();
        let inst = one_d(-1.0, 1.0, 0.0, 0.0, -1.0);
        match kkt_at_mu(&inst, 1.0, &opts).unwrap() {
            KktAtMu::Optimal(c) => {
                assert!((c.x[0].abs() - 1.0).abs() < 1e-12);
                assert!((c.objective + 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }

        let inst = one_d(1.0, 1.0, -3.0, 0.0, -1.0);
        match kkt_at_mu(&inst, 2.0, &opts).unwrap() {
            KktAtMu::Optimal(c) => assert!((c.x[0] - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        let inst = GtrsInstance::new(
            SymMatrix::zeros(2),
            SymMatrix::identity(2),
            DVector::from_vec(vec![1.0, 0.0]),
            DVector::zeros(2),
            -1.0,
        )
        .unwrap();
        assert_eq!(kkt_at_mu(&inst, 0.0, &opts).unwrap(), KktAtMu::Inconsistent);
    }

    #[test]
    fn quadratic_root_cases() {
        let h = SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap();
        // convex, min below zero
        let z = quadratic_root(&h, &DVector::from_vec(vec![-2.0, 0.0]), 1.0, 1e-12).unwrap();
        let q =
            |z: &DVector<f64>| h.quad(z) + 2.0 * DVector::from_vec(vec![-2.0, 0.0]).dot(z) + 1.0;
        assert!(q(&z).abs() < 1e-12);
        // convex, min above zero
        assert!(quadratic_root(&h, &DVector::zeros(2), 1.0, 1e-12).is_none());
        // flat direction with a linear term
        let lin = DVector::from_vec(vec![0.0, 3.0]);
        let z = quadratic_root(&h, &lin, 1.0, 1e-12).unwrap();
        assert!((h.quad(&z) + 2.0 * lin.dot(&z) + 1.0).abs() < 1e-12);
        // negative start needs positive curvature
        let z = quadratic_root(&h, &DVector::zeros(2), -4.0, 1e-12).unwrap();
        assert!((h.quad(&z) - 4.0).abs() < 1e-12);
        let nd = SymMatrix::from_diagonal(&[-1.0, 0.0]).unwrap();
        assert!(quadratic_root(&nd, &DVector::zeros(2), -4.0, 1e-12).is_none());
    }
}

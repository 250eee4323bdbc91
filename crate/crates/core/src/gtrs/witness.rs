//! Certificates of unboundedness: a feasible ray along which `f → -∞`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{GtrsInstance, SolveOptions};
use crate::linalg::{nullspace_scaled, solve_consistent_with, sym_eig, SymMatrix};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RaySample {
    pub t: f64,
    pub f: f64,
    pub g: f64,
}

/// Ray `x₀ + t d`, `t ≥ 0`, with `g ≤ 0` along it and `f` unbounded below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayWitness {
    pub x0: Vec<f64>,
    pub direction: Vec<f64>,
    pub samples: Vec<RaySample>,
}

const CHECK_TS: [f64; 4] = [0.0, 10.0, 100.0, 1000.0];

impl RayWitness {
    fn build(inst: &GtrsInstance, x0: &DVector<f64>, d: &DVector<f64>) -> Self {
        let samples = CHECK_TS
            .iter()
            .map(|&t| {
                let x = x0 + d * t;
                RaySample {
                    t,
                    f: inst.f(&x),
                    g: inst.g(&x),
                }
            })
            .collect();
        Self {
            x0: x0.iter().copied().collect(),
            direction: d.iter().copied().collect(),
            samples,
        }
    }

    /// Re-evaluates the ray on `inst`: `g` stays below `tol · g_scale ·
    /// (1 + ‖x‖²)` and `f` decreases strictly at `t = 0, 10, 100, 1000`.
    pub fn verify(&self, inst: &GtrsInstance, tol: f64) -> bool {
        let x0 = DVector::from_column_slice(&self.x0);
        let d = DVector::from_column_slice(&self.direction);
        if d.norm() == 0.0 || x0.len() != inst.dim() || d.len() != inst.dim() {
            return false;
        }
        let mut last = f64::INFINITY;
        for &t in &CHECK_TS {
            let x = &x0 + &d * t;
            let (f, g) = (inst.f(&x), inst.g(&x));
            if g > tol * inst.g_scale() * (1.0 + x.norm_squared()) || f >= last {
                return false;
            }
            last = f;
        }
        true
    }
}

/// A point with `g ≤ 0`, as deep inside the feasible set as is cheap.
pub(crate) fn feasible_point(inst: &GtrsInstance, opts: &SolveOptions) -> Option<DVector<f64>> {
    let n = inst.dim();
    let eig = sym_eig(&inst.b_mat);
    if eig.values[0] < -opts.tol.psd * inst.g_scale() {
        // Far enough along a negative curvature direction.
        let w = eig.vectors.column(0).into_owned();
        let (al, be, ga) = (eig.values[0], inst.b.dot(&w), inst.c);
        let disc = (be * be - al * ga).max(0.0).sqrt();
        let root = ((-be - disc) / al).max((-be + disc) / al).max(0.0);
        let x = w * (root + 1.0);
        return (inst.g(&x) <= 0.0).then_some(x);
    }
    let sol =
        solve_consistent_with(&inst.b_mat, &(-&inst.b), opts.tol.rank, opts.solve_tol).ok()?;
    let xp = sol.particular;
    if sol.consistent {
        return (inst.g(&xp) <= opts.tol_g * inst.g_scale()).then_some(xp);
    }
    // b has a component outside range(B): g is linear along it.
    let u = &sol.nullspace * (sol.nullspace.transpose() * &inst.b);
    let slope = 2.0 * inst.b.dot(&u);
    if slope == 0.0 || n == 0 {
        return None;
    }
    let t = -(inst.g(&xp) + 1.0) / slope;
    Some(xp + u * t)
}

/// `λ_min(A + μB)` maximized over `μ ∈ [0, hi]` by golden-section search.
fn best_shift(inst: &GtrsInstance, hi: f64) -> f64 {
    let h = |mu: f64| crate::linalg::min_eigenvalue(&inst.a_mat.pencil(&inst.b_mat, mu));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, hi);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..120 {
        if hc >= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + phi * (b - a);
            hd = h(d);
        }
        if b - a <= 1e-12 * (1.0 + b.abs()) {
            break;
        }
    }
    if h(0.0) >= hc.max(hd) {
        0.0
    } else {
        0.5 * (a + b)
    }
}

/// Directions worth testing: eigenvectors of `A`, `B` and the best-shifted
/// pencil, the null space of `B` and `A` restricted to it, the common null
/// space of `A` and `B`, and the null space of the pencil at `mu_hint`.
fn direction_pool(
    inst: &GtrsInstance,
    mu_hint: Option<f64>,
    opts: &SolveOptions,
) -> Vec<DVector<f64>> {
    let n = inst.dim();
    let mut pool: Vec<DVector<f64>> = Vec::new();
    let push_cols = |pool: &mut Vec<DVector<f64>>, m: &DMatrix<f64>| {
        for j in 0..m.ncols() {
            pool.push(m.column(j).into_owned());
        }
    };
    let scale = inst.scale();
    let shift_hi = 1e3 * (1.0 + inst.a_mat.frobenius() / inst.b_mat.frobenius().max(1e-300));
    let mu_hat = best_shift(inst, shift_hi.min(1e12));
    for mu in [Some(mu_hat), mu_hint].into_iter().flatten() {
        push_cols(
            &mut pool,
            &sym_eig(&inst.a_mat.pencil(&inst.b_mat, mu)).vectors,
        );
    }
    push_cols(&mut pool, &sym_eig(&inst.a_mat).vectors);
    push_cols(&mut pool, &sym_eig(&inst.b_mat).vectors);

    let nb = nullspace_scaled(
        inst.b_mat.as_matrix(),
        opts.tol.rank,
        inst.b_mat.max_abs().max(1e-300),
    );
    if nb.ncols() > 0 {
        let restricted = SymMatrix::symmetrized(nb.transpose() * inst.a_mat.as_matrix() * &nb);
        push_cols(&mut pool, &(&nb * sym_eig(&restricted).vectors));
        // f restricted to null(B) ∩ {bᵀd = 0} decreasing linearly
        push_cols(&mut pool, &nb);
    }
    let stacked = {
        let mut m = DMatrix::zeros(2 * n, n);
        m.view_mut((0, 0), (n, n)).copy_from(inst.a_mat.as_matrix());
        m.view_mut((n, 0), (n, n)).copy_from(inst.b_mat.as_matrix());
        m
    };
    let common = nullspace_scaled(&stacked, opts.tol.rank, scale);
    if common.ncols() > 0 {
        // On the common null space f and g are linear with slopes Nᵀa, Nᵀb.
        let sa = common.transpose() * &inst.a;
        let sb = common.transpose() * &inst.b;
        let sbb = sb.norm_squared();
        let perp = if sbb > 0.0 {
            &sa - &sb * (sa.dot(&sb) / sbb)
        } else {
            sa.clone()
        };
        pool.push(&common * -perp);
        pool.push(&common * -&sb);
        push_cols(&mut pool, &common);
    }
    if let Some(mu) = mu_hint {
        let pencil = inst.a_mat.pencil(&inst.b_mat, mu);
        let np = nullspace_scaled(
            pencil.as_matrix(),
            opts.tol.rank,
            pencil.max_abs().max(1e-300),
        );
        if np.ncols() > 0 {
            let v = &inst.a + &inst.b * mu;
            pool.push(&np * (np.transpose() * -v));
            push_cols(&mut pool, &np);
        }
    }
    pool.retain(|d| d.norm() > 1e-12);
    for d in pool.iter_mut() {
        d.normalize_mut();
    }
    pool
}

/// Directions `v` in `span{u, w}` where the restricted `B` form vanishes or
/// is extremal, or the restricted `A` form is extremal.
fn plane_directions(inst: &GtrsInstance, u: &DVector<f64>, w: &DVector<f64>) -> Vec<DVector<f64>> {
    let mut w2 = w - u * u.dot(w);
    let nrm = w2.norm();
    if nrm <= 1e-8 {
        return Vec::new();
    }
    w2 /= nrm;
    let basis = DMatrix::from_columns(&[u.clone(), w2]);
    let b2 = basis.transpose() * inst.b_mat.as_matrix() * &basis;
    let a2 = basis.transpose() * inst.a_mat.as_matrix() * &basis;
    let mut coeffs: Vec<(f64, f64)> = Vec::new();
    for m in [&a2, &b2] {
        let e = SymMatrix::symmetrized(m.clone());
        let v = sym_eig(&e).vectors;
        coeffs.push((v[(0, 0)], v[(1, 0)]));
        coeffs.push((v[(0, 1)], v[(1, 1)]));
    }
    // isotropic directions of the restricted B: b11 + 2 b12 τ + b22 τ² = 0
    let (b11, b12, b22) = (b2[(0, 0)], b2[(0, 1)], b2[(1, 1)]);
    if b22.abs() > 1e-300 {
        let disc = b12 * b12 - b11 * b22;
        if disc >= 0.0 {
            for s in [-1.0, 1.0] {
                let tau = (-b12 + s * disc.sqrt()) / b22;
                coeffs.push((1.0, tau));
            }
        }
    } else if b12.abs() > 1e-300 {
        coeffs.push((1.0, -b11 / (2.0 * b12)));
        coeffs.push((0.0, 1.0));
    }
    coeffs
        .into_iter()
        .map(|(p, q)| {
            let v = &basis * DVector::from_vec(vec![p, q]);
            let n = v.norm();
            v / n
        })
        .filter(|v| v.iter().all(|x| x.is_finite()))
        .collect()
}

/// Builds a valid ray from `x0` along `±d` if the quadratic coefficients
/// allow one.
fn try_direction(
    inst: &GtrsInstance,
    x0: &DVector<f64>,
    d: &DVector<f64>,
    tol: f64,
) -> Option<RayWitness> {
    let scale = inst.scale();
    let eps = 1e-12 * scale;
    let g_b = inst.b_mat.quad(d);
    let f_a = inst.a_mat.quad(d);
    if g_b > eps || f_a > eps {
        return None;
    }
    for s in [1.0, -1.0] {
        let ds = d * s;
        let g_l = ds.dot(&(inst.b_mat.as_matrix() * x0 + &inst.b));
        let f_l = ds.dot(&(inst.a_mat.as_matrix() * x0 + &inst.a));
        let g0 = inst.g(x0);
        let f_ok = f_a < -eps || f_l < -1e-9 * scale;
        let g_flat = g_b >= -eps;
        if !f_ok || (g_flat && g_l > 1e-12 * scale) {
            continue;
        }
        // Start past the last root of g along the ray.
        let shift = if g_flat {
            if g0 > 0.0 && g_l < 0.0 {
                -g0 / (2.0 * g_l)
            } else {
                0.0
            }
        } else {
            let disc = (g_l * g_l - g_b * g0).max(0.0).sqrt();
            ((-g_l - disc) / g_b).max((-g_l + disc) / g_b).max(0.0)
        };
        let start = x0 + &ds * (shift * 1.01 + 1.0);
        let w = RayWitness::build(inst, &start, &ds);
        if w.verify(inst, tol) {
            return Some(w);
        }
    }
    None
}

/// Searches for a feasible ray along which `f` is unbounded below.
pub fn find_ray_witness(
    inst: &GtrsInstance,
    mu_hint: Option<f64>,
    opts: &SolveOptions,
) -> Option<RayWitness> {
    let tol = 1e-8;
    let base = feasible_point(inst, opts)?;
    let pool = direction_pool(inst, mu_hint, opts);
    let mut starts = vec![base.clone()];
    for d in pool.iter().take(8) {
        let ad = inst.a_mat.as_matrix() * d;
        if ad.norm() > 1e-12 {
            for s in [1e-3, 1e-1] {
                for sign in [1.0, -1.0] {
                    let x = &base + &ad * (sign * s / ad.norm());
                    if inst.g(&x) <= 0.0 {
                        starts.push(x);
                    }
                }
            }
        }
    }
    for x0 in &starts {
        for d in &pool {
            if let Some(w) = try_direction(inst, x0, d, tol) {
                return Some(w);
            }
        }
    }
    for i in 0..pool.len() {
        for j in (i + 1)..pool.len() {
            for d in plane_directions(inst, &pool[i], &pool[j]) {
                for x0 in &starts {
                    if let Some(w) = try_direction(inst, x0, &d, tol) {
                        return Some(w);
                    }
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn witness_for_empty_multiplier_set() {
        // min -x₂² s.t. x₁² ≤ 1
        let inst = GtrsInstance::new(
            SymMatrix::from_diagonal(&[0.0, -1.0]).unwrap(),
            SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap(),
            DVector::zeros(2),
            DVector::zeros(2),
            -1.0,
        )
        .unwrap();
        let w = find_ray_witness(&inst, None, &SolveOptions::default()).unwrap();
        assert!(w.verify(&inst, 1e-8));
    }

    #[test]
    fn witness_for_coupled_linear_descent() {
        // min 2x₁x₂ s.t. x₁² ≤ 1: x₁ = -1/2, x₂ → ∞
        let inst = GtrsInstance::new(
            SymMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            SymMatrix::from_diagonal(&[1.0, 0.0]).unwrap(),
            DVector::zeros(2),
            DVector::zeros(2),
            -1.0,
        )
        .unwrap();
        let w = find_ray_witness(&inst, None, &SolveOptions::default()).unwrap();
        assert!(w.verify(&inst, 1e-8));
    }

    #[test]
    fn bounded_problem_has_no_ray() {
        let inst = GtrsInstance::new(
            SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap(),
            SymMatrix::identity(2),
            DVector::zeros(2),
            DVector::zeros(2),
            -1.0,
        )
        .unwrap();
        assert!(find_ray_witness(&inst, None, &SolveOptions::default()).is_none());
    }
}

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::GtrsInstance;
use crate::error::{Error, Result};
use crate::interval::MuInterval;

/// `φ(μ) = g(x(μ))` at a PD pencil, with `x(μ) = -(A + μB)⁻¹(a + μb)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiSample {
    pub mu: f64,
    pub x_mu: Vec<f64>,
    pub phi: f64,
}

fn stationary_point(inst: &GtrsInstance, mu: f64) -> Option<DVector<f64>> {
    let pencil = inst.a_mat.pencil(&inst.b_mat, mu).into_inner();
    let chol = pencil.cholesky()?;
    let x = -chol.solve(&(&inst.a + &inst.b * mu));
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Evaluates `φ` at `mu`; the pencil must be positive definite there.
pub fn phi(inst: &GtrsInstance, mu: f64) -> Result<PhiSample> {
    let x = stationary_point(inst, mu).ok_or_else(|| {
        Error::ContractViolation(format!("A + μB is not positive definite at μ = {mu}"))
    })?;
    Ok(PhiSample {
        mu,
        phi: inst.g(&x),
        x_mu: x.iter().copied().collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierLocation {
    /// `φ(μ*) = 0` inside the PD interval.
    Interior,
    /// `φ < 0` on the whole interval: `μ*` is its left end.
    LeftEndpoint,
    /// `φ > 0` on the whole interval: `μ*` is its (finite) right end.
    RightEndpoint,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSearch {
    pub mu: f64,
    pub location: MultiplierLocation,
    pub iterations: usize,
    /// `x(μ*)` when `μ*` is interior.
    pub x: Option<Vec<f64>>,
    pub phi: Option<f64>,
}

/// Locates the multiplier on `interval`, the closure of the PD interval
/// intersected with `[0, ∞)`.
///
/// `φ` is strictly decreasing on the PD interval, so its sign decides: a
/// sign change is bisected; a negative `φ` throughout puts `μ*` on the left
/// end, a positive one on the right end. A right ray is bracketed by
/// stepping `μ₀ + w` with `w = 1, 4, 16, …` (at most 60 steps).
pub fn find_multiplier(
    inst: &GtrsInstance,
    interval: &MuInterval,
    tol_mu: f64,
    tol_g: f64,
    max_iter: usize,
) -> Result<MultiplierSearch> {
    if !interval.is_wide() {
        return Err(Error::ContractViolation(
            "find_multiplier needs an interval with a nonempty interior".into(),
        ));
    }
    let lo = interval.lower().max(0.0);
    let hi = interval.upper();
    let accept = tol_g * inst.g_scale();
    let mut iterations = 0;
    let interior = |mu: f64, x: DVector<f64>, phi: f64, iterations: usize| MultiplierSearch {
        mu,
        location: MultiplierLocation::Interior,
        iterations,
        x: Some(x.iter().copied().collect()),
        phi: Some(phi),
    };

    let (mut l, mut r) = (lo, hi);
    let (mut phi_l, mut phi_r) = (None, None);
    let (mut l_moved, mut r_moved) = (false, false);
    let mut best_r: Option<(f64, DVector<f64>, f64)> = None;

    // A left end strictly inside the PD interval (μ = 0 cut) can be probed.
    if lo > interval.lower() {
        if let Some(x) = stationary_point(inst, lo) {
            let p = inst.g(&x);
            if p <= accept {
                return Ok(interior(lo, x, p, 0));
            }
            phi_l = Some(p);
            l_moved = true;
        }
    }

    if hi.is_infinite() {
        let mut width = 1.0;
        let mut expansions = 0;
        loop {
            let m = lo + width;
            iterations += 1;
            let x = stationary_point(inst, m)
                .ok_or_else(|| Error::Numerical(format!("pencil lost definiteness at μ = {m}")))?;
            let p = inst.g(&x);
            if p.abs() <= accept {
                let (m, x, p) = polish(inst, (m, x, p), (l, phi_l), (f64::INFINITY, None));
                return Ok(interior(m, x, p, iterations));
            }
            if p < 0.0 {
                r = m;
                phi_r = Some(p);
                r_moved = true;
                best_r = Some((m, x, p));
                break;
            }
            l = m;
            phi_l = Some(p);
            l_moved = true;
            expansions += 1;
            if expansions >= 60 {
                return Err(Error::Convergence {
                    what: "bracket expansion for φ on a right ray".into(),
                    iterations,
                    lo: l,
                    hi: f64::INFINITY,
                });
            }
            width *= 4.0;
        }
    }

    loop {
        let m = 0.5 * (l + r);
        if r - l <= tol_mu * (1.0 + m.abs()) {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::Convergence {
                what: "bisection on φ".into(),
                iterations,
                lo: l,
                hi: r,
            });
        }
        iterations += 1;
        // Close to an endpoint the factorization may see a singular pencil.
        let Some(x) = stationary_point(inst, m) else {
            break;
        };
        let p = inst.g(&x);
        if p.abs() <= accept {
            let (m, x, p) = polish(inst, (m, x, p), (l, phi_l), (r, phi_r));
            return Ok(interior(m, x, p, iterations));
        }
        if p > 0.0 {
            l = m;
            phi_l = Some(p);
            l_moved = true;
        } else {
            r = m;
            phi_r = Some(p);
            r_moved = true;
            best_r = Some((m, x, p));
        }
    }

    let endpoint = |mu: f64, location| MultiplierSearch {
        mu,
        location,
        iterations,
        x: None,
        phi: None,
    };
    if !l_moved {
        return Ok(endpoint(lo, MultiplierLocation::LeftEndpoint));
    }
    if !r_moved {
        return Ok(endpoint(hi, MultiplierLocation::RightEndpoint));
    }
    // Bracket collapsed before |φ| fell below tolerance: keep the feasible side.
    let (mu, x, p) = best_r.expect("right side moved");
    Ok(interior(mu, x, p, iterations))
}

/// Refines an accepted bisection iterate by false position (Illinois
/// variant) inside the last bracket. Only improvements in `|φ|` are kept, so
/// the result never leaves the tolerance the caller accepted.
fn polish(
    inst: &GtrsInstance,
    current: (f64, DVector<f64>, f64),
    left: (f64, Option<f64>),
    right: (f64, Option<f64>),
) -> (f64, DVector<f64>, f64) {
    let (m, _, p) = &current;
    let (mut a, mut fa, mut b, mut fb) = if *p > 0.0 {
        match right {
            (r, Some(fr)) => (*m, *p, r, fr),
            _ => return current,
        }
    } else {
        match left {
            (l, Some(fl)) => (l, fl, *m, *p),
            _ => return current,
        }
    };
    let mut best = current;
    let mut side = 0i8;
    for _ in 0..30 {
        if best.2 == 0.0 || b - a <= 4.0 * f64::EPSILON * (1.0 + b.abs()) {
            break;
        }
        let mu = b - fb * (b - a) / (fb - fa);
        if !(mu > a && mu < b) {
            break;
        }
        let Some(x) = stationary_point(inst, mu) else {
            break;
        };
        let v = inst.g(&x);
        if v.abs() < best.2.abs() {
            best = (mu, x, v);
        }
        if v > 0.0 {
            a = mu;
            fa = v;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        } else {
            b = mu;
            fb = v;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymMatrix;

    fn example_one() -> GtrsInstance {
        GtrsInstance::new(
            SymMatrix::from_diagonal(&[1.0]).unwrap(),
            SymMatrix::from_diagonal(&[1.0]).unwrap(),
            DVector::from_vec(vec![-3.0]),
            DVector::from_vec(vec![0.0]),
            -1.0,
        )
        .unwrap()
    }

    #[test]
    fn phi_examples() {
        let inst = example_one();
        assert_eq!(phi(&inst, 0.0).unwrap().phi, 8.0);
        assert!(phi(&inst, 2.0).unwrap().phi.abs() < 1e-14);
        assert!((phi(&inst, 5.0).unwrap().phi + 0.75).abs() < 1e-15);
        assert!(matches!(phi(&inst, -1.0), Err(Error::ContractViolation(_))));
    }

    #[test]
    fn find_multiplier_examples() {
        let inst = example_one();
        let ray = MuInterval::from_bounds(0.0, f64::INFINITY);
        let s = find_multiplier(&inst, &ray, 1e-10, 1e-9, 200).unwrap();
        assert_eq!(s.location, MultiplierLocation::Interior);
        assert!((s.mu - 2.0).abs() <= 1e-10);

        let mut inst2 = example_one();
        inst2.a[0] = -0.5;
        // φ(0) = -0.75: the pencil at 0 is PD but 0 is the left end of the
        // multiplier interval
        let s = find_multiplier(&inst2, &ray, 1e-10, 1e-9, 200).unwrap();
        assert_eq!(s.location, MultiplierLocation::LeftEndpoint);
        assert_eq!(s.mu, 0.0);

        let inst3 = GtrsInstance::new(
            SymMatrix::from_diagonal(&[-1.0, 2.0]).unwrap(),
            SymMatrix::from_diagonal(&[1.0, -1.0]).unwrap(),
            DVector::zeros(2),
            DVector::zeros(2),
            -1.0,
        )
        .unwrap();
        let s =
            find_multiplier(&inst3, &MuInterval::from_bounds(1.0, 2.0), 1e-10, 1e-9, 200).unwrap();
        assert_eq!(s.location, MultiplierLocation::LeftEndpoint);
        assert_eq!(s.mu, 1.0);
    }
}

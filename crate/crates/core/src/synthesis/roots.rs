//! One-dimensional bracketing and a damped Gauss–Newton (Levenberg–Marquardt)
//! solver for small nonlinear systems.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Bisection on a sign change of `f` in `[a, b]`.
pub fn bisect<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(Error::NoConvergence {
            reason: format!("no sign change on [{a}, {b}]"),
            residual: fa.abs().min(fb.abs()),
        });
    }
    for _ in 0..400 {
        let m = 0.5 * (a + b);
        if (b - a).abs() <= tol || m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for a maximum of a unimodal `f` on `[a, b]`.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative finite-difference step for the Jacobian.
    pub fd_step: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-11, max_iter: 80, fd_step: 1e-7 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    pub residuals: Vec<f64>,
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn inf_norm(r: &[f64]) -> f64 {
    r.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Minimize `‖r(x)‖²` inside the box `[lo, hi]` with a damped Gauss–Newton
/// iteration and a forward-difference Jacobian. Converged when
/// `max |r_i| ≤ tol`. Residual evaluation errors count as rejected steps.
pub fn levenberg_marquardt<F>(f: F, x0: &[f64], lo: &[f64], hi: &[f64], opts: SolveOptions) -> Result<SolveOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    let clamp = |x: &mut [f64]| {
        for i in 0..n {
            x[i] = x[i].clamp(lo[i], hi[i]);
        }
    };
    let mut x = x0.to_vec();
    clamp(&mut x);
    let mut r = f(&x)?;
    let m = r.len();
    let mut cost: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    for iter in 0..opts.max_iter {
        if inf_norm(&r) <= opts.tol {
            return Ok(SolveOutcome { norm: inf_norm(&r), x, residuals: r, iterations: iter, converged: true });
        }
        let mut jac = DMatrix::<f64>::zeros(m, n);
        for j in 0..n {
            let h = opts.fd_step * (1.0 + x[j].abs());
            let mut xp = x.clone();
            // Step inward at the upper bound.
            xp[j] = if x[j] + h > hi[j] { x[j] - h } else { x[j] + h };
            let rp = f(&xp)?;
            let dh = xp[j] - x[j];
            for i in 0..m {
                jac[(i, j)] = (rp[i] - r[i]) / dh;
            }
        }
        let rv = DVector::from_column_slice(&r);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &rv;
        let mut accepted = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += lambda * (1.0 + jtj[(k, k)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let mut xn: Vec<f64> = (0..n).map(|k| x[k] + step[k]).collect();
            clamp(&mut xn);
            if let Ok(rn) = f(&xn) {
                let cn: f64 = rn.iter().map(|v| v * v).sum();
                if cn < cost {
                    x = xn;
                    r = rn;
                    cost = cn;
                    lambda = (lambda / 5.0).max(1e-12);
                    accepted = true;
                    break;
                }
            }
            lambda *= 8.0;
        }
        if !accepted {
            break;
        }
    }
    let norm = inf_norm(&r);
    Ok(SolveOutcome { converged: norm <= opts.tol, norm, x, residuals: r, iterations: opts.max_iter })
}

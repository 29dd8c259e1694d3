//! Dormand–Prince 5(4) integrator for complex matrix-valued linear ODEs.

use crate::linalg::CMat;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-10, atol: 1e-12 }
    }
}

impl Tolerance {
    pub fn new(rtol: f64, atol: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && (1e-15..=1e-2).contains(&x);
        if !ok(rtol) || !ok(atol) {
            return Err(Error::invalid(format!("tolerances out of range: rtol={rtol}, atol={atol}")));
        }
        Ok(Tolerance { rtol, atol })
    }

    pub fn halved(self) -> Self {
        Tolerance { rtol: self.rtol / 2.0, atol: self.atol / 2.0 }
    }
}

const MAX_STEPS: usize = 5_000_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn combo(y: &CMat, h: f64, terms: &[(f64, &CMat)]) -> CMat {
    let mut out = y.clone();
    for &(w, k) in terms {
        if w != 0.0 {
            out.zip_apply(k, |o, x| *o += x * (h * w));
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `t0` through every time in `stops`
/// (ascending, all > `t0`), landing exactly on each stop. `stops` should
/// include the drive's segment boundaries so no step straddles a kink.
/// `observe` is called with each stop and the state there.
pub fn integrate<F, O>(f: F, t0: f64, y0: CMat, stops: &[f64], tol: Tolerance, mut observe: O) -> Result<CMat>
where
    F: Fn(f64, &CMat) -> CMat,
    O: FnMut(usize, f64, &CMat),
{
    let mut t = t0;
    let mut y = y0;
    let span = stops.last().map_or(0.0, |&e| e - t0);
    if span <= 0.0 {
        for (i, &s) in stops.iter().enumerate() {
            observe(i, s, &y);
        }
        return Ok(y);
    }
    let mut h = (span / 100.0).min(0.05);
    let mut k1 = f(t, &y);
    let mut steps = 0usize;
    for (idx, &stop) in stops.iter().enumerate() {
        while t < stop {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::TooManySteps { t, steps: MAX_STEPS });
            }
            let last = stop - t <= h * (1.0 + 1e-12);
            let step = if last { stop - t } else { h };
            if step < 1e-13 * t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { t });
            }
            let k2 = f(t + C2 * step, &combo(&y, step, &[(A21, &k1)]));
            let k3 = f(t + C3 * step, &combo(&y, step, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(t + C4 * step, &combo(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(t + C5 * step, &combo(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                t + step,
                &combo(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = combo(&y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let t_new = if last { stop } else { t + step };
            let k7 = f(t_new, &y_new);
            let err_vec = combo(
                &CMat::zeros(y.nrows(), y.ncols()),
                step,
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
            );
            let mut err: f64 = 0.0;
            for ((e, a), b) in err_vec.iter().zip(y.iter()).zip(y_new.iter()) {
                let sc = tol.atol + tol.rtol * a.norm().max(b.norm());
                err = err.max(e.norm() / sc);
            }
            if !err.is_finite() {
                return Err(Error::StepUnderflow { t });
            }
            if err <= 1.0 {
                t = t_new;
                y = y_new;
                k1 = k7;
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    h = step * fac;
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-13 * t.abs().max(1.0) {
                    return Err(Error::StepUnderflow { t });
                }
            }
        }
        observe(idx, stop, &y);
    }
    Ok(y)
}

/// Right-hand side of the Schrödinger equation, `-i H y`.
pub fn schrodinger_rhs(h: &CMat, y: &CMat) -> CMat {
    (h * y) * C64::new(0.0, -1.0)
}

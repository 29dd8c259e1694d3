//! Globally adaptive Gauss–Kronrod (7, 15) quadrature for scalar and
//! vector-valued integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug)]
pub struct QuadOptions {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel: 1e-12, abs: 1e-14, max_intervals: 4000 }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, dim: usize, a: f64, b: f64) -> Panel {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &s in nodes {
            f(mid + s * half * x, &mut buf);
            for d in 0..dim {
                kron[d] += w * buf[d];
                if k % 2 == 1 {
                    gauss[d] += WG[k / 2] * buf[d];
                }
            }
        }
    }
    let mut err: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= half;
        gauss[d] *= half;
        err = err.max((kron[d] - gauss[d]).abs());
    }
    Panel { a, b, value: kron, err }
}

/// Integrate a vector-valued function over each interval between consecutive
/// `breaks` and sum. `f(t, out)` fills `out` (length `dim`).
pub fn integrate_vec<F>(mut f: F, dim: usize, breaks: &[f64], opts: QuadOptions) -> Result<Vec<f64>>
where
    F: FnMut(f64, &mut [f64]),
{
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            heap.push(gk15(&mut f, dim, w[0], w[1]));
        }
    }
    let a0 = breaks.first().copied().unwrap_or(0.0);
    let b0 = breaks.last().copied().unwrap_or(0.0);
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for p in heap.iter() {
            for (t, v) in total.iter_mut().zip(&p.value) {
                *t += v;
            }
            err += p.err;
        }
        let scale = total.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if err <= opts.abs.max(opts.rel * scale) {
            return Ok(total);
        }
        if heap.len() >= opts.max_intervals {
            return Err(Error::Quadrature { a: a0, b: b0, err });
        }
        let worst = heap.pop().expect("non-empty heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature { a: worst.a, b: worst.b, err });
        }
        heap.push(gk15(&mut f, dim, worst.a, mid));
        heap.push(gk15(&mut f, dim, mid, worst.b));
    }
}

pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if b == a {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if b > a { (a, b, 1.0) } else { (b, a, -1.0) };
    let v = integrate_vec(|t, out| out[0] = f(t), 1, &[lo, hi], opts)?;
    Ok(sign * v[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0, QuadOptions::default()).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_and_reversed_limits() {
        let v = integrate(|x| (20.0 * x).cos(), 0.0, 3.0, QuadOptions::default()).unwrap();
        assert!((v - (60f64).sin() / 20.0).abs() < 1e-12);
        let w = integrate(|x| (20.0 * x).cos(), 3.0, 0.0, QuadOptions::default()).unwrap();
        assert!((v + w).abs() < 1e-15);
    }

    #[test]
    fn vector_integrand_across_breaks() {
        let v = integrate_vec(
            |t, out| {
                out[0] = t.abs();
                out[1] = 1.0;
            },
            2,
            &[-1.0, 0.0, 2.0],
            QuadOptions::default(),
        )
        .unwrap();
        assert!((v[0] - 2.5).abs() < 1e-13);
        assert!((v[1] - 3.0).abs() < 1e-13);
    }
}

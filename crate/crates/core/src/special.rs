//! Special functions: complex log-gamma and the error function wrapper.

use std::f64::consts::PI;

use crate::C64;

/// `ln Γ(z)` for `Re z > 0`, continuous in `z` (not the principal log of Γ).
pub fn ln_gamma(z: C64) -> C64 {
    assert!(z.re > 0.0, "ln_gamma requires Re z > 0");
    let mut z = z;
    let mut shift = C64::new(0.0, 0.0);
    while z.re < 15.0 {
        shift += z.ln();
        z += 1.0;
    }
    // Stirling series with Bernoulli coefficients B_2k / (2k(2k-1)).
    const COEF: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut term = inv;
    let mut series = C64::new(0.0, 0.0);
    for c in COEF {
        series += term * c;
        term *= inv2;
    }
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln() + series - shift
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

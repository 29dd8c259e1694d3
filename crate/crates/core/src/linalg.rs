//! Small dense complex matrices and the handful of factorizations the crate needs.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result, C64};

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn from_rows(rows: &[&[C64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| rows[i][j])
}

pub fn real_matrix(n: usize, m: usize, data: &[f64]) -> CMat {
    CMat::from_fn(n, m, |i, j| c(data[i * m + j], 0.0))
}

pub fn diag(entries: &[C64]) -> CMat {
    CMat::from_diagonal(&CVec::from_column_slice(entries))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn pauli_x() -> CMat {
    real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> CMat {
    from_rows(&[&[c(0.0, 0.0), c(0.0, -1.0)], &[c(0.0, 1.0), c(0.0, 0.0)]])
}

pub fn pauli_z() -> CMat {
    real_matrix(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `exp(-i σ φ / 2)` for a Pauli matrix σ.
fn rotation(sigma: &CMat, phi: f64) -> CMat {
    identity(2) * c((phi / 2.0).cos(), 0.0) - sigma * c(0.0, (phi / 2.0).sin())
}

pub fn rot_x(phi: f64) -> CMat {
    rotation(&pauli_x(), phi)
}

pub fn rot_y(phi: f64) -> CMat {
    rotation(&pauli_y(), phi)
}

pub fn rot_z(phi: f64) -> CMat {
    rotation(&pauli_z(), phi)
}

/// Reverse the level ordering, `P M P` with `P` the exchange matrix.
pub fn reverse_levels(m: &CMat) -> CMat {
    let n = m.nrows();
    CMat::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)])
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn unitarity_defect(u: &CMat) -> f64 {
    max_abs(&(u.adjoint() * u - identity(u.nrows())))
}

pub fn hermiticity_defect(h: &CMat) -> f64 {
    max_abs(&(h - h.adjoint()))
}

pub fn is_real(m: &CMat) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

pub fn eigh(h: &CMat) -> Eigen {
    let n = h.nrows();
    let (values, vectors) = if is_real(h) {
        let re = DMatrix::from_fn(n, n, |i, j| h[(i, j)].re);
        let e = SymmetricEigen::new(re);
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors.map(|x| c(x, 0.0)))
    } else {
        let e = SymmetricEigen::new(h.clone());
        (e.eigenvalues.as_slice().to_vec(), e.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Eigen {
        values: order.iter().map(|&k| values[k]).collect(),
        vectors: CMat::from_fn(n, n, |i, j| vectors[(i, order[j])]),
    }
}

pub fn eigvalsh(h: &CMat) -> Vec<f64> {
    let n = h.nrows();
    let mut values: Vec<f64> = if is_real(h) {
        let re = DMatrix::from_fn(n, n, |i, j| h[(i, j)].re);
        SymmetricEigen::new(re).eigenvalues.as_slice().to_vec()
    } else {
        h.clone().symmetric_eigenvalues().as_slice().to_vec()
    };
    values.sort_by(f64::total_cmp);
    values
}

/// Rotate every column so that its largest-magnitude component is real positive.
pub fn fix_largest_component(vectors: &mut CMat) {
    for mut col in vectors.column_iter_mut() {
        let (mut best, mut k) = (-1.0, 0);
        for (i, z) in col.iter().enumerate() {
            // Prefer the earlier index on near-ties so the choice is stable.
            if z.norm() > best + 1e-12 {
                best = z.norm();
                k = i;
            }
        }
        let z = col[k];
        if z.norm() > 0.0 {
            let phase = z.conj() / z.norm();
            col.iter_mut().for_each(|x| *x *= phase);
        }
    }
}

/// `exp(-i H t)` for Hermitian `H`.
pub fn expm_hermitian(h: &CMat, t: f64) -> CMat {
    let e = eigh(h);
    let phases: Vec<C64> = e.values.iter().map(|&w| C64::from_polar(1.0, -w * t)).collect();
    &e.vectors * diag(&phases) * e.vectors.adjoint()
}

/// Square root of a Hermitian positive semidefinite matrix, negative
/// eigenvalues clamped to zero.
pub fn psd_sqrt(m: &CMat) -> CMat {
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let e = eigh(&h);
    let roots: Vec<C64> = e.values.iter().map(|&w| c(w.max(0.0).sqrt(), 0.0)).collect();
    &e.vectors * diag(&roots) * e.vectors.adjoint()
}

pub fn check_square(m: &CMat, n: usize) -> Result<()> {
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension { expected: n, got: m.nrows().max(m.ncols()) });
    }
    Ok(())
}

/// Frobenius distance minimized over a global phase, `min_φ ‖u − e^{iφ} v‖`.
pub fn gate_distance(u: &CMat, v: &CMat) -> Result<f64> {
    check_square(v, u.nrows())?;
    let overlap = trace(&(v.adjoint() * u)).norm();
    let sq = u.norm_squared() + v.norm_squared() - 2.0 * overlap;
    Ok(sq.max(0.0).sqrt())
}

/// The global phase `e^{iφ}` minimizing `‖u − e^{iφ} v‖`.
pub fn best_phase(u: &CMat, v: &CMat) -> C64 {
    let t = trace(&(v.adjoint() * u));
    if t.norm() == 0.0 {
        c(1.0, 0.0)
    } else {
        t / t.norm()
    }
}

/// Wrap an angle into (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let y = x - two_pi * (x / two_pi).round();
    if y <= -std::f64::consts::PI {
        y + two_pi
    } else {
        y
    }
}

/// Wrap an angle defined modulo π into (−π/2, π/2].
pub fn wrap_half(x: f64) -> f64 {
    wrap_angle(2.0 * x) / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let h = from_rows(&[
            &[c(2.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)],
            &[c(0.0, -1.0), c(-1.0, 0.0), c(0.5, 0.0)],
            &[c(0.0, 0.0), c(0.5, 0.0), c(0.3, 0.0)],
        ]);
        let e = eigh(&h);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        let d = diag(&e.values.iter().map(|&x| c(x, 0.0)).collect::<Vec<_>>());
        let back = &e.vectors * d * e.vectors.adjoint();
        assert!(max_abs(&(back - h)) < 1e-12);
    }

    #[test]
    fn rotations_follow_half_angle_convention() {
        assert!(gate_distance(&rot_x(PI), &pauli_x()).unwrap() < 1e-12);
        assert!(max_abs(&(rot_z(PI) - diag(&[c(0.0, -1.0), c(0.0, 1.0)]))) < 1e-15);
        assert!(max_abs(&(rot_x(0.0) - identity(2))) < 1e-15);
    }

    #[test]
    fn distance_between_identity_and_x_is_two() {
        assert!((gate_distance(&identity(2), &pauli_x()).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_angle_range() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!((wrap_half(PI) - 0.0).abs() < 1e-12);
    }

    #[test]
    fn expm_matches_pauli_rotation() {
        let h = pauli_x() * c(0.5, 0.0);
        assert!(max_abs(&(expm_hermitian(&h, 1.3) - rot_x(1.3))) < 1e-13);
    }
}

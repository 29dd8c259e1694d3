//! Gate library, phase-insensitive gate comparison and state tomography.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::{Deserialize, Serialize};

use crate::dynamics::{adiabatic_frames, evolve_density};
use crate::linalg::{self, c, CMat};
use crate::model::{DriveSignal, SystemModel};
use crate::ode::Tolerance;
use crate::parallel::Exec;
use crate::{Error, Result, C64};

pub use crate::linalg::gate_distance;

#[derive(Clone, Debug, PartialEq)]
pub struct GateMatrix {
    pub name: String,
    pub unitary: CMat,
}

impl GateMatrix {
    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }
}

fn four(entries: [[C64; 4]; 4]) -> CMat {
    CMat::from_fn(4, 4, |i, j| entries[i][j])
}

/// Named gates: `I`, `X`, `Y`, `Z`, `H`, `S`, `T`, `RX`, `RY`, `RZ`, `PHASE`
/// (angle required for the last four), `I4`, `ISWAP`, `SWAP`, `SQRT_SWAP`,
/// `SQRT_ISWAP`, `CNOT`. Names are case-insensitive.
pub fn standard_gate(name: &str, angle: Option<f64>) -> Result<GateMatrix> {
    let key = name.to_ascii_uppercase().replace(['-', ' '], "_");
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let need = || angle.ok_or_else(|| Error::invalid(format!("gate {name} needs an angle")));
    let unitary = match key.as_str() {
        "I" => linalg::identity(2),
        "X" => linalg::pauli_x(),
        "Y" => linalg::pauli_y(),
        "Z" => linalg::pauli_z(),
        "H" => linalg::real_matrix(2, 2, &[FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
        "S" => linalg::diag(&[one, c(0.0, 1.0)]),
        "T" => linalg::diag(&[one, C64::from_polar(1.0, PI / 4.0)]),
        "RX" => linalg::rot_x(need()?),
        "RY" => linalg::rot_y(need()?),
        "RZ" => linalg::rot_z(need()?),
        "PHASE" => linalg::diag(&[one, C64::from_polar(1.0, need()?)]),
        "I4" => linalg::identity(4),
        "ISWAP" => four([[one, z, z, z], [z, z, c(0.0, 1.0), z], [z, c(0.0, 1.0), z, z], [z, z, z, one]]),
        "SWAP" => four([[one, z, z, z], [z, z, one, z], [z, one, z, z], [z, z, z, one]]),
        "SQRT_ISWAP" => {
            let (a, b) = (c(FRAC_1_SQRT_2, 0.0), c(0.0, FRAC_1_SQRT_2));
            four([[one, z, z, z], [z, a, b, z], [z, b, a, z], [z, z, z, one]])
        }
        "SQRT_SWAP" => {
            let (a, b) = (c(0.5, 0.5), c(0.5, -0.5));
            four([[one, z, z, z], [z, a, b, z], [z, b, a, z], [z, z, z, one]])
        }
        "CNOT" => four([[one, z, z, z], [z, one, z, z], [z, z, z, one], [z, z, one, z]]),
        _ => return Err(Error::invalid(format!("unknown gate {name}"))),
    };
    Ok(GateMatrix { name: key, unitary })
}

/// `F(ρ, σ) = (tr √(√ρ σ √ρ))²`, clamped to [0, 1].
pub fn jozsa_fidelity(rho: &CMat, sigma: &CMat) -> Result<f64> {
    let n = rho.nrows();
    linalg::check_square(rho, n)?;
    linalg::check_square(sigma, n)?;
    for m in [rho, sigma] {
        if linalg::eigvalsh(&((m + m.adjoint()) * c(0.5, 0.0)))[0] < -1e-8 {
            return Err(Error::invalid("fidelity input is not positive semidefinite"));
        }
    }
    let s = linalg::psd_sqrt(rho);
    let inner = &s * sigma * &s;
    let root = linalg::psd_sqrt(&inner);
    let f = linalg::trace(&root).re.powi(2);
    Ok(f.clamp(0.0, 1.0))
}

fn ket(amps: &[C64]) -> CMat {
    CMat::from_column_slice(amps.len(), 1, amps)
}

/// State with Bloch vector `(x, y, z)` (ground at z = +1).
pub fn bloch_state(x: f64, y: f64, z: f64) -> CMat {
    let theta = z.clamp(-1.0, 1.0).acos();
    let phi = y.atan2(x);
    ket(&[c((theta / 2.0).cos(), 0.0), C64::from_polar((theta / 2.0).sin(), phi)])
}

/// `n` quasi-uniform pure states on the Bloch sphere (Fibonacci lattice).
pub fn fibonacci_states(n: usize) -> Vec<CMat> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = golden * i as f64;
            bloch_state(r * phi.cos(), r * phi.sin(), z)
        })
        .collect()
}

/// The six cardinal single-qubit states ±x, ±y, ±z.
pub fn cardinal_states() -> Vec<CMat> {
    vec![
        bloch_state(0.0, 0.0, 1.0),
        bloch_state(0.0, 0.0, -1.0),
        bloch_state(1.0, 0.0, 0.0),
        bloch_state(-1.0, 0.0, 0.0),
        bloch_state(0.0, 1.0, 0.0),
        bloch_state(0.0, -1.0, 0.0),
    ]
}

/// 36 product states of the cardinal bases; level index `2·q1 + q2`.
pub fn product_states() -> Vec<CMat> {
    let base = cardinal_states();
    let mut out = Vec::with_capacity(36);
    for a in &base {
        for b in &base {
            out.push(linalg::kron(a, b));
        }
    }
    out
}

/// Tomography input states for a system of dimension `dim`.
pub fn tomography_states(dim: usize, n: usize) -> Result<Vec<CMat>> {
    match dim {
        2 => {
            if n < 6 {
                return Err(Error::invalid("single-qubit tomography needs at least 6 states"));
            }
            Ok(fibonacci_states(n))
        }
        4 => Ok(product_states()),
        _ => Err(Error::invalid(format!("no tomography grid for dimension {dim}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub fidelities: Vec<f64>,
    pub mean: f64,
    pub error_rate: f64,
    pub n_grid: usize,
}

impl FidelityReport {
    pub fn from_fidelities(fidelities: Vec<f64>) -> Self {
        let n = fidelities.len();
        let mean = fidelities.iter().sum::<f64>() / n as f64;
        FidelityReport { fidelities, mean, error_rate: (1.0 - mean).clamp(0.0, 1.0), n_grid: n }
    }
}

/// Average Jozsa fidelity between exactly propagated states and the target
/// gate's images, with states and gate expressed in the transported
/// adiabatic frame at the drive's start and end.
pub fn average_gate_fidelity(
    model: &SystemModel,
    drive: &DriveSignal,
    target: &GateMatrix,
    grid_size: usize,
    tol: Tolerance,
    exec: Exec,
) -> Result<FidelityReport> {
    let n = model.dim();
    linalg::check_square(&target.unitary, n)?;
    let states = tomography_states(n, grid_size)?;
    let (t0, t1) = (drive.t_start(), drive.t_end());
    let frames = adiabatic_frames(model, drive, &[t0, t1])?;
    let (v0, v1) = (&frames[0], &frames[1]);
    let results = exec.map(&states, |psi| -> Result<f64> {
        let rho_ad = psi * psi.adjoint();
        let rho0 = v0 * &rho_ad * v0.adjoint();
        let traj = evolve_density(model, drive, &rho0, &[t0, t1], tol)?;
        let rho1 = v1.adjoint() * traj.density(1) * v1;
        let out = &target.unitary * psi;
        jozsa_fidelity(&rho1, &(&out * out.adjoint()))
    });
    let fidelities = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(FidelityReport::from_fidelities(fidelities))
}

/// Same average computed from a known adiabatic-frame unitary.
pub fn unitary_average_fidelity(u: &CMat, target: &GateMatrix, grid_size: usize) -> Result<FidelityReport> {
    let n = u.nrows();
    linalg::check_square(&target.unitary, n)?;
    let states = tomography_states(n, grid_size)?;
    let fidelities = states
        .iter()
        .map(|psi| {
            let a = u * psi;
            let b = &target.unitary * psi;
            (b.adjoint() * a)[(0, 0)].norm_sqr().clamp(0.0, 1.0)
        })
        .collect();
    Ok(FidelityReport::from_fidelities(fidelities))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hadamard_and_y_equivalence() {
        let h = standard_gate("h", None).unwrap();
        assert!((h.unitary[(1, 1)].re + FRAC_1_SQRT_2).abs() < 1e-16);
        let y = standard_gate("Y", None).unwrap().unitary;
        let rzrx = linalg::rot_z(PI) * linalg::rot_x(PI);
        assert!(gate_distance(&y, &rzrx).unwrap() < 1e-12);
        assert!(standard_gate("RX", None).is_err());
        assert!(standard_gate("bogus", None).is_err());
    }

    #[test]
    fn jozsa_reference_values() {
        let up = bloch_state(0.0, 0.0, 1.0);
        let down = bloch_state(0.0, 0.0, -1.0);
        let p_up = &up * up.adjoint();
        let p_down = &down * down.adjoint();
        assert!((jozsa_fidelity(&p_up, &p_up).unwrap() - 1.0).abs() < 1e-12);
        assert!(jozsa_fidelity(&p_up, &p_down).unwrap() < 1e-12);
        let mixed = linalg::identity(2) * c(0.5, 0.0);
        assert!((jozsa_fidelity(&mixed, &p_up).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn grids_are_normalized() {
        for s in fibonacci_states(50).iter().chain(product_states().iter()) {
            assert!((s.norm() - 1.0).abs() < 1e-12);
        }
        assert_eq!(product_states().len(), 36);
        assert!(tomography_states(2, 5).is_err());
    }
}

//! Drive synthesis for target gates: resonant Rabi pulses, LZSM single,
//! double and multi-passage drives, and two-qubit swap-family and CNOT
//! drives.

pub mod roots;
pub mod single;
pub mod two_qubit;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::fidelity::{average_gate_fidelity, FidelityReport, GateMatrix};
use crate::linalg::{self, CMat};
use crate::model::{DriveSignal, SystemModel};
use crate::ode::Tolerance;
use crate::parallel::Exec;
use crate::{Error, Result};

pub use single::{
    amp_freq_for_p, amplitude_candidates, gaussian_envelope, lzsm_drive, max_occupation, passage_occupation,
    phase_gate_time, phi_total, rabi_plan, select_probability, solve_double_passage, solve_multi_passage,
    solve_single_passage, rabi_solution, Envelope, LzsmPlan, RabiPlan,
};
pub use two_qubit::{
    amplitude_for_half_period, cnot_drive, crossing_gap, iswap_drive, literal_cnot_conditions, literal_iswap_conditions,
    solve_cnot, solve_iswap, solve_swap_family, Branch, Conditions, DriveShape, GapChoice, SearchBox, TwoQubitOptions,
    TwoQubitPlan,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Rabi,
    LzsmSingle,
    LzsmDouble,
    LzsmMulti,
    TwoQubit,
}

/// Which amplitude to take from the ladder of candidates satisfying the
/// interference condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AmplitudeChoice {
    /// Fastest gate.
    Smallest,
    /// Most adiabatic passages within the search range.
    Largest,
    Nearest(f64),
    Index(usize),
}

impl AmplitudeChoice {
    pub fn pick(&self, candidates: &[f64]) -> Result<f64> {
        if candidates.is_empty() {
            return Err(Error::Infeasible("no amplitude in the search range satisfies the phase condition".into()));
        }
        Ok(match *self {
            AmplitudeChoice::Smallest => candidates[0],
            AmplitudeChoice::Largest => candidates[candidates.len() - 1],
            AmplitudeChoice::Nearest(a) => {
                *candidates.iter().min_by(|x, y| (*x - a).abs().total_cmp(&(*y - a).abs())).expect("non-empty")
            }
            AmplitudeChoice::Index(i) => *candidates.get(i).ok_or_else(|| {
                Error::invalid(format!("amplitude index {i} out of range ({} candidates)", candidates.len()))
            })?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    /// Phase-minimized distance between the model propagator and the target.
    pub aim_distance: f64,
    pub residuals: Vec<f64>,
    /// `"aim"` for the impulse model, `"rwa"` for resonant pulses.
    pub model: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanDetails {
    Rabi(RabiPlan),
    Lzsm(LzsmPlan),
    TwoQubit(TwoQubitPlan),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSolution {
    pub target: String,
    pub method: Method,
    pub model: SystemModel,
    pub drive: DriveSignal,
    pub predicted: Predicted,
    pub plan: PlanDetails,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verification: Option<FidelityReport>,
}

impl SynthesisSolution {
    pub fn duration(&self) -> f64 {
        self.drive.duration()
    }

    /// Exact-integration tomography of the synthesized drive.
    pub fn verify(&mut self, target: &GateMatrix, grid: usize, tol: Tolerance, exec: Exec) -> Result<&FidelityReport> {
        let report = average_gate_fidelity(&self.model, &self.drive, target, grid, tol, exec)?;
        self.verification = Some(report);
        Ok(self.verification.as_ref().expect("just set"))
    }
}

/// Idle phases `(a, b)` in `[0, π)` with `D(b) · m · D(a) ≅ g` up to a global
/// phase, where `D(ζ) = diag(e^{iζ}, e^{−iζ})` is free precession on a 2×2
/// adiabatic block. Also returns the remaining distance.
pub fn dress(m: &CMat, g: &CMat) -> Result<(f64, f64, f64)> {
    linalg::check_square(m, 2)?;
    linalg::check_square(g, 2)?;
    let tiny = 1e-9;
    let arg = |z: crate::C64| z.arg();
    let (a2, b2) = if m[(0, 0)].norm() > tiny && m[(0, 1)].norm() > tiny && g[(0, 0)].norm() > tiny && g[(0, 1)].norm() > tiny {
        (
            arg(g[(0, 0)]) - arg(g[(0, 1)]) - arg(m[(0, 0)]) + arg(m[(0, 1)]),
            -(arg(g[(1, 1)]) - arg(g[(0, 1)]) - arg(m[(1, 1)]) + arg(m[(0, 1)])),
        )
    } else if m[(0, 1)].norm() > tiny && g[(0, 1)].norm() > tiny {
        // Off-diagonal block: only a − b is fixed.
        let d = arg(g[(1, 0)]) - arg(g[(0, 1)]) - arg(m[(1, 0)]) + arg(m[(0, 1)]);
        (0.0, -d)
    } else {
        // Diagonal block: only a + b is fixed.
        let s = -(arg(g[(1, 1)]) - arg(g[(0, 0)]) - arg(m[(1, 1)]) + arg(m[(0, 0)]));
        (0.0, s)
    };
    let norm = |x: f64| (x / 2.0).rem_euclid(PI);
    let (a, b) = (norm(a2), norm(b2));
    let dressed = precession(b) * m * precession(a);
    let dist = linalg::gate_distance(&dressed, g)?;
    Ok((a, b, dist))
}

/// `diag(e^{iζ}, e^{−iζ})`.
pub fn precession(zeta: f64) -> CMat {
    linalg::diag(&[crate::C64::from_polar(1.0, zeta), crate::C64::from_polar(1.0, -zeta)])
}

/// Idle time accumulating the adiabatic phase `ζ` across a gap.
pub fn idle_time(zeta: f64, gap: f64) -> f64 {
    2.0 * zeta / gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::standard_gate;

    #[test]
    fn dressing_recovers_known_phases() {
        let h = standard_gate("H", None).unwrap().unitary;
        let m = precession(0.4) * &h * precession(1.1);
        let (a, b, d) = dress(&m, &h).unwrap();
        assert!(d < 1e-12);
        let back = precession(b) * &m * precession(a);
        assert!(linalg::gate_distance(&back, &h).unwrap() < 1e-12);
    }

    #[test]
    fn dressing_off_diagonal_and_diagonal() {
        let x = standard_gate("X", None).unwrap().unitary;
        let y = standard_gate("Y", None).unwrap().unitary;
        let (_, _, d) = dress(&y, &x).unwrap();
        assert!(d < 1e-12);
        let z = standard_gate("Z", None).unwrap().unitary;
        let (_, _, d) = dress(&linalg::identity(2), &z).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn amplitude_choice() {
        let c = [1.0, 2.0, 3.5];
        assert_eq!(AmplitudeChoice::Nearest(3.0).pick(&c).unwrap(), 3.5);
        assert_eq!(AmplitudeChoice::Smallest.pick(&c).unwrap(), 1.0);
        assert!(AmplitudeChoice::Index(5).pick(&c).is_err());
    }
}

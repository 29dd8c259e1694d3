//! Single-qubit synthesis: resonant Rabi pulses and LZSM drives
//! `ε(t) = −A cos ωt` with one or more passages.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::roots::{bisect, golden_max};
use super::{dress, idle_time, precession, AmplitudeChoice, Method, PlanDetails, Predicted, SynthesisSolution};
use crate::aim::{self, adiabaticity_for_probability, aim_propagator, stokes_phase};
use crate::fidelity::GateMatrix;
use crate::linalg::{self, CMat};
use crate::model::{DriveSignal, Segment, SystemModel};
use crate::quadrature::{integrate, QuadOptions};
use crate::special::erf;
use crate::{Error, Result};

/// Free-precession time for phase `φ` at bias `ε`: `t = φ / √(ε² + Δ²)`.
pub fn phase_gate_time(delta: f64, eps: f64, phi: f64) -> Result<f64> {
    if !(phi >= 0.0) || !(delta > 0.0) {
        return Err(Error::invalid("phase must be non-negative and delta positive"));
    }
    Ok(phi / eps.hypot(delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Rectangular,
    Gaussian { truncation: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianEnvelope {
    pub a0: f64,
    pub sigma: f64,
    pub truncation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RabiPlan {
    pub delta: f64,
    pub n_periods: u32,
    pub omega: f64,
    /// Rectangular amplitude `A` (pulse area divided by the pulse duration).
    pub amplitude: f64,
    pub area: f64,
    pub t_pulse: f64,
    pub t_idle_pre: f64,
    pub t_idle_post: f64,
    pub envelope: Option<GaussianEnvelope>,
}

impl RabiPlan {
    /// Total idle time.
    pub fn t_idle(&self) -> f64 {
        self.t_idle_pre + self.t_idle_post
    }

    pub fn duration(&self) -> f64 {
        self.t_pulse + self.t_idle()
    }

    pub fn drive(&self) -> Result<DriveSignal> {
        let t0 = self.t_idle_pre;
        let t1 = t0 + self.t_pulse;
        let pulse = match self.envelope {
            None => Segment::Harmonic {
                t_start: t0,
                t_end: t1,
                offset: 0.0,
                amplitude: self.amplitude,
                omega: self.omega,
                phase: -self.omega * t0,
            },
            Some(g) => Segment::GaussianHarmonic {
                t_start: t0,
                t_end: t1,
                a0: g.a0,
                omega: self.omega,
                center: t0 + 0.5 * self.t_pulse,
                width: g.sigma,
                truncation: g.truncation,
                phase: -self.omega * t0,
            },
        };
        DriveSignal::new(vec![
            Segment::Constant { t_start: 0.0, t_end: t0, level: 0.0 },
            pulse,
            Segment::Constant { t_start: t1, t_end: t1 + self.t_idle_post, level: 0.0 },
        ])
    }
}

/// Peak amplitude and width of a Gaussian envelope truncated at `±G σ`
/// spanning `t_pulse`, with `∫ A(t) dt = area`.
pub fn gaussian_envelope(t_pulse: f64, truncation: f64, area: f64) -> Result<(f64, f64)> {
    if !(truncation > 0.0) || !(t_pulse > 0.0) {
        return Err(Error::invalid("gaussian envelope needs positive duration and truncation"));
    }
    let sigma = t_pulse / (2.0 * truncation);
    let s_g = erf(truncation / 2f64.sqrt());
    Ok((area / (sigma * (2.0 * PI).sqrt() * s_g), sigma))
}

fn single_target(target: &GateMatrix) -> Result<&CMat> {
    if target.dim() != 2 {
        return Err(Error::invalid(format!("{} is not a single-qubit gate", target.name)));
    }
    Ok(&target.unitary)
}

/// Resonant pulse (`ω = Δ`) lasting `n_periods` drive periods whose
/// rotating-wave propagator, dressed with idles at zero bias, equals the
/// target.
pub fn rabi_plan(target: &GateMatrix, delta: f64, n_periods: u32, envelope: Envelope) -> Result<RabiPlan> {
    let g = single_target(target)?;
    if n_periods == 0 {
        return Err(Error::invalid("n_periods must be at least 1"));
    }
    if !(delta > 0.0) {
        return Err(Error::invalid("delta must be positive"));
    }
    let q = g[(0, 1)].norm().min(1.0);
    // Pulse area S rotates by R_y(S/2); |⟨1|R_y(S/2)|0⟩| = sin(S/4).
    let area = 4.0 * q.asin();
    if area < 1e-12 {
        return Err(Error::Infeasible("diagonal gates need no pulse; use a phase gate".into()));
    }
    let omega = delta;
    let t_pulse = 2.0 * PI * n_periods as f64 / omega;
    let m = linalg::rot_y(area / 2.0);
    let (a, b, dist) = dress(&m, g)?;
    if dist > 1e-9 {
        return Err(Error::Infeasible(format!("{} is not reachable by a resonant pulse", target.name)));
    }
    let envelope = match envelope {
        Envelope::Rectangular => None,
        Envelope::Gaussian { truncation } => {
            let (a0, sigma) = gaussian_envelope(t_pulse, truncation, area)?;
            Some(GaussianEnvelope { a0, sigma, truncation })
        }
    };
    Ok(RabiPlan {
        delta,
        n_periods,
        omega,
        amplitude: area / t_pulse,
        area,
        t_pulse,
        t_idle_pre: idle_time(a, delta),
        t_idle_post: idle_time(b, delta),
        envelope,
    })
}

pub fn rabi_solution(target: &GateMatrix, delta: f64, n_periods: u32, envelope: Envelope) -> Result<SynthesisSolution> {
    let plan = rabi_plan(target, delta, n_periods, envelope)?;
    let model = SystemModel::two_level(delta)?;
    let pre = precession(delta * plan.t_idle_pre / 2.0);
    let post = precession(delta * plan.t_idle_post / 2.0);
    let predicted = post * linalg::rot_y(plan.area / 2.0) * pre;
    let dist = linalg::gate_distance(&predicted, &target.unitary)?;
    Ok(SynthesisSolution {
        target: target.name.clone(),
        method: Method::Rabi,
        model,
        drive: plan.drive()?,
        predicted: Predicted { aim_distance: dist, residuals: vec![], model: "rwa".into(), warnings: vec![] },
        plan: PlanDetails::Rabi(plan),
        verification: None,
    })
}

/// `ω = −π Δ² / (2 A ln 𝒫)`: the frequency of `−A cos ωt` giving passage
/// probability `p`.
pub fn amp_freq_for_p(delta: f64, p: f64, amplitude: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("single-passage probability must lie in (0, 1), got {p}")));
    }
    if !(amplitude > delta) {
        return Err(Error::invalid(format!("amplitude {amplitude} must exceed delta {delta}")));
    }
    Ok(-PI * delta * delta / (2.0 * amplitude * p.ln()))
}

/// `ζ` accumulated over the half period `[0, π/ω]` of `−A cos ωt`.
pub fn half_period_zeta(delta: f64, amplitude: f64, omega: f64) -> Result<f64> {
    let opts = QuadOptions { rel: 1e-13, abs: 1e-15, max_intervals: 4000 };
    let i = integrate(|u| (amplitude * u.cos()).hypot(delta), 0.0, PI, opts)?;
    Ok(0.5 * i / omega)
}

/// Stokes phase plus the half-period adiabatic phase.
pub fn phi_total(delta: f64, p: f64, amplitude: f64) -> Result<f64> {
    let omega = amp_freq_for_p(delta, p, amplitude)?;
    Ok(stokes_phase(adiabaticity_for_probability(p)?)? + half_period_zeta(delta, amplitude, omega)?)
}

/// Upper-level occupation `|(Ξ^k)_12|²` after `passages = 2k` symmetric
/// passages from the ground state.
pub fn passage_occupation(p: f64, phi_st: f64, passages: u32) -> Result<f64> {
    if passages == 0 || !passages.is_multiple_of(2) {
        return Err(Error::invalid("passage count must be even and positive"));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    // For Ξ in SU(2) with Re Ξ11 = cos θ, (Ξ^k)_12 = Ξ12 · U_{k−1}(cos θ)
    // (Chebyshev polynomial of the second kind).
    let x = -((1.0 - p) * (2.0 * phi_st).cos() + p);
    let b2 = 4.0 * p * (1.0 - p) * phi_st.sin().powi(2);
    let (mut u_prev, mut u) = (0.0, 1.0);
    for _ in 1..passages / 2 {
        (u_prev, u) = (u, 2.0 * x * u - u_prev);
    }
    Ok(b2 * u * u)
}

/// Maximum over `Φ_St` of the occupation, with its argument in `[0, π)`.
pub fn max_occupation(p: f64, passages: u32) -> Result<(f64, f64)> {
    let n = 720;
    let f = |phi: f64| passage_occupation(p, phi, passages).unwrap_or(0.0);
    let mut best = (0.0, f64::NEG_INFINITY);
    for i in 0..n {
        let phi = PI * i as f64 / n as f64;
        let v = f(phi);
        if v > best.1 + 1e-15 {
            best = (phi, v);
        }
    }
    let h = PI / n as f64;
    let phi = golden_max(f, best.0 - h, best.0 + h, 1e-12);
    let v = f(phi);
    if v >= best.1 {
        Ok((phi.rem_euclid(PI), v))
    } else {
        Ok(best)
    }
}

fn h_of(p: f64, passages: u32) -> f64 {
    max_occupation(p, passages).map(|x| x.1).unwrap_or(0.0)
}

/// Largest single-passage probability whose best achievable occupation
/// reaches `target`.
pub fn select_probability(passages: u32, target: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::invalid(format!("target occupation {target} outside [0, 1]")));
    }
    let n = 2000;
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let hs: Vec<f64> = grid.iter().map(|&p| h_of(p, passages)).collect();
    let tol = 1e-12;
    // Touching maxima near the target (largest p first).
    let mut touch: Option<f64> = None;
    for i in (1..n).rev() {
        if hs[i] >= hs[i - 1] && hs[i] >= hs[i + 1] && (target - hs[i]).abs() < 1e-4 {
            let dh = |p: f64| {
                let s = 1e-6;
                h_of(p + s, passages) - h_of(p - s, passages)
            };
            let (lo, hi) = (grid[i - 1], grid[i + 1]);
            if let Ok(p) = bisect(dh, lo, hi, 1e-14) {
                if h_of(p, passages) >= target - tol {
                    touch = Some(p);
                    break;
                }
            }
        }
    }
    let mut crossing: Option<f64> = None;
    for i in (0..n).rev() {
        if hs[i] >= target && hs[i + 1] < target {
            crossing = Some(bisect(|p| h_of(p, passages) - target, grid[i], grid[i + 1], 1e-14)?);
            break;
        }
        if hs[i + 1] >= target && i + 1 == n {
            crossing = Some(1.0);
            break;
        }
    }
    match (touch, crossing) {
        (Some(a), Some(b)) => Ok(a.max(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => {
            let best = hs.iter().cloned().fold(0.0, f64::max);
            Err(Error::Infeasible(format!(
                "occupation {target} exceeds the {passages}-passage maximum {best:.6}"
            )))
        }
    }
}

/// Amplitudes in `(a_min, a_max]` where `φ_S + ζ_half(A) ≡ phi_target (mod π)`,
/// ascending. Bracketed on a `0.05 Δ` grid, refined by bisection to 1e-8.
pub fn amplitude_candidates(delta: f64, p: f64, phi_target: f64, a_min: f64, a_max: f64) -> Result<Vec<f64>> {
    let lo = a_min.max(delta * (1.0 + 1e-9));
    if !(a_max > lo) {
        return Err(Error::invalid("amplitude search range is empty"));
    }
    let f = |a: f64| phi_total(delta, p, a).map(|v| v - phi_target);
    let step = 0.05 * delta;
    let mut out = Vec::new();
    let mut a_prev = lo;
    let mut f_prev = f(lo)?;
    let mut a = lo;
    while a < a_max {
        a = (a + step).min(a_max);
        let fa = f(a)?;
        let (k_prev, k) = ((f_prev / PI).floor(), (fa / PI).floor());
        let mut kk = k_prev + 1.0;
        while kk <= k {
            let shift = kk * PI;
            let root = bisect(|x| f(x).map(|v| v - shift).unwrap_or(f64::NAN), a_prev, a, 1e-8)?;
            out.push(root);
            kk += 1.0;
        }
        a_prev = a;
        f_prev = fa;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LzsmPlan {
    pub delta: f64,
    pub p_single: f64,
    pub phi_st: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub passages: u32,
    pub t_pre: f64,
    pub t_after: f64,
    /// Idle phases `ζ` accumulated before and after the passages.
    pub phase_pre: f64,
    pub phase_after: f64,
    pub candidates: Vec<f64>,
}

impl LzsmPlan {
    pub fn drive(&self) -> Result<DriveSignal> {
        lzsm_drive(self.amplitude, self.omega, self.passages, self.t_pre, self.t_after)
    }
}

/// `−A` for `t_pre`, then `−A cos ω(t − t_pre)` over `passages` half periods,
/// then the final level for `t_after`.
pub fn lzsm_drive(amplitude: f64, omega: f64, passages: u32, t_pre: f64, t_after: f64) -> Result<DriveSignal> {
    if passages == 0 || !(omega > 0.0) || t_pre < 0.0 || t_after < 0.0 {
        return Err(Error::invalid("invalid LZSM drive parameters"));
    }
    let t1 = t_pre + passages as f64 * PI / omega;
    let end_level = if passages.is_multiple_of(2) { -amplitude } else { amplitude };
    DriveSignal::new(vec![
        Segment::Constant { t_start: 0.0, t_end: t_pre, level: -amplitude },
        Segment::Harmonic {
            t_start: t_pre,
            t_end: t1,
            offset: 0.0,
            amplitude,
            omega,
            phase: -PI / 2.0 - omega * t_pre,
        },
        Segment::Constant { t_start: t1, t_end: t1 + t_after, level: end_level },
    ])
}

/// Complete a plan: evaluate the passages through the impulse model, choose
/// idle phases, and report the residual distance.
#[allow(clippy::too_many_arguments)]
fn finish_lzsm(
    target: &GateMatrix,
    delta: f64,
    p: f64,
    phi_st: f64,
    amplitude: f64,
    passages: u32,
    candidates: Vec<f64>,
    method: Method,
) -> Result<SynthesisSolution> {
    let model = SystemModel::two_level(delta)?;
    let omega = amp_freq_for_p(delta, p, amplitude)?;
    let bare = lzsm_drive(amplitude, omega, passages, 0.0, 0.0)?;
    let (m, _) = aim_propagator(&model, &bare)?;
    let (a, b, _) = dress(&m, &target.unitary)?;
    let gap = amplitude.hypot(delta);
    let plan = LzsmPlan {
        delta,
        p_single: p,
        phi_st,
        amplitude,
        omega,
        passages,
        t_pre: idle_time(a, gap),
        t_after: idle_time(b, gap),
        phase_pre: a,
        phase_after: b,
        candidates,
    };
    let drive = plan.drive()?;
    let (u, aim_plan) = aim_propagator(&model, &drive)?;
    let dist = linalg::gate_distance(&u, &target.unitary)?;
    let phase_res = linalg::wrap_half(phi_total(delta, p, amplitude)? - phi_st);
    Ok(SynthesisSolution {
        target: target.name.clone(),
        method,
        model,
        drive,
        predicted: Predicted {
            aim_distance: dist,
            residuals: vec![phase_res],
            model: "aim".into(),
            warnings: aim_plan.warnings,
        },
        plan: PlanDetails::Lzsm(plan),
        verification: None,
    })
}

/// One passage with `𝒫 = |G_12|²` and `φ_total ≡ 0 (mod π)`; remaining phases
/// are absorbed by idles at `∓A`.
pub fn solve_single_passage(
    target: &GateMatrix,
    delta: f64,
    choice: AmplitudeChoice,
    a_range: (f64, f64),
) -> Result<SynthesisSolution> {
    let g = single_target(target)?;
    let p = g[(0, 1)].norm_sqr();
    if p > 1.0 - 1e-9 {
        return Err(Error::Infeasible(format!(
            "{} needs full transfer (p = 1), unreachable with a single passage; use a double or multi-passage drive",
            target.name
        )));
    }
    if p < 1e-9 {
        return Err(Error::Infeasible(format!("{} is diagonal; use a phase gate", target.name)));
    }
    let candidates = amplitude_candidates(delta, p, 0.0, a_range.0, a_range.1)?;
    let a = choice.pick(&candidates)?;
    finish_lzsm(target, delta, p, 0.0, a, 1, candidates, Method::LzsmSingle)
}

/// Symmetric two-passage drive; equivalent to the multi-passage algorithm
/// with two passages.
pub fn solve_double_passage(
    target: &GateMatrix,
    delta: f64,
    choice: AmplitudeChoice,
    a_range: (f64, f64),
) -> Result<SynthesisSolution> {
    let mut s = solve_multi_passage(target, delta, 2, None, choice, a_range)?;
    s.method = Method::LzsmDouble;
    Ok(s)
}

/// Four-step construction: largest `𝒫` reaching the target occupation,
/// constructive `Φ_St`, amplitude ladder, idle phases.
pub fn solve_multi_passage(
    target: &GateMatrix,
    delta: f64,
    passages: u32,
    target_occupation: Option<f64>,
    choice: AmplitudeChoice,
    a_range: (f64, f64),
) -> Result<SynthesisSolution> {
    let g = single_target(target)?;
    if passages == 0 || !passages.is_multiple_of(2) {
        return Err(Error::invalid("passage count must be even and positive"));
    }
    let q_gate = g[(0, 1)].norm_sqr();
    let q = target_occupation.unwrap_or(q_gate);
    if (q - q_gate).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "target occupation {q} is inconsistent with {} (|G12|^2 = {q_gate})",
            target.name
        )));
    }
    let p = select_probability(passages, q)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Infeasible(format!("selected passage probability {p} cannot be realized")));
    }
    let (phi_max, _) = max_occupation(p, passages)?;
    let candidates = amplitude_candidates(delta, p, phi_max, a_range.0, a_range.1)?;
    let a = choice.pick(&candidates)?;
    finish_lzsm(target, delta, p, phi_max, a, passages, candidates, Method::LzsmMulti)
}

/// Transition probability per passage for a drive built by [`lzsm_drive`].
pub fn drive_probability(delta: f64, amplitude: f64, omega: f64) -> Result<f64> {
    aim::lzsm_probability(aim::adiabaticity(delta, amplitude * omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fidelity::standard_gate;

    #[test]
    fn frequency_relation() {
        let w = amp_freq_for_p(1.0, 0.5, 4.0).unwrap();
        assert!((w - PI / (8.0 * 2f64.ln())).abs() < 1e-15);
        let w2 = amp_freq_for_p(1.0, 0.5, 8.0).unwrap();
        assert!((w / w2 - 2.0).abs() < 1e-14);
        assert!(amp_freq_for_p(1.0, 1.0, 4.0).is_err());
        assert!(amp_freq_for_p(1.0, 0.5, 0.5).is_err());
        assert!((drive_probability(1.0, 4.0, w).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn phase_gate_times() {
        assert!((phase_gate_time(1.0, 0.0, 3.0 * PI / 4.0).unwrap() - 3.0 * PI / 4.0).abs() < 1e-15);
        let ratio = phase_gate_time(1.0, 0.0, 1.0).unwrap() / phase_gate_time(1.0, 10.0, 1.0).unwrap();
        assert!((ratio - 101f64.sqrt()).abs() < 1e-12);
        assert_eq!(phase_gate_time(1.0, 3.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn rabi_amplitudes() {
        let x = standard_gate("X", None).unwrap();
        let plan = rabi_plan(&x, 1.0, 10, Envelope::Rectangular).unwrap();
        assert!((plan.amplitude - 0.1).abs() < 1e-14);
        assert!((plan.amplitude * plan.t_pulse - 2.0 * PI).abs() < 1e-12);
        let h = standard_gate("H", None).unwrap();
        let plan = rabi_plan(&h, 1.0, 5, Envelope::Rectangular).unwrap();
        assert!((plan.amplitude - 0.1).abs() < 1e-14);
        assert!((plan.t_idle() - PI).abs() < 1e-12);
    }

    #[test]
    fn phi_total_known_value() {
        let v = phi_total(1.0, 0.5, 4.31).unwrap();
        assert!((v / PI - 3.000_897_095_443_134).abs() < 1e-10);
    }
}

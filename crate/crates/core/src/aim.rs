//! The adiabatic-impulse model: adiabatic phase accumulation between
//! anticrossings, instantaneous LZSM transitions at them.
//!
//! Matrices produced by [`aim_propagator`] act on the adiabatic basis ordered
//! by ascending energy, in the continuously transported gauge of
//! [`crate::dynamics::adiabatic_frames`]. The closed-form 2×2 matrices
//! ([`u_lzsm_single`], [`xi_double`], [`xi_double_symmetric`], [`xi_quad`])
//! use the upper-level-first ordering; [`crate::linalg::reverse_levels`]
//! converts between the two.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::adiabatic_frames;
use crate::linalg::{self, c, CMat};
use crate::model::{anticrossing_times, DriveSignal, SystemModel};
use crate::quadrature::{integrate_vec, QuadOptions};
use crate::special::ln_gamma;
use crate::{Error, Result, C64};

/// `𝒫 = exp(−2πδ)`.
pub fn lzsm_probability(delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("adiabaticity must be non-negative, got {delta}")));
    }
    Ok((-2.0 * PI * delta).exp())
}

/// `δ = −ln 𝒫 / 2π`.
pub fn adiabaticity_for_probability(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("probability must lie in (0, 1], got {p}")));
    }
    Ok(-p.ln() / (2.0 * PI))
}

/// `δ = Δ² / (4|v|)` for gap `Δ` and sweep speed `v`.
pub fn adiabaticity(gap: f64, velocity: f64) -> f64 {
    gap * gap / (4.0 * velocity.abs())
}

/// Stokes phase `φ_S = π/4 + δ(ln δ − 1) + arg Γ(1 − iδ)`.
pub fn stokes_phase(delta: f64) -> Result<f64> {
    if !(delta >= 0.0) {
        return Err(Error::invalid(format!("adiabaticity must be non-negative, got {delta}")));
    }
    if delta == 0.0 {
        return Ok(PI / 4.0);
    }
    Ok(PI / 4.0 + delta * (delta.ln() - 1.0) + ln_gamma(C64::new(1.0, -delta)).im)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionSpec {
    pub t_cross: f64,
    pub levels: (usize, usize),
    pub p: f64,
    pub stokes: f64,
    pub alpha: f64,
    /// Minimal gap used for the adiabaticity parameter.
    pub gap: f64,
    pub velocity: f64,
    pub delta: f64,
}

impl TransitionSpec {
    pub fn transmission(&self) -> f64 {
        self.p.sqrt()
    }

    pub fn reflection(&self) -> f64 {
        (1.0 - self.p).sqrt()
    }
}

/// Transition matrix embedded in `n` levels: on the pair `(i, j)`
/// `[[R e^{iφ_S}, αT], [−αT, R e^{−iφ_S}]]`, identity elsewhere.
pub fn transition_matrix(spec: &TransitionSpec, n: usize) -> Result<CMat> {
    let (i, j) = spec.levels;
    if i >= j || j >= n {
        return Err(Error::invalid(format!("invalid level pair ({i}, {j}) for {n} levels")));
    }
    if !(0.0..=1.0).contains(&spec.p) {
        return Err(Error::invalid(format!("transition probability {} outside [0, 1]", spec.p)));
    }
    if spec.alpha.abs() != 1.0 {
        return Err(Error::invalid("alpha must be +1 or -1"));
    }
    let (t, r) = (spec.transmission(), spec.reflection());
    let mut m = linalg::identity(n);
    m[(i, i)] = C64::from_polar(r, spec.stokes);
    m[(j, j)] = C64::from_polar(r, -spec.stokes);
    m[(i, j)] = c(spec.alpha * t, 0.0);
    m[(j, i)] = c(-spec.alpha * t, 0.0);
    Ok(m)
}

/// Diagonal adiabatic evolution `U_kk = exp(i Σ_j β_jk ζ^(j,j+1))` with
/// `β_jk = +1` for `j ≥ k`, `−1` for `j < k`. `zetas[j]` is `ζ^(j,j+1)`.
pub fn u_adiabatic(zetas: &[f64], n: usize) -> Result<CMat> {
    if zetas.len() + 1 != n {
        return Err(Error::invalid(format!("{n} levels need {} adjacent phases, got {}", n - 1, zetas.len())));
    }
    let entries: Vec<C64> = (0..n)
        .map(|k| {
            let arg: f64 = zetas.iter().enumerate().map(|(j, z)| if j >= k { *z } else { -*z }).sum();
            C64::from_polar(1.0, arg)
        })
        .collect();
    Ok(linalg::diag(&entries))
}

fn quad_breaks(drive: &DriveSignal, ta: f64, tb: f64) -> Vec<f64> {
    let mut b = vec![ta];
    b.extend(drive.breakpoints().into_iter().filter(|&x| x > ta && x < tb));
    b.push(tb);
    b
}

/// `½ ∫ (E_j − E_i) dt` over `[t_a, t_b]`.
pub fn zeta(model: &SystemModel, drive: &DriveSignal, levels: (usize, usize), ta: f64, tb: f64) -> Result<f64> {
    let (i, j) = levels;
    if i >= model.dim() || j >= model.dim() {
        return Err(Error::invalid(format!("invalid level pair ({i}, {j})")));
    }
    if tb < ta {
        return Err(Error::invalid("zeta requires t_a <= t_b"));
    }
    drive.value(ta)?;
    drive.value(tb)?;
    let v = integrate_vec(
        |t, out| {
            let e = model.energies(drive.eval(t));
            out[0] = 0.5 * (e[j] - e[i]);
        },
        1,
        &quad_breaks(drive, ta, tb),
        QuadOptions::default(),
    )?;
    Ok(v[0])
}

/// All adjacent-pair phases `ζ^(k,k+1)` over `[t_a, t_b]`.
pub fn zetas(model: &SystemModel, drive: &DriveSignal, ta: f64, tb: f64) -> Result<Vec<f64>> {
    if tb < ta {
        return Err(Error::invalid("zeta requires t_a <= t_b"));
    }
    drive.value(ta)?;
    drive.value(tb)?;
    let n = model.dim();
    if tb == ta {
        return Ok(vec![0.0; n - 1]);
    }
    integrate_vec(
        |t, out| {
            let e = model.energies(drive.eval(t));
            for k in 0..n - 1 {
                out[k] = 0.5 * (e[k + 1] - e[k]);
            }
        },
        n - 1,
        &quad_breaks(drive, ta, tb),
        QuadOptions::default(),
    )
}

/// `R_z(φ) R_y(θ) R_z(φ)` with `sin²(θ/2) = p`.
pub fn u_lzsm_single(p: f64, phi_total: f64) -> Result<CMat> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    let theta = 2.0 * p.sqrt().asin();
    Ok(linalg::rot_z(phi_total) * linalg::rot_y(theta) * linalg::rot_z(phi_total))
}

fn su2(a: C64, b: C64) -> CMat {
    linalg::from_rows(&[&[a, b], &[-b.conj(), a.conj()]])
}

fn check_p(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// Double-passage evolution matrix for general probabilities and phases.
pub fn xi_double(p1: f64, p2: f64, phi_s1: f64, phi_s2: f64, zeta1: f64, zeta2: f64, zeta3: f64) -> Result<CMat> {
    check_p(p1)?;
    check_p(p2)?;
    let (t1, r1, t2, r2) = (p1.sqrt(), (1.0 - p1).sqrt(), p2.sqrt(), (1.0 - p2).sqrt());
    let inner = C64::from_polar(1.0, -(phi_s1 + phi_s2 + 2.0 * zeta2));
    let a = (inner * (r1 * r2) + t1 * t2) * C64::from_polar(1.0, zeta2 - zeta1 - zeta3);
    let b = (c(r1 * t2, 0.0) - inner * (t1 * r2)) * C64::from_polar(1.0, phi_s1 + zeta1 + zeta2 - zeta3);
    Ok(su2(a, b))
}

/// Symmetric double passage: `Ξ11 = −R² e^{−2iΦ} − T²`, `Ξ12 = −2iRT sin Φ`.
pub fn xi_double_symmetric(p: f64, phi_st: f64) -> Result<CMat> {
    check_p(p)?;
    let (t, r) = (p.sqrt(), (1.0 - p).sqrt());
    let a = -C64::from_polar(r * r, -2.0 * phi_st) - t * t;
    let b = c(0.0, -2.0 * r * t * phi_st.sin());
    Ok(su2(a, b))
}

/// Four-passage matrix `Ξ_Q = Ξ²` in closed form.
pub fn xi_quad(p: f64, phi_st: f64) -> Result<CMat> {
    check_p(p)?;
    let (t, r) = (p.sqrt(), (1.0 - p).sqrt());
    let (r2, t2) = (r * r, t * t);
    let s = phi_st.sin();
    let a = C64::from_polar(r2 * r2, -4.0 * phi_st)
        + t2 * t2
        + (C64::from_polar(1.0, -2.0 * phi_st) - 2.0 * s * s) * (2.0 * r2 * t2);
    let b = c(0.0, 4.0 * r * t * s * (r2 * (2.0 * phi_st).cos() + t2));
    Ok(su2(a, b))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticSegment {
    pub t_a: f64,
    pub t_b: f64,
    /// `zetas[k]` is `ζ^(k,k+1)`.
    pub zetas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PlanStep {
    Adiabatic(AdiabaticSegment),
    /// Transitions at one instant on disjoint level pairs.
    Transition { transitions: Vec<TransitionSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AimPlan {
    pub n_levels: usize,
    pub steps: Vec<PlanStep>,
    pub warnings: Vec<String>,
}

impl AimPlan {
    pub fn propagator(&self) -> Result<CMat> {
        let mut u = linalg::identity(self.n_levels);
        for step in &self.steps {
            let m = match step {
                PlanStep::Adiabatic(s) => u_adiabatic(&s.zetas, self.n_levels)?,
                PlanStep::Transition { transitions } => {
                    let mut m = linalg::identity(self.n_levels);
                    for tr in transitions {
                        m = transition_matrix(tr, self.n_levels)? * m;
                    }
                    m
                }
            };
            u = m * u;
        }
        Ok(u)
    }

    pub fn transitions(&self) -> Vec<TransitionSpec> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                PlanStep::Transition { transitions } => Some(transitions.clone()),
                _ => None,
            })
            .flatten()
            .collect()
    }

    pub fn segments(&self) -> Vec<AdiabaticSegment> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                PlanStep::Adiabatic(a) => Some(a.clone()),
                _ => None,
            })
            .collect()
    }
}

/// Decompose a drive into adiabatic segments and transitions.
pub fn build_plan(model: &SystemModel, drive: &DriveSignal) -> Result<AimPlan> {
    let n = model.dim();
    let passages = anticrossing_times(model, drive)?;
    let mut groups: Vec<Vec<crate::model::Passage>> = Vec::new();
    for p in passages {
        match groups.last_mut() {
            Some(g) if (g[0].t - p.t).abs() <= 1e-9 * (1.0 + p.t.abs()) => g.push(p),
            _ => groups.push(vec![p]),
        }
    }
    let mut times = vec![drive.t_start()];
    times.extend(groups.iter().map(|g| g[0].t));
    times.push(drive.t_end());
    let frames = adiabatic_frames(model, drive, &times)?;

    let sites = model.anticrossing_sites()?;
    let mut gaps = Vec::with_capacity(sites.len());
    for s in &sites {
        gaps.push(model.min_gap(s)?.1);
    }
    let gap_of = |loc: f64| {
        sites.iter().zip(gaps.iter()).find(|(s, _)| s.location == loc).map(|(_, g)| *g).unwrap_or(0.0)
    };

    let mut warnings = Vec::new();
    let mut steps = Vec::new();
    for k in 0..times.len() - 1 {
        steps.push(PlanStep::Adiabatic(AdiabaticSegment {
            t_a: times[k],
            t_b: times[k + 1],
            zetas: zetas(model, drive, times[k], times[k + 1])?,
        }));
        if k + 1 == times.len() - 1 {
            break;
        }
        let group = &groups[k];
        let mut used = vec![false; n];
        let mut transitions = Vec::new();
        for p in group {
            let (i, j) = p.site.levels;
            if used[i] || used[j] {
                return Err(Error::invalid(format!(
                    "simultaneous passages share a level at t = {}; the impulse model does not apply",
                    p.t
                )));
            }
            used[i] = true;
            used[j] = true;
            let gap = gap_of(p.site.location);
            let delta = adiabaticity(gap, p.velocity);
            // Sudden-limit amplitude from level i before to level j after
            // fixes the sign of the off-diagonal entries in this gauge.
            let before = &frames[k];
            let after = &frames[k + 2];
            let overlap = after.column(j).dotc(&before.column(i)).re;
            if overlap.abs() < 0.5 {
                warnings.push(format!(
                    "transition at t = {} is too close to a neighbouring event to fix its sign reliably (overlap {overlap:.3})",
                    p.t
                ));
            }
            let alpha = if overlap >= 0.0 { -1.0 } else { 1.0 };
            transitions.push(TransitionSpec {
                t_cross: p.t,
                levels: (i, j),
                p: lzsm_probability(delta)?,
                stokes: stokes_phase(delta)?,
                alpha,
                gap,
                velocity: p.velocity,
                delta,
            });
        }
        steps.push(PlanStep::Transition { transitions });
    }

    let all: Vec<TransitionSpec> = steps
        .iter()
        .filter_map(|s| match s {
            PlanStep::Transition { transitions } => Some(transitions.clone()),
            _ => None,
        })
        .flatten()
        .collect();
    for w in all.windows(2) {
        let window = 2.0 / w[0].velocity.abs().sqrt().min(w[1].velocity.abs().sqrt());
        if w[1].t_cross - w[0].t_cross < window && w[1].t_cross > w[0].t_cross {
            warnings.push(format!(
                "passages at t = {} and t = {} overlap within the transition time {window:.3}",
                w[0].t_cross, w[1].t_cross
            ));
        }
    }
    Ok(AimPlan { n_levels: n, steps, warnings })
}

/// Impulse-model propagator in the transported adiabatic basis, with its plan.
pub fn aim_propagator(model: &SystemModel, drive: &DriveSignal) -> Result<(CMat, AimPlan)> {
    let plan = build_plan(model, drive)?;
    Ok((plan.propagator()?, plan))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn probability_reference_values() {
        assert_eq!(lzsm_probability(0.0).unwrap(), 1.0);
        let d = 2f64.ln() / (2.0 * PI);
        assert!((lzsm_probability(d).unwrap() - 0.5).abs() < 1e-15);
        assert!((lzsm_probability(1.0).unwrap() - 1.867_442_731_707_988_8e-3).abs() < 1e-15);
    }

    #[test]
    fn stokes_phase_reference_values() {
        assert_eq!(stokes_phase(0.0).unwrap(), PI / 4.0);
        let d = 2f64.ln() / (2.0 * PI);
        assert!((stokes_phase(d).unwrap() - 0.495_039_483_568_998_9).abs() < 1e-12);
        assert!((stokes_phase(10.0).unwrap() - 0.008_336_119_108_004_456).abs() < 1e-12);
        assert!((stokes_phase(0.5).unwrap() - 0.182_882_872_022_903_4).abs() < 1e-12);
    }

    #[test]
    fn adiabatic_matrix_sign_pattern() {
        let (a, b, cc) = (0.3, 0.7, 1.1);
        let u = u_adiabatic(&[a, b, cc], 4).unwrap();
        let expected = [a + b + cc, -a + b + cc, -a - b + cc, -a - b - cc];
        for (k, e) in expected.iter().enumerate() {
            assert!((u[(k, k)] - C64::from_polar(1.0, *e)).norm() < 1e-15);
        }
        assert!(u_adiabatic(&[0.1], 3).is_err());
    }

    #[test]
    fn transition_limits() {
        let mut s = TransitionSpec {
            t_cross: 0.0,
            levels: (0, 1),
            p: 0.0,
            stokes: 0.3,
            alpha: 1.0,
            gap: 1.0,
            velocity: 1.0,
            delta: 0.0,
        };
        let m = transition_matrix(&s, 2).unwrap();
        assert!(m[(0, 1)].norm() < 1e-15 && (m[(0, 0)].norm() - 1.0).abs() < 1e-15);
        s.p = 1.0;
        let m = transition_matrix(&s, 2).unwrap();
        assert!(m[(0, 0)].norm() < 1e-15 && (m[(1, 0)] + 1.0).norm() < 1e-15);
        s.levels = (1, 1);
        assert!(transition_matrix(&s, 2).is_err());
    }
}

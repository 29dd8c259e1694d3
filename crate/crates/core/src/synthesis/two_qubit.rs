//! Two-qubit synthesis on the coupled-qubit model: swap-family gates through
//! the `E₁–E₂` anticrossing at `ε₂ = ε₁` and CNOT-like gates through the
//! `E₂–E₃` anticrossing at `ε₂ = J/2`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use super::roots::{levenberg_marquardt, SolveOptions};
use super::{Method, PlanDetails, Predicted, SynthesisSolution};
use crate::aim::{aim_propagator, AimPlan};
use crate::fidelity::{standard_gate, GateMatrix};
use crate::linalg::{self, wrap_angle, wrap_half, CMat};
use crate::model::{AnticrossingSite, DriveSignal, Segment, SystemModel};
use crate::parallel::Exec;
use crate::{Error, Result};

/// Residual set the root finder drives to zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditions {
    /// Interference condition plus the phase of every non-zero target entry
    /// relative to `(0, 0)`, read off the impulse-model propagator.
    #[default]
    Target,
    /// The closed condition systems in terms of Stokes phases and phase
    /// gains (swap family and CNOT only).
    Literal,
}

/// Gap entering the amplitude relation `A = gap² T_c / (4 |ln 𝒫|)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GapChoice {
    /// Minimal adiabatic gap of the crossing, so every passage has exactly
    /// the requested probability.
    #[default]
    Effective,
    /// Bare coupling of the crossing (`g` for `E₁–E₂`, `Δ₂` for `E₂–E₃`).
    Bare,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitOptions {
    pub search: SearchBox,
    #[serde(default)]
    pub conditions: Conditions,
    #[serde(default)]
    pub gap: GapChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveShape {
    /// Half-cosine up, idle `T₁` at the top, half-cosine down.
    DoublePassage,
    /// One half-cosine between idles `T₁` (bottom) and `T₂` (top).
    SinglePassage,
    /// Idle `T₁`, half-cosine up, idle `T₂`, half-cosine down, idle `T₁`.
    Cnot,
}

impl DriveShape {
    fn dims(self) -> usize {
        match self {
            DriveShape::DoublePassage => 2,
            DriveShape::SinglePassage | DriveShape::Cnot => 3,
        }
    }

    fn passages(self) -> usize {
        match self {
            DriveShape::SinglePassage => 1,
            _ => 2,
        }
    }

    fn duration(self, x: &[f64]) -> f64 {
        match self {
            DriveShape::DoublePassage => x[0] + x[1],
            DriveShape::SinglePassage => 0.5 * x[0] + x[1] + x[2],
            DriveShape::Cnot => x[0] + 2.0 * x[1] + x[2],
        }
    }
}

/// Multistart region in `(T_c, T₁, T₂)`. `T₂` is ignored by the
/// double-passage shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub t_c: (f64, f64),
    pub t1: (f64, f64),
    pub t2: (f64, f64),
    /// Grid points per axis for the coarse scan.
    pub points: usize,
    /// Number of best grid points refined by the root finder.
    pub starts: usize,
}

impl SearchBox {
    /// A box scaled to the anticrossing gap: `T_c` from half to three
    /// Larmor periods of the gap, idles up to one period.
    pub fn for_gap(gap: f64) -> Self {
        let period = 2.0 * PI / gap;
        SearchBox { t_c: (0.5 * period, 3.0 * period), t1: (0.0, period), t2: (0.0, period), points: 24, starts: 32 }
    }

    fn validate(&self, dims: usize) -> Result<()> {
        let mut axes = vec![self.t_c, self.t1];
        if dims == 3 {
            axes.push(self.t2);
        }
        for (lo, hi) in axes {
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi >= lo) {
                return Err(Error::invalid(format!("bad search interval [{lo}, {hi}]")));
            }
        }
        if self.t_c.0 <= 0.0 {
            return Err(Error::invalid("half-period search must stay positive"));
        }
        if self.points < 2 || self.starts == 0 {
            return Err(Error::invalid("search needs at least 2 points per axis and one start"));
        }
        Ok(())
    }

    fn bounds(&self, dims: usize) -> (Vec<f64>, Vec<f64>) {
        let axes = [self.t_c, self.t1, self.t2];
        (axes[..dims].iter().map(|a| a.0).collect(), axes[..dims].iter().map(|a| a.1).collect())
    }

    fn grid(&self, dims: usize) -> Vec<Vec<f64>> {
        let axes = [self.t_c, self.t1, self.t2];
        let line = |(lo, hi): (f64, f64)| -> Vec<f64> {
            (0..self.points).map(|k| lo + (hi - lo) * k as f64 / (self.points - 1) as f64).collect()
        };
        let mut out: Vec<Vec<f64>> = vec![vec![]];
        for axis in axes.iter().take(dims) {
            let pts = line(*axis);
            out = out.into_iter().flat_map(|p| pts.iter().map(move |&v| [p.clone(), vec![v]].concat())).collect();
        }
        out
    }
}

/// A converged root of the condition system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub t_c: f64,
    pub t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    pub amplitude: f64,
    pub duration: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitPlan {
    pub shape: DriveShape,
    pub conditions: Conditions,
    pub amplitude: f64,
    pub omega: f64,
    /// Half-period of the harmonic sweep.
    pub t_c: f64,
    pub t1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    /// Drive level the anticrossing sits at.
    pub center: f64,
    /// Adiabatic level pair of the crossing.
    pub levels: (usize, usize),
    /// Gap used in the amplitude relation.
    pub gap: f64,
    /// Target probability per passage.
    pub p: f64,
    pub residuals: Vec<f64>,
    /// Closed-form condition residuals evaluated at the returned root, when
    /// such a system exists for the target.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub literal_residuals: Vec<f64>,
    /// All distinct converged roots, shortest first.
    pub branches: Vec<Branch>,
}

impl TwoQubitPlan {
    pub fn drive(&self) -> Result<DriveSignal> {
        build_drive(self.shape, self.center, self.amplitude, self.t_c, self.t1, self.t2.unwrap_or(0.0))
    }

    pub fn duration(&self) -> f64 {
        let x = [self.t_c, self.t1, self.t2.unwrap_or(0.0)];
        self.shape.duration(&x[..self.shape.dims()])
    }
}

/// `ε₂(t)` rising `ε₁ − A cos ωt` over `[0, T_c/2]`, idling at `ε₁ + A` for
/// `T₁`, then returning along `ε₁ + A cos ω(t − T_c/2 − T₁)`; `ω = 2π/T_c`.
pub fn iswap_drive(eps1: f64, amplitude: f64, t_c: f64, t1: f64) -> Result<DriveSignal> {
    build_drive(DriveShape::DoublePassage, eps1, amplitude, t_c, t1, 0.0)
}

/// `ε₂(t)` idling at `J/2 − A` for `T₁`, rising along a half-cosine, idling
/// at `J/2 + A` for `T₂`, falling back and idling another `T₁`.
pub fn cnot_drive(j: f64, amplitude: f64, t_c: f64, t1: f64, t2: f64) -> Result<DriveSignal> {
    build_drive(DriveShape::Cnot, j / 2.0, amplitude, t_c, t1, t2)
}

fn build_drive(shape: DriveShape, c: f64, a: f64, t_c: f64, t1: f64, t2: f64) -> Result<DriveSignal> {
    if !(a > 0.0 && t_c > 0.0 && t1 >= 0.0 && t2 >= 0.0) {
        return Err(Error::invalid("amplitude and half-period must be positive, idles non-negative"));
    }
    let w = 2.0 * PI / t_c;
    let half = 0.5 * t_c;
    // `c ∓ A cos ω(t − s)` written as a sine with absolute time.
    let up = |s: f64| Segment::Harmonic {
        t_start: s,
        t_end: s + half,
        offset: c,
        amplitude: a,
        omega: w,
        phase: -FRAC_PI_2 - w * s,
    };
    let down = |s: f64| Segment::Harmonic {
        t_start: s,
        t_end: s + half,
        offset: c,
        amplitude: a,
        omega: w,
        phase: FRAC_PI_2 - w * s,
    };
    let idle = |s: f64, d: f64, level: f64| Segment::Constant { t_start: s, t_end: s + d, level };
    let segments = match shape {
        DriveShape::DoublePassage => vec![up(0.0), idle(half, t1, c + a), down(half + t1)],
        DriveShape::SinglePassage => vec![idle(0.0, t1, c - a), up(t1), idle(t1 + half, t2, c + a)],
        DriveShape::Cnot => vec![
            idle(0.0, t1, c - a),
            up(t1),
            idle(t1 + half, t2, c + a),
            down(t1 + half + t2),
            idle(t1 + t_c + t2, t1, c - a),
        ],
    };
    DriveSignal::new(segments)
}

/// Amplitude giving transition probability `p` at a cosine crossing with
/// half-period `T_c` across a gap: `A = gap² T_c / (4 |ln p|)`.
pub fn amplitude_for_half_period(gap: f64, t_c: f64, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!("probability {p} outside (0, 1)")));
    }
    Ok(gap * gap * t_c / (4.0 * -p.ln()))
}

fn site_with(model: &SystemModel, diabatic: (usize, usize)) -> Result<(AnticrossingSite, f64)> {
    let site = model
        .anticrossing_sites()?
        .into_iter()
        .find(|s| s.diabatic == diabatic)
        .ok_or_else(|| Error::invalid("model has no such anticrossing"))?;
    let (_, gap) = model.min_gap(&site)?;
    Ok((site, gap))
}

fn relation_gap(model: &SystemModel, diabatic: (usize, usize), choice: GapChoice) -> Result<f64> {
    match (choice, model) {
        (GapChoice::Effective, _) => site_with(model, diabatic).map(|(_, g)| g),
        (GapChoice::Bare, SystemModel::TwoQubit { g, delta2, .. }) => Ok(if diabatic == (1, 2) { *g } else { *delta2 }),
        (GapChoice::Bare, _) => Err(Error::invalid("bare coupling needs a two-qubit model")),
        (GapChoice::Value(v), _) if v > 0.0 => Ok(v),
        (GapChoice::Value(v), _) => Err(Error::invalid(format!("gap {v} must be positive"))),
    }
}

/// Phase gains and Stokes phases of one evaluated drive, grouped the way the
/// closed condition systems use them.
struct Phases {
    /// Stokes phases of the passages on the crossing pair, in time order.
    stokes: Vec<f64>,
    /// `ζ^(k,k+1)` for each adiabatic interval between events.
    segments: Vec<Vec<f64>>,
}

impl Phases {
    fn from_plan(plan: &AimPlan, levels: (usize, usize), expected: usize) -> Result<Self> {
        let transitions = plan.transitions();
        if transitions.len() != expected || transitions.iter().any(|t| t.levels != levels) {
            return Err(Error::Infeasible(format!(
                "drive passes {} anticrossings instead of {expected} on levels {levels:?}",
                transitions.len()
            )));
        }
        Ok(Phases {
            stokes: transitions.iter().map(|t| t.stokes).collect(),
            segments: plan.segments().into_iter().map(|s| s.zetas).collect(),
        })
    }

    fn total(&self, k: usize) -> f64 {
        self.segments.iter().map(|z| z[k]).sum()
    }
}

struct Problem<'a> {
    model: &'a SystemModel,
    target: &'a GateMatrix,
    shape: DriveShape,
    conditions: Conditions,
    center: f64,
    levels: (usize, usize),
    gap: f64,
    p: f64,
    /// `sin²Φ` required between two passages.
    interference: f64,
    lambda: Option<f64>,
}

impl Problem<'_> {
    fn drive(&self, x: &[f64]) -> Result<DriveSignal> {
        let a = amplitude_for_half_period(self.gap, x[0], self.p)?;
        build_drive(self.shape, self.center, a, x[0], x[1], x.get(2).copied().unwrap_or(0.0))
    }

    fn evaluate(&self, x: &[f64]) -> Result<(CMat, AimPlan)> {
        aim_propagator(self.model, &self.drive(x)?)
    }

    fn residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        let (m, plan) = self.evaluate(x)?;
        let phases = Phases::from_plan(&plan, self.levels, self.shape.passages())?;
        match self.conditions {
            Conditions::Target => Ok(self.target_residuals(&m, &phases)),
            Conditions::Literal => self.literal(&phases),
        }
    }

    fn target_residuals(&self, m: &CMat, phases: &Phases) -> Vec<f64> {
        let mut r = Vec::new();
        if self.shape.passages() == 2 {
            let phi = phases.stokes[0] + phases.segments[1][self.levels.0];
            let s = self.interference.sqrt().clamp(0.0, 1.0).asin();
            let (r1, r2) = (wrap_half(phi - s), wrap_half(phi - (PI - s)));
            r.push(if r1.abs() <= r2.abs() { r1 } else { r2 });
        }
        r.extend(entry_phase_residuals(m, &self.target.unitary));
        r
    }

    fn literal(&self, phases: &Phases) -> Result<Vec<f64>> {
        match (self.shape, self.lambda) {
            (DriveShape::DoublePassage, Some(lambda)) => {
                let all = swap_family_conditions(phases, lambda);
                // The last (|11⟩ phase) condition is kept only for SWAP; the
                // iSWAP system drops it.
                Ok(if lambda == 0.0 { all[..3].to_vec() } else { all })
            }
            (DriveShape::Cnot, _) => Ok(cnot_conditions(phases, self.levels)),
            _ => Err(Error::invalid(format!("no closed condition system for {}", self.target.name))),
        }
    }
}

/// `arg(m_kl / m_00) − arg(g_kl / g_00)` wrapped, for every non-zero target
/// entry other than `(0, 0)`.
fn entry_phase_residuals(m: &CMat, g: &CMat) -> Vec<f64> {
    let (m0, g0) = (m[(0, 0)], g[(0, 0)]);
    let mut r = Vec::new();
    for k in 0..g.nrows() {
        for l in 0..g.ncols() {
            if (k, l) == (0, 0) || g[(k, l)].norm() < 1e-9 {
                continue;
            }
            r.push(wrap_angle((m[(k, l)] / m0).arg() - (g[(k, l)] / g0).arg()));
        }
    }
    r
}

fn swap_family_conditions(ph: &Phases, lambda: f64) -> Vec<f64> {
    let z01 = ph.total(0);
    let z23 = ph.total(2);
    let z12: Vec<f64> = ph.segments.iter().map(|z| z[1]).collect();
    let (s1, s2) = (ph.stokes[0], ph.stokes[1]);
    let rhs = (1.0 + lambda) * FRAC_PI_2;
    vec![
        wrap_angle(s1 + s2 + 2.0 * z12[1] - PI),
        wrap_angle(s1 + 2.0 * (z01 + z12[0] + z12[1]) - rhs),
        wrap_angle(s2 + 2.0 * (z01 + z12[1] + z12[2]) - rhs),
        wrap_half(z01 + z12[0] + z12[1] + z12[2] + z23),
    ]
}

fn cnot_conditions(ph: &Phases, levels: (usize, usize)) -> Vec<f64> {
    let k = levels.0;
    let z01 = ph.total(0);
    let z12 = ph.total(1);
    let z23: Vec<f64> = ph.segments.iter().map(|z| z[k]).collect();
    let s = ph.stokes[0];
    vec![wrap_half(z01), wrap_half(s + z23[1] - FRAC_PI_2), wrap_angle(s + 2.0 * z12 + 2.0 * z23[0] + 2.0 * z23[1])]
}

/// Swap-family condition residuals `[interference, n₂, n₃, n₄]` of a
/// double-passage drive over the `E₁–E₂` crossing, with `λ = 1` for SWAP and
/// `λ = 0` for iSWAP.
pub fn literal_iswap_conditions(model: &SystemModel, drive: &DriveSignal, lambda: f64) -> Result<Vec<f64>> {
    let (_, plan) = aim_propagator(model, drive)?;
    let (site, _) = site_with(model, (1, 2))?;
    let ph = Phases::from_plan(&plan, site.levels, 2)?;
    Ok(swap_family_conditions(&ph, lambda))
}

/// CNOT condition residuals `[ζ^(01), interference, phase]` of a CNOT drive
/// over the `E₂–E₃` crossing.
pub fn literal_cnot_conditions(model: &SystemModel, drive: &DriveSignal) -> Result<Vec<f64>> {
    let (_, plan) = aim_propagator(model, drive)?;
    let (site, _) = site_with(model, (2, 3))?;
    let ph = Phases::from_plan(&plan, site.levels, 2)?;
    Ok(cnot_conditions(&ph, site.levels))
}

struct Outcome {
    x: Vec<f64>,
    norm: f64,
}

/// Multistart root finding: coarse grid scan, refinement of the best grid
/// points, then the shortest converged root (ties to smaller amplitude).
fn solve(problem: &Problem, search: &SearchBox, exec: Exec) -> Result<SynthesisSolution> {
    let dims = problem.shape.dims();
    search.validate(dims)?;
    let (lo, hi) = search.bounds(dims);
    let grid = search.grid(dims);
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scanned = exec.map(&grid, |x| problem.residuals(x).map(|r| norm(&r)).unwrap_or(f64::INFINITY));
    let mut order: Vec<usize> = (0..grid.len()).filter(|&i| scanned[i].is_finite()).collect();
    if order.is_empty() {
        return Err(Error::Infeasible("no drive in the search box passes the anticrossing as required".into()));
    }
    order.sort_by(|&a, &b| scanned[a].total_cmp(&scanned[b]).then(a.cmp(&b)));
    let starts: Vec<Vec<f64>> = order.iter().take(search.starts).map(|&i| grid[i].clone()).collect();
    let opts = SolveOptions { tol: 1e-11, max_iter: 100, fd_step: 1e-7 };
    let refined = exec.map(&starts, |x0| {
        levenberg_marquardt(|x| problem.residuals(x), x0, &lo, &hi, opts).map(|o| Outcome { x: o.x, norm: o.norm })
    });
    let accept = 1e-8;
    let mut best: Option<Outcome> = None;
    let mut roots: Vec<Outcome> = Vec::new();
    for out in refined.into_iter().flatten() {
        if out.norm <= accept {
            let dup = roots.iter().any(|r| r.x.iter().zip(&out.x).all(|(a, b)| (a - b).abs() < 1e-6 * (1.0 + a.abs())));
            if !dup {
                roots.push(Outcome { x: out.x.clone(), norm: out.norm });
            }
        }
        if best.as_ref().is_none_or(|b| out.norm < b.norm) {
            best = Some(out);
        }
    }
    let key = |x: &[f64]| (problem.shape.duration(x), x[0]);
    roots.sort_by(|a, b| {
        let (ka, kb) = (key(&a.x), key(&b.x));
        ka.0.total_cmp(&kb.0).then(ka.1.total_cmp(&kb.1))
    });
    let Some(root) = roots.first() else {
        let best = best.map(|b| (b.norm, b.x)).unwrap_or((f64::INFINITY, vec![]));
        return Err(Error::NoConvergence {
            reason: format!("no root in the search box for {}; best point {:?}", problem.target.name, best.1),
            residual: best.0,
        });
    };
    let branches = roots
        .iter()
        .map(|r| Branch {
            t_c: r.x[0],
            t1: r.x[1],
            t2: (dims == 3).then(|| r.x[2]),
            amplitude: amplitude_for_half_period(problem.gap, r.x[0], problem.p).unwrap_or(f64::NAN),
            duration: problem.shape.duration(&r.x),
            residual: r.norm,
        })
        .collect();
    finish(problem, &root.x, branches)
}

fn finish(problem: &Problem, x: &[f64], branches: Vec<Branch>) -> Result<SynthesisSolution> {
    let drive = problem.drive(x)?;
    let (m, aim_plan) = aim_propagator(problem.model, &drive)?;
    let residuals = problem.residuals(x)?;
    let ph = Phases::from_plan(&aim_plan, problem.levels, problem.shape.passages())?;
    let literal_residuals = match (problem.shape, problem.lambda) {
        (DriveShape::DoublePassage, Some(l)) => swap_family_conditions(&ph, l),
        (DriveShape::Cnot, _) => cnot_conditions(&ph, problem.levels),
        _ => vec![],
    };
    let amplitude = amplitude_for_half_period(problem.gap, x[0], problem.p)?;
    let plan = TwoQubitPlan {
        shape: problem.shape,
        conditions: problem.conditions,
        amplitude,
        omega: 2.0 * PI / x[0],
        t_c: x[0],
        t1: x[1],
        t2: x.get(2).copied(),
        center: problem.center,
        levels: problem.levels,
        gap: problem.gap,
        p: problem.p,
        residuals: residuals.clone(),
        literal_residuals,
        branches,
    };
    Ok(SynthesisSolution {
        target: problem.target.name.clone(),
        method: Method::TwoQubit,
        model: *problem.model,
        drive,
        predicted: Predicted {
            aim_distance: linalg::gate_distance(&m, &problem.target.unitary)?,
            residuals,
            model: "aim".into(),
            warnings: aim_plan.warnings,
        },
        plan: PlanDetails::TwoQubit(plan),
        verification: None,
    })
}

fn two_qubit_params(model: &SystemModel) -> Result<(f64, f64)> {
    match *model {
        SystemModel::TwoQubit { eps1, j, .. } => Ok((eps1, j)),
        _ => Err(Error::invalid("two-qubit synthesis needs a two-qubit model")),
    }
}

fn is_block_gate(g: &CMat, pair: (usize, usize)) -> bool {
    (0..4).all(|k| {
        (0..4).all(|l| {
            let inside = [pair.0, pair.1].contains(&k) && [pair.0, pair.1].contains(&l);
            inside || k == l || g[(k, l)].norm() < 1e-9
        })
    }) && (0..4).filter(|&k| k != pair.0 && k != pair.1).all(|k| (g[(k, k)].norm() - 1.0).abs() < 1e-9)
}

/// SWAP, iSWAP, √SWAP or √iSWAP through the `E₁–E₂` crossing. Full swaps use
/// two passages with `𝒫 = 1/2`; square roots use one passage with
/// `𝒫 = 1/2` and idles on both sides.
pub fn solve_swap_family(
    target: &GateMatrix,
    model: &SystemModel,
    opts: &TwoQubitOptions,
    exec: Exec,
) -> Result<SynthesisSolution> {
    let (eps1, j) = two_qubit_params(model)?;
    linalg::check_square(&target.unitary, 4)?;
    let (site, _) = site_with(model, (1, 2))?;
    let gap = relation_gap(model, (1, 2), opts.gap)?;
    let g = &target.unitary;
    if !is_block_gate(g, site.levels) {
        return Err(Error::invalid(format!("{} does not act on the E1-E2 block alone", target.name)));
    }
    let q = g[(site.levels.0, site.levels.1)].norm_sqr();
    let lambda = match target.name.as_str() {
        "SWAP" => Some(1.0),
        "ISWAP" => Some(0.0),
        _ => None,
    };
    if lambda == Some(1.0) && j == 0.0 {
        return Err(Error::Infeasible(
            "SWAP needs zeta(01) != zeta(23); with XY coupling only (J = 0) two passages cannot realize it".into(),
        ));
    }
    let shape = if q > 1.0 - 1e-9 {
        DriveShape::DoublePassage
    } else if (q - 0.5).abs() < 1e-9 {
        DriveShape::SinglePassage
    } else {
        return Err(Error::invalid(format!("{} is not a swap-family gate", target.name)));
    };
    let problem = Problem {
        model,
        target,
        shape,
        conditions: opts.conditions,
        center: eps1,
        levels: site.levels,
        gap,
        p: 0.5,
        interference: q,
        lambda,
    };
    solve(&problem, &opts.search, exec)
}

/// iSWAP with the symmetric double-passage drive; `A` follows `T_c` so that
/// each passage has `𝒫 = 1/2`.
pub fn solve_iswap(model: &SystemModel, opts: &TwoQubitOptions, exec: Exec) -> Result<SynthesisSolution> {
    solve_swap_family(&standard_gate("ISWAP", None)?, model, opts, exec)
}

/// CNOT through the `E₂–E₃` crossing at `ε₂ = J/2`.
pub fn solve_cnot(model: &SystemModel, opts: &TwoQubitOptions, exec: Exec) -> Result<SynthesisSolution> {
    let (_, j) = two_qubit_params(model)?;
    if !(j > 0.0) {
        return Err(Error::invalid("CNOT needs a positive ZZ coupling J"));
    }
    let target = standard_gate("CNOT", None)?;
    let (site, _) = site_with(model, (2, 3))?;
    let gap = relation_gap(model, (2, 3), opts.gap)?;
    let problem = Problem {
        model,
        target: &target,
        shape: DriveShape::Cnot,
        conditions: opts.conditions,
        center: j / 2.0,
        levels: site.levels,
        gap,
        p: 0.5,
        interference: 1.0,
        lambda: None,
    };
    solve(&problem, &opts.search, exec)
}

/// Gap of the swap-family (`ε₂ = ε₁`) or CNOT (`ε₂ = J/2`) anticrossing.
pub fn crossing_gap(model: &SystemModel, cnot: bool, choice: GapChoice) -> Result<f64> {
    relation_gap(model, if cnot { (2, 3) } else { (1, 2) }, choice)
}

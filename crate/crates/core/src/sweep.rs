//! Error rate against gate duration for resonant and LZSM single-qubit gates.

use serde::{Deserialize, Serialize};

use crate::fidelity::{average_gate_fidelity, standard_gate, GateMatrix};
use crate::ode::Tolerance;
use crate::parallel::Exec;
use crate::synthesis::{self, AmplitudeChoice, Envelope, PlanDetails, SynthesisSolution};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub gate: String,
    pub delta: f64,
    /// Rabi ladder: drive periods per pulse.
    #[serde(default)]
    pub periods: Vec<u32>,
    #[serde(default = "default_envelope")]
    pub envelope: Envelope,
    /// LZSM workpoints are placed at these durations. When empty and a Rabi
    /// ladder is given, the Rabi durations are used.
    #[serde(default)]
    pub lzsm_durations: Vec<f64>,
    #[serde(default)]
    pub lzsm: bool,
    #[serde(default = "default_passages")]
    pub passages: u32,
    #[serde(default = "default_grid")]
    pub grid: usize,
}

fn default_envelope() -> Envelope {
    Envelope::Gaussian { truncation: 2.7 }
}

fn default_passages() -> u32 {
    2
}

fn default_grid() -> usize {
    50
}

impl SweepSpec {
    /// Y gate, Rabi ladder of 1 to 14 periods with a Gaussian envelope cut at
    /// 2.7σ, LZSM workpoints at the same durations.
    pub fn standard(delta: f64) -> Self {
        SweepSpec {
            gate: "Y".into(),
            delta,
            periods: (1..=14).collect(),
            envelope: default_envelope(),
            lzsm_durations: vec![],
            lzsm: true,
            passages: 2,
            grid: 50,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub duration: f64,
    /// `None` when synthesis or propagation failed for this row.
    pub error_rate: Option<f64>,
    pub n_grid: usize,
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

fn row(method: &str, sol: Result<SynthesisSolution>, target: &GateMatrix, grid: usize, tol: Tolerance, exec: Exec) -> SweepRow {
    let evaluated = sol.and_then(|s| {
        let report = average_gate_fidelity(&s.model, &s.drive, target, grid, tol, exec)?;
        let params = match &s.plan {
            PlanDetails::Rabi(p) => serde_json::to_value(p)?,
            PlanDetails::Lzsm(p) => {
                let mut v = serde_json::to_value(p)?;
                // The candidate ladder is long and not needed per row.
                if let Some(obj) = v.as_object_mut() {
                    obj.remove("candidates");
                }
                v
            }
            PlanDetails::TwoQubit(p) => serde_json::to_value(p)?,
        };
        Ok((s.duration(), report.error_rate, params))
    });
    match evaluated {
        Ok((duration, d, params)) => {
            SweepRow { method: method.into(), duration, error_rate: Some(d), n_grid: grid, params, failure: None }
        }
        Err(e) => SweepRow {
            method: method.into(),
            duration: f64::NAN,
            error_rate: None,
            n_grid: grid,
            params: serde_json::Value::Null,
            failure: Some(e.to_string()),
        },
    }
}

/// Rabi rows, one per entry of `periods`.
pub fn rabi_sweep(spec: &SweepSpec, tol: Tolerance, exec: Exec) -> Result<Vec<SweepRow>> {
    let target = standard_gate(&spec.gate, None)?;
    Ok(spec
        .periods
        .iter()
        .map(|&n| {
            let sol = synthesis::rabi_solution(&target, spec.delta, n, spec.envelope);
            let mut r = row("rabi", sol, &target, spec.grid, tol, exec);
            if r.error_rate.is_none() {
                r.params = serde_json::json!({ "n_periods": n });
            }
            r
        })
        .collect())
}

/// Amplitude whose bare multi-passage drive lasts `duration`, from
/// `ω = πΔ² / (2A |ln 𝒫|)`.
fn amplitude_for_duration(delta: f64, p: f64, passages: u32, duration: f64) -> f64 {
    duration * delta * delta / (2.0 * passages as f64 * -p.ln())
}

/// LZSM rows at the requested durations: the interference-satisfying
/// amplitude nearest the one whose passages fill each duration.
pub fn lzsm_sweep(spec: &SweepSpec, durations: &[f64], tol: Tolerance, exec: Exec) -> Result<Vec<SweepRow>> {
    let target = standard_gate(&spec.gate, None)?;
    let g = &target.unitary;
    if g.nrows() != 2 {
        return Err(Error::invalid("LZSM sweeps are single-qubit"));
    }
    let occupation = g[(0, 1)].norm_sqr();
    let p = synthesis::select_probability(spec.passages, occupation)?;
    Ok(durations
        .iter()
        .map(|&d| {
            let a = amplitude_for_duration(spec.delta, p, spec.passages, d);
            let range = (0.8 * a, 1.2 * a + spec.delta);
            let sol = synthesis::solve_multi_passage(
                &target,
                spec.delta,
                spec.passages,
                Some(occupation),
                AmplitudeChoice::Nearest(a),
                range,
            );
            let mut r = row("lzsm", sol, &target, spec.grid, tol, exec);
            if r.error_rate.is_none() {
                r.params = serde_json::json!({ "requested_duration": d });
            }
            r
        })
        .collect())
}

/// Both ladders; LZSM rows are placed at the Rabi durations unless explicit
/// durations are given. Fails only if every row failed.
pub fn error_vs_duration_sweep(spec: &SweepSpec, tol: Tolerance, exec: Exec) -> Result<Vec<SweepRow>> {
    if spec.periods.is_empty() && !(spec.lzsm && !spec.lzsm_durations.is_empty()) {
        return Err(Error::invalid("sweep ladder is empty"));
    }
    let mut rows = rabi_sweep(spec, tol, exec)?;
    if spec.lzsm {
        let durations: Vec<f64> = if spec.lzsm_durations.is_empty() {
            rows.iter().filter(|r| r.error_rate.is_some()).map(|r| r.duration).collect()
        } else {
            spec.lzsm_durations.clone()
        };
        rows.extend(lzsm_sweep(spec, &durations, tol, exec)?);
    }
    if rows.iter().all(|r| r.error_rate.is_none()) {
        let first = rows.first().and_then(|r| r.failure.clone()).unwrap_or_default();
        return Err(Error::Infeasible(format!("every sweep row failed: {first}")));
    }
    Ok(rows)
}

/// Points `(duration, D)` of one method, sorted by duration.
pub fn curve(rows: &[SweepRow], method: &str) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.method == method)
        .filter_map(|r| r.error_rate.map(|d| (r.duration, d)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// Whether `D` never rises by more than `jitter` along the curve.
pub fn is_non_increasing(curve: &[(f64, f64)], jitter: f64) -> bool {
    curve.windows(2).all(|w| w[1].1 <= w[0].1 + jitter)
}

/// Piecewise-linear interpolation of a sorted curve; `None` outside its span.
pub fn interpolate(curve: &[(f64, f64)], t: f64) -> Option<f64> {
    let first = curve.first()?;
    let last = curve.last()?;
    if t < first.0 || t > last.0 {
        return None;
    }
    for w in curve.windows(2) {
        if t <= w[1].0 {
            let span = w[1].0 - w[0].0;
            if span <= 0.0 {
                return Some(w[1].1);
            }
            let s = (t - w[0].0) / span;
            return Some(w[0].1 + s * (w[1].1 - w[0].1));
        }
    }
    Some(last.1)
}

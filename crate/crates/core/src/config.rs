//! JSON run descriptions shared by the command-line tool and the figure
//! configurations.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::validate_density;
use crate::fidelity::{bloch_state, standard_gate, GateMatrix};
use crate::linalg::{self, CMat};
use crate::model::{DriveSignal, SystemModel};
use crate::ode::Tolerance;
use crate::parallel::Exec;
use crate::sweep::SweepSpec;
use crate::synthesis::{
    self, AmplitudeChoice, Conditions, Envelope, GapChoice, Method, SearchBox, SynthesisSolution, TwoQubitOptions,
};
use crate::{Error, Result, C64};

/// Initial state, expressed in the adiabatic basis at the drive start unless
/// stated otherwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    Level { index: usize },
    /// Two-level systems only.
    Bloch { x: f64, y: f64, z: f64 },
    Amplitudes { re: Vec<f64>, im: Vec<f64> },
    Density { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl InitialState {
    /// Density matrix in the adiabatic basis.
    pub fn density(&self, dim: usize) -> Result<CMat> {
        let rho = match self {
            InitialState::Level { index } => {
                if *index >= dim {
                    return Err(Error::invalid(format!("level {index} out of range for dimension {dim}")));
                }
                let mut r = CMat::zeros(dim, dim);
                r[(*index, *index)] = C64::new(1.0, 0.0);
                r
            }
            InitialState::Bloch { x, y, z } => {
                if dim != 2 {
                    return Err(Error::invalid("Bloch initial states need a two-level model"));
                }
                let n = (x * x + y * y + z * z).sqrt();
                if n > 1.0 + 1e-12 {
                    return Err(Error::invalid("Bloch vector longer than 1"));
                }
                if n < 1e-15 {
                    linalg::identity(2) * C64::new(0.5, 0.0)
                } else {
                    // Mixture of the pure state along (x, y, z) with the identity.
                    let psi = bloch_state(x / n, y / n, z / n);
                    let pure = &psi * psi.adjoint();
                    pure * C64::new(n, 0.0) + linalg::identity(2) * C64::new(0.5 * (1.0 - n), 0.0)
                }
            }
            InitialState::Amplitudes { re, im } => {
                if re.len() != dim || im.len() != dim {
                    return Err(Error::Dimension { expected: dim, got: re.len().max(im.len()) });
                }
                let psi = CMat::from_fn(dim, 1, |i, _| C64::new(re[i], im[i]));
                let norm = psi.norm();
                if (norm - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(format!("amplitudes have norm {norm}, expected 1")));
                }
                &psi * psi.adjoint()
            }
            InitialState::Density { re, im } => {
                if re.len() != dim || im.len() != dim || re.iter().chain(im.iter()).any(|r| r.len() != dim) {
                    return Err(Error::Dimension { expected: dim, got: re.len() });
                }
                CMat::from_fn(dim, dim, |i, j| C64::new(re[i][j], im[i][j]))
            }
        };
        validate_density(&rho)?;
        Ok(rho)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub rtol: f64,
    pub atol: f64,
}

impl ToleranceConfig {
    pub fn tolerance(&self) -> Result<Tolerance> {
        Tolerance::new(self.rtol, self.atol)
    }
}

fn default_grid() -> usize {
    50
}

/// What to synthesize and how.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisRequest {
    pub gate: String,
    #[serde(default)]
    pub angle: Option<f64>,
    pub method: Method,
    /// Rabi: drive periods in the pulse.
    #[serde(default)]
    pub n_periods: Option<u32>,
    #[serde(default)]
    pub envelope: Option<Envelope>,
    /// Multi-passage: number of passages (even).
    #[serde(default)]
    pub passages: Option<u32>,
    #[serde(default)]
    pub target_occupation: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<AmplitudeChoice>,
    /// Amplitude search range in units of the model energy scale.
    #[serde(default)]
    pub amplitude_range: Option<(f64, f64)>,
    #[serde(default)]
    pub search: Option<SearchBox>,
    #[serde(default)]
    pub conditions: Conditions,
    #[serde(default)]
    pub gap: GapChoice,
}

impl SynthesisRequest {
    pub fn gate_matrix(&self) -> Result<GateMatrix> {
        standard_gate(&self.gate, self.angle)
    }

    pub fn solve(&self, model: &SystemModel, exec: Exec) -> Result<SynthesisSolution> {
        let target = self.gate_matrix()?;
        let choice = self.amplitude.unwrap_or(AmplitudeChoice::Smallest);
        match (self.method, model) {
            (Method::TwoQubit, SystemModel::TwoQubit { .. }) => {
                let cnot = target.name == "CNOT";
                let search = match &self.search {
                    Some(s) => s.clone(),
                    None => SearchBox::for_gap(synthesis::crossing_gap(model, cnot, self.gap)?),
                };
                let opts = TwoQubitOptions { search, conditions: self.conditions, gap: self.gap };
                if cnot {
                    synthesis::solve_cnot(model, &opts, exec)
                } else {
                    synthesis::solve_swap_family(&target, model, &opts, exec)
                }
            }
            (Method::TwoQubit, _) => Err(Error::invalid("two-qubit synthesis needs a two-qubit model")),
            (_, SystemModel::TwoLevel { delta }) => {
                let delta = *delta;
                let range = self.amplitude_range.unwrap_or((1.05 * delta, 12.0 * delta));
                let range = (range.0.max(1e-3 * delta), range.1);
                match self.method {
                    Method::Rabi => synthesis::rabi_solution(
                        &target,
                        delta,
                        self.n_periods.unwrap_or(10),
                        self.envelope.unwrap_or(Envelope::Rectangular),
                    ),
                    Method::LzsmSingle => synthesis::solve_single_passage(&target, delta, choice, range),
                    Method::LzsmDouble => synthesis::solve_double_passage(&target, delta, choice, range),
                    Method::LzsmMulti => synthesis::solve_multi_passage(
                        &target,
                        delta,
                        self.passages.unwrap_or(4),
                        self.target_occupation,
                        choice,
                        range,
                    ),
                    Method::TwoQubit => unreachable!("handled above"),
                }
            }
            (_, _) => Err(Error::invalid("single-qubit methods need a two-level model")),
        }
    }
}

/// A complete run description: model, optional drive and initial state for
/// simulation, optional synthesis request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: SystemModel,
    #[serde(default)]
    pub drive: Option<DriveSignal>,
    #[serde(default)]
    pub initial: Option<InitialState>,
    #[serde(default)]
    pub synthesis: Option<SynthesisRequest>,
    #[serde(default)]
    pub tolerance: Option<ToleranceConfig>,
    /// Output samples for trajectories.
    #[serde(default)]
    pub points: Option<usize>,
    /// Tomography grid size for verification.
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default)]
    pub spectrum: Option<SpectrumRange>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

/// Detuning window for energy-level dumps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumRange {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.model.validate()?;
        if let Some(t) = cfg.tolerance {
            t.tolerance()?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn tol(&self) -> Result<Tolerance> {
        match self.tolerance {
            Some(t) => t.tolerance(),
            None => Ok(Tolerance::default()),
        }
    }

    pub fn require_drive(&self) -> Result<&DriveSignal> {
        self.drive.as_ref().ok_or_else(|| Error::invalid("configuration has no drive"))
    }
}

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lzsm_core::aim::aim_propagator;
use lzsm_core::config::{InitialState, RunConfig, SpectrumRange, SynthesisRequest};
use lzsm_core::dynamics::{adiabatic_frames, bloch_trajectory, bloch_vector, evolve_density, occupation_trajectory, uniform_grid};
use lzsm_core::model::{energy_sweep, from_adiabatic, SystemModel};
use lzsm_core::ode::Tolerance;
use lzsm_core::parallel::Exec;
use lzsm_core::sweep::{error_vs_duration_sweep, SweepRow, SweepSpec};
use lzsm_core::synthesis::{AmplitudeChoice, Conditions, GapChoice, Method};
use lzsm_core::Error;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "lzsm", version, about = "Gate synthesis by Landau-Zener-Stückelberg-Majorana interference")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Adiabatic energy levels over a detuning window.
    Spectrum(SpectrumArgs),
    /// Exact trajectory of a drive, optionally next to the impulse-model prediction.
    Simulate(SimulateArgs),
    /// Solve for a drive realizing a gate.
    Synthesize(SynthesizeArgs),
    /// Error rate against gate duration for resonant and LZSM drives.
    Sweep(SweepArgs),
    /// Print the unit conventions.
    Units,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Tomography grid size.
    #[arg(long)]
    grid: Option<usize>,
    /// Relative integration tolerance, within [1e-14, 1e-4].
    #[arg(long)]
    tol: Option<f64>,
    /// Qubit gap for an inline two-level model when no config is given.
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Observable {
    Bloch,
    Occupations,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Defaults to Bloch components for two-level models, occupations otherwise.
    #[arg(long, value_enum)]
    observable: Option<Observable>,
    /// Add impulse-model prediction columns.
    #[arg(long)]
    aim: bool,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Rabi,
    LzsmSingle,
    LzsmDouble,
    LzsmMulti,
    TwoQubit,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Rabi => Method::Rabi,
            MethodArg::LzsmSingle => Method::LzsmSingle,
            MethodArg::LzsmDouble => Method::LzsmDouble,
            MethodArg::LzsmMulti => Method::LzsmMulti,
            MethodArg::TwoQubit => Method::TwoQubit,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConditionsArg {
    Target,
    Literal,
}

#[derive(Args)]
struct SynthesizeArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    gate: Option<String>,
    /// Rotation angle for parametrized gates.
    #[arg(long, allow_negative_numbers = true)]
    angle: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    passages: Option<u32>,
    /// Rabi pulse length in drive periods.
    #[arg(long)]
    periods: Option<u32>,
    /// Take the candidate amplitude nearest to this value.
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long, value_enum)]
    conditions: Option<ConditionsArg>,
    /// Use the bare coupling instead of the numerical minimum gap.
    #[arg(long)]
    bare_gap: bool,
    /// Integrate the synthesized drive exactly and report tomography fidelity.
    #[arg(long)]
    verify: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMethod {
    Rabi,
    Lzsm,
    Both,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value_t = SweepMethod::Both)]
    method: SweepMethod,
    /// Rabi ladder as `a..b` (inclusive) or a comma list.
    #[arg(long)]
    periods: Option<String>,
    #[arg(long)]
    gate: Option<String>,
    #[arg(long)]
    passages: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

enum Failure {
    Usage(String),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Core(e) => match e {
                Error::Infeasible(_) => 2,
                Error::NoConvergence { .. }
                | Error::StepUnderflow { .. }
                | Error::TooManySteps { .. }
                | Error::Quadrature { .. }
                | Error::DegenerateSpectrum { .. }
                | Error::TangentialCrossing { .. } => 3,
                _ => 1,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Core(e) => write!(f, "{e}"),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

/// Loads the configuration, or builds a two-level one from `--delta`.
fn load(common: &Common, require_file: bool) -> Outcome<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None if require_file => return Err(usage("this command needs --config")),
        None => RunConfig::from_json(&json!({ "model": { "kind": "two_level", "delta": 1.0 } }).to_string())?,
    };
    if let Some(delta) = common.delta {
        match cfg.model {
            SystemModel::TwoLevel { .. } => cfg.model = SystemModel::two_level(delta)?,
            SystemModel::TwoQubit { .. } => return Err(usage("--delta applies to two-level models only")),
        }
    }
    if let Some(grid) = common.grid {
        if grid == 0 {
            return Err(usage("--grid must be positive"));
        }
        cfg.grid = grid;
    }
    tolerance(common, &cfg)?;
    Ok(cfg)
}

fn tolerance(common: &Common, cfg: &RunConfig) -> Outcome<Tolerance> {
    match common.tol {
        Some(x) if (1e-14..=1e-4).contains(&x) => Ok(Tolerance::new(x, (x / 100.0).max(1e-15))?),
        Some(x) => Err(usage(format!("--tol {x} outside [1e-14, 1e-4]"))),
        None => Ok(cfg.tol()?),
    }
}

/// First output line: tool version and a hash of everything that determines
/// the output.
fn header(command: &str, effective: &Value) -> String {
    let canonical = json!({ "command": command, "input": effective }).to_string();
    let hash = hex::encode(Sha256::digest(canonical.as_bytes()));
    format!("# lzsm {} config-sha256 {hash}\n", env!("CARGO_PKG_VERSION"))
}

fn emit(common: &Common, command: &str, effective: &Value, body: &str) -> Outcome<()> {
    let mut text = header(command, effective);
    text.push_str(body);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Outcome<Value> {
    serde_json::to_value(x).map_err(|e| Failure::Core(e.into()))
}

fn pretty<T: serde::Serialize>(v: &T) -> Outcome<String> {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Core(e.into()))
}

fn spectrum(args: &SpectrumArgs) -> Outcome<()> {
    let cfg = load(&args.common, false)?;
    let range = cfg.spectrum.unwrap_or(SpectrumRange { from: -10.0, to: 10.0, points: 401 });
    let range = SpectrumRange {
        from: args.from.unwrap_or(range.from),
        to: args.to.unwrap_or(range.to),
        points: args.points.unwrap_or(range.points),
    };
    let rows = energy_sweep(&cfg.model, range.from, range.to, range.points)?;
    let n = cfg.model.dim();
    let body = match args.format {
        Format::Csv => {
            let mut s = String::from("epsilon");
            for i in 0..n {
                let _ = write!(s, ",E{i}");
            }
            s.push('\n');
            for (eps, e) in &rows {
                s.push_str(&num(*eps));
                for x in e {
                    s.push(',');
                    s.push_str(&num(*x));
                }
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let list: Vec<Value> = rows.iter().map(|(eps, e)| json!({ "epsilon": eps, "energies": e })).collect();
            pretty(&Value::Array(list))?
        }
    };
    let effective = json!({ "model": to_value(&cfg.model)?, "range": to_value(&range)?, "format": args.format == Format::Json });
    emit(&args.common, "spectrum", &effective, &body)
}

fn simulate(args: &SimulateArgs) -> Outcome<()> {
    let cfg = load(&args.common, true)?;
    let tol = tolerance(&args.common, &cfg)?;
    // Without an explicit drive, simulate the synthesized one.
    let solved;
    let drive = match (&cfg.drive, &cfg.synthesis) {
        (Some(d), _) => d,
        (None, Some(request)) => {
            solved = request.solve(&cfg.model, Exec::default())?;
            &solved.drive
        }
        (None, None) => cfg.require_drive()?,
    };
    let n = cfg.model.dim();
    let initial = cfg.initial.clone().unwrap_or(InitialState::Level { index: 0 });
    let rho0 = initial.density(n)?;
    let points = args.points.or(cfg.points).unwrap_or(201);
    if points < 2 {
        return Err(usage("need at least 2 output points"));
    }
    let observable = args.observable.unwrap_or(if n == 2 { Observable::Bloch } else { Observable::Occupations });
    if observable == Observable::Bloch && n != 2 {
        return Err(usage("Bloch output needs a two-level model"));
    }
    let grid = uniform_grid(drive, points);
    let start = adiabatic_frames(&cfg.model, drive, &[drive.t_start()])?;
    let rho0_diabatic = from_adiabatic(&rho0, &start[0])?;
    let traj = evolve_density(&cfg.model, drive, &rho0_diabatic, &grid, tol)?;
    let mut rows: Vec<Vec<f64>> = match observable {
        Observable::Bloch => bloch_trajectory(&cfg.model, drive, &traj)?.into_iter().map(|r| r.to_vec()).collect(),
        Observable::Occupations => occupation_trajectory(&cfg.model, drive, &traj)?,
    };
    let mut names: Vec<String> = match observable {
        Observable::Bloch => ["t", "x", "y", "z"].iter().map(|s| s.to_string()).collect(),
        Observable::Occupations => std::iter::once("t".to_string()).chain((0..n).map(|i| format!("P{i}"))).collect(),
    };
    if args.aim {
        let width = names.len() - 1;
        names.extend(names[1..].iter().map(|c| format!("aim_{c}")).collect::<Vec<_>>());
        for (row, &t) in rows.iter_mut().zip(&grid) {
            let predicted = aim_row(&cfg.model, drive, &rho0, t, observable);
            row.extend(predicted.unwrap_or_else(|_| vec![f64::NAN; width]));
        }
    }
    let body = match args.format {
        Format::Csv => {
            let mut s = names.join(",");
            s.push('\n');
            for r in &rows {
                s.push_str(&r.iter().map(|x| num(*x)).collect::<Vec<_>>().join(","));
                s.push('\n');
            }
            s
        }
        Format::Json => {
            let list: Vec<Value> = rows
                .iter()
                .map(|r| {
                    let obj = names.iter().zip(r).map(|(k, v)| (k.clone(), json!(v))).collect();
                    Value::Object(obj)
                })
                .collect();
            pretty(&Value::Array(list))?
        }
    };
    let effective = json!({
        "config": to_value(&cfg)?,
        "tol": [tol.rtol, tol.atol],
        "points": points,
        "observable": observable == Observable::Bloch,
        "aim": args.aim,
        "format": args.format == Format::Json,
    });
    emit(&args.common, "simulate", &effective, &body)
}

/// Impulse-model prediction of the observable at `t`, applied to the
/// initial adiabatic-basis state.
fn aim_row(
    model: &SystemModel,
    drive: &lzsm_core::model::DriveSignal,
    rho0: &lzsm_core::linalg::CMat,
    t: f64,
    observable: Observable,
) -> lzsm_core::Result<Vec<f64>> {
    let rho = if t <= drive.t_start() {
        rho0.clone()
    } else {
        let (u, _) = aim_propagator(model, &drive.truncated(t)?)?;
        &u * rho0 * u.adjoint()
    };
    Ok(match observable {
        Observable::Bloch => bloch_vector(&rho)?.to_vec(),
        Observable::Occupations => rho.diagonal().iter().map(|z| z.re).collect(),
    })
}

fn synthesize(args: &SynthesizeArgs) -> Outcome<()> {
    let cfg = load(&args.common, false)?;
    let tol = tolerance(&args.common, &cfg)?;
    let mut request = match (&cfg.synthesis, &args.gate) {
        (Some(r), _) => r.clone(),
        (None, Some(gate)) => SynthesisRequest {
            gate: gate.clone(),
            angle: None,
            method: match cfg.model {
                SystemModel::TwoLevel { .. } => Method::LzsmDouble,
                SystemModel::TwoQubit { .. } => Method::TwoQubit,
            },
            n_periods: None,
            envelope: None,
            passages: None,
            target_occupation: None,
            amplitude: None,
            amplitude_range: None,
            search: None,
            conditions: Conditions::default(),
            gap: GapChoice::default(),
        },
        (None, None) => return Err(usage("give --gate or a config with a synthesis block")),
    };
    if let Some(gate) = &args.gate {
        request.gate = gate.clone();
    }
    if args.angle.is_some() {
        request.angle = args.angle;
    }
    if let Some(m) = args.method {
        request.method = m.into();
    }
    if args.passages.is_some() {
        request.passages = args.passages;
    }
    if args.periods.is_some() {
        request.n_periods = args.periods;
    }
    if let Some(a) = args.amplitude {
        request.amplitude = Some(AmplitudeChoice::Nearest(a));
    }
    if let Some(c) = args.conditions {
        request.conditions = match c {
            ConditionsArg::Target => Conditions::Target,
            ConditionsArg::Literal => Conditions::Literal,
        };
    }
    if args.bare_gap {
        request.gap = GapChoice::Bare;
    }
    let mut solution = request.solve(&cfg.model, Exec::default())?;
    if args.verify {
        let target = request.gate_matrix()?;
        solution.verify(&target, cfg.grid, tol, Exec::default())?;
    }
    let body = pretty(&solution)?;
    let effective = json!({
        "model": to_value(&cfg.model)?,
        "request": to_value(&request)?,
        "verify": args.verify,
        "grid": cfg.grid,
        "tol": [tol.rtol, tol.atol],
    });
    emit(&args.common, "synthesize", &effective, &body)
}

fn parse_periods(text: &str) -> Outcome<Vec<u32>> {
    let bad = || usage(format!("cannot parse --periods {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse().map_err(|_| bad()))
        .collect()
}

fn sweep(args: &SweepArgs) -> Outcome<()> {
    let cfg = load(&args.common, false)?;
    let tol = tolerance(&args.common, &cfg)?;
    let delta = match cfg.model {
        SystemModel::TwoLevel { delta } => delta,
        SystemModel::TwoQubit { .. } => return Err(usage("sweeps need a two-level model")),
    };
    let mut spec = cfg.sweep.clone().unwrap_or_else(|| SweepSpec::standard(delta));
    if cfg.sweep.is_some() && (spec.delta - delta).abs() > 1e-12 * delta {
        return Err(usage(format!("sweep delta {} differs from model delta {delta}", spec.delta)));
    }
    spec.delta = delta;
    if let Some(p) = &args.periods {
        spec.periods = parse_periods(p)?;
        if spec.periods.is_empty() {
            return Err(usage("sweep ladder is empty"));
        }
    }
    if let Some(g) = &args.gate {
        spec.gate = g.clone();
    }
    if args.passages.is_some() {
        spec.passages = args.passages.unwrap_or(spec.passages);
    }
    if let Some(grid) = args.common.grid {
        spec.grid = grid;
    }
    spec.lzsm = args.method != SweepMethod::Rabi && (spec.lzsm || args.method == SweepMethod::Lzsm);
    let rows = error_vs_duration_sweep(&spec, tol, Exec::default())?;
    let rows: Vec<SweepRow> = match args.method {
        SweepMethod::Lzsm => rows.into_iter().filter(|r| r.method == "lzsm").collect(),
        _ => rows,
    };
    if rows.iter().all(|r| r.error_rate.is_none()) {
        let why = rows.first().and_then(|r| r.failure.clone()).unwrap_or_default();
        return Err(Failure::Core(Error::Infeasible(format!("every sweep row failed: {why}"))));
    }
    let body = match args.format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| usage(format!("csv: {e}"));
            w.write_record(["method", "duration", "error_rate", "n_grid", "params_json"]).map_err(io)?;
            for r in &rows {
                let mut params = r.params.clone();
                if let (Some(msg), Value::Object(obj)) = (&r.failure, &mut params) {
                    obj.insert("failure".into(), json!(msg));
                }
                let params = match (&r.failure, params) {
                    (Some(msg), Value::Null) => json!({ "failure": msg }),
                    (_, p) => p,
                };
                w.write_record([
                    r.method.clone(),
                    num(r.duration),
                    r.error_rate.map(num).unwrap_or_default(),
                    r.n_grid.to_string(),
                    params.to_string(),
                ])
                .map_err(io)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| usage(format!("csv: {e}")))?).expect("csv output is utf-8")
        }
        Format::Json => pretty(&rows)?,
    };
    let effective = json!({ "spec": to_value(&spec)?, "tol": [tol.rtol, tol.atol], "method": args.method as u8, "format": args.format == Format::Json });
    emit(&args.common, "sweep", &effective, &body)
}

const UNITS: &str = "\
units:
  hbar: 1
  energy: qubit gap Delta (single qubit) or coupling g (two qubits)
  time: inverse energy unit, so a drive period is 2*pi/omega
  quoted_times: a time written as x*h/E converts to T = 2*pi*x/E
  drive: epsilon(t) is the bias of the driven qubit in energy units
";

fn configure_threads() -> Outcome<()> {
    let Ok(text) = std::env::var("LZSM_THREADS") else {
        return Ok(());
    };
    let n: usize = text.trim().parse().map_err(|_| usage(format!("LZSM_THREADS={text:?} is not a count")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(format!("cannot size the thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Outcome<()> {
    configure_threads()?;
    match &cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Simulate(a) => simulate(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Sweep(a) => sweep(a),
        Command::Units => {
            let common = Common { config: None, out: None, grid: None, tol: None, delta: None };
            emit(&common, "units", &Value::Null, UNITS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

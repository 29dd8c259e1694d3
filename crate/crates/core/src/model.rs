//! Hamiltonians, piecewise drive waveforms, instantaneous spectra and the
//! diabatic/adiabatic basis change.
//!
//! Single qubit: `H = ½ [[ε, Δ], [Δ, −ε]]`.
//! Two qubits (basis |00⟩, |01⟩, |10⟩, |11⟩, qubit 1 first):
//! `H = −½ Σ_i (Δ_i σx⁽ⁱ⁾ + ε_i σz⁽ⁱ⁾) − g/4 (σxσx + σyσy) − J/4 σzσz`,
//! with the drive acting on ε₂.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, kron, CMat};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemModel {
    TwoLevel { delta: f64 },
    TwoQubit { delta1: f64, delta2: f64, eps1: f64, g: f64, j: f64 },
}

/// A declared anticrossing: the drive value where two diabatic states cross
/// and the adjacent adiabatic levels they connect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnticrossingSite {
    pub location: f64,
    pub diabatic: (usize, usize),
    pub levels: (usize, usize),
}

impl SystemModel {
    pub fn two_level(delta: f64) -> Result<Self> {
        let m = SystemModel::TwoLevel { delta };
        m.validate()?;
        Ok(m)
    }

    pub fn two_qubit(delta1: f64, delta2: f64, eps1: f64, g: f64, j: f64) -> Result<Self> {
        let m = SystemModel::TwoQubit { delta1, delta2, eps1, g, j };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            SystemModel::TwoLevel { delta } => {
                if !(delta.is_finite() && delta > 0.0) {
                    return Err(Error::invalid(format!("delta must be positive, got {delta}")));
                }
            }
            SystemModel::TwoQubit { delta1, delta2, eps1, g, j } => {
                let all = [delta1, delta2, eps1, g, j];
                if all.iter().any(|x| !x.is_finite()) {
                    return Err(Error::invalid("two-qubit parameters must be finite"));
                }
                if delta1 <= 0.0 || delta2 <= 0.0 {
                    return Err(Error::invalid("delta1 and delta2 must be positive"));
                }
                if g < 0.0 || j < 0.0 {
                    return Err(Error::invalid("g and j must be non-negative"));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            SystemModel::TwoLevel { .. } => 2,
            SystemModel::TwoQubit { .. } => 4,
        }
    }

    /// Hamiltonian in the diabatic basis for drive value `eps`.
    pub fn hamiltonian(&self, eps: f64) -> CMat {
        match *self {
            SystemModel::TwoLevel { delta } => {
                linalg::real_matrix(2, 2, &[eps / 2.0, delta / 2.0, delta / 2.0, -eps / 2.0])
            }
            SystemModel::TwoQubit { delta1, delta2, eps1, g, j } => {
                let id = linalg::identity(2);
                let (x, y, z) = (linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z());
                let single = kron(&x, &id) * c(delta1, 0.0)
                    + kron(&id, &x) * c(delta2, 0.0)
                    + kron(&z, &id) * c(eps1, 0.0)
                    + kron(&id, &z) * c(eps, 0.0);
                let xy = kron(&x, &x) + kron(&y, &y);
                let zz = kron(&z, &z);
                single * c(-0.5, 0.0) - xy * c(g / 4.0, 0.0) - zz * c(j / 4.0, 0.0)
            }
        }
    }

    pub fn energies(&self, eps: f64) -> Vec<f64> {
        match *self {
            SystemModel::TwoLevel { delta } => {
                let half = 0.5 * eps.hypot(delta);
                vec![-half, half]
            }
            SystemModel::TwoQubit { .. } => linalg::eigvalsh(&self.hamiltonian(eps)),
        }
    }

    /// Energies of the diabatic basis states (diagonal of `H`).
    pub fn diabatic_energies(&self, eps: f64) -> Vec<f64> {
        self.hamiltonian(eps).diagonal().iter().map(|z| z.re).collect()
    }

    /// Anticrossings known analytically for this model, ordered by location.
    pub fn anticrossing_sites(&self) -> Result<Vec<AnticrossingSite>> {
        match *self {
            SystemModel::TwoLevel { .. } => {
                Ok(vec![AnticrossingSite { location: 0.0, diabatic: (0, 1), levels: (0, 1) }])
            }
            SystemModel::TwoQubit { eps1, j, .. } => {
                let raw = [(-j / 2.0, (0, 1)), (j / 2.0, (2, 3)), (eps1, (1, 2))];
                let mut sites = Vec::new();
                for (location, diabatic) in raw {
                    let e = self.diabatic_energies(location);
                    let level_e = e[diabatic.0];
                    let scale = 1e-9 * (1.0 + level_e.abs());
                    let below = e.iter().filter(|&&x| x < level_e - scale).count();
                    let equal = e.iter().filter(|&&x| (x - level_e).abs() <= scale).count();
                    if equal != 2 {
                        return Err(Error::invalid(format!(
                            "anticrossing at eps2 = {location} coincides with another crossing"
                        )));
                    }
                    sites.push(AnticrossingSite { location, diabatic, levels: (below, below + 1) });
                }
                sites.sort_by(|a, b| a.location.total_cmp(&b.location));
                Ok(sites)
            }
        }
    }

    /// Minimal adiabatic gap of the site's level pair, searched near the
    /// declared location (golden section).
    pub fn min_gap(&self, site: &AnticrossingSite) -> Result<(f64, f64)> {
        if let SystemModel::TwoLevel { delta } = *self {
            return Ok((site.location, delta));
        }
        let sites = self.anticrossing_sites()?;
        let mut width = match *self {
            SystemModel::TwoQubit { delta1, delta2, g, .. } => 2.0 * delta1.max(delta2).max(g),
            SystemModel::TwoLevel { delta } => 2.0 * delta,
        };
        for s in &sites {
            let d = (s.location - site.location).abs();
            if d > 0.0 {
                width = width.min(0.5 * d);
            }
        }
        let (i, j) = site.levels;
        let gap = |eps: f64| {
            let e = self.energies(eps);
            e[j] - e[i]
        };
        let eps = golden_min(gap, site.location - width, site.location + width, 1e-11);
        Ok((eps, gap(eps)))
    }
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while (b - a).abs() > tol * (1.0 + a.abs().max(b.abs())) {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Segment {
    Constant {
        t_start: f64,
        t_end: f64,
        level: f64,
    },
    /// Straight ramp from `from` at `t_start` to `to` at `t_end`.
    Linear {
        t_start: f64,
        t_end: f64,
        from: f64,
        to: f64,
    },
    /// `offset + amplitude · sin(omega · t + phase)` with absolute time `t`.
    Harmonic {
        t_start: f64,
        t_end: f64,
        offset: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// `a0 · exp(−(t − center)² / 2 width²) · sin(omega · t + phase)`, zero
    /// where `|t − center| > truncation · width`.
    GaussianHarmonic {
        t_start: f64,
        t_end: f64,
        a0: f64,
        omega: f64,
        center: f64,
        width: f64,
        truncation: f64,
        #[serde(default)]
        phase: f64,
    },
}

impl Segment {
    pub fn t_start(&self) -> f64 {
        match *self {
            Segment::Constant { t_start, .. }
            | Segment::Linear { t_start, .. }
            | Segment::Harmonic { t_start, .. }
            | Segment::GaussianHarmonic { t_start, .. } => t_start,
        }
    }

    pub fn t_end(&self) -> f64 {
        match *self {
            Segment::Constant { t_end, .. }
            | Segment::Linear { t_end, .. }
            | Segment::Harmonic { t_end, .. }
            | Segment::GaussianHarmonic { t_end, .. } => t_end,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Segment::Constant { level, .. } => level,
            Segment::Linear { t_start, t_end, from, to } => {
                if t_end > t_start {
                    from + (to - from) * (t - t_start) / (t_end - t_start)
                } else {
                    from
                }
            }
            Segment::Harmonic { offset, amplitude, omega, phase, .. } => offset + amplitude * (omega * t + phase).sin(),
            Segment::GaussianHarmonic { a0, omega, center, width, truncation, phase, .. } => {
                let x = (t - center) / width;
                if x.abs() > truncation {
                    0.0
                } else {
                    a0 * (-0.5 * x * x).exp() * (omega * t + phase).sin()
                }
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Segment::Constant { .. } => 0.0,
            Segment::Linear { t_start, t_end, from, to } => {
                if t_end > t_start {
                    (to - from) / (t_end - t_start)
                } else {
                    0.0
                }
            }
            Segment::Harmonic { amplitude, omega, phase, .. } => amplitude * omega * (omega * t + phase).cos(),
            Segment::GaussianHarmonic { a0, omega, center, width, truncation, phase, .. } => {
                let x = (t - center) / width;
                if x.abs() > truncation {
                    0.0
                } else {
                    let env = a0 * (-0.5 * x * x).exp();
                    env * (omega * (omega * t + phase).cos() - x / width * (omega * t + phase).sin())
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let fields: Vec<f64> = match *self {
            Segment::Constant { t_start, t_end, level } => vec![t_start, t_end, level],
            Segment::Linear { t_start, t_end, from, to } => vec![t_start, t_end, from, to],
            Segment::Harmonic { t_start, t_end, offset, amplitude, omega, phase } => {
                vec![t_start, t_end, offset, amplitude, omega, phase]
            }
            Segment::GaussianHarmonic { t_start, t_end, a0, omega, center, width, truncation, phase } => {
                if width <= 0.0 || truncation <= 0.0 {
                    return Err(Error::invalid("gaussian width and truncation must be positive"));
                }
                vec![t_start, t_end, a0, omega, center, width, truncation, phase]
            }
        };
        if fields.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("segment fields must be finite"));
        }
        if self.t_end() < self.t_start() {
            return Err(Error::invalid(format!(
                "segment ends before it starts: [{}, {}]",
                self.t_start(),
                self.t_end()
            )));
        }
        Ok(())
    }

    /// Times in `[t_start, t_end]` where the segment equals `level`.
    fn roots(&self, level: f64) -> Result<Vec<f64>> {
        let (a, b) = (self.t_start(), self.t_end());
        let mut out = Vec::new();
        match *self {
            Segment::Constant { level: v, .. } => {
                if (v - level).abs() <= 1e-12 * (1.0 + level.abs()) {
                    return Err(Error::TangentialCrossing { t: a });
                }
            }
            Segment::Linear { from, to, .. } => {
                if from == to {
                    if (from - level).abs() <= 1e-12 * (1.0 + level.abs()) {
                        return Err(Error::TangentialCrossing { t: a });
                    }
                } else {
                    let s = (level - from) / (to - from);
                    if (0.0..=1.0).contains(&s) {
                        out.push(a + s * (b - a));
                    }
                }
            }
            Segment::Harmonic { offset, amplitude, omega, phase, .. } => {
                if amplitude == 0.0 || omega == 0.0 {
                    let v = self.value(a);
                    if (v - level).abs() <= 1e-12 * (1.0 + level.abs()) {
                        return Err(Error::TangentialCrossing { t: a });
                    }
                    return Ok(out);
                }
                let s = (level - offset) / amplitude;
                if s.abs() > 1.0 + 1e-12 {
                    return Ok(out);
                }
                let base = s.clamp(-1.0, 1.0).asin();
                let two_pi = 2.0 * std::f64::consts::PI;
                for theta in [base, std::f64::consts::PI - base] {
                    // Solve omega·t + phase = theta + 2πk for t in [a, b].
                    let (lo, hi) = if omega > 0.0 { (a, b) } else { (b, a) };
                    let k_lo = ((omega * lo + phase - theta) / two_pi).floor() as i64 - 1;
                    let k_hi = ((omega * hi + phase - theta) / two_pi).ceil() as i64 + 1;
                    for k in k_lo..=k_hi {
                        let t = (theta + two_pi * k as f64 - phase) / omega;
                        let slack = 1e-12 * (1.0 + t.abs());
                        if t >= a - slack && t <= b + slack {
                            out.push(t.clamp(a, b));
                        }
                    }
                }
            }
            Segment::GaussianHarmonic { omega, .. } => {
                let n = (((b - a) * omega.abs() / (2.0 * std::f64::consts::PI)) * 64.0).ceil().max(256.0) as usize;
                let g = |t: f64| self.value(t) - level;
                let mut t_prev = a;
                let mut g_prev = g(a);
                if g_prev == 0.0 {
                    out.push(a);
                }
                for i in 1..=n {
                    let t = a + (b - a) * i as f64 / n as f64;
                    let gt = g(t);
                    if gt == 0.0 {
                        out.push(t);
                    } else if g_prev * gt < 0.0 {
                        let (mut lo, mut hi) = (t_prev, t);
                        for _ in 0..200 {
                            let mid = 0.5 * (lo + hi);
                            if mid <= lo || mid >= hi {
                                break;
                            }
                            if g(lo) * g(mid) <= 0.0 {
                                hi = mid;
                            } else {
                                lo = mid;
                            }
                        }
                        out.push(0.5 * (lo + hi));
                    }
                    t_prev = t;
                    g_prev = gt;
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * (1.0 + x.abs()));
        Ok(out)
    }
}

#[derive(Clone, Debug, Deserialize)]
struct RawDrive {
    segments: Vec<Segment>,
}

/// Piecewise drive `ε(t)` (or `ε₂(t)` for two qubits) on a contiguous support.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDrive")]
pub struct DriveSignal {
    segments: Vec<Segment>,
}

impl TryFrom<RawDrive> for DriveSignal {
    type Error = Error;
    fn try_from(raw: RawDrive) -> Result<Self> {
        DriveSignal::new(raw.segments)
    }
}

impl DriveSignal {
    /// Validates contiguity and continuity; zero-length segments are dropped.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            s.validate()?;
        }
        let segments: Vec<Segment> = segments.into_iter().filter(|s| s.t_end() > s.t_start()).collect();
        if segments.is_empty() {
            return Err(Error::invalid("drive must have positive total duration"));
        }
        for w in segments.windows(2) {
            let t = w[0].t_end();
            if (w[1].t_start() - t).abs() > 1e-12 * (1.0 + t.abs()) {
                return Err(Error::invalid(format!(
                    "segments are not contiguous: {} then {}",
                    t,
                    w[1].t_start()
                )));
            }
            let (l, r) = (w[0].value(t), w[1].value(w[1].t_start()));
            let jump = (l - r).abs();
            if jump > 1e-9 * (1.0 + l.abs().max(r.abs())) {
                return Err(Error::Discontinuous { t, jump });
            }
        }
        Ok(DriveSignal { segments })
    }

    pub fn constant(level: f64, t_start: f64, t_end: f64) -> Result<Self> {
        DriveSignal::new(vec![Segment::Constant { t_start, t_end, level }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn t_start(&self) -> f64 {
        self.segments[0].t_start()
    }

    pub fn t_end(&self) -> f64 {
        self.segments[self.segments.len() - 1].t_end()
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start()
    }

    /// Segment boundaries including both ends of the support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.segments.iter().map(|s| s.t_start()).collect();
        b.push(self.t_end());
        b
    }

    fn check(&self, t: f64) -> Result<()> {
        let (a, b) = (self.t_start(), self.t_end());
        let slack = 1e-12 * (1.0 + a.abs().max(b.abs()));
        if !(t >= a - slack && t <= b + slack) {
            return Err(Error::OutsideSupport { t, start: a, end: b });
        }
        Ok(())
    }

    fn segment_at(&self, t: f64) -> &Segment {
        let idx = self.segments.partition_point(|s| s.t_start() <= t);
        &self.segments[idx.saturating_sub(1)]
    }

    /// Evaluates without a support check (the caller guarantees the range).
    pub fn eval(&self, t: f64) -> f64 {
        self.segment_at(t).value(t)
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.eval(t))
    }

    pub fn derivative(&self, t: f64) -> Result<f64> {
        self.check(t)?;
        Ok(self.segment_at(t).derivative(t))
    }

    /// The drive restricted to `[t_start, t]`.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        self.check(t)?;
        let mut out = Vec::new();
        for s in &self.segments {
            if s.t_start() >= t {
                break;
            }
            let mut s = *s;
            if s.t_end() > t {
                let end_value = s.value(t);
                match &mut s {
                    Segment::Linear { t_end, to, .. } => {
                        *t_end = t;
                        *to = end_value;
                    }
                    Segment::Constant { t_end, .. }
                    | Segment::Harmonic { t_end, .. }
                    | Segment::GaussianHarmonic { t_end, .. } => *t_end = t,
                }
            }
            out.push(s);
        }
        DriveSignal::new(out)
    }

    /// Extrema of the drive, sampled (for range checks and reporting).
    pub fn range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.segments {
            for i in 0..=512 {
                let t = s.t_start() + (s.t_end() - s.t_start()) * i as f64 / 512.0;
                let v = s.value(t);
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

pub fn hamiltonian_at(model: &SystemModel, drive: &DriveSignal, t: f64) -> Result<CMat> {
    Ok(model.hamiltonian(drive.value(t)?))
}

/// Instantaneous adiabatic spectrum. Columns of `basis_change` are the
/// adiabatic states in the diabatic basis.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub basis_change: CMat,
}

impl Spectrum {
    pub fn at_eps(model: &SystemModel, eps: f64) -> Result<Self> {
        let h = model.hamiltonian(eps);
        let mut e = linalg::eigh(&h);
        let scale = 1.0 + e.values.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let gap = e.values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if gap < 1e-10 * scale {
            return Err(Error::DegenerateSpectrum { gap });
        }
        linalg::fix_largest_component(&mut e.vectors);
        Ok(Spectrum { energies: e.values, basis_change: e.vectors })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }
}

pub fn spectrum_at(model: &SystemModel, drive: &DriveSignal, t: f64) -> Result<Spectrum> {
    Spectrum::at_eps(model, drive.value(t)?)
}

/// State vector (n×1) or operator (n×n) from the diabatic to the adiabatic basis.
pub fn to_adiabatic(x: &CMat, basis: &CMat) -> Result<CMat> {
    change_basis(x, basis, true)
}

pub fn from_adiabatic(x: &CMat, basis: &CMat) -> Result<CMat> {
    change_basis(x, basis, false)
}

fn change_basis(x: &CMat, basis: &CMat, forward: bool) -> Result<CMat> {
    let n = basis.nrows();
    if x.nrows() != n {
        return Err(Error::Dimension { expected: n, got: x.nrows() });
    }
    let v = if forward { basis.adjoint() } else { basis.clone() };
    if x.ncols() == 1 {
        Ok(&v * x)
    } else if x.ncols() == n {
        Ok(&v * x * v.adjoint())
    } else {
        Err(Error::Dimension { expected: n, got: x.ncols() })
    }
}

/// A passage of the drive through a declared anticrossing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub t: f64,
    pub site: AnticrossingSite,
    /// Signed sweep speed `dε/dt` at the crossing.
    pub velocity: f64,
}

/// Every interior time at which the drive passes the gap minimum of a
/// declared anticrossing, in time order.
pub fn anticrossing_times(model: &SystemModel, drive: &DriveSignal) -> Result<Vec<Passage>> {
    let sites = model.anticrossing_sites()?;
    let (t0, t1) = (drive.t_start(), drive.t_end());
    let mut out: Vec<Passage> = Vec::new();
    for site in sites {
        // Level repulsion from the other pairs moves the gap minimum slightly
        // away from the bare crossing; the impulse happens at the minimum.
        let (at, _) = model.min_gap(&site)?;
        let mut times = Vec::new();
        for seg in drive.segments() {
            times.extend(seg.roots(at)?);
        }
        times.sort_by(f64::total_cmp);
        times.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * (1.0 + x.abs()));
        for t in times {
            let edge = 1e-10 * (1.0 + t.abs());
            if t <= t0 + edge || t >= t1 - edge {
                continue;
            }
            let seg = drive.segment_at(t);
            let v = seg.derivative(t);
            // A kink exactly at a boundary: both one-sided slopes must agree in sign.
            let v_left = drive.segment_at(t - edge).derivative(t);
            let scale = drive.range().1.abs().max(drive.range().0.abs()).max(1.0) / drive.duration();
            if v.abs() < 1e-9 * scale || v_left * v <= 0.0 {
                return Err(Error::TangentialCrossing { t });
            }
            out.push(Passage { t, site, velocity: v });
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}

/// Energy levels over a detuning sweep: rows of `(eps, E_0, …, E_{n−1})`.
pub fn energy_sweep(model: &SystemModel, from: f64, to: f64, points: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if points < 2 || !(to > from) {
        return Err(Error::invalid("sweep needs at least two points and a non-empty range"));
    }
    Ok((0..points)
        .map(|i| {
            let eps = from + (to - from) * i as f64 / (points - 1) as f64;
            (eps, model.energies(eps))
        })
        .collect())
}

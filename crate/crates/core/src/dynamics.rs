//! Exact reference propagation of the Schrödinger and Liouville–von Neumann
//! equations, and trajectory observables in the adiabatic frame.

use serde::{Deserialize, Serialize};

use crate::linalg::{self, c, CMat};
use crate::model::{DriveSignal, Spectrum, SystemModel};
use crate::ode::{self, Tolerance};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Vector,
    Density,
}

/// States in the diabatic basis at ascending times.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    pub kind: StateKind,
}

impl Trajectory {
    pub fn density(&self, i: usize) -> CMat {
        match self.kind {
            StateKind::Density => self.states[i].clone(),
            StateKind::Vector => &self.states[i] * self.states[i].adjoint(),
        }
    }

    pub fn last(&self) -> &CMat {
        &self.states[self.states.len() - 1]
    }
}

pub fn validate_density(rho: &CMat) -> Result<()> {
    let n = rho.nrows();
    linalg::check_square(rho, n)?;
    if linalg::hermiticity_defect(rho) > 1e-10 {
        return Err(Error::invalid("density matrix is not Hermitian"));
    }
    let tr = linalg::trace(rho).re;
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::invalid(format!("density matrix trace is {tr}")));
    }
    if linalg::eigvalsh(rho).first().copied().unwrap_or(0.0) < -1e-10 {
        return Err(Error::invalid("density matrix is not positive semidefinite"));
    }
    Ok(())
}

fn check_grid(drive: &DriveSignal, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("time grid is empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("time grid must be strictly ascending"));
    }
    drive.value(grid[0])?;
    drive.value(grid[grid.len() - 1])?;
    Ok(())
}

/// Integration stops: the grid after its first point, merged with the
/// drive's interior breakpoints. Returns stops and, per stop, the grid index
/// it reports (if any).
fn stops_for(drive: &DriveSignal, grid: &[f64]) -> (Vec<f64>, Vec<Option<usize>>) {
    let (t0, t1) = (grid[0], grid[grid.len() - 1]);
    let mut stops: Vec<(f64, Option<usize>)> = grid.iter().enumerate().skip(1).map(|(i, &t)| (t, Some(i))).collect();
    for b in drive.breakpoints() {
        if b > t0 && b < t1 && !grid.iter().any(|&g| (g - b).abs() <= 1e-14 * (1.0 + b.abs())) {
            stops.push((b, None));
        }
    }
    stops.sort_by(|a, b| a.0.total_cmp(&b.0));
    stops.into_iter().unzip()
}

fn integrate_on_grid(
    model: &SystemModel,
    drive: &DriveSignal,
    y0: CMat,
    grid: &[f64],
    tol: Tolerance,
) -> Result<Vec<CMat>> {
    check_grid(drive, grid)?;
    let (stops, slots) = stops_for(drive, grid);
    let mut out = Vec::with_capacity(grid.len());
    out.push(y0.clone());
    ode::integrate(
        |t, y| ode::schrodinger_rhs(&model.hamiltonian(drive.eval(t)), y),
        grid[0],
        y0,
        &stops,
        tol,
        |i, _, y| {
            if slots[i].is_some() {
                out.push(y.clone());
            }
        },
    )?;
    Ok(out)
}

/// Evolve a state vector (n×1, diabatic basis) and report it on `grid`.
pub fn evolve_state(
    model: &SystemModel,
    drive: &DriveSignal,
    psi0: &CMat,
    grid: &[f64],
    tol: Tolerance,
) -> Result<Trajectory> {
    if psi0.nrows() != model.dim() || psi0.ncols() != 1 {
        return Err(Error::Dimension { expected: model.dim(), got: psi0.nrows() });
    }
    let states = integrate_on_grid(model, drive, psi0.clone(), grid, tol)?;
    Ok(Trajectory { times: grid.to_vec(), states, kind: StateKind::Vector })
}

/// Evolve a density matrix under `dρ/dt = −i[H, ρ]`. Pure inputs are
/// propagated as state vectors; mixed inputs through the propagator.
pub fn evolve_density(
    model: &SystemModel,
    drive: &DriveSignal,
    rho0: &CMat,
    grid: &[f64],
    tol: Tolerance,
) -> Result<Trajectory> {
    let n = model.dim();
    linalg::check_square(rho0, n)?;
    validate_density(rho0)?;
    let purity = (rho0 * rho0).trace().re;
    let states: Vec<CMat> = if (purity - 1.0).abs() < 1e-12 {
        let e = linalg::eigh(rho0);
        let psi = e.vectors.column(n - 1).into_owned();
        let psi = CMat::from_column_slice(n, 1, psi.as_slice());
        integrate_on_grid(model, drive, psi, grid, tol)?.iter().map(|v| v * v.adjoint()).collect()
    } else {
        integrate_on_grid(model, drive, linalg::identity(n), grid, tol)?
            .iter()
            .map(|u| u * rho0 * u.adjoint())
            .collect()
    };
    let states = states
        .into_iter()
        .zip(grid)
        .map(|(rho, &t)| {
            let sym = (&rho + rho.adjoint()) * c(0.5, 0.0);
            let tr = linalg::trace(&sym).re;
            let fixed = &sym / c(tr, 0.0);
            let correction = linalg::max_abs(&(&fixed - &rho));
            if correction > 1e-9 {
                log::warn!("density re-symmetrization at t = {t} corrected by {correction:e}");
            }
            fixed
        })
        .collect();
    Ok(Trajectory { times: grid.to_vec(), states, kind: StateKind::Density })
}

/// Propagator `U(t1, t0)` in the diabatic basis.
pub fn propagator(model: &SystemModel, drive: &DriveSignal, t0: f64, t1: f64, tol: Tolerance) -> Result<CMat> {
    if t1 < t0 {
        return Err(Error::invalid("propagator requires t0 <= t1"));
    }
    if t1 == t0 {
        drive.value(t0)?;
        return Ok(linalg::identity(model.dim()));
    }
    let us = integrate_on_grid(model, drive, linalg::identity(model.dim()), &[t0, t1], tol)?;
    Ok(us[1].clone())
}

/// Adiabatic bases at the requested times (ascending), transported
/// continuously from the drive start. At the start the largest component of
/// each eigenvector is real positive; afterwards each vector keeps maximal
/// overlap with its predecessor.
pub fn adiabatic_frames(model: &SystemModel, drive: &DriveSignal, times: &[f64]) -> Result<Vec<CMat>> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("frame times must be ascending"));
    }
    let mut t = drive.t_start();
    let mut frame = Spectrum::at_eps(model, drive.eval(t))?.basis_change;
    let mut h = drive.duration() / 256.0;
    let min_step = 1e-12 * (1.0 + drive.duration());
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        drive.value(target)?;
        while t < target {
            let step = h.min(target - t);
            let next_t = if step >= target - t { target } else { t + step };
            let mut next = linalg::eigh(&model.hamiltonian(drive.eval(next_t))).vectors;
            let mut worst: f64 = 1.0;
            for k in 0..next.ncols() {
                let o = frame.column(k).dotc(&next.column(k));
                worst = worst.min(o.norm());
                if o.norm() > 0.0 {
                    let phase = o.conj() / o.norm();
                    next.column_mut(k).iter_mut().for_each(|x| *x *= phase);
                }
            }
            if worst < 0.95 {
                if step <= min_step {
                    return Err(Error::DegenerateSpectrum { gap: 0.0 });
                }
                h = step / 2.0;
                continue;
            }
            frame = next;
            t = next_t;
            if worst > 0.995 {
                h = (step * 1.5).max(h);
            }
        }
        out.push(frame.clone());
    }
    Ok(out)
}

/// Exact propagator over the whole drive expressed in the transported
/// adiabatic frame, `V(t1)† U V(t0)`.
pub fn adiabatic_propagator(model: &SystemModel, drive: &DriveSignal, tol: Tolerance) -> Result<CMat> {
    let (t0, t1) = (drive.t_start(), drive.t_end());
    let u = propagator(model, drive, t0, t1, tol)?;
    let frames = adiabatic_frames(model, drive, &[t0, t1])?;
    Ok(frames[1].adjoint() * u * &frames[0])
}

/// Bloch vector of a 2×2 density matrix: `x = 2 Re ρ01`, `y = 2 Im ρ10`,
/// `z = ρ00 − ρ11`.
pub fn bloch_vector(rho: &CMat) -> Result<[f64; 3]> {
    linalg::check_square(rho, 2)?;
    Ok([2.0 * rho[(0, 1)].re, 2.0 * rho[(1, 0)].im, (rho[(0, 0)] - rho[(1, 1)]).re])
}

/// Bloch components in the adiabatic frame (ground state at z = +1).
pub fn bloch_trajectory(model: &SystemModel, drive: &DriveSignal, traj: &Trajectory) -> Result<Vec<[f64; 4]>> {
    if model.dim() != 2 {
        return Err(Error::invalid("Bloch trajectories are defined for two-level systems only"));
    }
    let frames = adiabatic_frames(model, drive, &traj.times)?;
    traj.times
        .iter()
        .zip(frames.iter())
        .enumerate()
        .map(|(i, (&t, v))| {
            let rho = v.adjoint() * traj.density(i) * v;
            let b = bloch_vector(&rho)?;
            Ok([t, b[0], b[1], b[2]])
        })
        .collect()
}

/// Adiabatic level occupations `P_i(t) = ⟨E_i(t)|ρ(t)|E_i(t)⟩`.
pub fn occupation_trajectory(model: &SystemModel, drive: &DriveSignal, traj: &Trajectory) -> Result<Vec<Vec<f64>>> {
    let frames = adiabatic_frames(model, drive, &traj.times)?;
    Ok(traj
        .times
        .iter()
        .zip(frames.iter())
        .enumerate()
        .map(|(i, (&t, v))| {
            let rho = v.adjoint() * traj.density(i) * v;
            let mut row = vec![t];
            row.extend(rho.diagonal().iter().map(|z| z.re));
            row
        })
        .collect())
}

/// Uniform grid of `points` times covering the drive support.
pub fn uniform_grid(drive: &DriveSignal, points: usize) -> Vec<f64> {
    let (a, b) = (drive.t_start(), drive.t_end());
    let n = points.max(2);
    (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * i as f64 / (n - 1) as f64 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Segment;

    #[test]
    fn commuting_hamiltonian_leaves_diagonal_state() {
        let m = SystemModel::two_level(1e-300).unwrap();
        let d = DriveSignal::constant(2.0, 0.0, 3.0).unwrap();
        let rho0 = linalg::real_matrix(2, 2, &[0.3, 0.0, 0.0, 0.7]);
        let tr = evolve_density(&m, &d, &rho0, &[0.0, 1.0, 3.0], Tolerance::default()).unwrap();
        assert!(linalg::max_abs(&(tr.density(2) - rho0)) < 1e-12);
    }

    #[test]
    fn degenerate_flop_in_diabatic_basis() {
        let m = SystemModel::two_level(1.0).unwrap();
        let d = DriveSignal::constant(0.0, 0.0, 10.0).unwrap();
        let rho0 = linalg::real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.5).collect();
        let tr = evolve_density(&m, &d, &rho0, &grid, Tolerance::default()).unwrap();
        for (i, &t) in grid.iter().enumerate() {
            let z = bloch_vector(&tr.density(i)).unwrap()[2];
            assert!((z - t.cos()).abs() < 1e-8);
        }
    }

    #[test]
    fn frames_stay_continuous_through_anticrossing() {
        let m = SystemModel::two_level(1.0).unwrap();
        let d = DriveSignal::new(vec![Segment::Harmonic {
            t_start: 0.0,
            t_end: 10.0,
            offset: 0.0,
            amplitude: 10.0,
            omega: 0.15,
            phase: -0.75,
        }])
        .unwrap();
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let frames = adiabatic_frames(&m, &d, &times).unwrap();
        for w in frames.windows(2) {
            for k in 0..2 {
                let o = w[0].column(k).dotc(&w[1].column(k));
                assert!(o.re > 0.9);
            }
        }
    }
}

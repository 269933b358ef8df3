//! The frozen-input solution operator T and probes of its fixed-point structure.

use rayon::prelude::*;

use crate::drift::ModelParams;
use crate::error::{Result, SksError};
use crate::field::Field;
use crate::integrator::{integrate_coeffs, IntegratorConfig, PathMode, PathSample, Trajectory};
use crate::noise::NoiseStream;
use crate::space::SpectralSpace;
use crate::stats::{linear_fit, mean_se, median};

/// Member p uses stream p under the shared master seed.
pub fn member_streams(seed: u64, members: usize) -> Vec<NoiseStream> {
    (0..members as u64).map(|p| NoiseStream::new(seed, p)).collect()
}

/// Self-consistent paths, one per stream, integrated in parallel.
pub fn self_consistent_ensemble(
    space: &SpectralSpace,
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    streams: &[NoiseStream],
) -> Result<Vec<PathSample>> {
    let a0 = space.coeffs_of(rho0)?;
    streams.par_iter().map(|&s| integrate_coeffs(space, &a0, params, config, PathMode::SelfConsistent, s)).collect()
}

/// T applied member-wise: frozen-mode integration of each xi trajectory with
/// its own stream. Blown members come back flagged.
pub fn apply_t(
    space: &SpectralSpace,
    xi: &[Trajectory],
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    streams: &[NoiseStream],
) -> Result<Vec<PathSample>> {
    if xi.len() != streams.len() {
        return Err(SksError::Contract(format!("{} input trajectories for {} noise streams", xi.len(), streams.len())));
    }
    let a0 = space.coeffs_of(rho0)?;
    xi.par_iter()
        .zip(streams.par_iter())
        .map(|(x, &s)| integrate_coeffs(space, &a0, params, config, PathMode::Frozen(x), s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StNormEstimate {
    pub members: usize,
    pub value: f64,
    pub std_error: Option<f64>,
}

/// (mean_p max_t ||a_t - b_t||^2_{H^-1})^{1/2}; standard error by the delta method.
pub fn st_distance(space: &SpectralSpace, a: &[Trajectory], b: &[Trajectory]) -> Result<StNormEstimate> {
    if a.len() != b.len() || a.is_empty() {
        return Err(SksError::Contract(format!("ensemble sizes {} and {} differ or are zero", a.len(), b.len())));
    }
    let mut sups = Vec::with_capacity(a.len());
    for (x, y) in a.iter().zip(b) {
        if x.steps != y.steps || x.frames.len() != y.frames.len() {
            return Err(SksError::Contract("trajectories are not aligned on the same save steps".into()));
        }
        let mut sup = 0.0_f64;
        for (fa, fb) in x.frames.iter().zip(&y.frames) {
            if fa.len() != space.n_modes() || fb.len() != space.n_modes() {
                return Err(SksError::Contract("frame length differs from the basis size".into()));
            }
            let d: Vec<f64> = fa.iter().zip(fb).map(|(p, q)| p - q).collect();
            sup = sup.max(space.hminus1_sq(&d));
        }
        sups.push(sup);
    }
    let (mean, se) = mean_se(&sups);
    let value = mean.sqrt();
    let std_error = se.map(|s| if value > 0.0 { s / (2.0 * value) } else { 0.0 });
    Ok(StNormEstimate { members: a.len(), value, std_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardSettings {
    pub members: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub seed: u64,
}

impl PicardSettings {
    pub fn new(members: usize, max_iter: usize, tol: f64, seed: u64) -> Result<Self> {
        if members == 0 || max_iter == 0 {
            return Err(SksError::Config("picard needs P >= 1 and J_max >= 1".into()));
        }
        if !(tol >= 0.0) {
            return Err(SksError::Config(format!("picard.tol must be >= 0, got {tol}")));
        }
        Ok(PicardSettings { members, max_iter, tol, seed })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// d_j = ||xi^j - xi^{j-1}||_{S_T}, j = 1..J.
    pub distances: Vec<f64>,
    pub std_errors: Vec<Option<f64>>,
    /// Median of d_{j+1} / d_j over j with d_j > 0.
    pub ratio: f64,
    pub converged: bool,
    pub excluded: usize,
}

impl PicardReport {
    pub fn iterations(&self) -> usize {
        self.distances.len()
    }
}

#[derive(Debug, Clone)]
pub struct PicardOutcome {
    pub report: PicardReport,
    /// Last iterate; None for members that blew up.
    pub paths: Vec<Option<PathSample>>,
}

/// xi^0 = rho_0 held constant; xi^{j} = T xi^{j-1} with fixed streams. Stops
/// when d_j < tol or after J_max iterations.
pub fn picard_iterate(
    space: &SpectralSpace,
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    settings: &PicardSettings,
) -> Result<PicardOutcome> {
    let streams = member_streams(settings.seed, settings.members);
    let a0 = space.coeffs_of(rho0)?.into_owned();
    let init = Trajectory::constant(&a0, config.save_steps(), config.dt);
    let mut current: Vec<Option<Trajectory>> = vec![Some(init); settings.members];
    let mut last: Vec<Option<PathSample>> = vec![None; settings.members];
    let mut distances = Vec::new();
    let mut std_errors = Vec::new();
    let mut converged = false;
    for _ in 0..settings.max_iter {
        let idx: Vec<usize> = (0..settings.members).filter(|&p| current[p].is_some()).collect();
        let xi: Vec<Trajectory> = idx.iter().map(|&p| current[p].clone().unwrap()).collect();
        let st: Vec<NoiseStream> = idx.iter().map(|&p| streams[p]).collect();
        let out = apply_t(space, &xi, rho0, params, config, &st)?;
        let mut prev = Vec::new();
        let mut next = Vec::new();
        for ((&p, x), path) in idx.iter().zip(xi).zip(out) {
            if path.blown() {
                current[p] = None;
                last[p] = None;
            } else {
                prev.push(x);
                next.push(path.trajectory.clone());
                current[p] = Some(path.trajectory.clone());
                last[p] = Some(path);
            }
        }
        if next.is_empty() {
            return Err(SksError::EnsembleBlowUp(settings.members));
        }
        let d = st_distance(space, &next, &prev)?;
        distances.push(d.value);
        std_errors.push(d.std_error);
        if d.value < settings.tol {
            converged = true;
            break;
        }
    }
    let ratios: Vec<f64> = distances.windows(2).filter(|w| w[0] > 0.0).map(|w| w[1] / w[0]).collect();
    let ratio = median(&ratios).unwrap_or(f64::NAN);
    let excluded = current.iter().filter(|c| c.is_none()).count();
    Ok(PicardOutcome { report: PicardReport { distances, std_errors, ratio, converged, excluded }, paths: last })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderProbe {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub delta: f64,
    pub r_squared: f64,
    pub excluded: usize,
}

/// Regression of log ||T xi_2 - T xi_1|| on log ||xi_2 - xi_1|| for
/// xi_1 = rho_0 (constant) and xi_2 = xi_1 + eps eta. `direction` defaults to
/// e_1 normalized in H^-1.
pub fn holder_probe(
    space: &SpectralSpace,
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    streams: &[NoiseStream],
    eps: &[f64],
    direction: Option<&[f64]>,
) -> Result<HolderProbe> {
    if eps.len() < 2 {
        return Err(SksError::Contract("holder probe needs at least two scales".into()));
    }
    let eta: Vec<f64> = match direction {
        Some(d) if d.len() == space.n_modes() => d.to_vec(),
        Some(_) => return Err(SksError::Contract("perturbation direction has the wrong length".into())),
        None => crate::sampling::first_mode_unit_hminus1(space),
    };
    let a0 = space.coeffs_of(rho0)?.into_owned();
    let steps = config.save_steps();
    let xi1 = Trajectory::constant(&a0, steps, config.dt);
    let xi1s = vec![xi1.clone(); streams.len()];
    let base = apply_t(space, &xi1s, rho0, params, config, streams)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0;
    for &e in eps {
        let shifted: Vec<f64> = a0.iter().zip(&eta).map(|(a, b)| a + e * b).collect();
        let xi2 = Trajectory::constant(&shifted, steps, config.dt);
        let pert = apply_t(space, &vec![xi2.clone(); streams.len()], rho0, params, config, streams)?;
        let keep: Vec<usize> = (0..streams.len()).filter(|&p| !base[p].blown() && !pert[p].blown()).collect();
        excluded = excluded.max(streams.len() - keep.len());
        if keep.is_empty() {
            return Err(SksError::EnsembleBlowUp(streams.len()));
        }
        let ta: Vec<Trajectory> = keep.iter().map(|&p| base[p].trajectory.clone()).collect();
        let tb: Vec<Trajectory> = keep.iter().map(|&p| pert[p].trajectory.clone()).collect();
        let y = st_distance(space, &tb, &ta)?.value;
        let x = st_distance(space, &vec![xi2; keep.len()], &vec![xi1.clone(); keep.len()])?.value;
        if x == 0.0 || y == 0.0 {
            return Err(SksError::Degenerate(format!(
                "zero distance at eps = {e} (x = {x}, y = {y}); T is constant in this direction"
            )));
        }
        xs.push(x);
        ys.push(y);
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let fit = linear_fit(&lx, &ly).ok_or_else(|| SksError::Degenerate("scales are not distinct".into()))?;
    Ok(HolderProbe { x: xs, y: ys, delta: fit.slope, r_squared: fit.r_squared, excluded })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquicontinuityProbe {
    pub c_hat: f64,
    pub worst_pair: (f64, f64),
}

/// max over save-time pairs of mean_p ||a(t1) - a(t2)||^2_{H^-1} / |t1 - t2|.
pub fn equicontinuity_of(space: &SpectralSpace, paths: &[Trajectory]) -> Result<EquicontinuityProbe> {
    let first = paths.first().ok_or_else(|| SksError::Contract("empty ensemble".into()))?;
    if first.len() < 2 {
        return Err(SksError::Contract("equicontinuity needs at least two save times".into()));
    }
    if paths.iter().any(|p| p.steps != first.steps) {
        return Err(SksError::Contract("trajectories are not aligned on the same save steps".into()));
    }
    let times = first.times();
    let n = times.len();
    let mut best = EquicontinuityProbe { c_hat: 0.0, worst_pair: (times[0], times[1]) };
    for i in 0..n {
        for j in i + 1..n {
            let mut acc = 0.0;
            for p in paths {
                let d: Vec<f64> = p.frames[i].iter().zip(&p.frames[j]).map(|(x, y)| x - y).collect();
                acc += space.hminus1_sq(&d);
            }
            let r = acc / paths.len() as f64 / (times[j] - times[i]);
            if r > best.c_hat {
                best = EquicontinuityProbe { c_hat: r, worst_pair: (times[i], times[j]) };
            }
        }
    }
    Ok(best)
}

/// Applies T to the given inputs and measures time equicontinuity of the outputs.
pub fn equicontinuity_probe(
    space: &SpectralSpace,
    xi: &[Trajectory],
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    streams: &[NoiseStream],
) -> Result<EquicontinuityProbe> {
    if config.save_steps().len() < 2 {
        return Err(SksError::Contract("equicontinuity needs at least two save times".into()));
    }
    let out = apply_t(space, xi, rho0, params, config, streams)?;
    let kept: Vec<Trajectory> = out.into_iter().filter(|p| !p.blown()).map(|p| p.trajectory).collect();
    if kept.is_empty() {
        return Err(SksError::EnsembleBlowUp(xi.len()));
    }
    equicontinuity_of(space, &kept)
}

//! Energy functionals, discrete Ito residuals and blow-up summaries.

use crate::drift::{frozen_drift_coeffs, ModelParams};
use crate::error::{Result, SksError};
use crate::integrator::{PathSample, Trajectory};
use crate::noise::NoiseOperator;
use crate::space::SpectralSpace;
use crate::stats::mean_se;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// sup_t ||rho||^2_{H^-1}
    pub sup_h1: f64,
    /// int_0^T ||rho||^{m+1}_{L^{m+1}} dt
    pub int_lm1: f64,
    /// sup_t ||rho||^{m+1}_{L^{m+1}}
    pub sup_lm1: f64,
    /// int_0^T || |rho|^{m-1} grad rho ||^2_{L^2} dt
    pub int_gradm: f64,
    pub min_value: f64,
    /// int rho dx at each save time
    pub mass: Vec<f64>,
    /// sup_h1 + 4 int_lm1
    pub r1_composite: f64,
    /// sup_lm1 + m^2 (m+1) int_gradm
    pub r2_composite: f64,
}

fn trapezoid(t: &[f64], v: &[f64]) -> f64 {
    t.windows(2).zip(v.windows(2)).map(|(tt, vv)| 0.5 * (tt[1] - tt[0]) * (vv[0] + vv[1])).sum()
}

/// Functionals of the saved frames; spatial integrals by the midpoint rule
/// on the coarse grid, time integrals by the trapezoid rule.
pub fn energy_report(space: &SpectralSpace, path: &Trajectory, m: f64) -> Result<EnergyReport> {
    if path.is_empty() {
        return Err(SksError::Contract("energy report of an empty trajectory".into()));
    }
    let times = path.times();
    let p = m + 1.0;
    let w = space.cell_volume();
    let mut h1 = Vec::new();
    let mut lm = Vec::new();
    let mut gm = Vec::new();
    let mut mass = Vec::new();
    let mut min_value = f64::INFINITY;
    for a in &path.frames {
        if a.len() != space.n_modes() {
            return Err(SksError::Contract("frame length differs from the basis size".into()));
        }
        let g = space.synthesize(a);
        h1.push(space.hminus1_sq(a));
        lm.push(space.lp_pow_grid(&g, p));
        let grad = space.gradient_grid(a);
        let mut s = 0.0;
        for (i, v) in g.iter().enumerate() {
            let gsq: f64 = grad.iter().map(|c| c[i] * c[i]).sum();
            s += v.abs().powf(2.0 * m - 2.0) * gsq;
        }
        gm.push(s * w);
        mass.push(space.integrate_grid(&g));
        min_value = min_value.min(g.iter().cloned().fold(f64::INFINITY, f64::min));
    }
    let sup = |v: &[f64]| v.iter().cloned().fold(0.0_f64, f64::max);
    let sup_h1 = sup(&h1);
    let sup_lm1 = sup(&lm);
    let int_lm1 = trapezoid(&times, &lm);
    let int_gradm = trapezoid(&times, &gm);
    Ok(EnergyReport {
        sup_h1,
        int_lm1,
        sup_lm1,
        int_gradm,
        min_value,
        mass,
        r1_composite: sup_h1 + 4.0 * int_lm1,
        r2_composite: sup_lm1 + m * m * (m + 1.0) * int_gradm,
    })
}

/// Per-step residual of the discrete H^-1 Ito identity along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathResidual {
    pub per_step: Vec<f64>,
    pub total: f64,
}

/// residual_n = ||rho_{n+1}||^2 - ||rho_n||^2 minus
/// [2 <A(rho_n, xi_n), rho_n> dt + ||B(rho_n)||^2_HS dt + 2 <rho_n, B(rho_n) dW_n>],
/// with all norms in H^-1. Needs a frame at every step; increments of split
/// steps are aggregated over the base step. `xi = None` means xi = rho.
pub fn ito_residual(
    space: &SpectralSpace,
    path: &PathSample,
    xi: Option<&Trajectory>,
    params: &ModelParams,
) -> Result<PathResidual> {
    let t = &path.trajectory;
    if t.steps.iter().enumerate().any(|(i, &s)| s != i) {
        return Err(SksError::Contract("Ito residual needs a saved frame at every step".into()));
    }
    let incs = path.increments();
    if incs.len() + 1 < t.len() {
        return Err(SksError::Contract("increment record shorter than the trajectory".into()));
    }
    let op = NoiseOperator::new(space, &params.noise)?;
    if path.noise_modes != op.n_modes() {
        return Err(SksError::Contract("path noise truncation differs from the model".into()));
    }
    let mut per_step = Vec::with_capacity(t.len().saturating_sub(1));
    for n in 0..t.len().saturating_sub(1) {
        let a = &t.frames[n];
        let b = &t.frames[n + 1];
        let x = match xi {
            Some(tr) => tr.at_step(n),
            None => a.as_slice(),
        };
        let dt: f64 = incs[n].iter().map(|i| i.dt).sum();
        let mut db = vec![0.0; op.n_modes()];
        for inc in &incs[n] {
            db.iter_mut().zip(&inc.values).for_each(|(s, v)| *s += v);
        }
        let d = frozen_drift_coeffs(space, a, x, params, None)?;
        let noise = op.apply_coeffs(space, a, &db);
        let predicted = 2.0 * space.pairing_coeffs(&d, a) * dt
            + op.hs_sq_coeffs(space, a) * dt
            + 2.0 * space.pairing_coeffs(a, &noise);
        per_step.push(space.hminus1_sq(b) - space.hminus1_sq(a) - predicted);
    }
    let total = per_step.iter().sum();
    Ok(PathResidual { per_step, total })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ItoResidualReport {
    pub per_step_mean: Vec<f64>,
    pub totals: Vec<f64>,
    pub mean_total: f64,
    pub std_error: Option<f64>,
}

pub fn summarize_residuals(paths: &[PathResidual]) -> Result<ItoResidualReport> {
    if paths.is_empty() {
        return Err(SksError::Contract("no residuals to summarize".into()));
    }
    let len = paths.iter().map(|p| p.per_step.len()).min().unwrap_or(0);
    let per_step_mean =
        (0..len).map(|i| paths.iter().map(|p| p.per_step[i]).sum::<f64>() / paths.len() as f64).collect();
    let totals: Vec<f64> = paths.iter().map(|p| p.total).collect();
    let (mean_total, std_error) = mean_se(&totals);
    Ok(ItoResidualReport { per_step_mean, totals, mean_total, std_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupSummary {
    pub blown: bool,
    pub t_blow: Option<f64>,
    pub min_value: f64,
    /// max_t |int rho(t) dx - int rho_0 dx|
    pub mass_drift: f64,
}

pub fn blowup_and_positivity(space: &SpectralSpace, path: &PathSample) -> Result<BlowupSummary> {
    let mut min_value = f64::INFINITY;
    let mut masses = Vec::new();
    for a in &path.trajectory.frames {
        let g = space.synthesize(a);
        min_value = min_value.min(g.iter().cloned().fold(f64::INFINITY, f64::min));
        masses.push(space.integrate_grid(&g));
    }
    if masses.is_empty() {
        min_value = 0.0;
    }
    let m0 = masses.first().cloned().unwrap_or(0.0);
    let mass_drift = masses.iter().map(|m| (m - m0).abs()).fold(0.0, f64::max);
    Ok(BlowupSummary { blown: path.blown(), t_blow: path.blow_up.map(|b| b.time), min_value, mass_drift })
}

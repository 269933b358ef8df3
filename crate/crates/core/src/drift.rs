//! Porous-medium and chemotactic drifts, and the structural condition probes.

use crate::error::{Result, SksError};
use crate::field::Field;
use crate::kernel::{interaction_coeffs, KernelSpec, KernelTable};
use crate::noise::{NoiseOperator, NoiseSpec};
use crate::space::SpectralSpace;

/// Slack used by the pointwise inequality checks.
pub const POINTWISE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub m: f64,
    pub chi: f64,
    pub kernel: KernelSpec,
    pub noise: NoiseSpec,
    /// When false the porous-medium term is dropped from the drift.
    pub porous: bool,
}

impl ModelParams {
    pub fn new(m: f64, chi: f64, kernel: KernelSpec, noise: NoiseSpec) -> Result<Self> {
        let p = ModelParams { m, chi, kernel, noise, porous: true };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m >= 1.0) || !self.m.is_finite() {
            return Err(SksError::Config(format!("model.m must be >= 1, got {}", self.m)));
        }
        if !(self.chi >= 0.0) || !self.chi.is_finite() {
            return Err(SksError::Config(format!("model.chi must be >= 0, got {}", self.chi)));
        }
        Ok(())
    }

    /// True when m < 3, outside the regime of the existence theory.
    pub fn below_theorem_regime(&self) -> bool {
        self.m < 3.0
    }

    pub fn without_porous(mut self) -> Self {
        self.porous = false;
        self
    }
}

#[inline]
pub(crate) fn signed_power(v: f64, m: f64) -> f64 {
    if m == 1.0 {
        v
    } else if m.fract() == 0.0 && m <= 64.0 {
        v.abs().powi(m as i32 - 1) * v
    } else {
        v.abs().powf(m - 1.0) * v
    }
}

/// Projected |rho|^{m-1} rho together with max |rho| on the oversampled grid.
pub(crate) fn porous_power_coeffs(space: &SpectralSpace, a: &[f64], m: f64) -> (Vec<f64>, f64) {
    let g = space.synthesize_fine(a);
    let max = g.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if m == 1.0 {
        return (a.to_vec(), max);
    }
    let p: Vec<f64> = g.iter().map(|&v| signed_power(v, m)).collect();
    (space.project_fine(&p), max)
}

pub(crate) fn laplacian_in_place(space: &SpectralSpace, c: &mut [f64]) {
    for (v, l) in c.iter_mut().zip(space.basis().eigenvalues()) {
        *v *= -l;
    }
}

/// -chi div(xi grad(Phi * xi)) in coefficient form.
pub(crate) fn chemo_drift_coeffs(
    space: &SpectralSpace,
    xi: &[f64],
    chi: f64,
    kernel: KernelSpec,
    table: Option<&KernelTable>,
) -> Result<Vec<f64>> {
    if chi == 0.0 || xi.iter().all(|v| *v == 0.0) {
        return Ok(vec![0.0; xi.len()]);
    }
    let c = interaction_coeffs(space, xi, kernel, table)?;
    let xf = space.synthesize_fine(xi);
    let flux: Vec<Vec<f64>> =
        space.gradient_fine(&c).into_iter().map(|g| g.iter().zip(&xf).map(|(a, b)| a * b).collect()).collect();
    Ok(space.divergence_project(&flux).into_iter().map(|v| -chi * v).collect())
}

/// |rho|^{m-1} rho evaluated on the 2N grid and projected back.
pub fn porous_power(space: &SpectralSpace, rho: &Field, m: f64) -> Result<Field> {
    let a = space.coeffs_of(rho)?;
    Ok(Field::from_coeffs(porous_power_coeffs(space, &a, m).0))
}

/// Delta(|rho|^{m-1} rho).
pub fn porous_drift(space: &SpectralSpace, rho: &Field, m: f64) -> Result<Field> {
    let a = space.coeffs_of(rho)?;
    let mut c = porous_power_coeffs(space, &a, m).0;
    laplacian_in_place(space, &mut c);
    Ok(Field::from_coeffs(c))
}

/// -chi div(xi grad(Phi * xi)).
pub fn chemo_drift(space: &SpectralSpace, xi: &Field, chi: f64, kernel: KernelSpec) -> Result<Field> {
    let a = space.coeffs_of(xi)?;
    Ok(Field::from_coeffs(chemo_drift_coeffs(space, &a, chi, kernel, None)?))
}

pub(crate) fn frozen_drift_coeffs(
    space: &SpectralSpace,
    a: &[f64],
    xi: &[f64],
    params: &ModelParams,
    table: Option<&KernelTable>,
) -> Result<Vec<f64>> {
    let mut d = chemo_drift_coeffs(space, xi, params.chi, params.kernel, table)?;
    if params.porous {
        let mut p = porous_power_coeffs(space, a, params.m).0;
        laplacian_in_place(space, &mut p);
        d.iter_mut().zip(&p).for_each(|(x, y)| *x += y);
    }
    Ok(d)
}

/// Porous drift of rho plus chemotactic drift of the frozen input xi.
pub fn frozen_drift(space: &SpectralSpace, rho: &Field, xi: &Field, params: &ModelParams) -> Result<Field> {
    let a = space.coeffs_of(rho)?;
    let x = space.coeffs_of(xi)?;
    Ok(Field::from_coeffs(frozen_drift_coeffs(space, &a, &x, params, None)?))
}

/// (|a|^{m-1}a - |b|^{m-1}b)(a - b) >= |a - b|^{m+1}, with 1e-12 slack.
pub fn check_monotonicity(a: f64, b: f64, m: f64) -> bool {
    monotonicity_gap(a, b, m, 1.0) >= -POINTWISE_TOL
}

/// Same inequality with the right-hand side weakened by 2^{1-m}.
pub fn check_monotonicity_weakened(a: f64, b: f64, m: f64) -> bool {
    monotonicity_gap(a, b, m, 2f64.powf(1.0 - m)) >= -POINTWISE_TOL
}

fn monotonicity_gap(a: f64, b: f64, m: f64, c: f64) -> f64 {
    (signed_power(a, m) - signed_power(b, m)) * (a - b) - c * (a - b).abs().powf(m + 1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityChart {
    pub samples: usize,
    pub literal_failures: usize,
    /// Failures of the literal form with both arguments >= 0.
    pub nonneg_literal_failures: usize,
    pub weakened_failures: usize,
    /// Pair with the most negative literal gap.
    pub worst_pair: (f64, f64),
    pub worst_gap: f64,
}

/// Scans the square [-half, half]^2 on a uniform (res x res) lattice.
pub fn chart_monotonicity(m: f64, half: f64, res: usize) -> MonotonicityChart {
    let mut ch = MonotonicityChart {
        samples: 0,
        literal_failures: 0,
        nonneg_literal_failures: 0,
        weakened_failures: 0,
        worst_pair: (0.0, 0.0),
        worst_gap: 0.0,
    };
    let step = if res > 1 { 2.0 * half / (res - 1) as f64 } else { 0.0 };
    for i in 0..res {
        for j in 0..res {
            let a = -half + i as f64 * step;
            let b = -half + j as f64 * step;
            ch.samples += 1;
            let gap = monotonicity_gap(a, b, m, 1.0);
            if gap < -POINTWISE_TOL {
                ch.literal_failures += 1;
                if a >= 0.0 && b >= 0.0 {
                    ch.nonneg_literal_failures += 1;
                }
            }
            if gap < ch.worst_gap {
                ch.worst_gap = gap;
                ch.worst_pair = (a, b);
            }
            if !check_monotonicity_weakened(a, b, m) {
                ch.weakened_failures += 1;
            }
        }
    }
    ch
}

/// Field-level monotonicity gap
/// int (P(rho1) - P(rho2))(rho1 - rho2) dx - ||rho1 - rho2||^{m+1}_{L^{m+1}}.
pub fn field_monotonicity_gap(space: &SpectralSpace, r1: &Field, r2: &Field, m: f64) -> Result<f64> {
    let a = space.coeffs_of(r1)?;
    let b = space.coeffs_of(r2)?;
    let pa = porous_power_coeffs(space, &a, m).0;
    let pb = porous_power_coeffs(space, &b, m).0;
    let lhs: f64 = pa.iter().zip(&pb).zip(a.iter().zip(b.iter())).map(|((x, y), (u, v))| (x - y) * (u - v)).sum();
    let diff: Vec<f64> = a.iter().zip(b.iter()).map(|(u, v)| u - v).collect();
    let rhs = space.lp_pow_grid(&space.synthesize(&diff), m + 1.0);
    Ok(lhs - rhs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityProbe {
    pub lhs: f64,
    pub dissipation: f64,
    pub forcing: f64,
}

/// lhs = 2 <A(rho, xi), rho> + ||B(rho)||^2_HS; dissipation = 2 ||rho||^{m+1};
/// forcing = ||xi||^4_{L^{m+1}} + ||rho||^2_{H^-1}.
pub fn coercivity_probe(
    space: &SpectralSpace,
    rho: &Field,
    xi: &Field,
    params: &ModelParams,
) -> Result<CoercivityProbe> {
    let a = space.coeffs_of(rho)?;
    let x = space.coeffs_of(xi)?;
    let d = frozen_drift_coeffs(space, &a, &x, params, None)?;
    let op = NoiseOperator::new(space, &params.noise)?;
    let lhs = 2.0 * space.pairing_coeffs(&d, &a) + op.hs_sq_coeffs(space, &a);
    let p = params.m + 1.0;
    let ga = space.synthesize(&a);
    let gx = space.synthesize(&x);
    let dissipation = 2.0 * space.lp_pow_grid(&ga, p);
    let forcing = space.lp_grid(&gx, p).powi(4) + space.hminus1_sq(&a);
    Ok(CoercivityProbe { lhs, dissipation, forcing })
}

/// Dual norm estimate max_v |<f, v>| / ||v||_{L^{m+1}} over the test fields,
/// with <f, v> = int ((-Delta)^{-1} f) v dx.
pub fn vstar_norm_estimate(space: &SpectralSpace, f: &Field, m: f64, tests: &[Field]) -> Result<f64> {
    let a = space.coeffs_of(f)?;
    let mut best = 0.0_f64;
    for v in tests {
        let n = space.norm_lp(v, m + 1.0)?;
        if n > 0.0 {
            let b = space.coeffs_of(v)?;
            best = best.max(space.pairing_coeffs(&a, &b).abs() / n);
        }
    }
    Ok(best)
}

/// Ratio ||A(rho, xi)||_{V*} / (||rho||^m_{L^{m+1}} + ||xi||^2_{L^{m+1}}).
pub fn growth_ratio(
    space: &SpectralSpace,
    rho: &Field,
    xi: &Field,
    params: &ModelParams,
    tests: &[Field],
) -> Result<f64> {
    let d = frozen_drift(space, rho, xi, params)?;
    let v = vstar_norm_estimate(space, &d, params.m, tests)?;
    let p = params.m + 1.0;
    let den = space.norm_lp(rho, p)?.powf(params.m) + space.norm_lp(xi, p)?.powi(2);
    if den == 0.0 {
        return Err(SksError::Domain("growth ratio with zero fields".into()));
    }
    Ok(v / den)
}

/// |g(lambda) - g(0)| for g(lambda) = <A(rho + lambda v, xi), w>.
pub fn hemicontinuity_sweep(
    space: &SpectralSpace,
    rho: &Field,
    v: &Field,
    xi: &Field,
    w: &Field,
    params: &ModelParams,
    lambdas: &[f64],
) -> Result<Vec<f64>> {
    let a = space.coeffs_of(rho)?;
    let dv = space.coeffs_of(v)?;
    let x = space.coeffs_of(xi)?;
    let wc = space.coeffs_of(w)?;
    let g = |lam: f64| -> Result<f64> {
        let shifted: Vec<f64> = a.iter().zip(dv.iter()).map(|(p, q)| p + lam * q).collect();
        let d = frozen_drift_coeffs(space, &shifted, &x, params, None)?;
        Ok(space.pairing_coeffs(&d, &wc))
    };
    let g0 = g(0.0)?;
    lambdas.iter().map(|&l| Ok((g(l)? - g0).abs())).collect()
}

//! Transform plans and the Gelfand-triple norm machinery.
//!
//! Coarse level: the N-point midpoint grid. Fine level: the 2N-point grid
//! used for pointwise nonlinearities. Products of two band-K sine series are
//! band-2K trigonometric series, which the fine-level sine and cosine
//! analyses resolve exactly, so every projection below is a true Galerkin
//! projection up to rounding.

use std::borrow::Cow;
use std::f64::consts::PI;

use crate::domain::{Basis, DomainSpec};
use crate::dst::{self, Kind, MidpointFft};
use crate::error::{ensure_finite, Result, SksError};
use crate::field::{Field, GradField};
use crate::tensor::{apply_axis0, apply_axis1, dot};

#[derive(Debug, Clone)]
struct Level {
    m: usize,
    h: f64,
    fft: MidpointFft,
}

impl Level {
    fn new(length: f64, m: usize) -> Self {
        Level { m, h: length / m as f64, fft: MidpointFft::new(m, (2.0 / length).sqrt()) }
    }
}

/// Immutable transform plan for one domain.
#[derive(Debug, Clone)]
pub struct SpectralSpace {
    spec: DomainSpec,
    basis: Basis,
    coarse: Level,
    fine: Level,
    // (2K+1) x K: int s_l cos(n pi x / L) dx
    cos_moment: Vec<f64>,
    // K x fine.m: fine-grid samples of a band-2K sine series F -> sine coefficients of dF/dx
    div_sin: Vec<f64>,
    // K x fine.m: fine-grid samples of a band-2K cosine series -> sine coefficients
    cos_proj: Vec<f64>,
}

/// Closed form of int_0^pi sin(k u) cos(n u) du.
fn sin_cos_overlap(k: usize, n: usize) -> f64 {
    if k == n || (k + n).is_multiple_of(2) {
        0.0
    } else {
        let (kf, nf) = (k as f64, n as f64);
        2.0 * kf / (kf * kf - nf * nf)
    }
}

/// <d/dx s_l, s_k>.
fn deriv_entry(k: usize, l: usize, length: f64) -> f64 {
    (l as f64 * PI / length) * (2.0 / PI) * sin_cos_overlap(k, l)
}

/// <c_n, s_k> with c_0 = 1/sqrt(L) and c_n = sqrt(2/L) cos(n pi x / L).
fn cos_to_sin_entry(k: usize, n: usize) -> f64 {
    if n == 0 {
        2.0_f64.sqrt() / PI * sin_cos_overlap(k, 0)
    } else {
        2.0 / PI * sin_cos_overlap(k, n)
    }
}

impl SpectralSpace {
    pub fn new(spec: DomainSpec) -> Result<Self> {
        let basis = Basis::new(&spec)?;
        let (l, n, k) = (spec.length, spec.n, spec.k);
        let coarse = Level::new(l, n);
        let fm = 2 * n;
        let fine = Level::new(l, fm);
        let amp = (2.0 / l).sqrt();
        let mut cos_moment = Vec::with_capacity((2 * k + 1) * k);
        for nn in 0..=2 * k {
            for ll in 1..=k {
                cos_moment.push(amp * (l / PI) * sin_cos_overlap(ll, nn));
            }
        }
        // div_sin row r: fine-grid synthesis of <d/dx s_l, s_r> over l < M.
        // cos_proj row r: fine-grid synthesis of <c_n, s_r> over n < M.
        let hf = fine.h;
        let mut div_sin = Vec::with_capacity(k * fm);
        let mut cos_proj = Vec::with_capacity(k * fm);
        for r in 1..=k {
            let drow: Vec<f64> = (1..fm).map(|ll| deriv_entry(r, ll, l)).collect();
            div_sin.extend(fine.fft.synth_sin(&drow).into_iter().map(|v| hf * v));
            let crow: Vec<f64> = (1..fm).map(|nn| cos_to_sin_entry(r, nn)).collect();
            let c0 = cos_to_sin_entry(r, 0) / l.sqrt();
            cos_proj.extend(fine.fft.synth_cos(&crow).into_iter().map(|v| hf * (v + c0)));
        }
        Ok(SpectralSpace { spec, basis, coarse, fine, cos_moment, div_sin, cos_proj })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn n_modes(&self) -> usize {
        self.basis.len()
    }

    pub fn n_grid(&self) -> usize {
        self.spec.n_grid()
    }

    pub fn n_grid_fine(&self) -> usize {
        self.fine.m.pow(self.spec.dim as u32)
    }

    /// Coarse grid spacing.
    pub fn h(&self) -> f64 {
        self.coarse.h
    }

    /// Quadrature weight of one coarse cell, h^d.
    pub fn cell_volume(&self) -> f64 {
        self.coarse.h.powi(self.spec.dim as i32)
    }

    fn level(&self, fine: bool) -> &Level {
        if fine {
            &self.fine
        } else {
            &self.coarse
        }
    }

    fn check_len(&self, a: &[f64], want: usize, what: &str) -> Result<()> {
        if a.len() != want {
            return Err(SksError::Contract(format!("{what}: expected length {want}, got {}", a.len())));
        }
        Ok(())
    }

    fn synth_level(&self, a: &[f64], fine: bool) -> Vec<f64> {
        let t = &self.level(fine).fft;
        match self.spec.dim {
            1 => t.synth_sin(a),
            _ => dst::synth2(t, a, self.spec.k, [Kind::Sin, Kind::Sin]),
        }
    }

    fn project_level(&self, g: &[f64], fine: bool) -> Vec<f64> {
        let lv = self.level(fine);
        let k = self.spec.k;
        match self.spec.dim {
            1 => lv.fft.analyze_sin(g, k).into_iter().map(|v| v * lv.h).collect(),
            _ => dst::analyze2(&lv.fft, g, k).into_iter().map(|v| v * lv.h * lv.h).collect(),
        }
    }

    /// Coarse-grid values of a coefficient vector.
    pub fn synthesize(&self, a: &[f64]) -> Vec<f64> {
        self.synth_level(a, false)
    }

    /// Values on the 2N-point oversampled grid.
    pub fn synthesize_fine(&self, a: &[f64]) -> Vec<f64> {
        self.synth_level(a, true)
    }

    /// Discrete sine projection of coarse-grid values onto the K^d modes.
    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        self.project_level(g, false)
    }

    /// Sine projection of oversampled-grid values onto the K^d modes.
    pub fn project_fine(&self, g: &[f64]) -> Vec<f64> {
        self.project_level(g, true)
    }

    fn gradient_level(&self, a: &[f64], fine: bool) -> Vec<Vec<f64>> {
        let (k, l) = (self.spec.k, self.spec.length);
        let t = &self.level(fine).fft;
        match self.spec.dim {
            1 => {
                let da: Vec<f64> = a.iter().enumerate().map(|(j, v)| v * (j + 1) as f64 * PI / l).collect();
                vec![t.synth_cos(&da)]
            }
            _ => {
                let mut ax = vec![0.0; a.len()];
                let mut ay = vec![0.0; a.len()];
                for j in 0..k {
                    for jj in 0..k {
                        let v = a[j * k + jj];
                        ax[j * k + jj] = v * (j + 1) as f64 * PI / l;
                        ay[j * k + jj] = v * (jj + 1) as f64 * PI / l;
                    }
                }
                vec![dst::synth2(t, &ax, k, [Kind::Cos, Kind::Sin]), dst::synth2(t, &ay, k, [Kind::Sin, Kind::Cos])]
            }
        }
    }

    /// Gradient components on the coarse grid.
    pub fn gradient_grid(&self, a: &[f64]) -> Vec<Vec<f64>> {
        self.gradient_level(a, false)
    }

    pub(crate) fn gradient_fine(&self, a: &[f64]) -> Vec<Vec<f64>> {
        self.gradient_level(a, true)
    }

    /// Sine coefficients of div F for a flux F given on the oversampled grid.
    /// Exact when each component F_i is a band-(2K) product of one sine and
    /// one cosine factor along axis i and of two sine factors along the others.
    pub(crate) fn divergence_project(&self, flux: &[Vec<f64>]) -> Vec<f64> {
        let (k, fm) = (self.spec.k, self.fine.m);
        match self.spec.dim {
            1 => (0..k).map(|r| dot(&self.div_sin[r * fm..(r + 1) * fm], &flux[0])).collect(),
            _ => {
                // x component: sine in x, cosine in y
                let tx = apply_axis0(&self.div_sin, k, fm, &flux[0], fm);
                let gx = apply_axis1(&self.cos_proj, k, fm, &tx, k);
                // y component: cosine in x, sine in y
                let ty = apply_axis0(&self.cos_proj, k, fm, &flux[1], fm);
                let gy = apply_axis1(&self.div_sin, k, fm, &ty, k);
                gx.iter().zip(&gy).map(|(a, b)| a + b).collect()
            }
        }
    }

    /// Row-major (2K+1) x K table of int_0^L s_l(x) cos(n pi x / L) dx.
    pub(crate) fn cos_moment(&self) -> &[f64] {
        &self.cos_moment
    }

    /// Midpoint rule on the coarse grid.
    pub(crate) fn integrate_grid(&self, g: &[f64]) -> f64 {
        g.iter().sum::<f64>() * self.cell_volume()
    }

    // ---- Field-level interface ----

    /// Spectral coefficients of a field, projecting from the grid if needed.
    pub fn coeffs_of<'a>(&self, f: &'a Field) -> Result<Cow<'a, [f64]>> {
        if let Some(c) = f.coeffs() {
            self.check_len(c, self.n_modes(), "coefficients")?;
            ensure_finite(c, "coefficients")?;
            Ok(Cow::Borrowed(c))
        } else if let Some(g) = f.grid() {
            self.check_len(g, self.n_grid(), "grid values")?;
            ensure_finite(g, "grid values")?;
            Ok(Cow::Owned(self.project(g)))
        } else {
            Err(SksError::Contract("field has no valid representation".into()))
        }
    }

    /// Coarse-grid values of a field, synthesizing if needed.
    pub fn grid_of<'a>(&self, f: &'a Field) -> Result<Cow<'a, [f64]>> {
        if let Some(g) = f.grid() {
            self.check_len(g, self.n_grid(), "grid values")?;
            ensure_finite(g, "grid values")?;
            Ok(Cow::Borrowed(g))
        } else if let Some(c) = f.coeffs() {
            self.check_len(c, self.n_modes(), "coefficients")?;
            ensure_finite(c, "coefficients")?;
            Ok(Cow::Owned(self.synthesize(c)))
        } else {
            Err(SksError::Contract("field has no valid representation".into()))
        }
    }

    /// Populates the spectral representation (orthogonal projection onto the
    /// truncated sine basis).
    pub fn to_spectral(&self, f: &Field) -> Result<Field> {
        let c = self.coeffs_of(f)?.into_owned();
        Ok(match f.grid() {
            Some(g) => Field::with_both(g.to_vec(), c),
            None => Field::from_coeffs(c),
        })
    }

    /// Populates the grid representation.
    pub fn to_grid(&self, f: &Field) -> Result<Field> {
        let g = self.grid_of(f)?.into_owned();
        Ok(match f.coeffs() {
            Some(c) => Field::with_both(g, c.to_vec()),
            None => Field::from_grid(g),
        })
    }

    /// Field from coefficients with both representations populated.
    pub fn field_from_coeffs(&self, c: Vec<f64>) -> Result<Field> {
        self.check_len(&c, self.n_modes(), "coefficients")?;
        ensure_finite(&c, "coefficients")?;
        let g = self.synthesize(&c);
        Ok(Field::with_both(g, c))
    }

    /// sqrt(sum a_k^2 / lambda_k).
    pub fn norm_hminus1(&self, f: &Field) -> Result<f64> {
        let a = self.coeffs_of(f)?;
        Ok(self.hminus1_sq(&a).sqrt())
    }

    pub(crate) fn hminus1_sq(&self, a: &[f64]) -> f64 {
        a.iter().zip(self.basis.eigenvalues()).map(|(x, l)| x * x / l).sum()
    }

    pub(crate) fn pairing_coeffs(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(self.basis.eigenvalues()).map(|((x, y), l)| x * y / l).sum()
    }

    /// (int |f|^p)^{1/p} by the midpoint rule on the coarse grid.
    pub fn norm_lp(&self, f: &Field, p: f64) -> Result<f64> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(SksError::Domain(format!("norm_lp needs p >= 1, got {p}")));
        }
        let g = self.grid_of(f)?;
        Ok(self.lp_grid(&g, p))
    }

    pub(crate) fn lp_pow_grid(&self, g: &[f64], p: f64) -> f64 {
        let s: f64 = if p == 2.0 {
            g.iter().map(|v| v * v).sum()
        } else if p.fract() == 0.0 && p <= 16.0 {
            let ip = p as i32;
            g.iter().map(|v| v.abs().powi(ip)).sum()
        } else {
            g.iter().map(|v| v.abs().powf(p)).sum()
        };
        s * self.cell_volume()
    }

    pub(crate) fn lp_grid(&self, g: &[f64], p: f64) -> f64 {
        self.lp_pow_grid(g, p).powf(1.0 / p)
    }

    /// Coefficients a_k / lambda_k.
    pub fn inv_laplacian(&self, f: &Field) -> Result<Field> {
        let a = self.coeffs_of(f)?;
        Ok(Field::from_coeffs(a.iter().zip(self.basis.eigenvalues()).map(|(x, l)| x / l).collect()))
    }

    /// Spectral gradient evaluated on the coarse grid.
    pub fn gradient(&self, f: &Field) -> Result<GradField> {
        let a = self.coeffs_of(f)?;
        Ok(GradField { components: self.gradient_grid(&a) })
    }

    /// sum a_k b_k / lambda_k.
    pub fn dual_pairing(&self, u: &Field, w: &Field) -> Result<f64> {
        let a = self.coeffs_of(u)?;
        let b = self.coeffs_of(w)?;
        Ok(self.pairing_coeffs(&a, &b))
    }

    /// Upper bound on ||f||_{H^-1} / ||f||_{L^{m+1}} from the Poincare and
    /// Hoelder inequalities: lambda_1^{-1/2} |O|^{(m-1)/(2(m+1))}.
    pub fn embedding_constant_bound(&self, m: f64) -> f64 {
        let lam1 = self.basis.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        lam1.powf(-0.5) * self.spec.volume().powf((m - 1.0) / (2.0 * (m + 1.0)))
    }

    /// Largest observed ratio ||f||_{H^-1} / ||f||_{L^{m+1}} over a sample.
    pub fn measure_embedding_constant(&self, samples: &[Field], m: f64) -> Result<f64> {
        let mut best = 0.0_f64;
        for f in samples {
            let den = self.norm_lp(f, m + 1.0)?;
            if den > 0.0 {
                best = best.max(self.norm_hminus1(f)? / den);
            }
        }
        Ok(best)
    }
}

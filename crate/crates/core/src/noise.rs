//! Q-Wiener forcing on the Laplacian eigenbasis: sigma sum_k mu_k e_k rho dbeta_k.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::domain::Basis;
use crate::error::{Result, SksError};
use crate::field::Field;
use crate::space::SpectralSpace;

/// Noise intensity, decay mu_k = lambda_k^{-a}, truncation K_W and base seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub decay: f64,
    pub modes: usize,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(sigma: f64, decay: f64, modes: usize, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(SksError::Config(format!("noise.sigma must be >= 0, got {sigma}")));
        }
        if !(decay > 0.0) || !decay.is_finite() {
            return Err(SksError::Config(format!("noise.a must be > 0, got {decay}")));
        }
        if modes == 0 {
            return Err(SksError::Config("noise.K_W must be >= 1".into()));
        }
        Ok(NoiseSpec { sigma, decay, modes, seed })
    }

    /// sigma = 0 with a single retained mode.
    pub fn silent() -> Self {
        NoiseSpec { sigma: 0.0, decay: 1.5, modes: 1, seed: 0 }
    }

    /// 3/2 in 1D, 2 in 2D.
    pub fn default_decay(dim: usize) -> f64 {
        if dim == 1 {
            1.5
        } else {
            2.0
        }
    }

    pub fn mu(&self, lambda: f64) -> f64 {
        lambda.powf(-self.decay)
    }

    /// sum_k mu_k^2 lambda_k^2 converges iff 4a - 4 > d.
    pub fn series_converges(&self, dim: usize) -> bool {
        4.0 * self.decay - 4.0 > dim as f64
    }

    pub fn validate(&self, basis: &Basis) -> Result<()> {
        if !self.series_converges(basis.dim()) {
            return Err(SksError::Config(format!(
                "noise.a = {} gives a divergent C1 series in dimension {} (need a > {})",
                self.decay,
                basis.dim(),
                1.0 + basis.dim() as f64 / 4.0
            )));
        }
        if self.modes > basis.len() {
            return Err(SksError::Config(format!(
                "noise.K_W = {} exceeds the {} available modes",
                self.modes,
                basis.len()
            )));
        }
        Ok(())
    }
}

/// Truncated C1 = sum over the first K_W modes (spectral order) of mu_k^2 lambda_k^2.
pub fn c1_constant(spec: &NoiseSpec, basis: &Basis) -> f64 {
    basis
        .spectral_order()
        .iter()
        .take(spec.modes)
        .map(|&s| {
            let l = basis.eigenvalue(s);
            (spec.mu(l) * l).powi(2)
        })
        .sum()
}

/// Brownian increments of the retained modes over one step.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseIncrement {
    pub dt: f64,
    pub values: Vec<f64>,
}

impl NoiseIncrement {
    pub fn zero(modes: usize, dt: f64) -> Self {
        NoiseIncrement { dt, values: vec![0.0; modes] }
    }
}

/// Stream identity of one ensemble member. The generator is ChaCha8 keyed by
/// `seed` with its 64-bit stream word set to `stream`, so seed_path =
/// (base_seed, path_index) and distinct members never share key stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoiseStream {
    pub seed: u64,
    pub stream: u64,
}

impl NoiseStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        NoiseStream { seed, stream }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.stream);
        r
    }
}

/// i.i.d. N(0, dt) increments for the first `spec.modes` modes.
pub fn sample_increment<R: Rng + ?Sized>(spec: &NoiseSpec, dt: f64, rng: &mut R) -> Result<NoiseIncrement> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(SksError::Domain(format!("time step must be > 0, got {dt}")));
    }
    Ok(draw(spec.modes, dt, rng))
}

pub(crate) fn draw<R: Rng + ?Sized>(modes: usize, dt: f64, rng: &mut R) -> NoiseIncrement {
    let s = dt.sqrt();
    let values = (0..modes)
        .map(|_| {
            let z: f64 = rng.sample(StandardNormal);
            s * z
        })
        .collect();
    NoiseIncrement { dt, values }
}

/// Precomputed mode list for the multiplicative noise. Products rho e_k are
/// projected exactly through cosine moments of rho.
#[derive(Debug, Clone)]
pub struct NoiseOperator {
    dim: usize,
    k: usize,
    length: f64,
    // (1-based multi-index, sigma mu_k)
    modes: Vec<([usize; 2], f64)>,
}

impl NoiseOperator {
    pub fn new(space: &SpectralSpace, spec: &NoiseSpec) -> Result<Self> {
        let basis = space.basis();
        if spec.modes > basis.len() {
            return Err(SksError::Config(format!(
                "noise.K_W = {} exceeds the {} available modes",
                spec.modes,
                basis.len()
            )));
        }
        let modes = basis
            .spectral_order()
            .iter()
            .take(spec.modes)
            .map(|&s| (basis.multi_index(s), spec.sigma * spec.mu(basis.eigenvalue(s))))
            .collect();
        Ok(NoiseOperator { dim: space.dim(), k: space.spec().k, length: space.spec().length, modes })
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn is_silent(&self) -> bool {
        self.modes.iter().all(|m| m.1 == 0.0)
    }

    /// Q_n = int rho cos(n pi x / L) dx for n = 0..2K (tensorised in 2D).
    fn moments(&self, space: &SpectralSpace, a: &[f64]) -> Vec<f64> {
        let k = self.k;
        let nq = 2 * k + 1;
        let c = space.cos_moment();
        match self.dim {
            1 => (0..nq).map(|n| crate::tensor::dot(&c[n * k..(n + 1) * k], a)).collect(),
            _ => {
                let tmp = crate::tensor::apply_axis1(c, nq, k, a, k);
                crate::tensor::apply_axis0(c, nq, k, &tmp, nq)
            }
        }
    }

    /// Coefficients of P(rho e_w) scaled by `gamma`, accumulated into `out`.
    fn add_mode_product(&self, q: &[f64], idx: [usize; 2], gamma: f64, out: &mut [f64]) {
        let k = self.k;
        let nq = 2 * k + 1;
        match self.dim {
            1 => {
                let s = gamma / self.length;
                let kw = idx[0];
                for j in 1..=k {
                    out[j - 1] += s * (q[kw.abs_diff(j)] - q[kw + j]);
                }
            }
            _ => {
                let s = gamma / (self.length * self.length);
                let (k1, k2) = (idx[0], idx[1]);
                for j1 in 1..=k {
                    let (m1, p1) = (k1.abs_diff(j1) * nq, (k1 + j1) * nq);
                    let row = &mut out[(j1 - 1) * k..j1 * k];
                    for j2 in 1..=k {
                        let (m2, p2) = (k2.abs_diff(j2), k2 + j2);
                        row[j2 - 1] += s * (q[m1 + m2] - q[m1 + p2] - q[p1 + m2] + q[p1 + p2]);
                    }
                }
            }
        }
    }

    /// Coefficients of the projected increment P(rho g), g = sum sigma mu_k dbeta_k e_k.
    pub fn apply_coeffs(&self, space: &SpectralSpace, a: &[f64], inc: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; a.len()];
        if self.is_silent() || inc.iter().all(|v| *v == 0.0) {
            return out;
        }
        let q = self.moments(space, a);
        for ((idx, amp), db) in self.modes.iter().zip(inc) {
            let g = amp * db;
            if g != 0.0 {
                self.add_mode_product(&q, *idx, g, &mut out);
            }
        }
        out
    }

    /// sum_k sigma^2 mu_k^2 ||rho e_k||^2_{H^-1}.
    pub fn hs_sq_coeffs(&self, space: &SpectralSpace, a: &[f64]) -> f64 {
        if self.is_silent() {
            return 0.0;
        }
        let q = self.moments(space, a);
        let mut buf = vec![0.0; a.len()];
        let mut total = 0.0;
        for (idx, amp) in &self.modes {
            buf.iter_mut().for_each(|v| *v = 0.0);
            self.add_mode_product(&q, *idx, 1.0, &mut buf);
            total += amp * amp * space.hminus1_sq(&buf);
        }
        total
    }
}

fn check_increment(op: &NoiseOperator, inc: &NoiseIncrement) -> Result<()> {
    if inc.values.len() != op.n_modes() {
        return Err(SksError::Contract(format!(
            "increment has {} modes, noise spec retains {}",
            inc.values.len(),
            op.n_modes()
        )));
    }
    crate::error::ensure_finite(&inc.values, "noise increment")
}

/// Galerkin projection of rho(x) g(x), g = sum_{k <= K_W} sigma mu_k dbeta_k e_k.
/// Returned in spectral form.
pub fn apply_noise(space: &SpectralSpace, rho: &Field, inc: &NoiseIncrement, spec: &NoiseSpec) -> Result<Field> {
    let op = NoiseOperator::new(space, spec)?;
    check_increment(&op, inc)?;
    let a = space.coeffs_of(rho)?;
    Ok(Field::from_coeffs(op.apply_coeffs(space, &a, &inc.values)))
}

/// (sum_{k <= K_W} sigma^2 mu_k^2 ||rho e_k||^2_{H^-1})^{1/2}.
pub fn hs_norm_b(space: &SpectralSpace, rho: &Field, spec: &NoiseSpec) -> Result<f64> {
    let op = NoiseOperator::new(space, spec)?;
    let a = space.coeffs_of(rho)?;
    Ok(op.hs_sq_coeffs(space, &a).sqrt())
}

//! Box domain and the Dirichlet Laplacian eigensystem.

use std::f64::consts::PI;

use crate::error::{Result, SksError};

/// The box (0, L)^d with N midpoint grid points and K sine modes per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DomainSpec {
    pub dim: usize,
    pub length: f64,
    pub n: usize,
    pub k: usize,
}

impl DomainSpec {
    pub fn new(dim: usize, length: f64, n: usize, k: usize) -> Result<Self> {
        let spec = DomainSpec { dim, length, n, k };
        spec.validate()?;
        Ok(spec)
    }

    /// d = 1, L = pi, N = 128, K = 127.
    pub fn default_1d() -> Self {
        DomainSpec { dim: 1, length: PI, n: 128, k: 127 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != 1 && self.dim != 2 {
            return Err(SksError::Config(format!("domain.d must be 1 or 2, got {}", self.dim)));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(SksError::Config(format!("domain.L must be positive, got {}", self.length)));
        }
        if self.n < 16 || !self.n.is_power_of_two() {
            return Err(SksError::Config(format!("domain.N must be a power of two >= 16, got {}", self.n)));
        }
        if self.k < 1 || self.k > self.n - 1 {
            return Err(SksError::Config(format!(
                "domain.K must lie in [1, N-1] = [1, {}], got {}",
                self.n - 1,
                self.k
            )));
        }
        Ok(())
    }

    /// Grid spacing h = L / N.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of coefficients, K^d.
    pub fn n_modes(&self) -> usize {
        self.k.pow(self.dim as u32)
    }

    /// Number of grid values, N^d.
    pub fn n_grid(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    /// Lebesgue measure of the box.
    pub fn volume(&self) -> f64 {
        self.length.powi(self.dim as i32)
    }

    /// Midpoint grid coordinates along one axis, x_i = (i + 1/2) h.
    pub fn axis_points(&self) -> Vec<f64> {
        midpoints(self.length, self.n)
    }
}

pub(crate) fn midpoints(length: f64, m: usize) -> Vec<f64> {
    let h = length / m as f64;
    (0..m).map(|i| (i as f64 + 0.5) * h).collect()
}

/// Eigenpairs of -Delta with homogeneous Dirichlet conditions on the box.
///
/// Storage order is row-major over the 1-based multi-index: in 2D the
/// coefficient of e_{(j,k)} sits at flat index (j-1) K + (k-1). The
/// *spectral order* is a stable sort of the storage indices by eigenvalue
/// (ties broken by storage index); noise modes are taken in that order.
#[derive(Debug, Clone)]
pub struct Basis {
    dim: usize,
    length: f64,
    k: usize,
    eigenvalues: Vec<f64>,
    order: Vec<usize>,
}

impl Basis {
    pub fn new(spec: &DomainSpec) -> Result<Self> {
        spec.validate()?;
        let lam1: Vec<f64> = (1..=spec.k).map(|j| wavenumber(j, spec.length).powi(2)).collect();
        let eigenvalues: Vec<f64> = match spec.dim {
            1 => lam1.clone(),
            _ => {
                let mut v = Vec::with_capacity(spec.k * spec.k);
                for lj in &lam1 {
                    for lk in &lam1 {
                        v.push(lj + lk);
                    }
                }
                v
            }
        };
        let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eigenvalues[a].total_cmp(&eigenvalues[b]));
        Ok(Basis { dim: spec.dim, length: spec.length, k: spec.k, eigenvalues, order })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalues in storage order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, storage: usize) -> f64 {
        self.eigenvalues[storage]
    }

    /// Storage indices listed in spectral (nondecreasing eigenvalue) order.
    pub fn spectral_order(&self) -> &[usize] {
        &self.order
    }

    /// 1-based multi-index of a storage slot. The second entry is 0 in 1D.
    pub fn multi_index(&self, storage: usize) -> [usize; 2] {
        match self.dim {
            1 => [storage + 1, 0],
            _ => [storage / self.k + 1, storage % self.k + 1],
        }
    }

    /// Storage slot of a 1-based multi-index.
    pub fn storage_index(&self, idx: [usize; 2]) -> Option<usize> {
        let ok = |j: usize| j >= 1 && j <= self.k;
        match self.dim {
            1 if ok(idx[0]) => Some(idx[0] - 1),
            2 if ok(idx[0]) && ok(idx[1]) => Some((idx[0] - 1) * self.k + idx[1] - 1),
            _ => None,
        }
    }

    /// Pointwise value of the eigenfunction in a storage slot.
    pub fn eval(&self, storage: usize, x: &[f64]) -> f64 {
        let idx = self.multi_index(storage);
        (0..self.dim).map(|ax| sine_mode(idx[ax], self.length, x[ax])).product()
    }
}

/// k pi / L.
pub fn wavenumber(k: usize, length: f64) -> f64 {
    k as f64 * PI / length
}

/// sqrt(2/L) sin(k pi x / L).
pub fn sine_mode(k: usize, length: f64, x: f64) -> f64 {
    (2.0 / length).sqrt() * (wavenumber(k, length) * x).sin()
}

/// Convenience wrapper that validates and builds the eigensystem.
pub fn build_basis(spec: &DomainSpec) -> Result<Basis> {
    Basis::new(spec)
}

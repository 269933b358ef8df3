//! Newtonian and Bessel interaction potentials.

use std::f64::consts::PI;

use crate::error::{Result, SksError};
use crate::field::{Field, GradField};
use crate::quadrature;
use crate::space::SpectralSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// Green's function of -Delta.
    Newtonian,
    /// Green's function of 1 - Delta.
    Bessel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum KernelMode {
    /// Inverse of the Dirichlet operator, diagonal in the sine basis.
    #[default]
    Resolvent,
    /// Free-space kernel summed over the grid of the box.
    DirectQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub mode: KernelMode,
}

impl KernelSpec {
    pub fn bessel() -> Self {
        KernelSpec { kind: KernelKind::Bessel, mode: KernelMode::Resolvent }
    }

    pub fn newtonian() -> Self {
        KernelSpec { kind: KernelKind::Newtonian, mode: KernelMode::Resolvent }
    }

    pub fn direct(self) -> Self {
        KernelSpec { mode: KernelMode::DirectQuadrature, ..self }
    }
}

impl KernelKind {
    /// Multiplier applied to the coefficient of an eigenmode with eigenvalue `lambda`.
    pub fn symbol(self, lambda: f64) -> f64 {
        match self {
            KernelKind::Newtonian => 1.0 / lambda,
            KernelKind::Bessel => 1.0 / (1.0 + lambda),
        }
    }

    /// Free-space kernel as a function of the distance.
    pub fn free_space(self, r: f64, dim: usize) -> Result<f64> {
        match self {
            KernelKind::Newtonian => newtonian_kernel_eval(r, dim),
            KernelKind::Bessel => bessel_kernel_eval(r, dim),
        }
    }
}

/// Resolvent coefficients c_k = symbol(lambda_k) a_k.
pub fn resolvent_coeffs(space: &SpectralSpace, a: &[f64], kind: KernelKind) -> Vec<f64> {
    a.iter().zip(space.basis().eigenvalues()).map(|(x, &l)| x * kind.symbol(l)).collect()
}

/// -|x|/2 in 1D, -ln(r)/(2 pi) in 2D, 1/(4 pi r) in 3D.
pub fn newtonian_kernel_eval(r: f64, dim: usize) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(SksError::Domain(format!("kernel radius must be >= 0, got {r}")));
    }
    match dim {
        1 => Ok(-0.5 * r),
        2 | 3 if r == 0.0 => Err(SksError::Singularity(dim)),
        2 => Ok(-r.ln() / (2.0 * PI)),
        3 => Ok(1.0 / (4.0 * PI * r)),
        _ => Err(SksError::Domain(format!("unsupported dimension {dim}"))),
    }
}

/// Bessel potential int_0^inf (4 pi t)^{-d/2} exp(-r^2/(4t) - t) dt.
///
/// Computed with t = u^2 and adaptive Gauss-Kronrod on t in [0, 40 + r].
pub fn bessel_kernel_eval(r: f64, dim: usize) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(SksError::Domain(format!("kernel radius must be >= 0, got {r}")));
    }
    if !(1..=3).contains(&dim) {
        return Err(SksError::Domain(format!("unsupported dimension {dim}")));
    }
    if r == 0.0 && dim >= 2 {
        return Err(SksError::Singularity(dim));
    }
    let d = dim as f64;
    let pref = 2.0 * (4.0 * PI).powf(-d / 2.0);
    let integrand = |u: f64| {
        if u <= 0.0 {
            return if dim == 1 && r == 0.0 { pref } else { 0.0 };
        }
        let u2 = u * u;
        pref * u.powf(1.0 - d) * (-(r * r) / (4.0 * u2) - u2).exp()
    };
    let umax = (40.0 + r).sqrt();
    let up = (0.5 * r).sqrt();
    let mut breaks = vec![0.0];
    for s in [0.125, 0.5, 1.0, 2.0, 4.0] {
        let b = s * up;
        if b > 0.0 && b < umax {
            breaks.push(b);
        }
    }
    breaks.push(umax);
    Ok(quadrature::integrate(integrand, &breaks, 1e-13, 4000))
}

/// Kernel values tabulated by grid offset for the direct-quadrature mode.
/// The self cell uses the cell average of the kernel.
#[derive(Debug, Clone)]
pub struct KernelTable {
    dim: usize,
    n: usize,
    weight: f64,
    values: Vec<f64>,
}

const SELF_CELL_SUBDIV: usize = 16;

impl KernelTable {
    pub fn new(space: &SpectralSpace, kind: KernelKind) -> Result<Self> {
        let dim = space.dim();
        let n = space.spec().n;
        let h = space.h();
        let s = SELF_CELL_SUBDIV;
        let sub = |i: usize| ((i as f64 + 0.5) / s as f64 - 0.5) * h;
        let self_avg = match dim {
            1 => {
                let mut acc = 0.0;
                for i in 0..s {
                    acc += kind.free_space(sub(i).abs(), 1)?;
                }
                acc / s as f64
            }
            _ => {
                let mut acc = 0.0;
                for i in 0..s {
                    for j in 0..s {
                        acc += kind.free_space(sub(i).hypot(sub(j)), 2)?;
                    }
                }
                acc / (s * s) as f64
            }
        };
        let values = match dim {
            1 => {
                let mut v = vec![self_avg];
                for i in 1..n {
                    v.push(kind.free_space(i as f64 * h, 1)?);
                }
                v
            }
            _ => {
                let mut v = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..=i {
                        let val = if i == 0 && j == 0 {
                            self_avg
                        } else {
                            kind.free_space(h * (i as f64).hypot(j as f64), 2)?
                        };
                        v[i * n + j] = val;
                        v[j * n + i] = val;
                    }
                }
                v
            }
        };
        Ok(KernelTable { dim, n, weight: space.cell_volume(), values })
    }

    /// c(x_i) = sum_j Phi(x_i - y_j) rho(y_j) h^d on the coarse grid.
    pub fn convolve(&self, rho: &[f64]) -> Vec<f64> {
        let n = self.n;
        match self.dim {
            1 => (0..n)
                .map(|i| {
                    let s: f64 = (0..n).map(|j| self.values[i.abs_diff(j)] * rho[j]).sum();
                    s * self.weight
                })
                .collect(),
            _ => {
                let mut out = vec![0.0; n * n];
                for i1 in 0..n {
                    for i2 in 0..n {
                        let mut s = 0.0;
                        for j1 in 0..n {
                            let row = &self.values[i1.abs_diff(j1) * n..];
                            let rrow = &rho[j1 * n..(j1 + 1) * n];
                            for (j2, r) in rrow.iter().enumerate() {
                                s += row[i2.abs_diff(j2)] * r;
                            }
                        }
                        out[i1 * n + i2] = s * self.weight;
                    }
                }
                out
            }
        }
    }
}

/// Sine coefficients of the interaction field for coefficients `a`.
pub(crate) fn interaction_coeffs(
    space: &SpectralSpace,
    a: &[f64],
    kernel: KernelSpec,
    table: Option<&KernelTable>,
) -> Result<Vec<f64>> {
    match kernel.mode {
        KernelMode::Resolvent => Ok(resolvent_coeffs(space, a, kernel.kind)),
        KernelMode::DirectQuadrature => {
            let owned;
            let t = match table {
                Some(t) => t,
                None => {
                    owned = KernelTable::new(space, kernel.kind)?;
                    &owned
                }
            };
            let g = space.synthesize(a);
            Ok(space.project(&t.convolve(&g)))
        }
    }
}

/// Phi * rho. Resolvent mode returns coefficients; direct mode returns the
/// grid sum together with its sine projection.
pub fn interaction_field(space: &SpectralSpace, rho: &Field, kernel: KernelSpec) -> Result<Field> {
    let a = space.coeffs_of(rho)?;
    match kernel.mode {
        KernelMode::Resolvent => Ok(Field::from_coeffs(resolvent_coeffs(space, &a, kernel.kind))),
        KernelMode::DirectQuadrature => {
            let t = KernelTable::new(space, kernel.kind)?;
            let g = t.convolve(&space.grid_of(rho)?);
            space.to_spectral(&Field::from_grid(g))
        }
    }
}

/// Gradient of the interaction field by spectral differentiation.
pub fn grad_interaction(space: &SpectralSpace, rho: &Field, kernel: KernelSpec) -> Result<GradField> {
    let c = interaction_field(space, rho, kernel)?;
    space.gradient(&c)
}

/// max_grid |grad Phi * rho| / ||rho||_{L^{m+1}}.
pub fn kernel_bound_ratio(space: &SpectralSpace, rho: &Field, kernel: KernelSpec, m: f64) -> Result<f64> {
    let d = space.dim() as f64;
    let ok = match kernel.kind {
        KernelKind::Newtonian => m + 1.0 >= d,
        KernelKind::Bessel => m + 1.0 > 2.0,
    };
    if !ok {
        return Err(SksError::Domain(format!("exponent m = {m} outside the kernel bound hypotheses")));
    }
    let den = space.norm_lp(rho, m + 1.0)?;
    if den == 0.0 {
        return Err(SksError::Domain("kernel bound ratio of the zero field".into()));
    }
    Ok(grad_interaction(space, rho, kernel)?.max_magnitude() / den)
}

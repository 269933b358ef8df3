//! Random and structured initial fields.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SksError};
use crate::field::Field;
use crate::space::SpectralSpace;

/// Gaussian coefficients on the modes with every index <= `band`, scaled by
/// (sum of squared indices)^{-decay/2}.
pub fn random_coeffs<R: Rng + ?Sized>(space: &SpectralSpace, rng: &mut R, band: usize, decay: f64) -> Vec<f64> {
    let basis = space.basis();
    (0..basis.len())
        .map(|s| {
            let idx = basis.multi_index(s);
            let within = idx[0] <= band && idx[1] <= band;
            let z: f64 = rng.sample(StandardNormal);
            if within {
                let w = (idx[0] * idx[0] + idx[1] * idx[1]) as f64;
                z * w.powf(-decay / 2.0)
            } else {
                0.0
            }
        })
        .collect()
}

pub fn random_field<R: Rng + ?Sized>(space: &SpectralSpace, rng: &mut R, band: usize, decay: f64) -> Result<Field> {
    space.field_from_coeffs(random_coeffs(space, rng, band, decay))
}

/// Sine coefficients (1-based index -> value, unnormalized sin) of
/// sin(theta) (c0 + sum_n c_n cos(n theta)) with c0 >= sum |c_n|, which is
/// nonnegative on (0, pi).
fn nonneg_profile<R: Rng + ?Sized>(rng: &mut R, band: usize) -> Vec<f64> {
    let nc = band.saturating_sub(1);
    let cs: Vec<f64> = (0..nc).map(|_| rng.random_range(-1.0..1.0) / (1.0 + (rng.random::<f64>() * 3.0))).collect();
    let c0 = cs.iter().map(|c| c.abs()).sum::<f64>() * (1.0 + rng.random::<f64>()) + 0.1;
    let mut s = vec![0.0; band + 1];
    s[1] += c0;
    for (i, c) in cs.iter().enumerate() {
        let n = i + 1;
        // sin(t) cos(n t) = (sin((n+1) t) - sin((n-1) t)) / 2
        s[n + 1] += 0.5 * c;
        if n >= 2 {
            s[n - 1] -= 0.5 * c;
        }
    }
    s
}

/// Random nonnegative band-limited field with modes up to `band` per axis.
pub fn random_nonnegative_coeffs<R: Rng + ?Sized>(space: &SpectralSpace, rng: &mut R, band: usize) -> Result<Vec<f64>> {
    let spec = space.spec();
    if band == 0 || band > spec.k {
        return Err(SksError::Domain(format!("band must lie in [1, K], got {band}")));
    }
    let scale = (spec.length / 2.0).sqrt();
    let axis = |rng: &mut R| -> Vec<f64> {
        let p = nonneg_profile(rng, band);
        let mut v = vec![0.0; spec.k];
        for j in 1..=band {
            v[j - 1] = p[j] * scale;
        }
        v
    };
    let ax = axis(rng);
    Ok(match spec.dim {
        1 => ax,
        _ => {
            let ay = axis(rng);
            let mut out = Vec::with_capacity(spec.k * spec.k);
            for x in &ax {
                for y in &ay {
                    out.push(x * y);
                }
            }
            out
        }
    })
}

/// amplitude * e_mode, with `mode` a 1-based multi-index.
pub fn eigenmode_coeffs(space: &SpectralSpace, mode: [usize; 2], amplitude: f64) -> Result<Vec<f64>> {
    let idx = if space.dim() == 1 { [mode[0], 0] } else { mode };
    let s = space
        .basis()
        .storage_index(idx)
        .ok_or_else(|| SksError::Config(format!("eigenmode {mode:?} outside the basis")))?;
    let mut a = vec![0.0; space.n_modes()];
    a[s] = amplitude;
    Ok(a)
}

/// Gaussian bump amplitude * exp(-|x - c|^2 / (2 w^2)), clipped at zero,
/// projected from the coarse grid.
pub fn bump_coeffs(space: &SpectralSpace, center: &[f64], width: f64, amplitude: f64) -> Result<Vec<f64>> {
    let spec = space.spec();
    if !(width > 0.0) {
        return Err(SksError::Config(format!("bump width must be > 0, got {width}")));
    }
    if center.len() < spec.dim {
        return Err(SksError::Config("bump center needs one coordinate per axis".into()));
    }
    let pts = spec.axis_points();
    let f = |r2: f64| (amplitude * (-r2 / (2.0 * width * width)).exp()).max(0.0);
    let g: Vec<f64> = match spec.dim {
        1 => pts.iter().map(|x| f((x - center[0]).powi(2))).collect(),
        _ => {
            let mut g = Vec::with_capacity(pts.len() * pts.len());
            for x in &pts {
                for y in &pts {
                    g.push(f((x - center[0]).powi(2) + (y - center[1]).powi(2)));
                }
            }
            g
        }
    };
    Ok(space.project(&g))
}

/// Box midpoint, L/2 on every axis.
pub fn box_center(space: &SpectralSpace) -> Vec<f64> {
    vec![space.spec().length / 2.0; space.dim()]
}

/// Normalized first eigenfunction profile: e_1 / ||e_1||_{H^-1}.
pub fn first_mode_unit_hminus1(space: &SpectralSpace) -> Vec<f64> {
    let lam = space.basis().eigenvalue(0);
    let mut a = vec![0.0; space.n_modes()];
    a[0] = lam.sqrt();
    a
}

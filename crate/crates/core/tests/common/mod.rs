#![allow(dead_code)]

use std::f64::consts::PI;

use sks_core::{DomainSpec, SpectralSpace};

pub fn space_1d(n: usize, k: usize) -> SpectralSpace {
    SpectralSpace::new(DomainSpec::new(1, PI, n, k).unwrap()).unwrap()
}

pub fn space_2d(n: usize, k: usize) -> SpectralSpace {
    SpectralSpace::new(DomainSpec::new(2, PI, n, k).unwrap()).unwrap()
}

/// Composite Simpson rule on [a, b] with `n` (even) panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Coefficient <f, e_k> on (0, pi) by Simpson quadrature.
pub fn sine_coeff_pi(f: impl Fn(f64) -> f64, k: usize) -> f64 {
    let c = (2.0 / PI).sqrt();
    simpson(|x| f(x) * c * (k as f64 * x).sin(), 0.0, PI, 20000)
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Gauss-Legendre nodes and weights on [a, b] (Newton iteration on P_n).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut xs = vec![0.0; n];
    let mut ws = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        xs[i] = 0.5 * (a + b) - 0.5 * (b - a) * z;
        ws[i] = (b - a) / ((1.0 - z * z) * dp * dp);
    }
    (xs, ws)
}

//! Independent reference solutions used to validate the spectral solver.

use crate::domain::midpoints;

/// Second-order finite-volume solver for u_t = (|u|^{m-1} u)_xx on (0, L)
/// with u = 0 at both ends, on midpoint cells (antisymmetric ghost cells).
/// Implicit BDF2 in time with `steps` equal steps (backward Euler for the
/// first), each solved by Newton with a tridiagonal Jacobian. Returns the
/// cell values at time T.
pub fn porous_medium_fd(u0: &[f64], length: f64, m: f64, horizon: f64, steps: usize) -> Vec<f64> {
    let n = u0.len();
    let h = length / n as f64;
    let dt = horizon / steps as f64;
    let integral = m.fract() == 0.0 && m <= 64.0;
    let psi = |v: f64| if integral { v.abs().powi(m as i32 - 1) * v } else { v.abs().powf(m - 1.0) * v };
    let dpsi = |v: f64| if integral { m * v.abs().powi(m as i32 - 1) } else { m * v.abs().powf(m - 1.0) };
    let lap = |p: &[f64], i: usize| {
        let left = if i == 0 { -p[0] } else { p[i - 1] };
        let right = if i == n - 1 { -p[n - 1] } else { p[i + 1] };
        (left - 2.0 * p[i] + right) / (h * h)
    };
    let mut prev = u0.to_vec();
    let mut cur = u0.to_vec();
    for s in 0..steps {
        // a u - rhs - c L psi(u) = 0
        let (a, c, rhs): (f64, f64, Vec<f64>) = if s == 0 {
            (1.0, dt, cur.clone())
        } else {
            (3.0, 2.0 * dt, cur.iter().zip(&prev).map(|(x, y)| 4.0 * x - y).collect())
        };
        let mut u = cur.clone();
        let scale = rhs.iter().fold(1e-300_f64, |acc, v| acc.max(v.abs()));
        for _ in 0..60 {
            let p: Vec<f64> = u.iter().map(|&v| psi(v)).collect();
            let f: Vec<f64> = (0..n).map(|i| a * u[i] - rhs[i] - c * lap(&p, i)).collect();
            if f.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())) < 1e-13 * scale {
                break;
            }
            let d: Vec<f64> = u.iter().map(|&v| dpsi(v)).collect();
            let k = c / (h * h);
            let diag: Vec<f64> = (0..n).map(|i| a + k * d[i] * if i == 0 || i == n - 1 { 3.0 } else { 2.0 }).collect();
            let lower: Vec<f64> = (1..n).map(|i| -k * d[i - 1]).collect();
            let upper: Vec<f64> = (0..n - 1).map(|i| -k * d[i + 1]).collect();
            let du = thomas(&lower, &diag, &upper, &f);
            u.iter_mut().zip(&du).for_each(|(x, y)| *x -= y);
            if du.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())) < 1e-15 * scale {
                break;
            }
        }
        prev = std::mem::replace(&mut cur, u);
    }
    cur
}

/// Solves a tridiagonal system; `lower[i]` multiplies x[i] in row i + 1.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = if n > 1 { upper[0] / diag[0] } else { 0.0 };
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i - 1] * c[i - 1];
        if i < n - 1 {
            c[i] = upper[i] / den;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / den;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    d
}

/// Cell centres of the reference grid.
pub fn reference_points(length: f64, points: usize) -> Vec<f64> {
    midpoints(length, points)
}

/// Pointwise geometric Brownian motion
/// rho_0(x) exp(s e(x) beta - s^2 e(x)^2 t / 2), s = sigma mu_1.
pub fn gbm_exact(rho0: f64, s: f64, e: f64, beta: f64, t: f64) -> f64 {
    rho0 * (s * e * beta - 0.5 * s * s * e * e * t).exp()
}

//! Midpoint-grid sine and cosine transforms through one complex FFT of
//! length 2M.
//!
//! With theta_i = pi (i + 1/2) / M,
//! sum_j b_j exp(i j theta_i) = sum_j (b_j e^{i pi j / 2M}) e^{2 pi i j i / 2M},
//! so synthesis is an inverse DFT of phase-shifted coefficients and analysis
//! is the adjoint.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct MidpointFft {
    m: usize,
    amp: f64,
    fft: Arc<dyn Fft<f64>>,
    // e^{i pi j / 2M}, j = 0..2M
    phase: Vec<Complex<f64>>,
}

impl std::fmt::Debug for MidpointFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MidpointFft").field("m", &self.m).finish()
    }
}

impl MidpointFft {
    /// `amp` scales every basis function, e.g. sqrt(2/L).
    pub fn new(m: usize, amp: f64) -> Self {
        let fft = FftPlanner::new().plan_fft_inverse(2 * m);
        let phase =
            (0..2 * m).map(|j| Complex::from_polar(1.0, std::f64::consts::PI * j as f64 / (2 * m) as f64)).collect();
        MidpointFft { m, amp, fft, phase }
    }

    pub fn points(&self) -> usize {
        self.m
    }

    fn forward(&self, b: &[f64]) -> Vec<Complex<f64>> {
        debug_assert!(b.len() < 2 * self.m);
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * self.m];
        for (j, v) in b.iter().enumerate() {
            buf[j + 1] = self.phase[j + 1] * *v;
        }
        self.fft.process(&mut buf);
        buf
    }

    /// amp sum_{j>=1} b_{j-1} sin(j theta_i), i < M.
    pub fn synth_sin(&self, b: &[f64]) -> Vec<f64> {
        self.forward(b)[..self.m].iter().map(|z| self.amp * z.im).collect()
    }

    /// amp sum_{j>=1} b_{j-1} cos(j theta_i), i < M.
    pub fn synth_cos(&self, b: &[f64]) -> Vec<f64> {
        self.forward(b)[..self.m].iter().map(|z| self.amp * z.re).collect()
    }

    /// amp sum_i g_i sin(j theta_i) for j = 1..=modes.
    pub fn analyze_sin(&self, g: &[f64], modes: usize) -> Vec<f64> {
        debug_assert_eq!(g.len(), self.m);
        let mut buf = vec![Complex::new(0.0, 0.0); 2 * self.m];
        for (z, v) in buf.iter_mut().zip(g) {
            z.re = *v;
        }
        self.fft.process(&mut buf);
        (1..=modes).map(|j| self.amp * (self.phase[j] * buf[j]).im).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Kind {
    Sin,
    Cos,
}

impl MidpointFft {
    fn synth(&self, b: &[f64], kind: Kind) -> Vec<f64> {
        match kind {
            Kind::Sin => self.synth_sin(b),
            Kind::Cos => self.synth_cos(b),
        }
    }
}

fn transpose(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut t = vec![0.0; a.len()];
    for r in 0..rows {
        for c in 0..cols {
            t[c * rows + r] = a[r * cols + c];
        }
    }
    t
}

/// c is (k, k) row-major over (axis 0, axis 1); returns (M, M) grid values.
pub(crate) fn synth2(t: &MidpointFft, c: &[f64], k: usize, kinds: [Kind; 2]) -> Vec<f64> {
    let m = t.points();
    // axis 1 first: rows of c become rows of length M
    let mut rows = Vec::with_capacity(k * m);
    for r in 0..k {
        rows.extend(t.synth(&c[r * k..(r + 1) * k], kinds[1]));
    }
    let cols = transpose(&rows, k, m);
    let mut out = Vec::with_capacity(m * m);
    for i in 0..m {
        out.extend(t.synth(&cols[i * k..(i + 1) * k], kinds[0]));
    }
    transpose(&out, m, m)
}

/// g is (M, M); returns sine analyses (k, k).
pub(crate) fn analyze2(t: &MidpointFft, g: &[f64], k: usize) -> Vec<f64> {
    let m = t.points();
    let mut rows = Vec::with_capacity(m * k);
    for i in 0..m {
        rows.extend(t.analyze_sin(&g[i * m..(i + 1) * m], k));
    }
    let cols = transpose(&rows, m, k);
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        out.extend(t.analyze_sin(&cols[j * m..(j + 1) * m], k));
    }
    transpose(&out, k, k)
}

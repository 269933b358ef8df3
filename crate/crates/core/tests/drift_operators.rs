mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sks_core::drift::{
    check_monotonicity, check_monotonicity_weakened, chemo_drift, coercivity_probe, field_monotonicity_gap,
    frozen_drift, growth_ratio, hemicontinuity_sweep, porous_drift, porous_power,
};
use sks_core::sampling::{eigenmode_coeffs, random_field, random_nonnegative_coeffs};
use sks_core::{Field, KernelSpec, ModelParams, NoiseSpec, SpectralSpace};

fn e1(sp: &SpectralSpace) -> Field {
    Field::from_coeffs(eigenmode_coeffs(sp, [1, 1], 1.0).unwrap())
}

fn coeffs(f: &Field) -> Vec<f64> {
    f.coeffs().unwrap().to_vec()
}

/// Sine coefficients of c (3 sin x - sin 3x) / 4 with c = (2/pi)^{3/2}.
fn sin_cubed(k: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    // (2/pi)^{3/2} * sqrt(pi/2) = 2/pi
    v[0] = 3.0 / (2.0 * PI);
    v[2] = -1.0 / (2.0 * PI);
    v
}

#[test]
fn porous_power_negative_scaling_and_zero() {
    // rho = -2 e_1: odd power gives -8 times the sin^3 coefficients
    let sp = space_1d(64, 31);
    let got = coeffs(&porous_power(&sp, &e1(&sp).scaled(-2.0), 3.0).unwrap());
    let want: Vec<f64> = sin_cubed(31).iter().map(|v| -8.0 * v).collect();
    assert!(max_abs_diff(&got, &want) < 1e-12);
    let z = porous_power(&sp, &Field::from_coeffs(vec![0.0; 31]), 3.0).unwrap();
    assert!(coeffs(&z).iter().all(|v| *v == 0.0));
}

#[test]
fn porous_power_of_first_mode_is_sin_cubed() {
    let sp = space_1d(64, 31);
    let got = coeffs(&porous_power(&sp, &e1(&sp), 3.0).unwrap());
    let want = sin_cubed(31);
    assert!(max_abs_diff(&got, &want) < 1e-13);
    // quadrature cross-check of the oracle itself
    let c = (2.0 / PI).sqrt();
    assert!((sine_coeff_pi(|x| (c * x.sin()).powi(3), 1) - want[0]).abs() < 1e-12);
    assert!((sine_coeff_pi(|x| (c * x.sin()).powi(3), 3) - want[2]).abs() < 1e-12);
}

#[test]
fn porous_drift_examples() {
    let sp = space_1d(64, 31);
    let heat = coeffs(&porous_drift(&sp, &e1(&sp), 1.0).unwrap());
    assert!((heat[0] + 1.0).abs() < 1e-15);
    assert!(heat[1..].iter().all(|v| *v == 0.0));
    let got = coeffs(&porous_drift(&sp, &e1(&sp), 3.0).unwrap());
    let mut want = vec![0.0; 31];
    want[0] = -3.0 / (2.0 * PI);
    want[2] = 9.0 / (2.0 * PI);
    assert!(max_abs_diff(&got, &want) < 1e-12);
    let z = porous_drift(&sp, &Field::from_coeffs(vec![0.0; 31]), 3.0).unwrap();
    assert!(coeffs(&z).iter().all(|v| *v == 0.0));
}

/// -(1/pi) cos 2x in sine coefficients: int_0^pi sin(kx) cos(2x) = 2k / (k^2 - 4) for odd k.
fn chemo_oracle(k: usize) -> Vec<f64> {
    let c = (2.0 / PI).sqrt();
    (1..=k).map(|j| if j % 2 == 1 { -c / PI * 2.0 * j as f64 / ((j * j) as f64 - 4.0) } else { 0.0 }).collect()
}

#[test]
fn chemo_drift_first_mode_bessel() {
    let sp = space_1d(64, 31);
    let got = coeffs(&chemo_drift(&sp, &e1(&sp), 1.0, KernelSpec::bessel()).unwrap());
    let want = chemo_oracle(31);
    assert!(max_abs_diff(&got, &want) < 1e-12);
    for (k, w) in want.iter().enumerate().take(7) {
        let q = sine_coeff_pi(|x| -(2.0 * x).cos() / PI, k + 1);
        assert!((q - w).abs() < 1e-10);
    }
}

#[test]
fn chemo_drift_vanishes() {
    let sp = space_1d(64, 31);
    let a = coeffs(&chemo_drift(&sp, &e1(&sp), 0.0, KernelSpec::bessel()).unwrap());
    assert!(a.iter().all(|v| *v == 0.0));
    let b = coeffs(&chemo_drift(&sp, &Field::from_coeffs(vec![0.0; 31]), 1.0, KernelSpec::newtonian()).unwrap());
    assert!(b.iter().all(|v| *v == 0.0));
}

#[test]
fn frozen_drift_is_additive() {
    let sp = space_1d(64, 31);
    let p = ModelParams::new(3.0, 1.0, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let got = coeffs(&frozen_drift(&sp, &e1(&sp), &e1(&sp), &p).unwrap());
    let mut want = chemo_oracle(31);
    want[0] -= 3.0 / (2.0 * PI);
    want[2] += 9.0 / (2.0 * PI);
    assert!(max_abs_diff(&got, &want) < 1e-12);

    let p0 = ModelParams::new(3.0, 0.0, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let r = random_field(&sp, &mut rng, 8, 1.0).unwrap();
    let x = random_field(&sp, &mut rng, 8, 1.0).unwrap();
    assert_eq!(coeffs(&frozen_drift(&sp, &r, &x, &p0).unwrap()), coeffs(&porous_drift(&sp, &r, 3.0).unwrap()));
    let z = Field::from_coeffs(vec![0.0; 31]);
    assert!(coeffs(&frozen_drift(&sp, &z, &z, &p).unwrap()).iter().all(|v| *v == 0.0));
}

#[test]
fn chemo_drift_2d_matches_quadrature() {
    // separable input: xi = e_(1,1); the flux is evaluated by the independent grid path
    let sp = space_2d(32, 12);
    let xi = Field::from_coeffs(eigenmode_coeffs(&sp, [1, 1], 1.0).unwrap());
    let got = coeffs(&chemo_drift(&sp, &xi, 1.0, KernelSpec::bessel()).unwrap());
    // Phi * e_11 = e_11 / 3; div(e grad e) / 3 = (|grad e|^2 + e Lap e) / 3
    // with e = (2/pi) sin x sin y, evaluated by Gauss-Legendre
    let (nodes, w) = gauss_legendre(48, 0.0, PI);
    let c = 2.0 / PI;
    let b = sp.basis();
    let mut want = vec![0.0; b.len()];
    for (x, wx) in nodes.iter().zip(&w) {
        for (y, wy) in nodes.iter().zip(&w) {
            let e = c * x.sin() * y.sin();
            let ex = c * x.cos() * y.sin();
            let ey = c * x.sin() * y.cos();
            let f = -(ex * ex + ey * ey - 2.0 * e * e) / 3.0;
            for (s, o) in want.iter_mut().enumerate() {
                *o += f * b.eval(s, &[*x, *y]) * wx * wy;
            }
        }
    }
    assert!(max_abs_diff(&got, &want) < 1e-11, "{}", max_abs_diff(&got, &want));
}

#[test]
fn dissipation_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sp in [space_1d(128, 127), space_2d(32, 31)] {
        for m in [1.0, 3.0] {
            for _ in 0..50 {
                let r = random_field(&sp, &mut rng, 8, 1.0).unwrap();
                let lhs = 2.0 * sp.dual_pairing(&porous_drift(&sp, &r, m).unwrap(), &r).unwrap();
                let rhs = -2.0 * sp.norm_lp(&r, m + 1.0).unwrap().powf(m + 1.0);
                assert!(rel(lhs, rhs) < 1e-8, "m={m} {lhs} {rhs}");
            }
        }
    }
}

#[test]
fn field_monotonicity_on_nonnegative_fields() {
    let sp = space_1d(128, 127);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in [3.0, 4.0, 5.0] {
        for _ in 0..100 {
            let a = Field::from_coeffs(random_nonnegative_coeffs(&sp, &mut rng, 8).unwrap());
            let b = Field::from_coeffs(random_nonnegative_coeffs(&sp, &mut rng, 8).unwrap());
            assert!(field_monotonicity_gap(&sp, &a, &b, m).unwrap() >= -1e-10);
        }
    }
}

#[test]
fn coercivity_examples() {
    let sp = space_1d(64, 63);
    let heat = ModelParams::new(1.0, 0.0, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let c = coercivity_probe(&sp, &e1(&sp), &e1(&sp), &heat).unwrap();
    assert!((c.lhs + 2.0).abs() < 1e-12);
    assert!((c.dissipation - 2.0).abs() < 1e-12);
    assert!((c.lhs + c.dissipation).abs() < 1e-12);
    let z = Field::from_coeffs(vec![0.0; 63]);
    let p = ModelParams::new(3.0, 1.0, KernelSpec::bessel(), NoiseSpec::new(0.1, 1.5, 63, 0).unwrap()).unwrap();
    let c0 = coercivity_probe(&sp, &z, &z, &p).unwrap();
    assert_eq!((c0.lhs, c0.dissipation, c0.forcing), (0.0, 0.0, 0.0));
}

#[test]
fn coercivity_constant_is_finite_and_stable() {
    let p = ModelParams::new(3.0, 1.0, KernelSpec::bessel(), NoiseSpec::new(0.1, 1.5, 32, 0).unwrap()).unwrap();
    let measure = |n: usize| {
        let sp = space_1d(n, n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut c = 0.0_f64;
        for _ in 0..200 {
            let r = random_field(&sp, &mut rng, 8, 1.0).unwrap();
            let x = random_field(&sp, &mut rng, 8, 1.0).unwrap();
            let pr = coercivity_probe(&sp, &r, &x, &p).unwrap();
            c = c.max((pr.lhs + pr.dissipation) / pr.forcing);
        }
        c
    };
    let (a, b) = (measure(64), measure(128));
    assert!(a.is_finite() && a > 0.0);
    assert!(rel(b, a) < 0.1, "{a} {b}");
}

#[test]
fn growth_ratio_is_stable_under_refinement() {
    let p = ModelParams::new(3.0, 0.5, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let measure = |n: usize| {
        let sp = space_1d(n, n - 1);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let tests: Vec<Field> = (0..64).map(|_| random_field(&sp, &mut rng, 16, 0.0).unwrap()).collect();
        let mut c = 0.0_f64;
        for _ in 0..50 {
            let r = random_field(&sp, &mut rng, 8, 1.0).unwrap();
            let x = random_field(&sp, &mut rng, 8, 1.0).unwrap();
            c = c.max(growth_ratio(&sp, &r, &x, &p, &tests).unwrap());
        }
        c
    };
    let (a, b) = (measure(64), measure(128));
    assert!(a.is_finite() && a > 0.0);
    assert!(rel(b, a) < 0.1, "{a} {b}");
}

#[test]
fn hemicontinuity_sweep_is_cauchy() {
    let sp = space_1d(64, 63);
    let p = ModelParams::new(3.0, 0.5, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f: Vec<Field> = (0..4).map(|_| random_field(&sp, &mut rng, 8, 1.0).unwrap()).collect();
    let lams = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6];
    let d = hemicontinuity_sweep(&sp, &f[0], &f[1], &f[2], &f[3], &p, &lams).unwrap();
    for w in d.windows(2) {
        assert!(w[1] < w[0]);
    }
    // first-order in lambda near 0
    assert!(d[5] < 2e-4 * d[1]);
}

#[test]
fn weakened_monotonicity_holds_on_mixed_signs() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let a: f64 = rng.random_range(-5.0..5.0);
        let b: f64 = rng.random_range(-5.0..5.0);
        for m in [1.0, 2.0, 3.0, 4.0, 5.0] {
            assert!(check_monotonicity_weakened(a, b, m), "{a} {b} {m}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn monotonicity_on_nonnegative_cone(a in 0.0f64..5.0, b in 0.0f64..5.0, m in prop::sample::select(vec![3.0, 4.0, 5.0])) {
        prop_assert!(check_monotonicity(a, b, m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn porous_power_is_odd(seed in any::<u64>()) {
        let sp = space_1d(32, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = random_field(&sp, &mut rng, 6, 1.0).unwrap();
        let p = coeffs(&porous_power(&sp, &r, 3.0).unwrap());
        let q = coeffs(&porous_power(&sp, &r.scaled(-1.0), 3.0).unwrap());
        prop_assert!(p.iter().zip(&q).all(|(x, y)| (x + y).abs() < 1e-12));
    }

    #[test]
    fn chemo_drift_scales_quadratically(seed in any::<u64>(), c in 0.1f64..3.0) {
        let sp = space_1d(32, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_field(&sp, &mut rng, 6, 1.0).unwrap();
        let a = coeffs(&chemo_drift(&sp, &x, 0.7, KernelSpec::bessel()).unwrap());
        let b = coeffs(&chemo_drift(&sp, &x.scaled(c), 0.7, KernelSpec::bessel()).unwrap());
        let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.abs())) * c * c;
        prop_assert!(a.iter().zip(&b).all(|(u, v)| (u * c * c - v).abs() <= 1e-12 * scale.max(1.0)));
    }
}

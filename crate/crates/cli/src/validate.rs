//! The property suite behind `sks validate`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sks_core::drift::check_monotonicity;
use sks_core::fixed_point::member_streams;
use sks_core::integrator::integrate_path;
use sks_core::kernel::kernel_bound_ratio;
use sks_core::reference::{gbm_exact, porous_medium_fd, reference_points};
use sks_core::sampling::{box_center, bump_coeffs, eigenmode_coeffs, random_field};
use sks_core::stats::linear_fit;
use sks_core::{DomainSpec, Field, IntegratorConfig, KernelSpec, ModelParams, NoiseSpec, PathMode, SpectralSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

pub fn csv(checks: &[Check]) -> String {
    let mut s = String::from("check,value,threshold,result\n");
    for c in checks {
        let _ = writeln!(s, "{},{},{},{}", c.name, c.value, c.threshold, if c.pass { "PASS" } else { "FAIL" });
    }
    s
}

fn space(dim: usize, n: usize, k: usize) -> SpectralSpace {
    SpectralSpace::new(DomainSpec::new(dim, PI, n, k).expect("valid domain")).expect("valid space")
}

/// Violations of the pointwise monotonicity inequality over `pairs` random
/// points of [0, 5]^2 for each m in {3, 4, 5}.
pub fn monotonicity_violations(pairs: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for m in [3.0, 4.0, 5.0] {
        for _ in 0..pairs {
            let a = rng.random_range(0.0..=5.0);
            let b = rng.random_range(0.0..=5.0);
            if !check_monotonicity(a, b, m) {
                bad += 1;
            }
        }
    }
    bad
}

/// Sup of the kernel bound ratio over random 2D fields at N = 64 and 128.
pub fn kernel_bound_sups(kernel: KernelSpec, fields: usize, seed: u64) -> [f64; 2] {
    let mut out = [0.0f64; 2];
    for (o, n) in out.iter_mut().zip([64, 128]) {
        let sp = space(2, n, 31);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..fields {
            let f = random_field(&sp, &mut rng, 16, 1.0).expect("band within K");
            *o = (*o).max(kernel_bound_ratio(&sp, &f, kernel, 3.0).expect("nonzero field"));
        }
    }
    out
}

/// Root-mean-square L^2 error at T = 0.5 of pure multiplicative noise on the
/// first mode (sigma mu_1 = 0.5) against the pathwise closed form, for
/// dt = 4e-4 / 2^i. All levels share the Brownian path of the finest one.
pub fn gbm_strong_errors(levels: usize, members: usize, seed: u64) -> Vec<(f64, f64)> {
    let sp = space(1, 64, 63);
    let params = ModelParams::new(1.0, 0.0, KernelSpec::bessel(), NoiseSpec::new(0.5, 1.5, 1, 0).unwrap())
        .unwrap()
        .without_porous();
    let rho0 = Field::from_coeffs(eigenmode_coeffs(&sp, [1, 1], 1.0).unwrap());
    let c = (2.0 / PI).sqrt();
    let pts = sp.spec().axis_points();
    let streams = member_streams(seed, members);
    (0..levels)
        .map(|i| {
            let dt = 4e-4 / f64::powi(2.0, i as i32);
            let cfg = IntegratorConfig::new(dt, 0.5).unwrap().with_noise_refinement((levels - 1 - i) as u32);
            let sq: Vec<f64> = streams
                .par_iter()
                .map(|&s| {
                    let p = integrate_path(&sp, &rho0, &params, &cfg, PathMode::SelfConsistent, s).unwrap();
                    let beta: f64 = p.increments().iter().map(|inc| inc[0].values[0]).sum();
                    let got = sp.synthesize(p.trajectory.last().unwrap());
                    pts.iter()
                        .zip(&got)
                        .map(|(x, g)| {
                            let e = c * x.sin();
                            (gbm_exact(e, 0.5, e, beta, 0.5) - g).powi(2)
                        })
                        .sum::<f64>()
                        * sp.h()
                })
                .collect();
            (dt, (sq.iter().sum::<f64>() / members as f64).sqrt())
        })
        .collect()
}

/// L^2 distance at T = 0.5 between the spectral porous-medium solution
/// (m = 3, clipped bump) and the finite-difference solver on 8N cells.
pub fn porous_oracle_error(n: usize) -> f64 {
    let sp = space(1, n, n - 1);
    let params = ModelParams::new(3.0, 0.0, KernelSpec::bessel(), NoiseSpec::silent()).unwrap();
    let a0 = bump_coeffs(&sp, &box_center(&sp), 0.25, 1.0).unwrap();
    let cfg = IntegratorConfig::new(1e-4, 0.5).unwrap();
    let p = integrate_path(
        &sp,
        &Field::from_coeffs(a0.clone()),
        &params,
        &cfg,
        PathMode::SelfConsistent,
        sks_core::NoiseStream::new(0, 0),
    )
    .unwrap();
    let fine = reference_points(PI, 8 * n);
    let eval = |a: &[f64]| -> Vec<f64> {
        fine.iter().map(|x| (0..a.len()).map(|j| a[j] * sp.basis().eval(j, &[*x])).sum()).collect()
    };
    let u = porous_medium_fd(&eval(&a0), PI, 3.0, 0.5, 2500);
    let v = eval(p.trajectory.last().unwrap());
    let h = PI / (8 * n) as f64;
    (u.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * h).sqrt()
}

pub fn run_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let bad = monotonicity_violations(10_000, 1);
    out.push(Check { name: "monotonicity_pointwise".into(), value: bad as f64, threshold: "0".into(), pass: bad == 0 });
    for (name, kernel) in [("bessel", KernelSpec::bessel()), ("newtonian", KernelSpec::newtonian())] {
        let [a, b] = kernel_bound_sups(kernel, 200, 77);
        let drift = (b - a).abs() / a;
        out.push(Check {
            name: format!("kernel_bound_{name}_refinement"),
            value: drift,
            threshold: "<0.1".into(),
            pass: a.is_finite() && drift < 0.1,
        });
    }
    let errs = gbm_strong_errors(4, 32, 11);
    let lx: Vec<f64> = errs.iter().map(|e| e.0.ln()).collect();
    let ly: Vec<f64> = errs.iter().map(|e| e.1.ln()).collect();
    let slope = linear_fit(&lx, &ly).map(|f| f.slope).unwrap_or(f64::NAN);
    out.push(Check {
        name: "gbm_strong_order".into(),
        value: slope,
        threshold: "0.5+-0.15".into(),
        pass: (slope - 0.5).abs() <= 0.15,
    });
    let err = porous_oracle_error(512);
    out.push(Check { name: "porous_medium_oracle".into(), value: err, threshold: "<=1e-3".into(), pass: err <= 1e-3 });
    out
}

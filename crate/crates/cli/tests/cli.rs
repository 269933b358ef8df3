use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;

use sks::config::{parse_config, InitSpec, Mode};
use sks::{run, CliError};
use sks_core::dump::read_dump;
use sks_core::KernelSpec;

fn cfg(mode: Mode, text: &str, out: &Path) -> sks::RunConfig {
    let mut c = parse_config(mode, text, Path::new(".")).unwrap();
    c.out_dir = out.to_path_buf();
    c
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

const HEAT: &str = "
model.m = 1
model.chi = 0
noise.sigma = 0
noise.K_W = 1
init.amplitude = 1
domain.N = 64
integrator.dt = 1e-3
integrator.T = 0.1
ensemble.P = 3
";

#[test]
fn minimal_file_gives_documented_defaults() {
    let c = parse_config(Mode::Simulate, "# nothing set\n", Path::new(".")).unwrap();
    assert_eq!((c.domain.dim, c.domain.n, c.domain.k), (1, 128, 127));
    assert_eq!(c.domain.length, PI);
    assert_eq!((c.params.m, c.params.chi), (3.0, 0.5));
    assert_eq!(c.params.kernel, KernelSpec::bessel());
    assert_eq!((c.params.noise.sigma, c.params.noise.decay, c.params.noise.modes), (0.1, 1.5, 64));
    assert_eq!((c.integrator.dt, c.integrator.horizon), (1e-4, 0.25));
    assert_eq!(c.members, 16);
    assert!(c.params.porous && c.integrator.taming);
    assert_eq!(c.init, InitSpec::Eigenmode { mode: [1, 1], amplitude: 0.5 });
    assert!(!c.m_warning() && c.warnings.is_empty());
    assert!(c.integrator.save_steps().len() >= 16);
}

#[test]
fn noise_modes_default_is_capped_by_the_basis() {
    let c = parse_config(Mode::Simulate, "domain.N = 32\n", Path::new(".")).unwrap();
    assert_eq!((c.domain.k, c.params.noise.modes), (31, 31));
}

#[test]
fn low_exponent_sets_the_warning_flag() {
    let c = parse_config(Mode::Simulate, "model.m = 2.5\n", Path::new(".")).unwrap();
    assert!(c.m_warning());
    assert_eq!(c.warnings.len(), 1);
}

#[test]
fn divergent_noise_series_is_rejected() {
    let e = parse_config(Mode::Simulate, "noise.a = 1.0\ndomain.d = 1\n", Path::new(".")).unwrap_err();
    assert!(matches!(&e, CliError::Config(m) if m.contains("noise")), "{e}");
    assert_eq!(e.exit_code(), 2);
}

#[test]
fn bad_files_are_rejected_with_the_key() {
    for (text, needle) in [
        ("domain.n = 64\n", "unknown key"),
        ("model.m = 3\nmodel.m = 4\n", "duplicate"),
        ("model.chi = lots\n", "model.chi"),
        ("just a line\n", "key = value"),
        ("domain.N = 48\n", "domain"),
        ("integrator.dt = 0.3\n", "integrator"),
        ("ensemble.P = 0\n", "ensemble.P"),
        ("init.kind = file\n", "init.file"),
        ("model.kernel = yukawa\n", "model.kernel"),
    ] {
        match parse_config(Mode::Simulate, text, Path::new(".")) {
            Err(CliError::Config(m)) => assert!(m.contains(needle), "{text:?}: {m}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn heat_simulation_keeps_initial_norm() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(Mode::Simulate, HEAT, dir.path());
    let s = run(&c).unwrap();
    assert_eq!(s.blown, 0);
    let rows = csv_rows(&dir.path().join("energy.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert_eq!(r.len(), 11);
        let sup: f64 = r[1].parse().unwrap();
        assert!((sup - 1.0).abs() < 1e-6, "{sup}");
        assert_eq!((r[7].as_str(), r[8].as_str()), ("false", ""));
    }
    let report = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(report.starts_with("quantity,mean,std_error,count\n"));
    assert!(report.contains("\nblown,0,,3\n"));
}

#[test]
fn dumps_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = cfg(Mode::Simulate, HEAT, dir.path());
    run(&c).unwrap();
    let mut f = fs::File::open(dir.path().join("paths/path_0002.sks")).unwrap();
    let (h, frames) = read_dump(&mut f).unwrap();
    assert_eq!((h.dim, h.n, h.k, h.noise_modes), (1, 64, 63, 1));
    assert_eq!((h.m, h.chi, h.sigma, h.dt, h.horizon), (1.0, 0.0, 0.0, 1e-3, 0.1));
    assert_eq!(frames.len(), c.integrator.save_steps().len());
    assert_eq!(frames[0][0], 1.0);
    assert!((frames.last().unwrap()[0] - (-0.1f64).exp()).abs() < 1e-3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let text = "domain.N = 32\nintegrator.dt = 1e-3\nintegrator.T = 0.05\nensemble.P = 4\nensemble.seed = 9\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run(&cfg(Mode::Simulate, text, a.path())).unwrap();
    run(&cfg(Mode::Simulate, text, b.path())).unwrap();
    for f in ["energy.csv", "report.csv", "paths/path_0003.sks"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let c = tempfile::tempdir().unwrap();
    let mut other = cfg(Mode::Simulate, text, c.path());
    other.seed = 10;
    run(&other).unwrap();
    assert_ne!(fs::read(a.path().join("energy.csv")).unwrap(), fs::read(c.path().join("energy.csv")).unwrap());
}

#[test]
fn picard_and_probe_modes_write_their_tables() {
    let text = "domain.N = 32\nintegrator.dt = 1e-3\nintegrator.T = 0.05\nensemble.P = 4\npicard.max_iter = 3\npicard.tol = 0\n";
    let dir = tempfile::tempdir().unwrap();
    run(&cfg(Mode::Picard, text, dir.path())).unwrap();
    let rows = csv_rows(&dir.path().join("picard.csv"));
    assert_eq!(rows.len(), 3);
    let d: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(d[0] > d[1] && d[1] > d[2] && d[2] >= 0.0);

    run(&cfg(Mode::ProbeHolder, text, dir.path())).unwrap();
    let rows = csv_rows(&dir.path().join("probe.csv"));
    assert_eq!(rows.len(), 6);
    let delta: f64 = rows[0][3].parse().unwrap();
    assert!(delta > 0.0);

    run(&cfg(Mode::ProbeEquicontinuity, text, dir.path())).unwrap();
    let rows = csv_rows(&dir.path().join("probe.csv"));
    assert_eq!(rows.len(), 1);
    let c: f64 = rows[0][0].parse().unwrap();
    assert!(c.is_finite() && c > 0.0);
}

#[test]
fn initial_data_from_file_and_bump() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs: Vec<String> = (1..=31).map(|k| if k == 2 { "0.25".into() } else { "0".into() }).collect();
    fs::write(dir.path().join("rho0.txt"), format!("# second mode\n{}\n", coeffs.join(" "))).unwrap();
    let c =
        parse_config(Mode::Simulate, "domain.N = 32\ninit.kind = file\ninit.file = rho0.txt\n", dir.path()).unwrap();
    let space = c.space().unwrap();
    let f = sks::run::initial_field(&c, &space).unwrap();
    assert_eq!(f.coeffs().unwrap()[1], 0.25);

    let c = parse_config(Mode::Simulate, "domain.N = 64\ninit.kind = bump\ninit.width = 0.3\n", dir.path()).unwrap();
    let space = c.space().unwrap();
    let f = sks::run::initial_field(&c, &space).unwrap();
    let g = space.synthesize(f.coeffs().unwrap());
    let peak = g.iter().cloned().fold(f64::MIN, f64::max);
    assert!((peak - 0.5).abs() < 0.01, "{peak}");

    let c =
        parse_config(Mode::Simulate, "domain.N = 16\ninit.kind = file\ninit.file = rho0.txt\n", dir.path()).unwrap();
    assert!(matches!(sks::run::initial_field(&c, &c.space().unwrap()), Err(CliError::Config(_))));
}

fn sks() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sks"))
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.cfg");
    fs::write(&good, HEAT).unwrap();
    let st = sks().args(["simulate", "--config"]).arg(&good).arg("--out").arg(dir.path().join("o")).status().unwrap();
    assert_eq!(st.code(), Some(0));

    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, "noise.a = 1.0\n").unwrap();
    let st = sks().args(["simulate", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = sks().args(["simulate", "--config"]).arg(dir.path().join("missing.cfg")).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = sks().args(["explode", "--config"]).arg(&good).status().unwrap();
    assert_eq!(st.code(), Some(2));
    let st = sks().args(["simulate", "--config"]).arg(&good).env("SKS_THREADS", "zero").status().unwrap();
    assert_eq!(st.code(), Some(2));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let st = sks().args(["simulate", "--config"]).arg(&good).arg("--out").arg(blocker.join("sub")).status().unwrap();
    assert_eq!(st.code(), Some(4));

    let violent = dir.path().join("violent.cfg");
    fs::write(
        &violent,
        "model.m = 1\nmodel.chi = 0\nmodel.porous = false\nnoise.sigma = 200\nnoise.K_W = 1\n\
         domain.N = 32\nintegrator.dt = 1e-2\nintegrator.T = 1\nensemble.P = 3\n",
    )
    .unwrap();
    let out = dir.path().join("v");
    let st = sks().args(["simulate", "--config"]).arg(&violent).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(3));
    let rows = csv_rows(&out.join("energy.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[7] == "true" && !r[8].is_empty()));
}

#[test]
fn seed_flag_overrides_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.cfg");
    fs::write(&f, "domain.N = 32\nintegrator.dt = 1e-3\nintegrator.T = 0.02\nensemble.P = 2\nensemble.seed = 5\n")
        .unwrap();
    let go = |seed: Option<&str>, out: &str| {
        let mut c = sks();
        c.args(["simulate", "--config"]).arg(&f).arg("--out").arg(dir.path().join(out));
        if let Some(s) = seed {
            c.args(["--seed", s]);
        }
        assert!(c.status().unwrap().success());
        fs::read(dir.path().join(out).join("energy.csv")).unwrap()
    };
    let base = go(None, "a");
    assert_eq!(go(Some("5"), "b"), base);
    assert_ne!(go(Some("6"), "c"), base);
}

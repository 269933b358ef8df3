//! Mode dispatch and the files each mode writes.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use sks_core::diagnostics::{blowup_and_positivity, energy_report, BlowupSummary, EnergyReport};
use sks_core::dump::{write_dump, DumpHeader};
use sks_core::fixed_point::{
    equicontinuity_probe, holder_probe, member_streams, picard_iterate, self_consistent_ensemble, PicardSettings,
};
use sks_core::sampling::{box_center, bump_coeffs, eigenmode_coeffs};
use sks_core::stats::mean_se;
use sks_core::{Field, PathSample, SpectralSpace, Trajectory};

use crate::config::{InitSpec, Mode, RunConfig};
use crate::error::CliError;
use crate::validate;

/// What a finished run left behind.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub files: Vec<String>,
    pub blown: usize,
}

pub fn initial_field(cfg: &RunConfig, space: &SpectralSpace) -> Result<Field, CliError> {
    let a = match &cfg.init {
        InitSpec::Eigenmode { mode, amplitude } => eigenmode_coeffs(space, *mode, *amplitude)?,
        InitSpec::Bump { center, width, amplitude } => {
            let c = center.clone().unwrap_or_else(|| box_center(space));
            bump_coeffs(space, &c, *width, *amplitude)?
        }
        InitSpec::File(p) => {
            let text =
                fs::read_to_string(p).map_err(|e| CliError::Config(format!("init.file {}: {e}", p.display())))?;
            let a = text
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
                .map(|s| s.parse::<f64>().map_err(|_| CliError::Config(format!("init.file: cannot parse {s:?}"))))
                .collect::<Result<Vec<f64>, _>>()?;
            if a.len() != space.n_modes() {
                return Err(CliError::Config(format!(
                    "init.file holds {} coefficients, the basis has {}",
                    a.len(),
                    space.n_modes()
                )));
            }
            a
        }
    };
    Ok(Field::from_coeffs(a))
}

pub fn run(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    fs::create_dir_all(&cfg.out_dir)?;
    match cfg.mode {
        Mode::Simulate => simulate(cfg),
        Mode::Picard => picard(cfg),
        Mode::ProbeHolder => probe_holder(cfg),
        Mode::ProbeEquicontinuity => probe_equicontinuity(cfg),
        Mode::Validate => {
            let checks = validate::run_checks();
            write_file(&cfg.out_dir, "validate.csv", &validate::csv(&checks))?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(CliError::Validation(failed));
            }
            Ok(RunSummary { files: vec!["validate.csv".into()], blown: 0 })
        }
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    let mut f = BufWriter::new(File::create(dir.join(name))?);
    f.write_all(body.as_bytes())?;
    f.flush()?;
    Ok(())
}

fn header(cfg: &RunConfig) -> DumpHeader {
    let p = &cfg.params;
    DumpHeader {
        dim: cfg.domain.dim as u64,
        n: cfg.domain.n as u64,
        k: cfg.domain.k as u64,
        m: p.m,
        chi: p.chi,
        sigma: p.noise.sigma,
        decay: p.noise.decay,
        noise_modes: p.noise.modes as u64,
        dt: cfg.integrator.dt,
        horizon: cfg.integrator.horizon,
        seed: cfg.seed,
    }
}

fn write_dumps(cfg: &RunConfig, paths: &[(usize, &Trajectory)], files: &mut Vec<String>) -> Result<(), CliError> {
    if !cfg.write_dumps {
        return Ok(());
    }
    let dir = cfg.out_dir.join("paths");
    fs::create_dir_all(&dir)?;
    let h = header(cfg);
    for (id, t) in paths {
        let name = format!("path_{id:04}.sks");
        let mut f = BufWriter::new(File::create(dir.join(&name))?);
        write_dump(&mut f, &h, &t.frames)?;
        f.flush()?;
        files.push(format!("paths/{name}"));
    }
    Ok(())
}

struct Row {
    id: usize,
    energy: EnergyReport,
    summary: BlowupSummary,
}

fn energy_rows(cfg: &RunConfig, space: &SpectralSpace, paths: &[(usize, &PathSample)]) -> Result<Vec<Row>, CliError> {
    paths
        .iter()
        .map(|(id, p)| {
            Ok(Row {
                id: *id,
                energy: energy_report(space, &p.trajectory, cfg.params.m)?,
                summary: blowup_and_positivity(space, p)?,
            })
        })
        .collect()
}

fn energy_csv(rows: &[Row]) -> String {
    let mut s = String::from(
        "path_id,sup_h1,int_lm1,sup_lm1,int_gradm,r1_composite,r2_composite,blown,t_blow,min_value,mass_drift\n",
    );
    for r in rows {
        let e = &r.energy;
        let t_blow = r.summary.t_blow.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.id,
            e.sup_h1,
            e.int_lm1,
            e.sup_lm1,
            e.int_gradm,
            e.r1_composite,
            e.r2_composite,
            r.summary.blown,
            t_blow,
            e.min_value,
            r.summary.mass_drift
        );
    }
    s
}

/// Means and standard errors over members that did not blow up.
fn report_csv(rows: &[Row], members: usize) -> String {
    let ok: Vec<&Row> = rows.iter().filter(|r| !r.summary.blown).collect();
    type Col = (&'static str, fn(&Row) -> f64);
    let cols: [Col; 9] = [
        ("sup_h1", |r| r.energy.sup_h1),
        ("int_lm1", |r| r.energy.int_lm1),
        ("sup_lm1", |r| r.energy.sup_lm1),
        ("int_gradm", |r| r.energy.int_gradm),
        ("r1_composite", |r| r.energy.r1_composite),
        ("r2_composite", |r| r.energy.r2_composite),
        ("min_value", |r| r.energy.min_value),
        ("mass_drift", |r| r.summary.mass_drift),
        ("final_mass", |r| r.energy.mass.last().copied().unwrap_or(0.0)),
    ];
    let mut s = String::from("quantity,mean,std_error,count\n");
    for (name, f) in cols {
        let v: Vec<f64> = ok.iter().map(|r| f(r)).collect();
        if v.is_empty() {
            let _ = writeln!(s, "{name},,,0");
            continue;
        }
        let (mean, se) = mean_se(&v);
        let se = se.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{name},{mean},{se},{}", v.len());
    }
    let _ = writeln!(s, "blown,{},,{members}", members - ok.len());
    s
}

fn simulate(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let space = cfg.space()?;
    let rho0 = initial_field(cfg, &space)?;
    let streams = member_streams(cfg.seed, cfg.members);
    let paths = self_consistent_ensemble(&space, &rho0, &cfg.params, &cfg.integrator, &streams)?;
    let mut files = Vec::new();
    let tr: Vec<(usize, &Trajectory)> = paths.iter().map(|p| &p.trajectory).enumerate().collect();
    write_dumps(cfg, &tr, &mut files)?;
    let indexed: Vec<(usize, &PathSample)> = paths.iter().enumerate().collect();
    let rows = energy_rows(cfg, &space, &indexed)?;
    write_file(&cfg.out_dir, "energy.csv", &energy_csv(&rows))?;
    write_file(&cfg.out_dir, "report.csv", &report_csv(&rows, cfg.members))?;
    files.push("energy.csv".into());
    files.push("report.csv".into());
    let blown = paths.iter().filter(|p| p.blown()).count();
    if blown == cfg.members {
        return Err(CliError::BlowUp(blown));
    }
    Ok(RunSummary { files, blown })
}

fn picard(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let space = cfg.space()?;
    let rho0 = initial_field(cfg, &space)?;
    let settings = PicardSettings::new(cfg.members, cfg.picard.max_iter, cfg.picard.tol, cfg.seed)?;
    let out = picard_iterate(&space, &rho0, &cfg.params, &cfg.integrator, &settings)?;
    let r = &out.report;
    let mut s = String::from("j,d_j,std_error\n");
    for (j, (d, se)) in r.distances.iter().zip(&r.std_errors).enumerate() {
        let se = se.map(|x| x.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{d},{se}", j + 1);
    }
    write_file(&cfg.out_dir, "picard.csv", &s)?;

    let mut files = Vec::new();
    let kept: Vec<(usize, &PathSample)> =
        out.paths.iter().enumerate().filter_map(|(i, p)| p.as_ref().map(|p| (i, p))).collect();
    let tr: Vec<(usize, &Trajectory)> = kept.iter().map(|(i, p)| (*i, &p.trajectory)).collect();
    write_dumps(cfg, &tr, &mut files)?;
    let rows = energy_rows(cfg, &space, &kept)?;
    write_file(&cfg.out_dir, "energy.csv", &energy_csv(&rows))?;
    let mut report = report_csv(&rows, cfg.members);
    let _ = writeln!(report, "picard_ratio,{},,{}", r.ratio, r.iterations());
    let _ = writeln!(report, "picard_converged,{},,{}", u8::from(r.converged), r.iterations());
    write_file(&cfg.out_dir, "report.csv", &report)?;
    files.extend(["picard.csv".into(), "energy.csv".into(), "report.csv".into()]);
    Ok(RunSummary { files, blown: r.excluded })
}

fn probe_holder(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let space = cfg.space()?;
    let rho0 = initial_field(cfg, &space)?;
    let streams = member_streams(cfg.seed, cfg.members);
    let h = holder_probe(&space, &rho0, &cfg.params, &cfg.integrator, &streams, &cfg.holder_eps, None)?;
    let mut s = String::from("i,x_i,y_i,delta,r_squared\n");
    for (i, (x, y)) in h.x.iter().zip(&h.y).enumerate() {
        let _ = writeln!(s, "{i},{x},{y},{},{}", h.delta, h.r_squared);
    }
    write_file(&cfg.out_dir, "probe.csv", &s)?;
    Ok(RunSummary { files: vec!["probe.csv".into()], blown: h.excluded })
}

/// Applies T to the constant-in-time input rho_0 on every member.
fn probe_equicontinuity(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let space = cfg.space()?;
    let rho0 = initial_field(cfg, &space)?;
    let streams = member_streams(cfg.seed, cfg.members);
    let a0 = space.coeffs_of(&rho0)?.into_owned();
    let xi = vec![Trajectory::constant(&a0, cfg.integrator.save_steps(), cfg.integrator.dt); cfg.members];
    let e = equicontinuity_probe(&space, &xi, &rho0, &cfg.params, &cfg.integrator, &streams)?;
    let s = format!("c_hat,t1,t2\n{},{},{}\n", e.c_hat, e.worst_pair.0, e.worst_pair.1);
    write_file(&cfg.out_dir, "probe.csv", &s)?;
    Ok(RunSummary { files: vec!["probe.csv".into()], blown: 0 })
}

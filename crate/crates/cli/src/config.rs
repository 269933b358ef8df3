//! Flat `key = value` run configuration with dotted sections.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use sks_core::{DomainSpec, IntegratorConfig, KernelSpec, ModelParams, NoiseSpec, SksError, SpectralSpace};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Picard,
    ProbeHolder,
    ProbeEquicontinuity,
    Validate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::Picard => "picard",
            Mode::ProbeHolder => "probe-holder",
            Mode::ProbeEquicontinuity => "probe-equicontinuity",
            Mode::Validate => "validate",
        }
    }
}

impl FromStr for Mode {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "simulate" => Mode::Simulate,
            "picard" => Mode::Picard,
            "probe-holder" => Mode::ProbeHolder,
            "probe-equicontinuity" => Mode::ProbeEquicontinuity,
            "validate" => Mode::Validate,
            _ => return Err(CliError::Config(format!("unknown mode {s:?}"))),
        })
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Initial density.
#[derive(Debug, Clone, PartialEq)]
pub enum InitSpec {
    /// amplitude * e_k; `mode[1]` is ignored in 1D.
    Eigenmode { mode: [usize; 2], amplitude: f64 },
    /// Gaussian bump clipped at zero. Center defaults to the box midpoint.
    Bump { center: Option<Vec<f64>>, width: f64, amplitude: f64 },
    /// Whitespace separated sine coefficients in storage order.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardConfig {
    pub max_iter: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub domain: DomainSpec,
    pub params: ModelParams,
    pub integrator: IntegratorConfig,
    pub init: InitSpec,
    pub members: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub write_dumps: bool,
    pub picard: PicardConfig,
    pub holder_eps: Vec<f64>,
    /// Non-fatal findings, e.g. m below the theorem regime.
    pub warnings: Vec<String>,
}

impl RunConfig {
    /// True when m < 3.
    pub fn m_warning(&self) -> bool {
        self.params.below_theorem_regime()
    }

    pub fn space(&self) -> Result<SpectralSpace, CliError> {
        Ok(SpectralSpace::new(self.domain)?)
    }
}

const KEYS: &[&str] = &[
    "domain.d",
    "domain.L",
    "domain.N",
    "domain.K",
    "model.m",
    "model.chi",
    "model.kernel",
    "model.kernel_mode",
    "model.porous",
    "noise.sigma",
    "noise.a",
    "noise.K_W",
    "integrator.dt",
    "integrator.T",
    "integrator.save_every",
    "integrator.taming",
    "integrator.cfl",
    "integrator.noise_refinement",
    "ensemble.P",
    "ensemble.seed",
    "init.kind",
    "init.mode",
    "init.amplitude",
    "init.center",
    "init.width",
    "init.file",
    "picard.max_iter",
    "picard.tol",
    "probe.eps",
    "output.dir",
    "output.dumps",
];

/// Parses `key = value` lines. `#` starts a comment; duplicate and unknown
/// keys are errors.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key {k:?}", no + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(CliError::Config(format!("line {}: duplicate key {k:?}", no + 1)));
        }
    }
    Ok(out)
}

struct Table {
    map: BTreeMap<String, String>,
}

impl Table {
    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}"))),
        }
    }

    fn opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v.parse().map(Some).map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}"))),
        }
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.map.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("{key}: cannot parse {s:?}"))))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }
}

fn keyed(key: &str, e: SksError) -> CliError {
    match e {
        SksError::Config(msg) | SksError::Domain(msg) => CliError::Config(format!("{key}: {msg}")),
        other => CliError::Config(format!("{key}: {other}")),
    }
}

/// Builds a validated config from parsed pairs. Relative `init.file` paths
/// are resolved against `base`.
pub fn build_config(mode: Mode, map: BTreeMap<String, String>, base: &Path) -> Result<RunConfig, CliError> {
    let t = Table { map };
    let dim: usize = t.get("domain.d", 1)?;
    let length: f64 = t.get("domain.L", PI)?;
    let n: usize = t.get("domain.N", 128)?;
    let k: usize = t.get("domain.K", n.saturating_sub(1))?;
    let domain = DomainSpec::new(dim, length, n, k).map_err(|e| keyed("domain", e))?;
    let space = SpectralSpace::new(domain).map_err(|e| keyed("domain", e))?;
    let n_modes = space.n_modes();

    let kernel = match t.get("model.kernel", "bessel".to_string())?.as_str() {
        "bessel" => KernelSpec::bessel(),
        "newtonian" => KernelSpec::newtonian(),
        other => return Err(CliError::Config(format!("model.kernel: expected bessel or newtonian, got {other:?}"))),
    };
    let kernel = match t.get("model.kernel_mode", "resolvent".to_string())?.as_str() {
        "resolvent" => kernel,
        "direct" => kernel.direct(),
        other => {
            return Err(CliError::Config(format!("model.kernel_mode: expected resolvent or direct, got {other:?}")))
        }
    };
    let seed: u64 = t.get("ensemble.seed", 0)?;
    let sigma: f64 = t.get("noise.sigma", 0.1)?;
    let decay: f64 = t.get("noise.a", NoiseSpec::default_decay(dim))?;
    let k_w: usize = t.get("noise.K_W", 64usize.min(n_modes))?;
    let noise = NoiseSpec::new(sigma, decay, k_w, seed).map_err(|e| keyed("noise", e))?;
    noise.validate(space.basis()).map_err(|e| keyed("noise", e))?;

    let mut params = ModelParams::new(t.get("model.m", 3.0)?, t.get("model.chi", 0.5)?, kernel, noise)
        .map_err(|e| keyed("model", e))?;
    if !t.get("model.porous", true)? {
        params = params.without_porous();
    }

    let dt: f64 = t.get("integrator.dt", 1e-4)?;
    let horizon: f64 = t.get("integrator.T", 0.25)?;
    let mut integrator = IntegratorConfig::new(dt, horizon).map_err(|e| keyed("integrator", e))?;
    let every = t.get("integrator.save_every", (integrator.n_steps() / 25).max(1))?;
    integrator = integrator
        .with_save_every(every)
        .map_err(|e| keyed("integrator.save_every", e))?
        .with_taming(t.get("integrator.taming", true)?)
        .with_cfl(t.get("integrator.cfl", 0.2)?)
        .map_err(|e| keyed("integrator.cfl", e))?
        .with_noise_refinement(t.get("integrator.noise_refinement", 0)?);

    let members: usize = t.get("ensemble.P", 16)?;
    if members == 0 {
        return Err(CliError::Config("ensemble.P must be >= 1".into()));
    }

    let init = match t.get("init.kind", "eigenmode".to_string())?.as_str() {
        "eigenmode" => {
            let mode = t.list::<usize>("init.mode")?.unwrap_or_else(|| vec![1, 1]);
            let mode = match mode.as_slice() {
                [a] => [*a, 1],
                [a, b] => [*a, *b],
                _ => return Err(CliError::Config("init.mode: expected k or k1, k2".into())),
            };
            InitSpec::Eigenmode { mode, amplitude: t.get("init.amplitude", 0.5)? }
        }
        "bump" => InitSpec::Bump {
            center: t.list("init.center")?,
            width: t.get("init.width", 0.25)?,
            amplitude: t.get("init.amplitude", 0.5)?,
        },
        "file" => {
            let p: String = t
                .opt("init.file")?
                .ok_or_else(|| CliError::Config("init.file is required when init.kind = file".into()))?;
            InitSpec::File(base.join(p))
        }
        other => return Err(CliError::Config(format!("init.kind: expected eigenmode, bump or file, got {other:?}"))),
    };

    let picard = PicardConfig { max_iter: t.get("picard.max_iter", 8)?, tol: t.get("picard.tol", 1e-6)? };
    sks_core::fixed_point::PicardSettings::new(members, picard.max_iter, picard.tol, seed)
        .map_err(|e| keyed("picard", e))?;
    let holder_eps = t.list("probe.eps")?.unwrap_or_else(|| (1..=6).map(|k| 2f64.powi(-k)).collect());
    if holder_eps.len() < 2 || holder_eps.iter().any(|e: &f64| e.is_nan() || *e <= 0.0) {
        return Err(CliError::Config("probe.eps: need at least two positive scales".into()));
    }

    let mut warnings = Vec::new();
    if params.below_theorem_regime() {
        warnings.push(format!("model.m = {} is below 3, outside the regime of the existence theory", params.m));
    }
    Ok(RunConfig {
        mode,
        domain,
        params,
        integrator,
        init,
        members,
        seed,
        out_dir: PathBuf::from(t.get("output.dir", "out".to_string())?),
        write_dumps: t.get("output.dumps", true)?,
        picard,
        holder_eps,
        warnings,
    })
}

pub fn parse_config(mode: Mode, text: &str, base: &Path) -> Result<RunConfig, CliError> {
    build_config(mode, parse_pairs(text)?, base)
}

pub fn load_config(mode: Mode, path: &Path) -> Result<RunConfig, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(mode, &text, base)
}

//! Tamed explicit Euler-Maruyama time stepping.

use rand_chacha::ChaCha8Rng;

use crate::drift::{chemo_drift_coeffs, laplacian_in_place, porous_power_coeffs, ModelParams};
use crate::error::{ensure_finite, Result, SksError};
use crate::field::Field;
use crate::kernel::{KernelMode, KernelTable};
use crate::noise::{draw, NoiseIncrement, NoiseOperator, NoiseStream};
use crate::space::SpectralSpace;

/// Blow-up when ||rho||_inf exceeds this multiple of ||rho_0||_inf.
pub const BLOWUP_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub horizon: f64,
    save_steps: Vec<usize>,
    pub taming: bool,
    pub cfl: f64,
    pub max_halvings: u32,
    /// Each base increment is the sum of 2^r independent draws of variance
    /// dt / 2^r. Runs at dt and dt/2 with refinements r+1 and r then share
    /// the same Brownian path. Default 0.
    pub noise_refinement: u32,
}

impl IntegratorConfig {
    /// Saves at t = 0 and t = T only; taming on; c_cfl = 0.2.
    pub fn new(dt: f64, horizon: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SksError::Config(format!("integrator.dt must be > 0, got {dt}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(SksError::Config(format!("integrator.T must be > 0, got {horizon}")));
        }
        let n = (horizon / dt).round();
        if n < 1.0 || (n * dt - horizon).abs() > 1e-12 * horizon.max(1.0) {
            return Err(SksError::Config(format!("integrator.dt = {dt} does not divide T = {horizon}")));
        }
        let n = n as usize;
        Ok(IntegratorConfig {
            dt,
            horizon,
            save_steps: vec![0, n],
            taming: true,
            cfl: 0.2,
            max_halvings: 24,
            noise_refinement: 0,
        })
    }

    /// Saves every `every` steps, plus the final step.
    pub fn with_save_every(mut self, every: usize) -> Result<Self> {
        if every == 0 {
            return Err(SksError::Config("integrator.save_every must be >= 1".into()));
        }
        let n = self.n_steps();
        let mut s: Vec<usize> = (0..=n).step_by(every).collect();
        if *s.last().unwrap() != n {
            s.push(n);
        }
        self.save_steps = s;
        Ok(self)
    }

    /// Explicit save steps; 0 and the final step are added if missing.
    pub fn with_save_steps(mut self, mut steps: Vec<usize>) -> Result<Self> {
        let n = self.n_steps();
        steps.push(0);
        steps.push(n);
        steps.sort_unstable();
        steps.dedup();
        if steps.iter().any(|&s| s > n) {
            return Err(SksError::Config("save step beyond the horizon".into()));
        }
        self.save_steps = steps;
        Ok(self)
    }

    pub fn with_taming(mut self, taming: bool) -> Self {
        self.taming = taming;
        self
    }

    pub fn with_cfl(mut self, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl <= 1.0) {
            return Err(SksError::Config(format!("integrator.cfl must lie in (0, 1], got {cfl}")));
        }
        self.cfl = cfl;
        Ok(self)
    }

    pub fn with_noise_refinement(mut self, r: u32) -> Self {
        self.noise_refinement = r;
        self
    }

    pub fn n_steps(&self) -> usize {
        (self.horizon / self.dt).round() as usize
    }

    pub fn save_steps(&self) -> &[usize] {
        &self.save_steps
    }

    pub fn save_times(&self) -> Vec<f64> {
        self.save_steps.iter().map(|&s| s as f64 * self.dt).collect()
    }
}

/// Saved coefficient vectors at selected step indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub dt: f64,
    pub steps: Vec<usize>,
    pub frames: Vec<Vec<f64>>,
}

impl Trajectory {
    /// The same field at every listed step.
    pub fn constant(a: &[f64], steps: &[usize], dt: f64) -> Self {
        Trajectory { dt, steps: steps.to_vec(), frames: vec![a.to_vec(); steps.len()] }
    }

    pub fn times(&self) -> Vec<f64> {
        self.steps.iter().map(|&s| s as f64 * self.dt).collect()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Piecewise-constant lookup: the frame of the last save step <= n.
    pub fn at_step(&self, n: usize) -> &[f64] {
        let i = self.steps.partition_point(|&s| s <= n);
        &self.frames[i.saturating_sub(1)]
    }

    pub fn last(&self) -> Option<&[f64]> {
        self.frames.last().map(|v| v.as_slice())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitEvent {
    pub step: usize,
    pub halvings: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowUp {
    /// Base step during which the bad state appeared.
    pub step: usize,
    pub time: f64,
}

/// A completed (or blown-up) path with everything needed to replay its noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub trajectory: Trajectory,
    pub stream: NoiseStream,
    pub noise_modes: usize,
    pub noise_refinement: u32,
    pub dt: f64,
    pub n_steps: usize,
    pub splits: Vec<SplitEvent>,
    pub blow_up: Option<BlowUp>,
}

impl PathSample {
    pub fn blown(&self) -> bool {
        self.blow_up.is_some()
    }

    /// Base steps for which increments were drawn.
    pub fn steps_drawn(&self) -> usize {
        match self.blow_up {
            Some(b) => b.step + 1,
            None => self.n_steps,
        }
    }

    /// Regenerates the increments of every base step (one entry per sub-step).
    pub fn increments(&self) -> Vec<Vec<NoiseIncrement>> {
        let mut src = NoiseSource::new(self.stream, self.noise_modes, self.noise_refinement);
        let mut splits = self.splits.iter().peekable();
        (0..self.steps_drawn())
            .map(|n| {
                let h = match splits.peek() {
                    Some(s) if s.step == n => splits.next().unwrap().halvings,
                    _ => 0,
                };
                src.base_step(self.dt, h)
            })
            .collect()
    }
}

/// Increment generator shared by integration and replay. On a split the base
/// increment is still drawn, then discarded and replaced by 2^h fresh draws.
pub(crate) struct NoiseSource {
    rng: ChaCha8Rng,
    modes: usize,
    refinement: u32,
}

impl NoiseSource {
    pub(crate) fn new(stream: NoiseStream, modes: usize, refinement: u32) -> Self {
        NoiseSource { rng: stream.rng(), modes, refinement }
    }

    fn refined(&mut self, dt: f64) -> NoiseIncrement {
        if self.refinement == 0 {
            return draw(self.modes, dt, &mut self.rng);
        }
        let parts = 1usize << self.refinement;
        let mut acc = vec![0.0; self.modes];
        for _ in 0..parts {
            let d = draw(self.modes, dt / parts as f64, &mut self.rng);
            acc.iter_mut().zip(&d.values).for_each(|(a, v)| *a += v);
        }
        NoiseIncrement { dt, values: acc }
    }

    pub(crate) fn base_step(&mut self, dt: f64, halvings: u32) -> Vec<NoiseIncrement> {
        let base = self.refined(dt);
        if halvings == 0 {
            return vec![base];
        }
        let sub = dt / (1u64 << halvings) as f64;
        (0..1usize << halvings).map(|_| draw(self.modes, sub, &mut self.rng)).collect()
    }
}

/// Model evaluation state reused across steps.
pub(crate) struct Dynamics<'a> {
    pub space: &'a SpectralSpace,
    pub params: ModelParams,
    pub noise: NoiseOperator,
    table: Option<KernelTable>,
}

pub(crate) struct PorousEval {
    pub drift: Vec<f64>,
    pub max_abs: f64,
}

impl<'a> Dynamics<'a> {
    pub fn new(space: &'a SpectralSpace, params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let noise = NoiseOperator::new(space, &params.noise)?;
        let table = match params.kernel.mode {
            KernelMode::DirectQuadrature if params.chi != 0.0 => Some(KernelTable::new(space, params.kernel.kind)?),
            _ => None,
        };
        Ok(Dynamics { space, params: *params, noise, table })
    }

    pub fn chemo(&self, xi: &[f64]) -> Result<Vec<f64>> {
        chemo_drift_coeffs(self.space, xi, self.params.chi, self.params.kernel, self.table.as_ref())
    }

    pub fn porous(&self, a: &[f64]) -> PorousEval {
        let (mut p, max_abs) = porous_power_coeffs(self.space, a, self.params.m);
        if self.params.porous {
            laplacian_in_place(self.space, &mut p);
        } else {
            p.iter_mut().for_each(|v| *v = 0.0);
        }
        PorousEval { drift: p, max_abs }
    }

    /// Untamed drift from precomputed parts.
    pub fn drift(&self, porous: &PorousEval, chemo: &[f64]) -> Vec<f64> {
        porous.drift.iter().zip(chemo).map(|(p, c)| p + c).collect()
    }

    pub fn advance(&self, a: &[f64], drift: &[f64], inc: &[f64], dt: f64, taming: bool) -> Vec<f64> {
        let scale = if taming {
            let norm = drift.iter().map(|v| v * v).sum::<f64>().sqrt();
            dt / (1.0 + dt * norm)
        } else {
            dt
        };
        let noise = self.noise.apply_coeffs(self.space, a, inc);
        a.iter().zip(drift).zip(&noise).map(|((x, d), w)| x + scale * d + w).collect()
    }

    /// Halvings needed for dt <= c h^2 / (m max|rho|^{m-1}).
    pub fn halvings(&self, dt: f64, max_abs: f64, cfl: f64, cap: u32) -> u32 {
        if !self.params.porous {
            return 0;
        }
        let m = self.params.m;
        let h = self.space.h();
        let denom = m * if m == 1.0 { 1.0 } else { max_abs.powf(m - 1.0) };
        if denom == 0.0 {
            return 0;
        }
        let limit = cfl * h * h / denom;
        let mut s = 0;
        let mut sub = dt;
        while sub > limit && s < cap {
            sub *= 0.5;
            s += 1;
        }
        s
    }
}

/// Self-consistent (xi = rho) or frozen chemotactic input.
#[derive(Debug, Clone, Copy)]
pub enum PathMode<'a> {
    SelfConsistent,
    Frozen(&'a Trajectory),
}

/// One explicit step rho + dt D_tamed + P(rho g). No CFL splitting.
pub fn step(
    space: &SpectralSpace,
    rho: &Field,
    xi: &Field,
    params: &ModelParams,
    inc: &NoiseIncrement,
    dt: f64,
    taming: bool,
) -> Result<Field> {
    if !(dt > 0.0) {
        return Err(SksError::Domain(format!("time step must be > 0, got {dt}")));
    }
    let dynm = Dynamics::new(space, params)?;
    if inc.values.len() != dynm.noise.n_modes() {
        return Err(SksError::Contract("increment length differs from the noise truncation".into()));
    }
    let a = space.coeffs_of(rho)?;
    let x = space.coeffs_of(xi)?;
    let d = dynm.drift(&dynm.porous(&a), &dynm.chemo(&x)?);
    let next = dynm.advance(&a, &d, &inc.values, dt, taming);
    ensure_finite(&next, "step output")?;
    Ok(Field::from_coeffs(next))
}

fn check_frozen(space: &SpectralSpace, t: &Trajectory, config: &IntegratorConfig) -> Result<()> {
    if t.is_empty() || t.steps[0] != 0 {
        return Err(SksError::Contract("frozen input must start with a frame at step 0".into()));
    }
    if (t.dt - config.dt).abs() > 1e-12 * config.dt {
        return Err(SksError::Contract("frozen input uses a different step size".into()));
    }
    if t.frames.iter().any(|f| f.len() != space.n_modes()) {
        return Err(SksError::Contract("frozen input has the wrong number of modes".into()));
    }
    Ok(())
}

/// Integrates one path over [0, T].
pub fn integrate_path(
    space: &SpectralSpace,
    rho0: &Field,
    params: &ModelParams,
    config: &IntegratorConfig,
    mode: PathMode,
    stream: NoiseStream,
) -> Result<PathSample> {
    let a0 = space.coeffs_of(rho0)?.into_owned();
    integrate_coeffs(space, &a0, params, config, mode, stream)
}

pub(crate) fn integrate_coeffs(
    space: &SpectralSpace,
    a0: &[f64],
    params: &ModelParams,
    config: &IntegratorConfig,
    mode: PathMode,
    stream: NoiseStream,
) -> Result<PathSample> {
    if a0.len() != space.n_modes() {
        return Err(SksError::Contract("initial coefficients have the wrong length".into()));
    }
    ensure_finite(a0, "initial data")?;
    if let PathMode::Frozen(t) = mode {
        check_frozen(space, t, config)?;
    }
    let dynm = Dynamics::new(space, params)?;
    let n_steps = config.n_steps();
    let dt = config.dt;
    let saves = config.save_steps();
    let mut src = NoiseSource::new(stream, dynm.noise.n_modes(), config.noise_refinement);
    let mut a = a0.to_vec();
    let mut porous = dynm.porous(&a);
    let threshold = BLOWUP_FACTOR * porous.max_abs;
    let mut steps = Vec::with_capacity(saves.len());
    let mut frames = Vec::with_capacity(saves.len());
    let mut next_save = 0;
    if saves[0] == 0 {
        steps.push(0);
        frames.push(a.clone());
        next_save = 1;
    }
    let mut splits = Vec::new();
    let mut blow_up = None;
    'outer: for n in 0..n_steps {
        let chemo = match mode {
            PathMode::SelfConsistent => dynm.chemo(&a)?,
            PathMode::Frozen(t) => dynm.chemo(t.at_step(n))?,
        };
        let h = dynm.halvings(dt, porous.max_abs, config.cfl, config.max_halvings);
        if h > 0 {
            splits.push(SplitEvent { step: n, halvings: h });
        }
        let incs = src.base_step(dt, h);
        let sub = incs[0].dt;
        for (i, inc) in incs.iter().enumerate() {
            let d = dynm.drift(&porous, &chemo);
            a = dynm.advance(&a, &d, &inc.values, sub, config.taming);
            porous = dynm.porous(&a);
            let bad = a.iter().any(|v| !v.is_finite()) || !(porous.max_abs <= threshold);
            if bad {
                blow_up = Some(BlowUp { step: n, time: n as f64 * dt + (i + 1) as f64 * sub });
                break 'outer;
            }
        }
        if next_save < saves.len() && saves[next_save] == n + 1 {
            steps.push(n + 1);
            frames.push(a.clone());
            next_save += 1;
        }
    }
    Ok(PathSample {
        trajectory: Trajectory { dt, steps, frames },
        stream,
        noise_modes: dynm.noise.n_modes(),
        noise_refinement: config.noise_refinement,
        dt,
        n_steps,
        splits,
        blow_up,
    })
}

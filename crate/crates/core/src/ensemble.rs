//! Seeded random model instances and Monte Carlo averages over them.
//!
//! The generator is ChaCha20 (`rand_chacha::ChaCha20Rng`), seeded with
//! `seed_from_u64(policy.seed)`. Ensemble member `k` reads stream `k` of that
//! key (`set_stream(k)`); [`sample_model`] reads stream 0, so it returns
//! member 0. Each particle consumes exactly four `f64` draws in the order
//! `|α|²`, `g`, `arg α`, `arg β`, whatever the phase mode. Particle `i`
//! therefore depends only on `(seed, stream, i)`: growing `N` appends
//! particles without touching the earlier ones, and the two phase modes
//! share the same magnitude and coupling stream.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::math::{cis, pairwise_sum};
use crate::model::{EnvQubit, ModelConfig, SystemQubit, TimeGrid};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseMode {
    /// `α = √u`, `β = √(1−u)`.
    #[default]
    RealAmplitudes,
    /// Same moduli, each multiplied by an independent uniform phase.
    RandomPhases,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingPolicy {
    pub seed: u64,
    pub g_min: f64,
    pub g_max: f64,
    pub phase_mode: PhaseMode,
}

impl Default for SamplingPolicy {
    fn default() -> Self {
        Self {
            seed: 0,
            g_min: 0.0,
            g_max: 1.0,
            phase_mode: PhaseMode::RealAmplitudes,
        }
    }
}

impl SamplingPolicy {
    pub fn new(seed: u64, g_min: f64, g_max: f64, phase_mode: PhaseMode) -> Result<Self> {
        let p = Self {
            seed,
            g_min,
            g_max,
            phase_mode,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g_min.is_finite() && self.g_max.is_finite()) {
            return Err(Error::InvalidPolicy("coupling range must be finite"));
        }
        if self.g_min < 0.0 {
            return Err(Error::InvalidPolicy("g_min must be non-negative"));
        }
        if self.g_min >= self.g_max {
            return Err(Error::InvalidPolicy("g_min must be below g_max"));
        }
        Ok(())
    }

    /// Mean coupling `(g_min + g_max)/2`.
    pub fn g_mean(&self) -> f64 {
        0.5 * (self.g_min + self.g_max)
    }
}

fn member_rng(seed: u64, member: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}

fn draw_particle(rng: &mut ChaCha20Rng, policy: &SamplingPolicy) -> Result<EnvQubit> {
    let u: f64 = rng.random();
    let gu: f64 = rng.random();
    let phi_a: f64 = rng.random();
    let phi_b: f64 = rng.random();
    // gu ∈ [0, 1) maps onto (g_min, g_max].
    let g = policy.g_max - (policy.g_max - policy.g_min) * gu;
    let (alpha, beta) = match policy.phase_mode {
        PhaseMode::RealAmplitudes => (
            C64::new(libm::sqrt(u), 0.0),
            C64::new(libm::sqrt(1.0 - u), 0.0),
        ),
        PhaseMode::RandomPhases => (
            cis(TAU * phi_a) * libm::sqrt(u),
            cis(TAU * phi_b) * libm::sqrt(1.0 - u),
        ),
    };
    EnvQubit::new(alpha, beta, g)
}

/// Ensemble member `member` of size `n`.
pub fn sample_member(
    policy: &SamplingPolicy,
    member: u64,
    n: usize,
    system: SystemQubit,
) -> Result<ModelConfig> {
    policy.validate()?;
    if n == 0 {
        return Err(Error::EmptyEnvironment);
    }
    let mut rng = member_rng(policy.seed, member);
    let env = (0..n)
        .map(|_| draw_particle(&mut rng, policy))
        .collect::<Result<Vec<_>>>()?;
    ModelConfig::new(system, env)
}

/// A random instance with `|αᵢ|² ~ U[0,1)`, `|βᵢ|² = 1 − |αᵢ|²`,
/// `gᵢ ~ U(g_min, g_max]`.
pub fn sample_model(policy: &SamplingPolicy, n: usize, system: SystemQubit) -> Result<ModelConfig> {
    sample_member(policy, 0, n, system)
}

/// Per-grid-point mean and unbiased variance over an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub grid: TimeGrid,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub sample_count: usize,
}

impl EnsembleStats {
    /// Standard error of the mean at grid point `k`.
    pub fn standard_error(&self, k: usize) -> f64 {
        libm::sqrt(self.variance[k] / self.sample_count as f64)
    }
}

/// Evaluates `metric` on `samples` independent members (streams
/// `0..samples`) over `grid` and reduces with pairwise summation.
pub fn ensemble_average<F>(
    policy: &SamplingPolicy,
    n: usize,
    samples: usize,
    system: SystemQubit,
    grid: &TimeGrid,
    metric: F,
) -> Result<EnsembleStats>
where
    F: Fn(&ModelConfig, f64) -> Result<f64>,
{
    if samples < 2 {
        return Err(Error::TooFewSamples(samples));
    }
    let steps = grid.steps();
    // values[k * samples + m]: grid point k, member m.
    let mut values = alloc::vec![0.0; steps * samples];
    for m in 0..samples {
        let cfg = sample_member(policy, m as u64, n, system)?;
        for (k, t) in grid.times().enumerate() {
            values[k * samples + m] = metric(&cfg, t)?;
        }
    }
    let mut mean = Vec::with_capacity(steps);
    let mut variance = Vec::with_capacity(steps);
    let mut dev = alloc::vec![0.0; samples];
    for row in values.chunks_exact(samples) {
        let mu = pairwise_sum(row) / samples as f64;
        for (d, x) in dev.iter_mut().zip(row) {
            *d = (x - mu) * (x - mu);
        }
        mean.push(mu);
        variance.push(pairwise_sum(&dev) / (samples - 1) as f64);
    }
    Ok(EnsembleStats {
        grid: *grid,
        mean,
        variance,
        sample_count: samples,
    })
}

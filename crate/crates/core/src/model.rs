//! Model instances, observable blocks and the three canonical splits.
//!
//! Basis conventions: `⇑/⇓` for the central particle `P`, `↑/↓` for the
//! environment particles. Particle indices in user-facing functions are
//! 1-based (`P₁ … P_N`).

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

/// Amplitude normalization tolerance on `|x|² + |y|²`.
pub const NORM_TOL: f64 = 1e-12;

fn check_pair(what: &'static str, x: C64, y: C64) -> Result<()> {
    if !(x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    let norm = x.norm_sqr() + y.norm_sqr();
    if (norm - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized { what, norm });
    }
    Ok(())
}

/// Initial state `a|⇑⟩ + b|⇓⟩` of the central particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemQubit {
    a: C64,
    b: C64,
}

impl SystemQubit {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        check_pair("system qubit", a, b)?;
        Ok(Self { a, b })
    }

    /// `(|⇑⟩ + |⇓⟩)/√2`, the maximally coherent real superposition.
    pub fn plus() -> Self {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        Self {
            a: C64::new(h, 0.0),
            b: C64::new(h, 0.0),
        }
    }

    pub fn up() -> Self {
        Self {
            a: C64::new(1.0, 0.0),
            b: C64::new(0.0, 0.0),
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }
}

/// One environment spin: initial state `α|↑⟩ + β|↓⟩` and coupling `g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvQubit {
    alpha: C64,
    beta: C64,
    g: f64,
}

impl EnvQubit {
    pub fn new(alpha: C64, beta: C64, g: f64) -> Result<Self> {
        check_pair("environment qubit", alpha, beta)?;
        if !g.is_finite() {
            return Err(Error::NonFinite("coupling constant"));
        }
        Ok(Self { alpha, beta, g })
    }

    /// Real non-negative amplitudes with `|α|² = weight_up`.
    pub fn from_weight(weight_up: f64, g: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight_up) {
            return Err(Error::NotNormalized {
                what: "environment qubit weight",
                norm: weight_up,
            });
        }
        Self::new(
            C64::new(libm::sqrt(weight_up), 0.0),
            C64::new(libm::sqrt(1.0 - weight_up), 0.0),
            g,
        )
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// `|α|²`
    pub fn weight_up(&self) -> f64 {
        self.alpha.norm_sqr()
    }

    /// `|β|²`
    pub fn weight_down(&self) -> f64 {
        self.beta.norm_sqr()
    }
}

/// A complete model instance: central qubit plus an ordered bath of `N ≥ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig {
    system: SystemQubit,
    env: Vec<EnvQubit>,
}

impl ModelConfig {
    pub fn new(system: SystemQubit, env: Vec<EnvQubit>) -> Result<Self> {
        if env.is_empty() {
            return Err(Error::EmptyEnvironment);
        }
        Ok(Self { system, env })
    }

    pub fn system(&self) -> &SystemQubit {
        &self.system
    }

    pub fn env(&self) -> &[EnvQubit] {
        &self.env
    }

    /// Number of environment particles `N`.
    pub fn n(&self) -> usize {
        self.env.len()
    }

    /// Environment particle `Pⱼ` for 1-based `j`.
    pub fn particle(&self, j: usize) -> Result<&EnvQubit> {
        check_index(j, self.n())?;
        Ok(&self.env[j - 1])
    }

    pub fn with_system(&self, system: SystemQubit) -> Self {
        Self {
            system,
            env: self.env.clone(),
        }
    }

    /// Keeps only particles `1..=n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n() {
            return Err(Error::SubsystemSize { p: n, n: self.n() });
        }
        Ok(Self {
            system: self.system,
            env: self.env[..n].to_vec(),
        })
    }
}

pub(crate) fn check_index(j: usize, n: usize) -> Result<()> {
    if j == 0 || j > n {
        Err(Error::IndexOutOfRange { index: j, n })
    } else {
        Ok(())
    }
}

pub(crate) fn check_subsystem(p: usize, n: usize) -> Result<()> {
    if p == 0 || p > n {
        Err(Error::SubsystemSize { p, n })
    } else {
        Ok(())
    }
}

/// Hermitian 2×2 block acting on `P`.
///
/// Only `s⇑⇑`, `s⇓⇓` and `s⇑⇓` are stored; `s⇓⇑ = conj(s⇑⇓)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemObservable {
    pub s_uu: f64,
    pub s_dd: f64,
    /// Coefficient of `|⇑⟩⟨⇓|`.
    pub s_ud: C64,
}

impl SystemObservable {
    pub fn new(s_uu: f64, s_dd: f64, s_ud: C64) -> Self {
        Self { s_uu, s_dd, s_ud }
    }

    pub fn identity() -> Self {
        Self::new(1.0, 1.0, C64::new(0.0, 0.0))
    }

    /// Coefficient of `|⇓⟩⟨⇑|`.
    pub fn s_du(&self) -> C64 {
        self.s_ud.conj()
    }

    /// Row-major matrix in the `(⇑, ⇓)` basis.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.s_uu, 0.0), self.s_ud],
            [self.s_du(), C64::new(self.s_dd, 0.0)],
        ]
    }
}

/// Hermitian 2×2 block acting on one environment particle.
///
/// Only `ε↑↑`, `ε↓↓` and `ε↑↓` are stored; `ε↓↑ = conj(ε↑↓)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleObservable {
    pub e_uu: f64,
    pub e_dd: f64,
    /// Coefficient of `|↑⟩⟨↓|`.
    pub e_ud: C64,
}

impl ParticleObservable {
    pub fn new(e_uu: f64, e_dd: f64, e_ud: C64) -> Self {
        Self { e_uu, e_dd, e_ud }
    }

    pub fn identity() -> Self {
        identity_particle_block()
    }

    /// `S_x = σ_x / 2`.
    pub fn spin_x() -> Self {
        Self::new(0.0, 0.0, C64::new(0.5, 0.0))
    }

    /// `S_z = σ_z / 2` along the coupling direction.
    pub fn spin_z() -> Self {
        Self::new(0.5, -0.5, C64::new(0.0, 0.0))
    }

    /// Coefficient of `|↓⟩⟨↑|`.
    pub fn e_du(&self) -> C64 {
        self.e_ud.conj()
    }

    /// Row-major matrix in the `(↑, ↓)` basis.
    pub fn matrix(&self) -> [[C64; 2]; 2] {
        [
            [C64::new(self.e_uu, 0.0), self.e_ud],
            [self.e_du(), C64::new(self.e_dd, 0.0)],
        ]
    }
}

/// `ε↑↑ = ε↓↓ = 1`, `ε↑↓ = 0`.
pub fn identity_particle_block() -> ParticleObservable {
    ParticleObservable::new(1.0, 1.0, C64::new(0.0, 0.0))
}

/// Tensor-product observable `O_S ⊗ O₁ ⊗ … ⊗ O_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableSpec {
    pub system_block: SystemObservable,
    pub particle_blocks: Vec<ParticleObservable>,
}

impl ObservableSpec {
    pub fn new(system_block: SystemObservable, particle_blocks: Vec<ParticleObservable>) -> Self {
        Self {
            system_block,
            particle_blocks,
        }
    }

    pub fn n(&self) -> usize {
        self.particle_blocks.len()
    }

    /// Fails unless the spec has one block per particle of `config`.
    pub fn check_paired(&self, config: &ModelConfig) -> Result<()> {
        if self.n() != config.n() {
            return Err(Error::SpecMismatch {
                expected: config.n(),
                found: self.n(),
            });
        }
        Ok(())
    }
}

/// Observe `P` only: `O_S ⊗ I ⊗ … ⊗ I`.
pub fn case1_spec(config: &ModelConfig, sys_block: SystemObservable) -> ObservableSpec {
    ObservableSpec::new(
        sys_block,
        alloc::vec![identity_particle_block(); config.n()],
    )
}

/// Observe `Pⱼ` only (1-based `j`): `I_S ⊗ … ⊗ O_j ⊗ … ⊗ I`.
pub fn case2_spec(
    config: &ModelConfig,
    j: usize,
    block: ParticleObservable,
) -> Result<ObservableSpec> {
    check_index(j, config.n())?;
    let mut blocks = alloc::vec![identity_particle_block(); config.n()];
    blocks[j - 1] = block;
    Ok(ObservableSpec::new(SystemObservable::identity(), blocks))
}

/// Observe `P₁ … P_p` with the given blocks; identity on `P` and the tail.
pub fn case3_spec(config: &ModelConfig, blocks: &[ParticleObservable]) -> Result<ObservableSpec> {
    check_subsystem(blocks.len(), config.n())?;
    let mut all = blocks.to_vec();
    all.resize(config.n(), identity_particle_block());
    Ok(ObservableSpec::new(SystemObservable::identity(), all))
}

/// Uniform grid `t_k = t_start + k (t_end − t_start)/(steps − 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds"));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid("t_end must exceed t_start"));
        }
        if steps < 2 {
            return Err(Error::InvalidGrid("need at least 2 steps"));
        }
        Ok(Self {
            t_start,
            t_end,
            steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.steps - 1) as f64
    }

    /// Time of grid point `k`; both endpoints are exact.
    pub fn time(&self, k: usize) -> f64 {
        if k + 1 == self.steps {
            return self.t_end;
        }
        self.t_start + (self.t_end - self.t_start) * (k as f64) / ((self.steps - 1) as f64)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.steps).map(move |k| self.time(k))
    }
}

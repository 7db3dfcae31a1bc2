//! Closed-form expectation values.
//!
//! Every quantity here is a left-to-right product over particles `i = 1..N`
//! of per-particle factors, so curves are bit-reproducible.
//!
//! With the branch states
//!
//! ```text
//! |E⇑(t)⟩ = ⊗ᵢ (αᵢ e^{+i gᵢ t/2} |↑ᵢ⟩ + βᵢ e^{−i gᵢ t/2} |↓ᵢ⟩),   |E⇓(t)⟩ = |E⇑(−t)⟩
//! ```
//!
//! `Γ₀(t) = ⟨E⇑|O_E|E⇑⟩` and `Γ₁(t) = ⟨E⇓|O_E|E⇑⟩`. The `⇓` branch sees
//! `Γ₀(−t)`, which differs from `Γ₀(t)` once amplitudes or `ε↑↓` are complex.
//! [`Convention::OracleConsistent`] accounts for that; [`Convention::StrictPaper`]
//! keeps the textbook forms that put `Γ₀(t)` on both branches and print the
//! single-particle cross term as `Re(αβ* ε e^{igt})`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{abs, cis};
use crate::model::{
    check_subsystem, EnvQubit, ModelConfig, ObservableSpec, ParticleObservable, TimeGrid,
};
use crate::C64;

/// Largest imaginary residue tolerated before a real result is reported as
/// an internal inconsistency, relative to `1 + |value|`.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Above this bath size direct products of `|r₁|²` approach the subnormal
/// range for typical weights; use the log-magnitude routines instead.
pub const LOG_MODE_MIN_N: usize = 2000;

/// Which algebraic form the case-specific evaluators use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Convention {
    /// Forms that agree with the state-vector oracle for arbitrary complex
    /// amplitudes and coefficients.
    #[default]
    OracleConsistent,
    /// The literal textbook forms (diagonal branches both weighted by `Γ₀(t)`,
    /// single-particle cross term `Re(αⱼβⱼ* ε e^{igⱼt})`).
    StrictPaper,
}

fn real_of(z: C64) -> Result<f64> {
    let residue = z.im.abs();
    if residue > IMAG_RESIDUE_TOL * (1.0 + z.re.abs()) || !residue.is_finite() {
        return Err(Error::ImaginaryResidue { residue });
    }
    Ok(z.re)
}

/// `j`-th factor of `Γ₀(t)`; real up to rounding.
pub fn gamma0_factor(q: &EnvQubit, blk: &ParticleObservable, t: f64) -> C64 {
    let w = q.alpha().conj() * q.beta() * blk.e_ud * cis(-q.g() * t);
    C64::new(q.weight_up() * blk.e_uu, 0.0)
        + w
        + C64::new(q.weight_down() * blk.e_dd, 0.0)
        + w.conj()
}

/// `j`-th factor of `Γ₁(t)`.
pub fn gamma1_factor(q: &EnvQubit, blk: &ParticleObservable, t: f64) -> C64 {
    let x = q.alpha().conj() * q.beta() * blk.e_ud;
    cis(q.g() * t) * (q.weight_up() * blk.e_uu)
        + cis(-q.g() * t) * (q.weight_down() * blk.e_dd)
        + x
        + x.conj()
}

fn product<I>(factors: I) -> C64
where
    I: IntoIterator<Item = C64>,
{
    factors
        .into_iter()
        .fold(C64::new(1.0, 0.0), |acc, f| acc * f)
}

fn gamma0_prefix(config: &ModelConfig, blocks: &[ParticleObservable], t: f64) -> C64 {
    product(
        config
            .env()
            .iter()
            .zip(blocks)
            .map(|(q, b)| gamma0_factor(q, b, t)),
    )
}

/// Diagonal-branch product `Γ₀(t) = ∏ᵢ ⟨E⇑,ᵢ|Oᵢ|E⇑,ᵢ⟩`.
pub fn gamma0(config: &ModelConfig, spec: &ObservableSpec, t: f64) -> Result<C64> {
    spec.check_paired(config)?;
    Ok(gamma0_prefix(config, &spec.particle_blocks, t))
}

/// Cross-branch product `Γ₁(t) = ∏ᵢ ⟨E⇓,ᵢ|Oᵢ|E⇑,ᵢ⟩`.
pub fn gamma1(config: &ModelConfig, spec: &ObservableSpec, t: f64) -> Result<C64> {
    spec.check_paired(config)?;
    Ok(product(
        config
            .env()
            .iter()
            .zip(&spec.particle_blocks)
            .map(|(q, b)| gamma1_factor(q, b, t)),
    ))
}

/// Complex value of `⟨O_R⟩` before the imaginary residue is dropped.
pub fn expectation_raw(
    config: &ModelConfig,
    spec: &ObservableSpec,
    t: f64,
    convention: Convention,
) -> Result<C64> {
    let g0 = gamma0(config, spec, t)?;
    let g1 = gamma1(config, spec, t)?;
    let sys = config.system();
    let s = &spec.system_block;
    let pu = sys.a().norm_sqr();
    let pd = sys.b().norm_sqr();
    let diagonal = match convention {
        Convention::OracleConsistent => {
            let g0_down = gamma0(config, spec, -t)?;
            g0 * (pu * s.s_uu) + g0_down * (pd * s.s_dd)
        }
        Convention::StrictPaper => g0 * (pu * s.s_uu + pd * s.s_dd),
    };
    let x = sys.a() * sys.b().conj() * s.s_du() * g1;
    Ok(diagonal + x + x.conj())
}

/// `⟨ψ(t)|O_R|ψ(t)⟩` for a general tensor-product observable.
///
/// `(|a|² s⇑⇑ Γ₀(t) + |b|² s⇓⇓ Γ₀(−t)) + 2 Re[a b* s⇓⇑ Γ₁(t)]`.
pub fn expectation(config: &ModelConfig, spec: &ObservableSpec, t: f64) -> Result<f64> {
    expectation_with(config, spec, t, Convention::default())
}

pub fn expectation_with(
    config: &ModelConfig,
    spec: &ObservableSpec,
    t: f64,
    convention: Convention,
) -> Result<f64> {
    real_of(expectation_raw(config, spec, t, convention)?)
}

/// `r₁(t) = ∏ᵢ (|αᵢ|² e^{+igᵢt} + |βᵢ|² e^{−igᵢt})`, equal to `Γ₁` for the
/// case-1 split.
pub fn r1(config: &ModelConfig, t: f64) -> C64 {
    product(config.env().iter().map(|q| r1_factor(q, t)))
}

pub fn r1_factor(q: &EnvQubit, t: f64) -> C64 {
    cis(q.g() * t) * q.weight_up() + cis(-q.g() * t) * q.weight_down()
}

/// `|α|⁴ + |β|⁴ + 2|α|²|β|² cos 2gt`, one factor of `|r₁(t)|²`.
pub fn r1_abs2_factor(q: &EnvQubit, t: f64) -> f64 {
    let u = q.weight_up();
    let d = q.weight_down();
    u * u + d * d + 2.0 * u * d * libm::cos(2.0 * q.g() * t)
}

/// `|r₁(t)|²` accumulated directly from the cosine form, not from [`r1`].
pub fn r1_abs2(config: &ModelConfig, t: f64) -> f64 {
    config
        .env()
        .iter()
        .fold(1.0, |acc, q| acc * r1_abs2_factor(q, t))
}

/// A complex number held as `(ln|z|, arg z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPolar {
    pub ln_abs: f64,
    /// Accumulated phase, not reduced modulo 2π.
    pub arg: f64,
}

impl LogPolar {
    pub fn to_complex(&self) -> C64 {
        cis(self.arg) * libm::exp(self.ln_abs)
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / core::f64::consts::LN_10
    }
}

/// [`r1`] accumulated as a sum of logs and phases; never underflows.
pub fn r1_log(config: &ModelConfig, t: f64) -> LogPolar {
    config.env().iter().fold(
        LogPolar {
            ln_abs: 0.0,
            arg: 0.0,
        },
        |acc, q| {
            let f = r1_factor(q, t);
            LogPolar {
                ln_abs: acc.ln_abs + libm::log(abs(f)),
                arg: acc.arg + libm::atan2(f.im, f.re),
            }
        },
    )
}

/// `ln |r₁(t)|²` as a sum of logs of the cosine-form factors.
pub fn r1_abs2_ln(config: &ModelConfig, t: f64) -> f64 {
    config
        .env()
        .iter()
        .fold(0.0, |acc, q| acc + libm::log(r1_abs2_factor(q, t)))
}

/// `r₂(t) = Re(αⱼ βⱼ* ε↑↓ e^{+igⱼt})`, the single-particle cross term in its
/// textbook form.
pub fn r2(config: &ModelConfig, j: usize, block: &ParticleObservable, t: f64) -> Result<f64> {
    let q = config.particle(j)?;
    Ok((q.alpha() * q.beta().conj() * block.e_ud * cis(q.g() * t)).re)
}

/// Complex signal whose real part is the time-dependent term of the case-2
/// expectation value. Its modulus is constant in `t`.
///
/// Oracle-consistent: `2(|a|² c + |b|² c*) e^{−igⱼt}` with `c = αⱼ*βⱼ ε↑↓`.
/// Strict: `αⱼ βⱼ* ε↑↓ e^{+igⱼt}`.
pub fn case2_cross_term(
    config: &ModelConfig,
    j: usize,
    block: &ParticleObservable,
    t: f64,
    convention: Convention,
) -> Result<C64> {
    let q = config.particle(j)?;
    Ok(match convention {
        Convention::OracleConsistent => {
            let c = q.alpha().conj() * q.beta() * block.e_ud;
            let sys = config.system();
            (c * sys.a().norm_sqr() + c.conj() * sys.b().norm_sqr()) * 2.0 * cis(-q.g() * t)
        }
        Convention::StrictPaper => q.alpha() * q.beta().conj() * block.e_ud * cis(q.g() * t),
    })
}

/// Expectation of `I_S ⊗ O_j ⊗ I…`: `|αⱼ|² ε↑↑ + |βⱼ|² ε↓↓ + Re W(t)` with
/// `W` from [`case2_cross_term`].
pub fn case2_expectation(
    config: &ModelConfig,
    j: usize,
    block: &ParticleObservable,
    t: f64,
    convention: Convention,
) -> Result<f64> {
    let q = config.particle(j)?;
    let w = case2_cross_term(config, j, block, t, convention)?;
    Ok(q.weight_up() * block.e_uu + q.weight_down() * block.e_dd + w.re)
}

/// Expectation of `I_S ⊗ O₁ ⊗ … ⊗ O_p ⊗ I…`. Uses particles `1..=p` only,
/// so the result does not depend on `N`.
pub fn case3_expectation(
    config: &ModelConfig,
    blocks: &[ParticleObservable],
    t: f64,
    convention: Convention,
) -> Result<f64> {
    check_subsystem(blocks.len(), config.n())?;
    let up = gamma0_prefix(config, blocks, t);
    let value = match convention {
        Convention::StrictPaper => up,
        Convention::OracleConsistent => {
            // |a|² Γ(t) + |b|² Γ(−t), written so that it is exactly Γ(t)
            // whenever the two branches coincide.
            let down = gamma0_prefix(config, blocks, -t);
            up + (down - up) * config.system().b().norm_sqr()
        }
    };
    real_of(value)
}

/// `r₃(t) = ∏ᵢ₌₁ᵖ 2 Re(αᵢ* βᵢ ε↑↓⁽ⁱ⁾ e^{−igᵢt})`, the case-3 expectation for
/// blocks with vanishing diagonal.
pub fn r3(config: &ModelConfig, p: usize, eps_ud: &[C64], t: f64) -> Result<f64> {
    check_subsystem(p, config.n())?;
    if eps_ud.len() != p {
        return Err(Error::SubsystemSize {
            p: eps_ud.len(),
            n: p,
        });
    }
    Ok(config.env().iter().zip(eps_ud).fold(1.0, |acc, (q, e)| {
        let w = q.alpha().conj() * q.beta() * *e * cis(-q.g() * t);
        acc * (2.0 * w.re)
    }))
}

/// A sampled time series on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    grid: TimeGrid,
    values: Vec<C64>,
}

impl Curve {
    pub fn new(grid: TimeGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.steps() {
            return Err(Error::InvalidGrid("value count differs from grid steps"));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: TimeGrid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(t, value)` pairs in grid order.
    pub fn points(&self) -> impl Iterator<Item = (f64, C64)> + '_ {
        self.grid.times().zip(self.values.iter().copied())
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn abs2(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `|v(t)|² / |v(t_start)|²` as a real curve; `None` when the initial
    /// value vanishes.
    pub fn normalized_abs2(&self) -> Option<Curve> {
        let v0 = self.values[0].norm_sqr();
        if v0 == 0.0 || !v0.is_finite() {
            return None;
        }
        let vals = self
            .values
            .iter()
            .map(|v| C64::new(v.norm_sqr() / v0, 0.0))
            .collect();
        Some(Curve {
            grid: self.grid,
            values: vals,
        })
    }
}

/// Evaluates `f` at every grid point in order.
pub fn sample_curve<F>(grid: &TimeGrid, mut f: F) -> Result<Curve>
where
    F: FnMut(f64) -> Result<C64>,
{
    let values = grid.times().map(&mut f).collect::<Result<Vec<_>>>()?;
    Curve::new(*grid, values)
}

/// [`sample_curve`] for real-valued, infallible evaluators.
pub fn sample_real_curve<F>(grid: &TimeGrid, mut f: F) -> Curve
where
    F: FnMut(f64) -> f64,
{
    let values = grid.times().map(|t| C64::new(f(t), 0.0)).collect();
    Curve {
        grid: *grid,
        values,
    }
}

//! Brute-force state-vector evolution, used only to check [`crate::closed_form`].
//!
//! Nothing in here calls the closed-form engine. The state is a dense array
//! of `2^(N+1)` amplitudes; bit `k` of a basis index selects `⇑/↑` (0) or
//! `⇓/↓` (1) of qubit `k`, where qubit 0 is the central particle `P` and
//! qubits `1..=N` are the bath.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::cis;
use crate::model::{ModelConfig, ObservableSpec};
use crate::C64;

/// Largest bath the oracle accepts (`2^15` amplitudes).
pub const MAX_ORACLE_QUBITS: usize = 14;

/// Imaginary residue tolerated in `⟨ψ|O|ψ⟩`, relative to `1 + |value|`.
pub const ORACLE_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// Wraps raw amplitudes; the length must be `2^n_qubits`.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: amps.len().trailing_zeros() as usize,
            });
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_qubits(other.n_qubits)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y))
    }

    /// Amplitudes of the bath conditioned on the system bit, indexed by the
    /// remaining `N` bits.
    pub fn branch(&self, system_down: bool) -> Vec<C64> {
        let bit = usize::from(system_down);
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & 1 == bit)
            .map(|(_, a)| *a)
            .collect()
    }

    fn check_qubits(&self, expected: usize) -> Result<()> {
        if self.n_qubits != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: self.n_qubits,
            });
        }
        Ok(())
    }
}

fn check_capacity(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::OracleCapacity { n, max })
    } else {
        Ok(())
    }
}

/// `|ψ₀⟩ = (a|⇑⟩ + b|⇓⟩) ⊗ᵢ (αᵢ|↑ᵢ⟩ + βᵢ|↓ᵢ⟩)` as a dense vector.
pub fn initial_state(config: &ModelConfig) -> Result<StateVector> {
    initial_state_with_capacity(config, MAX_ORACLE_QUBITS)
}

pub fn initial_state_with_capacity(config: &ModelConfig, max_env: usize) -> Result<StateVector> {
    check_capacity(config.n(), max_env)?;
    let sys = config.system();
    // Build the product by doubling: start with P, then append each bath qubit
    // as the next-higher bit.
    let mut amps = vec![sys.a(), sys.b()];
    for q in config.env() {
        let half = amps.len();
        let mut next = vec![C64::new(0.0, 0.0); 2 * half];
        for (i, a) in amps.iter().enumerate() {
            next[i] = a * q.alpha();
            next[i + half] = a * q.beta();
        }
        amps = next;
    }
    Ok(StateVector {
        n_qubits: config.n() + 1,
        amps,
    })
}

/// Spin projection `±1` encoded by one bit: `+1` for `⇑/↑`.
#[inline]
fn sign(index: usize, qubit: usize) -> f64 {
    if (index >> qubit) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Diagonal evolution under `H = S_S ⊗ Σᵢ 2gᵢ Sᵢ`.
///
/// Basis state `(σ, σ₁…σ_N)` with `σ, σᵢ = ±1` picks up `e^{+iσ Σᵢ gᵢσᵢ t/2}`.
/// In the `⇑` branch `|↑ᵢ⟩` therefore carries `e^{+igᵢt/2}`, and the `⇓`
/// branch is the `t → −t` mirror.
pub fn evolve(state: &StateVector, config: &ModelConfig, t: f64) -> Result<StateVector> {
    state.check_qubits(config.n() + 1)?;
    let g: Vec<f64> = config.env().iter().map(|q| q.g()).collect();
    let amps = state
        .amps
        .iter()
        .enumerate()
        .map(|(idx, a)| {
            let mut energy = 0.0;
            for (k, gk) in g.iter().enumerate() {
                energy += gk * sign(idx, k + 1);
            }
            a * cis(sign(idx, 0) * energy * t * 0.5)
        })
        .collect();
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amps,
    })
}

fn apply_block(amps: &mut [C64], qubit: usize, m: [[C64; 2]; 2]) {
    let stride = 1usize << qubit;
    for base in (0..amps.len()).step_by(2 * stride) {
        for i in base..base + stride {
            let up = amps[i];
            let down = amps[i + stride];
            amps[i] = m[0][0] * up + m[0][1] * down;
            amps[i + stride] = m[1][0] * up + m[1][1] * down;
        }
    }
}

/// Applies `O_S ⊗ O₁ ⊗ … ⊗ O_N` one 2×2 factor at a time.
pub fn apply_observable(state: &StateVector, spec: &ObservableSpec) -> Result<StateVector> {
    state.check_qubits(spec.n() + 1)?;
    let mut amps = state.amps.clone();
    apply_block(&mut amps, 0, spec.system_block.matrix());
    for (k, blk) in spec.particle_blocks.iter().enumerate() {
        apply_block(&mut amps, k + 1, blk.matrix());
    }
    Ok(StateVector {
        n_qubits: state.n_qubits,
        amps,
    })
}

/// `⟨ψ(t)|O_R|ψ(t)⟩` from the full state vector.
pub fn expectation_oracle(config: &ModelConfig, spec: &ObservableSpec, t: f64) -> Result<f64> {
    spec.check_paired(config)?;
    let psi = evolve(&initial_state(config)?, config, t)?;
    let o_psi = apply_observable(&psi, spec)?;
    let z = psi.inner(&o_psi)?;
    if z.im.abs() > ORACLE_IMAG_TOL * (1.0 + z.re.abs()) {
        return Err(Error::ImaginaryResidue {
            residue: z.im.abs(),
        });
    }
    Ok(z.re)
}

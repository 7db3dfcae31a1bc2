//! Exact expectation-value dynamics for the spin-bath model.
//!
//! A central spin-1/2 particle `P` couples to `N` environment spins through
//! `H = S_S ⊗ Σ 2 gᵢ Sᵢ` with vanishing self-Hamiltonians. Because `H` is
//! diagonal in the product basis, every observable built as a tensor product
//! of 2×2 blocks has a closed-form expectation value that is a product of
//! per-particle factors. Choosing which blocks are non-trivial chooses the
//! split between "system" and "environment":
//!
//! * [`model::case1_spec`]: observe `P` only. The cross term `r₁(t)` decays
//!   for large `N`.
//! * [`model::case2_spec`]: observe one bath spin `Pⱼ`. Pure oscillation,
//!   no decoherence for any `N`.
//! * [`model::case3_spec`]: observe the first `p` bath spins. The decay
//!   depends on `p` only, so the environment may be the single particle `P`.
//!
//! [`closed_form`] evaluates the product formulas, [`oracle`] evolves the
//! full `2^(N+1)` state vector independently, [`ensemble`] draws seeded
//! random instances and [`analysis`] measures decoherence times, tail
//! fluctuations, envelopes and recurrences on sampled curves.
//!
//! The crate is `no_std` and needs only `alloc`. All transcendental
//! functions go through `libm`, so curves are bit-reproducible across
//! platforms.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod closed_form;
pub mod ensemble;
pub mod error;
mod math;
pub mod model;
pub mod oracle;

pub use error::{Error, Result};

/// Complex double used for every amplitude and coefficient.
pub type C64 = num_complex::Complex<f64>;

pub use closed_form::{Convention, Curve};
pub use model::{
    EnvQubit, ModelConfig, ObservableSpec, ParticleObservable, SystemObservable, SystemQubit,
    TimeGrid,
};

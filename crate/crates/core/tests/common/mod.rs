#![allow(dead_code)]

use proptest::prelude::*;
use spinbath_core::model::{
    EnvQubit, ModelConfig, ObservableSpec, ParticleObservable, SystemObservable, SystemQubit,
};
use spinbath_core::C64;
use std::f64::consts::TAU;

pub fn polar(r: f64, phase: f64) -> C64 {
    C64::from_polar(r, phase)
}

pub fn system_qubit() -> impl Strategy<Value = SystemQubit> {
    (0.0..=1.0f64, 0.0..TAU, 0.0..TAU).prop_map(|(w, pa, pb)| {
        SystemQubit::new(polar(w.sqrt(), pa), polar((1.0 - w).sqrt(), pb)).unwrap()
    })
}

pub fn env_qubit() -> impl Strategy<Value = EnvQubit> {
    (0.0..=1.0f64, 0.0..TAU, 0.0..TAU, 0.0..3.0f64).prop_map(|(w, pa, pb, g)| {
        EnvQubit::new(polar(w.sqrt(), pa), polar((1.0 - w).sqrt(), pb), g).unwrap()
    })
}

pub fn config(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = ModelConfig> {
    (system_qubit(), prop::collection::vec(env_qubit(), n))
        .prop_map(|(s, env)| ModelConfig::new(s, env).unwrap())
}

pub fn complex() -> impl Strategy<Value = C64> {
    (-1.5..1.5f64, -1.5..1.5f64).prop_map(|(re, im)| C64::new(re, im))
}

pub fn particle_block() -> impl Strategy<Value = ParticleObservable> {
    (-2.0..2.0f64, -2.0..2.0f64, complex()).prop_map(|(u, d, x)| ParticleObservable::new(u, d, x))
}

pub fn system_block() -> impl Strategy<Value = SystemObservable> {
    (-2.0..2.0f64, -2.0..2.0f64, complex()).prop_map(|(u, d, x)| SystemObservable::new(u, d, x))
}

pub fn generic_spec(n: usize) -> impl Strategy<Value = ObservableSpec> {
    (system_block(), prop::collection::vec(particle_block(), n))
        .prop_map(|(s, b)| ObservableSpec::new(s, b))
}

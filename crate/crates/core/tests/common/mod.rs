#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

use ness_core::linalg::C64;
use ness_core::{Circuit, Encoding, Gate};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn random_pair<R: Rng>(rng: &mut R) -> (C64, C64) {
    let t = rng.random_range(0.0..FRAC_PI_2);
    let (p1, p2) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
    (C64::from_polar(t.cos(), p1), C64::from_polar(t.sin(), p2))
}

/// Equal-weight pair with random phases.
pub fn balanced_pair<R: Rng>(rng: &mut R) -> (C64, C64) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (C64::from_polar(s, rng.random_range(-PI..PI)), C64::from_polar(s, rng.random_range(-PI..PI)))
}

pub fn random_single<R: Rng>(rng: &mut R, q: usize, with_macros: bool) -> Gate {
    let theta = rng.random_range(-PI..PI);
    let top = if with_macros { 8 } else { 7 };
    match rng.random_range(0..top) {
        0 => Gate::enc(Encoding::RotX(theta), q),
        1 => Gate::enc(Encoding::RotY(theta), q),
        2 => Gate::enc(Encoding::RotZ(theta), q),
        3 => Gate::enc(Encoding::PauliX, q),
        4 => Gate::enc(Encoding::PauliY, q),
        5 => Gate::enc(Encoding::PauliZ, q),
        6 => Gate::enc(Encoding::Identity, q),
        _ => Gate::hadamard(q),
    }
}

/// One full layer: every qubit is touched exactly once.
pub fn random_layer<R: Rng>(rng: &mut R, n: usize, with_macros: bool) -> Vec<Gate> {
    let mut qs: Vec<usize> = (1..=n).collect();
    qs.shuffle(rng);
    let mut out = Vec::new();
    let mut i = 0;
    while i < n {
        if i + 1 < n && rng.random_bool(0.4) {
            let (a, b) = (qs[i], qs[i + 1]);
            out.push(if with_macros && rng.random_bool(0.5) {
                Gate::cnot(a, b)
            } else {
                Gate::enc2(Encoding::Cz, a, b)
            });
            i += 2;
        } else {
            out.push(random_single(rng, qs[i], with_macros));
            i += 1;
        }
    }
    out
}

pub struct CircuitShape {
    pub n: usize,
    pub layers: usize,
    pub with_macros: bool,
    pub balanced: bool,
}

pub fn random_circuit<R: Rng>(rng: &mut R, shape: &CircuitShape) -> Circuit {
    let pair = |rng: &mut R| if shape.balanced { balanced_pair(rng) } else { random_pair(rng) };
    let mut gates = Vec::new();
    for q in 1..=shape.n {
        let (a, b) = pair(rng);
        gates.push(Gate::enc(Encoding::In { a, b }, q));
    }
    for _ in 0..shape.layers {
        gates.extend(random_layer(rng, shape.n, shape.with_macros));
    }
    for q in 1..=shape.n {
        let (a, b) = pair(rng);
        gates.push(Gate::enc(Encoding::Fin { a, b }, q));
    }
    Circuit::new(shape.n, gates).expect("generated circuit is valid")
}

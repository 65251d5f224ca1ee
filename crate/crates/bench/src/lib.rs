//! Deterministic workloads shared by the benchmarks.

use std::f64::consts::FRAC_1_SQRT_2;

use ness_core::linalg::C64;
use ness_core::mpo::PlacedString;
use ness_core::{Circuit, Encoding, Gate, PauliLabel};

/// Alternating Z/σ⁺/σ⁻ string over the whole chain.
pub fn dense_string(len: usize) -> PlacedString {
    let cycle = [PauliLabel::Z, PauliLabel::Plus, PauliLabel::Minus, PauliLabel::Id];
    PlacedString::new(C64::new(1.0, 0.0), (1..=len).map(|s| (s, cycle[s % 4])))
}

/// Brickwork of rotations and CZ on `n` qubits with `layers` layers; every
/// encoder is normal, so the circuit can also be sampled.
pub fn brickwork(n: usize, layers: usize) -> Circuit {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut gates: Vec<Gate> = (1..=n).map(|q| Gate::enc(Encoding::In { a: s, b: s }, q)).collect();
    for layer in 0..layers {
        let mut q = 1;
        if layer % 2 == 1 {
            gates.push(Gate::enc(Encoding::RotY(0.3 * layer as f64 + 0.1), 1));
            q = 2;
        }
        while q <= n {
            if q < n {
                gates.push(Gate::enc2(Encoding::Cz, q, q + 1));
                q += 2;
            } else {
                gates.push(Gate::enc(Encoding::RotX(0.7 + q as f64), q));
                q += 1;
            }
        }
    }
    gates.extend((1..=n).map(|q| Gate::enc(Encoding::Fin { a: s, b: s }, q)));
    Circuit::new(n, gates).expect("brickwork circuit is valid")
}

/// Same shape with CNOT and Hadamard macros, for the compiler.
pub fn macro_circuit(n: usize, layers: usize) -> Circuit {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let mut gates: Vec<Gate> = (1..=n).map(|q| Gate::enc(Encoding::In { a: s, b: s }, q)).collect();
    for layer in 0..layers {
        for q in 1..n {
            gates.push(if layer % 2 == 0 { Gate::cnot(q, q + 1) } else { Gate::hadamard(q) });
        }
    }
    gates.extend((1..=n).map(|q| Gate::enc(Encoding::Fin { a: C64::new(1.0, 0.0), b: C64::new(0.0, 0.0) }, q)));
    Circuit::new(n, gates).expect("macro circuit is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(brickwork(3, 4).n(), 3);
        assert_eq!(macro_circuit(3, 2).n(), 3);
        assert_eq!(dense_string(5).labels.len(), 5);
    }
}

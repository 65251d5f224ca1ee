//! Dense logical-state simulation used as ground truth. Qubit 1 is the most
//! significant bit of the amplitude index. Projections never renormalize.

use serde::{Deserialize, Serialize};

use crate::aux_algebra::Boundary;
use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};

pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalState {
    pub n: usize,
    pub amplitudes: Vec<C64>,
}

impl LogicalState {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<C64>) -> Self {
        assert_eq!(amplitudes.len(), 1 << n, "amplitude count");
        LogicalState { n, amplitudes }
    }

    /// ⊗_q (a_q|0⟩ + b_q|1⟩).
    pub fn product(preps: &[(C64, C64)]) -> Self {
        let mut amps = vec![ONE];
        for &(a, b) in preps {
            amps = amps.iter().flat_map(|&z| [z * a, z * b]).collect();
        }
        LogicalState { n: preps.len(), amplitudes: amps }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// True once a projection removed every amplitude.
    pub fn is_annihilated(&self) -> bool {
        self.amplitudes.iter().all(|z| *z == ZERO)
    }

    /// Bit of qubit q (1-based) in basis index x.
    pub fn bit(&self, x: usize, q: usize) -> usize {
        (x >> (self.n - q)) & 1
    }

    fn apply_matrix(&mut self, qubits: &[usize], m: &CMat) {
        let k = qubits.len();
        let sub = 1usize << k;
        let pos: Vec<usize> = qubits.iter().map(|&q| self.n - q).collect();
        let mask: usize = pos.iter().map(|p| 1 << p).sum();
        let offsets: Vec<usize> =
            (0..sub).map(|idx| (0..k).map(|i| ((idx >> (k - 1 - i)) & 1) << pos[i]).sum()).collect();
        let mut x = vec![ZERO; sub];
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 {
                continue;
            }
            for (xi, off) in x.iter_mut().zip(&offsets) {
                *xi = self.amplitudes[base + off];
            }
            for (r, off) in offsets.iter().enumerate() {
                self.amplitudes[base + off] = (0..sub).map(|c| m[(r, c)] * x[c]).sum();
            }
        }
    }
}

/// Applies one interior gate (macros use their exact matrices).
pub fn apply_gate(state: &mut LogicalState, g: &Gate) -> Result<()> {
    if g.boundary() != Boundary::Gate {
        return Err(Error::InvalidCircuit(format!("{:?} is not an interior gate", g.kind)));
    }
    if let Some(&q) = g.qubits.iter().find(|&&q| q < 1 || q > state.n) {
        return Err(Error::InvalidCircuit(format!("qubit {q} outside 1..={}", state.n)));
    }
    let m = g.logical_matrix().expect("interior gate has a matrix");
    state.apply_matrix(&g.qubits, &m);
    Ok(())
}

pub fn run_gates(state: &mut LogicalState, gates: &[Gate]) -> Result<()> {
    gates.iter().try_for_each(|g| apply_gate(state, g))
}

/// State after the In layer and every interior gate, before the readout.
pub fn run(c: &Circuit) -> Result<LogicalState> {
    if c.n() > MAX_QUBITS {
        return Err(Error::TooLarge { what: "logical qubits", size: c.n(), limit: MAX_QUBITS });
    }
    let mut state = LogicalState::product(&c.preparations());
    run_gates(&mut state, &c.interior().cloned().collect::<Vec<_>>())?;
    Ok(state)
}

/// Σ_x ∏_q fin_q(x_q) ψ(x): the readout row contracts without conjugation,
/// matching Fin's realization as a row 2(a, b) back onto the vacuum.
pub fn readout_amplitude(state: &LogicalState, readouts: &[(C64, C64)]) -> C64 {
    state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(x, z)| {
            let w: C64 = (1..=state.n)
                .map(|q| {
                    let (a, b) = readouts[q - 1];
                    if state.bit(x, q) == 0 {
                        a
                    } else {
                        b
                    }
                })
                .product();
            w * z
        })
        .sum()
}

pub fn transition_amplitude(c: &Circuit) -> Result<C64> {
    Ok(readout_amplitude(&run(c)?, &c.readouts()))
}

/// Branch weights Σ|c|^power over indices with the postselected qubit at 1,
/// split by the result qubit's value.
pub fn branch_weights(s: &LogicalState, result: usize, postselect: usize, power: i32) -> [f64; 2] {
    let mut w = [0.0; 2];
    for (x, z) in s.amplitudes.iter().enumerate() {
        if s.bit(x, postselect) == 1 {
            w[s.bit(x, result)] += z.norm().powi(power);
        }
    }
    w
}

/// (p, p′): the probability of reading `correct` on the result qubit given
/// the postselection, from squared and from fourth-power amplitudes.
pub fn success_probabilities(s: &LogicalState, result: usize, postselect: usize, correct: usize) -> Result<(f64, f64)> {
    let w2 = branch_weights(s, result, postselect, 2);
    let w4 = branch_weights(s, result, postselect, 4);
    let (d2, d4) = (w2[0] + w2[1], w4[0] + w4[1]);
    if d2 == 0.0 || d4 == 0.0 {
        return Err(Error::ZeroProbability);
    }
    Ok((w2[correct] / d2, w4[correct] / d4))
}

/// Dense 2ⁿ × 2ⁿ operator of a gate sequence (used to cross-check macros).
pub fn gates_operator(n: usize, gates: &[Gate]) -> Result<CMat> {
    let dim = 1usize << n;
    let mut out = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![ZERO; dim];
        amps[col] = ONE;
        let mut s = LogicalState::from_amplitudes(n, amps);
        run_gates(&mut s, gates)?;
        for (r, z) in s.amplitudes.iter().enumerate() {
            out[(r, col)] = *z;
        }
    }
    Ok(out)
}

//! Circuit builders: complex conjugation, the uncompute pipeline, and the
//! counting circuit for Boolean functions.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use serde::{Deserialize, Serialize};

use super::compile::compile_circuit;
use super::{Circuit, Gate, GateKind};
use crate::aux_algebra::{Coupling, Encoding};
use crate::contraction::Tiling;
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ONE, ZERO};
use crate::statevector::{run_gates, LogicalState};

/// Gates realizing the entrywise complex conjugate of `g`.
pub fn conjugate_gate(g: &Gate) -> Vec<Gate> {
    let q = g.qubits.clone();
    let same = |e: Encoding| vec![Gate::new(GateKind::Encoded(e), q.clone())];
    match g.kind {
        GateKind::Cnot | GateKind::Hadamard => vec![g.clone()],
        GateKind::Encoded(e) => match e {
            Encoding::RotX(t) => same(Encoding::RotX(-t)),
            Encoding::RotZ(t) => same(Encoding::RotZ(-t)),
            // e^{iθY} is real
            Encoding::RotY(t) => same(Encoding::RotY(t)),
            // Ȳ = −Y = RotZ(π)·Y
            Encoding::PauliY => {
                vec![g.clone(), Gate::enc(Encoding::RotZ(FRAC_PI_2), q[0]), Gate::enc(Encoding::RotZ(FRAC_PI_2), q[0])]
            }
            Encoding::In { a, b } => same(Encoding::In { a: a.conj(), b: b.conj() }),
            Encoding::Fin { a, b } => same(Encoding::Fin { a: a.conj(), b: b.conj() }),
            Encoding::Projector { a, b } => same(Encoding::Projector { a: a.conj(), b: b.conj() }),
            Encoding::PauliX
            | Encoding::PauliZ
            | Encoding::Identity
            | Encoding::Cz
            | Encoding::AOp
            | Encoding::RawDyad { .. } => {
                vec![g.clone()]
            }
        },
    }
}

/// Conjugates every gate and shifts all qubits by `offset`.
pub fn conjugate_circuit(gates: &[Gate], offset: usize) -> Vec<Gate> {
    gates
        .iter()
        .flat_map(conjugate_gate)
        .map(|mut g| {
            g.qubits.iter_mut().for_each(|q| *q += offset);
            g
        })
        .collect()
}

/// Qubit roles of the uncompute pipeline (1-based, within the first copy).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineRoles {
    /// Postselected onto |1⟩.
    pub postselect: usize,
    /// Carries the answer.
    pub result: usize,
}

impl Default for PipelineRoles {
    fn default() -> Self {
        PipelineRoles { postselect: 1, result: 2 }
    }
}

fn plus_state() -> (C64, C64) {
    (c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0))
}

/// Runs `u` next to its conjugate, ties copy k to copy n+k with the
/// A-operation, postselects the flag qubit on |1⟩, projects every other
/// non-result qubit on |+⟩ and reads the result qubit out in the basis
/// state `readout`.
///
/// `u` supplies its In gates and interior; its own Fin gates are discarded.
pub fn build_uncompute_pipeline(u: &Circuit, roles: PipelineRoles, readout: usize) -> Result<Circuit> {
    let n = u.n();
    if n < 2 || roles.postselect == roles.result || roles.postselect > n || roles.result > n || readout > 1 {
        return Err(Error::InvalidCircuit(format!(
            "pipeline needs two distinct roles within 1..={n} and a 0/1 readout"
        )));
    }
    let body: Vec<Gate> =
        u.gates().iter().filter(|g| !matches!(g.kind, GateKind::Encoded(Encoding::Fin { .. }))).cloned().collect();
    let mut gates = body.clone();
    gates.extend(conjugate_circuit(&body, n));
    for k in 1..=n {
        gates.push(Gate::enc2(Encoding::AOp, k, n + k));
    }
    gates.push(Gate::enc(Encoding::Projector { a: ZERO, b: ONE }, roles.postselect));
    let (p, m) = plus_state();
    for q in (1..=2 * n).filter(|&q| q != roles.postselect && q != roles.result) {
        gates.push(Gate::enc(Encoding::Projector { a: p, b: m }, q));
    }
    for q in 1..=2 * n {
        let fin = if q == roles.result {
            if readout == 0 {
                Encoding::Fin { a: ONE, b: ZERO }
            } else {
                Encoding::Fin { a: ZERO, b: ONE }
            }
        } else {
            Encoding::Fin { a: p, b: m }
        };
        gates.push(Gate::enc(fin, q));
    }
    Circuit::new(2 * n, gates)
}

/// Truth table of f: {0,1}ⁿ → {0,1}; entry x reads x₁ as its most significant bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanFunction {
    n: usize,
    truth: Vec<bool>,
    /// Reversible gates computing f into qubit n+1, if supplied that way.
    #[serde(skip)]
    gates: Option<Vec<Gate>>,
}

pub const MAX_VARIABLES: usize = 4;

impl BooleanFunction {
    pub fn from_truth_table(n: usize, truth: Vec<bool>) -> Result<Self> {
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::TooLarge { what: "variable count", size: n, limit: MAX_VARIABLES });
        }
        if truth.len() != 1 << n {
            return Err(Error::InvalidCircuit(format!("truth table needs {} entries, got {}", 1 << n, truth.len())));
        }
        Ok(BooleanFunction { n, truth, gates: None })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> bool) -> Result<Self> {
        Self::from_truth_table(n, (0..1usize << n).map(f).collect())
    }

    /// Interprets interior gates on qubits 1..=n+1 as a classical oracle
    /// |x⟩|0⟩ ↦ (phase)|x⟩|f(x)⟩ and records its truth table.
    pub fn from_gates(n: usize, gates: Vec<Gate>) -> Result<Self> {
        if n == 0 || n > MAX_VARIABLES {
            return Err(Error::TooLarge { what: "variable count", size: n, limit: MAX_VARIABLES });
        }
        if let Some(g) = gates.iter().find(|g| g.boundary() != crate::aux_algebra::Boundary::Gate) {
            return Err(Error::NotClassicalOracle(format!("{:?} is not an interior gate", g.kind)));
        }
        let m = n + 1;
        let mut truth = Vec::with_capacity(1 << n);
        for x in 0..1usize << n {
            let mut amps = vec![ZERO; 1 << m];
            amps[x << 1] = ONE;
            let mut state = LogicalState::from_amplitudes(m, amps);
            run_gates(&mut state, &gates)?;
            let out = &state.amplitudes;
            let (a0, a1) = (out[x << 1].norm(), out[(x << 1) | 1].norm());
            let rest: f64 = out.iter().map(|z| z.norm_sqr()).sum::<f64>() - a0 * a0 - a1 * a1;
            let bit = if (a0 - 1.0).abs() < 1e-9 && a1 < 1e-9 {
                false
            } else if (a1 - 1.0).abs() < 1e-9 && a0 < 1e-9 {
                true
            } else {
                return Err(Error::NotClassicalOracle(format!("input {x:0n$b} does not map to a basis state")));
            };
            if rest > 1e-12 {
                return Err(Error::NotClassicalOracle(format!("input {x:0n$b} changes the variable register")));
            }
            truth.push(bit);
        }
        Ok(BooleanFunction { n, truth, gates: Some(gates) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn truth(&self) -> &[bool] {
        &self.truth
    }

    pub fn eval(&self, x: usize) -> bool {
        self.truth[x]
    }
}

pub fn brute_force_count(f: &BooleanFunction) -> usize {
    f.truth.iter().filter(|&&b| b).count()
}

/// Uniformly controlled RotY writing f(x) into qubit n+1: a Gray-code
/// sequence of RotY(φ_k) on the ancilla alternating with CNOTs from the
/// variable whose bit flips between consecutive code words.
pub fn oracle_gates(f: &BooleanFunction) -> Vec<Gate> {
    if let Some(g) = &f.gates {
        return g.clone();
    }
    let n = f.n;
    let size = 1usize << n;
    let ancilla = n + 1;
    // RotY(−π/2)|0⟩ = |1⟩
    let theta: Vec<f64> = f.truth.iter().map(|&b| if b { -FRAC_PI_2 } else { 0.0 }).collect();
    let gray = |k: usize| k ^ (k >> 1);
    let mut gates = Vec::new();
    for k in 0..size {
        let g = gray(k);
        let phi: f64 = (0..size).map(|x| if (x & g).count_ones() % 2 == 0 { theta[x] } else { -theta[x] }).sum::<f64>()
            / size as f64;
        if phi.abs() > 1e-15 {
            gates.push(Gate::enc(Encoding::RotY(phi), ancilla));
        }
        let flip = (g ^ gray((k + 1) % size)).trailing_zeros() as usize;
        // bit b of x belongs to variable n − b
        gates.push(Gate::cnot(n - flip, ancilla));
    }
    gates
}

/// Counting circuit for f with the result read as `readout` on the ancilla
/// of the first copy.
pub fn build_count_sat_circuit(f: &BooleanFunction, readout: usize) -> Result<Circuit> {
    let n = f.n;
    let m = n + 1;
    let (p, q) = plus_state();
    let mut body = Vec::new();
    for v in 1..=n {
        body.push(Gate::enc(Encoding::In { a: p, b: q }, v));
    }
    body.push(Gate::enc(Encoding::In { a: ONE, b: ZERO }, m));
    body.extend(oracle_gates(f));
    let mut gates = body.clone();
    gates.extend(conjugate_circuit(&body, m));
    for k in 1..=m {
        gates.push(Gate::enc2(Encoding::AOp, k, m + k));
    }
    for qb in 1..=2 * m {
        let fin = if qb == m {
            if readout == 0 {
                Encoding::Fin { a: ONE, b: ZERO }
            } else {
                Encoding::Fin { a: ZERO, b: ONE }
            }
        } else {
            Encoding::Fin { a: p, b: q }
        };
        gates.push(Gate::enc(fin, qb));
    }
    Circuit::new(2 * m, gates)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountReport {
    pub count: usize,
    /// 2ⁿ·A₁/(A₀+A₁) before rounding.
    pub estimate: f64,
    /// Logical amplitudes of the two readouts recovered from the encoders.
    pub amplitudes: [C64; 2],
    pub chain_length: usize,
    pub chains: usize,
}

/// Counts satisfying assignments from the encoder expectations of the two
/// readout circuits.
pub fn count_satisfying(f: &BooleanFunction, coupling: Coupling) -> Result<CountReport> {
    let mut amps = [ZERO; 2];
    let mut shape = (0, 0);
    for (r, slot) in amps.iter_mut().enumerate() {
        let compiled = compile_circuit(&build_count_sat_circuit(f, r)?, coupling)?;
        shape = (compiled.layout.len, compiled.layout.n);
        *slot = compiled.evaluate(Tiling::Strict)?.amplitude;
    }
    let total = amps[0] + amps[1];
    if total.norm() == 0.0 {
        return Err(Error::ZeroProbability);
    }
    let estimate = ((1usize << f.n) as f64 * amps[1] / total).re;
    Ok(CountReport {
        count: estimate.round().max(0.0) as usize,
        estimate,
        amplitudes: amps,
        chain_length: shape.0,
        chains: shape.1,
    })
}

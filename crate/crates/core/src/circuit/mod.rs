//! Logical circuits over n qubits and their lowering onto encoders.

mod compile;
mod parse;
mod pipeline;

pub use compile::{
    compile_circuit, compile_gate, hadamard_macro, lower, place_polynomial, raw_cnot_encoder, rewrite_cnot, schedule,
    tilde_cnot_encoder, CircuitAmplitude, CompiledCircuit, EncoderSource, Layout, Lowered, PlacedEncoder,
};
pub use parse::{parse_circuit, parse_complex, parse_function, parse_real, FunctionSpec};
pub use pipeline::{
    brute_force_count, build_count_sat_circuit, build_uncompute_pipeline, conjugate_circuit, conjugate_gate,
    count_satisfying, oracle_gates, BooleanFunction, CountReport, PipelineRoles,
};

use serde::{Deserialize, Serialize};

use crate::aux_algebra::{Boundary, Encoding};
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, ONE, ZERO};

/// Primitive encodings plus the two macros the compiler rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GateKind {
    Encoded(Encoding),
    /// Controlled-NOT, control first.
    Cnot,
    Hadamard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    /// 1-based logical qubits.
    pub qubits: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<usize>) -> Self {
        Gate { kind, qubits }
    }

    pub fn enc(encoding: Encoding, q: usize) -> Self {
        Gate::new(GateKind::Encoded(encoding), vec![q])
    }

    pub fn enc2(encoding: Encoding, q1: usize, q2: usize) -> Self {
        Gate::new(GateKind::Encoded(encoding), vec![q1, q2])
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![control, target])
    }

    pub fn hadamard(q: usize) -> Self {
        Gate::new(GateKind::Hadamard, vec![q])
    }

    pub fn arity(&self) -> usize {
        match self.kind {
            GateKind::Encoded(e) => e.arity(),
            GateKind::Cnot => 2,
            GateKind::Hadamard => 1,
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self.kind {
            GateKind::Encoded(e) => e.boundary(),
            _ => Boundary::Gate,
        }
    }

    pub fn encoding(&self) -> Option<Encoding> {
        match self.kind {
            GateKind::Encoded(e) => Some(e),
            _ => None,
        }
    }

    pub fn is_macro(&self) -> bool {
        !matches!(self.kind, GateKind::Encoded(_))
    }

    /// Logical action of an interior gate, qubits in the listed order.
    pub fn logical_matrix(&self) -> Option<CMat> {
        match self.kind {
            GateKind::Encoded(e) => e.gate_matrix(),
            GateKind::Cnot => {
                let mut m = CMat::zeros(4, 4);
                for (r, col) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
                    m[(r, col)] = ONE;
                }
                Some(m)
            }
            GateKind::Hadamard => {
                let s = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some(CMat::from_row_slice(2, 2, &[s, s, s, -s]))
            }
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let GateKind::Encoded(e) = self.kind {
            e.validate()?;
        }
        if self.qubits.len() != self.arity() {
            return Err(Error::InvalidCircuit(format!(
                "{:?} acts on {} qubit(s), got {}",
                self.kind,
                self.arity(),
                self.qubits.len()
            )));
        }
        if let Some(q) = self.qubits.iter().find(|&&q| q < 1 || q > n) {
            return Err(Error::InvalidCircuit(format!("qubit {q} outside 1..={n}")));
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(Error::InvalidCircuit(format!("{:?} needs two distinct qubits", self.kind)));
        }
        Ok(())
    }
}

/// A validated circuit: every qubit is prepared by exactly one In before any
/// other gate touches it and read out by exactly one Fin after the last one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n: usize, gates: Vec<Gate>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidCircuit("circuit needs at least one qubit".into()));
        }
        // 0 = not prepared, 1 = live, 2 = read out
        let mut state = vec![0u8; n + 1];
        for (i, g) in gates.iter().enumerate() {
            g.validate(n).map_err(|e| match e {
                Error::InvalidCircuit(m) => Error::InvalidCircuit(format!("gate {}: {m}", i + 1)),
                other => other,
            })?;
            for &q in &g.qubits {
                let s = &mut state[q];
                match (g.boundary(), *s) {
                    (Boundary::Prepare, 0) => *s = 1,
                    (Boundary::Prepare, _) => {
                        return Err(Error::InvalidCircuit(format!("gate {}: qubit {q} prepared twice", i + 1)))
                    }
                    (_, 0) => return Err(Error::InvalidCircuit(format!("gate {}: qubit {q} used before In", i + 1))),
                    (_, 2) => return Err(Error::InvalidCircuit(format!("gate {}: qubit {q} used after Fin", i + 1))),
                    (Boundary::Readout, _) => *s = 2,
                    (Boundary::Gate, _) => {}
                }
            }
        }
        if let Some(q) = (1..=n).find(|&q| state[q] != 2) {
            return Err(Error::InvalidCircuit(format!("qubit {q} lacks an In/Fin pair")));
        }
        Ok(Circuit { n, gates })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    /// Gates strictly between the preparation and the readout.
    pub fn interior(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.boundary() == Boundary::Gate)
    }

    /// (a, b) of the In gate on each qubit.
    pub fn preparations(&self) -> Vec<(crate::linalg::C64, crate::linalg::C64)> {
        let mut out = vec![(ONE, ZERO); self.n];
        for g in &self.gates {
            if let GateKind::Encoded(Encoding::In { a, b }) = g.kind {
                out[g.qubits[0] - 1] = (a, b);
            }
        }
        out
    }

    /// (a, b) of the Fin gate on each qubit.
    pub fn readouts(&self) -> Vec<(crate::linalg::C64, crate::linalg::C64)> {
        let mut out = vec![(ONE, ZERO); self.n];
        for g in &self.gates {
            if let GateKind::Encoded(Encoding::Fin { a, b }) = g.kind {
                out[g.qubits[0] - 1] = (a, b);
            }
        }
        out
    }
}

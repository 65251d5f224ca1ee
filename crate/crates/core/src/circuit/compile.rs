//! Macro lowering, layer scheduling and encoder emission.
//!
//! Chain k carries logical qubit k. Site 1 holds the In encoder, site L the
//! Fin encoder, and interior layer ℓ (0-based) the two sites 2+2ℓ and 3+2ℓ.
//! A quadratic 𝔸-monomial 𝔸_{s₀}𝔸_{s₁} placed at sites (j, j+1) becomes the
//! physical string σ^{s₁†}_j σ^{s₀†}_{j+1} with weight 1/(f_{s₀} f_{s₁}): the
//! lower site is contracted first.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::{Circuit, Gate, GateKind};
use crate::aux_algebra::{AuxPolynomial, Boundary, Coupling, Encoding};
use crate::contraction::{contract_encoders, Contraction, Tiling};
use crate::encoder::{Encoder, EncoderTerm, SiteRef};
use crate::error::{Error, Result};
use crate::linalg::{c, C64, ONE};
use crate::mpo::MpoNess;

/// Macro-free circuit and the global phase the macros introduced: the
/// lowered circuit's operator is `phase` times the original one.
#[derive(Debug, Clone, PartialEq)]
pub struct Lowered {
    pub circuit: Circuit,
    pub phase: C64,
}

/// CNOT(k → l) as RotY(π/4) on l, CZ, RotY(−π/4) on l, in application order,
/// with explicit identities on the control so that both chains advance
/// together.
pub fn rewrite_cnot(g: &Gate) -> Result<Vec<Gate>> {
    if g.kind != GateKind::Cnot || g.qubits.len() != 2 {
        return Err(Error::InvalidCircuit("rewrite_cnot expects a CNOT gate".into()));
    }
    let (k, l) = (g.qubits[0], g.qubits[1]);
    Ok(vec![
        Gate::enc(Encoding::Identity, k),
        Gate::enc(Encoding::RotY(FRAC_PI_4), l),
        Gate::enc2(Encoding::Cz, k, l),
        Gate::enc(Encoding::Identity, k),
        Gate::enc(Encoding::RotY(-FRAC_PI_4), l),
    ])
}

/// Hadamard as RotY(π/4) then RotZ(π/2). The pair realizes i·H, so the
/// returned phase is i.
pub fn hadamard_macro(q: usize) -> (Vec<Gate>, C64) {
    (vec![Gate::enc(Encoding::RotY(FRAC_PI_4), q), Gate::enc(Encoding::RotZ(2.0 * FRAC_PI_4), q)], c(0.0, 1.0))
}

pub fn lower(circuit: &Circuit) -> Result<Lowered> {
    let mut gates = Vec::with_capacity(circuit.gates().len());
    let mut phase = ONE;
    for g in circuit.gates() {
        match g.kind {
            GateKind::Encoded(_) => gates.push(g.clone()),
            GateKind::Cnot => gates.extend(rewrite_cnot(g)?),
            GateKind::Hadamard => {
                let (seq, p) = hadamard_macro(g.qubits[0]);
                gates.extend(seq);
                phase *= p;
            }
        }
    }
    Ok(Lowered { circuit: Circuit::new(circuit.n(), gates)?, phase })
}

/// ASAP layering of a macro-free circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub n: usize,
    /// Common chain length 2 + 2·layers.
    pub len: usize,
    pub layers: usize,
    /// Interior layer of each gate (None for In and Fin).
    pub layer_of_gate: Vec<Option<usize>>,
    /// Idle (qubit, layer) slots, filled with encoded identities.
    pub pads: Vec<(usize, usize)>,
}

impl Layout {
    /// First physical site of an interior layer.
    pub fn site_of_layer(&self, layer: usize) -> usize {
        2 + 2 * layer
    }

    /// Starting site of a gate.
    pub fn site_of_gate(&self, circuit: &Circuit, index: usize) -> usize {
        match circuit.gates()[index].boundary() {
            Boundary::Prepare => 1,
            Boundary::Readout => self.len,
            Boundary::Gate => self.site_of_layer(self.layer_of_gate[index].expect("interior gate is scheduled")),
        }
    }
}

pub fn schedule(circuit: &Circuit) -> Result<Layout> {
    let n = circuit.n();
    let mut free = vec![0usize; n + 1];
    let mut layer_of_gate = Vec::with_capacity(circuit.gates().len());
    let mut busy: Vec<Vec<bool>> = vec![Vec::new(); n + 1];
    for g in circuit.gates() {
        if g.is_macro() {
            return Err(Error::InvalidCircuit("macros must be lowered before scheduling".into()));
        }
        if g.boundary() != Boundary::Gate {
            layer_of_gate.push(None);
            continue;
        }
        let layer = g.qubits.iter().map(|&q| free[q]).max().unwrap_or(0);
        for &q in &g.qubits {
            free[q] = layer + 1;
            if busy[q].len() <= layer {
                busy[q].resize(layer + 1, false);
            }
            busy[q][layer] = true;
        }
        layer_of_gate.push(Some(layer));
    }
    let layers = free.iter().copied().max().unwrap_or(0);
    let mut pads = Vec::new();
    for (q, row) in busy.iter().enumerate().skip(1) {
        for layer in 0..layers {
            if !row.get(layer).copied().unwrap_or(false) {
                pads.push((q, layer));
            }
        }
    }
    Ok(Layout { n, len: 2 + 2 * layers, layers, layer_of_gate, pads })
}

/// Places an 𝔸-polynomial with one monomial per qubit; `starts[q]` is the
/// (chain, first site) of the q-th factor.
pub fn place_polynomial(poly: &AuxPolynomial, starts: &[(usize, usize)]) -> Result<Encoder> {
    assert_eq!(starts.len(), poly.arity, "one start per qubit");
    let mut terms = Vec::with_capacity(poly.terms.len());
    for t in &poly.terms {
        let mut coeff = t.coeff;
        let mut labels = BTreeMap::new();
        for (mono, &(chain, start)) in t.factors.iter().zip(starts) {
            for (i, s) in mono.0.iter().rev().enumerate() {
                labels.insert(SiteRef::new(chain, start + i), s.dagger());
                coeff /= s.hs_norm();
            }
        }
        terms.push(EncoderTerm { coeff, labels });
    }
    Encoder::new(terms)
}

/// Encoder of a primitive gate whose first site on every chain is `site`.
pub fn compile_gate(g: &Gate, site: usize, coupling: Coupling) -> Result<Encoder> {
    let enc = g.encoding().ok_or_else(|| Error::InvalidCircuit("macros must be lowered before compiling".into()))?;
    let poly = enc.aux_polynomial(coupling)?;
    let starts: Vec<(usize, usize)> = g.qubits.iter().map(|&q| (q, site)).collect();
    place_polynomial(&poly, &starts)
}

/// Direct dyad expansion of CNOT on chains (k, l) from `site`: four spins,
/// not normal.
pub fn raw_cnot_encoder(k: usize, l: usize, site: usize, coupling: Coupling) -> Result<Encoder> {
    let m = Gate::cnot(1, 2).logical_matrix().expect("cnot matrix");
    place_polynomial(&AuxPolynomial::from_two_qubit(&m, coupling), &[(k, site), (l, site)])
}

/// The rewritten CNOT on chains (k, l) as one product encoder spanning three
/// layers (twelve spins) starting at `site`.
pub fn tilde_cnot_encoder(k: usize, l: usize, site: usize, coupling: Coupling) -> Result<Encoder> {
    let gates = rewrite_cnot(&Gate::cnot(k, l))?;
    let offsets = [0, 0, 2, 4, 4];
    let mut product: Option<Encoder> = None;
    for (g, off) in gates.iter().zip(offsets) {
        let e = compile_gate(g, site + off, coupling)?;
        product = Some(match product {
            None => e,
            Some(p) => p.product(&e)?,
        });
    }
    Ok(product.expect("non-empty rewrite"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EncoderSource {
    /// Index into the lowered circuit's gate list.
    Gate(usize),
    /// Identity pad on (qubit, layer).
    Pad { qubit: usize, layer: usize },
}

#[derive(Debug, Clone)]
pub struct PlacedEncoder {
    pub source: EncoderSource,
    pub encoder: Encoder,
}

#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    pub lowered: Circuit,
    pub layout: Layout,
    pub coupling: Coupling,
    pub encoders: Vec<PlacedEncoder>,
    /// Phase picked up while lowering macros.
    pub macro_phase: C64,
}

/// Expectation of a compiled circuit and the logical amplitude it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitAmplitude {
    pub contraction: Contraction,
    /// raw expectation = constant × logical amplitude.
    pub constant: C64,
    pub amplitude: C64,
}

pub fn compile_circuit(circuit: &Circuit, coupling: Coupling) -> Result<CompiledCircuit> {
    let Lowered { circuit: lowered, phase } = lower(circuit)?;
    let layout = schedule(&lowered)?;
    let mut encoders = Vec::with_capacity(lowered.gates().len() + layout.pads.len());
    for (i, g) in lowered.gates().iter().enumerate() {
        let site = layout.site_of_gate(&lowered, i);
        encoders.push(PlacedEncoder { source: EncoderSource::Gate(i), encoder: compile_gate(g, site, coupling)? });
    }
    for &(qubit, layer) in &layout.pads {
        let pad = compile_gate(&Gate::enc(Encoding::Identity, qubit), layout.site_of_layer(layer), coupling)?;
        encoders.push(PlacedEncoder { source: EncoderSource::Pad { qubit, layer }, encoder: pad });
    }
    Ok(CompiledCircuit { lowered, layout, coupling, encoders, macro_phase: phase })
}

impl CompiledCircuit {
    pub fn chains(&self) -> Result<Vec<MpoNess>> {
        (0..self.layout.n).map(|_| MpoNess::new(self.layout.len, self.coupling)).collect()
    }

    pub fn encoder_list(&self) -> Vec<Encoder> {
        self.encoders.iter().map(|p| p.encoder.clone()).collect()
    }

    /// Auxiliary amplitude per unit logical amplitude: each qubit's In and Fin
    /// contribute a factor 2, times the macro phase.
    pub fn aux_constant(&self) -> C64 {
        self.macro_phase * 4f64.powi(self.layout.n as i32)
    }

    pub fn evaluate(&self, tiling: Tiling) -> Result<CircuitAmplitude> {
        let chains = self.chains()?;
        let contraction = contract_encoders(&chains, &self.encoder_list(), tiling)?;
        let constant = self.aux_constant() / contraction.norm;
        Ok(CircuitAmplitude { contraction, constant, amplitude: contraction.aux_amplitude / self.aux_constant() })
    }

    /// Encoders that fail the normality test, with their defects.
    pub fn non_normal(&self) -> Vec<(EncoderSource, f64)> {
        self.encoders
            .iter()
            .filter(|p| !p.encoder.is_normal())
            .map(|p| (p.source, p.encoder.relative_normality_defect().unwrap_or(f64::NAN)))
            .collect()
    }
}

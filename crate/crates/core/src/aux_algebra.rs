//! Auxiliary-space matrices of the XX steady state and the logical encodings
//! built from them.
//!
//! A chain's steady state is an MPO whose bond space is spanned by {|0⟩, |1⟩}.
//! The density matrix `S S†` lives on the doubled bond space (index order:
//! first factor major, so |0⟩⊗|1⟩ has index 1). Two of its basis states carry
//! a logical qubit: |𝟶⟩ = |0⟩⊗|1⟩ and |𝟷⟩ = |1⟩⊗|0⟩. Every gate on that qubit
//! is written as a polynomial in the doubled matrices 𝔸_s restricted to that
//! two-dimensional subspace.

use nalgebra as na;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat, C64, I, ONE, ZERO};
use crate::pauli::PauliLabel;

/// Dissipation strength λ of the boundary baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coupling(f64);

impl Coupling {
    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda > 0.0 {
            Ok(Coupling(lambda))
        } else {
            Err(Error::InvalidCoupling(lambda))
        }
    }

    pub fn lambda(self) -> f64 {
        self.0
    }

    /// λ³ + 16λ, the denominator shared by all two-spin encoders.
    pub fn denominator(self) -> f64 {
        let l = self.0;
        l * l * l + 16.0 * l
    }

    /// 32i / (λ³ + 16λ): the scale turning a quadratic 𝔸-monomial into a dyad.
    pub fn dyad_scale(self) -> C64 {
        c(0.0, 32.0 / self.denominator())
    }
}

/// Bond matrices A₀, A₊, A₋ of the XX chain's S operator.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxSite {
    pub a0: na::Matrix2<C64>,
    pub a_plus: na::Matrix2<C64>,
    pub a_minus: na::Matrix2<C64>,
}

impl AuxSite {
    pub fn build(coupling: Coupling) -> Self {
        let l = coupling.lambda();
        AuxSite {
            a0: na::Matrix2::new(ONE, ZERO, ZERO, c(0.0, l / 4.0)),
            a_plus: na::Matrix2::new(ZERO, c(0.0, l / 2.0), ZERO, ZERO),
            a_minus: na::Matrix2::new(ZERO, ZERO, ONE, ZERO),
        }
    }

    /// A_s for s ∈ {0, +, −}; S has no σᶻ component.
    pub fn get(&self, label: PauliLabel) -> Option<&na::Matrix2<C64>> {
        match label {
            PauliLabel::Id => Some(&self.a0),
            PauliLabel::Plus => Some(&self.a_plus),
            PauliLabel::Minus => Some(&self.a_minus),
            PauliLabel::Z => None,
        }
    }
}

/// Doubled bond matrices 𝔸_s carrying ρ∞ ∝ S S†.
#[derive(Debug, Clone, PartialEq)]
pub struct DoubledAuxSite {
    pub b0: na::Matrix4<C64>,
    pub bz: na::Matrix4<C64>,
    pub b_plus: na::Matrix4<C64>,
    pub b_minus: na::Matrix4<C64>,
}

fn kron2(a: &na::Matrix2<C64>, b: &na::Matrix2<C64>) -> na::Matrix4<C64> {
    na::Matrix4::from_fn(|i, j| a[(i / 2, j / 2)] * b[(i % 2, j % 2)])
}

impl DoubledAuxSite {
    pub fn build(site: &AuxSite) -> Self {
        let conj = |m: &na::Matrix2<C64>| m.map(|z| z.conj());
        let half = c(0.5, 0.0);
        let (a0, ap, am) = (&site.a0, &site.a_plus, &site.a_minus);
        let (a0b, apb, amb) = (conj(a0), conj(ap), conj(am));
        DoubledAuxSite {
            b0: kron2(a0, &a0b) + (kron2(ap, &apb) + kron2(am, &amb)) * half,
            bz: (kron2(ap, &apb) - kron2(am, &amb)) * half,
            b_plus: kron2(ap, &a0b) + kron2(a0, &amb),
            b_minus: kron2(am, &a0b) + kron2(a0, &apb),
        }
    }

    pub fn for_coupling(coupling: Coupling) -> Self {
        Self::build(&AuxSite::build(coupling))
    }

    pub fn get(&self, label: PauliLabel) -> &na::Matrix4<C64> {
        match label {
            PauliLabel::Id => &self.b0,
            PauliLabel::Z => &self.bz,
            PauliLabel::Plus => &self.b_plus,
            PauliLabel::Minus => &self.b_minus,
        }
    }
}

/// Positions of the vacuum |0⟩⊗|0⟩ and the logical basis inside the doubled
/// bond space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LogicalEmbedding {
    pub vacuum: usize,
    pub ket0: usize,
    pub ket1: usize,
}

pub const EMBEDDING: LogicalEmbedding = LogicalEmbedding { vacuum: 0, ket0: 1, ket1: 2 };

impl LogicalEmbedding {
    pub fn logical(&self, bit: usize) -> usize {
        if bit == 0 {
            self.ket0
        } else {
            self.ket1
        }
    }

    /// Doubled-space index of a multi-qubit logical basis state, qubit 0 major.
    pub fn logical_index(&self, bits: &[usize]) -> usize {
        bits.iter().fold(0, |acc, &b| acc * 4 + self.logical(b))
    }
}

/// Where an encoding sits in the auxiliary transition amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Maps the vacuum into the logical subspace.
    Prepare,
    /// Logical subspace to itself.
    Gate,
    /// Maps the logical subspace back onto the vacuum.
    Readout,
}

/// Operations that can be encoded on one or two logical qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Encoding {
    In { a: C64, b: C64 },
    RotX(f64),
    RotY(f64),
    RotZ(f64),
    PauliX,
    PauliY,
    PauliZ,
    Identity,
    Cz,
    Projector { a: C64, b: C64 },
    Fin { a: C64, b: C64 },
    AOp,
    RawDyad { row: u8, col: u8 },
}

const AMPLITUDE_TOL: f64 = 1e-9;

fn check_amplitudes(a: C64, b: C64) -> Result<()> {
    let norm = a.norm_sqr() + b.norm_sqr();
    if (norm - 1.0).abs() > AMPLITUDE_TOL || !norm.is_finite() {
        return Err(Error::InvalidAmplitudes { a: a.to_string(), b: b.to_string(), norm });
    }
    Ok(())
}

pub fn pauli_x() -> na::Matrix2<C64> {
    na::Matrix2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> na::Matrix2<C64> {
    na::Matrix2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> na::Matrix2<C64> {
    na::Matrix2::new(ONE, ZERO, ZERO, -ONE)
}

/// e^{iθG} = cos θ·1 + i sin θ·G for an involutory G.
pub fn rotation(generator: &na::Matrix2<C64>, theta: f64) -> na::Matrix2<C64> {
    na::Matrix2::identity() * c(theta.cos(), 0.0) + generator * c(0.0, theta.sin())
}

fn to_dense<R: na::Dim, Cc: na::Dim, S>(m: &na::Matrix<C64, R, Cc, S>) -> CMat
where
    S: na::RawStorage<C64, R, Cc>,
{
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

impl Encoding {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Encoding::In { a, b } | Encoding::Projector { a, b } | Encoding::Fin { a, b } => check_amplitudes(a, b),
            Encoding::RotX(t) | Encoding::RotY(t) | Encoding::RotZ(t) if !t.is_finite() => {
                Err(Error::InvalidCircuit(format!("rotation angle {t} is not finite")))
            }
            Encoding::RawDyad { row, col } if row > 1 || col > 1 => {
                Err(Error::InvalidCircuit(format!("dyad indices ({row}, {col}) must be 0 or 1")))
            }
            _ => Ok(()),
        }
    }

    /// Number of logical qubits the encoding acts on.
    pub fn arity(&self) -> usize {
        match self {
            Encoding::Cz | Encoding::AOp => 2,
            _ => 1,
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self {
            Encoding::In { .. } => Boundary::Prepare,
            Encoding::Fin { .. } => Boundary::Readout,
            _ => Boundary::Gate,
        }
    }

    /// Logical action of an interior gate (2×2 or 4×4, qubit order as given).
    /// `None` for the boundary encodings In and Fin.
    pub fn gate_matrix(&self) -> Option<CMat> {
        let single = |m: na::Matrix2<C64>| Some(to_dense(&m));
        match *self {
            Encoding::RotX(t) => single(rotation(&pauli_x(), t)),
            Encoding::RotY(t) => single(rotation(&pauli_y(), t)),
            Encoding::RotZ(t) => single(rotation(&pauli_z(), t)),
            Encoding::PauliX => single(pauli_x()),
            Encoding::PauliY => single(pauli_y()),
            Encoding::PauliZ => single(pauli_z()),
            Encoding::Identity => single(na::Matrix2::identity()),
            Encoding::Projector { a, b } => {
                single(na::Matrix2::new(a * a.conj(), a * b.conj(), a.conj() * b, b * b.conj()))
            }
            Encoding::RawDyad { row, col } => {
                let mut m = na::Matrix2::zeros();
                m[(row as usize, col as usize)] = ONE;
                single(m)
            }
            Encoding::Cz => Some(CMat::from_diagonal(&na::DVector::from_vec(vec![ONE, ONE, ONE, -ONE]))),
            Encoding::AOp => Some(CMat::from_diagonal(&na::DVector::from_vec(vec![ONE, ZERO, ZERO, ONE]))),
            Encoding::In { .. } | Encoding::Fin { .. } => None,
        }
    }

    /// Matrix the encoding realizes on the logical subspace, i.e. the
    /// restriction of its 𝔸-polynomial. Interior gates give their logical
    /// gate exactly; In gives the 2×1 column 2(a, b)ᵀ out of the vacuum and
    /// Fin gives the 1×2 row 2(a, b) back onto it.
    pub fn matrix(&self) -> Result<CMat> {
        self.validate()?;
        Ok(match *self {
            Encoding::In { a, b } => CMat::from_column_slice(2, 1, &[a * 2.0, b * 2.0]),
            Encoding::Fin { a, b } => CMat::from_row_slice(1, 2, &[a * 2.0, b * 2.0]),
            _ => self.gate_matrix().expect("interior gate"),
        })
    }

    /// Expansion of the encoding as a polynomial in the doubled matrices 𝔸_s.
    pub fn aux_polynomial(&self, coupling: Coupling) -> Result<AuxPolynomial> {
        self.validate()?;
        Ok(match *self {
            Encoding::In { a, b } => AuxPolynomial::new(
                1,
                vec![
                    AuxTerm::single(a * 2.0, vec![PauliLabel::Plus]),
                    AuxTerm::single(b * 2.0, vec![PauliLabel::Minus]),
                ],
            ),
            Encoding::Fin { a, b } => {
                let scale = c(0.0, 4.0 / coupling.lambda());
                AuxPolynomial::new(
                    1,
                    vec![
                        AuxTerm::single(scale * a, vec![PauliLabel::Minus]),
                        AuxTerm::single(-scale * b, vec![PauliLabel::Plus]),
                    ],
                )
            }
            _ => {
                let g = self.gate_matrix().expect("interior gate");
                if g.nrows() == 2 {
                    AuxPolynomial::from_single_qubit(&g, coupling)
                } else {
                    AuxPolynomial::from_two_qubit(&g, coupling)
                }
            }
        })
    }
}

/// Product 𝔸_{s₀} 𝔸_{s₁} ⋯ written left to right as operator composition, so
/// the last label acts first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AuxMonomial(pub Vec<PauliLabel>);

impl AuxMonomial {
    pub fn matrix(&self, doubled: &DoubledAuxSite) -> na::Matrix4<C64> {
        self.0.iter().fold(na::Matrix4::identity(), |acc, &s| acc * doubled.get(s))
    }
}

/// `coeff · ⊗_q monomial_q` over the qubits an encoding touches.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxTerm {
    pub coeff: C64,
    pub factors: Vec<AuxMonomial>,
}

impl AuxTerm {
    fn single(coeff: C64, labels: Vec<PauliLabel>) -> Self {
        AuxTerm { coeff, factors: vec![AuxMonomial(labels)] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxPolynomial {
    pub arity: usize,
    pub terms: Vec<AuxTerm>,
}

/// Quadratic monomial and coefficient (in units of 32i/(λ³+16λ)) realizing
/// the dyad |r⟩⟨c| on the logical subspace.
pub fn dyad_monomial(row: usize, col: usize) -> (f64, [PauliLabel; 2]) {
    use PauliLabel::{Minus, Plus};
    match (row, col) {
        (0, 0) => (1.0, [Plus, Minus]),
        (0, 1) => (-1.0, [Plus, Plus]),
        (1, 0) => (1.0, [Minus, Minus]),
        (1, 1) => (-1.0, [Minus, Plus]),
        _ => panic!("dyad index out of range"),
    }
}

const DROP_TOL: f64 = 1e-15;

impl AuxPolynomial {
    fn new(arity: usize, terms: Vec<AuxTerm>) -> Self {
        let mut merged: Vec<AuxTerm> = Vec::new();
        for t in terms {
            match merged.iter_mut().find(|m| m.factors == t.factors) {
                Some(m) => m.coeff += t.coeff,
                None => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff.norm() > DROP_TOL);
        AuxPolynomial { arity, terms: merged }
    }

    /// Dyad expansion of an arbitrary 2×2 logical operator.
    pub fn from_single_qubit(g: &CMat, coupling: Coupling) -> Self {
        let scale = coupling.dyad_scale();
        let mut terms = Vec::new();
        for r in 0..2 {
            for col in 0..2 {
                let (sign, mono) = dyad_monomial(r, col);
                terms.push(AuxTerm::single(g[(r, col)] * scale * sign, mono.to_vec()));
            }
        }
        Self::new(1, terms)
    }

    /// Dyad expansion of an arbitrary 4×4 two-qubit logical operator.
    pub fn from_two_qubit(g: &CMat, coupling: Coupling) -> Self {
        let scale = coupling.dyad_scale();
        let mut terms = Vec::new();
        for row in 0..4 {
            for col in 0..4 {
                let (s1, m1) = dyad_monomial(row >> 1, col >> 1);
                let (s2, m2) = dyad_monomial(row & 1, col & 1);
                terms.push(AuxTerm {
                    coeff: g[(row, col)] * scale * scale * (s1 * s2),
                    factors: vec![AuxMonomial(m1.to_vec()), AuxMonomial(m2.to_vec())],
                });
            }
        }
        Self::new(2, terms)
    }

    /// Full operator on the doubled bond space(s): 4×4 or 16×16.
    pub fn evaluate(&self, doubled: &DoubledAuxSite) -> CMat {
        let dim = 4usize.pow(self.arity as u32);
        let mut out = CMat::zeros(dim, dim);
        for t in &self.terms {
            let op = t
                .factors
                .iter()
                .map(|m| to_dense(&m.matrix(doubled)))
                .reduce(|a, b| a.kronecker(&b))
                .expect("non-empty term");
            out += op * t.coeff;
        }
        out
    }

    /// Explicit row/column selection onto the logical subspace (and the vacuum
    /// for boundary encodings).
    pub fn restrict(&self, doubled: &DoubledAuxSite, boundary: Boundary) -> CMat {
        let full = self.evaluate(doubled);
        let logical: Vec<usize> = match self.arity {
            1 => vec![EMBEDDING.ket0, EMBEDDING.ket1],
            _ => (0..4).map(|k| EMBEDDING.logical_index(&[k >> 1, k & 1])).collect(),
        };
        let vacuum = vec![EMBEDDING.vacuum];
        let (rows, cols) = match boundary {
            Boundary::Prepare => (&logical, &vacuum),
            Boundary::Gate => (&logical, &logical),
            Boundary::Readout => (&vacuum, &logical),
        };
        CMat::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    fn cp(l: f64) -> Coupling {
        Coupling::new(l).unwrap()
    }

    fn all_kinds() -> Vec<Encoding> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        vec![
            Encoding::In { a: c(s, 0.0), b: c(0.0, s) },
            Encoding::In { a: c(0.6, 0.0), b: c(0.0, -0.8) },
            Encoding::RotX(0.37),
            Encoding::RotY(-1.2),
            Encoding::RotZ(2.9),
            Encoding::PauliX,
            Encoding::PauliY,
            Encoding::PauliZ,
            Encoding::Identity,
            Encoding::Cz,
            Encoding::Projector { a: c(0.6, 0.0), b: c(0.48, 0.64) },
            Encoding::Fin { a: c(0.0, 0.6), b: c(0.8, 0.0) },
            Encoding::AOp,
            Encoding::RawDyad { row: 0, col: 0 },
            Encoding::RawDyad { row: 0, col: 1 },
            Encoding::RawDyad { row: 1, col: 0 },
            Encoding::RawDyad { row: 1, col: 1 },
        ]
    }

    #[test]
    fn coupling_must_be_positive() {
        assert!(Coupling::new(0.0).is_err());
        assert!(Coupling::new(-1.0).is_err());
        assert!(Coupling::new(f64::NAN).is_err());
        assert!(Coupling::new(1e-3).is_ok());
    }

    #[test]
    fn aux_site_entries() {
        let s = AuxSite::build(cp(2.0));
        assert_eq!(s.a0, na::Matrix2::new(ONE, ZERO, ZERO, c(0.0, 0.5)));
        assert_eq!(s.a_plus[(0, 1)], I);
        assert_eq!(s.a_minus[(1, 0)], ONE);
        assert_eq!(AuxSite::build(cp(4.0)).a0[(1, 1)], I);
        let s1 = AuxSite::build(cp(1.0));
        for i in 0..2 {
            for j in 0..2 {
                let expect = if (i, j) == (0, 1) { c(0.0, 0.5) } else { ZERO };
                assert_eq!(s1.a_plus[(i, j)], expect);
            }
        }
    }

    #[test]
    fn doubled_site_entries() {
        let d = DoubledAuxSite::for_coupling(cp(1.0));
        assert!((d.b0[(3, 3)] - c(1.0 / 16.0, 0.0)).norm() < 1e-15);
        for l in [0.5, 1.0, 2.0, 3.7] {
            let d = DoubledAuxSite::for_coupling(cp(l));
            assert!((d.bz[(0, 3)] - c(l * l / 8.0, 0.0)).norm() < 1e-14);
        }
        for r in 0..4 {
            assert_eq!(d.b_plus[(r, 0)], if r == EMBEDDING.ket0 { ONE } else { ZERO });
            assert_eq!(d.b_minus[(r, 0)], if r == EMBEDDING.ket1 { ONE } else { ZERO });
        }
    }

    #[test]
    fn embedding_indices() {
        assert_eq!(EMBEDDING.ket0, 1);
        assert_eq!(EMBEDDING.ket1, 2);
        assert_ne!(EMBEDDING.ket0, EMBEDDING.ket1);
        assert_eq!(EMBEDDING.logical_index(&[1, 0]), 2 * 4 + 1);
    }

    #[test]
    fn named_matrices() {
        assert_eq!(Encoding::PauliX.matrix().unwrap(), to_dense(&pauli_x()));
        assert_eq!(Encoding::Identity.matrix().unwrap(), CMat::identity(2, 2));
        let cz = Encoding::Cz.matrix().unwrap();
        assert_eq!(cz, CMat::from_diagonal(&na::DVector::from_vec(vec![ONE, ONE, ONE, -ONE])));
        let aop = Encoding::AOp.matrix().unwrap();
        let mut expect = CMat::zeros(4, 4);
        for v in 0..2 {
            let p = Encoding::RawDyad { row: v, col: v }.matrix().unwrap();
            expect += p.kronecker(&p);
        }
        assert_eq!(aop, expect);
    }

    #[test]
    fn unnormalized_amplitudes_rejected() {
        let bad = Encoding::Projector { a: c(1.0, 0.0), b: c(1.0, 0.0) };
        assert!(matches!(bad.matrix(), Err(Error::InvalidAmplitudes { .. })));
        assert!(Encoding::In { a: ZERO, b: ZERO }.aux_polynomial(cp(1.0)).is_err());
    }

    #[test]
    fn pauli_polynomials_match_closed_forms() {
        use PauliLabel::{Minus, Plus};
        let find = |p: &AuxPolynomial, m: [PauliLabel; 2]| {
            p.terms.iter().find(|t| t.factors[0].0 == m).map(|t| t.coeff).unwrap_or(ZERO)
        };
        for l in [0.5, 1.0, 2.0] {
            let k = c(0.0, 32.0 / (l * l * l + 16.0 * l));
            let x = Encoding::PauliX.aux_polynomial(cp(l)).unwrap();
            assert!((find(&x, [Minus, Minus]) - k).norm() < 1e-15);
            assert!((find(&x, [Plus, Plus]) + k).norm() < 1e-15);
            let y = Encoding::PauliY.aux_polynomial(cp(l)).unwrap();
            let ky = c(-32.0 / (l * l * l + 16.0 * l), 0.0);
            assert!((find(&y, [Minus, Minus]) - ky).norm() < 1e-15);
            assert!((find(&y, [Plus, Plus]) - ky).norm() < 1e-15);
            let id = Encoding::Identity.aux_polynomial(cp(l)).unwrap();
            assert!((find(&id, [Plus, Minus]) - k).norm() < 1e-15);
            assert!((find(&id, [Minus, Plus]) + k).norm() < 1e-15);
        }
        let z = Encoding::PauliZ.aux_polynomial(cp(2.0)).unwrap();
        assert_eq!(z.terms.len(), 2);
        assert!((find(&z, [Plus, Minus]) - c(0.0, 0.8)).norm() < 1e-15);
        assert!((find(&z, [Minus, Plus]) - c(0.0, 0.8)).norm() < 1e-15);

        let d00 = Encoding::RawDyad { row: 0, col: 0 }.aux_polynomial(cp(1.0)).unwrap();
        assert_eq!(d00.terms.len(), 1);
        assert_eq!(d00.terms[0].factors[0].0, vec![Plus, Minus]);
        assert!((d00.terms[0].coeff - c(0.0, 32.0 / 17.0)).norm() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let inp = Encoding::In { a: c(s, 0.0), b: c(0.0, s) }.aux_polynomial(cp(1.0)).unwrap();
        assert_eq!(inp.terms[0].factors[0].0, vec![Plus]);
        assert!((inp.terms[0].coeff - c(2.0 * s, 0.0)).norm() < 1e-15);
        assert_eq!(inp.terms[1].factors[0].0, vec![Minus]);
        assert!((inp.terms[1].coeff - c(0.0, 2.0 * s)).norm() < 1e-15);
    }

    #[test]
    fn polynomial_restriction_reproduces_matrix() {
        for l in [0.5, 1.0, 2.0, 4.0] {
            let d = DoubledAuxSite::for_coupling(cp(l));
            for kind in all_kinds() {
                let poly = kind.aux_polynomial(cp(l)).unwrap();
                let got = poly.restrict(&d, kind.boundary());
                let want = kind.matrix().unwrap();
                assert!(max_abs_diff(&got, &want) < 1e-12, "{kind:?} λ={l}");
            }
        }
    }

    #[test]
    fn quadratic_encodings_do_not_leak_out_of_logical_space() {
        // Two ± letters shift the bond charge by 0 or ±2, so logical states
        // map into the logical subspace or vanish.
        let d = DoubledAuxSite::for_coupling(cp(1.3));
        for kind in all_kinds().into_iter().filter(|k| k.boundary() == Boundary::Gate) {
            let full = kind.aux_polynomial(cp(1.3)).unwrap().evaluate(&d);
            let arity = kind.arity();
            let logical: Vec<usize> = if arity == 1 {
                vec![1, 2]
            } else {
                (0..4).map(|k| EMBEDDING.logical_index(&[k >> 1, k & 1])).collect()
            };
            for &col in &logical {
                for row in 0..full.nrows() {
                    if !logical.contains(&row) {
                        assert!(full[(row, col)].norm() < 1e-14, "{kind:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_matches_matrix_exponential() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for g in [pauli_x(), pauli_y(), pauli_z()] {
            for _ in 0..100 {
                let theta: f64 = rng.random_range(-2.0 * std::f64::consts::PI..2.0 * std::f64::consts::PI);
                let exp = (to_dense(&g) * c(0.0, theta)).exp();
                let closed = to_dense(&rotation(&g, theta));
                assert!(max_abs_diff(&exp, &closed) < 1e-12);
            }
        }
    }
}

//! Single-spin operator basis {σ⁰, σᶻ, σ⁺, σ⁻}.
//!
//! Convention: |0⟩ = (1, 0)ᵀ, σᶻ = diag(1, −1), σ⁺ = |0⟩⟨1|, σ⁻ = |1⟩⟨0|, so
//! σ^± = (σˣ ± iσʸ)/2. The basis is orthogonal under the Hilbert–Schmidt inner
//! product with norms f₀ = f_z = 2 and f_± = 1.

use nalgebra as na;
use serde::{Deserialize, Serialize};

use crate::linalg::{CMat, C64, ONE, ZERO};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLabel {
    Id,
    Z,
    Plus,
    Minus,
}

impl PauliLabel {
    pub const ALL: [PauliLabel; 4] = [PauliLabel::Id, PauliLabel::Z, PauliLabel::Plus, PauliLabel::Minus];

    pub fn matrix(self) -> na::Matrix2<C64> {
        match self {
            PauliLabel::Id => na::Matrix2::new(ONE, ZERO, ZERO, ONE),
            PauliLabel::Z => na::Matrix2::new(ONE, ZERO, ZERO, -ONE),
            PauliLabel::Plus => na::Matrix2::new(ZERO, ONE, ZERO, ZERO),
            PauliLabel::Minus => na::Matrix2::new(ZERO, ZERO, ONE, ZERO),
        }
    }

    pub fn dense(self) -> CMat {
        let m = self.matrix();
        CMat::from_fn(2, 2, |i, j| m[(i, j)])
    }

    /// Hilbert–Schmidt norm Tr(σ σ†).
    pub fn hs_norm(self) -> f64 {
        match self {
            PauliLabel::Id | PauliLabel::Z => 2.0,
            PauliLabel::Plus | PauliLabel::Minus => 1.0,
        }
    }

    /// Label of (σ^s)†.
    pub fn dagger(self) -> PauliLabel {
        match self {
            PauliLabel::Plus => PauliLabel::Minus,
            PauliLabel::Minus => PauliLabel::Plus,
            other => other,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            PauliLabel::Id => '0',
            PauliLabel::Z => 'z',
            PauliLabel::Plus => '+',
            PauliLabel::Minus => '-',
        }
    }

    pub fn from_symbol(ch: char) -> Option<PauliLabel> {
        match ch {
            '0' | 'I' | 'i' => Some(PauliLabel::Id),
            'z' | 'Z' => Some(PauliLabel::Z),
            '+' => Some(PauliLabel::Plus),
            '-' => Some(PauliLabel::Minus),
            _ => None,
        }
    }

    /// Coefficients of a 2×2 operator in the basis: op = Σ_s x_s σ^s with
    /// x_s = Tr((σ^s)† op) / f_s.
    pub fn expand(op: &na::Matrix2<C64>) -> [(PauliLabel, C64); 4] {
        PauliLabel::ALL.map(|s| {
            let coeff = (s.matrix().adjoint() * op).trace() / s.hs_norm();
            (s, coeff)
        })
    }
}

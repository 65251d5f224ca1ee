//! Matrix-product form of a single chain's steady state.
//!
//! Every coefficient of ρ∞ in the Pauli-label basis is a vacuum-to-vacuum
//! amplitude of a product of doubled auxiliary matrices. Site 1 acts first on
//! the vacuum |00⟩ and site L last; in dense matrices site 1 is the most
//! significant tensor factor.

use std::collections::BTreeMap;

use nalgebra as na;

use crate::aux_algebra::{Coupling, DoubledAuxSite};
use crate::encoder::{string_entry, SiteRef};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};
use crate::pauli::PauliLabel;

pub type Aux4 = na::Matrix4<C64>;
pub type AuxVec = na::Vector4<C64>;

/// Largest chain materialized as a dense density matrix.
pub const MAX_DENSE_SITES: usize = 12;
/// Up to this length the dense matrix is built string by string.
pub const ENUMERATION_SITES: usize = 6;

#[derive(Debug, Clone)]
pub struct MpoNess {
    len: usize,
    coupling: Coupling,
    doubled: DoubledAuxSite,
    norm_const: f64,
}

impl MpoNess {
    pub fn new(len: usize, coupling: Coupling) -> Result<Self> {
        let norm_const = ness_norm(len, coupling)?;
        Ok(MpoNess { len, coupling, doubled: DoubledAuxSite::for_coupling(coupling), norm_const })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn doubled(&self) -> &DoubledAuxSite {
        &self.doubled
    }

    /// Tr(S S†).
    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    /// Transfer matrix of one physical Pauli label: Σ_s 𝔸_s Tr(σ^s σ^label),
    /// which is f_label · 𝔸_{label†}.
    pub fn label_transfer(&self, label: PauliLabel) -> Aux4 {
        label_transfer(&self.doubled, label)
    }
}

pub(crate) fn label_transfer(d: &DoubledAuxSite, label: PauliLabel) -> Aux4 {
    d.get(label.dagger()) * C64::new(label.hs_norm(), 0.0)
}

fn vacuum() -> AuxVec {
    AuxVec::new(C64::new(1.0, 0.0), ZERO, ZERO, ZERO)
}

/// Tr(S S†) = 2^L ⟨00|𝔸₀^L|00⟩.
pub fn ness_norm(len: usize, coupling: Coupling) -> Result<f64> {
    if len < 1 {
        return Err(Error::ChainTooShort { len, min: 1 });
    }
    let d = DoubledAuxSite::for_coupling(coupling);
    let step = d.b0 * C64::new(2.0, 0.0);
    let mut v = vacuum();
    for _ in 0..len {
        v = step * v;
    }
    let z = v[0];
    if z.re <= 0.0 || z.im.abs() > 1e-12 * z.re.max(1.0) {
        return Err(Error::BadNormalization { value: format!("{z}") });
    }
    Ok(z.re)
}

/// Dense ρ∞ (2^L × 2^L, unit trace).
pub fn materialize_density(m: &MpoNess) -> Result<CMat> {
    if m.len > MAX_DENSE_SITES {
        return Err(Error::TooLarge { what: "dense chain length", size: m.len, limit: MAX_DENSE_SITES });
    }
    if m.len <= ENUMERATION_SITES {
        Ok(density_by_enumeration(m))
    } else {
        Ok(density_by_recursion(m))
    }
}

/// Sum over label strings, pruning those whose boundary vector vanishes.
pub fn density_by_enumeration(m: &MpoNess) -> CMat {
    let dim = 1usize << m.len;
    let mut rho = CMat::zeros(dim, dim);
    let mut labels = Vec::with_capacity(m.len);
    enumerate(m, vacuum(), &mut labels, &mut rho);
    rho / C64::new(m.norm_const, 0.0)
}

fn enumerate(m: &MpoNess, v: AuxVec, labels: &mut Vec<PauliLabel>, rho: &mut CMat) {
    if labels.len() == m.len {
        let coeff = v[0];
        if coeff == ZERO {
            return;
        }
        for row in 0..rho.nrows() {
            if let Some((col, val)) = string_entry(labels, row) {
                rho[(row, col)] += coeff * val;
            }
        }
        return;
    }
    for s in PauliLabel::ALL {
        let next = m.doubled.get(s) * v;
        if next.iter().all(|z| *z == ZERO) {
            continue;
        }
        labels.push(s);
        enumerate(m, next, labels, rho);
        labels.pop();
    }
}

/// Bond-index recursion: R_j[γ] has the 2×2 block structure
/// (b, b') ↦ Σ_δ W_{bb'}[γ, δ] R_{j−1}[δ] with W₀₀ = 𝔸₀+𝔸_z, W₁₁ = 𝔸₀−𝔸_z,
/// W₀₁ = 𝔸₊, W₁₀ = 𝔸₋.
pub fn density_by_recursion(m: &MpoNess) -> CMat {
    let d = &m.doubled;
    let w = [[d.b0 + d.bz, d.b_plus], [d.b_minus, d.b0 - d.bz]];
    let mut r: Vec<CMat> =
        (0..4).map(|g| CMat::from_element(1, 1, if g == 0 { C64::new(1.0, 0.0) } else { ZERO })).collect();
    for j in 1..=m.len {
        let prev = 1usize << (j - 1);
        let gammas: Vec<usize> = if j == m.len { vec![0] } else { (0..4).collect() };
        let mut next = Vec::with_capacity(4);
        for g in 0..4 {
            if !gammas.contains(&g) {
                next.push(CMat::zeros(0, 0));
                continue;
            }
            let mut out = CMat::zeros(2 * prev, 2 * prev);
            for (b, row) in w.iter().enumerate() {
                for (bp, wm) in row.iter().enumerate() {
                    for (delta, rd) in r.iter().enumerate() {
                        let coef = wm[(g, delta)];
                        if coef == ZERO || rd.is_empty() {
                            continue;
                        }
                        // new index = (prev index) * 2 + bit for the site just appended
                        for c in 0..prev {
                            for rr in 0..prev {
                                out[(2 * rr + b, 2 * c + bp)] += coef * rd[(rr, c)];
                            }
                        }
                    }
                }
            }
            next.push(out);
        }
        r = next;
    }
    r.swap_remove(0) / C64::new(m.norm_const, 0.0)
}

/// `coefficient · ⊗_j σ^{labels[j]}` on one chain; absent sites are identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedString {
    pub coefficient: C64,
    pub labels: BTreeMap<usize, PauliLabel>,
}

impl PlacedString {
    pub fn new(coefficient: C64, labels: impl IntoIterator<Item = (usize, PauliLabel)>) -> Self {
        PlacedString { coefficient, labels: labels.into_iter().collect() }
    }

    /// Dense matrix on an L-site chain.
    pub fn dense(&self, len: usize) -> CMat {
        let labels: Vec<PauliLabel> =
            (1..=len).map(|j| self.labels.get(&j).copied().unwrap_or(PauliLabel::Id)).collect();
        let dim = 1usize << len;
        let mut out = CMat::zeros(dim, dim);
        for row in 0..dim {
            if let Some((col, val)) = string_entry(&labels, row) {
                out[(row, col)] = self.coefficient * val;
            }
        }
        out
    }
}

/// Tr(ρ∞ · string).
pub fn expect_string(m: &MpoNess, s: &PlacedString) -> Result<C64> {
    if let Some((&site, _)) = s.labels.iter().find(|(&j, _)| j < 1 || j > m.len) {
        return Err(Error::SiteOutOfRange { site: SiteRef::new(1, site) });
    }
    let mut v = vacuum();
    for j in 1..=m.len {
        let label = s.labels.get(&j).copied().unwrap_or(PauliLabel::Id);
        v = m.label_transfer(label) * v;
    }
    Ok(s.coefficient * v[0] / m.norm_const)
}

/// Transfer matrix of an arbitrary one-site operator: Σ_s 𝔸_s Tr(σ^s op).
/// Contracting these over all sites and dividing by Tr(S S†) gives
/// Tr(ρ∞ ⊗_j op_j).
pub fn site_transfer(d: &DoubledAuxSite, op: &na::Matrix2<C64>) -> Aux4 {
    let mut out = Aux4::zeros();
    for s in PauliLabel::ALL {
        let tr = (s.matrix() * op).trace();
        if tr != ZERO {
            out += d.get(s) * tr;
        }
    }
    out
}

/// Tr(ρ∞ ⊗_j ops[j]) for one operator per site.
pub fn expect_product(m: &MpoNess, ops: &[na::Matrix2<C64>]) -> Result<C64> {
    if ops.len() != m.len {
        return Err(Error::SiteOutOfRange { site: SiteRef::new(1, ops.len()) });
    }
    let mut v = vacuum();
    for op in ops {
        v = site_transfer(&m.doubled, op) * v;
    }
    Ok(v[0] / m.norm_const)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_algebra::AuxSite;
    use crate::linalg::{c, hermitian_eigenvalues, hermiticity_defect, identity, kron};
    use proptest::prelude::*;

    fn cp(l: f64) -> Coupling {
        Coupling::new(l).unwrap()
    }

    /// S = Σ_{s ∈ {0,+,−}^L} ⟨0|A_{s_L}⋯A_{s_1}|0⟩ ⊗ σ^s built term by term.
    fn dense_s(len: usize, l: f64) -> CMat {
        let a = AuxSite::build(cp(l));
        let labels = [PauliLabel::Id, PauliLabel::Plus, PauliLabel::Minus];
        let mut s = CMat::zeros(1 << len, 1 << len);
        for code in 0..3usize.pow(len as u32) {
            let mut v = na::Vector2::new(c(1.0, 0.0), ZERO);
            let mut op = identity(1);
            let mut rest = code;
            for _ in 0..len {
                let lab = labels[rest % 3];
                rest /= 3;
                v = a.get(lab).unwrap() * v;
                op = kron(&op, &lab.dense());
            }
            s += op * v[0];
        }
        s
    }

    fn dense_rho(len: usize, l: f64) -> CMat {
        let s = dense_s(len, l);
        let ssd = &s * s.adjoint();
        let tr = ssd.trace();
        ssd / tr
    }

    #[test]
    fn norm_matches_dense_trace() {
        for (len, l) in [(1, 1.0), (2, 2.0), (3, 0.5), (5, 1.3), (8, 1.0)] {
            let s = dense_s(len, l);
            let tr = (&s * s.adjoint()).trace();
            let n = ness_norm(len, cp(l)).unwrap();
            assert!((tr - c(n, 0.0)).norm() <= 1e-12 * n, "L={len} λ={l}");
        }
    }

    #[test]
    fn zero_length_is_rejected() {
        assert!(matches!(ness_norm(0, cp(1.0)), Err(Error::ChainTooShort { .. })));
    }

    #[test]
    fn density_matches_s_s_dagger() {
        for (len, l) in [(1, 1.0), (2, 0.5), (3, 2.0), (4, 1.0), (7, 1.0)] {
            let m = MpoNess::new(len, cp(l)).unwrap();
            let rho = materialize_density(&m).unwrap();
            assert!((&rho - dense_rho(len, l)).norm() < 1e-12, "L={len}");
        }
    }

    #[test]
    fn enumeration_and_recursion_agree() {
        for len in [1, 3, 5, 6] {
            let m = MpoNess::new(len, cp(0.7)).unwrap();
            assert!((density_by_enumeration(&m) - density_by_recursion(&m)).norm() < 1e-13);
        }
    }

    #[test]
    fn density_is_a_state() {
        for len in 1..=6 {
            for l in [0.5, 1.0, 2.0] {
                let rho = materialize_density(&MpoNess::new(len, cp(l)).unwrap()).unwrap();
                assert!((rho.trace() - c(1.0, 0.0)).norm() < 1e-12);
                assert!(hermiticity_defect(&rho) < 1e-12);
                assert!(hermitian_eigenvalues(&rho)[0] >= -1e-10);
            }
        }
    }

    #[test]
    fn dense_guard() {
        let m = MpoNess::new(13, cp(1.0)).unwrap();
        assert!(matches!(materialize_density(&m), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn string_examples() {
        let m = MpoNess::new(1, cp(1.0)).unwrap();
        assert_eq!(expect_string(&m, &PlacedString::new(c(1.0, 0.0), [(1, PauliLabel::Minus)])).unwrap(), ZERO);
        for len in [1, 4, 9] {
            let m = MpoNess::new(len, cp(1.7)).unwrap();
            let id = expect_string(&m, &PlacedString::new(c(1.0, 0.0), [])).unwrap();
            assert!((id - c(1.0, 0.0)).norm() < 1e-12);
        }
        let m = MpoNess::new(4, cp(1.0)).unwrap();
        let s = PlacedString::new(c(1.0, 0.0), [(2, PauliLabel::Minus), (3, PauliLabel::Plus)]);
        let rho = materialize_density(&m).unwrap();
        let want = (&rho * s.dense(4)).trace();
        assert!((expect_string(&m, &s).unwrap() - want).norm() < 1e-12);
        let bad = PlacedString::new(c(1.0, 0.0), [(5, PauliLabel::Z)]);
        assert!(expect_string(&m, &bad).is_err());
    }

    #[test]
    fn site_transfer_of_basis_operators() {
        let d = DoubledAuxSite::for_coupling(cp(1.3));
        let two = c(2.0, 0.0);
        assert_eq!(site_transfer(&d, &PauliLabel::Id.matrix()), d.b0 * two);
        assert_eq!(site_transfer(&d, &PauliLabel::Z.matrix()), d.bz * two);
        assert_eq!(site_transfer(&d, &PauliLabel::Minus.matrix()), d.b_plus);
        assert_eq!(site_transfer(&d, &PauliLabel::Plus.matrix()), d.b_minus);
    }

    fn label() -> impl Strategy<Value = PauliLabel> {
        prop::sample::select(PauliLabel::ALL.to_vec())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn strings_match_dense_expectation(
            len in 1usize..=6,
            l in 0.3f64..3.0,
            labels in prop::collection::vec(label(), 6),
            re in -2.0f64..2.0,
            im in -2.0f64..2.0,
        ) {
            let m = MpoNess::new(len, cp(l)).unwrap();
            let s = PlacedString::new(c(re, im), (1..=len).map(|j| (j, labels[j - 1])));
            let rho = materialize_density(&m).unwrap();
            let want = (&rho * s.dense(len)).trace();
            prop_assert!((expect_string(&m, &s).unwrap() - want).norm() <= 1e-12 * want.norm().max(1.0));
        }

        #[test]
        fn site_operators_match_dense_expectation(
            l in 0.3f64..3.0,
            entries in prop::collection::vec(-1.0f64..1.0, 40),
        ) {
            let len = 5;
            let m = MpoNess::new(len, cp(l)).unwrap();
            let ops: Vec<na::Matrix2<C64>> = (0..len)
                .map(|j| na::Matrix2::from_fn(|r, col| {
                    let k = 8 * j + 2 * (2 * r + col);
                    c(entries[k], entries[k + 1])
                }))
                .collect();
            let mut big = identity(1);
            for op in &ops {
                big = kron(&big, &CMat::from_fn(2, 2, |r, col| op[(r, col)]));
            }
            let rho = materialize_density(&m).unwrap();
            let want = (&rho * big).trace();
            prop_assert!((expect_product(&m, &ops).unwrap() - want).norm() <= 1e-12);
        }
    }
}

//! Placed physical operators: linear combinations of Pauli-label strings on a
//! few (chain, site) positions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{normality_defect, CMat, C64, ONE};
use crate::pauli::PauliLabel;

/// A physical spin: `chain` in 1..=n, `site` in 1..=L.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SiteRef {
    pub chain: usize,
    pub site: usize,
}

impl SiteRef {
    pub fn new(chain: usize, site: usize) -> Self {
        SiteRef { chain, site }
    }
}

impl fmt::Display for SiteRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.chain, self.site)
    }
}

/// `coeff · ⊗ σ^{label}` over the listed sites; unlisted sites are identity.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderTerm {
    pub coeff: C64,
    pub labels: BTreeMap<SiteRef, PauliLabel>,
}

/// Largest footprint materialized densely.
pub const MAX_DENSE_FOOTPRINT: usize = 12;

const NORMAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Encoder {
    terms: Vec<EncoderTerm>,
    footprint: Vec<SiteRef>,
    /// Disjoint tensor factors when the encoder was assembled as a product.
    factors: Vec<Encoder>,
    normal: bool,
}

impl Encoder {
    /// Builds a primitive encoder; normality is decided on its dense matrix.
    pub fn new(terms: Vec<EncoderTerm>) -> Result<Self> {
        let footprint: BTreeSet<SiteRef> = terms.iter().flat_map(|t| t.labels.keys().copied()).collect();
        let mut e = Encoder { terms, footprint: footprint.into_iter().collect(), factors: Vec::new(), normal: false };
        e.normal = e.dense_normality()?;
        Ok(e)
    }

    /// Encoder with a single term.
    pub fn string(coeff: C64, labels: impl IntoIterator<Item = (SiteRef, PauliLabel)>) -> Result<Self> {
        Self::new(vec![EncoderTerm { coeff, labels: labels.into_iter().collect() }])
    }

    /// Expands a dense operator on `sites` (first site most significant) into
    /// Pauli-label strings.
    pub fn from_dense(sites: &[SiteRef], op: &CMat) -> Result<Self> {
        let m = sites.len();
        if m > MAX_DENSE_FOOTPRINT {
            return Err(Error::TooLarge { what: "footprint", size: m, limit: MAX_DENSE_FOOTPRINT });
        }
        let dim = 1usize << m;
        assert_eq!(op.shape(), (dim, dim), "operator does not match footprint");
        let mut terms = Vec::new();
        for code in 0..4usize.pow(m as u32) {
            let labels: Vec<PauliLabel> = (0..m).map(|i| PauliLabel::ALL[(code >> (2 * (m - 1 - i))) & 3]).collect();
            // coefficient Tr((⊗σ)† op) / ∏ f
            let mut acc = C64::new(0.0, 0.0);
            for row in 0..dim {
                if let Some((col, val)) = string_entry(&labels, row) {
                    // (⊗σ)†[col,row] = conj(val); Tr(B† op) = Σ conj(B[row,col]) op[row,col]
                    acc += val.conj() * op[(row, col)];
                }
            }
            let f: f64 = labels.iter().map(|s| s.hs_norm()).product();
            let coeff = acc / f;
            if coeff.norm() > 1e-14 {
                terms.push(EncoderTerm { coeff, labels: sites.iter().copied().zip(labels).collect() });
            }
        }
        let mut e = Self::new(terms)?;
        // keep the requested footprint even when some sites only carry identity
        e.footprint = sites.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
        Ok(e)
    }

    /// Tensor product of encoders on disjoint footprints.
    pub fn product(&self, other: &Encoder) -> Result<Self> {
        if let Some(site) = self.footprint.iter().find(|s| other.footprint.contains(s)) {
            return Err(Error::OverlappingFootprints { site: *site });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let mut labels = a.labels.clone();
                labels.extend(b.labels.iter().map(|(k, v)| (*k, *v)));
                terms.push(EncoderTerm { coeff: a.coeff * b.coeff, labels });
            }
        }
        let mut footprint: Vec<SiteRef> = self.footprint.iter().chain(&other.footprint).copied().collect();
        footprint.sort();
        let mut factors = self.flat_factors();
        factors.extend(other.flat_factors());
        let normal = factors.iter().all(|f| f.normal);
        Ok(Encoder { terms, footprint, factors, normal })
    }

    fn flat_factors(&self) -> Vec<Encoder> {
        if self.factors.is_empty() {
            vec![self.clone()]
        } else {
            self.factors.clone()
        }
    }

    pub fn terms(&self) -> &[EncoderTerm] {
        &self.terms
    }

    pub fn footprint(&self) -> &[SiteRef] {
        &self.footprint
    }

    pub fn factors(&self) -> &[Encoder] {
        &self.factors
    }

    pub fn is_normal(&self) -> bool {
        self.normal
    }

    /// Chains touched by the footprint, ascending.
    pub fn chains(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.footprint.iter().map(|s| s.chain).collect();
        set.into_iter().collect()
    }

    /// Dense matrix on the footprint (sorted by chain then site, first most
    /// significant).
    pub fn dense_matrix(&self) -> Result<CMat> {
        let m = self.footprint.len();
        if m > MAX_DENSE_FOOTPRINT {
            return Err(Error::TooLarge { what: "footprint", size: m, limit: MAX_DENSE_FOOTPRINT });
        }
        let dim = 1usize << m;
        let mut out = CMat::zeros(dim, dim);
        for t in &self.terms {
            let labels: Vec<PauliLabel> =
                self.footprint.iter().map(|s| t.labels.get(s).copied().unwrap_or(PauliLabel::Id)).collect();
            for row in 0..dim {
                if let Some((col, val)) = string_entry(&labels, row) {
                    out[(row, col)] += t.coeff * val;
                }
            }
        }
        Ok(out)
    }

    /// Frobenius norm of E E† − E† E relative to ‖E‖²_F.
    pub fn relative_normality_defect(&self) -> Result<f64> {
        let m = self.dense_matrix()?;
        let scale = m.norm_squared();
        Ok(if scale == 0.0 { 0.0 } else { normality_defect(&m) / scale })
    }

    fn dense_normality(&self) -> Result<bool> {
        Ok(self.relative_normality_defect()? <= NORMAL_TOL)
    }
}

/// Decides normality of an encoder. Primitive encoders are materialized on
/// their footprint; products are normal exactly when every (nonzero) tensor
/// factor is.
pub fn check_normal(e: &Encoder) -> Result<bool> {
    if e.footprint.len() > MAX_DENSE_FOOTPRINT {
        return Err(Error::TooLarge { what: "footprint", size: e.footprint.len(), limit: MAX_DENSE_FOOTPRINT });
    }
    if e.factors.is_empty() {
        e.dense_normality()
    } else {
        e.factors.iter().map(check_normal).try_fold(true, |acc, r| r.map(|ok| acc && ok))
    }
}

/// Row `row` of ⊗σ^{labels} (first label most significant): the only
/// nonzero column and its value.
pub(crate) fn string_entry(labels: &[PauliLabel], row: usize) -> Option<(usize, C64)> {
    let m = labels.len();
    let mut col = 0usize;
    let mut val = ONE;
    for (i, s) in labels.iter().enumerate() {
        let bit = (row >> (m - 1 - i)) & 1;
        let cbit = match s {
            PauliLabel::Id => bit,
            PauliLabel::Z => {
                if bit == 1 {
                    val = -val;
                }
                bit
            }
            PauliLabel::Plus if bit == 0 => 1,
            PauliLabel::Minus if bit == 1 => 0,
            _ => return None,
        };
        col |= cbit << (m - 1 - i);
    }
    Some((col, val))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, kron};

    #[test]
    fn dense_matrix_matches_kronecker_products() {
        let a = SiteRef::new(1, 2);
        let b = SiteRef::new(1, 3);
        let e = Encoder::new(vec![
            EncoderTerm { coeff: c(0.5, 1.0), labels: [(a, PauliLabel::Plus), (b, PauliLabel::Z)].into() },
            EncoderTerm { coeff: c(-2.0, 0.0), labels: [(b, PauliLabel::Minus)].into() },
        ])
        .unwrap();
        let want = kron(&PauliLabel::Plus.dense(), &PauliLabel::Z.dense()) * c(0.5, 1.0)
            + kron(&PauliLabel::Id.dense(), &PauliLabel::Minus.dense()) * c(-2.0, 0.0);
        assert_eq!(e.dense_matrix().unwrap(), want);
        assert_eq!(e.footprint(), &[a, b]);
    }

    #[test]
    fn from_dense_round_trips() {
        let sites = [SiteRef::new(1, 1), SiteRef::new(2, 1)];
        let op = CMat::from_fn(4, 4, |i, j| c((i * 3 + j) as f64 - 4.0, (i as f64) * 0.5 - j as f64));
        let e = Encoder::from_dense(&sites, &op).unwrap();
        assert!((e.dense_matrix().unwrap() - op).norm() < 1e-12);
    }

    #[test]
    fn normality_of_simple_strings() {
        let s = SiteRef::new(1, 1);
        assert!(!Encoder::string(ONE, [(s, PauliLabel::Plus)]).unwrap().is_normal());
        assert!(Encoder::string(ONE, [(s, PauliLabel::Z)]).unwrap().is_normal());
        let sx = Encoder::new(vec![
            EncoderTerm { coeff: ONE, labels: [(s, PauliLabel::Plus)].into() },
            EncoderTerm { coeff: ONE, labels: [(s, PauliLabel::Minus)].into() },
        ])
        .unwrap();
        assert!(sx.is_normal());
    }

    #[test]
    fn products_require_disjoint_footprints() {
        let s = SiteRef::new(1, 1);
        let e = Encoder::string(ONE, [(s, PauliLabel::Z)]).unwrap();
        assert!(matches!(e.product(&e), Err(Error::OverlappingFootprints { .. })));
        let f = Encoder::string(ONE, [(SiteRef::new(2, 1), PauliLabel::Plus)]).unwrap();
        let p = e.product(&f).unwrap();
        assert_eq!(p.factors().len(), 2);
        assert!(!p.is_normal());
        assert_eq!(check_normal(&p).unwrap(), p.relative_normality_defect().unwrap() <= NORMAL_TOL);
    }
}

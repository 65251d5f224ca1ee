//! Brute-force Liouvillian of the boundary-driven XXZ chain.
//!
//! Density matrices are vectorized column by column: vec(|a⟩⟨b|) has index
//! a + b·2^L, with site 1 the most significant bit of a and b. The generator
//! conserves q = popcount(a) − popcount(b), so it is stored as one dense block
//! per charge sector.

use nalgebra as na;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aux_algebra::Coupling;
use crate::error::{Error, Result};
use crate::linalg::{c, CMat, CVec, C64, ZERO};

/// Largest chain for which the Liouvillian is assembled.
pub const MAX_SITES: usize = 6;

/// Relative threshold separating the null space from the rest of the spectrum.
pub const UNIQUENESS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvillianModel {
    pub len: usize,
    pub delta: f64,
    pub field: f64,
    pub coupling: Coupling,
}

impl LiouvillianModel {
    pub fn new(len: usize, delta: f64, field: f64, coupling: Coupling) -> Result<Self> {
        if len < 2 {
            return Err(Error::ChainTooShort { len, min: 2 });
        }
        if len > MAX_SITES {
            return Err(Error::TooLarge { what: "Liouvillian chain length", size: len, limit: MAX_SITES });
        }
        Ok(LiouvillianModel { len, delta, field, coupling })
    }

    /// Pure XX chain without field.
    pub fn xx(len: usize, coupling: Coupling) -> Result<Self> {
        Self::new(len, 0.0, 0.0, coupling)
    }

    fn dim(&self) -> usize {
        1 << self.len
    }

    fn bit(&self, state: usize, site: usize) -> usize {
        (state >> (self.len - site)) & 1
    }

    /// H|a⟩ as (state, amplitude) pairs; H is real symmetric.
    fn hamiltonian_column(&self, a: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let mut diag = 0.0;
        for j in 1..=self.len {
            diag += self.field * if self.bit(a, j) == 0 { 1.0 } else { -1.0 };
        }
        for j in 1..self.len {
            let (x, y) = (self.bit(a, j), self.bit(a, j + 1));
            diag += self.delta * if x == y { 1.0 } else { -1.0 };
            if x != y {
                // 2(σ⁺σ⁻ + σ⁻σ⁺) swaps antiparallel neighbours
                let flip = (1 << (self.len - j)) | (1 << (self.len - j - 1));
                out.push((a ^ flip, 2.0));
            }
        }
        out.push((a, diag));
        out
    }

    /// Image of |a⟩⟨b| under the generator, as (ket, bra, coefficient).
    fn apply_to_dyad(&self, a: usize, b: usize) -> Vec<(usize, usize, C64)> {
        let mut out = Vec::new();
        let minus_i = c(0.0, -1.0);
        for (ap, h) in self.hamiltonian_column(a) {
            out.push((ap, b, minus_i * h));
        }
        for (bp, h) in self.hamiltonian_column(b) {
            out.push((a, bp, -minus_i * h));
        }
        let lam = self.coupling.lambda();
        let last = 1usize; // site L is the least significant bit
        let first = 1usize << (self.len - 1);
        // σ⁺ on site L: |1⟩ → |0⟩; L†L projects on |1⟩
        let (a1, b1) = (a & last != 0, b & last != 0);
        if a1 && b1 {
            out.push((a & !last, b & !last, c(lam, 0.0)));
        }
        let decay = -0.5 * lam * (a1 as u8 as f64 + b1 as u8 as f64);
        // σ⁻ on site 1: |0⟩ → |1⟩; L†L projects on |0⟩
        let (a0, b0) = (a & first == 0, b & first == 0);
        if a0 && b0 {
            out.push((a | first, b | first, c(lam, 0.0)));
        }
        let decay = decay - 0.5 * lam * (a0 as u8 as f64 + b0 as u8 as f64);
        out.push((a, b, c(decay, 0.0)));
        out
    }
}

/// One charge sector: its basis dyads and the generator restricted to them.
#[derive(Debug, Clone)]
pub struct ChargeBlock {
    pub charge: i32,
    pub basis: Vec<(usize, usize)>,
    pub matrix: CMat,
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    model: LiouvillianModel,
    blocks: Vec<ChargeBlock>,
}

fn charge(a: usize, b: usize) -> i32 {
    a.count_ones() as i32 - b.count_ones() as i32
}

pub fn build_liouvillian(model: &LiouvillianModel) -> Liouvillian {
    let dim = model.dim();
    let l = model.len as i32;
    let blocks = (-l..=l)
        .into_par_iter()
        .map(|q| {
            let mut basis = Vec::new();
            for b in 0..dim {
                for a in 0..dim {
                    if charge(a, b) == q {
                        basis.push((a, b));
                    }
                }
            }
            let mut index = vec![usize::MAX; dim * dim];
            for (i, &(a, b)) in basis.iter().enumerate() {
                index[a + b * dim] = i;
            }
            let mut matrix = CMat::zeros(basis.len(), basis.len());
            for (col, &(a, b)) in basis.iter().enumerate() {
                for (ap, bp, z) in model.apply_to_dyad(a, b) {
                    matrix[(index[ap + bp * dim], col)] += z;
                }
            }
            ChargeBlock { charge: q, basis, matrix }
        })
        .collect();
    Liouvillian { model: *model, blocks }
}

impl Liouvillian {
    pub fn model(&self) -> &LiouvillianModel {
        &self.model
    }

    pub fn blocks(&self) -> &[ChargeBlock] {
        &self.blocks
    }

    fn block(&self, q: i32) -> &ChargeBlock {
        self.blocks.iter().find(|b| b.charge == q).expect("charge sector")
    }

    /// Full 4^L × 4^L generator in the column-stacked basis.
    pub fn to_dense(&self) -> CMat {
        let dim = self.model.dim();
        let mut out = CMat::zeros(dim * dim, dim * dim);
        for blk in &self.blocks {
            for (j, &(a, b)) in blk.basis.iter().enumerate() {
                for (i, &(ap, bp)) in blk.basis.iter().enumerate() {
                    out[(ap + bp * dim, a + b * dim)] = blk.matrix[(i, j)];
                }
            }
        }
        out
    }

    /// Generator applied to a density matrix.
    pub fn apply(&self, rho: &CMat) -> CMat {
        let dim = self.model.dim();
        let mut out = CMat::zeros(dim, dim);
        for b in 0..dim {
            for a in 0..dim {
                let z = rho[(a, b)];
                if z == ZERO {
                    continue;
                }
                for (ap, bp, w) in self.model.apply_to_dyad(a, b) {
                    out[(ap, bp)] += w * z;
                }
            }
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.blocks.iter().map(|b| b.matrix.norm_squared()).sum::<f64>().sqrt()
    }
}

/// Vectorizes a matrix column by column.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_column_slice(m.as_slice())
}

pub fn unvectorize(v: &CVec, dim: usize) -> CMat {
    CMat::from_column_slice(dim, dim, v.as_slice())
}

fn singular_values_sorted(m: &CMat) -> (Vec<f64>, Option<CVec>) {
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let null = order.first().map(|&i| v_t.row(i).adjoint());
    (order.iter().map(|&i| svd.singular_values[i]).collect(), null)
}

/// Unique null vector of the generator as a unit-trace Hermitian matrix.
pub fn steady_state(liou: &Liouvillian) -> Result<CMat> {
    let dim = liou.model.dim();
    let scale = liou.blocks.iter().map(|b| b.matrix.norm()).fold(0.0, f64::max);
    let threshold = UNIQUENESS_THRESHOLD * scale;
    let zero_block = liou.block(0);
    let (sv, null) = singular_values_sorted(&zero_block.matrix);
    if sv.len() < 2 || sv[1] <= threshold {
        return Err(Error::DegenerateSteadyState { second: sv.get(1).copied().unwrap_or(0.0), threshold });
    }
    // other sectors hold traceless coherences and must not add null vectors
    for blk in liou.blocks.iter().filter(|b| b.charge > 0) {
        let (sv, _) = singular_values_sorted(&blk.matrix);
        if sv[0] <= threshold {
            return Err(Error::DegenerateSteadyState { second: sv[0], threshold });
        }
    }
    let null = null.ok_or(Error::EigenSolverFailed)?;
    let mut rho = CMat::zeros(dim, dim);
    for (&(a, b), z) in zero_block.basis.iter().zip(null.iter()) {
        rho[(a, b)] = *z;
    }
    let rho = (&rho + rho.adjoint()) * c(0.5, 0.0);
    let tr = rho.trace();
    if tr.norm() == 0.0 {
        return Err(Error::EigenSolverFailed);
    }
    Ok(rho / tr)
}

fn block_eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if m.nrows() == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    // The default machine-epsilon stopping rule can cycle forever on these
    // structured blocks; a slightly looser one converges.
    for eps in [1e-14, 1e-13, 1e-12] {
        if let Some(schur) = na::Schur::try_new(m.clone(), eps, 200 * m.nrows()) {
            let (_, t) = schur.unpack();
            return Ok(t.diagonal().iter().copied().collect());
        }
    }
    Err(Error::EigenSolverFailed)
}

/// All eigenvalues of the generator. Sector −q is the complex conjugate of
/// sector q (the generator commutes with ρ ↦ ρ†), so only q ≥ 0 is solved.
pub fn eigenvalues(liou: &Liouvillian) -> Result<Vec<C64>> {
    let per_block: Vec<(i32, Vec<C64>)> = liou
        .blocks
        .par_iter()
        .filter(|b| b.charge >= 0)
        .map(|b| block_eigenvalues(&b.matrix).map(|ev| (b.charge, ev)))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (q, ev) in per_block {
        if q > 0 {
            out.extend(ev.iter().map(|z| z.conj()));
        }
        out.extend(ev);
    }
    Ok(out)
}

/// Smallest |Re λ| over all eigenvalues except the steady state's zero.
pub fn spectral_gap(liou: &Liouvillian) -> Result<f64> {
    let mut ev = eigenvalues(liou)?;
    let zero = (0..ev.len()).min_by(|&i, &j| ev[i].norm().total_cmp(&ev[j].norm())).ok_or(Error::EigenSolverFailed)?;
    ev.swap_remove(zero);
    ev.iter().map(|z| z.re.abs()).min_by(f64::total_cmp).ok_or(Error::EigenSolverFailed)
}

/// Least-squares exponent z of gap ∝ L^(−z).
pub fn fit_gap_exponent(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxx > 0.0).then(|| -sxy / sxx)
}

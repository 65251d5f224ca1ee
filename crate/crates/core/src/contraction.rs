//! Joint auxiliary-space contraction of placed encoders over several chains.
//!
//! Chains that are coupled by a multi-chain encoder share one state vector of
//! dimension 4^m (first chain most significant); independent groups are
//! contracted separately and multiplied, since ρ∞ is a product over chains.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::encoder::{Encoder, SiteRef};
use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ONE, ZERO};
use crate::mpo::{label_transfer, Aux4, MpoNess};
use crate::pauli::PauliLabel;

/// Largest number of chains contracted jointly.
pub const MAX_JOINT_CHAINS: usize = 9;

/// How sites not covered by any encoder are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Tiling {
    /// Uncovered sites contribute the identity operator.
    #[default]
    Free,
    /// Every site must belong to exactly one encoder.
    Strict,
}

/// Result of contracting a set of encoders against ∏_k ρ∞^{(k)}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contraction {
    /// ⟨vacuum| ∏ transfer |vacuum⟩ over all chains, unnormalized.
    pub aux_amplitude: C64,
    /// ∏_k Tr(S_k S_k†).
    pub norm: f64,
    /// aux_amplitude / norm = Tr(ρ∞ ∏ E).
    pub value: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Slot {
    Footprint(usize),
    /// Uncovered run of sites `from..=to` on a chain (0-based chain index).
    Pad {
        chain: usize,
        from: usize,
        to: usize,
    },
}

/// (0-based chain, first site, last site).
pub(crate) type ChainRange = (usize, usize, usize);

#[derive(Debug, Clone)]
pub(crate) struct Step {
    pub slot: Slot,
    /// Positions of the touched chains inside the component, ascending.
    pub axes: Vec<usize>,
    /// Global (0-based) chain index and inclusive site range per touched chain.
    pub ranges: Vec<(usize, usize, usize)>,
}

#[derive(Debug, Clone)]
pub(crate) struct Component {
    pub chains: Vec<usize>,
    pub steps: Vec<Step>,
}

/// Validates footprints against the chains and orders them into steps that
/// advance every chain from site 1 to site L.
pub(crate) fn plan(chains: &[MpoNess], footprints: &[&[SiteRef]], tiling: Tiling) -> Result<Vec<Component>> {
    let n = chains.len();
    let mut owner: Vec<Vec<Option<usize>>> = chains.iter().map(|m| vec![None; m.len() + 1]).collect();
    let mut ranges: Vec<Vec<(usize, usize, usize)>> = Vec::with_capacity(footprints.len());
    for (idx, fp) in footprints.iter().enumerate() {
        let mut by_chain: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for s in fp.iter() {
            if s.chain < 1 || s.chain > n || s.site < 1 || s.site > chains[s.chain - 1].len() {
                return Err(Error::SiteOutOfRange { site: *s });
            }
            let slot = &mut owner[s.chain - 1][s.site];
            if slot.is_some() {
                return Err(Error::OverlappingFootprints { site: *s });
            }
            *slot = Some(idx);
            by_chain.entry(s.chain - 1).or_default().push(s.site);
        }
        let mut r = Vec::new();
        for (chain, mut sites) in by_chain {
            sites.sort_unstable();
            let (lo, hi) = (sites[0], *sites.last().unwrap());
            if hi - lo + 1 != sites.len() {
                return Err(Error::NonContiguousFootprint { index: idx, chain: chain + 1 });
            }
            r.push((chain, lo, hi));
        }
        ranges.push(r);
    }

    // Per-chain queues of items in site order.
    let mut items: Vec<(Slot, Vec<ChainRange>)> =
        footprints.iter().enumerate().map(|(i, _)| (Slot::Footprint(i), ranges[i].clone())).collect();
    for (k, row) in owner.iter().enumerate() {
        let mut j = 1;
        while j < row.len() {
            if row[j].is_some() {
                j += 1;
                continue;
            }
            if tiling == Tiling::Strict {
                return Err(Error::UncoveredSite { site: SiteRef::new(k + 1, j) });
            }
            let from = j;
            while j < row.len() && row[j].is_none() {
                j += 1;
            }
            items.push((Slot::Pad { chain: k, from, to: j - 1 }, vec![(k, from, j - 1)]));
        }
    }
    let mut queues: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, (_, r)) in items.iter().enumerate() {
        for &(k, lo, _) in r {
            queues[k].push((lo, i));
        }
    }
    for q in &mut queues {
        q.sort_unstable();
    }
    let mut head = vec![0usize; n];
    let mut order = Vec::with_capacity(items.len());
    let mut done = vec![false; items.len()];
    while order.len() < items.len() {
        let ready = (0..n).filter_map(|k| queues[k].get(head[k]).map(|&(_, i)| i)).find(|&i| {
            !done[i] && items[i].1.iter().all(|&(k, _, _)| queues[k].get(head[k]).map(|&(_, j)| j) == Some(i))
        });
        let Some(i) = ready else {
            let chain = (0..n).find(|&k| head[k] < queues[k].len()).unwrap_or(0);
            return Err(Error::InconsistentOrdering { chain: chain + 1 });
        };
        for &(k, _, _) in &items[i].1 {
            head[k] += 1;
        }
        done[i] = true;
        order.push(i);
    }

    // Group chains joined by multi-chain items.
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (_, r) in &items {
        for w in r.windows(2) {
            let (a, b) = (find(&mut parent, w[0].0), find(&mut parent, w[1].0));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for k in 0..n {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().push(k);
    }
    let mut comps: Vec<Component> =
        groups.into_values().map(|chains| Component { chains, steps: Vec::new() }).collect();
    let mut comp_of = vec![(0usize, 0usize); n];
    for (ci, comp) in comps.iter().enumerate() {
        for (pos, &k) in comp.chains.iter().enumerate() {
            comp_of[k] = (ci, pos);
        }
    }
    if let Some(big) = comps.iter().find(|c| c.chains.len() > MAX_JOINT_CHAINS) {
        return Err(Error::TooLarge {
            what: "jointly contracted chains",
            size: big.chains.len(),
            limit: MAX_JOINT_CHAINS,
        });
    }
    for i in order {
        let (slot, r) = items[i].clone();
        if r.is_empty() {
            continue;
        }
        let ci = comp_of[r[0].0].0;
        let axes = r.iter().map(|&(k, _, _)| comp_of[k].1).collect();
        comps[ci].steps.push(Step { slot, axes, ranges: r });
    }
    Ok(comps)
}

/// Transfer operator of an encoder on the chains in `ranges`, as a
/// 4^m × 4^m matrix (first listed chain most significant). Sites of the range
/// a term leaves unlabeled carry the identity transfer.
pub(crate) fn encoder_op(chains: &[MpoNess], enc: &Encoder, ranges: &[(usize, usize, usize)]) -> CMat {
    let dim = 4usize.pow(ranges.len() as u32);
    let mut out = CMat::zeros(dim, dim);
    let mut cache: BTreeMap<(usize, PauliLabel), Aux4> = BTreeMap::new();
    for t in enc.terms() {
        let mut op = CMat::from_element(1, 1, t.coeff);
        for &(k, lo, hi) in ranges {
            let mut m = Aux4::identity();
            for site in lo..=hi {
                let label = t.labels.get(&SiteRef::new(k + 1, site)).copied().unwrap_or(PauliLabel::Id);
                let tr = *cache.entry((k, label)).or_insert_with(|| label_transfer(chains[k].doubled(), label));
                m = tr * m;
            }
            op = op.kronecker(&CMat::from_fn(4, 4, |r, c| m[(r, c)]));
        }
        out += op;
    }
    out
}

pub(crate) fn pad_op(chain: &MpoNess, from: usize, to: usize) -> CMat {
    let step = label_transfer(chain.doubled(), PauliLabel::Id);
    let mut m = Aux4::identity();
    for _ in from..=to {
        m = step * m;
    }
    CMat::from_fn(4, 4, |r, c| m[(r, c)])
}

pub(crate) fn vacuum_state(nchains: usize) -> Vec<C64> {
    let mut v = vec![ZERO; 4usize.pow(nchains as u32)];
    v[0] = ONE;
    v
}

/// Applies `op` to the listed axes (ascending) of a vector over `nax` chains.
pub(crate) fn apply_op(v: &[C64], nax: usize, axes: &[usize], op: &CMat) -> Vec<C64> {
    let k = axes.len();
    let sub = 4usize.pow(k as u32);
    debug_assert_eq!(op.nrows(), sub);
    let stride = |a: usize| 4usize.pow((nax - 1 - a) as u32);
    let offsets: Vec<usize> =
        (0..sub).map(|idx| (0..k).map(|i| ((idx >> (2 * (k - 1 - i))) & 3) * stride(axes[i])).sum()).collect();
    let mut out = vec![ZERO; v.len()];
    let mut x = vec![ZERO; sub];
    for base in 0..v.len() {
        if axes.iter().any(|&a| (base / stride(a)) % 4 != 0) {
            continue;
        }
        let mut any = false;
        for (xi, off) in x.iter_mut().zip(&offsets) {
            *xi = v[base + off];
            any |= *xi != ZERO;
        }
        if !any {
            continue;
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, xc) in x.iter().enumerate() {
                acc += op[(r, c)] * xc;
            }
            out[base + off] = acc;
        }
    }
    out
}

/// Contracts the encoders against the product steady state of `chains`.
pub fn contract_encoders(chains: &[MpoNess], encs: &[Encoder], tiling: Tiling) -> Result<Contraction> {
    let mut scalar = ONE;
    let mut placed: Vec<&Encoder> = Vec::with_capacity(encs.len());
    for e in encs {
        if e.footprint().is_empty() {
            scalar *= e.terms().iter().map(|t| t.coeff).sum::<C64>();
        } else {
            placed.push(e);
        }
    }
    let footprints: Vec<&[SiteRef]> = placed.iter().map(|e| e.footprint()).collect();
    let comps = plan(chains, &footprints, tiling)?;
    let mut amp = scalar;
    for comp in &comps {
        let nax = comp.chains.len();
        let mut v = vacuum_state(nax);
        for step in &comp.steps {
            let op = match step.slot {
                Slot::Footprint(i) => encoder_op(chains, placed[i], &step.ranges),
                Slot::Pad { chain, from, to } => pad_op(&chains[chain], from, to),
            };
            v = apply_op(&v, nax, &step.axes, &op);
        }
        amp *= v[0];
    }
    let norm: f64 = chains.iter().map(|m| m.norm_const()).product();
    Ok(Contraction { aux_amplitude: amp, norm, value: amp / norm })
}

/// Tr(ρ∞ ∏_ξ E_ξ) over the product of the given chains.
pub fn expect_encoder_product(chains: &[MpoNess], encs: &[Encoder], tiling: Tiling) -> Result<C64> {
    contract_encoders(chains, encs, tiling).map(|c| c.value)
}

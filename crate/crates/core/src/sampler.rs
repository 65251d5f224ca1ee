//! Projective measurement of normal encoders on the product steady state and
//! the Monte Carlo estimator Γ built from the sampled eigenvalues.
//!
//! Outcome probabilities come from the exact joint table. Each connected
//! group of chains gets its own table; groups are independent because the
//! steady state is a product over chains. Sampling uses ChaCha8 seeded from a
//! 64-bit master seed. Worker `w` draws from stream `w`, so a run with one
//! worker reproduces the serial sampler exactly.

use nalgebra::linalg::Schur;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contraction::{encoder_op, pad_op, plan, vacuum_state, Slot, Tiling};
use crate::encoder::{Encoder, SiteRef};
use crate::error::{Error, Result};
use crate::linalg::{normality_defect, CMat, C64, ONE, ZERO};
use crate::mpo::MpoNess;

/// Eigenvalues closer than this (relative to the spectral radius, floored at
/// one) are merged into a single projector.
pub const CLUSTER_TOL: f64 = 1e-9;

/// Largest outcome table built for one group of chains.
pub const MAX_OUTCOMES: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct SpectralProjector {
    pub eigenvalue: C64,
    /// Orthogonal projector on the footprint.
    pub matrix: CMat,
    pub rank: usize,
}

/// Measurement of one primitive encoder.
#[derive(Debug, Clone)]
pub struct PlanEntry {
    pub footprint: Vec<SiteRef>,
    pub projectors: Vec<SpectralProjector>,
    /// Position of the originating encoder in the input list.
    pub source: usize,
}

impl PlanEntry {
    /// max |Σ g P − E| entrywise.
    pub fn reconstruction_error(&self, dense: &CMat) -> f64 {
        let mut m = dense.clone();
        for p in &self.projectors {
            m -= p.matrix.map(|z| z * p.eigenvalue);
        }
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// max |Σ P − 1| and max |P_a P_b − δ_ab P_a| entrywise.
    pub fn projector_defects(&self) -> (f64, f64) {
        let dim = self.projectors.first().map_or(1, |p| p.matrix.nrows());
        let mut sum = CMat::zeros(dim, dim);
        let mut orth: f64 = 0.0;
        for (a, pa) in self.projectors.iter().enumerate() {
            sum += &pa.matrix;
            for (b, pb) in self.projectors.iter().enumerate() {
                let mut prod = &pa.matrix * &pb.matrix;
                if a == b {
                    prod -= &pa.matrix;
                }
                orth = orth.max(prod.iter().map(|z| z.norm()).fold(0.0, f64::max));
            }
        }
        let complete = (sum - CMat::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        (complete, orth)
    }
}

#[derive(Debug, Clone, Default)]
pub struct MeasurementPlan {
    pub entries: Vec<PlanEntry>,
    /// Product of encoders with an empty footprint (pure numbers).
    pub scalar: C64,
}

/// Spectral projectors of a normal matrix, degenerate eigenvalues merged.
pub fn spectral_decomposition(m: &CMat) -> Result<Vec<SpectralProjector>> {
    let dim = m.nrows();
    let schur = [1e-14, 1e-13, 1e-12]
        .iter()
        .find_map(|&eps| Schur::try_new(m.clone(), eps, 500 * dim.max(1)))
        .ok_or(Error::EigenSolverFailed)?;
    let (q, t) = schur.unpack();
    let evals: Vec<C64> = (0..dim).map(|i| t[(i, i)]).collect();
    let radius = evals.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let tol = CLUSTER_TOL * radius;

    // single-linkage clusters
    let mut label: Vec<usize> = (0..dim).collect();
    for i in 0..dim {
        for j in 0..i {
            if (evals[i] - evals[j]).norm() <= tol {
                let (old, new) = (label[i], label[j]);
                label.iter_mut().filter(|l| **l == old).for_each(|l| *l = new);
            }
        }
    }
    let mut roots: Vec<usize> = label.clone();
    roots.sort_unstable();
    roots.dedup();
    Ok(roots
        .into_iter()
        .map(|root| {
            let members: Vec<usize> = (0..dim).filter(|&i| label[i] == root).collect();
            let mut p = CMat::zeros(dim, dim);
            for &i in &members {
                let v = q.column(i);
                p += v * v.adjoint();
            }
            let g = members.iter().map(|&i| evals[i]).sum::<C64>() / members.len() as f64;
            SpectralProjector { eigenvalue: g, matrix: p, rank: members.len() }
        })
        .collect())
}

fn primitives(e: &Encoder) -> Vec<&Encoder> {
    if e.factors().is_empty() {
        vec![e]
    } else {
        e.factors().iter().flat_map(primitives).collect()
    }
}

/// One plan entry per primitive tensor factor of every encoder.
pub fn build_plan(encs: &[Encoder]) -> Result<MeasurementPlan> {
    let mut plan = MeasurementPlan { entries: Vec::new(), scalar: ONE };
    for (source, e) in encs.iter().enumerate() {
        if e.footprint().is_empty() {
            plan.scalar *= e.terms().iter().map(|t| t.coeff).sum::<C64>();
            continue;
        }
        for f in primitives(e) {
            let dense = f.dense_matrix()?;
            if !f.is_normal() {
                let scale = dense.norm_squared().max(f64::MIN_POSITIVE);
                return Err(Error::NotNormal {
                    footprint: f.footprint().to_vec(),
                    defect: normality_defect(&dense) / scale,
                });
            }
            plan.entries.push(PlanEntry {
                footprint: f.footprint().to_vec(),
                projectors: spectral_decomposition(&dense)?,
                source,
            });
        }
    }
    Ok(plan)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Projector index per plan entry of the component, in entry order.
    pub indices: Vec<usize>,
    pub probability: f64,
    pub g_product: C64,
}

/// Exact outcome table of one connected group of chains.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentTable {
    /// 1-based chains of the group.
    pub chains: Vec<usize>,
    /// Plan entries measured in this group, ascending.
    pub entries: Vec<usize>,
    pub outcomes: Vec<Outcome>,
}

impl ComponentTable {
    pub fn total_probability(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability).sum()
    }

    /// Σ p·∏g over the group.
    pub fn expectation(&self) -> C64 {
        self.outcomes.iter().map(|o| o.g_product * o.probability).sum()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointDistribution {
    pub components: Vec<ComponentTable>,
    pub scalar: C64,
}

impl JointDistribution {
    /// Exhaustive Σ p·∏g = E[Γ].
    pub fn exact_expectation(&self) -> C64 {
        self.scalar * self.components.iter().map(|c| c.expectation()).product::<C64>()
    }

    pub fn outcome_count(&self) -> usize {
        self.components.iter().map(|c| c.outcomes.len()).product()
    }
}

/// Builds the exact outcome table by depth-first contraction: every branch
/// inserts one spectral projector per footprint.
pub fn joint_distribution(chains: &[MpoNess], plan_: &MeasurementPlan) -> Result<JointDistribution> {
    let footprints: Vec<&[SiteRef]> = plan_.entries.iter().map(|e| e.footprint.as_slice()).collect();
    let comps = plan(chains, &footprints, Tiling::Free)?;
    let mut tables = Vec::with_capacity(comps.len());
    for comp in comps {
        let nax = comp.chains.len();
        let size = comp.steps.iter().fold(1usize, |acc, st| match st.slot {
            Slot::Footprint(i) => acc.saturating_mul(plan_.entries[i].projectors.len()),
            Slot::Pad { .. } => acc,
        });
        if size > MAX_OUTCOMES {
            return Err(Error::TooLarge { what: "outcome table", size, limit: MAX_OUTCOMES });
        }
        let norm: f64 = comp.chains.iter().map(|&k| chains[k].norm_const()).product();
        // transfer operators per step and branch
        let mut ops: Vec<(Vec<usize>, Vec<CMat>, Option<usize>)> = Vec::with_capacity(comp.steps.len());
        for step in &comp.steps {
            match step.slot {
                Slot::Footprint(i) => {
                    let entry = &plan_.entries[i];
                    let branch = entry
                        .projectors
                        .iter()
                        .map(|p| {
                            Encoder::from_dense(&entry.footprint, &p.matrix)
                                .map(|e| encoder_op(chains, &e, &step.ranges))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    ops.push((step.axes.clone(), branch, Some(i)));
                }
                Slot::Pad { chain, from, to } => {
                    ops.push((step.axes.clone(), vec![pad_op(&chains[chain], from, to)], None));
                }
            }
        }
        let mut entries: Vec<usize> = ops.iter().filter_map(|o| o.2).collect();
        let order = entries.clone();
        entries.sort_unstable();

        let mut outcomes = Vec::new();
        let mut path: Vec<usize> = Vec::new();
        dfs(&ops, 0, vacuum_state(nax), nax, &mut path, &mut |path, amp| {
            // path follows step order; report indices in ascending entry order
            let mut indices = vec![0; entries.len()];
            let mut g = ONE;
            for (k, &entry) in order.iter().enumerate() {
                let pos = entries.binary_search(&entry).expect("entry present");
                indices[pos] = path[k];
                g *= plan_.entries[entry].projectors[path[k]].eigenvalue;
            }
            outcomes.push(Outcome { indices, probability: amp.re / norm, g_product: g });
        });
        tables.push(ComponentTable { chains: comp.chains.iter().map(|k| k + 1).collect(), entries, outcomes });
    }
    Ok(JointDistribution { components: tables, scalar: plan_.scalar })
}

type Branches = (Vec<usize>, Vec<CMat>, Option<usize>);

fn dfs(
    ops: &[Branches],
    at: usize,
    v: Vec<C64>,
    nax: usize,
    path: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize], C64),
) {
    let Some((axes, branch, entry)) = ops.get(at) else {
        emit(path, v[0]);
        return;
    };
    if entry.is_none() {
        let next = crate::contraction::apply_op(&v, nax, axes, &branch[0]);
        return dfs(ops, at + 1, next, nax, path, emit);
    }
    for (b, op) in branch.iter().enumerate() {
        let next = crate::contraction::apply_op(&v, nax, axes, op);
        path.push(b);
        dfs(ops, at + 1, next, nax, path, emit);
        path.pop();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    #[serde(rename = "M")]
    pub samples: usize,
    pub gamma_mean: C64,
    /// (1/(M−1)) Σ |X_m − Γ|², zero when M = 1.
    pub empirical_variance: f64,
    pub seed: u64,
    pub truth: Option<C64>,
}

impl EstimatorResult {
    pub fn standard_error(&self) -> f64 {
        (self.empirical_variance / self.samples as f64).sqrt()
    }
}

/// Running mean and sum of squared deviations; merges with Chan's update.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: usize,
    mean: C64,
    m2: f64,
}

impl Moments {
    const EMPTY: Moments = Moments { n: 0, mean: ZERO, m2: 0.0 };

    fn push(&mut self, x: C64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += (d.conj() * (x - self.mean)).re;
    }

    fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Moments {
            n,
            mean: self.mean + d * (o.n as f64 / n as f64),
            m2: self.m2 + o.m2 + d.norm_sqr() * (self.n as f64 * o.n as f64 / n as f64),
        }
    }
}

struct Sampler<'a> {
    dist: &'a JointDistribution,
    weights: Vec<WeightedIndex<f64>>,
}

impl<'a> Sampler<'a> {
    fn new(dist: &'a JointDistribution) -> Result<Self> {
        let weights = dist
            .components
            .iter()
            .map(|c| {
                WeightedIndex::new(c.outcomes.iter().map(|o| o.probability.max(0.0)))
                    .map_err(|_| Error::ZeroProbability)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Sampler { dist, weights })
    }

    fn run(&self, rng: &mut ChaCha8Rng, m: usize) -> Moments {
        let mut acc = Moments::EMPTY;
        for _ in 0..m {
            let mut x = self.dist.scalar;
            for (c, w) in self.dist.components.iter().zip(&self.weights) {
                x *= c.outcomes[w.sample(rng)].g_product;
            }
            acc.push(x);
        }
        acc
    }
}

fn worker_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn finish(acc: Moments, seed: u64, truth: C64) -> EstimatorResult {
    let variance = if acc.n > 1 { acc.m2 / (acc.n - 1) as f64 } else { 0.0 };
    EstimatorResult { samples: acc.n, gamma_mean: acc.mean, empirical_variance: variance, seed, truth: Some(truth) }
}

/// Draws `m` outcomes and averages the eigenvalue products.
pub fn sample_gamma(dist: &JointDistribution, m: usize, seed: u64) -> Result<EstimatorResult> {
    sample_gamma_parallel(dist, m, seed, 1)
}

/// Splits the `m` draws over `workers` independent streams and merges the
/// moments.
pub fn sample_gamma_parallel(dist: &JointDistribution, m: usize, seed: u64, workers: usize) -> Result<EstimatorResult> {
    if m < 1 {
        return Err(Error::NoSamples);
    }
    let sampler = Sampler::new(dist)?;
    let workers = workers.clamp(1, m);
    let acc = (0..workers)
        .into_par_iter()
        .map(|w| {
            let share = m / workers + usize::from(w < m % workers);
            sampler.run(&mut worker_rng(seed, w as u64), share)
        })
        .reduce(|| Moments::EMPTY, Moments::merge);
    Ok(finish(acc, seed, dist.exact_expectation()))
}

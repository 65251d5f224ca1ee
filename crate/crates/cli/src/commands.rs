use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use ness_core::circuit::{
    brute_force_count, compile_circuit, count_satisfying, parse_circuit, parse_function, EncoderSource,
};
use ness_core::contraction::Tiling;
use ness_core::linalg::{hermitian_eigenvalues, hermiticity_defect, relative_error, trace_distance, CMat, ONE};
use ness_core::lindblad::{self, build_liouvillian, fit_gap_exponent, spectral_gap, steady_state, LiouvillianModel};
use ness_core::mpo::{materialize_density, MpoNess};
use ness_core::sampler::{build_plan, joint_distribution, sample_gamma_parallel};
use ness_core::statevector::transition_amplitude;
use ness_core::{AuxSite, Coupling, PauliLabel};
use serde::Serialize;

use crate::output::{Cx, Destination, Format};
use crate::{Cli, Command};

/// Amplitudes below this are compared in absolute terms.
const AMPLITUDE_FLOOR: f64 = 1e-6;

pub enum Status {
    Passed,
    Failed(String),
}

fn status(passed: bool, msg: impl FnOnce() -> String) -> Status {
    if passed {
        Status::Passed
    } else {
        Status::Failed(msg())
    }
}

pub fn run(cli: &Cli) -> Result<Status> {
    let coupling = Coupling::new(cli.lambda)?;
    let dest = Destination::resolve(cli.out.as_deref(), cli.output_dir.as_deref(), cli.command.name(), cli.format);
    let tiling = if cli.strict_tiling { Tiling::Strict } else { Tiling::Free };
    match &cli.command {
        Command::BuildNess { length, no_dense } => build_ness(&dest, coupling, *length, *no_dense),
        Command::VerifyNess { length, tolerance } => verify_ness(&dest, cli, coupling, *length, *tolerance),
        Command::Amplitude { circuit, tolerance } => amplitude(&dest, coupling, tiling, circuit, *tolerance),
        Command::Sample { circuit, samples, seed, runs, workers, outcomes } => {
            sample(&dest, coupling, tiling, circuit, *samples, *seed, *runs, *workers, outcomes.as_deref())
        }
        Command::CountSat { function } => count_sat(&dest, coupling, function),
        Command::GapScan { lmin, lmax } => gap_scan(&dest, cli, coupling, *lmin, *lmax),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

#[derive(Serialize)]
struct DenseEntry {
    row: usize,
    col: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct DenseBlock {
    dim: usize,
    trace: Cx,
    hermiticity_defect: f64,
    /// Nonzero entries only.
    entries: Vec<DenseEntry>,
}

#[derive(Serialize)]
struct BuildReport {
    relation: &'static str,
    length: usize,
    lambda: f64,
    norm: f64,
    bond_dimension: usize,
    aux_matrices: Vec<(String, [[Cx; 2]; 2])>,
    dense: Option<DenseBlock>,
}

fn entries(m: &CMat) -> Vec<DenseEntry> {
    let mut out = Vec::new();
    for row in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(row, col)];
            if z.norm() > 0.0 {
                out.push(DenseEntry { row, col, re: z.re, im: z.im });
            }
        }
    }
    out
}

fn build_ness(dest: &Destination, coupling: Coupling, length: usize, no_dense: bool) -> Result<Status> {
    let m = MpoNess::new(length, coupling)?;
    let site = AuxSite::build(coupling);
    let aux_matrices = [PauliLabel::Id, PauliLabel::Plus, PauliLabel::Minus]
        .iter()
        .map(|&l| {
            let a = site.get(l).expect("bond matrix");
            (format!("A{}", l.symbol()), [[a[(0, 0)].into(), a[(0, 1)].into()], [a[(1, 0)].into(), a[(1, 1)].into()]])
        })
        .collect();
    let dense = if no_dense {
        None
    } else {
        let rho = materialize_density(&m)?;
        Some(DenseBlock {
            dim: rho.nrows(),
            trace: rho.trace().into(),
            hermiticity_defect: hermiticity_defect(&rho),
            entries: entries(&rho),
        })
    };
    let report = BuildReport {
        relation: "rho = S S^dagger / Tr(S S^dagger) with S = <0|A_{s_L}...A_{s_1}|0> sigma^{s_1}...sigma^{s_L}",
        length,
        lambda: coupling.lambda(),
        norm: m.norm_const(),
        bond_dimension: 2,
        aux_matrices,
        dense,
    };
    match dest.format {
        Format::Json => dest.json(&report)?,
        Format::Csv => {
            let mut comments = vec![
                ("length", length.to_string()),
                ("lambda", coupling.lambda().to_string()),
                ("norm", report.norm.to_string()),
            ];
            if let Some(d) = &report.dense {
                comments.push(("trace_re", d.trace.re.to_string()));
                comments.push(("trace_im", d.trace.im.to_string()));
            }
            let rows = report.dense.map(|d| d.entries).unwrap_or_default();
            dest.csv(&comments, &rows)?;
        }
    }
    Ok(Status::Passed)
}

#[derive(Serialize)]
struct VerifyReport {
    relation: &'static str,
    length: usize,
    lambda: f64,
    delta: f64,
    field: f64,
    trace_distance: f64,
    /// Frobenius norm of the generator applied to the MPO state.
    residual: f64,
    spectral_gap: f64,
    min_eigenvalue: f64,
    trace_re: f64,
    hermiticity_defect: f64,
    tolerance: f64,
    passed: bool,
}

fn verify_ness(dest: &Destination, cli: &Cli, coupling: Coupling, length: usize, tolerance: f64) -> Result<Status> {
    let model = LiouvillianModel::new(length, cli.delta, cli.field, coupling)?;
    let liou = build_liouvillian(&model);
    let exact = steady_state(&liou)?;
    let rho = materialize_density(&MpoNess::new(length, coupling)?)?;
    let distance = trace_distance(&rho, &exact);
    let min_eig = hermitian_eigenvalues(&rho)[0];
    let report = VerifyReport {
        relation: "L(rho) = 0 for rho = S S^dagger / Tr(S S^dagger)",
        length,
        lambda: coupling.lambda(),
        delta: cli.delta,
        field: cli.field,
        trace_distance: distance,
        residual: liou.apply(&rho).norm(),
        spectral_gap: spectral_gap(&liou)?,
        min_eigenvalue: min_eig,
        trace_re: rho.trace().re,
        hermiticity_defect: hermiticity_defect(&rho),
        tolerance,
        passed: distance <= tolerance && min_eig >= -1e-10,
    };
    let passed = report.passed;
    match dest.format {
        Format::Json => dest.json(&report)?,
        Format::Csv => dest.csv(&[], &[&report])?,
    }
    Ok(status(passed, || format!("trace distance {distance:e} exceeds {tolerance:e} or state not positive")))
}

#[derive(Serialize)]
struct NonNormal {
    source: String,
    relative_defect: f64,
}

#[derive(Serialize)]
struct AmplitudeReport {
    relation: &'static str,
    circuit: String,
    qubits: usize,
    chain_length: usize,
    lambda: f64,
    raw_expectation: Cx,
    aux_amplitude: Cx,
    norm: f64,
    constant: Cx,
    corrected_amplitude: Cx,
    oracle_amplitude: Cx,
    relative_error: f64,
    tolerance: f64,
    passed: bool,
    non_normal: Vec<NonNormal>,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct AmplitudeRow {
    raw_re: f64,
    raw_im: f64,
    constant_re: f64,
    constant_im: f64,
    amplitude_re: f64,
    amplitude_im: f64,
    oracle_re: f64,
    oracle_im: f64,
    relative_error: f64,
    non_normal: usize,
}

fn describe(src: EncoderSource) -> String {
    match src {
        EncoderSource::Gate(i) => format!("gate {}", i + 1),
        EncoderSource::Pad { qubit, layer } => format!("pad on qubit {qubit}, layer {}", layer + 1),
    }
}

fn amplitude(dest: &Destination, coupling: Coupling, tiling: Tiling, path: &Path, tolerance: f64) -> Result<Status> {
    let circuit = parse_circuit(&read(path)?)?;
    let compiled = compile_circuit(&circuit, coupling)?;
    let eval = compiled.evaluate(tiling)?;
    let oracle = transition_amplitude(&circuit)?;
    let err = relative_error(eval.amplitude, oracle, AMPLITUDE_FLOOR);
    let non_normal: Vec<NonNormal> =
        compiled.non_normal().into_iter().map(|(s, d)| NonNormal { source: describe(s), relative_defect: d }).collect();
    let warnings = non_normal
        .iter()
        .map(|n| format!("encoder of {} is not normal and cannot be measured projectively", n.source))
        .collect();
    let report = AmplitudeReport {
        relation: "Tr(rho_1 x ... x rho_n E_1 ... E_m) = constant x <fin| U |in>",
        circuit: path.display().to_string(),
        qubits: circuit.n(),
        chain_length: compiled.layout.len,
        lambda: coupling.lambda(),
        raw_expectation: eval.contraction.value.into(),
        aux_amplitude: eval.contraction.aux_amplitude.into(),
        norm: eval.contraction.norm,
        constant: eval.constant.into(),
        corrected_amplitude: eval.amplitude.into(),
        oracle_amplitude: oracle.into(),
        relative_error: err,
        tolerance,
        passed: err <= tolerance,
        non_normal,
        warnings,
    };
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match dest.format {
        Format::Json => dest.json(&report)?,
        Format::Csv => {
            let row = AmplitudeRow {
                raw_re: eval.contraction.value.re,
                raw_im: eval.contraction.value.im,
                constant_re: eval.constant.re,
                constant_im: eval.constant.im,
                amplitude_re: eval.amplitude.re,
                amplitude_im: eval.amplitude.im,
                oracle_re: oracle.re,
                oracle_im: oracle.im,
                relative_error: err,
                non_normal: report.non_normal.len(),
            };
            dest.csv(&[], &[row])?;
        }
    }
    Ok(status(err <= tolerance, || format!("relative error {err:e} exceeds {tolerance:e}")))
}

#[derive(Serialize)]
struct SampleRow {
    seed: u64,
    samples: usize,
    gamma_re: f64,
    gamma_im: f64,
    variance: f64,
    standard_error: f64,
    truth_re: f64,
    truth_im: f64,
    amplitude_re: f64,
    amplitude_im: f64,
}

#[derive(Serialize)]
struct OutcomeRow {
    component: usize,
    outcome: String,
    probability: f64,
    g_re: f64,
    g_im: f64,
}

#[derive(Serialize)]
struct SampleReport {
    relation: &'static str,
    circuit: String,
    chain_length: usize,
    outcome_count: usize,
    exact_expectation: Cx,
    constant: Cx,
    runs: Vec<SampleRow>,
}

#[allow(clippy::too_many_arguments)]
fn sample(
    dest: &Destination,
    coupling: Coupling,
    tiling: Tiling,
    path: &Path,
    samples: usize,
    seed: u64,
    runs: usize,
    workers: usize,
    outcomes: Option<&Path>,
) -> Result<Status> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let circuit = parse_circuit(&read(path)?)?;
    let compiled = compile_circuit(&circuit, coupling)?;
    let constant = compiled.evaluate(tiling)?.constant;
    let plan = build_plan(&compiled.encoder_list())?;
    let dist = joint_distribution(&compiled.chains()?, &plan)?;
    if let Some(p) = outcomes {
        let mut rows = Vec::new();
        for (k, comp) in dist.components.iter().enumerate() {
            for o in &comp.outcomes {
                let outcome = o.indices.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
                rows.push(OutcomeRow {
                    component: k + 1,
                    outcome,
                    probability: o.probability,
                    g_re: o.g_product.re,
                    g_im: o.g_product.im,
                });
            }
        }
        Destination { path: Some(p.to_path_buf()), format: Format::Csv }.csv(&[], &rows)?;
    }
    let mut rows = Vec::with_capacity(runs);
    for s in seed..seed + runs as u64 {
        let r = sample_gamma_parallel(&dist, samples, s, workers)?;
        let truth = r.truth.unwrap_or(ONE);
        let amp = r.gamma_mean / constant;
        rows.push(SampleRow {
            seed: s,
            samples: r.samples,
            gamma_re: r.gamma_mean.re,
            gamma_im: r.gamma_mean.im,
            variance: r.empirical_variance,
            standard_error: r.standard_error(),
            truth_re: truth.re,
            truth_im: truth.im,
            amplitude_re: amp.re,
            amplitude_im: amp.im,
        });
    }
    match dest.format {
        Format::Json => dest.json(&SampleReport {
            relation: "E[Gamma] = sum over outcomes of p x product of eigenvalues",
            circuit: path.display().to_string(),
            chain_length: compiled.layout.len,
            outcome_count: dist.outcome_count(),
            exact_expectation: dist.exact_expectation().into(),
            constant: constant.into(),
            runs: rows,
        })?,
        Format::Csv => dest.csv(&[], &rows)?,
    }
    Ok(Status::Passed)
}

#[derive(Serialize)]
struct CountReportOut {
    relation: &'static str,
    variables: usize,
    count: usize,
    estimate: f64,
    brute_force: usize,
    amplitudes: [Cx; 2],
    chain_length: usize,
    chains: usize,
    passed: bool,
}

#[derive(Serialize)]
struct CountRow {
    variables: usize,
    count: usize,
    estimate: f64,
    brute_force: usize,
    chain_length: usize,
    chains: usize,
}

fn count_sat(dest: &Destination, coupling: Coupling, path: &Path) -> Result<Status> {
    let f = parse_function(&read(path)?)?.function;
    let r = count_satisfying(&f, coupling)?;
    let brute = brute_force_count(&f);
    let passed = r.count == brute;
    match dest.format {
        Format::Json => dest.json(&CountReportOut {
            relation: "s(f) = 2^n A_1 / (A_0 + A_1)",
            variables: f.n(),
            count: r.count,
            estimate: r.estimate,
            brute_force: brute,
            amplitudes: [r.amplitudes[0].into(), r.amplitudes[1].into()],
            chain_length: r.chain_length,
            chains: r.chains,
            passed,
        })?,
        Format::Csv => dest.csv(
            &[],
            &[CountRow {
                variables: f.n(),
                count: r.count,
                estimate: r.estimate,
                brute_force: brute,
                chain_length: r.chain_length,
                chains: r.chains,
            }],
        )?,
    }
    Ok(status(passed, || format!("encoder count {} differs from enumeration {brute}", r.count)))
}

#[derive(Serialize)]
struct GapPoint {
    length: usize,
    gap: f64,
}

#[derive(Serialize)]
struct GapReport {
    relation: &'static str,
    lambda: f64,
    delta: f64,
    field: f64,
    points: Vec<GapPoint>,
    fitted_exponent: Option<f64>,
    strictly_decreasing: bool,
}

fn gap_scan(dest: &Destination, cli: &Cli, coupling: Coupling, lmin: usize, lmax: usize) -> Result<Status> {
    if lmin > lmax {
        bail!("--lmin {lmin} exceeds --lmax {lmax}");
    }
    // validate both ends before the expensive work
    LiouvillianModel::new(lmin, cli.delta, cli.field, coupling)?;
    LiouvillianModel::new(lmax, cli.delta, cli.field, coupling)?;
    let mut points = Vec::new();
    for len in lmin..=lmax {
        let liou = build_liouvillian(&LiouvillianModel::new(len, cli.delta, cli.field, coupling)?);
        points.push(GapPoint { length: len, gap: spectral_gap(&liou)? });
    }
    let fit = fit_gap_exponent(&points.iter().map(|p| (p.length, p.gap)).collect::<Vec<_>>());
    let decreasing = points.windows(2).all(|w| w[1].gap < w[0].gap);
    match dest.format {
        Format::Json => dest.json(&GapReport {
            relation: "gap = min over nonzero eigenvalues of |Re lambda|, fitted as L^(-z)",
            lambda: coupling.lambda(),
            delta: cli.delta,
            field: cli.field,
            points,
            fitted_exponent: fit,
            strictly_decreasing: decreasing,
        })?,
        Format::Csv => {
            let z = fit.map_or_else(|| "none".to_string(), |z| z.to_string());
            dest.csv(&[("fitted_exponent", z), ("max_length", lindblad::MAX_SITES.to_string())], &points)?
        }
    }
    Ok(Status::Passed)
}

//! Physicality repair of Choi estimates and the iterative maximum-likelihood baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquire::{MeasurementRecord, Scheme};
use crate::channels::{apply_channel, ChoiMatrix};
use crate::error::{Error, Result};
use crate::qmat::{apply_on_wires, eig_hermitian, kron, partial_trace, CMatrix, C64, ONE, ZERO};
use crate::shadows::estimate_overlap;

/// Degeneracy threshold for the dominant eigenvalue in `purify`.
pub const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    Cp,
    Tp,
    Purify,
    Mle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub method: ProjectionMethod,
    pub input_trace: f64,
    pub output_trace: f64,
    /// Total weight of the negative eigenvalues that were removed.
    pub negative_mass: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    /// Set when the dominant eigenvalue was degenerate and a tie-break was applied.
    #[serde(default)]
    pub degenerate: bool,
    /// Effects whose probability was clamped away from zero.
    #[serde(default)]
    pub regularized: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub log_likelihood: Vec<f64>,
}

impl ProjectionReport {
    fn new(method: ProjectionMethod, input_trace: f64, output_trace: f64) -> Self {
        Self {
            method,
            input_trace,
            output_trace,
            negative_mass: 0.0,
            iterations: None,
            converged: None,
            degenerate: false,
            regularized: 0,
            log_likelihood: Vec::new(),
        }
    }
}

/// Closest PSD matrix with the same trace, by eigenvalue rescaling.
///
/// Returns the projected matrix and the negative mass removed.
pub fn psd_rescale(m: &CMatrix) -> Result<(CMatrix, f64)> {
    let eig = eig_hermitian(&m.hermitize())?;
    let mut lambda = eig.values.clone();
    let negative_mass: f64 = lambda.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let trace: f64 = lambda.iter().sum();
    if trace <= 0.0 {
        // no PSD matrix has a negative trace; the zero matrix is the nearest with trace 0
        return Ok((CMatrix::zeros(m.dim()), negative_mass));
    }
    // eigenvalues are sorted descending, so scan from the end
    let mut deficit = 0.0;
    let mut i = lambda.len();
    while i > 0 && lambda[i - 1] + deficit / (i as f64) < 0.0 {
        deficit += lambda[i - 1];
        lambda[i - 1] = 0.0;
        i -= 1;
    }
    for l in lambda.iter_mut().take(i) {
        *l += deficit / i as f64;
    }
    let out = crate::qmat::EigenDecomposition { values: lambda, vectors: eig.vectors }.reconstruct();
    Ok((out.hermitize(), negative_mass))
}

pub fn cp_project_with_report(l: &ChoiMatrix) -> Result<(ChoiMatrix, ProjectionReport)> {
    let (m, negative_mass) = psd_rescale(l.matrix())?;
    let out = ChoiMatrix::new(l.n(), m, l.is_normalized())?;
    let mut report = ProjectionReport::new(ProjectionMethod::Cp, l.trace(), out.trace());
    report.negative_mass = negative_mass;
    Ok((out, report))
}

/// PSD projection that keeps the trace.
pub fn cp_project(l: &ChoiMatrix) -> Result<ChoiMatrix> {
    Ok(cp_project_with_report(l)?.0)
}

/// Output-register partial trace `tr_out Λ`, an operator on the input copy.
pub fn trace_out_output(l: &ChoiMatrix) -> Result<CMatrix> {
    let n = l.n();
    partial_trace(&l.unnormalized_matrix(), &(0..n).collect::<Vec<_>>(), &vec![2; 2 * n])
}

/// `Λ − (tr_out Λ − I) ⊗ I / 2^n`, the Frobenius projection onto `tr_out Λ = I`.
pub fn tp_project(l: &ChoiMatrix) -> Result<ChoiMatrix> {
    let n = l.n();
    let d = 1usize << n;
    let mut excess = trace_out_output(l)?;
    for i in 0..d {
        excess[(i, i)] -= ONE;
    }
    let correction = kron(&excess, &CMatrix::identity(d)).scale_real(1.0 / d as f64);
    ChoiMatrix::unnormalized(n, &l.unnormalized_matrix() - &correction)
}

pub fn tp_project_with_report(l: &ChoiMatrix) -> Result<(ChoiMatrix, ProjectionReport)> {
    let out = tp_project(l)?;
    let report = ProjectionReport::new(ProjectionMethod::Tp, l.unnormalized_matrix().trace().re, out.trace());
    Ok((out, report))
}

/// Global phase making the first entry with modulus above `1e-9` real positive.
fn canonical_phase(v: &mut [C64]) {
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-9).copied() {
        let phase = lead.conj() / lead.norm();
        v.iter_mut().for_each(|z| *z *= phase);
    }
}

fn lexicographic(a: &[C64], b: &[C64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > 1e-12 {
                return p.total_cmp(&q);
            }
        }
    }
    std::cmp::Ordering::Equal
}

pub fn purify_with_report(l: &ChoiMatrix) -> Result<(ChoiMatrix, ProjectionReport)> {
    let n = l.n();
    let eig = eig_hermitian(&l.unnormalized_matrix().hermitize())?;
    let top = eig.values[0];
    let tied: Vec<usize> = (0..eig.values.len()).filter(|&k| top - eig.values[k] < DEGENERACY_TOL).collect();
    let mut candidates: Vec<Vec<C64>> = tied
        .iter()
        .map(|&k| {
            let mut v = eig.vector(k);
            canonical_phase(&mut v);
            v
        })
        .collect();
    candidates.sort_by(|a, b| lexicographic(a, b));
    let v = &candidates[0];
    let out = ChoiMatrix::unnormalized(n, CMatrix::projector(v).scale_real((1u64 << n) as f64))?;
    let mut report = ProjectionReport::new(ProjectionMethod::Purify, l.unnormalized_matrix().trace().re, out.trace());
    report.degenerate = tied.len() > 1;
    Ok((out, report))
}

/// Rank-1 Choi matrix `2^n v v†` from the dominant eigenvector.
pub fn purify(l: &ChoiMatrix) -> Result<ChoiMatrix> {
    Ok(purify_with_report(l)?.0)
}

/// Starting point of the maximum-likelihood iteration.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "init", rename_all = "snake_case")]
pub enum MleInit {
    #[default]
    MaximallyMixed,
    /// `A A† / tr` for a seeded random complex `A`.
    Random { seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MleConfig {
    pub init: MleInit,
    pub max_iter: usize,
    pub min_iter: usize,
    pub tol: f64,
}

impl Default for MleConfig {
    fn default() -> Self {
        Self { init: MleInit::MaximallyMixed, max_iter: 500, min_iter: 100, tol: 1e-3 }
    }
}

/// Observed rank-1 effect `|φ⟩⟨φ|` with its empirical frequency.
#[derive(Clone, Debug)]
pub struct Effect {
    pub vector: Vec<C64>,
    pub frequency: f64,
}

/// Effects `U†|b⟩⟨b|U` for every observed outcome of ancilla records.
pub fn observed_effects(records: &[MeasurementRecord]) -> Result<(usize, Vec<Effect>)> {
    let first = records.first().ok_or_else(|| Error::Empty("no measurement records".into()))?;
    let n = first.n;
    if records.iter().any(|r| r.scheme != Scheme::Ancilla || r.n != n) {
        return Err(Error::InvalidParameter("maximum likelihood needs ancilla records with one qubit count".into()));
    }
    let total: usize = records.iter().map(|r| r.outcomes.len()).sum();
    let m = 2 * n;
    let mut effects = Vec::new();
    for r in records {
        let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
        for rep in 0..r.outcomes.len() {
            *counts.entry(r.outcome_bits(rep)).or_default() += 1;
        }
        for (b, count) in counts {
            let mut v = vec![ZERO; 1 << m];
            v[b] = ONE;
            for blk in &r.blocks {
                apply_on_wires(&mut v, m, &blk.wires, &blk.matrix().adjoint())?;
            }
            effects.push(Effect { vector: v, frequency: count as f64 / total as f64 });
        }
    }
    Ok((n, effects))
}

fn expectation(v: &[C64], rho: &CMatrix) -> f64 {
    let rv = rho.apply(v).expect("dimension matches");
    v.iter().zip(&rv).map(|(a, b)| a.conj() * b).sum::<C64>().re
}

fn log_likelihood(effects: &[Effect], rho: &CMatrix) -> f64 {
    effects.iter().map(|e| e.frequency * expectation(&e.vector, rho).max(1e-300).ln()).sum()
}

/// `R(ρ) = Σ_j f_j / p_j(ρ) |φ_j⟩⟨φ_j|`, summed in fixed chunks for a deterministic result.
fn r_operator(effects: &[Effect], rho: &CMatrix) -> (CMatrix, usize) {
    let d = rho.dim();
    let chunk = (effects.len() / 64).max(64);
    let parts: Vec<(CMatrix, usize)> = effects
        .par_chunks(chunk)
        .map(|part| {
            let mut acc = CMatrix::zeros(d);
            let mut clamped = 0;
            for e in part {
                let mut p = expectation(&e.vector, rho);
                if p < 1e-12 {
                    p = 1e-12;
                    clamped += 1;
                }
                let w = e.frequency / p;
                let data = acc.data_mut();
                for i in 0..d {
                    let vi = e.vector[i] * w;
                    if vi == ZERO {
                        continue;
                    }
                    for j in 0..d {
                        data[i * d + j] += vi * e.vector[j].conj();
                    }
                }
            }
            (acc, clamped)
        })
        .collect();
    let mut r = CMatrix::zeros(d);
    let mut clamped = 0;
    for (p, c) in &parts {
        r += p;
        clamped += c;
    }
    (r, clamped)
}

fn normalized_sandwich(a: &CMatrix, rho: &CMatrix) -> CMatrix {
    let out = (&(a * rho) * &a.adjoint()).hermitize();
    let tr = out.trace().re;
    out.scale_real(1.0 / tr)
}

fn initial_state(init: &MleInit, d: usize) -> CMatrix {
    match init {
        MleInit::MaximallyMixed => CMatrix::identity(d).scale_real(1.0 / d as f64),
        MleInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let a = CMatrix::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            let p = (&a * &a.adjoint()).hermitize();
            let tr = p.trace().re;
            p.scale_real(1.0 / tr)
        }
    }
}

/// Iterate `ρ ← N[R(ρ) ρ R(ρ)]` over explicit effects.
///
/// When a full step lowers the likelihood, the diluted operator `(I + εR)/(1 + ε)`
/// is used instead with `ε` halved until the likelihood no longer drops.
pub fn mle_from_effects(effects: &[Effect], dim: usize, cfg: &MleConfig) -> Result<(CMatrix, ProjectionReport)> {
    if effects.is_empty() {
        return Err(Error::Empty("no observed effects".into()));
    }
    if cfg.max_iter == 0 || cfg.tol <= 0.0 {
        return Err(Error::InvalidParameter("max_iter must be positive and tol > 0".into()));
    }
    let mut rho = initial_state(&cfg.init, dim);
    let mut ll = log_likelihood(effects, &rho);
    let mut report = ProjectionReport::new(ProjectionMethod::Mle, 1.0, 1.0);
    report.log_likelihood.push(ll);
    let mut converged = false;
    let mut k = 0;
    while k < cfg.max_iter {
        k += 1;
        let (r, clamped) = r_operator(effects, &rho);
        report.regularized = report.regularized.max(clamped);
        let mut next = normalized_sandwich(&r, &rho);
        let mut next_ll = log_likelihood(effects, &next);
        let mut eps = 1.0;
        while next_ll < ll && eps > 1e-12 {
            let mut diluted = r.scale_real(eps);
            for i in 0..dim {
                diluted[(i, i)] += ONE;
            }
            next = normalized_sandwich(&diluted, &rho);
            next_ll = log_likelihood(effects, &next);
            eps /= 2.0;
        }
        if next_ll < ll {
            // no ascent direction left at double precision
            converged = true;
            break;
        }
        let step = (&next - &rho).frobenius_norm();
        rho = next;
        ll = next_ll;
        report.log_likelihood.push(ll);
        if k >= cfg.min_iter && step <= cfg.tol {
            converged = true;
            break;
        }
    }
    report.iterations = Some(k);
    report.converged = Some(converged);
    report.output_trace = rho.trace().re;
    Ok((rho, report))
}

/// Maximum-likelihood Choi matrix from ancilla records, unnormalized to trace `2^n`.
pub fn mle_reconstruct(records: &[MeasurementRecord], cfg: &MleConfig) -> Result<(ChoiMatrix, ProjectionReport)> {
    let (n, effects) = observed_effects(records)?;
    let (rho, mut report) = mle_from_effects(&effects, 1 << (2 * n), cfg)?;
    let scale = (1u64 << n) as f64;
    report.output_trace *= scale;
    report.input_trace = scale;
    Ok((ChoiMatrix::unnormalized(n, rho.scale_real(scale))?, report))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OverlapMode {
    /// CP then TP on the Choi estimate, then CP on the channel output.
    Full,
    /// Overlap against the purified estimate with no further projection.
    Purified,
}

/// Predicted `tr(E(ρ) σ)` from a raw Choi estimate.
pub fn overlap_pipeline(l_raw: &ChoiMatrix, rho_in: &CMatrix, sigma: &CMatrix, mode: OverlapMode) -> Result<f64> {
    match mode {
        OverlapMode::Full => {
            let projected = tp_project(&cp_project(&l_raw.to_unnormalized())?)?;
            let out = apply_channel(&projected, rho_in)?;
            let (mut out, _) = psd_rescale(&out)?;
            let tr = out.trace().re;
            if tr > 0.0 {
                out = out.scale_real(1.0 / tr);
            }
            Ok(out.trace_product(sigma)?.re)
        }
        OverlapMode::Purified => estimate_overlap(&purify(l_raw)?, rho_in, sigma),
    }
}

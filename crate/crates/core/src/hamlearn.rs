//! Hamiltonian learning from short-time propagators.
//!
//! For `U = exp(-iHt)` and a probe `p` with `[h_i, p] = κ q`, the channel
//! satisfies `tr(U p U† q) / 2^n ≈ -i t c_i κ`, so each coefficient is read off
//! a single Pauli contraction `tr((pᵀ ⊗ q) Λ)` of the Choi matrix.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquire::{acquire_ancilla, acquire_two_sided, PairingPlan, Scheme};
use crate::channels::{propagator, random_tfim, ChannelSpec, ChoiMatrix, HamiltonianTerms};
use crate::error::{Error, Result};
use crate::gates::pauli::{Pauli, PauliString};
use crate::qmat::{C64, I};
use crate::shadows::{vector_estimate, EstimatorConfig};

/// Probe for one Hamiltonian term: `[h, p] = κ q` with `q` Hermitian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub term: usize,
    pub p: PauliString,
    pub q: PauliString,
    pub kappa: C64,
}

impl Probe {
    /// `pᵀ ⊗ q` on the Choi register.
    pub fn choi_operator(&self) -> PauliString {
        self.p.transpose().tensor(&self.q)
    }

    fn coefficient(&self, contraction: C64, n: usize, t: f64) -> f64 {
        (I * contraction / (self.kappa * (1u64 << n) as f64 * t)).re
    }
}

fn probe_for(n: usize, h: &PauliString) -> Option<PauliString> {
    let support: Vec<(usize, Pauli)> = h.letters().iter().copied().enumerate().filter(|(_, p)| *p != Pauli::I).collect();
    match support.as_slice() {
        [(i, Pauli::X), (j, Pauli::X)] if *j == i + 1 => Some(PauliString::single(n, *i, Pauli::Z)),
        [(i, Pauli::Z)] => Some(PauliString::single(n, *i, Pauli::X)),
        _ => None,
    }
}

/// `p = Z_i` for couplings `X_i X_{i+1}` and `p = X_i` for fields `Z_i`.
///
/// Rejects terms without a rule, and probes whose `q` would also be produced
/// by another term.
pub fn default_probes(ht: &HamiltonianTerms) -> Result<Vec<Probe>> {
    let mut probes = Vec::with_capacity(ht.len());
    for (idx, term) in ht.terms.iter().enumerate() {
        let h = &term.pauli;
        if h.phase_power() != 0 {
            return Err(Error::InvalidParameter(format!("no probe rule for signed term {h}")));
        }
        let p = probe_for(ht.n, h).ok_or_else(|| Error::InvalidParameter(format!("no probe rule for term {h}")))?;
        let (kappa, q) = h.commutator(&p).expect("probe anticommutes with its term");
        for (other, t) in ht.terms.iter().enumerate() {
            if other == idx {
                continue;
            }
            if let Some((_, q2)) = t.pauli.commutator(&p) {
                if q2.letters() == q.letters() {
                    return Err(Error::InvalidParameter(format!("probe {p} does not separate term {h} from {}", t.pauli)));
                }
            }
        }
        probes.push(Probe { term: idx, p, q, kappa });
    }
    Ok(probes)
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time must be positive, got {t}")));
    }
    Ok(())
}

fn check_probes(probes: &[Probe], n: usize) -> Result<()> {
    if let Some(pr) = probes.iter().find(|pr| pr.p.n() != n || pr.q.n() != n) {
        return Err(Error::Dimension(format!("probe {} / {} on a {n}-qubit channel", pr.p, pr.q)));
    }
    Ok(())
}

/// `c̃_i = Re[i tr((p_iᵀ ⊗ q_i) Λ) / (2^n t κ_i)]`.
pub fn estimate_coefficients(choi: &ChoiMatrix, probes: &[Probe], t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    let n = choi.n();
    check_probes(probes, n)?;
    let l = choi.unnormalized_matrix();
    Ok(probes.iter().map(|pr| pr.coefficient(pr.choi_operator().trace_with(&l), n, t)).collect())
}

/// The values [`estimate_coefficients`] converges to, from the exact Choi matrix.
pub fn renormalized_coefficients(exact: &ChoiMatrix, probes: &[Probe], t: f64) -> Result<Vec<f64>> {
    estimate_coefficients(exact, probes, t)
}

/// Same as [`renormalized_coefficients`] but from `tr(U p U† q)` on `n` qubits.
pub fn renormalized_from_spec(spec: &ChannelSpec, probes: &[Probe], t: f64) -> Result<Vec<f64>> {
    check_t(t)?;
    check_probes(probes, spec.n)?;
    let (u, noise) = spec.resolve()?;
    let ud = u.adjoint();
    probes
        .iter()
        .map(|pr| {
            let evolved = u.matmul(&pr.p.matrix())?.matmul(&ud)?;
            Ok(pr.coefficient(pr.q.trace_with(&evolved) * (1.0 - noise), spec.n, t))
        })
        .collect()
}

/// Coefficient estimates streamed from records without forming the dense Choi estimate.
pub fn estimate_from_records(
    records: &[crate::acquire::MeasurementRecord],
    probes: &[Probe],
    t: f64,
    cfg: &EstimatorConfig,
) -> Result<Vec<f64>> {
    check_t(t)?;
    let n = records.first().ok_or_else(|| Error::Empty("no measurement records".into()))?.n;
    check_probes(probes, n)?;
    let ops: Vec<PauliString> = probes.iter().map(Probe::choi_operator).collect();
    vector_estimate(records, cfg, probes.len(), |s| {
        Ok(probes.iter().zip(&ops).map(|(pr, op)| pr.coefficient(s.pauli_trace(op), n, t)).collect())
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamLearnTask {
    pub ht: HamiltonianTerms,
    pub probes: Vec<Probe>,
    pub t: f64,
    /// Number of single-shot shadows.
    pub shots: usize,
    pub scheme: Scheme,
}

impl HamLearnTask {
    /// Default probes, two-sided Pauli acquisition.
    pub fn new(ht: HamiltonianTerms, t: f64, shots: usize) -> Result<Self> {
        let probes = default_probes(&ht)?;
        Ok(Self { ht, probes, t, shots, scheme: Scheme::TwoSided })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamLearnResult {
    pub n: usize,
    pub t: f64,
    pub shots: usize,
    pub seed: u64,
    pub c_true: Vec<f64>,
    pub estimates: Vec<f64>,
    pub renormalized: Vec<f64>,
    /// `|c̃_i - c_i|`
    pub errors: Vec<f64>,
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (s, k) = v.fold((0.0, 0usize), |(s, k), x| (s + x, k + 1));
    if k == 0 { 0.0 } else { s / k as f64 }
}

impl HamLearnResult {
    pub fn mean_error(&self) -> f64 {
        mean(self.errors.iter().copied())
    }

    /// `⟨|c_i - c_i^renorm(t)|⟩`
    pub fn systematic(&self) -> f64 {
        mean(self.c_true.iter().zip(&self.renormalized).map(|(a, b)| (a - b).abs()))
    }

    /// `⟨|c̃_i - c_i^renorm(t)|⟩`
    pub fn statistical(&self) -> f64 {
        mean(self.estimates.iter().zip(&self.renormalized).map(|(a, b)| (a - b).abs()))
    }

    pub fn rows(&self) -> Vec<HamLearnRow> {
        (0..self.estimates.len())
            .map(|i| HamLearnRow {
                n: self.n,
                t: self.t,
                N: self.shots,
                seed: self.seed,
                term_index: i,
                c_true: self.c_true[i],
                c_renorm: self.renormalized[i],
                c_est: self.estimates[i],
                abs_err: self.errors[i],
            })
            .collect()
    }
}

/// One line of the results table.
#[allow(non_snake_case)]
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamLearnRow {
    pub n: usize,
    pub t: f64,
    pub N: usize,
    pub seed: u64,
    pub term_index: usize,
    pub c_true: f64,
    pub c_renorm: f64,
    pub c_est: f64,
    pub abs_err: f64,
}

/// Simulate `shots` Pauli shadows of `exp(-iHt)` and recover the coefficients.
pub fn run_hamlearn(task: &HamLearnTask, seed: u64) -> Result<HamLearnResult> {
    check_t(task.t)?;
    if task.shots == 0 {
        return Err(Error::InvalidParameter("need at least one shot".into()));
    }
    let spec = propagator(&task.ht, task.t);
    let records = match task.scheme {
        Scheme::TwoSided => acquire_two_sided(&spec, &PairingPlan::Pauli, task.shots, 1, seed)?,
        Scheme::Ancilla => acquire_ancilla(&spec, &PairingPlan::Pauli, task.shots, 1, seed)?,
    };
    let estimates = estimate_from_records(&records, &task.probes, task.t, &EstimatorConfig::Mean)?;
    let renormalized = renormalized_from_spec(&spec, &task.probes, task.t)?;
    let c_true: Vec<f64> = task.probes.iter().map(|pr| task.ht.terms[pr.term].coeff).collect();
    let errors = estimates.iter().zip(&c_true).map(|(a, b)| (a - b).abs()).collect();
    Ok(HamLearnResult { n: task.ht.n, t: task.t, shots: task.shots, seed, c_true, estimates, renormalized, errors })
}

/// Seed for disorder realization `r` at t-grid index `ti`.
pub fn realization_seed(master: u64, r: usize, ti: usize) -> u64 {
    let mut x = master ^ (r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (ti as u64 + 1).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Random TFIM instance for realization `r`, independent of the t-grid.
pub fn disorder_instance(n: usize, master: u64, r: usize) -> Result<HamiltonianTerms> {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(r as u64);
    random_tfim(n, &mut rng)
}

/// Run `realizations` random TFIM instances for every `t` in the grid.
///
/// Output is indexed `[t index][realization]`.
pub fn disorder_sweep(
    n: usize,
    t_grid: &[f64],
    shots: usize,
    realizations: usize,
    scheme: Scheme,
    master: u64,
) -> Result<Vec<Vec<HamLearnResult>>> {
    let jobs: Vec<(usize, usize)> = (0..t_grid.len()).flat_map(|ti| (0..realizations).map(move |r| (ti, r))).collect();
    let flat: Vec<HamLearnResult> = jobs
        .par_iter()
        .map(|&(ti, r)| {
            let mut task = HamLearnTask::new(disorder_instance(n, master, r)?, t_grid[ti], shots)?;
            task.scheme = scheme;
            run_hamlearn(&task, realization_seed(master, r, ti))
        })
        .collect::<Result<_>>()?;
    let mut it = flat.into_iter();
    Ok(t_grid.iter().map(|_| it.by_ref().take(realizations).collect()).collect())
}

/// Averages over realizations at one grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TPoint {
    pub t: f64,
    pub mean_error: f64,
    pub systematic: f64,
    pub statistical: f64,
}

pub fn summarize(results: &[HamLearnResult]) -> Result<TPoint> {
    let first = results.first().ok_or_else(|| Error::Empty("no results to summarize".into()))?;
    Ok(TPoint {
        t: first.t,
        mean_error: mean(results.iter().map(HamLearnResult::mean_error)),
        systematic: mean(results.iter().map(HamLearnResult::systematic)),
        statistical: mean(results.iter().map(HamLearnResult::statistical)),
    })
}

/// Grid point with the smallest measured mean error; ties go to the smaller `t`.
pub fn optimal_t(points: &[TPoint]) -> Result<&TPoint> {
    points
        .iter()
        .reduce(|best, p| if p.mean_error < best.mean_error { p } else { best })
        .ok_or_else(|| Error::Empty("empty t grid".into()))
}

/// `(36^k / (t² ε²)) · 2k ln(8n) · ln(1/δ)`, rounded up.
pub fn bound_hamlearn(n: usize, k: usize, t: f64, eps: f64, delta: f64) -> Result<u64> {
    check_t(t)?;
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0 < eps < 1 and 0 < delta < 1, got {eps}, {delta}")));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("need 1 <= k <= n, got k={k}, n={n}")));
    }
    let k = k as f64;
    let value = 36f64.powf(k) / (t * t * eps * eps) * 2.0 * k * (8.0 * n as f64).ln() * (1.0 / delta).ln();
    if !value.is_finite() || value > u64::MAX as f64 {
        return Err(Error::InvalidParameter(format!("bound {value} does not fit a 64-bit count")));
    }
    Ok(value.ceil() as u64)
}

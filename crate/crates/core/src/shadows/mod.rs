//! Shadow snapshots of the Choi matrix and their aggregation.
//!
//! A snapshot is `2^n ⊗_b M_k⁻¹(U_b†|β_b⟩⟨β_b|U_b)` over the blocks of a
//! record, with `M_k⁻¹(x) = (2^k + 1) x − tr(x) I`. In the two-sided scheme the
//! input-side factor is the transpose of the prepared state `U_L†|0⟩⟨0|U_L`.

pub mod bounds;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acquire::{BlockUnitary, MeasurementRecord, Scheme};
use crate::channels::ChoiMatrix;
use crate::error::{Error, Result};
use crate::gates::pauli::PauliString;
use crate::qmat::{kron_all, purity, CMatrix, C64, ZERO};

pub use bounds::{bound_overlap, bound_reduced, OverlapScheme, ReducedScheme};

pub const DEFAULT_MOM_BATCHES: usize = 23;

/// `M_k⁻¹(x) = (2^k + 1) x − tr(x) I` for a `k`-qubit block.
pub fn inverse_channel(x: &CMatrix, k: usize) -> Result<CMatrix> {
    let d = 1usize << k;
    if x.dim() != d {
        return Err(Error::Dimension(format!("{k}-qubit inverse channel on a matrix of dim {}", x.dim())));
    }
    let mut out = x.scale_real((d + 1) as f64);
    let tr = x.trace();
    for i in 0..d {
        out[(i, i)] -= tr;
    }
    Ok(out)
}

/// Block-factorized single-shot estimate of the Choi matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowSnapshot {
    n: usize,
    blocks: Vec<(Vec<usize>, CMatrix)>,
}

impl ShadowSnapshot {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[(Vec<usize>, CMatrix)] {
        &self.blocks
    }

    fn scale(&self) -> f64 {
        (1u64 << self.n) as f64
    }

    /// Flat-index map from register order to the block-major order of the kron.
    fn permutation(&self) -> Option<Vec<usize>> {
        let order: Vec<usize> = self.blocks.iter().flat_map(|(w, _)| w.iter().copied()).collect();
        if order.iter().enumerate().all(|(i, &w)| i == w) {
            return None;
        }
        let m = order.len();
        Some(
            (0..1usize << m)
                .map(|x| order.iter().fold(0, |acc, &w| acc << 1 | (x >> (m - 1 - w) & 1)))
                .collect(),
        )
    }

    fn block_kron(&self) -> CMatrix {
        kron_all(self.blocks.iter().map(|(_, m)| m))
    }

    /// `acc += weight · snapshot`
    pub fn accumulate(&self, acc: &mut CMatrix, weight: f64) {
        let k = self.block_kron();
        let w = weight * self.scale();
        let d = k.dim();
        assert_eq!(acc.dim(), d, "accumulator dimension mismatch");
        match self.permutation() {
            None => {
                for (a, b) in acc.data_mut().iter_mut().zip(k.data()) {
                    *a += b * w;
                }
            }
            Some(perm) => {
                let data = acc.data_mut();
                for x in 0..d {
                    for y in 0..d {
                        data[x * d + y] += k[(perm[x], perm[y])] * w;
                    }
                }
            }
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut out = CMatrix::zeros(1 << (2 * self.n));
        self.accumulate(&mut out, 1.0);
        out
    }

    /// `tr(O S)` for a dense operator `O` on the Choi register.
    pub fn contract(&self, op: &CMatrix) -> Result<C64> {
        let k = self.block_kron();
        let d = k.dim();
        if op.dim() != d {
            return Err(Error::Dimension(format!("operator of dim {} against a snapshot of dim {d}", op.dim())));
        }
        let perm = self.permutation();
        let idx = |x: usize| perm.as_ref().map_or(x, |p| p[x]);
        let mut total = ZERO;
        for x in 0..d {
            for y in 0..d {
                total += op[(y, x)] * k[(idx(x), idx(y))];
            }
        }
        Ok(total * self.scale())
    }

    /// `tr(P S)` for a Pauli string on the Choi register, without densifying.
    pub fn pauli_trace(&self, p: &PauliString) -> C64 {
        assert_eq!(p.n(), 2 * self.n, "Pauli string must span the Choi register");
        let letters = p.letters();
        let mut total = p.phase() * self.scale();
        for (wires, m) in &self.blocks {
            let local = PauliString::new(wires.iter().map(|&w| letters[w]).collect());
            total *= local.trace_with(m);
            if total == ZERO {
                break;
            }
        }
        total
    }

    /// Keep only the blocks inside `subsystem` (input and output copies) and rescale to `2^k`.
    pub fn reduce(&self, subsystem: &[usize]) -> Result<ShadowSnapshot> {
        let n = self.n;
        let sub = normalize_subsystem(subsystem, n)?;
        let k = sub.len();
        let relabel = |w: usize| {
            if w < n {
                sub.iter().position(|&q| q == w)
            } else {
                sub.iter().position(|&q| q + n == w).map(|j| j + k)
            }
        };
        let mut blocks = Vec::new();
        for (wires, m) in &self.blocks {
            let mapped: Vec<Option<usize>> = wires.iter().map(|&w| relabel(w)).collect();
            if mapped.iter().all(Option::is_some) {
                blocks.push((mapped.into_iter().map(Option::unwrap).collect(), m.clone()));
            } else if mapped.iter().any(Option::is_some) {
                return Err(Error::StraddlingBlock { wires: wires.clone() });
            }
        }
        Ok(ShadowSnapshot { n: k, blocks })
    }
}

fn normalize_subsystem(subsystem: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut sub = subsystem.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if sub.is_empty() {
        return Err(Error::Empty("subsystem is empty".into()));
    }
    if sub.iter().any(|&q| q >= n) {
        return Err(Error::Dimension(format!("subsystem {subsystem:?} outside a {n}-qubit channel")));
    }
    Ok(sub)
}

/// `M_k⁻¹(U†|β⟩⟨β|U)`, transposed first when `transpose` is set.
fn block_estimate(u: &CMatrix, beta: usize, transpose: bool) -> CMatrix {
    let k = crate::qmat::qubit_count(u.dim()).expect("block unitary dim is a power of two");
    let v: Vec<C64> = (0..u.dim()).map(|i| u[(beta, i)].conj()).collect();
    let mut proj = CMatrix::projector(&v);
    if transpose {
        proj = proj.transpose();
    }
    inverse_channel(&proj, k).expect("dimension matches")
}

/// Bits of the outcome string on the listed wires, first wire most significant.
fn local_bits(record: &MeasurementRecord, outcome: &[u8], wires: &[usize]) -> Option<usize> {
    let n = record.n;
    let mut beta = 0;
    for &w in wires {
        let pos = match record.scheme {
            Scheme::Ancilla => w,
            Scheme::TwoSided if w >= n => w - n,
            Scheme::TwoSided => return None,
        };
        beta = beta << 1 | (outcome[pos] == b'1') as usize;
    }
    Some(beta)
}

/// Snapshot for repetition `rep` of a record.
pub fn snapshot(record: &MeasurementRecord, rep: usize) -> Result<ShadowSnapshot> {
    let outcome = record
        .outcomes
        .get(rep)
        .ok_or_else(|| Error::InvalidParameter(format!("repetition {rep} of a record with {} outcomes", record.outcomes.len())))?
        .as_bytes();
    let mut blocks = Vec::new();
    for b in &record.blocks {
        match &b.unitary {
            BlockUnitary::Clifford(c) => {
                let beta = local_bits(record, outcome, &b.wires);
                blocks.push((b.wires.clone(), block_estimate(c.unitary(), beta.unwrap_or(0), beta.is_none())));
            }
            BlockUnitary::Rotation(labels) => {
                for (&w, l) in b.wires.iter().zip(labels) {
                    let beta = local_bits(record, outcome, &[w]);
                    blocks.push((vec![w], block_estimate(&l.matrix(), beta.unwrap_or(0), beta.is_none())));
                }
            }
        }
    }
    Ok(ShadowSnapshot { n: record.n, blocks })
}

/// Batch aggregation of snapshots.
#[derive(Copy, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "aggregation", rename_all = "snake_case")]
pub enum EstimatorConfig {
    #[default]
    Mean,
    MedianOfMeans { batches: usize, level: MomLevel },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomLevel {
    /// Every shot is batched on its own.
    Shadow,
    /// Repetitions are averaged per record before batching records.
    Unitary,
}

impl EstimatorConfig {
    pub fn median_of_means(level: MomLevel) -> Self {
        EstimatorConfig::MedianOfMeans { batches: DEFAULT_MOM_BATCHES, level }
    }
}

/// A distinct `(record, outcome)` pair with its weight inside a batch.
struct Atom {
    record: usize,
    rep: usize,
    batch: usize,
    weight: f64,
}

fn check_records(records: &[MeasurementRecord]) -> Result<(Scheme, usize)> {
    let first = records.first().ok_or_else(|| Error::Empty("no measurement records".into()))?;
    for r in records {
        if r.scheme != first.scheme || r.n != first.n {
            return Err(Error::InvalidParameter(format!(
                "records mix ({}, n={}) with ({}, n={})",
                first.scheme, first.n, r.scheme, r.n
            )));
        }
        if r.outcomes.is_empty() {
            return Err(Error::Empty(format!("record {} has no outcomes", r.index)));
        }
    }
    Ok((first.scheme, first.n))
}

/// Group shots into weighted atoms; weights within each batch sum to 1.
fn atoms(records: &[MeasurementRecord], cfg: &EstimatorConfig) -> Result<(usize, Vec<Atom>)> {
    let total: usize = records.iter().map(|r| r.outcomes.len()).sum();
    let (batches, level) = match *cfg {
        EstimatorConfig::Mean => (1, MomLevel::Shadow),
        EstimatorConfig::MedianOfMeans { batches, level } => (batches, level),
    };
    let items = match level {
        MomLevel::Shadow => total,
        MomLevel::Unitary => records.len(),
    };
    if batches == 0 || batches > items {
        return Err(Error::InvalidParameter(format!("{batches} batches for {items} items")));
    }
    let batch_size = |b: usize| (items / batches + usize::from(b < items % batches)) as f64;
    let mut out = Vec::new();
    let mut offset = 0;
    for (ri, r) in records.iter().enumerate() {
        let mut groups: BTreeMap<(usize, &str), (usize, usize)> = BTreeMap::new();
        for (rep, o) in r.outcomes.iter().enumerate() {
            let batch = match level {
                MomLevel::Shadow => (offset + rep) % batches,
                MomLevel::Unitary => ri % batches,
            };
            groups.entry((batch, o.as_str())).or_insert((rep, 0)).1 += 1;
        }
        for ((batch, _), (rep, count)) in groups {
            let weight = match level {
                MomLevel::Shadow => count as f64 / batch_size(batch),
                MomLevel::Unitary => count as f64 / (r.outcomes.len() as f64 * batch_size(batch)),
            };
            out.push(Atom { record: ri, rep, batch, weight });
        }
        offset += r.outcomes.len();
    }
    Ok((batches, out))
}

/// Index of the candidate with the smallest summed distance to the others; ties go to the lowest index.
pub fn select_median<T>(candidates: &[T], dist: impl Fn(&T, &T) -> f64) -> usize {
    let scores: Vec<f64> = candidates
        .iter()
        .map(|a| candidates.iter().map(|b| dist(a, b)).sum())
        .collect();
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s < scores[best] {
            best = i;
        }
    }
    best
}

fn dense_sum(records: &[MeasurementRecord], atoms: &[&Atom], subsystem: Option<&[usize]>, dim: usize) -> Result<CMatrix> {
    let chunk = (atoms.len() / 64).max(128);
    let partials: Vec<CMatrix> = atoms
        .par_chunks(chunk)
        .map(|part| {
            let mut acc = CMatrix::zeros(dim);
            for a in part {
                let mut s = snapshot(&records[a.record], a.rep)?;
                if let Some(sub) = subsystem {
                    s = s.reduce(sub)?;
                }
                s.accumulate(&mut acc, a.weight);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = CMatrix::zeros(dim);
    for p in &partials {
        total += p;
    }
    Ok(total)
}

fn estimate(records: &[MeasurementRecord], subsystem: Option<&[usize]>, cfg: &EstimatorConfig) -> Result<ChoiMatrix> {
    let (_, n) = check_records(records)?;
    let k = match subsystem {
        Some(sub) => normalize_subsystem(sub, n)?.len(),
        None => n,
    };
    let dim = 1usize << (2 * k);
    let (batches, atoms) = atoms(records, cfg)?;
    let means = (0..batches)
        .map(|b| {
            let members: Vec<&Atom> = atoms.iter().filter(|a| a.batch == b).collect();
            dense_sum(records, &members, subsystem, dim)
        })
        .collect::<Result<Vec<_>>>()?;
    let chosen = select_median(&means, |a, b| (a - b).frobenius_norm());
    ChoiMatrix::unnormalized(k, means.into_iter().nth(chosen).expect("at least one batch"))
}

/// Dense unnormalized Choi estimate from all records.
pub fn estimate_choi(records: &[MeasurementRecord], cfg: &EstimatorConfig) -> Result<ChoiMatrix> {
    estimate(records, None, cfg)
}

/// Reduced-process estimate on `subsystem`, built from per-snapshot partial traces.
pub fn estimate_reduced(records: &[MeasurementRecord], subsystem: &[usize], cfg: &EstimatorConfig) -> Result<ChoiMatrix> {
    estimate(records, Some(subsystem), cfg)
}

/// `tr[(ρ^T ⊗ σ) Λ]`, which equals `tr(E(ρ) σ)` for the channel encoded by `Λ`.
pub fn estimate_overlap(l: &ChoiMatrix, rho_in: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    let op = overlap_operator(l.n(), rho_in, sigma)?;
    Ok(l.unnormalized_matrix().trace_product(&op)?.re)
}

fn overlap_operator(n: usize, rho_in: &CMatrix, sigma: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << n;
    if rho_in.dim() != d || sigma.dim() != d {
        return Err(Error::Dimension(format!(
            "overlap states of dims {} and {} for a {n}-qubit channel",
            rho_in.dim(),
            sigma.dim()
        )));
    }
    Ok(crate::qmat::kron(&rho_in.transpose(), sigma))
}

/// The same overlap computed snapshot by snapshot, never forming the dense estimate.
pub fn estimate_overlap_from_records(
    records: &[MeasurementRecord],
    rho_in: &CMatrix,
    sigma: &CMatrix,
    cfg: &EstimatorConfig,
) -> Result<f64> {
    let (_, n) = check_records(records)?;
    let op = overlap_operator(n, rho_in, sigma)?;
    scalar_estimate(records, cfg, |s| Ok(s.contract(&op)?.re))
}

/// Aggregate a real linear functional of the snapshots with the configured batching.
pub fn scalar_estimate(
    records: &[MeasurementRecord],
    cfg: &EstimatorConfig,
    f: impl Fn(&ShadowSnapshot) -> Result<f64> + Sync,
) -> Result<f64> {
    Ok(vector_estimate(records, cfg, 1, |s| Ok(vec![f(s)?]))?[0])
}

/// Like [`scalar_estimate`] for `len` functionals at once; each snapshot is built once.
///
/// Under median-of-means the batch whose vector has the smallest summed
/// Euclidean distance to the others is returned.
pub fn vector_estimate(
    records: &[MeasurementRecord],
    cfg: &EstimatorConfig,
    len: usize,
    f: impl Fn(&ShadowSnapshot) -> Result<Vec<f64>> + Sync,
) -> Result<Vec<f64>> {
    check_records(records)?;
    let (batches, atoms) = atoms(records, cfg)?;
    let values: Vec<(usize, f64, Vec<f64>)> = atoms
        .par_iter()
        .map(|a| {
            let v = f(&snapshot(&records[a.record], a.rep)?)?;
            if v.len() != len {
                return Err(Error::Dimension(format!("functional returned {} values, expected {len}", v.len())));
            }
            Ok((a.batch, a.weight, v))
        })
        .collect::<Result<_>>()?;
    let mut means = vec![vec![0.0; len]; batches];
    for (b, w, v) in values {
        for (m, x) in means[b].iter_mut().zip(v) {
            *m += w * x;
        }
    }
    let dist = |a: &Vec<f64>, b: &Vec<f64>| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let chosen = select_median(&means, dist);
    Ok(means.swap_remove(chosen))
}

/// `tr[Λ²]/4^n` of an estimate.
pub fn estimate_purity(l: &ChoiMatrix) -> f64 {
    purity(l)
}

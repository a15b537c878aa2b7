//! Simulated measurement acquisition for the ancilla and two-sided schemes.
//!
//! Both schemes address a `2n`-wire register: wires `0..n` carry the input
//! side and wires `n..2n` the output side. In the ancilla scheme all `2n` wires
//! are measured. In the two-sided scheme the input-side blocks describe the
//! preparation `U_L†|0⟩` and only the `n` output wires are measured.
//!
//! Each setting draws from its own stream `(seed, setting index)`, so records
//! do not depend on how many threads run the acquisition.

pub mod records;

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::ChannelSpec;
use crate::error::{Error, Result};
use crate::gates::clifford::{sample_clifford, CliffordElement};
use crate::gates::rotation::{rotation_unitary, RotationLabel};
use crate::qmat::{apply_on_wires, CMatrix, C64, ONE, ZERO};

pub use records::{read_records, validate_records, write_records, ValidationReport};

/// Largest register the dense simulator accepts.
pub const MAX_SIM_QUBITS: usize = 8;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Ancilla,
    TwoSided,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Ancilla => "ancilla",
            Scheme::TwoSided => "two_sided",
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Simulated,
    Ingested,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum BlockUnitary {
    Clifford(CliffordElement),
    /// One label per wire of the block.
    Rotation(Vec<RotationLabel>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub wires: Vec<usize>,
    #[serde(flatten)]
    pub unitary: BlockUnitary,
}

impl Block {
    pub fn rotation(wires: Vec<usize>, labels: Vec<RotationLabel>) -> Self {
        Self { wires, unitary: BlockUnitary::Rotation(labels) }
    }

    pub fn clifford(wires: Vec<usize>, c: CliffordElement) -> Self {
        Self { wires, unitary: BlockUnitary::Clifford(c) }
    }

    pub fn is_clifford(&self) -> bool {
        matches!(self.unitary, BlockUnitary::Clifford(_))
    }

    /// Dense unitary on the block's wires, in the order listed.
    pub fn matrix(&self) -> CMatrix {
        match &self.unitary {
            BlockUnitary::Clifford(c) => c.unitary().clone(),
            BlockUnitary::Rotation(labels) => rotation_unitary(labels),
        }
    }

    fn payload_arity(&self) -> usize {
        match &self.unitary {
            BlockUnitary::Clifford(c) => c.k(),
            BlockUnitary::Rotation(labels) => labels.len(),
        }
    }
}

/// One unitary setting together with the bitstrings measured under it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub scheme: Scheme,
    pub n: usize,
    #[serde(default)]
    pub index: usize,
    pub blocks: Vec<Block>,
    pub outcomes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub source: Source,
}

impl MeasurementRecord {
    /// Number of measured bits per outcome.
    pub fn measured_width(&self) -> usize {
        match self.scheme {
            Scheme::Ancilla => 2 * self.n,
            Scheme::TwoSided => self.n,
        }
    }

    /// Outcome `r` as an integer, first character most significant.
    pub fn outcome_bits(&self, r: usize) -> usize {
        bits_of(&self.outcomes[r])
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidParameter("record with n = 0".into()));
        }
        let mut seen = vec![false; 2 * n];
        for b in &self.blocks {
            if b.wires.is_empty() || b.wires.len() != b.payload_arity() {
                return Err(Error::Dimension(format!(
                    "block on wires {:?} carries a {}-qubit unitary",
                    b.wires,
                    b.payload_arity()
                )));
            }
            for &w in &b.wires {
                if w >= 2 * n || seen[w] {
                    return Err(Error::InvalidParameter(format!("block wires {:?} do not partition 0..{}", b.wires, 2 * n)));
                }
                seen[w] = true;
            }
            if self.scheme == Scheme::TwoSided && b.is_clifford() {
                let inside = b.wires.iter().filter(|&&w| w < n).count();
                if inside != 0 && inside != b.wires.len() {
                    return Err(Error::InvalidParameter(format!("two-sided block {:?} mixes input and output wires", b.wires)));
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidParameter(format!("blocks do not cover all {} wires", 2 * n)));
        }
        if self.outcomes.is_empty() {
            return Err(Error::Empty("record has no outcomes".into()));
        }
        let width = self.measured_width();
        for o in &self.outcomes {
            if o.len() != width || o.bytes().any(|c| c != b'0' && c != b'1') {
                return Err(Error::InvalidParameter(format!("outcome {o:?} is not a {width}-bit string")));
            }
        }
        Ok(())
    }
}

fn bits_of(s: &str) -> usize {
    s.bytes().fold(0, |acc, c| acc << 1 | (c == b'1') as usize)
}

fn bitstring(x: usize, width: usize) -> String {
    (0..width).map(|j| if x >> (width - 1 - j) & 1 == 1 { '1' } else { '0' }).collect()
}

/// How random unitaries are laid out over the wires of one side or register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PairingPlan {
    /// Independent single-qubit basis rotations.
    Pauli,
    /// Two-qubit Cliffords on a fresh random perfect matching each setting.
    NonFixed,
    /// The listed pairs in every setting, the remaining wires matched at random.
    Fixed { pairs: Vec<(usize, usize)> },
    /// A deterministic fraction of settings use `Fixed { pairs }`, the rest `NonFixed`.
    Mixed { pairs: Vec<(usize, usize)>, fraction: f64 },
    /// One Clifford over every wire of the side.
    Global,
}

impl PairingPlan {
    /// Fixed-pair fractions 0, 1/2, 7/16 for `n` = 2, 3, 4, with qubit 0 tied to its ancilla.
    pub fn default_mixed(n: usize) -> Self {
        let fraction = match n {
            3 => 0.5,
            4 => 0.4375,
            _ => 0.0,
        };
        PairingPlan::Mixed { pairs: vec![(0, n)], fraction }
    }

    /// Whether setting `i` uses the fixed pairs; exactly `⌊N f⌋` of the first `N` settings do.
    pub fn setting_is_fixed(&self, i: usize) -> bool {
        match self {
            PairingPlan::Fixed { .. } => true,
            PairingPlan::Mixed { fraction, .. } => ((i + 1) as f64 * fraction).floor() > (i as f64 * fraction).floor(),
            _ => false,
        }
    }

    fn check(&self, width: usize) -> Result<()> {
        let pairs = match self {
            PairingPlan::Fixed { pairs } => pairs,
            PairingPlan::Mixed { pairs, fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(Error::InvalidParameter(format!("fixed fraction {fraction} outside [0, 1]")));
                }
                pairs
            }
            PairingPlan::Global if width > crate::gates::MAX_CLIFFORD_ARITY => {
                return Err(Error::InvalidParameter(format!("global Clifford on {width} wires exceeds the supported arity")));
            }
            _ => return Ok(()),
        };
        let mut used = vec![false; width];
        for &(a, b) in pairs {
            if a >= width || b >= width || a == b || used[a] || used[b] {
                return Err(Error::InvalidParameter(format!("fixed pairs {pairs:?} are not disjoint wire pairs of 0..{width}")));
            }
            used[a] = true;
            used[b] = true;
        }
        Ok(())
    }

    /// Draw the blocks of one side whose wires are `offset..offset + width`.
    fn draw_blocks<R: Rng + ?Sized>(
        &self,
        setting: usize,
        offset: usize,
        width: usize,
        labels: &[RotationLabel],
        rng: &mut R,
    ) -> Result<Vec<Block>> {
        let mut blocks = Vec::new();
        match self {
            PairingPlan::Pauli => {
                let chosen = (0..width).map(|_| labels[rng.random_range(0..labels.len())]).collect();
                blocks.push(Block::rotation((offset..offset + width).collect(), chosen));
            }
            PairingPlan::Global => {
                let c = sample_clifford(width, rng)?;
                blocks.push(Block::clifford((offset..offset + width).collect(), c));
            }
            PairingPlan::NonFixed | PairingPlan::Fixed { .. } | PairingPlan::Mixed { .. } => {
                let mut free: Vec<usize> = (0..width).collect();
                let mut pairs: Vec<Vec<usize>> = Vec::new();
                if self.setting_is_fixed(setting) {
                    let fixed = match self {
                        PairingPlan::Fixed { pairs } | PairingPlan::Mixed { pairs, .. } => pairs,
                        _ => unreachable!(),
                    };
                    for &(a, b) in fixed {
                        pairs.push(vec![a, b]);
                        free.retain(|&w| w != a && w != b);
                    }
                }
                free.shuffle(rng);
                for chunk in free.chunks(2) {
                    let mut p = chunk.to_vec();
                    p.sort_unstable();
                    pairs.push(p);
                }
                pairs.sort_by_key(|p| p[0]);
                for p in pairs {
                    let c = sample_clifford(p.len(), rng)?;
                    blocks.push(Block::clifford(p.iter().map(|w| w + offset).collect(), c));
                }
            }
        }
        Ok(blocks)
    }
}

fn setting_rng(seed: u64, setting: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(setting as u64);
    rng
}

/// Born probabilities of a pure state mixed with global depolarizing noise.
fn noisy_probabilities(psi: &[C64], p: f64) -> Result<Vec<f64>> {
    let uniform = p / psi.len() as f64;
    let probs: Vec<f64> = psi.iter().map(|a| (1.0 - p) * a.norm_sqr() + uniform).collect();
    check_mass(&probs)?;
    Ok(probs)
}

fn check_mass(probs: &[f64]) -> Result<()> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 || probs.iter().any(|&q| q < -1e-12) {
        return Err(Error::ProbabilityMass(total));
    }
    Ok(())
}

/// Draw `reps` outcomes by inverting the cumulative distribution.
fn sample_outcomes<R: Rng + ?Sized>(probs: &[f64], width: usize, reps: usize, rng: &mut R) -> Vec<String> {
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &q in probs {
        acc += q.max(0.0);
        cumulative.push(acc);
    }
    (0..reps)
        .map(|_| {
            let r = rng.random::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= r).min(probs.len() - 1);
            bitstring(idx, width)
        })
        .collect()
}

/// Sample computational-basis outcomes of `U ρ U†`.
pub fn born_sample<R: Rng + ?Sized>(rho: &CMatrix, u: &CMatrix, reps: usize, rng: &mut R) -> Result<Vec<String>> {
    let width = crate::qmat::qubit_count(rho.dim())
        .ok_or_else(|| Error::Dimension(format!("dim {} is not a power of two", rho.dim())))?;
    if u.dim() != rho.dim() {
        return Err(Error::Dimension(format!("unitary of dim {} on a state of dim {}", u.dim(), rho.dim())));
    }
    let dev = u.unitarity_deviation();
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    let rotated = &(u * rho) * &u.adjoint();
    let probs: Vec<f64> = (0..rho.dim()).map(|b| rotated[(b, b)].re).collect();
    check_mass(&probs)?;
    Ok(sample_outcomes(&probs, width, reps, rng))
}

fn check_sim_width(qubits: usize) -> Result<()> {
    if qubits > MAX_SIM_QUBITS {
        return Err(Error::InvalidParameter(format!("{qubits}-qubit register exceeds the {MAX_SIM_QUBITS}-qubit simulator")));
    }
    Ok(())
}

/// `(I ⊗ U)|φ⁺⟩^{⊗n}` as a `2n`-qubit vector.
fn bell_through(u: &CMatrix) -> Vec<C64> {
    let d = u.dim();
    let norm = 1.0 / (d as f64).sqrt();
    (0..d * d).map(|idx| u[(idx % d, idx / d)] * norm).collect()
}

fn rotate(state: &mut [C64], qubits: usize, blocks: &[Block], shift: usize) -> Result<()> {
    for b in blocks {
        let wires: Vec<usize> = b.wires.iter().map(|w| w - shift).collect();
        apply_on_wires(state, qubits, &wires, &b.matrix())?;
    }
    Ok(())
}

fn simulated(scheme: Scheme, n: usize, index: usize, blocks: Vec<Block>, outcomes: Vec<String>, seed: u64) -> MeasurementRecord {
    MeasurementRecord { scheme, n, index, blocks, outcomes, seed: Some(seed), source: Source::Simulated }
}

/// Ancilla scheme: Bell pairs through the channel, then a random unitary on all `2n` wires.
pub fn acquire_ancilla(spec: &ChannelSpec, plan: &PairingPlan, n_settings: usize, reps: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    let n = spec.n;
    check_sim_width(2 * n)?;
    plan.check(2 * n)?;
    if reps == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    let (u, p) = spec.resolve()?;
    let base = bell_through(&u);
    (0..n_settings)
        .into_par_iter()
        .map(|i| {
            let mut rng = setting_rng(seed, i);
            let blocks = plan.draw_blocks(i, 0, 2 * n, &RotationLabel::MEASURE, &mut rng)?;
            let mut psi = base.clone();
            rotate(&mut psi, 2 * n, &blocks, 0)?;
            let probs = noisy_probabilities(&psi, p)?;
            let outcomes = sample_outcomes(&probs, 2 * n, reps, &mut rng);
            Ok(simulated(Scheme::Ancilla, n, i, blocks, outcomes, seed))
        })
        .collect()
}

/// Ancilla scheme over every one of the `3^{2n}` rotation settings, with
/// `total_shots` split as evenly as possible (earlier settings take the remainder).
pub fn acquire_ancilla_exhaustive(spec: &ChannelSpec, total_shots: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    let n = spec.n;
    check_sim_width(2 * n)?;
    let count = 3usize.pow(2 * n as u32);
    if total_shots < count {
        return Err(Error::InvalidParameter(format!("{total_shots} shots cannot cover {count} settings")));
    }
    let (u, p) = spec.resolve()?;
    let base = bell_through(&u);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = setting_rng(seed, i);
            let labels = exhaustive_labels(i, 2 * n);
            let blocks = vec![Block::rotation((0..2 * n).collect(), labels)];
            let mut psi = base.clone();
            rotate(&mut psi, 2 * n, &blocks, 0)?;
            let probs = noisy_probabilities(&psi, p)?;
            let reps = total_shots / count + usize::from(i < total_shots % count);
            let outcomes = sample_outcomes(&probs, 2 * n, reps, &mut rng);
            Ok(simulated(Scheme::Ancilla, n, i, blocks, outcomes, seed))
        })
        .collect()
}

/// Base-3 digits of `i` over `{I, H, SH}`, wire 0 most significant.
pub fn exhaustive_labels(i: usize, wires: usize) -> Vec<RotationLabel> {
    (0..wires)
        .map(|w| RotationLabel::MEASURE[i / 3usize.pow((wires - 1 - w) as u32) % 3])
        .collect()
}

/// Two-sided scheme: prepare `U_L†|0⟩`, apply the channel, rotate by `U_R`, measure `n` wires.
///
/// With `PairingPlan::Pauli`, `U_L` is drawn per wire from `{I, H, SH, X, HX, SHX}`
/// and `U_R` from `{I, H, SH}`. Clifford plans apply on each side separately.
pub fn acquire_two_sided(spec: &ChannelSpec, plan: &PairingPlan, n_settings: usize, reps: usize, seed: u64) -> Result<Vec<MeasurementRecord>> {
    let n = spec.n;
    check_sim_width(n)?;
    if matches!(plan, PairingPlan::Fixed { .. } | PairingPlan::Mixed { .. }) {
        return Err(Error::InvalidParameter("fixed pairings tie a qubit to its ancilla and need the ancilla scheme".into()));
    }
    plan.check(n)?;
    if reps == 0 {
        return Err(Error::InvalidParameter("repetitions must be at least 1".into()));
    }
    let (u, p) = spec.resolve()?;
    let d = 1usize << n;
    (0..n_settings)
        .into_par_iter()
        .map(|i| {
            let mut rng = setting_rng(seed, i);
            let left = plan.draw_blocks(i, 0, n, &RotationLabel::ALL, &mut rng)?;
            let right = plan.draw_blocks(i, n, n, &RotationLabel::MEASURE, &mut rng)?;
            let mut psi = vec![ZERO; d];
            psi[0] = ONE;
            for b in &left {
                apply_on_wires(&mut psi, n, &b.wires, &b.matrix().adjoint())?;
            }
            let mut psi = u.apply(&psi)?;
            rotate(&mut psi, n, &right, n)?;
            let probs = noisy_probabilities(&psi, p)?;
            let outcomes = sample_outcomes(&probs, n, reps, &mut rng);
            let blocks = left.into_iter().chain(right).collect();
            Ok(simulated(Scheme::TwoSided, n, i, blocks, outcomes, seed))
        })
        .collect()
}

/// Total number of outcomes across records.
pub fn total_outcomes(recs: &[MeasurementRecord]) -> usize {
    recs.iter().map(|r| r.outcomes.len()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ghz_process;
    use crate::qmat::kron;

    fn zero_state(d: usize) -> CMatrix {
        let mut v = vec![ZERO; d];
        v[0] = ONE;
        CMatrix::projector(&v)
    }

    #[test]
    fn born_sample_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = zero_state(2);
        assert!(born_sample(&rho, &CMatrix::identity(2), 100, &mut rng).unwrap().iter().all(|b| b == "0"));

        let h = RotationLabel::H.matrix();
        let reps = 10_000;
        let ones = born_sample(&rho, &h, reps, &mut rng).unwrap().iter().filter(|b| *b == "1").count();
        let sigma = (reps as f64 * 0.25).sqrt();
        assert!((ones as f64 - reps as f64 / 2.0).abs() < 5.0 * sigma);

        let s = C64::new(0.5f64.sqrt(), 0.0);
        let bell = CMatrix::projector(&[s, ZERO, ZERO, s]);
        for b in born_sample(&bell, &CMatrix::identity(4), 500, &mut rng).unwrap() {
            assert!(b == "00" || b == "11");
        }
    }

    #[test]
    fn born_sample_rejects_bad_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = CMatrix::real_diag(&[0.7, 0.7]);
        assert!(matches!(born_sample(&rho, &CMatrix::identity(2), 1, &mut rng), Err(Error::ProbabilityMass(_))));
    }

    #[test]
    fn identity_channel_all_i_gives_bell_parity() {
        let spec = ChannelSpec::identity(2);
        let recs = acquire_ancilla(&spec, &PairingPlan::Pauli, 300, 20, 4).unwrap();
        let mut checked = 0;
        for r in &recs {
            let BlockUnitary::Rotation(labels) = &r.blocks[0].unitary else { panic!() };
            if labels.iter().all(|&l| l == RotationLabel::I) {
                for o in &r.outcomes {
                    assert_eq!(&o[..2], &o[2..]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn two_sided_identity_with_trivial_rotations() {
        let spec = ChannelSpec::identity(3);
        let recs = acquire_two_sided(&spec, &PairingPlan::Pauli, 2000, 5, 8).unwrap();
        let mut checked = 0;
        for r in &recs {
            let trivial = r.blocks.iter().all(|b| match &b.unitary {
                BlockUnitary::Rotation(l) => l.iter().all(|&x| x == RotationLabel::I),
                _ => false,
            });
            if trivial {
                assert!(r.outcomes.iter().all(|o| o == "000"));
                checked += 1;
            }
            assert!(r.validate().is_ok());
        }
        assert!(checked > 0);
    }

    #[test]
    fn exhaustive_settings_and_budget() {
        let spec = ghz_process(2).unwrap();
        let recs = acquire_ancilla_exhaustive(&spec, 51_200, 2).unwrap();
        assert_eq!(recs.len(), 81);
        assert_eq!(total_outcomes(&recs), 51_200);
        let distinct: std::collections::HashSet<Vec<RotationLabel>> = recs
            .iter()
            .map(|r| match &r.blocks[0].unitary {
                BlockUnitary::Rotation(l) => l.clone(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(distinct.len(), 81);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let spec = ghz_process(2).unwrap().depolarized(0.1);
        let plan = PairingPlan::default_mixed(2);
        let a = acquire_ancilla(&spec, &plan, 64, 3, 77).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| acquire_ancilla(&spec, &plan, 64, 3, 77).unwrap());
        assert_eq!(a, b);
        // record i only depends on (seed, i)
        let c = acquire_ancilla(&spec, &plan, 10, 3, 77).unwrap();
        assert_eq!(&a[..10], &c[..]);
    }

    #[test]
    fn pauli_plan_basis_frequencies_uniform() {
        let spec = ChannelSpec::identity(1);
        let settings = 30_000;
        let recs = acquire_ancilla(&spec, &PairingPlan::Pauli, settings, 1, 5).unwrap();
        for wire in 0..2 {
            let mut counts = [0usize; 3];
            for r in &recs {
                let BlockUnitary::Rotation(l) = &r.blocks[0].unitary else { panic!() };
                counts[RotationLabel::MEASURE.iter().position(|&x| x == l[wire]).unwrap()] += 1;
            }
            let mean = settings as f64 / 3.0;
            let sigma = (settings as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
            for c in counts {
                assert!((c as f64 - mean).abs() < 5.0 * sigma, "{counts:?}");
            }
        }
    }

    #[test]
    fn fixed_pairs_kept_and_nonfixed_covers_all_matchings() {
        let spec = ChannelSpec::identity(2);
        let fixed = PairingPlan::Fixed { pairs: vec![(0, 2)] };
        for r in acquire_ancilla(&spec, &fixed, 50, 1, 3).unwrap() {
            assert!(r.blocks.iter().any(|b| b.wires == vec![0, 2]));
            assert!(r.blocks.iter().all(|b| b.wires.len() == 2));
        }
        let mut matchings = std::collections::HashSet::new();
        for r in acquire_ancilla(&spec, &PairingPlan::NonFixed, 200, 1, 3).unwrap() {
            let m: Vec<Vec<usize>> = r.blocks.iter().map(|b| b.wires.clone()).collect();
            matchings.insert(m);
        }
        // 4 wires admit exactly 3 perfect matchings
        assert_eq!(matchings.len(), 3);
        assert!(acquire_ancilla(&spec, &PairingPlan::Fixed { pairs: vec![(0, 4)] }, 1, 1, 0).is_err());
        assert!(acquire_ancilla(&spec, &PairingPlan::Fixed { pairs: vec![(0, 1), (1, 2)] }, 1, 1, 0).is_err());
    }

    #[test]
    fn mixed_fraction_is_exact() {
        for (n, frac) in [(2, 0.0), (3, 0.5), (4, 0.4375)] {
            let plan = PairingPlan::default_mixed(n);
            let fixed = (0..1024).filter(|&i| plan.setting_is_fixed(i)).count();
            assert_eq!(fixed as f64, 1024.0 * frac);
        }
    }

    #[test]
    fn global_plan_and_width_limits() {
        let spec = ChannelSpec::identity(2);
        let recs = acquire_ancilla(&spec, &PairingPlan::Global, 5, 2, 1).unwrap();
        assert!(recs.iter().all(|r| r.blocks.len() == 1 && r.blocks[0].wires.len() == 4));
        assert!(acquire_ancilla(&ChannelSpec::identity(5), &PairingPlan::Pauli, 1, 1, 0).is_err());
        assert!(acquire_two_sided(&ChannelSpec::identity(5), &PairingPlan::Pauli, 1, 1, 0).is_ok());
        assert!(acquire_two_sided(&spec, &PairingPlan::default_mixed(2), 1, 1, 0).is_err());
    }

    #[test]
    fn ancilla_marginals_match_exact_born_rule() {
        // Rotation H on every wire of the GHZ(2) Choi state, compared to the dense density matrix
        let spec = ghz_process(2).unwrap();
        let l = spec.choi().unwrap().to_normalized();
        let u = kron(&rotation_unitary(&[RotationLabel::H; 2]), &rotation_unitary(&[RotationLabel::H; 2]));
        let rotated = &(&u * l.matrix()) * &u.adjoint();
        let psi = {
            let mut psi = bell_through(&spec.resolve().unwrap().0);
            let blocks = vec![Block::rotation(vec![0, 1, 2, 3], vec![RotationLabel::H; 4])];
            rotate(&mut psi, 4, &blocks, 0).unwrap();
            psi
        };
        for b in 0..16 {
            assert!((psi[b].norm_sqr() - rotated[(b, b)].re).abs() < 1e-12);
        }
    }

    #[test]
    fn record_validation() {
        let spec = ChannelSpec::identity(1);
        let mut r = acquire_ancilla(&spec, &PairingPlan::Pauli, 1, 2, 0).unwrap().remove(0);
        assert!(r.validate().is_ok());
        r.outcomes[0] = "0".into();
        assert!(r.validate().is_err());
        r.outcomes[0] = "0a".into();
        assert!(r.validate().is_err());
        r.outcomes.clear();
        assert!(r.validate().is_err());
    }
}

//! Channels as Choi matrices, plus the benchmark circuits and Ising Hamiltonians.
//!
//! The Choi register holds the input copy on qubits `0..n` and the channel
//! output on qubits `n..2n`, with qubit 0 most significant.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gates::pauli::{Pauli, PauliString};
use crate::qmat::{apply_on_wires, expm_i_hermitian, partial_trace, CMatrix, C64, I, ONE, ZERO};

/// Choi matrix of an `n`-qubit channel on the `2n`-qubit register.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChoiDump", into = "ChoiDump")]
pub struct ChoiMatrix {
    n: usize,
    mat: CMatrix,
    normalized: bool,
}

#[derive(Serialize, Deserialize)]
struct ChoiDump {
    n: usize,
    normalized: bool,
    matrix: CMatrix,
}

impl From<ChoiMatrix> for ChoiDump {
    fn from(c: ChoiMatrix) -> Self {
        ChoiDump { n: c.n, normalized: c.normalized, matrix: c.mat }
    }
}

impl TryFrom<ChoiDump> for ChoiMatrix {
    type Error = Error;

    fn try_from(d: ChoiDump) -> Result<Self> {
        ChoiMatrix::new(d.n, d.matrix, d.normalized)
    }
}

impl ChoiMatrix {
    pub fn new(n: usize, mat: CMatrix, normalized: bool) -> Result<Self> {
        if n == 0 || mat.dim() != 1 << (2 * n) {
            return Err(Error::Dimension(format!("Choi matrix for n={n} must have dim {}, got {}", 1usize << (2 * n), mat.dim())));
        }
        Ok(Self { n, mat, normalized })
    }

    /// Unnormalized Choi matrix with trace `2^n`.
    pub fn unnormalized(n: usize, mat: CMatrix) -> Result<Self> {
        Self::new(n, mat, false)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    /// The trace-`2^n` matrix regardless of the stored normalization.
    pub fn unnormalized_matrix(&self) -> CMatrix {
        if self.normalized {
            self.mat.scale_real((1u64 << self.n) as f64)
        } else {
            self.mat.clone()
        }
    }

    pub fn to_unnormalized(&self) -> Self {
        Self { n: self.n, mat: self.unnormalized_matrix(), normalized: false }
    }

    pub fn to_normalized(&self) -> Self {
        let mat = if self.normalized { self.mat.clone() } else { self.mat.scale_real(1.0 / (1u64 << self.n) as f64) };
        Self { n: self.n, mat, normalized: true }
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    /// Choi matrix of the identity channel, `2^n |φ⁺⟩⟨φ⁺|^{⊗n}`.
    pub fn identity_channel(n: usize) -> Self {
        choi_from_unitary(&CMatrix::identity(1 << n), n).expect("identity is unitary")
    }

    /// Choi matrix of the completely depolarizing channel, `I / 2^n`.
    pub fn fully_depolarizing(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Self { n, mat: CMatrix::identity(d).scale_real(1.0 / (1u64 << n) as f64), normalized: false }
    }

    /// `(1 - p) Λ + p I / 2^n`
    pub fn depolarize(&self, p: f64) -> Result<Self> {
        check_probability(p)?;
        let base = self.to_unnormalized();
        let mut mat = base.mat.scale_real(1.0 - p);
        mat.add_scaled(&Self::fully_depolarizing(self.n).mat, C64::new(p, 0.0))?;
        Ok(Self { n: self.n, mat, normalized: false })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("depolarizing strength {p} outside [0, 1]")));
    }
    Ok(())
}

/// `Λ = Σ_{x,y} |x⟩⟨y| ⊗ U|x⟩⟨y|U†`, trace `2^n`.
pub fn choi_from_unitary(u: &CMatrix, n: usize) -> Result<ChoiMatrix> {
    let d = 1usize << n;
    if u.dim() != d {
        return Err(Error::Dimension(format!("unitary of dim {} for n={n}", u.dim())));
    }
    let dev = u.unitarity_deviation();
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    let v: Vec<C64> = (0..d * d).map(|idx| u[(idx % d, idx / d)]).collect();
    ChoiMatrix::unnormalized(n, CMatrix::projector(&v))
}

/// `E(ρ) = tr_in[(ρ^T ⊗ I) Λ]`, extended linearly to arbitrary operators.
pub fn apply_channel(l: &ChoiMatrix, rho_in: &CMatrix) -> Result<CMatrix> {
    let d = 1usize << l.n();
    if rho_in.dim() != d {
        return Err(Error::Dimension(format!("input of dim {} for a {}-qubit channel", rho_in.dim(), l.n())));
    }
    let scale = if l.is_normalized() { d as f64 } else { 1.0 };
    let m = l.matrix();
    let mut out = CMatrix::zeros(d);
    for j in 0..d {
        for i in 0..d {
            let r = rho_in[(j, i)] * scale;
            if r == ZERO {
                continue;
            }
            for o in 0..d {
                for o2 in 0..d {
                    out[(o, o2)] += r * m[(j * d + o, i * d + o2)];
                }
            }
        }
    }
    Ok(out)
}

/// Reduced process on `subsystem`: input and output copies of the other qubits
/// are traced out together and the result rescaled to trace `2^k`.
pub fn reduced_choi(l: &ChoiMatrix, subsystem: &[usize]) -> Result<ChoiMatrix> {
    let n = l.n();
    let mut sub = subsystem.to_vec();
    sub.sort_unstable();
    sub.dedup();
    if sub.is_empty() {
        return Err(Error::Empty("reduced process needs a non-empty subsystem".into()));
    }
    if sub.iter().any(|&q| q >= n) {
        return Err(Error::Dimension(format!("subsystem {subsystem:?} outside a {n}-qubit channel")));
    }
    let k = sub.len();
    let keep: Vec<usize> = sub.iter().copied().chain(sub.iter().map(|q| q + n)).collect();
    let reduced = partial_trace(&l.unnormalized_matrix(), &keep, &vec![2; 2 * n])?;
    ChoiMatrix::unnormalized(k, reduced.scale_real(1.0 / (1u64 << (n - k)) as f64))
}

/// A gate in a circuit. Angles in `params` are in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub name: String,
    pub wires: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(name: &str, wires: &[usize]) -> Self {
        Self { name: name.to_string(), wires: wires.to_vec(), params: Vec::new() }
    }

    pub fn with_params(name: &str, wires: &[usize], params: &[f64]) -> Self {
        Self { name: name.to_string(), wires: wires.to_vec(), params: params.to_vec() }
    }

    pub fn matrix(&self) -> Result<CMatrix> {
        let s = 0.5f64.sqrt();
        let arity = |k: usize, np: usize| -> Result<()> {
            if self.wires.len() != k || self.params.len() != np {
                return Err(Error::InvalidParameter(format!(
                    "gate {} takes {k} wire(s) and {np} parameter(s), got {} and {}",
                    self.name,
                    self.wires.len(),
                    self.params.len()
                )));
            }
            Ok(())
        };
        let theta = || self.params.first().copied().unwrap_or(0.0);
        let m = match self.name.to_ascii_uppercase().as_str() {
            "I" | "ID" => {
                arity(1, 0)?;
                CMatrix::identity(2)
            }
            "H" => {
                arity(1, 0)?;
                CMatrix::from_real_rows(&[&[s, s], &[s, -s]])?
            }
            "X" => {
                arity(1, 0)?;
                Pauli::X.matrix()
            }
            "Y" => {
                arity(1, 0)?;
                Pauli::Y.matrix()
            }
            "Z" => {
                arity(1, 0)?;
                Pauli::Z.matrix()
            }
            "S" => {
                arity(1, 0)?;
                CMatrix::diag(&[ONE, I])
            }
            "SDG" => {
                arity(1, 0)?;
                CMatrix::diag(&[ONE, -I])
            }
            "T" => {
                arity(1, 0)?;
                CMatrix::diag(&[ONE, C64::from_polar(1.0, std::f64::consts::FRAC_PI_4)])
            }
            "RX" | "RY" | "RZ" => {
                arity(1, 1)?;
                let (c, sn) = ((theta() / 2.0).cos(), (theta() / 2.0).sin());
                match self.name.to_ascii_uppercase().as_str() {
                    "RX" => CMatrix::from_rows(&[vec![C64::new(c, 0.0), C64::new(0.0, -sn)], vec![C64::new(0.0, -sn), C64::new(c, 0.0)]])?,
                    "RY" => CMatrix::from_real_rows(&[&[c, -sn], &[sn, c]])?,
                    _ => CMatrix::diag(&[C64::from_polar(1.0, -theta() / 2.0), C64::from_polar(1.0, theta() / 2.0)]),
                }
            }
            "CX" | "CNOT" => {
                arity(2, 0)?;
                CMatrix::from_real_rows(&[&[1., 0., 0., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.], &[0., 0., 1., 0.]])?
            }
            "CZ" => {
                arity(2, 0)?;
                CMatrix::real_diag(&[1., 1., 1., -1.])
            }
            "SWAP" => {
                arity(2, 0)?;
                CMatrix::from_real_rows(&[&[1., 0., 0., 0.], &[0., 0., 1., 0.], &[0., 1., 0., 0.], &[0., 0., 0., 1.]])?
            }
            _ => return Err(Error::UnknownLabel(self.name.clone())),
        };
        let mut sorted = self.wires.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.wires.len() {
            return Err(Error::InvalidParameter(format!("gate {} repeats a wire: {:?}", self.name, self.wires)));
        }
        Ok(m)
    }
}

/// Apply a circuit to an `n`-qubit state vector in place.
pub fn apply_gates(state: &mut [C64], n: usize, gates: &[Gate]) -> Result<()> {
    for g in gates {
        apply_on_wires(state, n, &g.wires, &g.matrix()?)?;
    }
    Ok(())
}

/// Dense unitary of a circuit.
pub fn circuit_unitary(n: usize, gates: &[Gate]) -> Result<CMatrix> {
    let d = 1usize << n;
    let mut u = CMatrix::zeros(d);
    for col in 0..d {
        let mut v = vec![ZERO; d];
        v[col] = ONE;
        apply_gates(&mut v, n, gates)?;
        for (row, z) in v.into_iter().enumerate() {
            u[(row, col)] = z;
        }
    }
    Ok(u)
}

/// Number of layers when every gate is scheduled as early as its wires allow.
pub fn circuit_depth(n: usize, gates: &[Gate]) -> usize {
    let mut level = vec![0usize; n];
    for g in gates {
        let start = g.wires.iter().map(|&w| level[w]).max().unwrap_or(0);
        for &w in &g.wires {
            level[w] = start + 1;
        }
    }
    level.into_iter().max().unwrap_or(0)
}

/// Terms `c_i h_i` of a Hamiltonian over Hermitian Pauli strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerms {
    pub n: usize,
    pub terms: Vec<HamiltonianTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianTerm {
    pub coeff: f64,
    pub pauli: PauliString,
}

impl HamiltonianTerms {
    pub fn new(n: usize, terms: Vec<(f64, PauliString)>) -> Result<Self> {
        for (_, p) in &terms {
            if p.n() != n {
                return Err(Error::Dimension(format!("term {p} on a {n}-qubit Hamiltonian")));
            }
            if p.weight() == 0 || !p.is_hermitian() {
                return Err(Error::InvalidParameter(format!("term {p} must be a non-identity Hermitian Pauli string")));
            }
        }
        let terms = terms.into_iter().map(|(coeff, pauli)| HamiltonianTerm { coeff, pauli }).collect();
        Ok(Self { n, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    pub fn matrix(&self) -> CMatrix {
        let mut h = CMatrix::zeros(1 << self.n);
        for t in &self.terms {
            h.add_scaled(&t.pauli.matrix(), C64::new(t.coeff, 0.0)).expect("same dimension");
        }
        h
    }
}

/// Open-chain transverse-field Ising model `Σ J_i X_i X_{i+1} + Σ h_i Z_i`.
///
/// Terms are ordered with all couplings first, then all fields.
pub fn tfim_hamiltonian(n: usize, j: &[f64], h: &[f64]) -> Result<HamiltonianTerms> {
    if n < 2 || j.len() != n - 1 || h.len() != n {
        return Err(Error::Dimension(format!(
            "TFIM on {n} qubits needs {} couplings and {n} fields, got {} and {}",
            n.saturating_sub(1),
            j.len(),
            h.len()
        )));
    }
    let couplings = j.iter().enumerate().map(|(i, &c)| (c, PauliString::sparse(n, &[(i, Pauli::X), (i + 1, Pauli::X)])));
    let fields = h.iter().enumerate().map(|(i, &c)| (c, PauliString::single(n, i, Pauli::Z)));
    HamiltonianTerms::new(n, couplings.chain(fields).collect())
}

/// TFIM with couplings and fields drawn uniformly from `[-1, 1)`.
pub fn random_tfim<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<HamiltonianTerms> {
    let j: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.random_range(-1.0..1.0)).collect();
    let h: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    tfim_hamiltonian(n, &j, &h)
}

/// How a channel is specified. Everything resolves to a unitary followed by
/// optional global depolarizing noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Unitary { matrix: CMatrix },
    Gates { gates: Vec<Gate> },
    Propagator { hamiltonian: HamiltonianTerms, t: f64 },
    Depolarized { inner: Box<ChannelSpec>, p: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub n: usize,
    #[serde(flatten)]
    pub kind: ChannelKind,
}

impl ChannelSpec {
    pub fn unitary(n: usize, matrix: CMatrix) -> Self {
        Self { n, kind: ChannelKind::Unitary { matrix } }
    }

    pub fn gates(n: usize, gates: Vec<Gate>) -> Self {
        Self { n, kind: ChannelKind::Gates { gates } }
    }

    pub fn identity(n: usize) -> Self {
        Self::gates(n, Vec::new())
    }

    pub fn depolarized(self, p: f64) -> Self {
        Self { n: self.n, kind: ChannelKind::Depolarized { inner: Box::new(self), p } }
    }

    /// Unitary part and effective depolarizing strength.
    pub fn resolve(&self) -> Result<(CMatrix, f64)> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("channel needs at least one qubit".into()));
        }
        match &self.kind {
            ChannelKind::Unitary { matrix } => {
                if matrix.dim() != 1 << self.n {
                    return Err(Error::Dimension(format!("unitary of dim {} for n={}", matrix.dim(), self.n)));
                }
                let dev = matrix.unitarity_deviation();
                if dev > 1e-9 {
                    return Err(Error::NotUnitary(dev));
                }
                Ok((matrix.clone(), 0.0))
            }
            ChannelKind::Gates { gates } => {
                if let Some(g) = gates.iter().find(|g| g.wires.iter().any(|&w| w >= self.n)) {
                    return Err(Error::Dimension(format!("gate {} on wires {:?} of a {}-qubit circuit", g.name, g.wires, self.n)));
                }
                Ok((circuit_unitary(self.n, gates)?, 0.0))
            }
            ChannelKind::Propagator { hamiltonian, t } => {
                if hamiltonian.n != self.n {
                    return Err(Error::Dimension(format!("{}-qubit Hamiltonian for n={}", hamiltonian.n, self.n)));
                }
                Ok((expm_i_hermitian(&hamiltonian.matrix(), *t)?, 0.0))
            }
            ChannelKind::Depolarized { inner, p } => {
                check_probability(*p)?;
                if inner.n != self.n {
                    return Err(Error::Dimension(format!("{}-qubit inner channel for n={}", inner.n, self.n)));
                }
                let (u, q) = inner.resolve()?;
                Ok((u, 1.0 - (1.0 - p) * (1.0 - q)))
            }
        }
    }

    pub fn choi(&self) -> Result<ChoiMatrix> {
        let (u, p) = self.resolve()?;
        let l = choi_from_unitary(&u, self.n)?;
        if p > 0.0 {
            l.depolarize(p)
        } else {
            Ok(l)
        }
    }

    /// Circuit depth for gate-list channels.
    pub fn depth(&self) -> Option<usize> {
        match &self.kind {
            ChannelKind::Gates { gates } => Some(circuit_depth(self.n, gates)),
            ChannelKind::Depolarized { inner, .. } => inner.depth(),
            _ => None,
        }
    }
}

/// Circuit preparing `(|0…0⟩ + |1…1⟩)/√2` from `|0…0⟩`.
///
/// Depths are 2, 3, 3 for `n` = 2, 3, 4 (the `n = 4` circuit fans out in
/// parallel from the first pair); larger `n` uses a CNOT ladder.
pub fn ghz_process(n: usize) -> Result<ChannelSpec> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("GHZ process needs n >= 2, got {n}")));
    }
    let mut gates = vec![Gate::new("H", &[0]), Gate::new("CX", &[0, 1])];
    if n == 4 {
        gates.push(Gate::new("CX", &[0, 2]));
        gates.push(Gate::new("CX", &[1, 3]));
    } else {
        gates.extend((1..n - 1).map(|i| Gate::new("CX", &[i, i + 1])));
    }
    Ok(ChannelSpec::gates(n, gates))
}

/// Unitary channel `exp(-iHt)`.
pub fn propagator(ht: &HamiltonianTerms, t: f64) -> ChannelSpec {
    ChannelSpec { n: ht.n, kind: ChannelKind::Propagator { hamiltonian: ht.clone(), t } }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmat::{kron, purity, trace_distance};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
        let h = CMatrix::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).hermitize();
        expm_i_hermitian(&h, 1.3).unwrap()
    }

    fn random_density(d: usize, rng: &mut impl Rng) -> CMatrix {
        let a = CMatrix::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let p = &a * &a.adjoint();
        let tr = p.trace().re;
        p.scale_real(1.0 / tr)
    }

    #[test]
    fn identity_choi_is_bell_projector() {
        let l = ChoiMatrix::identity_channel(1);
        let want = CMatrix::from_real_rows(&[&[1., 0., 0., 1.], &[0., 0., 0., 0.], &[0., 0., 0., 0.], &[1., 0., 0., 1.]]).unwrap();
        assert!(l.matrix().max_abs_diff(&want) < 1e-15);
        assert!((l.trace() - 2.0).abs() < 1e-15);
        assert!((purity(&l) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn x_choi_is_orthogonal_to_identity() {
        let lx = choi_from_unitary(&Pauli::X.matrix(), 1).unwrap();
        let li = ChoiMatrix::identity_channel(1);
        assert!(lx.matrix().trace_product(li.matrix()).unwrap().norm() < 1e-15);
        assert!((lx.trace() - 2.0).abs() < 1e-15);
        assert!((trace_distance(&li, &lx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        assert!(matches!(choi_from_unitary(&CMatrix::real_diag(&[1.0, 0.5]), 1), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn apply_channel_matches_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3 {
            for _ in 0..200 / 3 + 1 {
                let u = random_unitary(1 << n, &mut rng);
                let rho = random_density(1 << n, &mut rng);
                let l = choi_from_unitary(&u, n).unwrap();
                let got = apply_channel(&l, &rho).unwrap();
                let want = &(&u * &rho) * &u.adjoint();
                assert!((&got - &want).frobenius_norm() < 1e-9);
                assert!((got.trace().re - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn normalized_flag_is_respected() {
        let l = ghz_process(2).unwrap().choi().unwrap();
        let rho = CMatrix::projector(&[ONE, ZERO, ZERO, ZERO]);
        let a = apply_channel(&l, &rho).unwrap();
        let b = apply_channel(&l.to_normalized(), &rho).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-14);
        assert!((l.to_normalized().trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ghz2_maps_zero_to_bell() {
        let l = ghz_process(2).unwrap().choi().unwrap();
        let out = apply_channel(&l, &CMatrix::projector(&[ONE, ZERO, ZERO, ZERO])).unwrap();
        let s = C64::new(0.5f64.sqrt(), 0.0);
        let bell = CMatrix::projector(&[s, ZERO, ZERO, s]);
        assert!(out.max_abs_diff(&bell) < 1e-14);
    }

    #[test]
    fn ghz_depths_and_stabilizers() {
        for (n, depth) in [(2, 2), (3, 3), (4, 3)] {
            assert_eq!(ghz_process(n).unwrap().depth(), Some(depth));
        }
        for n in 2..=6 {
            let u = ghz_process(n).unwrap().resolve().unwrap().0;
            let psi = u.column(0);
            let rho = CMatrix::projector(&psi);
            let all_x = PauliString::new(vec![Pauli::X; n]);
            assert!((all_x.trace_with(&rho).re - 1.0).abs() < 1e-12);
            for i in 0..n {
                for j in i + 1..n {
                    let zz = PauliString::sparse(n, &[(i, Pauli::Z), (j, Pauli::Z)]);
                    assert!((zz.trace_with(&rho).re - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(ghz_process(1).is_err());
    }

    #[test]
    fn full_depolarization_outputs_maximally_mixed() {
        let spec = ChannelSpec::identity(2).depolarized(1.0);
        let l = spec.choi().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let out = apply_channel(&l, &random_density(4, &mut rng)).unwrap();
        assert!(out.max_abs_diff(&CMatrix::identity(4).scale_real(0.25)).abs() < 1e-14);
        assert!((purity(&ChoiMatrix::fully_depolarizing(1)) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn nested_depolarizing_composes() {
        let spec = ChannelSpec::identity(1).depolarized(0.1).depolarized(0.2);
        let (_, p) = spec.resolve().unwrap();
        assert!((p - (1.0 - 0.9 * 0.8)).abs() < 1e-15);
        assert!(ChannelSpec::identity(1).depolarized(1.5).resolve().is_err());
    }

    #[test]
    fn tfim_structure() {
        let ht = tfim_hamiltonian(2, &[1.0], &[0.0, 0.0]).unwrap();
        let xx = kron(&Pauli::X.matrix(), &Pauli::X.matrix());
        assert!(ht.matrix().max_abs_diff(&xx) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ht3 = random_tfim(3, &mut rng).unwrap();
        assert_eq!(ht3.len(), 5);
        assert!(ht3.coefficients().iter().all(|c| (-1.0..1.0).contains(c)));
        assert!(tfim_hamiltonian(3, &[1.0], &[0.0; 3]).is_err());
    }

    #[test]
    fn propagator_properties() {
        let z = HamiltonianTerms::new(1, vec![(1.0, PauliString::single(1, 0, Pauli::Z))]).unwrap();
        let t = 0.4;
        let (u, _) = propagator(&z, t).resolve().unwrap();
        let want = CMatrix::diag(&[C64::from_polar(1.0, -t), C64::from_polar(1.0, t)]);
        assert!(u.max_abs_diff(&want) < 1e-14);
        let (u0, _) = propagator(&z, 0.0).resolve().unwrap();
        assert!(u0.max_abs_diff(&CMatrix::identity(2)) < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ht = random_tfim(3, &mut rng).unwrap();
        let (u1, _) = propagator(&ht, 0.3).resolve().unwrap();
        let (u2, _) = propagator(&ht, 0.6).resolve().unwrap();
        assert!((&(&u1 * &u1) - &u2).frobenius_norm() < 1e-9);
    }

    #[test]
    fn reduced_choi_cases() {
        let ghz = ghz_process(2).unwrap().choi().unwrap();
        assert_eq!(reduced_choi(&ghz, &[0, 1]).unwrap(), ghz);
        let r = reduced_choi(&ghz, &[0]).unwrap();
        assert_eq!(r.n(), 1);
        assert!((r.trace() - 2.0).abs() < 1e-12);
        assert!(purity(&r) < 1.0 - 1e-6);

        let id = ChoiMatrix::identity_channel(3);
        for sub in [vec![1], vec![0, 2]] {
            let r = reduced_choi(&id, &sub).unwrap();
            assert!(r.matrix().max_abs_diff(ChoiMatrix::identity_channel(sub.len()).matrix()) < 1e-12);
        }
        assert!(reduced_choi(&id, &[]).is_err());
        assert!(reduced_choi(&id, &[3]).is_err());
    }

    #[test]
    fn reduced_choi_of_factorized_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(4, &mut rng);
        let l = choi_from_unitary(&kron(&a, &b), 3).unwrap();
        let r = reduced_choi(&l, &[0]).unwrap();
        let rho = random_density(2, &mut rng);
        let tau = random_density(4, &mut rng);
        let full_out = apply_channel(&l, &kron(&rho, &tau)).unwrap();
        let want = partial_trace(&full_out, &[0], &[2, 4]).unwrap();
        assert!(apply_channel(&r, &rho).unwrap().max_abs_diff(&want) < 1e-12);
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ghz_process(3).unwrap().depolarized(0.1);
        let s = serde_json::to_string(&spec).unwrap();
        assert!(s.contains("\"kind\":\"depolarized\""));
        let back: ChannelSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, spec);
        let unknown = r#"{"n":1,"kind":"gates","gates":[{"name":"Q","wires":[0]}]}"#;
        let spec: ChannelSpec = serde_json::from_str(unknown).unwrap();
        assert!(matches!(spec.resolve(), Err(Error::UnknownLabel(s)) if s == "Q"));
    }

    #[test]
    fn choi_json_round_trip() {
        let l = ghz_process(2).unwrap().choi().unwrap();
        let back: ChoiMatrix = serde_json::from_str(&serde_json::to_string(&l).unwrap()).unwrap();
        assert_eq!(back, l);
    }
}

//! Clifford unitaries as stabilizer tableaux with a cached dense realization.
//!
//! A tableau stores the images of the generators `X_0..X_{k-1}, Z_0..Z_{k-1}`
//! under conjugation `P ↦ U P U†`, each a Hermitian Pauli string with a sign.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pauli::{Pauli, PauliString};
use crate::error::{Error, Result};
use crate::qmat::{CMatrix, C64, ZERO};

pub const MAX_CLIFFORD_ARITY: usize = 8;

#[derive(Clone, Debug)]
pub struct CliffordElement {
    k: usize,
    images: Vec<PauliString>,
    dense: CMatrix,
}

impl PartialEq for CliffordElement {
    fn eq(&self, other: &Self) -> bool {
        self.k == other.k && self.images == other.images
    }
}

impl Eq for CliffordElement {}

impl std::hash::Hash for CliffordElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.k.hash(state);
        self.images.hash(state);
    }
}

/// Symplectic vectors over GF(2)^{2k}: bit `q` is `x_q`, bit `k + q` is `z_q`.
fn symplectic_product(a: u32, b: u32, k: usize) -> bool {
    let mask = (1u32 << k) - 1;
    let (ax, az) = (a & mask, a >> k);
    let (bx, bz) = (b & mask, b >> k);
    ((ax & bz).count_ones() + (az & bx).count_ones()) % 2 == 1
}

fn vector_to_pauli(v: u32, k: usize, negative: bool) -> PauliString {
    let letters = (0..k)
        .map(|q| Pauli::from_bits(v >> q & 1 == 1, v >> (k + q) & 1 == 1))
        .collect();
    let p = PauliString::new(letters);
    if negative {
        p.negated()
    } else {
        p
    }
}

fn pauli_to_vector(p: &PauliString) -> u32 {
    let k = p.n();
    p.letters().iter().enumerate().fold(0, |v, (q, l)| {
        let (x, z) = l.bits();
        v | (x as u32) << q | (z as u32) << (k + q)
    })
}

/// Linearly independent subset spanning the same GF(2) space.
fn independent_subset(vectors: &[u32]) -> Vec<u32> {
    // pivots[i] holds a reduced vector whose leading bit is i
    let mut pivots: Vec<Option<u32>> = vec![None; 32];
    let mut kept = Vec::new();
    for &v in vectors {
        let mut r = v;
        while r != 0 {
            let lead = 31 - r.leading_zeros() as usize;
            match pivots[lead] {
                Some(p) => r ^= p,
                None => {
                    pivots[lead] = Some(r);
                    kept.push(v);
                    break;
                }
            }
        }
    }
    kept
}

impl CliffordElement {
    pub fn identity(k: usize) -> Self {
        let images = (0..k)
            .map(|q| PauliString::single(k, q, Pauli::X))
            .chain((0..k).map(|q| PauliString::single(k, q, Pauli::Z)))
            .collect();
        Self::from_images(k, images).expect("identity tableau is valid")
    }

    /// Build from generator images `[X_0.., Z_0..]`, validating the commutation relations.
    pub fn from_images(k: usize, images: Vec<PauliString>) -> Result<Self> {
        if !(1..=MAX_CLIFFORD_ARITY).contains(&k) {
            return Err(Error::InvalidParameter(format!(
                "clifford arity {k} outside 1..={MAX_CLIFFORD_ARITY}"
            )));
        }
        if images.len() != 2 * k || images.iter().any(|p| p.n() != k) {
            return Err(Error::Dimension(format!("tableau for k={k} needs {} images of length {k}", 2 * k)));
        }
        if images.iter().any(|p| !p.is_hermitian()) {
            return Err(Error::InvalidParameter("tableau images must carry a real sign".into()));
        }
        let vecs: Vec<u32> = images.iter().map(pauli_to_vector).collect();
        for g in 0..2 * k {
            for h in 0..2 * k {
                let expected = g < k && h == g + k || h < k && g == h + k;
                if symplectic_product(vecs[g], vecs[h], k) != expected {
                    return Err(Error::InvalidParameter("tableau is not symplectic".into()));
                }
            }
        }
        let dense = dense_from_images(k, &images);
        Ok(Self { k, images, dense })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn images(&self) -> &[PauliString] {
        &self.images
    }

    pub fn image_of_x(&self, q: usize) -> &PauliString {
        &self.images[q]
    }

    pub fn image_of_z(&self, q: usize) -> &PauliString {
        &self.images[self.k + q]
    }

    pub fn unitary(&self) -> &CMatrix {
        &self.dense
    }

    /// `U P U†` for any Pauli string.
    pub fn conjugate(&self, p: &PauliString) -> PauliString {
        assert_eq!(p.n(), self.k, "Pauli string length does not match clifford arity");
        let mut acc = PauliString::identity(self.k).with_phase(p.phase_power());
        for (q, &letter) in p.letters().iter().enumerate() {
            acc = match letter {
                Pauli::I => acc,
                Pauli::X => acc.mul(self.image_of_x(q)),
                Pauli::Z => acc.mul(self.image_of_z(q)),
                // Y = i X Z
                Pauli::Y => acc.mul(self.image_of_x(q)).mul(self.image_of_z(q)).with_phase(1),
            };
        }
        acc
    }

    /// `self ∘ other`, i.e. the tableau of `U_self · U_other`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.k, other.k, "composing cliffords of different arity");
        let images = other.images.iter().map(|p| self.conjugate(p)).collect();
        Self::from_images(self.k, images).expect("composition of valid tableaux is valid")
    }

    pub fn inverse(&self) -> Self {
        let k = self.k;
        let vecs: Vec<u32> = self.images.iter().map(pauli_to_vector).collect();
        // Solve S v = e_g using the symplectic duality of the images.
        let unsigned: Vec<PauliString> = (0..2 * k)
            .map(|g| {
                let target = 1u32 << g;
                let v = (0..k).fold(0u32, |v, q| {
                    let cx = symplectic_product(target, vecs[k + q], k) as u32;
                    let cz = symplectic_product(target, vecs[q], k) as u32;
                    v | cx << q | cz << (k + q)
                });
                vector_to_pauli(v, k, false)
            })
            .collect();
        let trial = Self::from_images(k, unsigned.clone()).expect("inverse symplectic matrix");
        let roundtrip = self.compose(&trial);
        let images = unsigned
            .into_iter()
            .zip(roundtrip.images())
            .map(|(p, r)| if r.phase_power() == 2 { p.negated() } else { p })
            .collect();
        Self::from_images(k, images).expect("inverse tableau is valid")
    }

    /// Recover the tableau of a dense Clifford unitary by conjugating each generator.
    pub fn from_unitary(u: &CMatrix) -> Result<Self> {
        let k = crate::qmat::qubit_count(u.dim())
            .ok_or_else(|| Error::Dimension(format!("dim {} is not a power of two", u.dim())))?;
        if !(1..=MAX_CLIFFORD_ARITY).contains(&k) {
            return Err(Error::InvalidParameter(format!("clifford arity {k} outside 1..={MAX_CLIFFORD_ARITY}")));
        }
        let ud = u.adjoint();
        let generators = (0..k)
            .map(|q| PauliString::single(k, q, Pauli::X))
            .chain((0..k).map(|q| PauliString::single(k, q, Pauli::Z)));
        let images = generators
            .map(|g| identify_pauli(&(&(u * &g.matrix()) * &ud), k))
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(k, images)
    }

    pub fn symplectic_rows(&self) -> Vec<Vec<u8>> {
        self.images
            .iter()
            .map(|p| {
                let v = pauli_to_vector(p);
                (0..2 * self.k).map(|b| (v >> b & 1) as u8).collect()
            })
            .collect()
    }

    pub fn phase_bits(&self) -> Vec<u8> {
        self.images.iter().map(|p| (p.phase_power() == 2) as u8).collect()
    }

    pub fn from_symplectic(k: usize, rows: &[Vec<u8>], phases: &[u8]) -> Result<Self> {
        if rows.len() != 2 * k || phases.len() != 2 * k || rows.iter().any(|r| r.len() != 2 * k) {
            return Err(Error::Dimension(format!("tableau for k={k} must be {0}x{0} with {0} phase bits", 2 * k)));
        }
        let images = rows
            .iter()
            .zip(phases)
            .map(|(row, &ph)| {
                if row.iter().chain(std::iter::once(&ph)).any(|&b| b > 1) {
                    return Err(Error::InvalidParameter("tableau entries must be 0 or 1".into()));
                }
                let v = row.iter().enumerate().fold(0u32, |v, (b, &bit)| v | (bit as u32) << b);
                Ok(vector_to_pauli(v, k, ph == 1))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_images(k, images)
    }
}

/// Identify a dense matrix as `±P` for a Hermitian Pauli string `P`.
fn identify_pauli(m: &CMatrix, k: usize) -> Result<PauliString> {
    let not_pauli = || Error::InvalidParameter("matrix does not conjugate generators to Paulis".into());
    let d = m.dim();
    let x_index = (0..d).find(|&r| m[(r, 0)].norm() > 0.5).ok_or_else(not_pauli)?;
    // undo the bit flips; what is left is a signed diagonal ±i^a Z^z
    let diag: Vec<C64> = (0..d).map(|j| m[(j ^ x_index, j)]).collect();
    let letters: Vec<Pauli> = (0..k)
        .map(|q| {
            let bit = 1usize << (k - 1 - q);
            let x = x_index & bit != 0;
            // Z and Y both flip sign between |0> and |1> on their column
            let z = (diag[bit] / diag[0]).re < 0.0;
            Pauli::from_bits(x, z)
        })
        .collect();
    let p = PauliString::new(letters);
    let overlap = p.trace_with(m) / d as f64;
    if (overlap.norm() - 1.0).abs() > 1e-8 || overlap.im.abs() > 1e-8 {
        return Err(not_pauli());
    }
    let signed = if overlap.re < 0.0 { p.negated() } else { p };
    if signed.matrix().max_abs_diff(m) > 1e-8 {
        return Err(not_pauli());
    }
    Ok(signed)
}

/// Dense unitary realizing the tableau, phase fixed so the first nonzero
/// entry of column 0 is real positive.
fn dense_from_images(k: usize, images: &[PauliString]) -> CMatrix {
    let d = 1usize << k;
    // |ψ0> = U|0…0> is the joint +1 eigenvector of the Z images.
    let mut psi0 = None;
    for m in 0..d {
        let mut v = vec![ZERO; d];
        v[m] = C64::new(1.0, 0.0);
        for q in 0..k {
            let pv = images[k + q].apply_to_vec(&v);
            for (a, b) in v.iter_mut().zip(pv) {
                *a = (*a + b) * 0.5;
            }
        }
        let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if norm2 > 0.5 / d as f64 {
            let norm = norm2.sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            psi0 = Some(v);
            break;
        }
    }
    let mut psi0 = psi0.expect("stabilizer group of a valid tableau has a +1 eigenvector");
    let lead = psi0.iter().find(|z| z.norm() > 1e-9).copied().expect("nonzero state");
    let phase = lead.conj() / lead.norm();
    psi0.iter_mut().for_each(|z| *z *= phase);

    let mut u = CMatrix::zeros(d);
    for col in 0..d {
        let mut v = psi0.clone();
        for q in 0..k {
            if col >> (k - 1 - q) & 1 == 1 {
                v = images[q].apply_to_vec(&v);
            }
        }
        for (row, z) in v.into_iter().enumerate() {
            u[(row, col)] = z;
        }
    }
    u
}

/// Uniform sample from the `k`-qubit Clifford group modulo global phase.
///
/// Generator images are drawn one symplectic pair at a time: a uniform nonzero
/// vector `a`, a uniform partner `b` with `⟨a, b⟩ = 1`, then recursion on the
/// symplectic complement of `span(a, b)`. Signs are independent fair bits.
pub fn sample_clifford<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Result<CliffordElement> {
    if !(1..=MAX_CLIFFORD_ARITY).contains(&k) {
        return Err(Error::InvalidParameter(format!("clifford arity {k} outside 1..={MAX_CLIFFORD_ARITY}")));
    }
    let mut basis: Vec<u32> = (0..2 * k).map(|b| 1u32 << b).collect();
    let mut x_vecs = Vec::with_capacity(k);
    let mut z_vecs = Vec::with_capacity(k);
    for _ in 0..k {
        let mask = (1u64 << basis.len()) - 1;
        let combine = |c: u64| {
            basis
                .iter()
                .enumerate()
                .filter(|(i, _)| c >> i & 1 == 1)
                .fold(0u32, |acc, (_, &v)| acc ^ v)
        };
        let a = loop {
            let c = rng.random::<u64>() & mask;
            if c != 0 {
                break combine(c);
            }
        };
        let b = loop {
            let cand = combine(rng.random::<u64>() & mask);
            if symplectic_product(a, cand, k) {
                break cand;
            }
        };
        let projected: Vec<u32> = basis
            .iter()
            .map(|&v| {
                let mut w = v;
                if symplectic_product(v, b, k) {
                    w ^= a;
                }
                if symplectic_product(v, a, k) {
                    w ^= b;
                }
                w
            })
            .collect();
        basis = independent_subset(&projected);
        x_vecs.push(a);
        z_vecs.push(b);
    }
    let images = x_vecs
        .into_iter()
        .chain(z_vecs)
        .map(|v| vector_to_pauli(v, k, rng.random::<bool>()))
        .collect();
    CliffordElement::from_images(k, images)
}

/// Dense unitary of a tableau (cached at construction).
pub fn clifford_to_unitary(c: &CliffordElement) -> CMatrix {
    c.unitary().clone()
}

#[derive(Serialize, Deserialize)]
struct CliffordJson {
    k: usize,
    symplectic: Vec<Vec<u8>>,
    phases: Vec<u8>,
}

impl Serialize for CliffordElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CliffordJson { k: self.k, symplectic: self.symplectic_rows(), phases: self.phase_bits() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CliffordElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = CliffordJson::deserialize(d)?;
        CliffordElement::from_symplectic(j.k, &j.symplectic, &j.phases).map_err(serde::de::Error::custom)
    }
}

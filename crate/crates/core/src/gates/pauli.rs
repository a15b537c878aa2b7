use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{CMatrix, C64, I, ONE, ZERO};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn matrix(self) -> CMatrix {
        match self {
            Pauli::I => CMatrix::identity(2),
            Pauli::X => CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap(),
            Pauli::Y => CMatrix::from_rows(&[vec![ZERO, -I], vec![I, ZERO]]).unwrap(),
            Pauli::Z => CMatrix::real_diag(&[1.0, -1.0]),
        }
    }

    /// Symplectic `(x, z)` bits; `Y` is `(1, 1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// `self · other = i^k · p`, returned as `(k, p)`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (0, p),
            (a, b) if a == b => (0, I),
            (X, Y) => (1, Z),
            (Y, Z) => (1, X),
            (Z, X) => (1, Y),
            (Y, X) => (3, Z),
            (Z, Y) => (3, X),
            (X, Z) => (3, Y),
            _ => unreachable!(),
        }
    }
}

/// Tensor product of single-qubit Paulis times a phase `i^phase`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters, phase: 0 }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![Pauli::I; n])
    }

    /// `p` on `wire`, identity elsewhere.
    pub fn single(n: usize, wire: usize, p: Pauli) -> Self {
        Self::sparse(n, &[(wire, p)])
    }

    pub fn sparse(n: usize, ops: &[(usize, Pauli)]) -> Self {
        let mut letters = vec![Pauli::I; n];
        for &(w, p) in ops {
            letters[w] = p;
        }
        Self::new(letters)
    }

    /// Multiply by `i^k`.
    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = (self.phase + k) % 4;
        self
    }

    pub fn negated(self) -> Self {
        self.with_phase(2)
    }

    pub fn n(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Exponent `k` of the phase `i^k`.
    pub fn phase_power(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> C64 {
        [ONE, I, -ONE, -I][self.phase as usize]
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase % 2 == 0
    }

    /// Same letters, phase reset to `+1`.
    pub fn unsigned(&self) -> Self {
        Self::new(self.letters.clone())
    }

    pub fn matrix(&self) -> CMatrix {
        let m = crate::qmat::kron_all(self.letters.iter().map(|p| p.matrix()).collect::<Vec<_>>().iter());
        m.scale(self.phase())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n(), other.n(), "multiplying Pauli strings of different lengths");
        let mut phase = self.phase + other.phase;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (k, p) = a.mul(b);
                phase += k;
                p
            })
            .collect();
        Self { letters, phase: phase % 4 }
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        let anti = self
            .letters
            .iter()
            .zip(&other.letters)
            .filter(|(&a, &b)| a != Pauli::I && b != Pauli::I && a != b)
            .count();
        anti % 2 == 0
    }

    /// `[self, other] = κ q` with `q` Hermitian; `None` when they commute.
    ///
    /// For Hermitian inputs the commutator is anti-Hermitian, so `κ` is `2i` and
    /// the sign lives in `q`.
    pub fn commutator(&self, other: &Self) -> Option<(C64, PauliString)> {
        if self.commutes_with(other) {
            return None;
        }
        let prod = self.mul(other);
        // [A, B] = 2AB = 2 i^k P; pull out one factor of i so q keeps a real sign
        let q = Self { letters: prod.letters, phase: (prod.phase + 3) % 4 };
        Some((C64::new(0.0, 2.0), q))
    }

    /// `Pᵀ`: every `Y` contributes a sign.
    pub fn transpose(&self) -> Self {
        let ys = self.letters.iter().filter(|&&p| p == Pauli::Y).count() as u8;
        Self { letters: self.letters.clone(), phase: (self.phase + 2 * (ys % 2)) % 4 }
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Self { letters, phase: (self.phase + other.phase) % 4 }
    }

    /// Bit mask of X-type letters (`X` or `Y`) with qubit 0 as the most significant bit.
    pub(crate) fn x_index_mask(&self) -> usize {
        let n = self.n();
        self.letters
            .iter()
            .enumerate()
            .filter(|(_, p)| p.bits().0)
            .fold(0, |m, (q, _)| m | 1 << (n - 1 - q))
    }

    /// Coefficient `c` with `P|k⟩ = c |k ⊕ x⟩`.
    pub(crate) fn column_phase(&self, k: usize) -> C64 {
        let n = self.n();
        let mut power = self.phase as u32;
        for (q, &p) in self.letters.iter().enumerate() {
            let bit = (k >> (n - 1 - q)) & 1 == 1;
            match p {
                Pauli::Z if bit => power += 2,
                Pauli::Y => power += if bit { 3 } else { 1 },
                _ => {}
            }
        }
        [ONE, I, -ONE, -I][(power % 4) as usize]
    }

    /// `P v` in `O(2^n)`.
    pub fn apply_to_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), 1 << self.n(), "vector length does not match Pauli string");
        let x = self.x_index_mask();
        let mut out = vec![ZERO; v.len()];
        for (k, &a) in v.iter().enumerate() {
            out[k ^ x] = self.column_phase(k) * a;
        }
        out
    }

    /// `tr(P m)` in `O(2^n)`.
    pub fn trace_with(&self, m: &CMatrix) -> C64 {
        assert_eq!(m.dim(), 1 << self.n(), "matrix dim does not match Pauli string");
        let x = self.x_index_mask();
        (0..m.dim()).map(|k| self.column_phase(k) * m[(k, k ^ x)]).sum()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["", "i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for p in &self.letters {
            write!(f, "{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Accepts an optional `+`, `-`, `i`, `+i` or `-i` prefix followed by letters `IXYZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("-i") {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else {
            (0, s)
        };
        let letters = body
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::UnknownLabel(c.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if letters.is_empty() {
            return Err(Error::InvalidParameter(format!("empty Pauli string `{s}`")));
        }
        Ok(Self { letters, phase })
    }
}

impl Serialize for PauliString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Dense matrix of a Pauli string, phase included.
pub fn pauli_matrix(p: &PauliString) -> CMatrix {
    p.matrix()
}

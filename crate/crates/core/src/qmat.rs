//! Dense complex matrices and the quantum-information primitives built on them.
//!
//! Tensor ordering is big-endian throughout: in a product of subsystems the
//! first factor is the most significant digit of the flat index, so qubit 0 is
//! the leftmost character of a bitstring.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::ChoiMatrix;
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance on the largest entry of `m - m†`.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix in row-major dense storage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDump", into = "MatrixDump")]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_vec(dim: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    /// Build from nested rows; every row must have as many entries as there are rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::Dimension(format!("row of length {} in a {dim}-row matrix", row.len())));
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[C64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let values: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&values)
    }

    /// `|v><w|`
    pub fn outer(v: &[C64], w: &[C64]) -> Result<Self> {
        if v.len() != w.len() {
            return Err(Error::Dimension(format!("outer product of {} and {}", v.len(), w.len())));
        }
        Ok(Self::from_fn(v.len(), |i, j| v[i] * w[j].conj()))
    }

    /// Projector `|v><v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    fn check_same_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_same_dim(other)?;
        let d = self.dim;
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            let out_row = &mut out[i * d..(i + 1) * d];
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * d..(k + 1) * d];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(Self { dim: d, data: out })
    }

    /// `self · v`
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(Error::Dimension(format!("vector of length {} for dim {}", v.len(), self.dim)));
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z.conj()).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Result<C64> {
        self.check_same_dim(other)?;
        let d = self.dim;
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                acc += self.data[i * d + k] * other.data[k * d + i];
            }
        }
        Ok(acc)
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn scale_real(&self, c: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * c).collect() }
    }

    /// `self += c · other`
    pub fn add_scaled(&mut self, other: &Self, c: C64) -> Result<()> {
        self.check_same_dim(other)?;
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * c;
        }
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff on matrices of different dims");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        match eig_hermitian(&self.hermitize()) {
            Ok(e) => self.is_hermitian(tol.max(HERMITIAN_TOL)) && e.values.iter().all(|&l| l >= -tol),
            Err(_) => false,
        }
    }

    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self.matmul(&self.adjoint()).expect("square");
        prod.max_abs_diff(&Self::identity(self.dim))
    }

    /// `(m + m†) / 2`
    pub fn hermitize(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    pub(crate) fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.data)
    }

}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "adding matrices of different dims");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "subtracting matrices of different dims");
        CMatrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.dim, rhs.dim, "adding matrices of different dims");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        assert_eq!(self.dim, rhs.dim, "subtracting matrices of different dims");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("multiplying matrices of different dims")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

/// Flat row-major `[re, im]` pairs; the JSON form of a matrix.
#[derive(Serialize, Deserialize)]
struct MatrixDump {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl From<CMatrix> for MatrixDump {
    fn from(m: CMatrix) -> Self {
        Self { dim: m.dim, entries: m.data.iter().map(|z| [z.re, z.im]).collect() }
    }
}

impl TryFrom<MatrixDump> for CMatrix {
    type Error = Error;

    fn try_from(d: MatrixDump) -> Result<Self> {
        CMatrix::from_vec(d.dim, d.entries.into_iter().map(|[re, im]| C64::new(re, im)).collect())
    }
}

/// Number of qubits for a power-of-two dimension.
pub fn qubit_count(dim: usize) -> Option<usize> {
    dim.is_power_of_two().then(|| dim.trailing_zeros() as usize)
}

/// Kronecker product; `a` is the more significant factor.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (da, db) = (a.dim, b.dim);
    let d = da * db;
    let mut out = vec![ZERO; d * d];
    for i in 0..da {
        for j in 0..da {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..db {
                let row = (i * db + k) * d + j * db;
                for l in 0..db {
                    out[row + l] = x * b[(k, l)];
                }
            }
        }
    }
    CMatrix { dim: d, data: out }
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    factors
        .into_iter()
        .fold(CMatrix::identity(1), |acc, f| kron(&acc, f))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Apply a `2^k`-dim operator to the listed qubits of an `n`-qubit state in place.
///
/// `wires[0]` is the most significant qubit of `u`'s index.
pub fn apply_on_wires(state: &mut [C64], n: usize, wires: &[usize], u: &CMatrix) -> Result<()> {
    let k = wires.len();
    if state.len() != 1 << n || u.dim() != 1 << k || wires.iter().any(|&w| w >= n) {
        return Err(Error::Dimension(format!(
            "{k}-qubit operator of dim {} on wires {wires:?} of a {n}-qubit state",
            u.dim()
        )));
    }
    let shifts: Vec<usize> = wires.iter().map(|&w| n - 1 - w).collect();
    let mask: usize = shifts.iter().map(|s| 1 << s).sum();
    let offsets: Vec<usize> = (0..1 << k)
        .map(|a| (0..k).filter(|&j| a >> (k - 1 - j) & 1 == 1).map(|j| 1 << shifts[j]).sum())
        .collect();
    let mut local = vec![ZERO; 1 << k];
    for base in 0..state.len() {
        if base & mask != 0 {
            continue;
        }
        for (a, &off) in offsets.iter().enumerate() {
            local[a] = state[base | off];
        }
        for (a, &off) in offsets.iter().enumerate() {
            state[base | off] = u.row(a).iter().zip(&local).map(|(x, y)| x * y).sum();
        }
    }
    Ok(())
}

/// Trace out every subsystem not listed in `keep`.
///
/// `dims` lists subsystem dimensions, most significant first. The kept
/// subsystems appear in the result in their original relative order.
pub fn partial_trace(m: &CMatrix, keep: &[usize], dims: &[usize]) -> Result<CMatrix> {
    let total: usize = dims.iter().product();
    if total != m.dim {
        return Err(Error::Dimension(format!(
            "subsystem dims {dims:?} multiply to {total}, matrix dim is {}",
            m.dim
        )));
    }
    let mut kept = vec![false; dims.len()];
    for &k in keep {
        if k >= dims.len() {
            return Err(Error::Dimension(format!("subsystem {k} out of range for {} subsystems", dims.len())));
        }
        kept[k] = true;
    }
    let keep_dim: usize = dims.iter().zip(&kept).filter(|(_, &k)| k).map(|(d, _)| d).product();
    let traced_dim = total / keep_dim;

    // full[t][a] = flat index whose kept part is `a` and traced part is `t`
    let mut full = vec![vec![0usize; keep_dim]; traced_dim];
    for idx in 0..total {
        let (mut rem, mut a, mut t) = (idx, 0usize, 0usize);
        let (mut a_stride, mut t_stride) = (1usize, 1usize);
        for (s, &d) in dims.iter().enumerate().rev() {
            let digit = rem % d;
            rem /= d;
            if kept[s] {
                a += digit * a_stride;
                a_stride *= d;
            } else {
                t += digit * t_stride;
                t_stride *= d;
            }
        }
        full[t][a] = idx;
    }

    let mut out = CMatrix::zeros(keep_dim);
    for rows in &full {
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in rows.iter().enumerate() {
                out[(a, b)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: CMatrix,
}

impl EigenDecomposition {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V diag(f(λ)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let d = self.vectors.dim();
        let weights: Vec<C64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(d, |i, j| {
            (0..d)
                .map(|k| self.vectors[(i, k)] * weights[k] * self.vectors[(j, k)].conj())
                .sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.reconstruct_with(|l| C64::new(l, 0.0))
    }
}

pub fn eig_hermitian(m: &CMatrix) -> Result<EigenDecomposition> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NotHermitian(dev));
    }
    let eig = m.hermitize().to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(m.dim, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// `exp(-i h t)` for Hermitian `h`.
pub fn expm_i_hermitian(h: &CMatrix, t: f64) -> Result<CMatrix> {
    let eig = eig_hermitian(h)?;
    Ok(eig.reconstruct_with(|l| C64::from_polar(1.0, -l * t)))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMatrix) -> f64 {
    if m.is_hermitian(HERMITIAN_TOL) {
        let eig = eig_hermitian(m).expect("checked Hermitian");
        eig.values.iter().map(|l| l.abs()).sum()
    } else {
        m.to_nalgebra().singular_values().iter().sum()
    }
}

fn check_pair(l1: &ChoiMatrix, l2: &ChoiMatrix) -> Result<()> {
    if l1.n() != l2.n() {
        return Err(Error::Dimension(format!("{}-qubit vs {}-qubit Choi matrices", l1.n(), l2.n())));
    }
    if l1.is_normalized() || l2.is_normalized() {
        return Err(Error::Normalization("distances take unnormalized (trace 2^n) Choi matrices".into()));
    }
    Ok(())
}

/// Normalized trace distance `tr|Λ1 - Λ2| / 2^(n+1)`, in `[0, 1]` for valid Choi inputs.
pub fn trace_distance(l1: &ChoiMatrix, l2: &ChoiMatrix) -> Result<f64> {
    check_pair(l1, l2)?;
    let diff = l1.matrix() - l2.matrix();
    Ok(trace_norm(&diff) / (1u64 << (l1.n() + 1)) as f64)
}

/// `‖Λ1 - Λ2‖_F / 2^n`
pub fn frobenius_distance(l1: &ChoiMatrix, l2: &ChoiMatrix) -> Result<f64> {
    check_pair(l1, l2)?;
    let diff = l1.matrix() - l2.matrix();
    Ok(diff.frobenius_norm() / (1u64 << l1.n()) as f64)
}

/// `tr[Λ²] / 4^n`; equals 1 exactly for rank-1 Choi matrices of trace 2^n.
pub fn purity(l: &ChoiMatrix) -> f64 {
    let m = l.unnormalized_matrix();
    let tr = m.trace_product(&m).expect("square").re;
    tr / 4f64.powi(l.n() as i32)
}

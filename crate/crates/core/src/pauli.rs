//! Pauli algebra, vectorization, and dense superoperators.
//!
//! Vectorization is row-major throughout the crate: entry `(i, j)` of an
//! operator on `L` qubits lives at index `i * 2^L + j`. With this convention
//! the channel `rho -> G rho G^dagger` has superoperator `G (x) G*`, and a
//! one-sided product `A rho B` has superoperator `A (x) B^T`.
//!
//! Site `s` of an `L`-qubit register is the `s`-th tensor factor from the
//! left, i.e. bit `L - 1 - s` of a computational basis index.

use std::fmt;

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{self, LocalKernel};
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Number of lattice sites of a brickwall chain.
///
/// Periodic brickwall layers pair all sites, so the count must be even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct QubitCount(usize);

impl QubitCount {
    pub fn new(n: usize) -> Result<Self> {
        if n >= 2 && n % 2 == 0 {
            Ok(Self(n))
        } else {
            Err(Error::QubitCount(n))
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Hilbert space dimension `2^L`.
    pub fn dim(self) -> usize {
        1 << self.0
    }
}

impl TryFrom<usize> for QubitCount {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<QubitCount> for usize {
    fn from(n: QubitCount) -> usize {
        n.0
    }
}

impl fmt::Display for QubitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Boundary handling for [`embed_local`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    Open,
    Periodic,
}

/// Row-major complex matrix on `n` qubits (`2^n x 2^n`).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    n: usize,
    data: Vec<C64>,
}

impl DenseOperator {
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self> {
        let d = 1usize << n;
        if data.len() != d * d {
            return Err(Error::Shape(format!(
                "operator on {n} qubits needs {} entries, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let d = 1usize << n;
        let data = (0..d * d).map(|k| f(k / d, k % d)).collect();
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        let d = 1usize << n;
        Self { n, data: vec![ZERO; d * d] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let d = self.dim();
        self.data[i * d + j] = v;
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == ZERO {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        Self { n: self.n, data: out }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn conj(&self) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x.conj()).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self.get(j, i))
    }

    /// Kronecker product `self (x) other`; `self` occupies the leading sites.
    pub fn kron(&self, other: &Self) -> Self {
        let db = other.dim();
        Self::from_fn(self.n + other.n, |i, j| self.get(i / db, j / db) * other.get(i % db, j % db))
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.adjoint().matmul(self).max_abs_diff(&Self::identity(self.n)) <= tol
    }
}

/// `rho` flattened row-major to a vector of length `4^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorizedOperator {
    n: usize,
    data: Vec<C64>,
}

impl VectorizedOperator {
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != 1usize << (2 * n) {
            return Err(Error::Shape(format!(
                "vectorized operator on {n} qubits needs {} entries, got {}",
                1usize << (2 * n),
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_operator(op: &DenseOperator) -> Self {
        Self { n: op.n, data: op.data.clone() }
    }

    pub fn to_operator(&self) -> DenseOperator {
        DenseOperator { n: self.n, data: self.data.clone() }
    }

    /// `|1>>`, the vectorized identity.
    pub fn identity(n: usize) -> Self {
        Self::from_operator(&DenseOperator::identity(n))
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    /// `<<1|v>>`, i.e. the trace of the underlying operator.
    pub fn trace(&self) -> C64 {
        let d = 1usize << self.n;
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `<<self|other>> = sum conj(self) * other = tr(self^dagger other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum()
    }

    /// `tr(op * X)` for the operator `X` represented by `self`.
    pub fn expectation(&self, op: &DenseOperator) -> C64 {
        let d = 1usize << self.n;
        let mut acc = ZERO;
        for i in 0..d {
            for j in 0..d {
                acc += op.data[i * d + j] * self.data[j * d + i];
            }
        }
        acc
    }

    /// Left-multiplies by `local` embedded on `sites` (superoperator action).
    pub fn apply_local(&mut self, local: &LocalKernel, sites: &[usize]) {
        let pos = kernel::superop_bit_positions(sites, self.n);
        local.apply_rows(&mut self.data, 1, 2 * self.n as u32, &pos);
    }
}

/// Row-major `4^n x 4^n` superoperator acting on vectorized operators.
#[derive(Clone, PartialEq)]
pub struct DenseSuperoperator {
    n: usize,
    data: Vec<C64>,
}

impl fmt::Debug for DenseSuperoperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DenseSuperoperator").field("n", &self.n).finish_non_exhaustive()
    }
}

impl DenseSuperoperator {
    pub fn from_vec(n: usize, data: Vec<C64>) -> Result<Self> {
        let d = 1usize << (2 * n);
        if data.len() != d * d {
            return Err(Error::Shape(format!(
                "superoperator on {n} qubits needs {} entries, got {}",
                d * d,
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> C64) -> Self {
        let d = 1usize << (2 * n);
        let data = (0..d * d).map(|k| f(k / d, k % d)).collect();
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << (2 * n);
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            data[i * d + i] = ONE;
        }
        Self { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        let d = 1usize << (2 * n);
        Self { n, data: vec![ZERO; d * d] }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Side length `4^n`.
    pub fn dim(&self) -> usize {
        1 << (2 * self.n)
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

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.dim() + c]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        Self { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect() }
    }

    /// Dense product `self * other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let d = self.dim();
        let mut out = vec![ZERO; d * d];
        matmul(
            MatMut::from_row_major_slice_mut(&mut out, d, d),
            Accum::Replace,
            MatRef::from_row_major_slice(&self.data, d, d),
            MatRef::from_row_major_slice(&other.data, d, d),
            ONE,
            Par::Seq,
        );
        Self { n: self.n, data: out }
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim();
        Self::from_fn(self.n, |i, j| self.data[j * d + i].conj())
    }

    pub fn apply(&self, v: &VectorizedOperator) -> VectorizedOperator {
        assert_eq!(self.n, v.n);
        let d = self.dim();
        let data = (0..d)
            .map(|i| self.data[i * d..(i + 1) * d].iter().zip(&v.data).map(|(a, b)| a * b).sum())
            .collect();
        VectorizedOperator { n: self.n, data }
    }

    /// In-place `self <- L * self` with `local` embedded on `sites`.
    pub fn apply_local_left(&mut self, local: &LocalKernel, sites: &[usize]) {
        let pos = kernel::superop_bit_positions(sites, self.n);
        let d = self.dim();
        local.apply_rows(&mut self.data, d, 2 * self.n as u32, &pos);
    }

    /// Dense local kernel form, for applying this superoperator inside a larger register.
    pub fn to_kernel(&self) -> LocalKernel {
        LocalKernel::new(self.dim(), self.data.clone())
    }

    /// `<<1| S`, the dual of the vectorized identity pulled back through `S`.
    pub fn trace_functional(&self) -> Vec<C64> {
        let d = self.dim();
        let h = 1usize << self.n;
        let mut out = vec![ZERO; d];
        for i in 0..h {
            let row = &self.data[(i * h + i) * d..(i * h + i + 1) * d];
            for (o, x) in out.iter_mut().zip(row) {
                *o += x;
            }
        }
        out
    }

    /// Whether `<<1|S = <<1|` holds componentwise to `tol`.
    pub fn is_trace_preserving(&self, tol: f64) -> bool {
        let target = VectorizedOperator::identity(self.n);
        self.trace_functional().iter().zip(&target.data).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Squared Frobenius norm.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs_diff(&self.data, &other.data)
    }
}

/// Normalized Choi state of a superoperator.
#[derive(Clone, Debug)]
pub struct ChoiState {
    n: usize,
    data: Vec<C64>,
    norm: f64,
}

impl ChoiState {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// The normalized state `psi = chi / N`, row-major with row index
    /// `(out_row, in_row)` and column index `(out_col, in_col)`.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Normalization `N = tr(chi)`.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    pub fn dim(&self) -> usize {
        1 << (2 * self.n)
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                worst = worst.max((self.data[i * d + j] - self.data[j * d + i].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        hermitian_eigenvalues(&self.data, self.dim())
    }

    /// Undo the reshape, recovering the superoperator.
    pub fn to_superop(&self) -> DenseSuperoperator {
        let data = reshuffle(&self.data, self.n).into_iter().map(|x| x * self.norm).collect();
        DenseSuperoperator { n: self.n, data }
    }
}

/// Eigenvalues of a Hermitian row-major matrix (only the lower triangle is read).
pub(crate) fn hermitian_eigenvalues(data: &[C64], d: usize) -> Result<Vec<f64>> {
    let m = MatRef::from_row_major_slice(data, d, d);
    let mut ev: Vec<f64> = m
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    ev.sort_by(|a, b| a.total_cmp(b));
    Ok(ev)
}

fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// `S^{(a,c),(b,d)} -> X^{(a,b),(c,d)}`; an involution.
fn reshuffle(data: &[C64], n: usize) -> Vec<C64> {
    let h = 1usize << n;
    let d = h * h;
    let mut out = vec![ZERO; d * d];
    for a in 0..h {
        for c in 0..h {
            let row = a * h + c;
            for b in 0..h {
                for dd in 0..h {
                    let col = b * h + dd;
                    out[(a * h + b) * d + (c * h + dd)] = data[row * d + col];
                }
            }
        }
    }
    out
}

/// Single-qubit Pauli matrix: 0 -> identity, 1 -> X, 2 -> Y, 3 -> Z.
pub fn pauli_matrix(alpha: usize) -> Result<DenseOperator> {
    let i = C64::new(0.0, 1.0);
    let data = match alpha {
        0 => vec![ONE, ZERO, ZERO, ONE],
        1 => vec![ZERO, ONE, ONE, ZERO],
        2 => vec![ZERO, -i, i, ZERO],
        3 => vec![ONE, ZERO, ZERO, -ONE],
        _ => return Err(Error::PauliIndex(alpha)),
    };
    DenseOperator::from_vec(1, data)
}

/// Sites covered by a `width`-site operator starting at `site`.
pub fn placement_sites(site: usize, width: usize, n: usize, boundary: Boundary) -> Result<Vec<usize>> {
    let in_range = match boundary {
        Boundary::Open => site + width <= n,
        Boundary::Periodic => site < n && width <= n,
    };
    if !in_range {
        return Err(Error::SiteOutOfRange { site, width, n });
    }
    Ok((0..width).map(|q| (site + q) % n).collect())
}

/// Tensor-embeds `op` on the given (distinct) sites of an `n`-qubit register.
pub fn embed_on_sites(op: &DenseOperator, sites: &[usize], n: usize) -> Result<DenseOperator> {
    if sites.len() != op.n {
        return Err(Error::Shape(format!("{}-qubit operator placed on {} sites", op.n, sites.len())));
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: bad, width: op.n, n });
    }
    let pos = kernel::operator_bit_positions(sites, n);
    let offsets = kernel::local_offsets(&pos);
    let mask: usize = offsets.last().copied().unwrap_or(0);
    let dl = op.dim();
    // Map every global index to (local index, rest bits).
    let local_of = |g: usize| -> usize {
        pos.iter().enumerate().filter(|(_, &p)| g >> p & 1 == 1).map(|(b, _)| 1usize << b).sum()
    };
    Ok(DenseOperator::from_fn(n, |r, c| {
        if r & !mask != c & !mask {
            return ZERO;
        }
        let (lr, lc) = (local_of(r), local_of(c));
        op.data[lr * dl + lc]
    }))
}

/// Tensor-embeds a `k`-qubit operator starting at `site`, identities elsewhere.
pub fn embed_local(op: &DenseOperator, site: usize, n: usize, boundary: Boundary) -> Result<DenseOperator> {
    let sites = placement_sites(site, op.n, n, boundary)?;
    embed_on_sites(op, &sites, n)
}

/// Embeds a `k`-site superoperator on the given sites of an `n`-qubit register.
pub fn embed_superop(local: &DenseSuperoperator, sites: &[usize], n: usize) -> Result<DenseSuperoperator> {
    if sites.len() != local.n {
        return Err(Error::Shape(format!("{}-site superoperator placed on {} sites", local.n, sites.len())));
    }
    if let Some(&bad) = sites.iter().find(|&&s| s >= n) {
        return Err(Error::SiteOutOfRange { site: bad, width: local.n, n });
    }
    let mut out = DenseSuperoperator::identity(n);
    out.apply_local_left(&local.to_kernel(), sites);
    Ok(out)
}

/// `G (x) G*`, the superoperator of `rho -> G rho G^dagger`.
pub fn unitary_superop(g: &DenseOperator) -> DenseSuperoperator {
    let d = g.dim();
    DenseSuperoperator::from_fn(g.n, |r, c| {
        let (i, j) = (r / d, r % d);
        let (k, l) = (c / d, c % d);
        g.get(i, k) * g.get(j, l).conj()
    })
}

/// `sum_l K_l (x) K_l*`.
pub fn kraus_superop(kraus_ops: &[DenseOperator]) -> Result<DenseSuperoperator> {
    let first = kraus_ops.first().ok_or_else(|| Error::Shape("empty Kraus set".into()))?;
    if let Some(bad) = kraus_ops.iter().find(|k| k.n != first.n) {
        return Err(Error::Shape(format!(
            "Kraus operators on {} and {} qubits",
            first.n, bad.n
        )));
    }
    let mut acc = DenseSuperoperator::zeros(first.n);
    for k in kraus_ops {
        let s = unitary_superop(k);
        for (a, b) in acc.data.iter_mut().zip(&s.data) {
            *a += b;
        }
    }
    Ok(acc)
}

/// Reshapes a superoperator into its normalized Choi state.
///
/// `chi^{(a,b),(c,d)} = S^{(a,c),(b,d)}` and `psi = chi / N` with `N = tr chi`
/// (`2^L` for trace-preserving maps).
pub fn choi_reshape(s: &DenseSuperoperator) -> Result<ChoiState> {
    let d = s.dim();
    if s.data.len() != d * d {
        return Err(Error::Shape("superoperator is not square".into()));
    }
    let chi = reshuffle(&s.data, s.n);
    let norm: C64 = (0..d).map(|i| chi[i * d + i]).sum();
    if norm.norm() < 1e-300 {
        return Err(Error::InvalidArgument("Choi matrix has zero trace".into()));
    }
    let norm_re = norm.re;
    let data = chi.into_iter().map(|x| x / norm_re).collect();
    Ok(ChoiState { n: s.n, data, norm: norm_re })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_unitary, seeded as rng};

    #[test]
    fn pauli_basics() {
        assert_eq!(pauli_matrix(0).unwrap(), DenseOperator::identity(1));
        let z = pauli_matrix(3).unwrap();
        assert_eq!(z.data(), &[ONE, ZERO, ZERO, -ONE]);
        let y = pauli_matrix(2).unwrap();
        assert!(y.matmul(&y).max_abs_diff(&DenseOperator::identity(1)) < 1e-15);
        assert!(matches!(pauli_matrix(4), Err(Error::PauliIndex(4))));
        for a in 0..4 {
            let p = pauli_matrix(a).unwrap();
            assert!(p.is_unitary(1e-15));
            assert_eq!(p.adjoint(), p);
        }
    }

    #[test]
    fn embed_sigma_z_first_site() {
        let z = pauli_matrix(3).unwrap();
        let e = embed_local(&z, 0, 2, Boundary::Open).unwrap();
        assert_eq!(e, z.kron(&DenseOperator::identity(1)));
        let id = embed_local(&DenseOperator::identity(2), 1, 4, Boundary::Open).unwrap();
        assert_eq!(id, DenseOperator::identity(4));
        assert!(embed_local(&DenseOperator::identity(2), 3, 4, Boundary::Open).is_err());
        assert!(embed_local(&z, 5, 4, Boundary::Periodic).is_err());
    }

    fn cyclic_shift(n: usize) -> DenseOperator {
        // Maps site s to site s + 1 (mod n): |b_0 ... b_{n-1}> -> |b_{n-1} b_0 ...>.
        DenseOperator::from_fn(n, |r, c| {
            let bits: Vec<usize> = (0..n).map(|s| c >> (n - 1 - s) & 1).collect();
            let mut target = 0;
            for s in 0..n {
                target |= bits[s] << (n - 1 - (s + 1) % n);
            }
            if r == target {
                ONE
            } else {
                ZERO
            }
        })
    }

    #[test]
    fn wrapped_embedding_matches_permutation_oracle() {
        let mut r = rng(3);
        for n in [2usize, 3, 4] {
            let g = random_unitary(2, &mut r);
            let at0 = embed_local(&g, 0, n, Boundary::Periodic).unwrap();
            let wrapped = embed_local(&g, n - 1, n, Boundary::Periodic).unwrap();
            // Shift site 0 -> n - 1 by applying the forward shift n - 1 times.
            let mut p = DenseOperator::identity(n);
            let t = cyclic_shift(n);
            for _ in 0..n - 1 {
                p = t.matmul(&p);
            }
            let oracle = p.matmul(&at0).matmul(&p.adjoint());
            assert!(wrapped.max_abs_diff(&oracle) < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn sigma_x_superop_is_index_flip() {
        let x = pauli_matrix(1).unwrap();
        let s = unitary_superop(&x);
        // brute force: (i, j) -> (1 - i, 1 - j)
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        let expect = if k == 1 - i && l == 1 - j { ONE } else { ZERO };
                        assert_eq!(s.get(i * 2 + j, k * 2 + l), expect);
                    }
                }
            }
        }
        assert_eq!(unitary_superop(&DenseOperator::identity(2)), DenseSuperoperator::identity(2));
    }

    #[test]
    fn unitary_superop_is_trace_preserving_and_multiplicative() {
        let mut r = rng(11);
        for _ in 0..5 {
            let g = random_unitary(2, &mut r);
            let h = random_unitary(2, &mut r);
            let sg = unitary_superop(&g);
            assert!(sg.is_trace_preserving(1e-12));
            let lhs = sg.matmul(&unitary_superop(&h));
            let rhs = unitary_superop(&g.matmul(&h));
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn superop_matches_conjugation() {
        let mut r = rng(5);
        let g = random_unitary(2, &mut r);
        let rho = random_density(2, &mut r);
        let out = unitary_superop(&g).apply(&VectorizedOperator::from_operator(&rho));
        let direct = g.matmul(&rho).matmul(&g.adjoint());
        assert!(out.to_operator().max_abs_diff(&direct) < 1e-14);
    }

    #[test]
    fn kraus_examples() {
        let id = kraus_superop(&[DenseOperator::identity(1)]).unwrap();
        assert_eq!(id, DenseSuperoperator::identity(1));

        let p0 = DenseOperator::from_vec(1, vec![ONE, ZERO, ZERO, ZERO]).unwrap();
        let p1 = DenseOperator::from_vec(1, vec![ZERO, ZERO, ZERO, ONE]).unwrap();
        let deph = kraus_superop(&[p0, p1]).unwrap();
        let rho = DenseOperator::from_vec(
            1,
            vec![C64::new(0.3, 0.0), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.7, 0.0)],
        )
        .unwrap();
        let out = deph.apply(&VectorizedOperator::from_operator(&rho)).to_operator();
        assert_eq!(out.get(0, 1), ZERO);
        assert_eq!(out.get(1, 0), ZERO);
        assert_eq!(out.get(0, 0), rho.get(0, 0));

        let x = pauli_matrix(1).unwrap();
        for p in [0.0, 0.1, 0.5, 0.9, 1.0] {
            let ks = [
                DenseOperator::identity(1).scale(C64::new((1.0f64 - p).sqrt(), 0.0)),
                x.scale(C64::new(f64::sqrt(p), 0.0)),
            ];
            let s = kraus_superop(&ks).unwrap();
            assert!(s.is_trace_preserving(1e-12), "p = {p}");
        }
        assert!(kraus_superop(&[DenseOperator::identity(1), DenseOperator::identity(2)]).is_err());
        assert!(kraus_superop(&[]).is_err());
    }

    #[test]
    fn choi_of_identity_is_bell_state() {
        let c = choi_reshape(&DenseSuperoperator::identity(1)).unwrap();
        assert!((c.norm() - 2.0).abs() < 1e-15);
        let ev = c.eigenvalues().unwrap();
        assert!((ev[3] - 1.0).abs() < 1e-12);
        assert!(ev[..3].iter().all(|e| e.abs() < 1e-12));
        // |Phi+><Phi+| entries: 1/2 on (00,00), (00,11), (11,00), (11,11)
        assert!((c.data()[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((c.data()[3] - C64::new(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn choi_of_complete_depolarizer_is_maximally_mixed() {
        for n in 1..=2 {
            let h = 1usize << n;
            // rho -> tr(rho) 1 / 2^n
            let s = DenseSuperoperator::from_fn(n, |r, c| {
                let (i, j) = (r / h, r % h);
                let (k, l) = (c / h, c % h);
                if i == j && k == l {
                    C64::new(1.0 / h as f64, 0.0)
                } else {
                    ZERO
                }
            });
            let c = choi_reshape(&s).unwrap();
            let d = c.dim();
            for i in 0..d {
                for j in 0..d {
                    let expect = if i == j { 1.0 / d as f64 } else { 0.0 };
                    assert!((c.data()[i * d + j] - C64::new(expect, 0.0)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn choi_of_random_channel_is_a_state() {
        let mut r = rng(21);
        for _ in 0..5 {
            // Random Kraus set from a random isometry: K_l = <l|_env W.
            let w = random_unitary(3, &mut r);
            let ks: Vec<DenseOperator> = (0..2)
                .map(|l| DenseOperator::from_fn(2, |i, j| w.get(l * 4 + i, j)))
                .collect();
            let s = kraus_superop(&ks).unwrap();
            assert!(s.is_trace_preserving(1e-12));
            let c = choi_reshape(&s).unwrap();
            assert!((c.norm() - 4.0).abs() < 1e-12);
            assert!(c.hermiticity_defect() < 1e-12);
            assert!((c.trace() - ONE).norm() < 1e-12);
            assert!(c.eigenvalues().unwrap()[0] > -1e-12);
            // involution
            assert!(c.to_superop().max_abs_diff(&s) < 1e-14);
        }
    }

    #[test]
    fn vectorized_expectation_identity() {
        let mut r = rng(8);
        let n = 2;
        let o = random_hermitian(n, &mut r);
        let rho = random_density(n, &mut r);
        let lhs = VectorizedOperator::identity(n).inner(&VectorizedOperator::from_operator(&o.matmul(&rho)));
        let rhs = o.matmul(&rho).trace();
        assert!((lhs - rhs).norm() < 1e-12);
        // (O (x) 1)|rho>> = |O rho>>
        let one_sided = DenseSuperoperator::from_fn(n, |r_, c_| {
            let h = 1 << n;
            let (i, j, k, l) = (r_ / h, r_ % h, c_ / h, c_ % h);
            if j == l {
                o.get(i, k)
            } else {
                ZERO
            }
        });
        let v = one_sided.apply(&VectorizedOperator::from_operator(&rho));
        assert!((v.trace() - rhs).norm() < 1e-12);
        assert!((VectorizedOperator::from_operator(&rho).expectation(&o) - rhs).norm() < 1e-12);
    }

    #[test]
    fn local_kernel_matches_dense_embedding() {
        let mut r = rng(2);
        let n = 3;
        let g = random_unitary(2, &mut r);
        let local = LocalKernel::new(16, unitary_superop(&g).into_data());
        for sites in [[0usize, 1], [1, 2], [2, 0]] {
            let full = unitary_superop(&embed_on_sites(&g, &sites, n).unwrap());
            let rho = random_density(n, &mut r);
            let mut v = VectorizedOperator::from_operator(&rho);
            v.apply_local(&local, &sites);
            let expect = full.apply(&VectorizedOperator::from_operator(&rho));
            assert!(max_abs_diff(v.data(), expect.data()) < 1e-13);
            let mut m = DenseSuperoperator::identity(n);
            m.apply_local_left(&local, &sites);
            assert!(m.max_abs_diff(&full) < 1e-13);
        }
    }
}

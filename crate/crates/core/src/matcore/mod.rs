//! Dense complex-matrix kernel.
//!
//! Multipartite layouts are row-major: the leftmost subsystem is the most
//! significant digit of a basis index, so `|a b c>` sits at
//! `a * dB * dC + b * dC + c`.

mod io;
mod linalg;

pub use io::{from_csv, from_json, to_csv, to_json};
pub use linalg::{herm_eig, herm_eigvals, numeric_rank, spectrum_entropy, von_neumann_entropy, HermEig};

pub(crate) use linalg::hermitian_eigenvalues;

use nalgebra::{DMatrix, DVector};
use std::fmt;

use crate::error::{Error, Result};

pub use nalgebra::Complex;
pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Maximum elementwise |h - h^dag| accepted for a density matrix.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Maximum |tr(rho) - 1| accepted for a density matrix.
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue accepted for a density matrix.
pub const PSD_TOL: f64 = -1e-9;
/// Maximum |norm - 1| accepted for a pure state.
pub const NORM_TOL: f64 = 1e-12;
/// Default eigenvalue cutoff for entropies and ranks.
pub const EIG_CUTOFF: f64 = 1e-10;
/// Largest supported total dimension.
pub const MAX_SIDE: usize = 256;

pub fn c64(re: f64, im: f64) -> C64 {
    Complex::new(re, im)
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidDims("no subsystems".into()));
    }
    if let Some(d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::InvalidDims(format!("subsystem dimension {d} < 2 in {dims:?}")));
    }
    let side = dims.iter().product::<usize>();
    if side > MAX_SIDE {
        return Err(Error::InvalidDims(format!("total dimension {side} exceeds {MAX_SIDE}")));
    }
    Ok(side)
}

/// Row-major strides of a subsystem layout.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Largest elementwise |m - m^dag|.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Bit-level and numeric deviations of a candidate density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Deviations {
    pub hermitian: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

/// A Hermitian, unit-trace, positive-semidefinite matrix over a list of
/// subsystems.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: CMatrix,
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityMatrix").field("dims", &self.dims).field("data", &self.data).finish()
    }
}

impl DensityMatrix {
    /// Validates and wraps `data`. States are rejected, never projected, when
    /// they miss an invariant.
    pub fn new(dims: Vec<usize>, data: CMatrix) -> Result<Self> {
        let side = check_dims(&dims)?;
        if data.nrows() != side || data.ncols() != side {
            return Err(Error::InvalidDims(format!(
                "matrix is {}x{} but dims {:?} require side {side}",
                data.nrows(),
                data.ncols(),
                dims
            )));
        }
        let rho = DensityMatrix { dims, data };
        rho.validate()?;
        Ok(rho)
    }

    /// Skips validation. Callers guarantee the invariants by construction.
    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, data: CMatrix) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), data.nrows());
        DensityMatrix { dims, data }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = &psi.amp;
        DensityMatrix::from_parts_unchecked(psi.dims.clone(), v * v.adjoint())
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let side = check_dims(&dims)?;
        let data = CMatrix::identity(side, side) * c64(1.0 / side as f64, 0.0);
        Ok(DensityMatrix::from_parts_unchecked(dims, data))
    }

    pub fn deviations(&self) -> Deviations {
        let tr = self.data.trace();
        let trace = (tr - c64(1.0, 0.0)).norm();
        let hermitian = hermitian_deviation(&self.data);
        let min_eigenvalue = hermitian_eigenvalues(&self.data).first().copied().unwrap_or(0.0);
        Deviations { hermitian, trace, min_eigenvalue }
    }

    pub fn validate(&self) -> Result<()> {
        let hermitian = hermitian_deviation(&self.data);
        if hermitian > HERMITIAN_TOL {
            return Err(Error::NotHermitian(hermitian));
        }
        let trace = (self.data.trace() - c64(1.0, 0.0)).norm();
        if trace > TRACE_TOL {
            return Err(Error::InvalidTrace(trace));
        }
        let min = hermitian_eigenvalues(&self.data).first().copied().unwrap_or(0.0);
        if min < PSD_TOL {
            return Err(Error::NotPositive(min));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &CMatrix {
        &self.data
    }

    pub fn into_data(self) -> CMatrix {
        self.data
    }

    pub fn side(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.data)
    }

    /// A state is pure when its largest eigenvalue is within `tol` of one.
    pub fn is_pure(&self, tol: f64) -> bool {
        self.eigenvalues().last().is_some_and(|&l| (l - 1.0).abs() <= tol)
    }

    /// Tensor product; the subsystem list is concatenated.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        Ok(DensityMatrix::from_parts_unchecked(dims, kron(&self.data, &other.data)))
    }

    /// Mixture `w * self + (1 - w) * other` of states with equal layouts.
    pub fn mix(&self, w: f64, other: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dims != other.dims {
            return Err(Error::InvalidDims(format!("cannot mix {:?} with {:?}", self.dims, other.dims)));
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::OutOfRange(format!("mixing weight {w} outside [0, 1]")));
        }
        let data = &self.data * c64(w, 0.0) + &other.data * c64(1.0 - w, 0.0);
        Ok(DensityMatrix::from_parts_unchecked(self.dims.clone(), data))
    }

    /// Conjugation by a unitary: `U rho U^dag`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.nrows() != self.side() || u.ncols() != self.side() {
            return Err(Error::InvalidDims(format!("unitary side {} vs state side {}", u.nrows(), self.side())));
        }
        Ok(DensityMatrix::from_parts_unchecked(self.dims.clone(), u * &self.data * u.adjoint()))
    }
}

/// A normalized state vector over a list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amp: CVector,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amp: CVector) -> Result<Self> {
        let side = check_dims(&dims)?;
        if amp.len() != side {
            return Err(Error::InvalidDims(format!("vector length {} but dims {:?}", amp.len(), dims)));
        }
        let dev = (amp.norm() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized(dev));
        }
        Ok(PureState { dims, amp })
    }

    /// Rescales `amp` to unit norm before validating.
    pub fn normalized(dims: Vec<usize>, amp: CVector) -> Result<Self> {
        let norm = amp.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized(f64::INFINITY));
        }
        PureState::new(dims, amp.unscale(norm))
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amp
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }
}

/// A split of the subsystem indices into two disjoint, covering blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Bipartition {
    pub fn new(mut left: Vec<usize>, mut right: Vec<usize>, num_subsystems: usize) -> Result<Self> {
        left.sort_unstable();
        right.sort_unstable();
        if left.is_empty() || right.is_empty() {
            return Err(Error::InvalidBipartition("both blocks must be nonempty".into()));
        }
        let mut all: Vec<usize> = left.iter().chain(&right).copied().collect();
        all.sort_unstable();
        if all != (0..num_subsystems).collect::<Vec<_>>() {
            return Err(Error::InvalidBipartition(format!(
                "{left:?} | {right:?} does not cover 0..{num_subsystems} exactly once"
            )));
        }
        Ok(Bipartition { left, right })
    }

    /// `rest | {k}`: the cut that isolates subsystem `k` on the right.
    pub fn isolate(k: usize, num_subsystems: usize) -> Result<Self> {
        let left = (0..num_subsystems).filter(|&i| i != k).collect();
        Bipartition::new(left, vec![k], num_subsystems)
    }

    /// The three tripartite cuts in the order AB|C, BC|A, AC|B.
    pub fn tripartite_cuts() -> [Bipartition; 3] {
        [2, 0, 1].map(|k| Bipartition::isolate(k, 3).expect("valid tripartite cut"))
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    pub fn swapped(&self) -> Bipartition {
        Bipartition { left: self.right.clone(), right: self.left.clone() }
    }

    pub fn num_subsystems(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn check(&self, dims: &[usize]) -> Result<()> {
        if self.num_subsystems() != dims.len() {
            return Err(Error::InvalidBipartition(format!("{self} does not fit {} subsystems", dims.len())));
        }
        Ok(())
    }

    /// Total dimensions of the (left, right) blocks.
    pub fn block_dims(&self, dims: &[usize]) -> (usize, usize) {
        let prod = |b: &[usize]| b.iter().map(|&k| dims[k]).product::<usize>();
        (prod(&self.left), prod(&self.right))
    }
}

impl fmt::Display for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = |b: &[usize]| b.iter().map(|&k| party_name(k)).collect::<String>();
        write!(f, "{}|{}", name(&self.left), name(&self.right))
    }
}

fn party_name(k: usize) -> char {
    (b'A' + (k % 26) as u8) as char
}

/// Kronecker product with row-major block ordering.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Reduced state on the subsystems in `keep` (kept in their original order).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    if keep.is_empty() {
        return Err(Error::EmptyKeep);
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if let Some(&k) = keep.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::InvalidDims(format!("subsystem {k} not in {dims:?}")));
    }
    if keep.len() == dims.len() {
        return Ok(rho.clone());
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| dims[k]).collect();
    let kept_side: usize = kept_dims.iter().product();
    let traced_side: usize = traced_dims.iter().product();

    let full = strides(dims);
    let ks = strides(&kept_dims);
    let ts = strides(&traced_dims);
    // buckets[t] lists (full index, kept index) pairs sharing traced index t.
    let mut buckets: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_side); traced_side];
    for i in 0..rho.side() {
        let digit = |k: usize| (i / full[k]) % dims[k];
        let ki: usize = keep.iter().zip(&ks).map(|(&k, &s)| digit(k) * s).sum();
        let ti: usize = traced.iter().zip(&ts).map(|(&k, &s)| digit(k) * s).sum();
        buckets[ti].push((i, ki));
    }
    let data = rho.data();
    let mut out = CMatrix::zeros(kept_side, kept_side);
    for bucket in &buckets {
        for &(i, ki) in bucket {
            for &(j, kj) in bucket {
                out[(ki, kj)] += data[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts_unchecked(kept_dims, out))
}

/// Transposes the digits of `subsystems` in a raw matrix laid out over `dims`.
/// Pure index permutation: applying it twice restores the input bit for bit.
pub fn transpose_subsystems(m: &CMatrix, dims: &[usize], subsystems: &[usize]) -> CMatrix {
    let side = m.nrows();
    let st = strides(dims);
    // part[i]: contribution of the transposed digits to index i.
    let part: Vec<usize> =
        (0..side).map(|i| subsystems.iter().map(|&k| ((i / st[k]) % dims[k]) * st[k]).sum()).collect();
    let mut out = CMatrix::zeros(side, side);
    for c in 0..side {
        for r in 0..side {
            let r2 = r - part[r] + part[c];
            let c2 = c - part[c] + part[r];
            out[(r2, c2)] = m[(r, c)];
        }
    }
    out
}

/// Partial transpose over the `right` block of `part`.
pub fn partial_transpose(rho: &DensityMatrix, part: &Bipartition) -> Result<CMatrix> {
    part.check(rho.dims())?;
    Ok(transpose_subsystems(rho.data(), rho.dims(), part.right()))
}

//! Seeded random states.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::matcore::{c64, check_dims, CMatrix, CVector, DensityMatrix, PureState, C64};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Haar-random pure state.
pub fn haar_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Result<PureState> {
    let n = check_dims(dims)?;
    let amp = CVector::from_fn(n, |_, _| gaussian(rng));
    PureState::normalized(dims.to_vec(), amp)
}

/// `G G^dag / tr` with `G` an `n x rank` complex Ginibre matrix.
pub fn wishart_mixed<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> Result<DensityMatrix> {
    let n = check_dims(dims)?;
    let g = CMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let w = &g * g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(dims.to_vec(), w.unscale(tr))
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

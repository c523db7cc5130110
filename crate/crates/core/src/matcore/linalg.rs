use nalgebra::SymmetricEigen;

use super::{hermitian_deviation, CMatrix, DensityMatrix, EIG_CUTOFF};
use crate::error::{Error, Result};

/// Inputs further than this from Hermitian are rejected by [`herm_eig`].
const HERM_INPUT_TOL: f64 = 1e-8;

/// Eigendecomposition `h V = V diag(values)` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

fn symmetrized(h: &CMatrix) -> CMatrix {
    (h + h.adjoint()).unscale(2.0)
}

fn check_hermitian(h: &CMatrix) -> Result<()> {
    if h.nrows() != h.ncols() {
        return Err(Error::InvalidDims(format!("matrix is {}x{}", h.nrows(), h.ncols())));
    }
    let dev = hermitian_deviation(h);
    if dev > HERM_INPUT_TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(())
}

pub fn herm_eig(h: &CMatrix) -> Result<HermEig> {
    check_hermitian(h)?;
    let eig = SymmetricEigen::new(symmetrized(h));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermEig { values, vectors })
}

pub fn herm_eigvals(h: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(h)?;
    Ok(hermitian_eigenvalues(h))
}

/// Ascending eigenvalues of a matrix already known to be Hermitian.
pub(crate) fn hermitian_eigenvalues(h: &CMatrix) -> Vec<f64> {
    let mut ev: Vec<f64> = symmetrized(h).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Shannon entropy in bits of a spectrum, ignoring entries at or below the cutoff.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values.iter().filter(|&&l| l > EIG_CUTOFF).map(|&l| -l * l.log2()).sum()
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// Number of eigenvalues strictly above `tol`.
pub fn numeric_rank(rho: &DensityMatrix, tol: f64) -> Result<usize> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::OutOfRange(format!("rank tolerance {tol} must be positive")));
    }
    Ok(rho.eigenvalues().iter().filter(|&&l| l > tol).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, CVector, PureState};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        (&g + g.adjoint()).unscale(2.0)
    }

    #[test]
    fn diagonal_and_pauli_spectra() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(3., 0.), c64(1., 0.), c64(2., 0.)]));
        assert_eq!(herm_eig(&d).unwrap().values, vec![1.0, 2.0, 3.0]);
        let x = CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)]);
        let ev = herm_eigvals(&x).unwrap();
        assert_abs_diff_eq!(ev[0], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(0., 0.), c64(0., 0.)]);
        assert!(matches!(herm_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1, 2, 5, 16, 33, 64] {
            let h = random_hermitian(n, &mut rng);
            let HermEig { values, vectors } = herm_eig(&h).unwrap();
            assert!(values.windows(2).all(|w| w[0] <= w[1]));
            let d = CMatrix::from_diagonal(&CVector::from_iterator(n, values.iter().map(|&l| c64(l, 0.))));
            let scale = h.norm().max(1.0);
            let residual = (&h * &vectors - &vectors * d).norm();
            assert!(residual <= 1e-9 * scale, "n={n}: hV - V diag residual {residual:e}");
            let unit = (vectors.adjoint() * &vectors - CMatrix::identity(n, n)).norm();
            assert!(unit <= 1e-9, "n={n}: V^dag V - 1 residual {unit:e}");
        }
    }

    #[test]
    fn entropy_values() {
        let psi = PureState::new(vec![2], CVector::from_vec(vec![c64(0.6, 0.), c64(0., 0.8)])).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&psi.projector()), 0.0, epsilon = 1e-12);
        let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        assert_abs_diff_eq!(von_neumann_entropy(&mixed), 1.0, epsilon = 1e-14);
        // closed form for the {1/3, 2/3} spectrum
        let oracle = -(1.0f64 / 3.0) * (1.0f64 / 3.0).log2() - (2.0f64 / 3.0) * (2.0f64 / 3.0).log2();
        assert_abs_diff_eq!(spectrum_entropy(&[1.0 / 3.0, 2.0 / 3.0]), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 0.918_295_834_054_489_6, epsilon = 1e-15);
    }

    #[test]
    fn rank_needs_positive_tol() {
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert_eq!(numeric_rank(&mixed, 1e-10).unwrap(), 4);
        assert!(numeric_rank(&mixed, 0.0).is_err());
    }
}

//! Negativity, squashed entanglement of pure states, and PPT verdicts.

use std::fmt;
use std::str::FromStr;

use nalgebra::SVD;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    hermitian_eigenvalues, partial_trace, partial_transpose, strides, transpose_subsystems, von_neumann_entropy,
    Bipartition, CMatrix, DensityMatrix, PureState,
};

/// Partial-transpose eigenvalues below `-NEG_CUTOFF` count towards negativity.
pub const NEG_CUTOFF: f64 = 1e-12;
/// A state counts as pure when its largest eigenvalue is this close to 1.
pub const PURITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Negativity,
    Squashed,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 2] = [MeasureKind::Negativity, MeasureKind::Squashed];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Negativity => "negativity",
            MeasureKind::Squashed => "squashed",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "negativity" | "n" => Ok(MeasureKind::Negativity),
            "squashed" | "sq" => Ok(MeasureKind::Squashed),
            _ => Err(Error::Parse(format!("unknown measure `{s}`"))),
        }
    }
}

fn require_subsystems(rho: &DensityMatrix, n: usize) -> Result<()> {
    if rho.num_subsystems() != n {
        return Err(Error::SubsystemCount { expected: n, found: rho.num_subsystems() });
    }
    Ok(())
}

/// Ascending spectrum of the partial transpose over `part.right()`.
pub fn pt_spectrum(rho: &DensityMatrix, part: &Bipartition) -> Result<Vec<f64>> {
    Ok(hermitian_eigenvalues(&partial_transpose(rho, part)?))
}

pub fn min_pt_eigenvalue(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    Ok(pt_spectrum(rho, part)?[0])
}

/// `N_{X|Y} = sum of |lambda|` over partial-transpose eigenvalues below `-NEG_CUTOFF`.
pub fn negativity(rho: &DensityMatrix, part: &Bipartition) -> Result<f64> {
    Ok(pt_spectrum(rho, part)?.iter().filter(|&&l| l < -NEG_CUTOFF).map(|l| -l).sum())
}

/// Amplitudes reshaped to a `left x right` matrix.
fn coefficient_matrix(psi: &PureState, part: &Bipartition) -> Result<CMatrix> {
    let dims = psi.dims();
    part.check(dims)?;
    let (dl, dr) = part.block_dims(dims);
    let st = strides(dims);
    let block_index = |i: usize, which: &[usize]| which.iter().fold(0, |acc, &k| acc * dims[k] + (i / st[k]) % dims[k]);
    let mut m = CMatrix::zeros(dl, dr);
    for (i, &a) in psi.amplitudes().iter().enumerate() {
        m[(block_index(i, part.left()), block_index(i, part.right()))] = a;
    }
    Ok(m)
}

/// Schmidt coefficients (singular values of the coefficient matrix), descending.
pub fn schmidt_coefficients(psi: &PureState, part: &Bipartition) -> Result<Vec<f64>> {
    let svd = SVD::new(coefficient_matrix(psi, part)?, false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

/// Negativity of a pure state from its Schmidt coefficients: `sum_{i<j} s_i s_j`.
pub fn pure_negativity_schmidt(psi: &PureState, part: &Bipartition) -> Result<f64> {
    let s = schmidt_coefficients(psi, part)?;
    let (sum, sq): (f64, f64) = s.iter().fold((0.0, 0.0), |(a, b), &x| (a + x, b + x * x));
    Ok(((sum * sum - sq) / 2.0).max(0.0))
}

/// `N_{AB|C} + N_{BC|A} + N_{AC|B}`.
pub fn tripartite_negativity(rho: &DensityMatrix) -> Result<f64> {
    require_subsystems(rho, 3)?;
    Bipartition::tripartite_cuts().iter().map(|cut| negativity(rho, cut)).sum()
}

/// `(S_A + S_B + S_C) / 2` for a pure tripartite state.
pub fn squashed_pure_tripartite(rho: &DensityMatrix) -> Result<f64> {
    require_subsystems(rho, 3)?;
    if !rho.is_pure(PURITY_TOL) {
        return Err(Error::SquashedOnMixed);
    }
    let mut total = 0.0;
    for k in 0..3 {
        total += von_neumann_entropy(&partial_trace(rho, &[k])?);
    }
    Ok(total / 2.0)
}

/// Value of the measure on the tripartite state before classicalization.
pub fn global_value(kind: MeasureKind, rho: &DensityMatrix) -> Result<f64> {
    match kind {
        MeasureKind::Negativity => tripartite_negativity(rho),
        MeasureKind::Squashed => squashed_pure_tripartite(rho),
    }
}

/// Value assigned to a bipartite post-measurement state `sigma` on AB.
///
/// Negativity: `2 N_{A|B}(sigma)`, the tripartite negativity of `sigma (x) |0><0|`.
/// Squashed: the surrogate `(S_A + S_B) / 2`.
pub fn post_value(kind: MeasureKind, sigma: &DensityMatrix) -> Result<f64> {
    require_subsystems(sigma, 2)?;
    match kind {
        MeasureKind::Negativity => Ok(2.0 * negativity(sigma, &Bipartition::isolate(1, 2)?)?),
        MeasureKind::Squashed => {
            let sa = von_neumann_entropy(&partial_trace(sigma, &[0])?);
            let sb = von_neumann_entropy(&partial_trace(sigma, &[1])?);
            Ok((sa + sb) / 2.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeparabilityVerdict {
    Separable,
    Entangled,
    PptInconclusive,
}

impl fmt::Display for SeparabilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SeparabilityVerdict::Separable => "separable",
            SeparabilityVerdict::Entangled => "entangled",
            SeparabilityVerdict::PptInconclusive => "ppt_inconclusive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PptVerdict {
    pub verdict: SeparabilityVerdict,
    pub min_eigenvalue: f64,
}

/// PPT test across `part`. PPT is decisive only for 2x2 and 2x3 blocks.
pub fn ppt_verdict(rho: &DensityMatrix, part: &Bipartition, tol: f64) -> Result<PptVerdict> {
    let min_eigenvalue = min_pt_eigenvalue(rho, part)?;
    let (dl, dr) = part.block_dims(rho.dims());
    let verdict = if min_eigenvalue < -tol {
        SeparabilityVerdict::Entangled
    } else if dl * dr <= 6 {
        SeparabilityVerdict::Separable
    } else {
        SeparabilityVerdict::PptInconclusive
    };
    Ok(PptVerdict { verdict, min_eigenvalue })
}

/// Sufficient separability test for a qubit against anything: a state equal
/// to its partial transpose on the qubit side is separable.
pub fn transpose_invariant_qubit(rho: &DensityMatrix, part: &Bipartition, tol: f64) -> Result<bool> {
    part.check(rho.dims())?;
    let dims = rho.dims();
    let side = [part.left(), part.right()].into_iter().find(|s| s.len() == 1 && dims[s[0]] == 2);
    Ok(match side {
        Some(s) => (transpose_subsystems(rho.data(), dims, s) - rho.data()).camax() <= tol,
        None => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{c64, kron, CVector};
    use crate::states::{ghz, max_entangled, random, w_state};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cut(k: usize, n: usize) -> Bipartition {
        Bipartition::isolate(k, n).unwrap()
    }

    #[test]
    fn bell_and_ghz_values() {
        let bell = max_entangled(2).unwrap().projector();
        assert_abs_diff_eq!(negativity(&bell, &cut(1, 2)).unwrap(), 0.5, epsilon = 1e-14);
        let g = ghz(2).unwrap().projector();
        assert_abs_diff_eq!(tripartite_negativity(&g).unwrap(), 1.5, epsilon = 1e-13);
        assert_abs_diff_eq!(squashed_pure_tripartite(&g).unwrap(), 1.5, epsilon = 1e-13);
    }

    #[test]
    fn w_closed_forms() {
        let w = w_state().projector();
        // each cut of W has Schmidt coefficients sqrt(1/3), sqrt(2/3)
        let n_cut = (2.0f64).sqrt() / 3.0;
        assert_abs_diff_eq!(tripartite_negativity(&w).unwrap(), 3.0 * n_cut, epsilon = 1e-13);
        let h = -(1.0f64 / 3.0) * (1.0f64 / 3.0).log2() - (2.0f64 / 3.0) * (2.0f64 / 3.0).log2();
        assert_abs_diff_eq!(squashed_pure_tripartite(&w).unwrap(), 1.5 * h, epsilon = 1e-13);
    }

    #[test]
    fn squashed_rejects_mixed() {
        let mixed = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        assert!(matches!(squashed_pure_tripartite(&mixed), Err(Error::SquashedOnMixed)));
        assert_eq!(Error::SquashedOnMixed.to_string(), "squashed global value undefined for mixed states");
    }

    #[test]
    fn subsystem_count_checked() {
        let bell = max_entangled(2).unwrap().projector();
        assert!(matches!(tripartite_negativity(&bell), Err(Error::SubsystemCount { .. })));
        let g = ghz(2).unwrap().projector();
        assert!(matches!(post_value(MeasureKind::Negativity, &g), Err(Error::SubsystemCount { .. })));
    }

    #[test]
    fn ppt_verdicts() {
        let bell = max_entangled(2).unwrap().projector();
        assert_eq!(ppt_verdict(&bell, &cut(1, 2), 1e-10).unwrap().verdict, SeparabilityVerdict::Entangled);
        let flat = DensityMatrix::maximally_mixed(vec![2, 3]).unwrap();
        assert_eq!(ppt_verdict(&flat, &cut(1, 2), 1e-10).unwrap().verdict, SeparabilityVerdict::Separable);
        let flat = DensityMatrix::maximally_mixed(vec![3, 3]).unwrap();
        assert_eq!(ppt_verdict(&flat, &cut(1, 2), 1e-10).unwrap().verdict, SeparabilityVerdict::PptInconclusive);
    }

    #[test]
    fn transpose_invariance_certificate() {
        let flat = DensityMatrix::maximally_mixed(vec![4, 2]).unwrap();
        assert!(transpose_invariant_qubit(&flat, &cut(1, 2), 1e-12).unwrap());
        let y = CMatrix::from_row_slice(2, 2, &[c64(0.5, 0.), c64(0., -0.5), c64(0., 0.5), c64(0.5, 0.)]);
        let rho = DensityMatrix::new(vec![3, 2], kron(&CMatrix::identity(3, 3).unscale(3.0), &y)).unwrap();
        assert!(!transpose_invariant_qubit(&rho, &cut(1, 2), 1e-12).unwrap());
        let flat = DensityMatrix::maximally_mixed(vec![3, 3]).unwrap();
        assert!(!transpose_invariant_qubit(&flat, &cut(1, 2), 1e-12).unwrap());
    }

    #[test]
    fn parse_measure() {
        assert_eq!("negativity".parse::<MeasureKind>().unwrap(), MeasureKind::Negativity);
        assert_eq!("squashed".parse::<MeasureKind>().unwrap(), MeasureKind::Squashed);
        assert!("relent".parse::<MeasureKind>().is_err());
        assert_eq!(serde_json::to_string(&MeasureKind::Squashed).unwrap(), "\"squashed\"");
    }

    fn bipartite_dims() -> impl Strategy<Value = (usize, usize)> {
        (2usize..=4, 2usize..=4)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn pure_negativity_matches_spectrum(seed in any::<u64>(), (da, db) in bipartite_dims()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random::haar_pure(&[da, db], &mut rng).unwrap();
            let part = cut(1, 2);
            let a = pure_negativity_schmidt(&psi, &part).unwrap();
            let b = negativity(&psi.projector(), &part).unwrap();
            prop_assert!((a - b).abs() <= 1e-10, "{a} vs {b}");
        }

        #[test]
        fn negativity_bounded_by_dimension(seed in any::<u64>(), (da, db) in bipartite_dims()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rho = random::wishart_mixed(&[da, db], 1 + (seed % 3) as usize, &mut rng).unwrap();
            let n = negativity(&rho, &cut(1, 2)).unwrap();
            prop_assert!(n >= 0.0);
            prop_assert!(n <= (da.min(db) as f64 - 1.0) / 2.0 + 1e-10);
        }

        #[test]
        fn negativity_is_convex(seed in any::<u64>(), w in 0.0f64..=1.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random::wishart_mixed(&[2, 3], 2, &mut rng).unwrap();
            let b = random::wishart_mixed(&[2, 3], 2, &mut rng).unwrap();
            let part = cut(1, 2);
            let mix = negativity(&a.mix(w, &b).unwrap(), &part).unwrap();
            let bound = w * negativity(&a, &part).unwrap() + (1.0 - w) * negativity(&b, &part).unwrap();
            prop_assert!(mix <= bound + 1e-10);
        }

        #[test]
        fn invariant_under_local_unitaries(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let psi = random::haar_pure(&[2, 2, 3], &mut rng).unwrap();
            let rho = psi.projector();
            let u = kron(&kron(&random::haar_unitary(2, &mut rng), &random::haar_unitary(2, &mut rng)), &random::haar_unitary(3, &mut rng));
            let moved = rho.conjugate(&u).unwrap();
            for kind in MeasureKind::ALL {
                let a = global_value(kind, &rho).unwrap();
                let b = global_value(kind, &moved).unwrap();
                prop_assert!((a - b).abs() <= 1e-10, "{kind}: {a} vs {b}");
            }
        }

        #[test]
        fn post_value_is_flagged_tripartite_negativity(seed in any::<u64>(), (da, db) in bipartite_dims()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigma = random::wishart_mixed(&[da, db], 2, &mut rng).unwrap();
            let mut flag = CVector::zeros(2);
            flag[0] = c64(1.0, 0.0);
            let zero = PureState::new(vec![2], flag).unwrap().projector();
            let extended = sigma.tensor(&zero).unwrap();
            let a = post_value(MeasureKind::Negativity, &sigma).unwrap();
            let b = tripartite_negativity(&extended).unwrap();
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }
}

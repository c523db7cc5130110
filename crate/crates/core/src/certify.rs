//! Certification: complete-loss condition, zero-discord fixed points, rank audits.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::classicalize::{direction_grid, Blocks, GridResolution, MeasurementDirection};
use crate::error::{Error, Result};
use crate::matcore::{c64, herm_eig, kron, numeric_rank, partial_trace, Bipartition, CMatrix, DensityMatrix};
use crate::measures::{min_pt_eigenvalue, ppt_verdict, transpose_invariant_qubit, SeparabilityVerdict};

/// Default tolerance for a PPT witness to count as negative.
pub const PPT_TOL: f64 = 1e-10;
/// Default eigenvalue threshold for numeric ranks.
pub const RANK_TOL: f64 = 1e-8;
/// `rho_C` eigenvalues closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Off-diagonal C blocks (and commutators) below this count as zero.
pub const BLOCK_TOL: f64 = 1e-10;
/// A candidate basis is accepted when it fixes the state to this accuracy.
pub const FIXED_POINT_TOL: f64 = 1e-10;
const ORTHONORMAL_TOL: f64 = 1e-12;

/// Outcome of the grid check that every `sigma_x = <x|rho|x> / p_x` is PPT.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Condition1 {
    /// Finite sample certificate: every evaluated direction passed.
    Pass {
        directions: usize,
        skipped: usize,
        worst_min_eigenvalue: f64,
        certificate: String,
    },
    Fail {
        /// Lowest grid index with an NPT `sigma_x`.
        direction: MeasurementDirection,
        witness: f64,
        /// Direction with the most negative witness.
        strongest_direction: MeasurementDirection,
        strongest_witness: f64,
        failing_directions: usize,
    },
    NotApplicable {
        reason: String,
    },
}

impl Condition1 {
    pub fn passed(&self) -> bool {
        matches!(self, Condition1::Pass { .. })
    }
}

fn require_tripartite(rho: &DensityMatrix) -> Result<()> {
    if rho.num_subsystems() != 3 {
        return Err(Error::SubsystemCount { expected: 3, found: rho.num_subsystems() });
    }
    Ok(())
}

/// Checks PPT of `sigma_x` for every grid direction `|x><x|` on C.
///
/// A, B must be qubits so that PPT decides separability.
pub fn condition1_check(rho: &DensityMatrix, grid: GridResolution, tol: f64) -> Result<Condition1> {
    require_tripartite(rho)?;
    let dims = rho.dims();
    if dims[0] != 2 || dims[1] != 2 {
        return Err(Error::PptNotDecisive(format!("A and B must be qubits, got dims {dims:?}")));
    }
    let blocks = Blocks::new(rho)?;
    let dirs = direction_grid(dims[2], grid)?;
    let cut = Bipartition::isolate(1, 2)?;
    let witnesses: Vec<Option<f64>> = dirs
        .par_iter()
        .map(|dir| {
            let [o, _] = blocks.measure(dir)?;
            o.post.map(|sigma| min_pt_eigenvalue(&sigma, &cut)).transpose()
        })
        .collect::<Result<_>>()?;

    let skipped = witnesses.iter().filter(|w| w.is_none()).count();
    let failing: Vec<usize> = (0..dirs.len()).filter(|&i| witnesses[i].is_some_and(|w| w < -tol)).collect();
    if let Some(&first) = failing.first() {
        let strongest =
            failing
                .iter()
                .copied()
                .fold(first, |b, i| if witnesses[i].unwrap() < witnesses[b].unwrap() { i } else { b });
        return Ok(Condition1::Fail {
            direction: dirs[first],
            witness: witnesses[first].unwrap(),
            strongest_direction: dirs[strongest],
            strongest_witness: witnesses[strongest].unwrap(),
            failing_directions: failing.len(),
        });
    }
    let worst_min_eigenvalue = witnesses.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let evaluated = dirs.len() - skipped;
    Ok(Condition1::Pass {
        directions: dirs.len(),
        skipped,
        worst_min_eigenvalue,
        certificate: format!("pass on {evaluated} directions (finite sample certificate)"),
    })
}

/// Zero-discord decision for the cut AB|C.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ZeroDiscord {
    Yes {
        /// Columns are the basis vectors on C.
        #[serde(serialize_with = "serialize_columns")]
        basis: CMatrix,
        residual: f64,
    },
    No,
    Undecided,
}

impl ZeroDiscord {
    pub fn is_yes(&self) -> bool {
        matches!(self, ZeroDiscord::Yes { .. })
    }
}

fn serialize_columns<S: Serializer>(m: &CMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    let cols: Vec<Vec<[f64; 2]>> = m.column_iter().map(|c| c.iter().map(|z| [z.re, z.im]).collect()).collect();
    cols.serialize(s)
}

/// C-side operators `(K_ab)_{cc'} = rho_{(a c),(b c')}` for all AB indices a, b.
fn c_operators(rho: &DensityMatrix) -> Vec<CMatrix> {
    let dc = rho.dims()[2];
    let n = rho.side() / dc;
    let data = rho.data();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            out.push(CMatrix::from_fn(dc, dc, |c, c2| data[(a * dc + c, b * dc + c2)]));
        }
    }
    out
}

/// Orthonormal basis (Frobenius inner product) of the span of `ops`.
fn span_basis(ops: &[CMatrix], dc: usize) -> Vec<CMatrix> {
    let stacked = CMatrix::from_fn(dc * dc, ops.len(), |r, k| ops[k][(r / dc, r % dc)]);
    let svd = stacked.svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let scale = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|&(_, &s)| s > BLOCK_TOL * scale.max(1.0))
        .map(|(k, _)| CMatrix::from_fn(dc, dc, |i, j| u[(i * dc + j, k)]))
        .collect()
}

/// Decides whether `rho` is quantum-classical on C.
///
/// Nondegenerate `rho_C`: its eigenbasis is the only candidate. Degenerate:
/// `rho` is quantum-classical exactly when the operators `K_ab` commute; a
/// common eigenbasis is taken from a generic Hermitian combination.
pub fn zero_discord_check(rho: &DensityMatrix) -> Result<ZeroDiscord> {
    require_tripartite(rho)?;
    let dc = rho.dims()[2];
    let rho_c = partial_trace(rho, &[2])?;
    let eig = herm_eig(rho_c.data())?;
    let nondegenerate = eig.values.windows(2).all(|w| w[1] - w[0] > DEGENERACY_GAP);
    if nondegenerate {
        let basis = eig.vectors;
        let off = off_diagonal_weight(rho, &basis);
        if off >= BLOCK_TOL {
            return Ok(ZeroDiscord::No);
        }
        let residual = fixed_point_check(rho, &basis)?;
        return Ok(ZeroDiscord::Yes { basis, residual });
    }

    let span = span_basis(&c_operators(rho), dc);
    for (i, a) in span.iter().enumerate() {
        for b in &span[i + 1..] {
            if (a * b - b * a).camax() >= BLOCK_TOL {
                return Ok(ZeroDiscord::No);
            }
        }
    }
    // fixed irrational weights keep the combination generic
    let mut h = CMatrix::zeros(dc, dc);
    for (k, op) in span.iter().enumerate() {
        let w = c64(
            ((k + 1) as f64 * 0.618_033_988_749_894_9).fract() + 0.1,
            ((k + 1) as f64 * 0.414_213_562_373_095).fract(),
        );
        let term = op * w;
        h += &term + term.adjoint();
    }
    let basis = herm_eig(&h)?.vectors;
    let residual = fixed_point_check(rho, &basis)?;
    Ok(if residual <= FIXED_POINT_TOL { ZeroDiscord::Yes { basis, residual } } else { ZeroDiscord::Undecided })
}

/// Largest entry of the off-diagonal C blocks `<i|rho|j>` (i != j) in `basis`.
fn off_diagonal_weight(rho: &DensityMatrix, basis: &CMatrix) -> f64 {
    let dc = rho.dims()[2];
    let n = rho.side() / dc;
    let u = kron(&CMatrix::identity(n, n), basis);
    let rotated = u.adjoint() * rho.data() * &u;
    let mut worst: f64 = 0.0;
    for r in 0..rho.side() {
        for c in 0..rho.side() {
            if r % dc != c % dc {
                worst = worst.max(rotated[(r, c)].norm());
            }
        }
    }
    worst
}

/// `max |Phi(rho) - rho|` for the dephasing `Phi(rho) = sum_k (1 (x) P_k) rho (1 (x) P_k)`
/// with `P_k` the projectors on the columns of `basis`.
pub fn fixed_point_check(rho: &DensityMatrix, basis: &CMatrix) -> Result<f64> {
    require_tripartite(rho)?;
    let dc = rho.dims()[2];
    if basis.nrows() != dc || basis.ncols() != dc {
        return Err(Error::InvalidDims(format!("basis must be {dc}x{dc}")));
    }
    let gram_err = (basis.adjoint() * basis - CMatrix::identity(dc, dc)).camax();
    if gram_err > ORTHONORMAL_TOL {
        return Err(Error::OutOfRange(format!("basis is not orthonormal (deviation {gram_err:e})")));
    }
    let n = rho.side() / dc;
    let id = CMatrix::identity(n, n);
    let mut dephased = CMatrix::zeros(rho.side(), rho.side());
    for k in 0..dc {
        let v = basis.column(k);
        let p = kron(&id, &(v * v.adjoint()));
        dephased += &p * rho.data() * &p;
    }
    Ok((dephased - rho.data()).camax())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ranks {
    pub global: usize,
    pub reduced_ab: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CutReport {
    pub cut: String,
    pub verdict: SeparabilityVerdict,
    /// Minimum eigenvalue of the partial transpose.
    pub witness: f64,
    /// `rho` equals its partial transpose on a qubit side of the cut.
    pub transpose_invariant: bool,
}

impl CutReport {
    pub fn certified_separable(&self) -> bool {
        self.verdict == SeparabilityVerdict::Separable || self.transpose_invariant
    }

    pub fn certified_entangled(&self) -> bool {
        self.verdict == SeparabilityVerdict::Entangled
    }
}

/// Result of a hypothesis-conclusion consistency audit.
#[derive(Debug, Clone, Serialize)]
pub struct Audit {
    pub name: String,
    /// Whether the hypotheses were certified for this state.
    pub applicable: bool,
    pub consistent: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankReport {
    pub ranks: Ranks,
    /// Cuts in the order AB|C, BC|A, AC|B.
    pub ppt: Vec<CutReport>,
    pub audits: Vec<Audit>,
}

impl RankReport {
    pub fn inconsistencies(&self) -> Vec<&Audit> {
        self.audits.iter().filter(|a| !a.consistent).collect()
    }

    pub fn cut(&self, label: &str) -> Option<&CutReport> {
        self.ppt.iter().find(|c| c.cut == label)
    }
}

pub fn cut_reports(rho: &DensityMatrix, tol: f64) -> Result<Vec<CutReport>> {
    require_tripartite(rho)?;
    Bipartition::tripartite_cuts()
        .iter()
        .map(|cut| {
            let v = ppt_verdict(rho, cut, tol)?;
            Ok(CutReport {
                cut: cut.to_string(),
                verdict: v.verdict,
                witness: v.min_eigenvalue,
                transpose_invariant: transpose_invariant_qubit(rho, cut, tol)?,
            })
        })
        .collect()
}

/// Ranks, per-cut PPT data, and the two rank audits for states that lose
/// all entanglement.
///
/// Audits report hypothesis/conclusion mismatches; they never fail the call.
pub fn rank_report(rho: &DensityMatrix, condition1: &Condition1, tol: f64) -> Result<RankReport> {
    require_tripartite(rho)?;
    let ranks = Ranks {
        global: numeric_rank(rho, RANK_TOL)?,
        reduced_ab: numeric_rank(&partial_trace(rho, &[0, 1])?, RANK_TOL)?,
    };
    let ppt = cut_reports(rho, tol)?;
    let (ab_c, bc_a, ac_b) = (&ppt[0], &ppt[1], &ppt[2]);
    let loses_all = condition1.passed();
    let a_and_b_entangled = bc_a.certified_entangled() && ac_b.certified_entangled();

    let sub = loses_all && a_and_b_entangled;
    let sub_ok = !sub || ranks.reduced_ab > 2;
    let whole = sub && ab_c.certified_separable();
    let whole_ok = !whole || ranks.global > 2;
    let audits = vec![
        Audit {
            name: "reduced_rank".into(),
            applicable: sub,
            consistent: sub_ok,
            detail: format!(
                "complete loss and entangled A|BC, B|AC require rank(rho_AB) > 2; rank(rho_AB) = {}",
                ranks.reduced_ab
            ),
        },
        Audit {
            name: "global_rank".into(),
            applicable: whole,
            consistent: whole_ok,
            detail: format!(
                "complete loss, entangled A|BC, B|AC and separable AB|C require rank(rho) > 2; rank(rho) = {}",
                ranks.global
            ),
        },
    ];
    Ok(RankReport { ranks, ppt, audits })
}

#[derive(Debug, Clone, Serialize)]
pub struct CertReport {
    pub condition1: Condition1,
    pub zero_discord: ZeroDiscord,
    pub ranks: Ranks,
    pub ppt: Vec<CutReport>,
    pub audits: Vec<Audit>,
}

/// Runs every check. Condition 1 is reported as not applicable when A or B
/// is not a qubit.
pub fn certify(rho: &DensityMatrix, grid: GridResolution, tol: f64) -> Result<CertReport> {
    let condition1 = match condition1_check(rho, grid, tol) {
        Ok(c) => c,
        Err(Error::PptNotDecisive(reason)) => Condition1::NotApplicable { reason },
        Err(e) => return Err(e),
    };
    let zero_discord = zero_discord_check(rho)?;
    let RankReport { ranks, ppt, audits } = rank_report(rho, &condition1, tol)?;
    Ok(CertReport { condition1, zero_discord, ranks, ppt, audits })
}

impl CertReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::PureState;
    use crate::states::{flower, ghz, random, tilde, upb};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn coarse() -> GridResolution {
        GridResolution::new(20, 8).unwrap()
    }

    #[test]
    fn condition1_examples() {
        assert!(condition1_check(&tilde(), coarse(), PPT_TOL).unwrap().passed());
        assert!(condition1_check(&upb(), coarse(), PPT_TOL).unwrap().passed());
        let g = ghz(2).unwrap().projector();
        match condition1_check(&g, GridResolution::new(300, 50).unwrap(), PPT_TOL).unwrap() {
            Condition1::Fail { direction, witness, strongest_direction, strongest_witness, .. } => {
                assert_eq!(direction.grid_index(), (1, 0));
                assert!(witness < 0.0);
                let (x, _) = strongest_direction.angles();
                assert_abs_diff_eq!(x, PI / 4.0, epsilon = 1e-12);
                assert_abs_diff_eq!(strongest_witness, -0.5, epsilon = 1e-12);
            }
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn condition1_needs_qubit_pair() {
        let rho = DensityMatrix::maximally_mixed(vec![3, 2, 2]).unwrap();
        assert!(matches!(condition1_check(&rho, coarse(), PPT_TOL), Err(Error::PptNotDecisive(_))));
        let report = certify(&rho, coarse(), PPT_TOL).unwrap();
        assert!(matches!(report.condition1, Condition1::NotApplicable { .. }));
    }

    #[test]
    fn fixed_point_examples() {
        let id2 = CMatrix::identity(2, 2);
        let g = ghz(2).unwrap().projector();
        assert_abs_diff_eq!(fixed_point_check(&g, &id2).unwrap(), 0.5, epsilon = 1e-15);
        assert!(fixed_point_check(&flower(2).unwrap(), &id2).unwrap() <= 1e-14);
        let skew = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(0.1, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        assert!(fixed_point_check(&g, &skew).is_err());
    }

    #[test]
    fn random_quantum_classical_states_are_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for dc in [2, 3] {
            let u = random::haar_unitary(dc, &mut rng);
            let mut data = CMatrix::zeros(4 * dc, 4 * dc);
            let weights = [0.5, 0.3, 0.2];
            for i in 0..dc {
                let sigma = random::wishart_mixed(&[2, 2], 2, &mut rng).unwrap();
                let v = u.column(i);
                data +=
                    kron(sigma.data(), &(v * v.adjoint())) * c64(weights[i] / weights[..dc].iter().sum::<f64>(), 0.0);
            }
            let rho = DensityMatrix::new(vec![2, 2, dc], data).unwrap();
            assert!(fixed_point_check(&rho, &u).unwrap() <= 1e-12);
            match zero_discord_check(&rho).unwrap() {
                ZeroDiscord::Yes { basis, residual } => {
                    assert!(residual <= FIXED_POINT_TOL);
                    assert!(fixed_point_check(&rho, &basis).unwrap() <= FIXED_POINT_TOL);
                }
                other => panic!("dc={dc}: {other:?}"),
            }
        }
    }

    #[test]
    fn zero_discord_examples() {
        match zero_discord_check(&flower(2).unwrap()).unwrap() {
            ZeroDiscord::Yes { basis, residual } => {
                assert!(residual <= 1e-12);
                // computational basis up to order and phases
                for col in basis.column_iter() {
                    let big = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
                    assert_abs_diff_eq!(big, 1.0, epsilon = 1e-12);
                }
            }
            other => panic!("{other:?}"),
        }
        // degenerate rho_C = 1/2, non-commuting blocks
        assert!(matches!(zero_discord_check(&ghz(2).unwrap().projector()).unwrap(), ZeroDiscord::No));
        // degenerate and trivially classical
        let flat = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        assert!(zero_discord_check(&flat).unwrap().is_yes());
        // nondegenerate with coherence on C
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random::haar_pure(&[2, 2, 2], &mut rng).unwrap().projector();
        assert!(matches!(zero_discord_check(&rho).unwrap(), ZeroDiscord::No));
    }

    #[test]
    fn product_with_flag_is_classical() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let sigma = random::wishart_mixed(&[2, 3], 3, &mut rng).unwrap();
        let mut amp = crate::matcore::CVector::zeros(3);
        amp[0] = c64(1.0, 0.0);
        let flag = PureState::new(vec![3], amp).unwrap().projector();
        let rho = sigma.tensor(&flag).unwrap();
        assert!(zero_discord_check(&rho).unwrap().is_yes());
    }

    #[test]
    fn rank_report_examples() {
        let t = tilde();
        let c1 = condition1_check(&t, coarse(), PPT_TOL).unwrap();
        let report = rank_report(&t, &c1, PPT_TOL).unwrap();
        assert_eq!(report.ranks, Ranks { global: 4, reduced_ab: 4 });
        assert!(report.cut("AB|C").unwrap().transpose_invariant);
        assert!(report.audits.iter().all(|a| a.applicable && a.consistent));

        let mut amp = crate::matcore::CVector::zeros(8);
        amp[0] = c64(1.0, 0.0);
        let prod = PureState::new(vec![2, 2, 2], amp).unwrap().projector();
        let c1 = condition1_check(&prod, coarse(), PPT_TOL).unwrap();
        let report = rank_report(&prod, &c1, PPT_TOL).unwrap();
        assert_eq!(report.ranks.global, 1);
        assert!(report.ppt.iter().all(|c| c.witness >= -PPT_TOL));
        assert!(report.inconsistencies().is_empty());
    }

    #[test]
    fn report_json_fields() {
        let report = certify(&tilde(), coarse(), PPT_TOL).unwrap();
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        for key in ["condition1", "zero_discord", "ranks", "ppt"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["condition1"]["status"], "pass");
        assert_eq!(v["ppt"].as_array().unwrap().len(), 3);
        assert_eq!(v["ppt"][1]["cut"], "BC|A");
    }
}

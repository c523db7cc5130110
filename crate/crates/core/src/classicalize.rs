//! Dichotomic measurement of party C and the entanglement change it causes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{c64, partial_trace, CMatrix, CVector, DensityMatrix};
use crate::measures::{global_value, post_value, MeasureKind};

/// Outcomes less likely than this carry no post-measurement state.
pub const PROB_CUTOFF: f64 = 1e-12;
/// A direction replaces the incumbent maximum only if it beats it by this much.
pub const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GridResolution {
    pub n_x: usize,
    pub n_t: usize,
}

impl Default for GridResolution {
    fn default() -> Self {
        GridResolution { n_x: 300, n_t: 50 }
    }
}

impl GridResolution {
    pub fn new(n_x: usize, n_t: usize) -> Result<Self> {
        if n_x == 0 || n_t == 0 {
            return Err(Error::OutOfRange(format!("grid {n_x}x{n_t} needs at least one step per angle")));
        }
        Ok(GridResolution { n_x, n_t })
    }

    /// Number of grid directions, endpoints included.
    pub fn count(&self) -> usize {
        (self.n_x + 1) * (self.n_t + 1)
    }
}

impl fmt::Display for GridResolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.n_x, self.n_t)
    }
}

impl FromStr for GridResolution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid `{s}` is not of the form NX,NT"));
        let (a, b) = s.split_once(',').ok_or_else(bad)?;
        let n_x = a.trim().parse().map_err(|_| bad())?;
        let n_t = b.trim().parse().map_err(|_| bad())?;
        GridResolution::new(n_x, n_t)
    }
}

/// A grid point. `k` and `j` index the first and second angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MeasurementDirection {
    /// Bra `(cos x, e^{it} sin x)`.
    Qubit {
        x: f64,
        t: f64,
        #[serde(skip)]
        k: usize,
        #[serde(skip)]
        j: usize,
    },
    /// Real ket `(cos x1, sin x1 cos x2, sin x1 sin x2)`.
    Qutrit {
        x1: f64,
        x2: f64,
        #[serde(skip)]
        k: usize,
        #[serde(skip)]
        j: usize,
    },
}

impl MeasurementDirection {
    pub fn qubit(x: f64, t: f64) -> Self {
        MeasurementDirection::Qubit { x, t, k: 0, j: 0 }
    }

    pub fn qutrit(x1: f64, x2: f64) -> Self {
        MeasurementDirection::Qutrit { x1, x2, k: 0, j: 0 }
    }

    pub fn dim(&self) -> usize {
        match self {
            MeasurementDirection::Qubit { .. } => 2,
            MeasurementDirection::Qutrit { .. } => 3,
        }
    }

    pub fn grid_index(&self) -> (usize, usize) {
        match *self {
            MeasurementDirection::Qubit { k, j, .. } | MeasurementDirection::Qutrit { k, j, .. } => (k, j),
        }
    }

    pub fn angles(&self) -> (f64, f64) {
        match *self {
            MeasurementDirection::Qubit { x, t, .. } => (x, t),
            MeasurementDirection::Qutrit { x1, x2, .. } => (x1, x2),
        }
    }

    /// Unit ket `|v>` of the projector `|v><v|`.
    pub fn ket(&self) -> CVector {
        match *self {
            MeasurementDirection::Qubit { x, t, .. } => {
                CVector::from_vec(vec![c64(x.cos(), 0.0), c64(t.cos(), -t.sin()) * x.sin()])
            }
            MeasurementDirection::Qutrit { x1, x2, .. } => CVector::from_vec(vec![
                c64(x1.cos(), 0.0),
                c64(x1.sin() * x2.cos(), 0.0),
                c64(x1.sin() * x2.sin(), 0.0),
            ]),
        }
    }
}

/// Directions `x = pi k / n_x`, `t = pi j / n_t` in row-major `(k, j)` order.
pub fn direction_grid(dim_c: usize, grid: GridResolution) -> Result<Vec<MeasurementDirection>> {
    if dim_c != 2 && dim_c != 3 {
        return Err(Error::UnsupportedDimension(dim_c));
    }
    let mut out = Vec::with_capacity(grid.count());
    for k in 0..=grid.n_x {
        for j in 0..=grid.n_t {
            let a = PI * k as f64 / grid.n_x as f64;
            let b = PI * j as f64 / grid.n_t as f64;
            out.push(if dim_c == 2 {
                MeasurementDirection::Qubit { x: a, t: b, k, j }
            } else {
                MeasurementDirection::Qutrit { x1: a, x2: b, k, j }
            });
        }
    }
    Ok(out)
}

/// One branch of the measurement. `post` is `None` for a skipped outcome.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    pub label: usize,
    pub prob: f64,
    pub post: Option<DensityMatrix>,
}

impl MeasurementOutcome {
    pub fn skipped(&self) -> bool {
        self.post.is_none()
    }
}

/// `rho` split into `d_C^2` blocks `<c|rho|c'>` on AB.
pub struct Blocks {
    dims_ab: Vec<usize>,
    dim_c: usize,
    blocks: Vec<CMatrix>,
    rho_ab: CMatrix,
}

impl Blocks {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let dims = rho.dims();
        if dims.len() != 3 {
            return Err(Error::SubsystemCount { expected: 3, found: dims.len() });
        }
        let dc = dims[2];
        let n = dims[0] * dims[1];
        let data = rho.data();
        let blocks = (0..dc * dc)
            .map(|cc| {
                let (c, c2) = (cc / dc, cc % dc);
                CMatrix::from_fn(n, n, |i, j| data[(i * dc + c, j * dc + c2)])
            })
            .collect();
        let rho_ab = partial_trace(rho, &[0, 1])?.into_data();
        Ok(Blocks { dims_ab: dims[..2].to_vec(), dim_c: dc, blocks, rho_ab })
    }

    pub fn dim_c(&self) -> usize {
        self.dim_c
    }

    /// Unnormalized `<v|rho|v>` on AB.
    pub fn sandwich(&self, v: &CVector) -> CMatrix {
        let dc = self.dim_c;
        let n = self.rho_ab.nrows();
        let mut out = CMatrix::zeros(n, n);
        for c in 0..dc {
            for c2 in 0..dc {
                let w = v[c].conj() * v[c2];
                if w.norm() != 0.0 {
                    out += &self.blocks[c * dc + c2] * w;
                }
            }
        }
        out
    }

    fn outcome(&self, label: usize, unnormalized: CMatrix) -> MeasurementOutcome {
        let prob = unnormalized.trace().re;
        let post = (prob >= PROB_CUTOFF)
            .then(|| DensityMatrix::from_parts_unchecked(self.dims_ab.clone(), unnormalized.unscale(prob)));
        MeasurementOutcome { label, prob: prob.max(0.0), post }
    }

    /// Outcomes of `{|v><v|, 1 - |v><v|}`.
    pub fn measure(&self, dir: &MeasurementDirection) -> Result<[MeasurementOutcome; 2]> {
        if dir.dim() != self.dim_c {
            return Err(Error::InvalidDims(format!(
                "direction for a {}-level party applied to a {}-level party",
                dir.dim(),
                self.dim_c
            )));
        }
        let s0 = self.sandwich(&dir.ket());
        let s1 = &self.rho_ab - &s0;
        Ok([self.outcome(0, s0), self.outcome(1, s1)])
    }
}

/// Measures party C of `rho` along `dir`.
pub fn classicalize(rho: &DensityMatrix, dir: &MeasurementDirection) -> Result<[MeasurementOutcome; 2]> {
    check_party_c(rho)?;
    Blocks::new(rho)?.measure(dir)
}

fn check_party_c(rho: &DensityMatrix) -> Result<usize> {
    let dims = rho.dims();
    if dims.len() != 3 {
        return Err(Error::SubsystemCount { expected: 3, found: dims.len() });
    }
    match dims[2] {
        d @ (2 | 3) => Ok(d),
        d => Err(Error::UnsupportedDimension(d)),
    }
}

/// `sum_i p_i E(sigma_i)` over the non-skipped outcomes.
pub fn ensemble_value(kind: MeasureKind, outcomes: &[MeasurementOutcome]) -> Result<f64> {
    let mut total = 0.0;
    for o in outcomes {
        if let Some(sigma) = &o.post {
            total += o.prob * post_value(kind, sigma)?;
        }
    }
    Ok(total)
}

/// Per-direction values from one pass over the grid.
#[derive(Debug, Clone, Copy)]
pub struct DirectionValues {
    pub direction: MeasurementDirection,
    pub ensemble: f64,
    /// Largest `E(sigma_i)` over rank-one outcomes.
    pub best_rank_one: f64,
}

/// Evaluates every grid direction (in parallel, returned in grid order).
pub fn ensemble_profile(kind: MeasureKind, rho: &DensityMatrix, grid: GridResolution) -> Result<Vec<DirectionValues>> {
    let dc = check_party_c(rho)?;
    let blocks = Blocks::new(rho)?;
    let dirs = direction_grid(dc, grid)?;
    dirs.par_iter()
        .map(|dir| {
            let outcomes = blocks.measure(dir)?;
            let mut ensemble = 0.0;
            let mut best_rank_one = f64::NEG_INFINITY;
            for o in &outcomes {
                if let Some(sigma) = &o.post {
                    let v = post_value(kind, sigma)?;
                    ensemble += o.prob * v;
                    // the complement projector has rank one only for a qubit
                    if o.label == 0 || dc == 2 {
                        best_rank_one = best_rank_one.max(v);
                    }
                }
            }
            Ok(DirectionValues { direction: *dir, ensemble, best_rank_one })
        })
        .collect()
}

/// Index of the maximum; ties go to the earliest entry.
fn argmax(values: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.enumerate() {
        match best {
            Some((_, b)) if v <= b + TIE_TOL => {}
            _ => best = Some((i, v)),
        }
    }
    best
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaResult {
    pub measure: MeasureKind,
    pub delta: f64,
    pub global_value: f64,
    pub ensemble_value: f64,
    pub best_direction: MeasurementDirection,
    pub grid: [usize; 2],
}

/// Delta together with both bounds, sharing one grid pass.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaBounds {
    pub lower: f64,
    pub delta: DeltaResult,
    pub upper: f64,
}

fn delta_from_profile(
    kind: MeasureKind,
    global: f64,
    profile: &[DirectionValues],
    grid: GridResolution,
) -> DeltaResult {
    let (i, ens) = argmax(profile.iter().map(|d| d.ensemble)).expect("grid is nonempty");
    DeltaResult {
        measure: kind,
        delta: global - ens,
        global_value: global,
        ensemble_value: ens,
        best_direction: profile[i].direction,
        grid: [grid.n_x, grid.n_t],
    }
}

/// `E(rho) - max over grid directions of sum_i p_i E(sigma_i)`.
pub fn delta(kind: MeasureKind, rho: &DensityMatrix, grid: GridResolution) -> Result<DeltaResult> {
    let global = global_value(kind, rho)?;
    let profile = ensemble_profile(kind, rho, grid)?;
    Ok(delta_from_profile(kind, global, &profile, grid))
}

/// `E(rho) - max over rank-one outcomes of E(sigma)`; never above the grid delta.
pub fn lower_bound(kind: MeasureKind, rho: &DensityMatrix, grid: GridResolution) -> Result<f64> {
    let global = global_value(kind, rho)?;
    let profile = ensemble_profile(kind, rho, grid)?;
    Ok(global - profile.iter().map(|d| d.best_rank_one).fold(f64::NEG_INFINITY, f64::max))
}

/// `E(rho) - E(rho_AB (x) |0><0|)`.
pub fn upper_bound(kind: MeasureKind, rho: &DensityMatrix) -> Result<f64> {
    check_party_c(rho)?;
    let global = global_value(kind, rho)?;
    Ok(global - post_value(kind, &partial_trace(rho, &[0, 1])?)?)
}

pub fn delta_with_bounds(kind: MeasureKind, rho: &DensityMatrix, grid: GridResolution) -> Result<DeltaBounds> {
    let global = global_value(kind, rho)?;
    let profile = ensemble_profile(kind, rho, grid)?;
    let delta = delta_from_profile(kind, global, &profile, grid);
    let lower = global - profile.iter().map(|d| d.best_rank_one).fold(f64::NEG_INFINITY, f64::max);
    let upper = global - post_value(kind, &partial_trace(rho, &[0, 1])?)?;
    Ok(DeltaBounds { lower, delta, upper })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::kron;
    use crate::states::{ghz, psi, random};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// `tr_C[rho (1 (x) M)]` by explicit Kronecker product.
    fn oracle_post(rho: &DensityMatrix, m: &CMatrix) -> CMatrix {
        let dab = rho.dims()[0] * rho.dims()[1];
        let lifted = kron(&CMatrix::identity(dab, dab), m);
        let prod = DensityMatrix::from_parts_unchecked(rho.dims().to_vec(), rho.data() * lifted);
        partial_trace(&prod, &[0, 1]).unwrap().into_data()
    }

    #[test]
    fn grid_layout() {
        let g = GridResolution::default();
        assert_eq!(g.count(), 15351);
        let dirs = direction_grid(2, g).unwrap();
        assert_eq!(dirs.len(), 15351);
        assert_eq!(dirs[1].grid_index(), (0, 1));
        assert_eq!(dirs[51].grid_index(), (1, 0));
        let (x, t) = dirs.last().unwrap().angles();
        assert_eq!((x, t), (PI, PI));
        assert!(matches!(direction_grid(4, g), Err(Error::UnsupportedDimension(4))));
        assert_eq!("12,5".parse::<GridResolution>().unwrap(), GridResolution { n_x: 12, n_t: 5 });
        assert!("12".parse::<GridResolution>().is_err());
        assert!("0,5".parse::<GridResolution>().is_err());
    }

    #[test]
    fn kets_are_unit() {
        for dir in direction_grid(2, GridResolution::new(7, 5).unwrap()).unwrap() {
            assert_abs_diff_eq!(dir.ket().norm(), 1.0, epsilon = 1e-15);
        }
        for dir in direction_grid(3, GridResolution::new(7, 5).unwrap()).unwrap() {
            assert_abs_diff_eq!(dir.ket().norm(), 1.0, epsilon = 1e-15);
        }
        // bra (cos x, e^{it} sin x) means ket (cos x, e^{-it} sin x)
        let v = MeasurementDirection::qubit(PI / 4.0, PI / 2.0).ket();
        assert_abs_diff_eq!(v[1].im, -(0.5f64).sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn block_sandwich_matches_kronecker_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for dims in [[2, 2, 2], [2, 3, 3], [3, 2, 2]] {
            let rho = random::wishart_mixed(&dims, 3, &mut rng).unwrap();
            let dirs = direction_grid(dims[2], GridResolution::new(4, 3).unwrap()).unwrap();
            for dir in dirs {
                let v = dir.ket();
                let m0 = &v * v.adjoint();
                let m1 = CMatrix::identity(dims[2], dims[2]) - &m0;
                let [o0, o1] = classicalize(&rho, &dir).unwrap();
                for (o, m) in [(o0, m0), (o1, m1)] {
                    let oracle = oracle_post(&rho, &m);
                    let p = oracle.trace().re;
                    assert_abs_diff_eq!(o.prob, p, epsilon = 1e-12);
                    let sigma = o.post.unwrap();
                    assert!((sigma.data() * c64(p, 0.0) - &oracle).camax() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_probability_branch_is_skipped() {
        let g = ghz(2).unwrap().projector();
        let [o0, o1] = classicalize(&g, &MeasurementDirection::qubit(0.0, 0.0)).unwrap();
        assert_abs_diff_eq!(o0.prob, 0.5, epsilon = 1e-15);
        assert!(!o0.skipped());
        // |000> measured along |1>: the |1> branch never happens
        let mut amp = CVector::zeros(8);
        amp[0] = c64(1.0, 0.0);
        let zero = crate::matcore::PureState::new(vec![2, 2, 2], amp).unwrap().projector();
        let [a, b] = classicalize(&zero, &MeasurementDirection::qubit(PI / 2.0, 0.0)).unwrap();
        assert!(a.skipped());
        assert!(a.prob < PROB_CUTOFF);
        assert!(!b.skipped());
        assert!(!o1.skipped());
    }

    #[test]
    fn ghz_delta_is_complete_along_z() {
        let g = ghz(2).unwrap().projector();
        let res = delta(MeasureKind::Negativity, &g, GridResolution::new(10, 4).unwrap()).unwrap();
        assert_abs_diff_eq!(res.global_value, 1.5, epsilon = 1e-12);
        assert!(res.ensemble_value >= 0.0);
        assert!(res.delta <= res.global_value + 1e-12);
        let text = serde_json::to_string(&res).unwrap();
        let keys =
            ["\"measure\"", "\"delta\"", "\"global_value\"", "\"ensemble_value\"", "\"best_direction\"", "\"grid\""];
        let pos: Vec<usize> = keys.iter().map(|k| text.find(k).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]), "{text}");
        let json: serde_json::Value = serde_json::from_str(&text).unwrap();
        let dir = json["best_direction"].as_object().unwrap();
        assert_eq!(dir.len(), 2);
        assert!(dir.contains_key("x") && dir.contains_key("t"));
        assert_eq!(json["grid"], serde_json::json!([10, 4]));
    }

    #[test]
    fn ties_go_to_first_grid_point() {
        assert_eq!(argmax([1.0, 1.0 + 1e-13, 0.5].into_iter()), Some((0, 1.0)));
        assert_eq!(argmax([1.0, 1.0 + 1e-11].into_iter()), Some((1, 1.0 + 1e-11)));
        // the product state gives the same ensemble value everywhere
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        let res = delta(MeasureKind::Negativity, &rho, GridResolution::new(6, 6).unwrap()).unwrap();
        assert_eq!(res.best_direction.grid_index(), (0, 0));
    }

    #[test]
    fn bounds_sandwich_delta() {
        let grid = GridResolution::new(30, 10).unwrap();
        let rho = psi(0.3).unwrap().projector();
        let b = delta_with_bounds(MeasureKind::Negativity, &rho, grid).unwrap();
        assert!(b.lower <= b.delta.delta + 1e-12);
        assert!(b.delta.delta <= b.upper + 1e-12);
        assert_abs_diff_eq!(b.lower, lower_bound(MeasureKind::Negativity, &rho, grid).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, upper_bound(MeasureKind::Negativity, &rho).unwrap(), epsilon = 1e-15);
    }

    #[test]
    fn squashed_needs_pure_global_state() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 2]).unwrap();
        let err = delta(MeasureKind::Squashed, &rho, GridResolution::new(2, 2).unwrap()).unwrap_err();
        assert_eq!(err.to_string(), "squashed global value undefined for mixed states");
    }

    #[test]
    fn rejects_unsupported_parties() {
        let rho = DensityMatrix::maximally_mixed(vec![2, 2, 4]).unwrap();
        assert!(matches!(
            delta(MeasureKind::Negativity, &rho, GridResolution::new(2, 2).unwrap()),
            Err(Error::UnsupportedDimension(4))
        ));
        let two = DensityMatrix::maximally_mixed(vec![2, 2]).unwrap();
        assert!(classicalize(&two, &MeasurementDirection::qubit(0.0, 0.0)).is_err());
    }
}

//! Certification battery behind `entchange verify`.

use std::path::PathBuf;

use clap::{Args, ValueEnum};
use entchange::certify::{condition1_check, cut_reports, rank_report, zero_discord_check, Condition1, ZeroDiscord};
use entchange::classicalize::{delta, delta_with_bounds, ensemble_profile, GridResolution};
use entchange::matcore::{c64, herm_eigvals, partial_trace, transpose_subsystems, Bipartition, CVector};
use entchange::measures::{
    min_pt_eigenvalue, negativity, post_value, pure_negativity_schmidt, squashed_pure_tripartite,
    tripartite_negativity, MeasureKind,
};
use entchange::states::{self, random};
use entchange::{DensityMatrix, PureState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{emit, parse_grid, AnyResult};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Zoo,
    Condition1,
    Bounds,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Zoo => "zoo",
            Suite::Condition1 => "condition1",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        }
    }
}

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    suite: Suite,
    #[arg(long, value_parser = parse_grid, default_value = "300,50")]
    grid: GridResolution,
    /// Seed for the random-state battery.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// PPT witness tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Also write the JSON summary here.
    #[arg(long)]
    output: Option<PathBuf>,
}

/// One check. `margin` is positive when the check passes with room to spare.
#[derive(Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    pub margin: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<CheckResult>,
}

struct Battery {
    grid: GridResolution,
    seed: u64,
    tol: f64,
    checks: Vec<CheckResult>,
}

impl Battery {
    fn push(&mut self, name: &str, margin: f64, detail: String) {
        self.checks.push(CheckResult { name: name.into(), pass: margin >= 0.0, margin, detail });
    }

    /// `|got - want| <= tol`, margin `tol - |got - want|`.
    fn close(&mut self, name: &str, got: f64, want: f64, tol: f64) {
        self.push(name, tol - (got - want).abs(), format!("{got:.12} vs {want:.12} (tol {tol:e})"));
    }

    fn rank(&mut self, name: &str, rho: &DensityMatrix, want: usize) {
        let mut ev = herm_eigvals(rho.data()).expect("density matrices are Hermitian");
        ev.reverse();
        let cutoff = 1e-8;
        let got = ev.iter().filter(|&&l| l > cutoff).count();
        let above = if want == 0 { f64::INFINITY } else { ev[want - 1] - cutoff };
        let below = ev.get(want).map_or(f64::INFINITY, |&l| cutoff - l);
        let margin = if got == want { above.min(below) } else { -1.0 };
        self.push(name, margin, format!("rank {got}, expected {want}"));
    }

    fn all_ppt(&mut self, name: &str, rho: &DensityMatrix) -> AnyResult<()> {
        let worst = cut_reports(rho, self.tol)?.iter().map(|c| c.witness).fold(f64::INFINITY, f64::min);
        self.push(name, worst + self.tol, format!("min PT eigenvalue over cuts {worst:e}"));
        Ok(())
    }

    fn zoo(&mut self) -> AnyResult<()> {
        let zoo = [
            ("upb", states::upb(), 4),
            ("adma", states::adma(2.0, 3.0, 5.0)?, 7),
            ("ak(2.5)", states::ak(2.5)?, 8),
            ("ph(1)", states::ph(1.0)?, 5),
        ];
        for (name, rho, rank) in &zoo {
            self.rank(&format!("zoo_rank_{name}"), rho, *rank);
            self.all_ppt(&format!("zoo_ppt_{name}"), rho)?;
        }
        self.all_ppt("zoo_ppt_ak(2sqrt2)", &states::ak(2.0 * 2f64.sqrt())?)?;

        let hdk = states::hdk(0.64)?;
        let cuts = cut_reports(&hdk, self.tol)?;
        self.push("hdk_ab_c_ppt", cuts[0].witness + 1e-12, format!("AB|C witness {:e}", cuts[0].witness));
        let npt = cuts[1].witness.max(cuts[2].witness);
        self.push("hdk_a_b_npt", -1e-4 - npt, format!("BC|A {:.6}, AC|B {:.6}", cuts[1].witness, cuts[2].witness));
        self.rank("hdk_reduced_rank", &partial_trace(&hdk, &[0, 1])?, 4);

        self.all_ppt("heisenberg_T5_ppt", &states::heisenberg_thermal(5.0)?)?;
        let cold = cut_reports(&states::heisenberg_thermal(1.0)?, self.tol)?;
        let w = cold.iter().map(|c| c.witness).fold(f64::INFINITY, f64::min);
        self.push("heisenberg_T1_npt", -1e-3 - w, format!("min PT eigenvalue {w:.6}"));

        // rank audits never flag a zoo state
        let mut flagged = Vec::new();
        for (name, rho) in [("tilde", states::tilde()), ("hdk", hdk), ("upb", states::upb())] {
            let c1 = condition1_check(&rho, self.grid, self.tol)?;
            if !rank_report(&rho, &c1, self.tol)?.inconsistencies().is_empty() {
                flagged.push(name);
            }
        }
        self.push(
            "rank_audits_consistent",
            if flagged.is_empty() { 0.0 } else { -1.0 },
            format!("flagged: {flagged:?}"),
        );
        Ok(())
    }

    fn condition1(&mut self) -> AnyResult<()> {
        for (name, rho) in [("tilde", states::tilde()), ("upb", states::upb())] {
            match condition1_check(&rho, self.grid, self.tol)? {
                Condition1::Pass { worst_min_eigenvalue, certificate, .. } => {
                    self.push(&format!("condition1_{name}_pass"), worst_min_eigenvalue + self.tol, certificate)
                }
                Condition1::Fail { direction, witness, .. } => {
                    self.push(&format!("condition1_{name}_pass"), witness + self.tol, format!("NPT at {direction:?}"))
                }
                Condition1::NotApplicable { reason } => self.push(&format!("condition1_{name}_pass"), -1.0, reason),
            }
        }
        match condition1_check(&states::ghz(2)?.projector(), self.grid, self.tol)? {
            Condition1::Fail { strongest_direction, strongest_witness, direction, .. } => {
                let (x, t) = strongest_direction.angles();
                self.push(
                    "condition1_ghz_fail",
                    -strongest_witness - self.tol,
                    format!(
                        "first NPT direction {:?}, strongest at x={x:.6} t={t:.6} witness {strongest_witness:.6}",
                        direction.grid_index()
                    ),
                )
            }
            other => self.push("condition1_ghz_fail", -1.0, format!("{other:?}")),
        }
        Ok(())
    }

    fn sandwich_margin(&self, rho: &DensityMatrix) -> AnyResult<f64> {
        let b = delta_with_bounds(MeasureKind::Negativity, rho, self.grid)?;
        let d = b.delta.delta;
        Ok((d - b.lower).min(b.upper - d).min(b.delta.global_value - b.upper) + 1e-9)
    }

    fn bounds(&mut self) -> AnyResult<()> {
        let mut worst = f64::INFINITY;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut held = 0;
        for i in 0..200 {
            let rho = if i % 2 == 0 {
                random::haar_pure(&[2, 2, 2], &mut rng)?.projector()
            } else {
                random::wishart_mixed(&[2, 2, 2], 1 + (i / 2) % 8, &mut rng)?
            };
            let m = self.sandwich_margin(&rho)?;
            held += usize::from(m >= 0.0);
            worst = worst.min(m);
        }
        self.push("bounds_random", worst, format!("{held}/200 sandwich holds (seed {})", self.seed));
        for (name, fam) in [("bounds_psi", "psi"), ("bounds_rho", "rho")] {
            let mut worst = f64::INFINITY;
            for i in 0..=20 {
                let rho = format!("{fam}:{}", i as f64 * 0.05).parse::<states::StateSpec>()?.density()?;
                worst = worst.min(self.sandwich_margin(&rho)?);
            }
            self.push(name, worst, "21 points".into());
        }
        Ok(())
    }

    fn criteria(&mut self) -> AnyResult<()> {
        let grid = self.grid;
        for n in [2usize, 3] {
            let rho = states::bell_pairs(n)?.projector();
            let d = delta(MeasureKind::Negativity, &rho, grid)?.delta;
            self.close(&format!("bells{n}_delta"), d, 2f64.powi(n as i32 - 2) + 0.5, 1e-9);
            let profile = ensemble_profile(MeasureKind::Negativity, &rho, grid)?;
            let (lo, hi) = profile
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.ensemble), b.max(p.ensemble)));
            self.push(&format!("bells{n}_flat_ensemble"), 1e-9 - (hi - lo), format!("spread {:e}", hi - lo));
        }

        for d in 2..=5 {
            let n = negativity(&states::max_entangled(d)?.projector(), &Bipartition::isolate(1, 2)?)?;
            self.close(&format!("max_entangled_{d}_negativity"), n, (d as f64 - 1.0) / 2.0, 1e-12);
        }

        for (name, rho, want) in [
            ("ghz3", states::ghz(3)?.projector(), [1.667, 0.792489]),
            ("sym3", states::sym3().projector(), [1.86747, 0.971332]),
        ] {
            for (kind, w) in MeasureKind::ALL.into_iter().zip(want) {
                let d = delta(kind, &rho, grid)?.delta;
                self.close(&format!("{name}_{kind}_delta"), d, w, 1e-2);
            }
        }

        for kind in MeasureKind::ALL {
            let ps: Vec<f64> = (0..=20).map(|i| i as f64 * 0.05).collect();
            let mut ds = Vec::new();
            for &p in &ps {
                ds.push(delta(kind, &states::psi(p)?.projector(), grid)?.delta);
            }
            let imin = (0..ds.len()).fold(0, |b, i| if ds[i] < ds[b] { i } else { b });
            let imax = (0..ds.len()).fold(0, |b, i| if ds[i] > ds[b] { i } else { b });
            self.close(&format!("psi_{kind}_argmin"), ps[imin], 0.4, 0.05 + 1e-12);
            self.close(&format!("psi_{kind}_argmax"), ps[imax], 0.0, 1e-12);
            self.close(&format!("psi_{kind}_endpoint"), ds[20], 0.5, 1e-3);
        }

        for d in [2usize, 3] {
            let w = states::flower(d)?;
            let b = delta_with_bounds(MeasureKind::Negativity, &w, grid)?;
            self.close(&format!("flower{d}_delta"), b.delta.delta, 0.0, 1e-10);
            self.push(&format!("flower{d}_upper"), b.upper - 0.1, format!("upper bound {:.6}", b.upper));
            let (margin, detail) = match zero_discord_check(&w)? {
                ZeroDiscord::Yes { residual, .. } => (1e-12 - residual, format!("residual {residual:e}")),
                other => (-1.0, format!("{other:?}")),
            };
            self.push(&format!("flower{d}_zero_discord"), margin, detail);
        }

        let t = states::tilde();
        self.close("tilde_pt_a", min_pt_eigenvalue(&t, &Bipartition::isolate(0, 3)?)?, -0.125, 1e-9);
        let exact = |ok: bool| if ok { 0.0 } else { -1.0 };
        self.push(
            "tilde_transpose_c",
            exact(&transpose_subsystems(t.data(), t.dims(), &[2]) == t.data()),
            "exact".into(),
        );
        let swap = |i: usize| ((i & 2) << 1) | ((i & 4) >> 1) | (i & 1);
        let swapped = entchange::matcore::CMatrix::from_fn(8, 8, |r, c| t.data()[(swap(r), swap(c))]);
        self.push("tilde_swap_ab", exact(&swapped == t.data()), "exact".into());
        self.rank("tilde_rank", &t, 4);
        let d = delta(MeasureKind::Negativity, &t, grid)?.delta;
        self.close("tilde_complete_loss", d, tripartite_negativity(&t)?, 2e-10);

        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(11));
        let layouts: [&[usize]; 4] = [&[2, 2, 2], &[2, 2, 3], &[2, 3, 3], &[3, 3, 3]];
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let psi = random::haar_pure(layouts[i % 4], &mut rng)?;
            let rho = psi.projector();
            for cut in Bipartition::tripartite_cuts() {
                worst = worst.max((pure_negativity_schmidt(&psi, &cut)? - negativity(&rho, &cut)?).abs());
            }
        }
        self.push("oracle_schmidt", 1e-10 - worst, format!("max deviation {worst:e} over 1000 states"));
        let mut flag = CVector::zeros(2);
        flag[0] = c64(1.0, 0.0);
        let zero = PureState::new(vec![2], flag)?.projector();
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let sigma = random::wishart_mixed(&[2, 2], 1 + i % 4, &mut rng)?;
            let a = post_value(MeasureKind::Negativity, &sigma)?;
            let b = tripartite_negativity(&sigma.tensor(&zero)?)?;
            worst = worst.max((a - b).abs());
        }
        self.push("oracle_post_value", 1e-10 - worst, format!("max deviation {worst:e} over 200 states"));

        self.close("squashed_ghz", squashed_pure_tripartite(&states::ghz(2)?.projector())?, 1.5, 1e-12);
        let h = -(1.0f64 / 3.0) * (1.0f64 / 3.0).log2() - (2.0f64 / 3.0) * (2.0f64 / 3.0).log2();
        self.close("squashed_w", squashed_pure_tripartite(&states::w_state().projector())?, 1.5 * h, 1e-9);
        Ok(())
    }
}

pub fn summarize(suite: Suite, grid: GridResolution, seed: u64, tol: f64) -> AnyResult<Summary> {
    let mut b = Battery { grid, seed, tol, checks: Vec::new() };
    match suite {
        Suite::Zoo => b.zoo()?,
        Suite::Condition1 => b.condition1()?,
        Suite::Bounds => b.bounds()?,
        Suite::All => {
            b.zoo()?;
            b.condition1()?;
            b.bounds()?;
            b.criteria()?;
        }
    }
    let passed = b.checks.iter().filter(|c| c.pass).count();
    Ok(Summary { suite: suite.name().into(), passed, failed: b.checks.len() - passed, checks: b.checks })
}

/// Prints the summary; returns whether every check passed.
pub fn run(args: &VerifyArgs) -> AnyResult<bool> {
    let summary = summarize(args.suite, args.grid, args.seed, args.tol)?;
    let text = serde_json::to_string_pretty(&summary)?;
    if let Some(path) = &args.output {
        emit(&text, Some(path))?;
    }
    emit(&text, None)?;
    let failing: Vec<&str> = summary.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    if !failing.is_empty() {
        eprintln!("verification failed: {}", failing.join(", "));
    }
    Ok(failing.is_empty())
}

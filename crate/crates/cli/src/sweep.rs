use std::path::PathBuf;

use clap::Args;
use entchange::classicalize::{delta_with_bounds, GridResolution};
use entchange::measures::MeasureKind;
use entchange::states::StateSpec;

use crate::{emit, parse_grid, parse_measure, AnyResult};

/// Families with one real parameter.
const FAMILIES: [&str; 6] = ["psi", "rho", "hdk", "ak", "ph", "heis"];

#[derive(Args)]
pub struct SweepArgs {
    /// Family to sweep: psi, rho, hdk, ak, ph or heis.
    #[arg(long)]
    state: String,
    /// START,STOP,STEPS. Defaults to 0,1,21 for psi and rho.
    #[arg(long, value_parser = parse_range)]
    range: Option<SweepRange>,
    #[arg(long, value_parser = parse_measure, value_delimiter = ',', default_value = "negativity")]
    measure: Vec<MeasureKind>,
    #[arg(long, value_parser = parse_grid, default_value = "300,50")]
    grid: GridResolution,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepRange {
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let last = self.steps - 1;
        (0..self.steps)
            .map(|i| if i == last { self.stop } else { self.start + span * i as f64 / last as f64 })
            .collect()
    }
}

fn parse_range(s: &str) -> Result<SweepRange, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts[..] else {
        return Err(format!("range `{s}` is not of the form START,STOP,STEPS"));
    };
    let start: f64 = a.parse().map_err(|_| format!("bad range start `{a}`"))?;
    let stop: f64 = b.parse().map_err(|_| format!("bad range stop `{b}`"))?;
    let steps: usize = n.parse().map_err(|_| format!("bad step count `{n}`"))?;
    if steps < 2 {
        return Err("a sweep needs at least 2 steps".into());
    }
    if start.is_nan() || stop.is_nan() || start >= stop {
        return Err(format!("range start {start} must be below stop {stop}"));
    }
    Ok(SweepRange { start, stop, steps })
}

/// `%.12g`-style formatting with a `.` decimal separator.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v == 0.0 { "0".into() } else { v.to_string() };
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let fixed = format!("{v:.decimals$}");
        if fixed.contains('.') {
            fixed.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            fixed
        }
    } else {
        let m = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}

pub fn sweep_csv(family: &str, range: SweepRange, measures: &[MeasureKind], grid: GridResolution) -> AnyResult<String> {
    if !FAMILIES.contains(&family) {
        return Err(format!("cannot sweep `{family}`; choose one of {}", FAMILIES.join(", ")).into());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["param".to_string()];
    for m in measures {
        for col in ["global", "delta", "lower", "upper"] {
            header.push(format!("{m}_{col}"));
        }
    }
    w.write_record(&header)?;
    for p in range.points() {
        let spec: StateSpec = format!("{family}:{p}").parse()?;
        let rho = spec.density()?;
        let mut row = vec![format_sig(p)];
        for &m in measures {
            let b = delta_with_bounds(m, &rho, grid)?;
            for v in [b.delta.global_value, b.delta.delta, b.lower, b.upper] {
                row.push(format_sig(v));
            }
        }
        w.write_record(&row)?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| e.to_string())?)?)
}

pub fn run(args: &SweepArgs) -> AnyResult<()> {
    let range = match (args.range, args.state.as_str()) {
        (Some(r), _) => r,
        (None, "psi" | "rho") => SweepRange { start: 0.0, stop: 1.0, steps: 21 },
        (None, other) => return Err(format!("--range is required for `{other}`").into()),
    };
    let text = sweep_csv(&args.state, range, &args.measure, args.grid)?;
    emit(&text, args.output.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.5), "0.5");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_sig(2.0f64.sqrt() * 100.0), "141.421356237");
        assert_eq!(format_sig(-1.25e-7), "-1.25e-7");
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(123456789012345.0), "1.23456789012e14");
    }

    #[test]
    fn range_points_hit_endpoints() {
        let r = parse_range("0,1,21").unwrap();
        let pts = r.points();
        assert_eq!(pts.len(), 21);
        assert_eq!(pts[0], 0.0);
        assert_eq!(pts[20], 1.0);
        assert!((pts[8] - 0.4).abs() < 1e-15);
        assert!(parse_range("1,0,5").is_err());
        assert!(parse_range("0,1,1").is_err());
        assert!(parse_range("0,1").is_err());
    }

    #[test]
    fn rejects_unknown_family() {
        let r = SweepRange { start: 0.0, stop: 1.0, steps: 2 };
        let grid = GridResolution::new(2, 2).unwrap();
        assert!(sweep_csv("upb", r, &[MeasureKind::Negativity], grid).is_err());
    }
}

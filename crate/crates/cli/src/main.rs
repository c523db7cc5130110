mod sweep;
mod verify;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entchange::classicalize::{delta, delta_with_bounds, DeltaResult, GridResolution};
use entchange::matcore::{partial_trace, to_csv, to_json, von_neumann_entropy, Bipartition};
use entchange::measures::{global_value, negativity, MeasureKind};
use entchange::states::StateSpec;
use serde::Serialize;

type AnyResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(
    name = "entchange",
    version,
    about = "Entanglement change of tripartite states under classicalization of party C"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Global measure value, per-cut negativities and marginal entropies.
    Measure(MeasureArgs),
    /// Entanglement change over the measurement grid.
    Delta(DeltaArgs),
    /// Sweep one state parameter and write delta and bounds as CSV.
    Sweep(sweep::SweepArgs),
    /// Run a certification suite.
    Verify(verify::VerifyArgs),
    /// Write a state's density matrix.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Plain,
}

fn parse_state(s: &str) -> Result<StateSpec, String> {
    s.parse().map_err(|e: entchange::Error| e.to_string())
}

fn parse_measure(s: &str) -> Result<MeasureKind, String> {
    s.parse().map_err(|e: entchange::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<GridResolution, String> {
    s.parse().map_err(|e: entchange::Error| e.to_string())
}

#[derive(Args)]
struct MeasureArgs {
    #[arg(long, value_parser = parse_state)]
    state: StateSpec,
    #[arg(long, value_parser = parse_measure)]
    measure: Option<MeasureKind>,
    #[arg(long, value_enum, default_value = "plain")]
    format: Format,
}

#[derive(Args)]
struct DeltaArgs {
    #[arg(long, value_parser = parse_state)]
    state: StateSpec,
    #[arg(long, value_parser = parse_measure, default_value = "negativity")]
    measure: MeasureKind,
    #[arg(long, value_parser = parse_grid, default_value = "300,50")]
    grid: GridResolution,
    /// Also report the lower and upper bounds.
    #[arg(long)]
    bounds: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DumpArgs {
    #[arg(long, value_parser = parse_state)]
    state: StateSpec,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

/// Writes `text` to `path`, or to stdout when no path is given.
fn emit(text: &str, path: Option<&PathBuf>) -> AnyResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display()))?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                out.write_all(b"\n")?;
            }
        }
    }
    Ok(())
}

struct MeasureReport {
    state: String,
    values: Vec<(MeasureKind, f64)>,
    negativities: Vec<(String, f64)>,
    entropies: Vec<(char, f64)>,
}

fn cmd_measure(args: &MeasureArgs) -> AnyResult<()> {
    let rho = args.state.density()?;
    let mut values = Vec::new();
    match args.measure {
        Some(kind) => values.push((kind, global_value(kind, &rho)?)),
        None => {
            for kind in MeasureKind::ALL {
                // the squashed value exists only for pure states
                if let Ok(v) = global_value(kind, &rho) {
                    values.push((kind, v));
                }
            }
        }
    }
    let mut negativities = Vec::new();
    for cut in Bipartition::tripartite_cuts() {
        negativities.push((cut.to_string(), negativity(&rho, &cut)?));
    }
    let mut entropies = Vec::new();
    for (k, name) in ['A', 'B', 'C'].into_iter().enumerate() {
        entropies.push((name, von_neumann_entropy(&partial_trace(&rho, &[k])?)));
    }
    let report = MeasureReport { state: args.state.to_string(), values, negativities, entropies };
    match args.format {
        Format::Json => {
            let obj = |pairs: Vec<(String, f64)>| {
                pairs.into_iter().map(|(k, v)| (k, v.into())).collect::<serde_json::Map<_, _>>()
            };
            let json = serde_json::json!({
                "state": report.state,
                "values": obj(report.values.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
                "negativities": obj(report.negativities.clone()),
                "entropies": obj(report.entropies.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
            });
            emit(&serde_json::to_string_pretty(&json)?, None)
        }
        _ => {
            let mut text = String::new();
            for (kind, v) in &report.values {
                text += &format!("{kind} {v}\n");
            }
            for (cut, v) in &report.negativities {
                text += &format!("N({cut}) {v}\n");
            }
            for (party, v) in &report.entropies {
                text += &format!("S({party}) {v}\n");
            }
            emit(&text, None)
        }
    }
}

#[derive(Serialize)]
struct DeltaWithBounds<'a> {
    #[serde(flatten)]
    delta: &'a DeltaResult,
    lower_bound: f64,
    upper_bound: f64,
}

fn cmd_delta(args: &DeltaArgs) -> AnyResult<()> {
    let rho = args.state.density()?;
    let (result, bounds) = if args.bounds {
        let b = delta_with_bounds(args.measure, &rho, args.grid)?;
        (b.delta, Some((b.lower, b.upper)))
    } else {
        (delta(args.measure, &rho, args.grid)?, None)
    };
    let text = match (args.format, bounds) {
        (Format::Plain, _) => {
            let (a, b) = result.best_direction.angles();
            let mut t = format!(
                "measure {}\ndelta {}\nglobal_value {}\nensemble_value {}\nbest_direction {a} {b}\ngrid {}\n",
                result.measure, result.delta, result.global_value, result.ensemble_value, args.grid
            );
            if let Some((lo, up)) = bounds {
                t += &format!("lower_bound {lo}\nupper_bound {up}\n");
            }
            t
        }
        (_, Some((lower_bound, upper_bound))) => {
            serde_json::to_string_pretty(&DeltaWithBounds { delta: &result, lower_bound, upper_bound })?
        }
        (_, None) => serde_json::to_string_pretty(&result)?,
    };
    emit(&text, None)
}

fn cmd_dump(args: &DumpArgs) -> AnyResult<()> {
    let rho = args.state.density()?;
    let text = match args.format {
        Format::Csv => to_csv(rho.data())?,
        Format::Json => to_json(rho.data()),
        Format::Plain => return Err("dump supports --format json or csv".into()),
    };
    emit(&text, args.output.as_ref())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Measure(a) => cmd_measure(a),
        Command::Delta(a) => cmd_delta(a),
        Command::Sweep(a) => sweep::run(a),
        Command::Dump(a) => cmd_dump(a),
        Command::Verify(a) => match verify::run(a) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

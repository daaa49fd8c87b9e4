//! `splinecast` command line: predict the next value of an annual
//! series and dump the matrices behind the prediction.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use splinecast::criteria::Q;
use splinecast::energy::{assemble_energy, build_family, FamilyId};
use splinecast::matrix::Matrix;

use splinecast_cli::error::CliError;
use splinecast_cli::run::{self, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(name = "splinecast", version, about = "One-step-ahead series prediction from spline-energy parametrizations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest a year,value CSV, run the selection tournament, and
    /// report the winning predictor per cost exponent.
    Predict(PredictArgs),
    /// Dump the energy matrices or a family matrix of one level as CSV.
    Matrices(MatricesArgs),
}

#[derive(Args)]
struct PredictArgs {
    /// Input CSV with a `year,value` header and consecutive years.
    #[arg(long)]
    input: PathBuf,
    /// First backtested level.
    #[arg(long, default_value_t = 4)]
    lag: usize,
    /// Cost exponents, comma separated from {1,2,inf}.
    #[arg(long, default_value = "1,2,inf")]
    q: String,
    /// Parametrization families, comma separated from
    /// {M,Mt,Minv,Minvt,S,Sinv}.
    #[arg(long, default_value = "M,Mt,Minv,Minvt,S,Sinv")]
    families: String,
    /// Relative tolerance of the trend-correlation test.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Report format.
    #[arg(long, default_value = "json", value_parser = ["json", "csv"])]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Directory for per-q winning weight rows as CSV.
    #[arg(long, value_name = "DIR")]
    emit_weights: Option<PathBuf>,
    /// Dump basis columns of every family at this level (written next
    /// to the weight dumps, or into the current directory).
    #[arg(long, value_name = "LEVEL")]
    emit_basis: Option<usize>,
    /// Write dense spline samples of the input series to this file.
    #[arg(long, value_name = "PATH")]
    emit_spline: Option<PathBuf>,
    /// Directory for minimal SVG charts of the series and weights.
    #[arg(long, value_name = "DIR")]
    emit_svg: Option<PathBuf>,
    /// Emit full-precision numbers instead of 7 significant digits.
    #[arg(long)]
    full_precision: bool,
    /// Spline samples per unit interval for --emit-spline.
    #[arg(long, default_value_t = 16)]
    samples_per_interval: usize,
}

#[derive(Args)]
struct MatricesArgs {
    /// Level l; matrices have size (l+1) x (l+1).
    #[arg(long)]
    level: usize,
    /// A family tag from {M,Mt,Minv,Minvt,S,Sinv}; omitted, both raw
    /// energy matrices are printed.
    #[arg(long)]
    family: Option<String>,
    /// Write the dump here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_q_set(text: &str) -> Result<Vec<Q>, CliError> {
    let mut qs = Vec::new();
    for part in text.split(',') {
        let q = Q::parse(part)
            .ok_or_else(|| CliError::Config(format!("unknown q '{part}' (use 1, 2 or inf)")))?;
        if !qs.contains(&q) {
            qs.push(q);
        }
    }
    if qs.is_empty() {
        return Err(CliError::Config("the q set must not be empty".into()));
    }
    Ok(qs)
}

fn parse_family_set(text: &str) -> Result<Vec<FamilyId>, CliError> {
    let mut families = Vec::new();
    for part in text.split(',') {
        let tag = part.trim();
        if tag.is_empty() {
            continue;
        }
        let family = FamilyId::parse(tag).ok_or_else(|| {
            CliError::Config(format!("unknown family '{tag}' (use M, Mt, Minv, Minvt, S, Sinv)"))
        })?;
        if !families.contains(&family) {
            families.push(family);
        }
    }
    if families.is_empty() {
        return Err(CliError::Config("the family set must not be empty".into()));
    }
    Ok(families)
}

fn matrix_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn predict(args: PredictArgs) -> Result<(), CliError> {
    let config = RunConfig {
        input: args.input,
        lag: args.lag,
        qs: parse_q_set(&args.q)?,
        families: parse_family_set(&args.families)?,
        tol_rel: args.tol,
        format: if args.format == "csv" { OutputFormat::Csv } else { OutputFormat::Json },
        output: args.output,
        emit_weights: args.emit_weights,
        emit_basis: args.emit_basis,
        emit_spline: args.emit_spline,
        emit_svg: args.emit_svg,
        full_precision: args.full_precision,
        samples_per_interval: args.samples_per_interval,
    };
    let outcome = run::run(&config)?;
    if config.output.is_none() {
        print!("{}", outcome.rendered);
    }
    for warning in &outcome.report.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(())
}

fn matrices(args: MatricesArgs) -> Result<(), CliError> {
    if args.level < 1 {
        return Err(CliError::Config("level must be at least 1".into()));
    }
    let mut out = String::new();
    match &args.family {
        Some(tag) => {
            let family = FamilyId::parse(tag).ok_or_else(|| {
                CliError::Config(format!(
                    "unknown family '{tag}' (use M, Mt, Minv, Minvt, S, Sinv)"
                ))
            })?;
            let built = build_family(family, args.level).map_err(CliError::from)?;
            out.push_str(&matrix_csv(built.level(args.level)));
        }
        None => {
            let pair = assemble_energy(args.level).map_err(CliError::from)?;
            out.push_str("# M\n");
            out.push_str(&matrix_csv(&pair.m));
            out.push_str("# S\n");
            out.push_str(&matrix_csv(&pair.s));
        }
    }
    match args.output {
        Some(path) => std::fs::write(&path, out)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Predict(args) => predict(args),
        Command::Matrices(args) => matrices(args),
    };
    if let Err(err) = result {
        let mut stderr = std::io::stderr();
        let _ = writeln!(stderr, "error: {err}");
        std::process::exit(err.exit_code());
    }
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use hecke_core::characters::build_canonical;
use hecke_core::lseries::StandardKernel;
use hecke_core::lseries::{central_derivative, DEFAULT_TOLERANCE};
use hecke_core::report::{
    render_checks, run_analytic_checks, scan, verify_reference_table, write_rows, AnalyticOptions,
    OutputFormat, PerturbedKernel, ScanConfig, CSV_HEADER,
};

/// All checks passed.
const EXIT_OK: u8 = 0;
/// A check or verdict failed.
const EXIT_FAILED: u8 = 1;
/// Bad input: invalid discriminant, twist, root number or flag value.
const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "hecke",
    version,
    about = "Central derivatives of Hecke L-functions of imaginary quadratic fields"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recompute the D=8 and D=11 reference table.
    VerifyPaper {
        /// Scale every kernel value by (1 + REL).
        #[arg(long, hide = true, allow_negative_numbers = true)]
        perturb_kernel: Option<f64>,
    },
    /// Non-vanishing verdicts for every valid D in a range.
    Scan {
        #[arg(long)]
        dmin: u64,
        #[arg(long)]
        dmax: u64,
        /// Comma-separated twist discriminants.
        #[arg(
            long,
            value_delimiter = ',',
            allow_negative_numbers = true,
            default_value = "1"
        )]
        twists: Vec<i64>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Skip direct evaluation on rows settled by the bound chain.
        #[arg(long)]
        bounds_only: bool,
    },
    /// Evaluate one central derivative and print it as JSON.
    Evaluate {
        #[arg(long = "D")]
        disc: u64,
        #[arg(long = "d", allow_negative_numbers = true, default_value_t = 1)]
        d: i64,
        /// Root-number family, only meaningful for D = 8.
        #[arg(long, allow_negative_numbers = true, default_value_t = -1)]
        family: i8,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Residues, contour bounds and kernel identities.
    AnalyticChecks {
        /// Cap on quadrature subintervals.
        #[arg(long, hide = true)]
        max_intervals: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::VerifyPaper { perturb_kernel } => {
            let lines = match perturb_kernel {
                Some(rel) => verify_reference_table(&PerturbedKernel { rel }),
                None => verify_reference_table(&StandardKernel),
            };
            print!("{}", render_checks(&lines));
            Ok(report_failures(
                lines.iter().filter(|l| !l.passed).map(|l| l.name.as_str()),
            ))
        }
        Command::Scan {
            dmin,
            dmax,
            twists,
            tol,
            jobs,
            format,
            out,
            bounds_only,
        } => {
            let cfg = ScanConfig {
                d_min: dmin,
                d_max: dmax,
                twists,
                tolerance: tol,
                jobs,
                evaluate_chain_rows: !bounds_only,
            };
            let rows = scan(&cfg)?;
            let sink: Box<dyn Write> = match &out {
                Some(path) => Box::new(
                    File::create(path).with_context(|| format!("creating {}", path.display()))?,
                ),
                None => Box::new(io::stdout().lock()),
            };
            let mut sink = BufWriter::new(sink);
            if rows.is_empty() && matches!(format, Format::Csv) {
                writeln!(sink, "{CSV_HEADER}")?;
            } else {
                write_rows(&rows, format.into(), &mut sink)?;
            }
            sink.flush()?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.nonvanishing)
                .map(|r| format!("D={} d={}", r.disc, r.d))
                .collect();
            eprintln!("{} rows, {} not certified", rows.len(), failed.len());
            Ok(report_failures(failed.iter().map(String::as_str)))
        }
        Command::Evaluate {
            disc,
            d,
            family,
            tol,
        } => {
            if !(tol > 0.0 && tol.is_finite()) {
                anyhow::bail!("tolerance must be positive, got {tol}");
            }
            let tw = build_canonical(disc, family)?.twist(d)?;
            let rec = central_derivative(&tw, tol)?;
            println!("{}", serde_json::to_string_pretty(&rec)?);
            Ok(EXIT_OK)
        }
        Command::AnalyticChecks { max_intervals } => {
            let lines = run_analytic_checks(&AnalyticOptions { max_intervals });
            print!("{}", render_checks(&lines));
            Ok(report_failures(
                lines.iter().filter(|l| !l.passed).map(|l| l.name.as_str()),
            ))
        }
    }
}

fn report_failures<'a>(names: impl Iterator<Item = &'a str>) -> u8 {
    let mut code = EXIT_OK;
    for name in names {
        eprintln!("FAILED: {name}");
        code = EXIT_FAILED;
    }
    code
}

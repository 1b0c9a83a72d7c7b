//! Command-line entry point for the Monte Carlo harness.
//!
//! Exit codes: 0 success, 1 verification or runtime failure, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use robustmc::dgp::DgpPreset;
use robustmc::numerics::ErrorLaw;
use robustmc::rho::RhoFamily;

use robustmc_cli::commands::{bias_table, scale_sweep, theory_report, verify};
use robustmc_cli::config::{resolve, resolve_required, ConfigMap};

#[derive(Parser)]
#[command(
    name = "robustmc",
    version,
    about = "Monte Carlo harness for robust location-scale estimation under contamination"
)]
struct Cli {
    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo bias table over processes and sample sizes.
    BiasTable(BiasTableArgs),
    /// Bias against a grid of plug-in scale factors on a contaminated process.
    ScaleSweep(ScaleSweepArgs),
    /// Consistency factors, boundedness thresholds, variances and tunings.
    TheoryReport(TheoryReportArgs),
    /// Run the numerical oracle suite; exit 1 on any mismatch.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BiasTableArgs {
    /// Processes to simulate (comma-separated: dgp1..dgp6).
    #[arg(long, value_delimiter = ',')]
    preset: Vec<DgpPreset>,
    /// Sample sizes (comma-separated).
    #[arg(long, value_delimiter = ',')]
    n: Vec<usize>,
    /// Monte Carlo repetitions (at least 100).
    #[arg(long)]
    reps: Option<u64>,
    /// Base seed; repetition r runs on stream seed XOR r.
    #[arg(long)]
    seed: Option<u64>,
    /// Scale handling: known, iqr or mad.
    #[arg(long)]
    scale: Option<bias_table::ScaleMode>,
    /// Trimming handling for the trimmed estimator: known or auto.
    #[arg(long)]
    trim: Option<bias_table::TrimMode>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = automatic); never changes the output bytes.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ScaleSweepArgs {
    /// Good-observation fraction in (1/2, 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Sample size.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Plug-in scale factors (comma-separated).
    #[arg(long = "sigma-factor-grid", value_delimiter = ',')]
    sigma_factor_grid: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct TheoryReportArgs {
    /// Loss family: huber or tukey.
    #[arg(long)]
    family: Option<String>,
    /// Tuning constant; defaults to the family standard.
    #[arg(long)]
    tuning: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    varrho: Option<f64>,
    /// Good-error law: normal or t3.
    #[arg(long = "good-law")]
    good_law: Option<String>,
    #[arg(long = "sigma-factor-grid", value_delimiter = ',')]
    sigma_factor_grid: Vec<f64>,
    /// Efficiency target for the calibration row.
    #[arg(long = "target-efficiency")]
    target_efficiency: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Optional CSV report path; the report always prints to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => match ConfigMap::load(path) {
            Ok(map) => map,
            Err(e) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
        },
        None => ConfigMap::empty(),
    };
    match dispatch(cli.command, &file) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(command: Command, file: &ConfigMap) -> Result<ExitCode> {
    match command {
        Command::BiasTable(args) => {
            let opts = bias_table_opts(args, file)?;
            bias_table::run_bias_table(&opts)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::ScaleSweep(args) => {
            let opts = scale_sweep_opts(args, file)?;
            scale_sweep::run_scale_sweep(&opts)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::TheoryReport(args) => {
            let opts = theory_report_opts(args, file)?;
            theory_report::run_theory_report(&opts)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let opts = verify::VerifyOpts {
                out: args.out.or_else(|| file.get("out").map(PathBuf::from)),
                seed: resolve(
                    args.seed,
                    file.get_parse("seed")?,
                    verify::VerifyOpts::default().seed,
                ),
            };
            let (_checks, passed) = verify::run_verify(&opts)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

fn bias_table_opts(args: BiasTableArgs, file: &ConfigMap) -> Result<bias_table::BiasTableOpts> {
    let presets = if args.preset.is_empty() {
        file.get_list::<DgpPreset>("preset")?.unwrap_or_default()
    } else {
        args.preset
    };
    let ns = if args.n.is_empty() {
        file.get_list::<usize>("n")?.unwrap_or_default()
    } else {
        args.n
    };
    anyhow::ensure!(!presets.is_empty(), "missing required option `preset`");
    anyhow::ensure!(!ns.is_empty(), "missing required option `n`");
    Ok(bias_table::BiasTableOpts {
        presets,
        ns,
        reps: resolve(args.reps, file.get_parse("reps")?, 10_000),
        scale: resolve(args.scale, file.get_parse("scale")?, bias_table::ScaleMode::Known),
        trim: resolve(args.trim, file.get_parse("trim")?, bias_table::TrimMode::Known),
        seed: resolve(args.seed, file.get_parse("seed")?, 1),
        out: resolve_required(args.out, file.get("out").map(PathBuf::from), "out")?,
        threads: resolve(args.threads, file.get_parse("threads")?, 0),
    })
}

fn scale_sweep_opts(args: ScaleSweepArgs, file: &ConfigMap) -> Result<scale_sweep::ScaleSweepOpts> {
    let grid = if args.sigma_factor_grid.is_empty() {
        file.get_list::<f64>("sigma-factor-grid")?.unwrap_or_default()
    } else {
        args.sigma_factor_grid
    };
    anyhow::ensure!(!grid.is_empty(), "missing required option `sigma-factor-grid`");
    Ok(scale_sweep::ScaleSweepOpts {
        lambda: resolve(args.lambda, file.get_parse("lambda")?, 0.6),
        n: resolve_required(args.n, file.get_parse("n")?, "n")?,
        reps: resolve(args.reps, file.get_parse("reps")?, 10_000),
        grid,
        seed: resolve(args.seed, file.get_parse("seed")?, 1),
        out: resolve_required(args.out, file.get("out").map(PathBuf::from), "out")?,
        threads: resolve(args.threads, file.get_parse("threads")?, 0),
    })
}

fn parse_family(text: &str) -> Result<RhoFamily> {
    match text.trim().to_ascii_lowercase().as_str() {
        "huber" => Ok(RhoFamily::Huber),
        "tukey" => Ok(RhoFamily::Tukey),
        "absolute" => Ok(RhoFamily::Absolute),
        "squared" => Ok(RhoFamily::Squared),
        other => anyhow::bail!("unknown family `{other}` (huber|tukey|absolute|squared)"),
    }
}

fn theory_report_opts(
    args: TheoryReportArgs,
    file: &ConfigMap,
) -> Result<theory_report::TheoryReportOpts> {
    let family_text =
        resolve(args.family, file.get("family").map(str::to_string), "tukey".to_string());
    let law_text =
        resolve(args.good_law, file.get("good-law").map(str::to_string), "normal".to_string());
    let grid = if args.sigma_factor_grid.is_empty() {
        file.get_list::<f64>("sigma-factor-grid")?.unwrap_or_else(|| vec![0.5, 1.0, 1.5, 2.0])
    } else {
        args.sigma_factor_grid
    };
    Ok(theory_report::TheoryReportOpts {
        family: parse_family(&family_text)?,
        tuning: args.tuning.or(file.get_parse("tuning")?),
        lambda: resolve(args.lambda, file.get_parse("lambda")?, 1.0),
        varrho: resolve(args.varrho, file.get_parse("varrho")?, 0.0),
        good_law: law_text
            .parse::<ErrorLaw>()
            .ok()
            .with_context(|| format!("unknown good-law `{law_text}` (normal|t3)"))?,
        grid,
        target_efficiency: resolve(
            args.target_efficiency,
            file.get_parse("target-efficiency")?,
            0.95,
        ),
        out: resolve_required(args.out, file.get("out").map(PathBuf::from), "out")?,
    })
}

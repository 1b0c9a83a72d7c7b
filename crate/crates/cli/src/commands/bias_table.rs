//! Monte Carlo bias tables: one row per (estimator, process, sample size),
//! reporting the signed mean error, its magnitude, and the Monte Carlo
//! standard error.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use robustmc::dgp::{DgpConfig, DgpPreset};
use robustmc::estimators::{
    estimate_trimming, lts_location_scale, m_location, m_location_with_estimated_scale, Sample,
    ScaleMethod,
};
use robustmc::rho::RhoSpec;

use super::{fmt6, write_output, EstimatorKind};
use crate::harness;
use crate::manifest::RunManifest;

/// How the location step obtains its scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Use the true scale of the process.
    Known,
    Iqr,
    Mad,
}

impl FromStr for ScaleMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" => Ok(ScaleMode::Known),
            "iqr" => Ok(ScaleMode::Iqr),
            "mad" => Ok(ScaleMode::Mad),
            other => Err(format!("unknown scale mode `{other}` (known|iqr|mad)")),
        }
    }
}

impl std::fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScaleMode::Known => write!(f, "known"),
            ScaleMode::Iqr => write!(f, "iqr"),
            ScaleMode::Mad => write!(f, "mad"),
        }
    }
}

/// How the trimmed estimator obtains its subset size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrimMode {
    /// 80% of the sample, the benchmark convention.
    Known,
    /// Moment-screen selection from the data.
    Auto,
}

impl FromStr for TrimMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "known" => Ok(TrimMode::Known),
            "auto" => Ok(TrimMode::Auto),
            other => Err(format!("unknown trim mode `{other}` (known|auto)")),
        }
    }
}

impl std::fmt::Display for TrimMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TrimMode::Known => write!(f, "known"),
            TrimMode::Auto => write!(f, "auto"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BiasTableOpts {
    pub presets: Vec<DgpPreset>,
    pub ns: Vec<usize>,
    pub reps: u64,
    pub scale: ScaleMode,
    pub trim: TrimMode,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 uses the rayon default. Never affects output bytes.
    pub threads: usize,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasCell {
    pub preset: DgpPreset,
    pub n: usize,
    pub estimator: &'static str,
    pub bias_mean: f64,
    pub bias_abs: f64,
    pub mc_se: f64,
}

fn estimators_for(scale: ScaleMode) -> Vec<EstimatorKind> {
    match scale {
        // the average and the median do not use a scale estimate; they only
        // appear in the known-scale table
        ScaleMode::Known => vec![
            EstimatorKind::Mean,
            EstimatorKind::Median,
            EstimatorKind::Huber,
            EstimatorKind::Tukey,
            EstimatorKind::Lts,
        ],
        _ => vec![EstimatorKind::Huber, EstimatorKind::Tukey, EstimatorKind::Lts],
    }
}

fn estimate_one(
    kind: EstimatorKind,
    sample: &Sample,
    cfg: &DgpConfig,
    scale: ScaleMode,
    trim: TrimMode,
) -> Result<f64> {
    let mu = match kind {
        EstimatorKind::Mean => m_location(sample, &RhoSpec::squared(), 1.0)?.mu_hat,
        EstimatorKind::Median => m_location(sample, &RhoSpec::absolute(), 1.0)?.mu_hat,
        EstimatorKind::Huber | EstimatorKind::Tukey => {
            let spec = if kind == EstimatorKind::Huber {
                RhoSpec::huber_standard()
            } else {
                RhoSpec::tukey_standard()
            };
            match scale {
                ScaleMode::Known => m_location(sample, &spec, cfg.sigma0())?.mu_hat,
                ScaleMode::Iqr => {
                    m_location_with_estimated_scale(sample, &spec, ScaleMethod::Iqr)?.mu_hat
                }
                ScaleMode::Mad => {
                    m_location_with_estimated_scale(sample, &spec, ScaleMethod::Mad)?.mu_hat
                }
            }
        }
        EstimatorKind::Lts => {
            let h = match trim {
                TrimMode::Known => ((0.8 * sample.len() as f64).round() as usize)
                    .clamp(2, sample.len()),
                TrimMode::Auto => estimate_trimming(sample)?,
            };
            lts_location_scale(sample, h)?.mu_hat
        }
    };
    Ok(mu)
}

/// Runs the table and writes it as CSV. Returns the cells in output order.
pub fn run_bias_table(opts: &BiasTableOpts) -> Result<Vec<BiasCell>> {
    if opts.reps < 100 {
        bail!("reps must be at least 100, got {}", opts.reps);
    }
    if opts.presets.is_empty() || opts.ns.is_empty() {
        bail!("need at least one preset and one sample size");
    }
    let started = Instant::now();
    let pool = harness::make_pool(opts.threads)?;
    let kinds = estimators_for(opts.scale);
    let mut cells = Vec::new();

    for &preset in &opts.presets {
        for &n in &opts.ns {
            let cfg = DgpConfig::preset(preset, n)
                .with_context(|| format!("building {preset} at n = {n}"))?;
            let per_rep = |rep: u64| -> Result<Vec<f64>> {
                let (sample, _good) = cfg.generate(opts.seed ^ rep);
                kinds
                    .iter()
                    .map(|&k| {
                        Ok(estimate_one(k, &sample, &cfg, opts.scale, opts.trim)? - cfg.mu0())
                    })
                    .collect()
            };
            let outcomes: Vec<Result<Vec<f64>>> =
                harness::run_indexed(&pool, opts.reps, per_rep);
            let mut per_estimator: Vec<Vec<f64>> =
                vec![Vec::with_capacity(opts.reps as usize); kinds.len()];
            for outcome in outcomes {
                let estimates =
                    outcome.with_context(|| format!("estimating {preset} at n = {n}"))?;
                for (slot, value) in per_estimator.iter_mut().zip(estimates) {
                    slot.push(value);
                }
            }
            for (kind, errors) in kinds.iter().zip(&per_estimator) {
                let (bias_mean, mc_se) = harness::mean_and_se(errors);
                cells.push(BiasCell {
                    preset,
                    n,
                    estimator: kind.name(),
                    bias_mean,
                    bias_abs: bias_mean.abs(),
                    mc_se,
                });
            }
        }
    }

    let mut manifest = RunManifest::new("bias-table", opts.seed, opts.reps)
        .with("presets", join(&opts.presets))
        .with("ns", join(&opts.ns))
        .with("scale", opts.scale)
        .with("trim", opts.trim);
    manifest.wall_secs = started.elapsed().as_secs_f64();

    let mut csv = String::from("preset,n,estimator,bias_mean,bias_abs,mc_se\n");
    for cell in &cells {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.preset,
            cell.n,
            cell.estimator,
            fmt6(cell.bias_mean),
            fmt6(cell.bias_abs),
            fmt6(cell.mc_se),
        ));
    }
    csv.push_str(&manifest.csv_comment());
    write_output(&opts.out, &csv)?;
    eprintln!("{}", manifest.log_line());
    Ok(cells)
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

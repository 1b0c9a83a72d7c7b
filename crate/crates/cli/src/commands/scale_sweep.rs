//! Bias of the location estimators as a function of the plug-in scale
//! factor, on a contaminated process with a chosen good-observation
//! fraction. Reproduces the boundedness-step picture: the redescending
//! estimator is unbiased near the true scale and locks onto the outliers
//! once the plug-in scale falls below the theoretical threshold.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use robustmc::dgp::{DgpConfig, DgpPreset};
use robustmc::estimators::m_location;
use robustmc::numerics::{self, ErrorLaw};
use robustmc::rho::RhoSpec;
use robustmc::theory;

use super::{fmt6, write_output};
use crate::harness;
use crate::manifest::RunManifest;

#[derive(Debug, Clone)]
pub struct ScaleSweepOpts {
    /// Good-observation fraction, in (1/2, 1].
    pub lambda: f64,
    pub n: usize,
    pub reps: u64,
    /// Plug-in scale factors to sweep.
    pub grid: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub threads: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub varsigma: f64,
    pub estimator: &'static str,
    pub bias_mean: f64,
    pub bias_abs: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    /// Smallest scale factor keeping the redescending estimator bounded,
    /// from the theory module; `None` when there is no contamination.
    pub theory_step: Option<f64>,
    /// Average location of the outlier cluster, `mean(max good + xi)`; the
    /// level the redescending estimator jumps to below the step.
    pub mean_outlier_offset: f64,
}

/// Runs the sweep and writes it as CSV.
pub fn run_scale_sweep(opts: &ScaleSweepOpts) -> Result<SweepReport> {
    if opts.grid.is_empty() {
        bail!("sigma factor grid must be nonempty");
    }
    if opts.grid.iter().any(|&v| v <= 0.0 || v.is_nan() || v.is_infinite()) {
        bail!("sigma factor grid values must be positive");
    }
    if !(opts.lambda > 0.5 && opts.lambda <= 1.0) {
        bail!("lambda must lie in (1/2, 1], got {}", opts.lambda);
    }
    let started = Instant::now();
    let cfg = DgpConfig::preset(DgpPreset::Dgp4, opts.n)
        .and_then(|c| c.with_good_fraction(opts.lambda))
        .context("building the sweep process")?;
    let pool = harness::make_pool(opts.threads)?;
    let huber = RhoSpec::huber_standard();
    let tukey = RhoSpec::tukey_standard();

    // per repetition: mean, median, outlier offset, then (huber, tukey) per
    // grid point; the sample is drawn once and shared across the grid
    let per_rep = |rep: u64| -> Result<Vec<f64>> {
        let (sample, good_idx) = cfg.generate(opts.seed ^ rep);
        let mut out = Vec::with_capacity(3 + 2 * opts.grid.len());
        out.push(m_location(&sample, &RhoSpec::squared(), 1.0)?.mu_hat - cfg.mu0());
        out.push(m_location(&sample, &RhoSpec::absolute(), 1.0)?.mu_hat - cfg.mu0());
        let max_good = good_idx
            .iter()
            .map(|&i| sample.values()[i])
            .fold(f64::NEG_INFINITY, f64::max);
        out.push(max_good + cfg.xi());
        for &varsigma in &opts.grid {
            let sigma = varsigma * cfg.sigma0();
            out.push(m_location(&sample, &huber, sigma)?.mu_hat - cfg.mu0());
            out.push(m_location(&sample, &tukey, sigma)?.mu_hat - cfg.mu0());
        }
        Ok(out)
    };
    let outcomes = harness::run_indexed(&pool, opts.reps, per_rep);
    let width = 3 + 2 * opts.grid.len();
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(opts.reps as usize); width];
    for outcome in outcomes {
        let values = outcome.context("running sweep repetition")?;
        for (slot, v) in columns.iter_mut().zip(values) {
            slot.push(v);
        }
    }

    let (mean_bias, mean_se) = harness::mean_and_se(&columns[0]);
    let (median_bias, median_se) = harness::mean_and_se(&columns[1]);
    let (outlier_offset, _) = harness::mean_and_se(&columns[2]);
    let mut rows = Vec::new();
    for (g, &varsigma) in opts.grid.iter().enumerate() {
        let (huber_bias, huber_se) = harness::mean_and_se(&columns[3 + 2 * g]);
        let (tukey_bias, tukey_se) = harness::mean_and_se(&columns[4 + 2 * g]);
        rows.push(SweepRow {
            varsigma,
            estimator: "mean",
            bias_mean: mean_bias,
            bias_abs: mean_bias.abs(),
            mc_se: mean_se,
        });
        rows.push(SweepRow {
            varsigma,
            estimator: "median",
            bias_mean: median_bias,
            bias_abs: median_bias.abs(),
            mc_se: median_se,
        });
        rows.push(SweepRow {
            varsigma,
            estimator: "huber",
            bias_mean: huber_bias,
            bias_abs: huber_bias.abs(),
            mc_se: huber_se,
        });
        rows.push(SweepRow {
            varsigma,
            estimator: "tukey",
            bias_mean: tukey_bias,
            bias_abs: tukey_bias.abs(),
            mc_se: tukey_se,
        });
    }

    // boundedness step location, published as a computed value
    let theory_step = if opts.lambda < 1.0 {
        Some(
            numerics::find_root(
                |vs| {
                    theory::boundedness_threshold_lambda(&tukey, vs, ErrorLaw::StandardNormal)
                        .expect("redescending spec")
                        - opts.lambda
                },
                0.01,
                10.0,
                theory::ROOT_TOL,
            )
            .context("locating the boundedness step")?,
        )
    } else {
        None
    };

    let mut manifest = RunManifest::new("scale-sweep", opts.seed, opts.reps)
        .with("lambda", opts.lambda)
        .with("n", opts.n)
        .with(
            "sigma-factor-grid",
            opts.grid.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
        );
    manifest.wall_secs = started.elapsed().as_secs_f64();

    let mut csv = String::from("varsigma,estimator,bias_mean,bias_abs,mc_se\n");
    for row in &rows {
        csv.push_str(&format!(
            "{:.4},{},{},{},{}\n",
            row.varsigma,
            row.estimator,
            fmt6(row.bias_mean),
            fmt6(row.bias_abs),
            fmt6(row.mc_se),
        ));
    }
    if let Some(step) = theory_step {
        csv.push_str(&format!(",theory_step_varsigma,{},,\n", fmt6(step)));
    }
    csv.push_str(&format!(",mean_outlier_offset,{},,\n", fmt6(outlier_offset)));
    csv.push_str(&manifest.csv_comment());
    write_output(&opts.out, &csv)?;
    eprintln!("{}", manifest.log_line());

    Ok(SweepReport { rows, theory_step, mean_outlier_offset: outlier_offset })
}

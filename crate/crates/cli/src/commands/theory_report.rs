//! Theory report: consistency factors for the contaminated scale
//! estimators, boundedness thresholds over a scale-factor grid, asymptotic
//! variances and efficiencies, and calibrated tuning constants. Each row is
//! labeled with the formula it evaluates.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};

use robustmc::numerics::ErrorLaw;
use robustmc::rho::{RhoFamily, RhoSpec};
use robustmc::theory::{self, ContaminationGeometry};

use super::write_output;
use crate::manifest::RunManifest;

#[derive(Debug, Clone)]
pub struct TheoryReportOpts {
    pub family: RhoFamily,
    /// Tuning constant; defaults to the family's 95%-efficiency standard.
    pub tuning: Option<f64>,
    pub lambda: f64,
    pub varrho: f64,
    pub good_law: ErrorLaw,
    pub grid: Vec<f64>,
    /// Efficiency target for the calibration row.
    pub target_efficiency: f64,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoryRow {
    pub quantity: String,
    pub varsigma: Option<f64>,
    /// Computed value, or the error text when the regime rejects the query.
    pub value: Result<f64, String>,
    pub formula: &'static str,
}

impl TheoryRow {
    fn plain(quantity: &str, value: Result<f64, String>, formula: &'static str) -> Self {
        TheoryRow { quantity: quantity.to_string(), varsigma: None, value, formula }
    }

    fn at(quantity: &str, varsigma: f64, value: Result<f64, String>, formula: &'static str) -> Self {
        TheoryRow { quantity: quantity.to_string(), varsigma: Some(varsigma), value, formula }
    }
}

fn spec_for(family: RhoFamily, tuning: Option<f64>) -> Result<RhoSpec> {
    Ok(match family {
        RhoFamily::Huber => match tuning {
            Some(c) => RhoSpec::huber(c)?,
            None => RhoSpec::huber_standard(),
        },
        RhoFamily::Tukey => match tuning {
            Some(c) => RhoSpec::tukey(c)?,
            None => RhoSpec::tukey_standard(),
        },
        RhoFamily::Absolute => RhoSpec::absolute(),
        RhoFamily::Squared => RhoSpec::squared(),
    })
}

fn stringify<T>(r: Result<T, theory::TheoryError>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Computes the report and writes it as CSV.
pub fn run_theory_report(opts: &TheoryReportOpts) -> Result<Vec<TheoryRow>> {
    if opts.grid.iter().any(|&v| v <= 0.0 || v.is_nan() || v.is_infinite()) {
        bail!("sigma factor grid values must be positive");
    }
    let started = Instant::now();
    let spec = spec_for(opts.family, opts.tuning)?;
    let geometry = ContaminationGeometry::new(opts.lambda, opts.varrho, opts.good_law)
        .map_err(|e| anyhow::anyhow!("{e}"))?;

    let mut rows = Vec::new();
    rows.push(TheoryRow::plain(
        "consistency_factor_iqr",
        stringify(theory::consistency_factor_iqr(&geometry)),
        "(qF((3/4-varrho)/lambda) - qF((1/4-varrho)/lambda)) / (qPhi(3/4) - qPhi(1/4))",
    ));
    rows.push(TheoryRow::plain(
        "consistency_factor_mad",
        stringify(theory::consistency_factor_mad(&geometry)),
        "d/qPhi(3/4) where F(c+d)-F(c-d)=1/(2 lambda), F(c)=(1/2-varrho)/lambda",
    ));
    for &varsigma in &opts.grid {
        rows.push(TheoryRow::at(
            "rho_tilde",
            varsigma,
            stringify(theory::rho_tilde(&spec, varsigma, opts.good_law)),
            "E rho(x/varsigma) under the good-error law",
        ));
        rows.push(TheoryRow::at(
            "boundedness_threshold_lambda",
            varsigma,
            stringify(theory::boundedness_threshold_lambda(&spec, varsigma, opts.good_law)),
            "1/(2 - rho_tilde/rho_star)",
        ));
        let variance = stringify(theory::asymptotic_variance(&spec, varsigma, opts.good_law));
        rows.push(TheoryRow::at(
            "asymptotic_variance",
            varsigma,
            variance.clone(),
            "varsigma^2 E psi(x/varsigma)^2 / (E psi'(x/varsigma))^2",
        ));
        rows.push(TheoryRow::at(
            "efficiency",
            varsigma,
            variance.map(|v| 1.0 / v),
            "1 / asymptotic_variance",
        ));
    }
    rows.push(TheoryRow::plain(
        "calibrated_tuning",
        stringify(theory::calibrate_tuning(opts.family, opts.target_efficiency)),
        "c solving efficiency(c) = target under the clean normal model",
    ));

    let mut manifest = RunManifest::new("theory-report", 0, 0)
        .with("family", opts.family)
        .with("tuning", spec.tuning().map(|c| c.to_string()).unwrap_or_default())
        .with("lambda", opts.lambda)
        .with("varrho", opts.varrho)
        .with("good-law", opts.good_law)
        .with("target-efficiency", opts.target_efficiency);
    manifest.wall_secs = started.elapsed().as_secs_f64();

    let mut csv = String::from("quantity,varsigma,value,formula\n");
    for row in &rows {
        let vs = row.varsigma.map(|v| format!("{v:.4}")).unwrap_or_default();
        let value = match &row.value {
            Ok(v) => format!("{v:.10}"),
            Err(e) => format!("error: {e}"),
        };
        csv.push_str(&format!("{},{vs},{value},\"{}\"\n", row.quantity, row.formula));
    }
    csv.push_str(&manifest.csv_comment());
    write_output(&opts.out, &csv)?;
    eprintln!("{}", manifest.log_line());
    Ok(rows)
}

//! The oracle suite: independent cross-checks of the numerical kernels.
//! Nonzero exit when any check fails; the report lists every check with its
//! tolerance and the observed gap.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;

use robustmc::dgp::SplitMix64;
use robustmc::estimators::{
    lts_location_scale, m_location, scale_iqr, scale_mad, Sample,
};
use robustmc::numerics::{self, ErrorLaw};
use robustmc::rho::RhoSpec;
use robustmc::theory;

use super::write_output;
use crate::manifest::RunManifest;

#[derive(Debug, Clone)]
pub struct VerifyOpts {
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl Default for VerifyOpts {
    fn default() -> Self {
        VerifyOpts { out: None, seed: 0x00BA_C1E5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub tolerance: f64,
    pub observed: f64,
    pub passed: bool,
}

impl CheckResult {
    fn gap(name: &'static str, observed: f64, tolerance: f64) -> Self {
        CheckResult { name, tolerance, observed, passed: observed <= tolerance }
    }
}

/// Runs every oracle check. Returns the per-check results and whether the
/// whole suite passed.
pub fn run_verify(opts: &VerifyOpts) -> Result<(Vec<CheckResult>, bool)> {
    let started = Instant::now();
    let checks = vec![
        quantile_round_trip(),
        root_finder_recovers_quartile(),
        lts_against_exhaustive_subsets(opts.seed),
        quadrature_against_monte_carlo(opts.seed),
        equivariance_under_random_transforms(opts.seed),
    ];

    let passed = checks.iter().all(|c| c.passed);
    let mut manifest = RunManifest::new("verify", opts.seed, 0);
    manifest.wall_secs = started.elapsed().as_secs_f64();

    let mut csv = String::from("check,tolerance,observed,status\n");
    for c in &checks {
        csv.push_str(&format!(
            "{},{:.3e},{:.3e},{}\n",
            c.name,
            c.tolerance,
            c.observed,
            if c.passed { "pass" } else { "FAIL" }
        ));
    }
    csv.push_str(&manifest.csv_comment());
    if let Some(path) = &opts.out {
        write_output(path, &csv)?;
    }
    print!("{csv}");
    eprintln!("{}", manifest.log_line());
    Ok((checks, passed))
}

/// Quantile then CDF must return the starting probability for both laws.
fn quantile_round_trip() -> CheckResult {
    let mut worst: f64 = 0.0;
    for law in [ErrorLaw::StandardNormal, ErrorLaw::StudentT3] {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            let x = law.quantile(p).expect("interior probability");
            worst = worst.max((law.cdf(x) - p).abs());
        }
    }
    CheckResult::gap("quantile_cdf_round_trip", worst, 1e-9)
}

/// The bracketed root of `Phi(d) - Phi(-d) = 1/2` is the upper quartile.
fn root_finder_recovers_quartile() -> CheckResult {
    let law = ErrorLaw::StandardNormal;
    let root = numerics::find_root(|d| law.cdf(d) - law.cdf(-d) - 0.5, 0.0, 3.0, 1e-12)
        .expect("bracket holds a root");
    let q75 = law.quantile(0.75).expect("interior probability");
    CheckResult::gap("root_finder_upper_quartile", (root - q75).abs(), 1e-6)
}

/// The rolling-window optimum must match brute force over all subsets on
/// 100 seeded small samples. Observed value is the count of mismatches.
fn lts_against_exhaustive_subsets(seed: u64) -> CheckResult {
    let mut rng = SplitMix64::new(seed ^ 0x17);
    let mut mismatches = 0.0;
    for _ in 0..100 {
        let n = 8 + (rng.next_u64() % 7) as usize; // 8..=14
        let h = 2 + (rng.next_u64() % (n as u64 - 1)) as usize;
        let values: Vec<f64> = (0..n).map(|_| rng.next_unit() * 40.0 - 20.0).collect();
        let s = Sample::new(values.clone()).expect("finite values");
        let fast = lts_location_scale(&s, h).expect("valid h").objective;
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != h {
                continue;
            }
            let (mut sum, mut sum2) = (0.0, 0.0);
            for (i, &v) in values.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sum += v;
                    sum2 += v * v;
                }
            }
            best = best.min(sum2 - sum * sum / h as f64);
        }
        if (fast - best).abs() > 1e-9 * best.abs().max(1.0) {
            mismatches += 1.0;
        }
    }
    CheckResult::gap("lts_window_vs_exhaustive", mismatches, 0.0)
}

/// Quadrature expectation of the bounded loss against a 10^7-draw Monte
/// Carlo average; the gap must sit inside three standard errors.
fn quadrature_against_monte_carlo(seed: u64) -> CheckResult {
    let spec = RhoSpec::tukey_standard();
    let quad = theory::rho_tilde(&spec, 1.0, ErrorLaw::StandardNormal)
        .expect("normal-law expectation converges");
    let draws: u64 = 10_000_000;
    let mut rng = SplitMix64::new(seed ^ 0x4DC0);
    let mut sum = 0.0;
    let mut sum2 = 0.0;
    for _ in 0..draws {
        let z = ErrorLaw::StandardNormal
            .quantile(rng.next_unit())
            .expect("interior probability");
        let v = spec.rho(z);
        sum += v;
        sum2 += v * v;
    }
    let nf = draws as f64;
    let mc_mean = sum / nf;
    let mc_se = ((sum2 / nf - mc_mean * mc_mean) / nf).sqrt();
    CheckResult::gap("quadrature_vs_monte_carlo", (quad - mc_mean).abs(), 3.0 * mc_se)
}

/// Location and scale estimates must commute with 1000 random affine maps.
fn equivariance_under_random_transforms(seed: u64) -> CheckResult {
    let mut rng = SplitMix64::new(seed ^ 0xE9);
    let law = ErrorLaw::StandardNormal;
    let mut base_values: Vec<f64> =
        (0..80).map(|_| law.quantile(rng.next_unit()).expect("interior")).collect();
    for v in base_values.iter_mut().take(12) {
        *v += 7.0; // give the redescender something to reject
    }
    let s = Sample::new(base_values.clone()).expect("finite values");
    let specs = [RhoSpec::absolute(), RhoSpec::huber_standard(), RhoSpec::tukey_standard()];
    let base_mu: Vec<f64> = specs
        .iter()
        .map(|spec| m_location(&s, spec, 1.0).expect("valid scale").mu_hat)
        .collect();
    let base_lts = lts_location_scale(&s, 60).expect("valid h");
    let base_iqr = scale_iqr(&s).expect("nondegenerate");
    let base_mad = scale_mad(&s).expect("nondegenerate");

    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = rng.next_unit() * 200.0 - 100.0;
        let b = 0.1 + rng.next_unit() * 9.9;
        let moved =
            Sample::new(base_values.iter().map(|y| a + b * y).collect()).expect("finite");
        for (spec, &mu) in specs.iter().zip(&base_mu) {
            let got = m_location(&moved, spec, b).expect("valid scale").mu_hat;
            worst = worst.max((got - (a + b * mu)).abs() / (1.0 + a.abs() + b * mu.abs()));
        }
        let lts = lts_location_scale(&moved, 60).expect("valid h");
        worst = worst.max(
            (lts.mu_hat - (a + b * base_lts.mu_hat)).abs()
                / (1.0 + a.abs() + b * base_lts.mu_hat.abs()),
        );
        let iqr = scale_iqr(&moved).expect("nondegenerate");
        worst = worst.max((iqr - b * base_iqr).abs() / (1.0 + b * base_iqr));
        let mad = scale_mad(&moved).expect("nondegenerate");
        worst = worst.max((mad - b * base_mad).abs() / (1.0 + b * base_mad));
    }
    CheckResult::gap("affine_equivariance", worst, 1e-8)
}

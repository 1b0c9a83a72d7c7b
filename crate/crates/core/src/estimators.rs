//! Location M-estimation with plug-in scale, the IQR/MAD robust scale
//! estimators, exact one-dimensional least trimmed squares, and a
//! moment-screen selector for the trimming count.
//!
//! All estimators are pure functions of `(sample, parameters)`. A [`Sample`]
//! is immutable after construction and keeps its sorted order cached, so the
//! order-statistic machinery (quantiles, LTS windows, Tukey grid scan) costs
//! one sort per sample.

use std::sync::OnceLock;

use thiserror::Error;

use crate::numerics::{ErrorLaw, NumericsError};
use crate::rho::{RhoFamily, RhoSpec};

/// Grid density of the Tukey global scan; recorded in
/// [`EstimateReport::n_candidates`] so runs can be audited.
pub const TUKEY_GRID_POINTS: usize = 2048;
const TUKEY_REFINE_CANDIDATES: usize = 5;
const TUKEY_REFINE_WIDTH: f64 = 1e-10;
const IRLS_TOL: f64 = 1e-12;
const IRLS_MAX_ITER: usize = 200;

/// Moment-screen thresholds of the trimming selector, calibrated so clean
/// normal samples at n = 400 keep the full sample with probability >= 0.9.
pub const TRIM_SKEWNESS_MAX: f64 = 0.35;
pub const TRIM_EXCESS_KURTOSIS_MAX: f64 = 0.8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EstimatorError {
    #[error("sample must be nonempty")]
    EmptySample,
    #[error("sample value at index {0} is not finite")]
    NonFinite(usize),
    #[error("probability {0} outside (0, 1)")]
    ProbabilityOutOfRange(f64),
    #[error("need at least {need} observations, got {got}")]
    TooFewObservations { need: usize, got: usize },
    #[error("degenerate scale: {0}")]
    DegenerateScale(&'static str),
    #[error("plug-in scale must be positive and finite, got {0}")]
    NonPositiveScale(f64),
    #[error("trimming count {h} outside [{min}, {max}]")]
    TrimmingOutOfRange { h: usize, min: usize, max: usize },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// An ordered sequence of finite observations with a cached sorted view.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    sorted: Vec<f64>,
}

impl Sample {
    /// Validates that the data is nonempty and finite, and caches the
    /// sorted order.
    pub fn new(values: Vec<f64>) -> Result<Self, EstimatorError> {
        if values.is_empty() {
            return Err(EstimatorError::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(EstimatorError::NonFinite(i));
        }
        let mut sorted = values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        Ok(Sample { values, sorted })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The same values in nondecreasing order.
    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty data
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }
}

/// Which robust scale estimator feeds the location step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMethod {
    Iqr,
    Mad,
}

impl std::fmt::Display for ScaleMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScaleMethod::Iqr => write!(f, "iqr"),
            ScaleMethod::Mad => write!(f, "mad"),
        }
    }
}

/// Location/scale estimate with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    /// Location estimate.
    pub mu_hat: f64,
    /// Scale used or estimated alongside the location, when one exists.
    pub sigma_hat: Option<f64>,
    /// Objective value at `mu_hat`, recomputed from the inputs.
    pub objective: f64,
    /// Candidates examined: grid density for the Tukey scan, iteration
    /// count for IRLS, scanned windows for LTS, 1 for closed forms.
    pub n_candidates: usize,
    /// Whether the solver met its tolerance.
    pub converged: bool,
}

/// Standard normal upper quartile, computed from the numerics module once.
fn normal_q75() -> f64 {
    static Q75: OnceLock<f64> = OnceLock::new();
    *Q75.get_or_init(|| {
        ErrorLaw::StandardNormal
            .quantile(0.75)
            .expect("0.75 is a valid probability")
    })
}

/// Order-statistic sample quantile: the `ceil(n p)`-th smallest value.
///
/// The median of an even-sized sample is the average of the two central
/// order statistics.
pub fn quantile_of_sample(s: &Sample, p: f64) -> Result<f64, EstimatorError> {
    if !(p > 0.0 && p < 1.0) {
        return Err(EstimatorError::ProbabilityOutOfRange(p));
    }
    let n = s.len();
    let sorted = s.sorted();
    if p == 0.5 && n.is_multiple_of(2) {
        return Ok(0.5 * (sorted[n / 2 - 1] + sorted[n / 2]));
    }
    let k = ((n as f64 * p).ceil() as usize).clamp(1, n);
    Ok(sorted[k - 1])
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n.is_multiple_of(2) {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    } else {
        sorted[n / 2]
    }
}

/// Interquartile-range scale estimate, normalized to be consistent under
/// the normal law.
pub fn scale_iqr(s: &Sample) -> Result<f64, EstimatorError> {
    if s.len() < 4 {
        return Err(EstimatorError::TooFewObservations { need: 4, got: s.len() });
    }
    let q1 = quantile_of_sample(s, 0.25)?;
    let q3 = quantile_of_sample(s, 0.75)?;
    if q3 <= q1 {
        return Err(EstimatorError::DegenerateScale("interquartile range is zero"));
    }
    Ok((q3 - q1) / (2.0 * normal_q75()))
}

/// Median-absolute-deviation scale estimate, normalized to be consistent
/// under the normal law (the usual 1.4826 factor, computed not hard-coded).
pub fn scale_mad(s: &Sample) -> Result<f64, EstimatorError> {
    if s.len() < 2 {
        return Err(EstimatorError::TooFewObservations { need: 2, got: s.len() });
    }
    let med = median_of_sorted(s.sorted());
    let mut deviations: Vec<f64> = s.values().iter().map(|y| (y - med).abs()).collect();
    deviations.sort_unstable_by(f64::total_cmp);
    let mad = median_of_sorted(&deviations);
    if mad <= 0.0 {
        return Err(EstimatorError::DegenerateScale("median absolute deviation is zero"));
    }
    Ok(mad / normal_q75())
}

/// M-estimate of location with a fixed plug-in scale: the global minimizer
/// of `sum_i rho((y_i - mu) / sigma)`.
///
/// Convex families (absolute, squared, Huber) are solved by their closed
/// form or by IRLS; the redescending Tukey objective is globally scanned on
/// a uniform grid over the data range and the best grid points are refined
/// by golden-section search. Exactly tied minima resolve to the smallest
/// location.
pub fn m_location(s: &Sample, spec: &RhoSpec, sigma: f64) -> Result<EstimateReport, EstimatorError> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(EstimatorError::NonPositiveScale(sigma));
    }
    let (mu_hat, n_candidates, converged) = match spec.family() {
        RhoFamily::Squared => {
            let mean = s.values().iter().sum::<f64>() / s.len() as f64;
            (mean, 1, true)
        }
        RhoFamily::Absolute => (median_of_sorted(s.sorted()), 1, true),
        RhoFamily::Huber => {
            let c = spec.tuning().expect("huber carries a tuning constant");
            huber_irls(s.values(), c, sigma, median_of_sorted(s.sorted()))
        }
        RhoFamily::Tukey => {
            let c = spec.tuning().expect("tukey carries a tuning constant");
            tukey_global_scan(s.sorted(), c, sigma)
        }
    };
    let objective = objective_value(s.values(), spec, sigma, mu_hat);
    Ok(EstimateReport { mu_hat, sigma_hat: None, objective, n_candidates, converged })
}

/// M-estimate of location with the scale estimated from the same sample.
pub fn m_location_with_estimated_scale(
    s: &Sample,
    spec: &RhoSpec,
    method: ScaleMethod,
) -> Result<EstimateReport, EstimatorError> {
    let sigma = match method {
        ScaleMethod::Iqr => scale_iqr(s)?,
        ScaleMethod::Mad => scale_mad(s)?,
    };
    let mut report = m_location(s, spec, sigma)?;
    report.sigma_hat = Some(sigma);
    Ok(report)
}

/// Sum of losses at a candidate location; the objective the M-estimators
/// minimize.
pub fn objective_value(values: &[f64], spec: &RhoSpec, sigma: f64, mu: f64) -> f64 {
    let inv = 1.0 / sigma;
    values.iter().map(|y| spec.rho((y - mu) * inv)).sum()
}

fn huber_irls(values: &[f64], c: f64, sigma: f64, start: f64) -> (f64, usize, bool) {
    let mut mu = start;
    for iter in 1..=IRLS_MAX_ITER {
        let mut weight_sum = 0.0;
        let mut weighted = 0.0;
        for &y in values {
            let a = ((y - mu) / sigma).abs();
            let w = if a <= c { 1.0 } else { c / a };
            weight_sum += w;
            weighted += w * y;
        }
        let next = weighted / weight_sum;
        let delta = (next - mu).abs();
        mu = next;
        if delta < IRLS_TOL {
            return (mu, iter, true);
        }
    }
    (mu, IRLS_MAX_ITER, false)
}

/// Cumulative sums of the first `K` powers: entry `i` holds
/// `sum_{j < i} v_j^k` for `k = 1..=K`.
fn power_prefix<const K: usize>(values: &[f64]) -> Vec<[f64; K]> {
    let mut out = Vec::with_capacity(values.len() + 1);
    let mut acc = [0.0_f64; K];
    out.push(acc);
    for &v in values {
        let mut p = 1.0;
        for slot in acc.iter_mut() {
            p *= v;
            *slot += p;
        }
        out.push(acc);
    }
    out
}

/// Tukey objective by direct summation, written branch-free so the loop
/// vectorizes.
fn tukey_objective(values: &[f64], c: f64, sigma: f64, mu: f64) -> f64 {
    let inv = 1.0 / (c * sigma);
    let mut acc = 0.0;
    for &y in values {
        let z = (y - mu) * inv;
        let u = (z * z).min(1.0);
        let t = 1.0 - u;
        acc += 1.0 - t * t * t;
    }
    c * c / 6.0 * acc
}

/// Global Tukey scan: evaluate the objective on a uniform grid over the
/// data range, keep the best few grid points, refine each by golden-section
/// and return the best refinement (the smallest location on exact ties).
///
/// Grid values are computed from windowed power sums over the sorted data
/// (the loss is a sixth-degree polynomial inside `|y - mu| <= c sigma` and
/// flat outside), which makes the scan O(grid + n); the refinement and the
/// reported objective use direct summation, so grid rounding only affects
/// candidate selection.
fn tukey_global_scan(sorted: &[f64], c: f64, sigma: f64) -> (f64, usize, bool) {
    let n = sorted.len();
    let lo = sorted[0];
    let hi = sorted[n - 1];
    if lo == hi {
        return (lo, 1, true);
    }

    // center on the median to keep the high power sums conditioned
    let shift = median_of_sorted(sorted);
    let centered: Vec<f64> = sorted.iter().map(|y| y - shift).collect();
    let prefix = power_prefix::<6>(&centered);

    let g_lo = lo - shift;
    let g_hi = hi - shift;
    let step = (g_hi - g_lo) / (TUKEY_GRID_POINTS - 1) as f64;
    let window = c * sigma;
    let rho_star = c * c / 6.0;
    let a1 = 0.5 / (sigma * sigma);
    let a2 = -0.5 / (c * c * sigma.powi(4));
    let a3 = 1.0 / (6.0 * c.powi(4) * sigma.powi(6));

    // best candidates as (objective, grid index), ascending; ties keep the
    // earlier (smaller) grid point
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(TUKEY_REFINE_CANDIDATES + 1);
    let mut lo_idx = 0usize;
    let mut hi_idx = 0usize;
    for j in 0..TUKEY_GRID_POINTS {
        let mu = if j + 1 == TUKEY_GRID_POINTS { g_hi } else { g_lo + step * j as f64 };
        while lo_idx < n && centered[lo_idx] < mu - window {
            lo_idx += 1;
        }
        while hi_idx < n && centered[hi_idx] <= mu + window {
            hi_idx += 1;
        }
        let cnt = (hi_idx - lo_idx) as f64;
        let d = |k: usize| prefix[hi_idx][k - 1] - prefix[lo_idx][k - 1];
        let (mu2, mu3) = (mu * mu, mu * mu * mu);
        let s2 = d(2) - 2.0 * mu * d(1) + mu2 * cnt;
        let s4 = d(4) - 4.0 * mu * d(3) + 6.0 * mu2 * d(2) - 4.0 * mu3 * d(1) + mu2 * mu2 * cnt;
        let s6 = d(6) - 6.0 * mu * d(5) + 15.0 * mu2 * d(4) - 20.0 * mu3 * d(3)
            + 15.0 * mu2 * mu2 * d(2)
            - 6.0 * mu2 * mu3 * d(1)
            + mu3 * mu3 * cnt;
        let r = rho_star * (n as f64 - cnt) + a1 * s2 + a2 * s4 + a3 * s6;

        let pos = best.partition_point(|&(v, _)| v <= r);
        if pos < TUKEY_REFINE_CANDIDATES {
            best.insert(pos, (r, j));
            best.truncate(TUKEY_REFINE_CANDIDATES);
        }
    }

    let mut winner: Option<(f64, f64, bool)> = None; // (mu, objective, converged)
    for &(_, j) in &best {
        let center = if j + 1 == TUKEY_GRID_POINTS { g_hi } else { g_lo + step * j as f64 };
        let (mut x, mut fx, converged) = golden_section_min(
            |m| tukey_objective(&centered, c, sigma, m),
            center - step,
            center + step,
            TUKEY_REFINE_WIDTH,
        );
        // The loss is C^2, so the located minimum satisfies the score
        // equation; a safeguarded Newton polish removes the comparison
        // noise floor of golden-section and keeps affine equivariance at
        // machine precision.
        let polished = newton_polish(&centered, c, sigma, x, step);
        let f_polished = tukey_objective(&centered, c, sigma, polished);
        // accept up to summation noise; the exact-arithmetic value at the
        // score root is never worse than the golden-section midpoint
        if f_polished <= fx + 1e-12 * fx.abs().max(1.0) {
            x = polished;
            fx = f_polished.min(fx);
        }
        let better = match winner {
            None => true,
            Some((wx, wf, _)) => fx < wf || (fx == wf && x < wx),
        };
        if better {
            winner = Some((x, fx, converged));
        }
    }
    let (x, _, converged) = winner.expect("grid produced at least one candidate");
    (x + shift, TUKEY_GRID_POINTS, converged)
}

/// Newton iteration on the score `sum_i psi((y_i - mu)/sigma) = 0` around a
/// located minimum; steps are rejected once they leave the bracket that the
/// grid identified, or when the local curvature is not positive.
fn newton_polish(values: &[f64], c: f64, sigma: f64, start: f64, radius: f64) -> f64 {
    let mut mu = start;
    for _ in 0..4 {
        let mut score = 0.0;
        let mut curvature = 0.0;
        for &y in values {
            let r = (y - mu) / sigma;
            let u = (r / c) * (r / c);
            if u < 1.0 {
                let t = 1.0 - u;
                score += r * t * t;
                curvature += t * (1.0 - 5.0 * u);
            }
        }
        if curvature <= 0.0 {
            break;
        }
        let delta = sigma * score / curvature;
        let next = mu + delta;
        if (next - start).abs() > radius || !next.is_finite() {
            break;
        }
        mu = next;
        if delta.abs() <= 1e-13 * mu.abs().max(1.0) {
            break;
        }
    }
    mu
}

/// Golden-section minimization to a bracket width `width`; returns the
/// bracket midpoint, its objective, and whether the width was reached.
fn golden_section_min<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, width: f64) -> (f64, f64, bool) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    const INV_PHI2: f64 = 0.381_966_011_250_105_1;
    let mut x1 = a + INV_PHI2 * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while b - a > width && iterations < 200 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + INV_PHI2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let mid = 0.5 * (a + b);
    (mid, f(mid), b - a <= width)
}

/// Exact least trimmed squares for location and scale.
///
/// The variance-minimizing `h`-subset of a scalar sample is contiguous in
/// sorted order, so the exact optimum is found by scanning the `n - h + 1`
/// windows of the sorted view with rolling sums. Ties break toward the
/// window with the smaller left index.
pub fn lts_location_scale(s: &Sample, h: usize) -> Result<EstimateReport, EstimatorError> {
    let n = s.len();
    if h < 2 || h > n {
        return Err(EstimatorError::TrimmingOutOfRange { h, min: 2, max: n });
    }
    let prefix = power_prefix::<2>(s.sorted());
    let hf = h as f64;
    let mut best_j = 0usize;
    let mut best_rss = f64::INFINITY;
    for j in 0..=(n - h) {
        let s1 = prefix[j + h][0] - prefix[j][0];
        let s2 = prefix[j + h][1] - prefix[j][1];
        let rss = s2 - s1 * s1 / hf;
        if rss < best_rss {
            best_rss = rss;
            best_j = j;
        }
    }
    let s1 = prefix[best_j + h][0] - prefix[best_j][0];
    let mu = s1 / hf;
    let rss = best_rss.max(0.0);
    Ok(EstimateReport {
        mu_hat: mu,
        sigma_hat: Some((rss / hf).sqrt()),
        objective: rss,
        n_candidates: n - h + 1,
        converged: true,
    })
}

/// Chooses a trimming count by forward search: starting from `h = n`, keep
/// shrinking while the variance-minimizing window of length `h` fails a
/// moment-based normality screen (standardized skewness and excess kurtosis
/// within fixed thresholds). Returns the largest passing `h`, never below
/// `ceil(n / 2)`.
///
/// This is a documented surrogate for an external trimming estimator; it is
/// deterministic given the sample.
pub fn estimate_trimming(s: &Sample) -> Result<usize, EstimatorError> {
    let n = s.len();
    if n < 8 {
        return Err(EstimatorError::TooFewObservations { need: 8, got: n });
    }
    let prefix = power_prefix::<4>(s.sorted());
    let h_min = n.div_ceil(2);
    for h in (h_min..=n).rev() {
        let hf = h as f64;
        let mut best_j = 0usize;
        let mut best_rss = f64::INFINITY;
        for j in 0..=(n - h) {
            let s1 = prefix[j + h][0] - prefix[j][0];
            let s2 = prefix[j + h][1] - prefix[j][1];
            let rss = s2 - s1 * s1 / hf;
            if rss < best_rss {
                best_rss = rss;
                best_j = j;
            }
        }
        let d = |k: usize| prefix[best_j + h][k - 1] - prefix[best_j][k - 1];
        let mean = d(1) / hf;
        let m2 = d(2) / hf - mean * mean;
        if m2 <= 0.0 {
            continue;
        }
        let m3 = d(3) / hf - 3.0 * mean * (d(2) / hf) + 2.0 * mean.powi(3);
        let m4 = d(4) / hf - 4.0 * mean * (d(3) / hf) + 6.0 * mean * mean * (d(2) / hf)
            - 3.0 * mean.powi(4);
        let skewness = m3 / m2.powf(1.5);
        let excess_kurtosis = m4 / (m2 * m2) - 3.0;
        if skewness.abs() < TRIM_SKEWNESS_MAX && excess_kurtosis.abs() < TRIM_EXCESS_KURTOSIS_MAX {
            return Ok(h);
        }
    }
    Ok(h_min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::SplitMix64;

    fn sample(values: &[f64]) -> Sample {
        Sample::new(values.to_vec()).unwrap()
    }

    #[test]
    fn sample_rejects_bad_input() {
        assert!(matches!(Sample::new(vec![]), Err(EstimatorError::EmptySample)));
        assert!(matches!(Sample::new(vec![1.0, f64::NAN]), Err(EstimatorError::NonFinite(1))));
        assert!(matches!(
            Sample::new(vec![f64::INFINITY]),
            Err(EstimatorError::NonFinite(0))
        ));
    }

    #[test]
    fn sample_quantile_conventions() {
        assert_eq!(quantile_of_sample(&sample(&[1.0, 2.0, 3.0, 4.0, 5.0]), 0.5).unwrap(), 3.0);
        assert_eq!(quantile_of_sample(&sample(&[1.0, 2.0, 3.0, 4.0]), 0.5).unwrap(), 2.5);
        // ceil(8 * 0.25) = 2nd smallest
        let s = sample(&[3.0, 1.0, 4.0, 1.0, 5.0, 9.0, 2.0, 6.0]);
        assert_eq!(quantile_of_sample(&s, 0.25).unwrap(), 1.0);
        assert!(quantile_of_sample(&s, 0.0).is_err());
        assert!(quantile_of_sample(&s, 1.0).is_err());
    }

    #[test]
    fn mad_known_value() {
        let s = sample(&[-1.0, 0.0, 1.0]);
        let expected = 1.0 / 0.6744897501960817;
        assert!((scale_mad(&s).unwrap() - expected).abs() < 1e-3);
        assert!((scale_mad(&s).unwrap() - 1.4826).abs() < 1e-3);
    }

    #[test]
    fn degenerate_scales_error() {
        let constant = sample(&[2.0; 8]);
        assert!(matches!(scale_iqr(&constant), Err(EstimatorError::DegenerateScale(_))));
        assert!(matches!(scale_mad(&constant), Err(EstimatorError::DegenerateScale(_))));
        assert!(scale_iqr(&sample(&[1.0, 2.0, 3.0])).is_err()); // n < 4
    }

    #[test]
    fn scales_normalize_on_large_normal_sample() {
        let mut rng = SplitMix64::new(0xD0E1);
        let law = ErrorLaw::StandardNormal;
        let values: Vec<f64> =
            (0..10_000).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
        let s = Sample::new(values).unwrap();
        assert!((scale_iqr(&s).unwrap() - 1.0).abs() < 0.05);
        assert!((scale_mad(&s).unwrap() - 1.0).abs() < 0.05);
    }

    #[test]
    fn median_and_mean_closed_forms() {
        let s = sample(&[1.0, 2.0, 3.0]);
        let med = m_location(&s, &RhoSpec::absolute(), 7.3).unwrap();
        assert_eq!(med.mu_hat, 2.0);

        let mean = m_location(&s, &RhoSpec::squared(), 1.0).unwrap();
        assert!((mean.mu_hat - 2.0).abs() < 1e-15);
        assert!(mean.converged);
    }

    #[test]
    fn median_equals_sample_quantile_for_odd_n() {
        let mut rng = SplitMix64::new(77);
        for _ in 0..50 {
            let values: Vec<f64> = (0..31).map(|_| rng.next_unit() * 10.0 - 5.0).collect();
            let s = Sample::new(values).unwrap();
            let med = m_location(&s, &RhoSpec::absolute(), 1.0).unwrap().mu_hat;
            assert_eq!(med, quantile_of_sample(&s, 0.5).unwrap());
        }
    }

    #[test]
    fn m_location_rejects_nonpositive_scale() {
        let s = sample(&[1.0, 2.0]);
        assert!(m_location(&s, &RhoSpec::huber_standard(), 0.0).is_err());
        assert!(m_location(&s, &RhoSpec::huber_standard(), -1.0).is_err());
    }

    #[test]
    fn huber_estimating_equation_holds_at_optimum() {
        let mut rng = SplitMix64::new(0xBEEF);
        let law = ErrorLaw::StandardNormal;
        let mut values: Vec<f64> =
            (0..200).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
        for v in values.iter_mut().take(30) {
            *v += 8.0; // asymmetric contamination
        }
        let s = Sample::new(values).unwrap();
        let spec = RhoSpec::huber_standard();
        let report = m_location(&s, &spec, 1.0).unwrap();
        assert!(report.converged);
        let score: f64 = s.values().iter().map(|y| spec.psi(y - report.mu_hat)).sum();
        assert!(score.abs() < 1e-8, "score at optimum was {score}");
    }

    #[test]
    fn objective_field_matches_recomputation() {
        let mut rng = SplitMix64::new(3);
        let values: Vec<f64> = (0..100).map(|_| rng.next_unit() * 4.0).collect();
        let s = Sample::new(values).unwrap();
        for spec in [
            RhoSpec::absolute(),
            RhoSpec::squared(),
            RhoSpec::huber_standard(),
            RhoSpec::tukey_standard(),
        ] {
            let r = m_location(&s, &spec, 0.7).unwrap();
            let recomputed = objective_value(s.values(), &spec, 0.7, r.mu_hat);
            let tol = 1e-10 * recomputed.abs().max(1.0);
            assert!((r.objective - recomputed).abs() <= tol);
        }
    }

    #[test]
    fn tukey_grid_values_match_direct_objective() {
        // the windowed power-sum evaluation must agree with direct summation
        let mut rng = SplitMix64::new(0xACE);
        let mut values: Vec<f64> = (0..300)
            .map(|_| ErrorLaw::StandardNormal.quantile(rng.next_unit()).unwrap())
            .collect();
        for v in values.iter_mut().take(60) {
            *v = 6.5;
        }
        let s = Sample::new(values).unwrap();
        let c = 4.685;
        for sigma in [0.3, 1.0, 2.5] {
            for j in 0..200 {
                let mu = s.min() + (s.max() - s.min()) * j as f64 / 199.0;
                let direct = tukey_objective(s.values(), c, sigma, mu);
                // re-derive the windowed value through the public scan by
                // checking the minimizer instead would be indirect; evaluate
                // the polynomial identity per point instead
                let inside: f64 = s
                    .values()
                    .iter()
                    .filter(|y| ((*y - mu) / sigma).abs() <= c)
                    .map(|y| {
                        let t = (y - mu) / sigma;
                        t * t / 2.0 - t.powi(4) / (2.0 * c * c) + t.powi(6) / (6.0 * c.powi(4))
                    })
                    .sum();
                let outside = s
                    .values()
                    .iter()
                    .filter(|y| ((*y - mu) / sigma).abs() > c)
                    .count() as f64
                    * (c * c / 6.0);
                assert!(
                    (direct - (inside + outside)).abs() < 1e-8 * direct.abs().max(1.0),
                    "polynomial split mismatch at mu={mu} sigma={sigma}"
                );
            }
        }
    }

    #[test]
    fn tukey_finds_global_minimum_against_fine_scan() {
        // bimodal sample: the global optimum must win over the local one
        let mut rng = SplitMix64::new(0xFEED);
        let law = ErrorLaw::StandardNormal;
        let mut values: Vec<f64> =
            (0..80).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
        for _ in 0..20 {
            values.push(9.0 + 0.05 * law.quantile(rng.next_unit()).unwrap());
        }
        let s = Sample::new(values).unwrap();
        let spec = RhoSpec::tukey_standard();
        let report = m_location(&s, &spec, 1.0).unwrap();
        assert_eq!(report.n_candidates, TUKEY_GRID_POINTS);

        let mut best = f64::INFINITY;
        let mut best_mu = 0.0;
        for j in 0..200_000 {
            let mu = s.min() + (s.max() - s.min()) * j as f64 / 199_999.0;
            let v = objective_value(s.values(), &spec, 1.0, mu);
            if v < best {
                best = v;
                best_mu = mu;
            }
        }
        assert!(
            (report.mu_hat - best_mu).abs() < 1e-3,
            "scan found {best_mu}, estimator found {}",
            report.mu_hat
        );
        assert!(report.objective <= best + 1e-9);
    }

    #[test]
    fn tukey_ties_resolve_to_smallest_location() {
        // two far-apart points with a bounded loss: exactly tied minima at
        // each point; the smaller location must win
        let s = sample(&[-5.0, 5.0]);
        let r = m_location(&s, &RhoSpec::tukey_standard(), 1.0).unwrap();
        assert!(
            (r.mu_hat + 5.0).abs() < 1e-6,
            "expected the left minimum, got {}",
            r.mu_hat
        );
    }

    #[test]
    fn estimated_scale_populates_sigma_hat() {
        let mut rng = SplitMix64::new(1);
        let values: Vec<f64> = (0..50)
            .map(|_| ErrorLaw::StandardNormal.quantile(rng.next_unit()).unwrap())
            .collect();
        let s = Sample::new(values).unwrap();
        let r = m_location_with_estimated_scale(&s, &RhoSpec::tukey_standard(), ScaleMethod::Mad)
            .unwrap();
        let expected = scale_mad(&s).unwrap();
        assert_eq!(r.sigma_hat, Some(expected));
        let direct = m_location(&s, &RhoSpec::tukey_standard(), expected).unwrap();
        assert_eq!(r.mu_hat, direct.mu_hat);
    }

    #[test]
    fn lts_excludes_the_outlier() {
        let s = sample(&[0.0, 0.0, 0.0, 10.0]);
        let r = lts_location_scale(&s, 3).unwrap();
        assert_eq!(r.mu_hat, 0.0);
        assert_eq!(r.sigma_hat, Some(0.0));
        assert_eq!(r.objective, 0.0);
        assert_eq!(r.n_candidates, 2);
    }

    #[test]
    fn lts_range_checks() {
        let s = sample(&[1.0, 2.0, 3.0]);
        assert!(lts_location_scale(&s, 1).is_err());
        assert!(lts_location_scale(&s, 4).is_err());
        assert!(lts_location_scale(&s, 3).is_ok());
    }

    #[test]
    fn lts_matches_exhaustive_subsets_small_n() {
        for seed in 0..25u64 {
            let mut rng = SplitMix64::new(seed.wrapping_mul(0x9E37_79B9));
            let n = 8 + (rng.next_u64() % 5) as usize; // 8..12
            let h = 4 + (rng.next_u64() % (n as u64 - 4)) as usize;
            let values: Vec<f64> = (0..n).map(|_| rng.next_unit() * 20.0 - 10.0).collect();
            let s = Sample::new(values.clone()).unwrap();
            let fast = lts_location_scale(&s, h).unwrap();
            let brute = brute_force_lts(&values, h);
            assert!(
                (fast.objective - brute).abs() <= 1e-9 * brute.max(1.0),
                "window scan {} vs exhaustive {brute} (n={n}, h={h})",
                fast.objective
            );
        }
    }

    fn brute_force_lts(values: &[f64], h: usize) -> f64 {
        let n = values.len();
        let mut best = f64::INFINITY;
        // iterate over all h-subsets via bitmask
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != h {
                continue;
            }
            let mut sum = 0.0;
            let mut sum2 = 0.0;
            for (i, &v) in values.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    sum += v;
                    sum2 += v * v;
                }
            }
            let rss = sum2 - sum * sum / h as f64;
            if rss < best {
                best = rss;
            }
        }
        best
    }

    #[test]
    fn trimming_requires_enough_data() {
        let s = sample(&[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            estimate_trimming(&s),
            Err(EstimatorError::TooFewObservations { need: 8, .. })
        ));
    }

    #[test]
    fn trimming_keeps_clean_sample_and_drops_outliers() {
        let law = ErrorLaw::StandardNormal;
        let mut kept = 0;
        for seed in 0..20u64 {
            let mut rng = SplitMix64::new(0xC0FFEE ^ seed);
            let clean: Vec<f64> =
                (0..400).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
            let s = Sample::new(clean).unwrap();
            if estimate_trimming(&s).unwrap() == 400 {
                kept += 1;
            }
        }
        assert!(kept >= 18, "clean samples kept full h only {kept}/20 times");

        // one fifth of the sample at max + 3: the selector should stop at h = 320
        let mut rng = SplitMix64::new(0xABCD);
        let mut values: Vec<f64> =
            (0..320).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        values.extend(std::iter::repeat_n(max + 3.0, 80));
        let s = Sample::new(values).unwrap();
        let h = estimate_trimming(&s).unwrap();
        assert_eq!(h, 320);
    }

    #[test]
    fn equivariance_spot_checks() {
        let mut rng = SplitMix64::new(0x5EED);
        let law = ErrorLaw::StandardNormal;
        let values: Vec<f64> = (0..60).map(|_| law.quantile(rng.next_unit()).unwrap()).collect();
        let s = Sample::new(values.clone()).unwrap();
        let (a, b) = (2.5, 3.0);
        let transformed = Sample::new(values.iter().map(|y| a + b * y).collect()).unwrap();

        for spec in [RhoSpec::huber_standard(), RhoSpec::tukey_standard()] {
            let base = m_location(&s, &spec, 1.0).unwrap().mu_hat;
            let moved = m_location(&transformed, &spec, b).unwrap().mu_hat;
            assert!((moved - (a + b * base)).abs() < 1e-8);
        }
        let iqr = scale_iqr(&s).unwrap();
        assert!((scale_iqr(&transformed).unwrap() - b * iqr).abs() < 1e-8);
        let mad = scale_mad(&s).unwrap();
        assert!((scale_mad(&transformed).unwrap() - b * mad).abs() < 1e-8);
        let lts = lts_location_scale(&s, 45).unwrap();
        let lts_t = lts_location_scale(&transformed, 45).unwrap();
        assert!((lts_t.mu_hat - (a + b * lts.mu_hat)).abs() < 1e-8);
        assert!((lts_t.sigma_hat.unwrap() - b * lts.sigma_hat.unwrap()).abs() < 1e-8);
    }
}

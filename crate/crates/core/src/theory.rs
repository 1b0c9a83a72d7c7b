//! Numerical evaluation of the asymptotic quantities: expected losses under
//! a scaled error law, boundedness thresholds for redescending estimators,
//! finite-sample breakdown, consistency factors of the contaminated IQR and
//! MAD, asymptotic variances and efficiency-based tuning calibration.

use thiserror::Error;

use crate::estimators::Sample;
use crate::numerics::{self, ErrorLaw, NumericsError, NORMAL_TRUNCATION};
use crate::rho::{RhoError, RhoFamily, RhoSpec};

/// Absolute tolerance of the quadratures behind the theory quantities.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Tolerance of the bracketed root finding behind the theory quantities.
pub const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("operation requires a redescending loss, got {family}")]
    NotRedescending { family: RhoFamily },
    #[error("operation not defined for the {family} family")]
    UnsupportedFamily { family: RhoFamily },
    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),
    #[error("good-observation proportion {lambda} outside ({min}, 1]")]
    LambdaOutOfRange { lambda: f64, min: f64 },
    #[error("left-outlier proportion {varrho} outside [0, {max}]")]
    VarrhoOutOfRange { varrho: f64, max: f64 },
    #[error("quantile argument {0} falls outside (0, 1) for this geometry")]
    QuantileArgument(f64),
    #[error("good-observation index {index} out of bounds for sample of {len}")]
    IndexOutOfBounds { index: usize, len: usize },
    #[error("good-observation index set is empty")]
    EmptyGoodSet,
    #[error("degenerate denominator in {0}")]
    Degenerate(&'static str),
    #[error("target efficiency {0} not achievable for this family")]
    UnachievableEfficiency(f64),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Rho(#[from] RhoError),
}

/// Limiting contamination geometry: the proportion `lambda` of good
/// observations, the proportion `varrho` of outliers sitting below the good
/// data, and the law of the good errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContaminationGeometry {
    lambda: f64,
    varrho: f64,
    good_law: ErrorLaw,
}

impl ContaminationGeometry {
    /// Requires `1/2 < lambda <= 1` and `0 <= varrho <= 1 - lambda`.
    pub fn new(lambda: f64, varrho: f64, good_law: ErrorLaw) -> Result<Self, TheoryError> {
        if !(lambda > 0.5 && lambda <= 1.0) {
            return Err(TheoryError::LambdaOutOfRange { lambda, min: 0.5 });
        }
        let max_varrho = 1.0 - lambda;
        if !(varrho >= 0.0 && varrho <= max_varrho + 1e-15) {
            return Err(TheoryError::VarrhoOutOfRange { varrho, max: max_varrho });
        }
        Ok(ContaminationGeometry { lambda, varrho, good_law })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn varrho(&self) -> f64 {
        self.varrho
    }

    pub fn good_law(&self) -> ErrorLaw {
        self.good_law
    }
}

/// Expected loss of a scaled error, `E rho(X / varsigma)` under `law`.
///
/// The integral over `[-T, T]` is done by adaptive quadrature; beyond `T >=
/// varsigma x_*` the loss is exactly linear, so the tail is added in closed
/// form from the law's tail probability and truncated first moment. This
/// keeps the heavy t(3) tail exact. Rejects the squared family, whose tail
/// is not linear.
pub fn rho_tilde(spec: &RhoSpec, varsigma: f64, law: ErrorLaw) -> Result<f64, TheoryError> {
    if !(varsigma > 0.0 && varsigma.is_finite()) {
        return Err(TheoryError::NonPositiveScale(varsigma));
    }
    let tail = spec.tail_constants()?;
    let t = match law {
        ErrorLaw::StandardNormal => NORMAL_TRUNCATION,
        ErrorLaw::StudentT3 => NORMAL_TRUNCATION.max(varsigma * tail.x_star),
    };
    let body = numerics::integrate(
        &|x: f64| spec.rho(x / varsigma) * law.pdf(x),
        -t,
        t,
        QUADRATURE_TOL,
    )?;
    let tail_mass = 2.0
        * ((tail.rho_star - tail.psi_star * tail.x_star) * law.upper_tail(t)
            + tail.psi_star / varsigma * law.upper_partial_mean(t));
    Ok(body + tail_mass)
}

/// Smallest good-observation proportion for which a redescending
/// M-estimator with plug-in scale factor `varsigma` stays bounded:
/// `1 / (2 - rho_tilde / rho_*)`.
///
/// Strictly decreasing in `varsigma`; over-estimated scale tolerates more
/// contamination. Errors for non-redescending losses, whose threshold is
/// the constant [`non_redescending_threshold`].
pub fn boundedness_threshold_lambda(
    spec: &RhoSpec,
    varsigma: f64,
    law: ErrorLaw,
) -> Result<f64, TheoryError> {
    let tail = spec.tail_constants()?;
    if tail.psi_star != 0.0 {
        return Err(TheoryError::NotRedescending { family: spec.family() });
    }
    let ratio = rho_tilde(spec, varsigma, law)? / tail.rho_star;
    Ok(1.0 / (2.0 - ratio))
}

/// Boundedness threshold of non-redescending losses (positive tail slope):
/// any good-observation proportion above one half suffices.
pub fn non_redescending_threshold() -> f64 {
    0.5
}

/// Finite-sample addition breakdown point of a redescending M-estimate:
/// `eps* = ceil(A) / (h + ceil(A))` with
/// `A = h - sum_{i in good} rho((y_i - mu_hat) / sigma) / rho_*`.
pub fn finite_sample_breakdown(
    s: &Sample,
    good_idx: &[usize],
    spec: &RhoSpec,
    mu_hat: f64,
    sigma: f64,
) -> Result<f64, TheoryError> {
    if !spec.is_redescending() {
        return Err(TheoryError::NotRedescending { family: spec.family() });
    }
    if good_idx.is_empty() {
        return Err(TheoryError::EmptyGoodSet);
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(TheoryError::NonPositiveScale(sigma));
    }
    let tail = spec.tail_constants()?;
    if tail.rho_star <= 0.0 {
        return Err(TheoryError::Degenerate("rho_* must be positive"));
    }
    let values = s.values();
    let mut penalty = 0.0;
    for &i in good_idx {
        let y = *values
            .get(i)
            .ok_or(TheoryError::IndexOutOfBounds { index: i, len: values.len() })?;
        penalty += spec.rho((y - mu_hat) / sigma) / tail.rho_star;
    }
    let h = good_idx.len() as f64;
    let a_ceil = (h - penalty).ceil().max(0.0);
    Ok(a_ceil / (h + a_ceil))
}

/// Probability limit of the normalized IQR under contamination, relative to
/// the true scale:
/// `(q^F_{(3/4 - varrho)/lambda} - q^F_{(1/4 - varrho)/lambda}) / (q^Phi_{3/4} - q^Phi_{1/4})`.
///
/// Requires `lambda > 3/4`, the regime where the contaminated IQR stays
/// bounded at all.
pub fn consistency_factor_iqr(g: &ContaminationGeometry) -> Result<f64, TheoryError> {
    if g.lambda <= 0.75 {
        return Err(TheoryError::LambdaOutOfRange { lambda: g.lambda, min: 0.75 });
    }
    let p_hi = (0.75 - g.varrho) / g.lambda;
    let p_lo = (0.25 - g.varrho) / g.lambda;
    for p in [p_hi, p_lo] {
        if !(p > 0.0 && p < 1.0) {
            return Err(TheoryError::QuantileArgument(p));
        }
    }
    let phi_q75 = ErrorLaw::StandardNormal.quantile(0.75)?;
    let spread = g.good_law.quantile(p_hi)? - g.good_law.quantile(p_lo)?;
    Ok(spread / (2.0 * phi_q75))
}

/// Probability limit of the normalized MAD under contamination, relative to
/// the true scale: `d / q^Phi_{3/4}`, where `d` solves
/// `F(c + d) - F(c - d) = 1/(2 lambda)` around the contaminated median
/// `c = q^F_{(1/2 - varrho)/lambda}`.
pub fn consistency_factor_mad(g: &ContaminationGeometry) -> Result<f64, TheoryError> {
    let p_c = (0.5 - g.varrho) / g.lambda;
    if !(p_c > 0.0 && p_c < 1.0) {
        return Err(TheoryError::QuantileArgument(p_c));
    }
    let c = g.good_law.quantile(p_c)?;
    let target = 0.5 / g.lambda;
    let residual = |d: f64| g.good_law.cdf(c + d) - g.good_law.cdf(c - d) - target;
    let mut hi = 1.0;
    while residual(hi) < 0.0 && hi < 1e6 {
        hi *= 2.0;
    }
    let d = numerics::find_root(residual, 0.0, hi, ROOT_TOL)?;
    let phi_q75 = ErrorLaw::StandardNormal.quantile(0.75)?;
    Ok(d / phi_q75)
}

fn expectation_with_constant_tail<F: Fn(f64) -> f64>(
    integrand: F,
    law: ErrorLaw,
    t: f64,
    tail_level: f64,
) -> Result<f64, TheoryError> {
    let body = numerics::integrate(&|x: f64| integrand(x) * law.pdf(x), -t, t, QUADRATURE_TOL)?;
    Ok(body + 2.0 * tail_level * law.upper_tail(t))
}

/// Asymptotic variance of the normalized location estimate when the
/// plug-in scale converges to `varsigma` times the truth:
/// `varsigma^2 E psi(x/varsigma)^2 / (E psi'(x/varsigma))^2`.
///
/// At `varsigma = 1` this is the classical sandwich ratio; the general
/// value follows from the same estimating-equation expansion and is
/// validated against simulation. Efficiency relative to the average of the
/// good observations is its reciprocal.
pub fn asymptotic_variance(
    spec: &RhoSpec,
    varsigma: f64,
    law: ErrorLaw,
) -> Result<f64, TheoryError> {
    if !(varsigma > 0.0 && varsigma.is_finite()) {
        return Err(TheoryError::NonPositiveScale(varsigma));
    }
    match spec.family() {
        RhoFamily::Absolute => Err(TheoryError::UnsupportedFamily { family: spec.family() }),
        // psi = 2x, psi' = 2: the ratio collapses to the law's variance
        RhoFamily::Squared => Ok(match law {
            ErrorLaw::StandardNormal => 1.0,
            ErrorLaw::StudentT3 => 3.0,
        }),
        RhoFamily::Huber | RhoFamily::Tukey => {
            let c = spec.tuning().expect("tuned family");
            let t = NORMAL_TRUNCATION.max(varsigma * c);
            // |psi| is constant at c beyond the bend for Huber, zero for Tukey
            let psi_sq_tail = match spec.family() {
                RhoFamily::Huber => c * c,
                _ => 0.0,
            };
            let numerator = expectation_with_constant_tail(
                |x| {
                    let p = spec.psi(x / varsigma);
                    p * p
                },
                law,
                t,
                psi_sq_tail,
            )?;
            // Huber's second derivative is an indicator, so its mean is the
            // in-bend mass in closed form; quadrature would chase the jump.
            let denominator = match spec.family() {
                RhoFamily::Huber => 2.0 * law.cdf(varsigma * c) - 1.0,
                _ => expectation_with_constant_tail(
                    |x| spec.psi_prime(x / varsigma).expect("twice differentiable family"),
                    law,
                    t,
                    0.0,
                )?,
            };
            if denominator.abs() < 1e-12 {
                return Err(TheoryError::Degenerate("expected curvature is zero"));
            }
            Ok(varsigma * varsigma * numerator / (denominator * denominator))
        }
    }
}

/// Tuning constant at which the family reaches a target efficiency under
/// the clean normal model, by bracketed root finding on the efficiency
/// curve (monotone increasing in `c`).
pub fn calibrate_tuning(family: RhoFamily, target_efficiency: f64) -> Result<f64, TheoryError> {
    if !(target_efficiency > 0.0 && target_efficiency < 1.0) {
        return Err(TheoryError::UnachievableEfficiency(target_efficiency));
    }
    let (lo, hi) = match family {
        RhoFamily::Huber => (0.05, 100.0),
        RhoFamily::Tukey => (1.5, 300.0),
        other => return Err(TheoryError::UnsupportedFamily { family: other }),
    };
    let spec_for = |c: f64| match family {
        RhoFamily::Huber => RhoSpec::huber(c),
        _ => RhoSpec::tukey(c),
    };
    let efficiency_gap = |c: f64| {
        let spec = spec_for(c).expect("positive tuning");
        match asymptotic_variance(&spec, 1.0, ErrorLaw::StandardNormal) {
            Ok(v) => 1.0 / v - target_efficiency,
            Err(_) => -target_efficiency, // degenerate curvature reads as zero efficiency
        }
    };
    match numerics::find_root(efficiency_gap, lo, hi, 1e-9) {
        Ok(c) => Ok(c),
        Err(NumericsError::NoSignChange { .. }) => {
            Err(TheoryError::UnachievableEfficiency(target_efficiency))
        }
        Err(e) => Err(e.into()),
    }
}

/// The three moment conditions on the curvature of the loss under the
/// standard normal law, for the caller to assert sign and finiteness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionMoments {
    /// `E rho''(x / varsigma)`; positive when the loss has usable curvature.
    pub mean_psi_prime: f64,
    /// `E x rho''(x / varsigma)`; zero under a symmetric law.
    pub mean_x_psi_prime: f64,
    /// `Var(x rho''(x / varsigma))`; must be finite.
    pub var_x_psi_prime: f64,
}

/// Evaluates the [`DistributionMoments`] by quadrature under the standard
/// normal law. Requires a twice-differentiable family.
pub fn check_distribution_conditions(
    spec: &RhoSpec,
    varsigma: f64,
) -> Result<DistributionMoments, TheoryError> {
    if !(varsigma > 0.0 && varsigma.is_finite()) {
        return Err(TheoryError::NonPositiveScale(varsigma));
    }
    if spec.family() == RhoFamily::Absolute {
        return Err(TheoryError::UnsupportedFamily { family: spec.family() });
    }
    if spec.family() == RhoFamily::Huber {
        // indicator second derivative: all three moments are closed-form
        // truncated normal quantities
        let a = varsigma * spec.tuning().expect("huber carries a tuning constant");
        let law = ErrorLaw::StandardNormal;
        let in_bend = law.cdf(a) - law.cdf(-a);
        let second = in_bend - 2.0 * a * numerics::normal_pdf(a);
        return Ok(DistributionMoments {
            mean_psi_prime: in_bend,
            mean_x_psi_prime: 0.0,
            var_x_psi_prime: second,
        });
    }
    let pp = |x: f64| spec.psi_prime(x / varsigma).expect("twice differentiable family");
    let mean_psi_prime = numerics::expect_under_normal(pp, QUADRATURE_TOL)?;
    let mean_x_psi_prime = numerics::expect_under_normal(|x| x * pp(x), QUADRATURE_TOL)?;
    let second = numerics::expect_under_normal(
        |x| {
            let v = x * pp(x);
            v * v
        },
        QUADRATURE_TOL,
    )?;
    Ok(DistributionMoments {
        mean_psi_prime,
        mean_x_psi_prime,
        var_x_psi_prime: second - mean_x_psi_prime * mean_x_psi_prime,
    })
}

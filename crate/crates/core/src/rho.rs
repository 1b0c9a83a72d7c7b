//! The rho-function families: per-observation losses, their first two
//! derivatives, and the tail constants the asymptotic theory consumes.
//!
//! Every family is symmetric, zero at zero and non-decreasing away from it.
//! Outside a threshold `x_*` the loss is exactly linear,
//! `rho(x) = rho_* + psi_* (|x| - x_*)`; redescenders (Tukey) have
//! `psi_* = 0` so the loss is flat beyond `x_*`, non-redescenders (absolute,
//! Huber) keep a positive tail slope. The squared loss is the non-robust
//! baseline and is exempt from the linear-tail structure.

use thiserror::Error;

/// Standard Huber tuning for 95% efficiency under the normal model.
pub const HUBER_C95: f64 = 1.345;
/// Standard Tukey bisquare tuning for 95% efficiency under the normal model.
pub const TUKEY_C95: f64 = 4.685;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RhoError {
    #[error("tuning constant must be positive, got {0}")]
    NonPositiveTuning(f64),
    #[error("{family} family takes no tuning constant")]
    UnexpectedTuning { family: RhoFamily },
    #[error("operation not defined for the {family} family")]
    Unsupported { family: RhoFamily },
}

/// Loss family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RhoFamily {
    /// `|x|`; the M-estimator is the median.
    Absolute,
    /// Quadratic center with linear tails of slope `c`.
    Huber,
    /// Tukey's bisquare: bounded, flat beyond `c`.
    Tukey,
    /// `x^2`; the M-estimator is the sample mean.
    Squared,
}

impl std::fmt::Display for RhoFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RhoFamily::Absolute => "absolute",
            RhoFamily::Huber => "huber",
            RhoFamily::Tukey => "tukey",
            RhoFamily::Squared => "squared",
        };
        write!(f, "{s}")
    }
}

/// A loss family member together with its tuning constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoSpec {
    family: RhoFamily,
    c: f64,
}

impl RhoSpec {
    /// Absolute-value loss (median). No tuning constant.
    pub fn absolute() -> Self {
        RhoSpec { family: RhoFamily::Absolute, c: f64::NAN }
    }

    /// Squared loss (mean). No tuning constant.
    pub fn squared() -> Self {
        RhoSpec { family: RhoFamily::Squared, c: f64::NAN }
    }

    /// Huber loss with tuning constant `c > 0`.
    pub fn huber(c: f64) -> Result<Self, RhoError> {
        if c > 0.0 && c.is_finite() {
            Ok(RhoSpec { family: RhoFamily::Huber, c })
        } else {
            Err(RhoError::NonPositiveTuning(c))
        }
    }

    /// Tukey bisquare loss with tuning constant `c > 0`.
    pub fn tukey(c: f64) -> Result<Self, RhoError> {
        if c > 0.0 && c.is_finite() {
            Ok(RhoSpec { family: RhoFamily::Tukey, c })
        } else {
            Err(RhoError::NonPositiveTuning(c))
        }
    }

    /// Huber loss at the standard 95%-efficiency tuning `c = 1.345`.
    pub fn huber_standard() -> Self {
        RhoSpec { family: RhoFamily::Huber, c: HUBER_C95 }
    }

    /// Tukey loss at the standard 95%-efficiency tuning `c = 4.685`.
    pub fn tukey_standard() -> Self {
        RhoSpec { family: RhoFamily::Tukey, c: TUKEY_C95 }
    }

    pub fn family(&self) -> RhoFamily {
        self.family
    }

    /// Tuning constant; `None` for the untuned absolute and squared losses.
    pub fn tuning(&self) -> Option<f64> {
        match self.family {
            RhoFamily::Huber | RhoFamily::Tukey => Some(self.c),
            _ => None,
        }
    }

    /// Loss value `rho(x)`.
    pub fn rho(&self, x: f64) -> f64 {
        let a = x.abs();
        match self.family {
            RhoFamily::Absolute => a,
            RhoFamily::Squared => x * x,
            RhoFamily::Huber => {
                if a <= self.c {
                    0.5 * x * x
                } else {
                    self.c * (a - 0.5 * self.c)
                }
            }
            RhoFamily::Tukey => {
                let c = self.c;
                let u = (x / c) * (x / c);
                if u >= 1.0 {
                    c * c / 6.0
                } else {
                    let t = 1.0 - u;
                    c * c / 6.0 * (1.0 - t * t * t)
                }
            }
        }
    }

    /// First derivative `psi(x) = rho'(x)`.
    ///
    /// The absolute family is not differentiable at zero; the subgradient
    /// midpoint `psi(0) = 0` is used there.
    pub fn psi(&self, x: f64) -> f64 {
        match self.family {
            RhoFamily::Absolute => {
                if x == 0.0 {
                    0.0
                } else {
                    x.signum()
                }
            }
            RhoFamily::Squared => 2.0 * x,
            RhoFamily::Huber => x.clamp(-self.c, self.c),
            RhoFamily::Tukey => {
                let u = (x / self.c) * (x / self.c);
                if u >= 1.0 {
                    0.0
                } else {
                    let t = 1.0 - u;
                    x * t * t
                }
            }
        }
    }

    /// Second derivative `rho''(x)`.
    ///
    /// Defined piecewise; at the Huber kink `|x| = c` the quadratic branch
    /// value 1 is used (a measure-zero convention). Errors for the absolute
    /// family, whose second derivative is not a function.
    pub fn psi_prime(&self, x: f64) -> Result<f64, RhoError> {
        match self.family {
            RhoFamily::Absolute => Err(RhoError::Unsupported { family: self.family }),
            RhoFamily::Squared => Ok(2.0),
            RhoFamily::Huber => Ok(if x.abs() <= self.c { 1.0 } else { 0.0 }),
            RhoFamily::Tukey => {
                let u = (x / self.c) * (x / self.c);
                Ok(if u >= 1.0 { 0.0 } else { (1.0 - u) * (1.0 - 5.0 * u) })
            }
        }
    }

    /// Tail constants `(rho_*, x_*, psi_*)` of the linear-tail identity
    /// `rho(x) = rho_* + psi_* (|x| - x_*)` for `|x| >= x_*`.
    ///
    /// Errors for the squared family, whose tail slope is unbounded.
    pub fn tail_constants(&self) -> Result<TailConstants, RhoError> {
        match self.family {
            RhoFamily::Absolute => Ok(TailConstants { rho_star: 0.0, x_star: 0.0, psi_star: 1.0 }),
            RhoFamily::Huber => Ok(TailConstants {
                rho_star: 0.5 * self.c * self.c,
                x_star: self.c,
                psi_star: self.c,
            }),
            RhoFamily::Tukey => Ok(TailConstants {
                rho_star: self.c * self.c / 6.0,
                x_star: self.c,
                psi_star: 0.0,
            }),
            RhoFamily::Squared => Err(RhoError::Unsupported { family: self.family }),
        }
    }

    /// True when the loss is bounded (`psi_* = 0`).
    pub fn is_redescending(&self) -> bool {
        matches!(self.family, RhoFamily::Tukey)
    }
}

/// Constants of the linear-tail identity in the loss definition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailConstants {
    /// Loss level at the threshold, `rho(x_*)`.
    pub rho_star: f64,
    /// Threshold beyond which the loss is linear.
    pub x_star: f64,
    /// Tail slope; zero exactly for redescenders.
    pub psi_star: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let tukey = RhoSpec::tukey_standard();
        // plateau level c^2/6 at any |x| >= c
        assert!((tukey.rho(5.0) - 4.685 * 4.685 / 6.0).abs() < 1e-12);
        assert!((tukey.rho(5.0) - 3.6582041666666666).abs() < 1e-12);

        let huber = RhoSpec::huber_standard();
        assert_eq!(huber.rho(0.0), 0.0);
        assert_eq!(RhoSpec::absolute().rho(-2.0), 2.0);
    }

    #[test]
    fn psi_values() {
        assert_eq!(RhoSpec::tukey_standard().psi(6.0), 0.0);
        assert_eq!(RhoSpec::huber_standard().psi(3.0), 1.345);
        assert_eq!(RhoSpec::squared().psi(1.5), 3.0);
        assert_eq!(RhoSpec::absolute().psi(0.0), 0.0);
        assert_eq!(RhoSpec::absolute().psi(-0.3), -1.0);
    }

    #[test]
    fn psi_prime_values() {
        let tukey = RhoSpec::tukey_standard();
        assert!((tukey.psi_prime(0.0).unwrap() - 1.0).abs() < 1e-12);
        let huber = RhoSpec::huber_standard();
        assert_eq!(huber.psi_prime(2.0).unwrap(), 0.0);
        assert_eq!(huber.psi_prime(1.345).unwrap(), 1.0); // kink convention
        assert_eq!(RhoSpec::squared().psi_prime(17.0).unwrap(), 2.0);
        assert!(RhoSpec::absolute().psi_prime(1.0).is_err());
    }

    #[test]
    fn tail_constants_per_family() {
        let t = RhoSpec::tukey_standard().tail_constants().unwrap();
        assert!((t.rho_star - 3.6582041666666666).abs() < 1e-12);
        assert_eq!(t.x_star, 4.685);
        assert_eq!(t.psi_star, 0.0);

        let h = RhoSpec::huber_standard().tail_constants().unwrap();
        assert!((h.rho_star - 0.9045125).abs() < 1e-12);
        assert_eq!(h.x_star, 1.345);
        assert_eq!(h.psi_star, 1.345);

        let a = RhoSpec::absolute().tail_constants().unwrap();
        assert_eq!((a.rho_star, a.x_star, a.psi_star), (0.0, 0.0, 1.0));

        assert!(RhoSpec::squared().tail_constants().is_err());
    }

    #[test]
    fn symmetry_and_monotonicity_on_grid() {
        let specs = [
            RhoSpec::absolute(),
            RhoSpec::huber_standard(),
            RhoSpec::tukey_standard(),
            RhoSpec::squared(),
        ];
        for spec in specs {
            let mut prev = 0.0;
            for i in 0..10_000 {
                let x = i as f64 * 1e-3;
                let v = spec.rho(x);
                assert!(v >= 0.0);
                assert!(v + 1e-15 >= prev, "{spec:?} not nondecreasing at {x}");
                assert_eq!(v, spec.rho(-x), "{spec:?} not symmetric at {x}");
                prev = v;
            }
            assert_eq!(spec.rho(0.0), 0.0);
        }
    }

    #[test]
    fn linear_tail_identity_exact() {
        for spec in [RhoSpec::huber_standard(), RhoSpec::tukey_standard()] {
            let t = spec.tail_constants().unwrap();
            for i in 0..200 {
                let x = t.x_star + i as f64 * 0.05;
                let expected = t.rho_star + t.psi_star * (x.abs() - t.x_star);
                // the identity is exact up to floating-point association
                let tol = 4.0 * f64::EPSILON * expected.abs().max(1.0);
                assert!((spec.rho(x) - expected).abs() <= tol, "{spec:?} tail at {x}");
                assert!((spec.rho(-x) - expected).abs() <= tol);
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let specs = [RhoSpec::huber_standard(), RhoSpec::tukey_standard(), RhoSpec::squared()];
        let step = 1e-5;
        for spec in specs {
            for i in -400..=400 {
                let x = i as f64 * 0.01;
                // keep clear of the kinks where one-sided branches meet
                if let Some(c) = spec.tuning() {
                    if (x.abs() - c).abs() < 10.0 * step {
                        continue;
                    }
                }
                let fd_psi = (spec.rho(x + step) - spec.rho(x - step)) / (2.0 * step);
                assert!(
                    (fd_psi - spec.psi(x)).abs() < 1e-6,
                    "{spec:?} psi mismatch at {x}: fd {fd_psi} vs {}",
                    spec.psi(x)
                );
                let fd_pp = (spec.psi(x + step) - spec.psi(x - step)) / (2.0 * step);
                assert!(
                    (fd_pp - spec.psi_prime(x).unwrap()).abs() < 1e-5,
                    "{spec:?} psi_prime mismatch at {x}"
                );
            }
        }
    }

    #[test]
    fn tukey_is_lipschitz_with_max_psi_constant() {
        let spec = RhoSpec::tukey_standard();
        // sup |psi| over a fine grid
        let sup = (0..10_000)
            .map(|i| spec.psi(i as f64 * 1e-3).abs())
            .fold(0.0_f64, f64::max);
        let mut state = 0x9E3779B97F4A7C15_u64;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 * 20.0 - 10.0
        };
        for _ in 0..2000 {
            let (a, b) = (next(), next());
            assert!((spec.rho(a) - spec.rho(b)).abs() <= sup * (a - b).abs() + 1e-12);
        }
    }

    #[test]
    fn rejects_bad_tuning() {
        assert!(RhoSpec::huber(0.0).is_err());
        assert!(RhoSpec::tukey(-1.0).is_err());
        assert!(RhoSpec::huber(f64::NAN).is_err());
    }
}

//! Robust location-scale estimation under a fixed-proportion contamination
//! model.
//!
//! A sample of size `n` holds `h` "good" observations drawn from a reference
//! error law and `n - h` arbitrary "outliers". This crate provides:
//!
//! - the classical rho-function families (absolute value, Huber, Tukey
//!   bisquare, plain squares) with derivatives and tail constants ([`rho`]),
//! - location M-estimation with plug-in scale, the IQR/MAD robust scale
//!   estimators, exact one-dimensional least trimmed squares, and a
//!   moment-screen trimming selector ([`estimators`]),
//! - numerical evaluation of the asymptotic theory: consistency factors of
//!   the contaminated IQR/MAD, boundedness thresholds for redescending
//!   estimators, finite-sample breakdown, asymptotic variances and
//!   efficiency-based tuning ([`theory`]),
//! - seeded, platform-reproducible generators for the benchmark
//!   data-generating processes ([`dgp`]),
//! - the shared numerical kernel: distribution functions, adaptive
//!   quadrature and bracketed root finding ([`numerics`]).
//!
//! All functions are pure: given the same inputs (and seeds) they return the
//! same outputs on every platform, which is what makes the Monte Carlo
//! harness in the companion CLI crate reproducible.

pub mod dgp;
pub mod estimators;
pub mod numerics;
pub mod rho;
pub mod theory;

pub use dgp::{DgpConfig, DgpPreset, SplitMix64};
pub use estimators::{EstimateReport, Sample, ScaleMethod};
pub use numerics::ErrorLaw;
pub use rho::{RhoFamily, RhoSpec};
pub use theory::ContaminationGeometry;

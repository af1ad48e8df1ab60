//! Per-user capacity and outage analysis for multi-connectivity cellular
//! networks under random node placement.
//!
//! The crate pairs closed-form results with a Monte-Carlo simulator:
//!
//! * [`specialfn`] — incomplete gamma machinery (arbitrary real order,
//!   order derivatives, an accelerated alternating series) behind the
//!   exact rate formula;
//! * [`quad`] — adaptive Gauss–Kronrod quadrature used by the analytic
//!   layer and as an independent oracle in tests;
//! * [`scalar`] — the [`scalar::Real`] abstraction that lets the math run
//!   in `f64` (default) or `f32`.
//!
//! Higher layers build the network model on top of these:
//!
//! * [`analytic`] — SNR law, exact and high-SNR expected rates, capacity
//!   moments;
//! * [`degree`] — station load distribution and size-biased moments;
//! * [`failures`] — closed-form capacity/outage under the four failure
//!   models;
//! * [`pointprocess`] — Poisson sampling and exact k-nearest-station
//!   queries;
//! * [`simulator`] — Monte-Carlo capacity runs over sampled realizations;
//! * [`metrics`] — CDFs, fairness, confidence intervals, loss tables.
//!
//! The math layers are generic over [`Real`]; the aliases below pin the
//! default `f64` instantiations.

pub mod analytic;
pub mod degree;
pub mod failures;
pub mod metrics;
pub mod pointprocess;
pub mod quad;
pub mod scalar;
pub mod simulator;
pub mod specialfn;

pub use scalar::Real;

/// Scenario parameters in the default `f64` precision.
pub type Params = analytic::NetworkParams<f64>;
/// Capacity moments in the default `f64` precision.
pub type Moments = analytic::CapacityMoments<f64>;
/// Failure model in the default `f64` precision.
pub type Failure = failures::FailureModel<f64>;
/// Failure analysis output in the default `f64` precision.
pub type Analysis = failures::FailureAnalysis<f64>;
/// Station load model in the default `f64` precision.
pub type Degrees = degree::DegreeModel<f64>;

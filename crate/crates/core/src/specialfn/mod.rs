//! Gamma-family special functions with controlled truncation error.
//!
//! Everything the closed-form rate expressions need:
//!
//! | function | description |
//! |---|---|
//! | [`gamma`] | complete gamma Γ(s), s > 0 |
//! | [`upper_incomplete_gamma`] | Γ(s, x) for any real order, including s ≤ 0 |
//! | [`upper_incomplete_gamma_dorder`] | ∂Γ(a, x)/∂a at a = s |
//! | [`harmonic`] | harmonic number H_n |
//! | [`g_series`] | the alternating incomplete-gamma double series G(j, φ) |
//!
//! Series evaluations report an [`SpecialFnResult::error_bound`] derived
//! from the alternating-series remainder (or an acceleration residual) so
//! callers can propagate honest uncertainties.

mod alternating;
mod dorder;
mod gamma;
mod gseries;
mod incgamma;

pub use dorder::upper_incomplete_gamma_dorder;
pub use gamma::{digamma, gamma, ln_gamma};
pub use gseries::g_series;
pub use incgamma::{exp_integral_e1, upper_incomplete_gamma};

pub(crate) use incgamma::{lower_regularized_series, upper_regularized};

use crate::scalar::Real;

/// Truncation controls for infinite-series evaluations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions<T> {
    /// Stop once a term magnitude falls below this absolute threshold.
    pub abs_tol: T,
    /// ... or below this fraction of the running partial sum.
    pub rel_tol: T,
    /// Hard cap on evaluated terms before reporting a truncation failure.
    pub max_terms: usize,
}

impl<T: Real> Default for SeriesOptions<T> {
    fn default() -> Self {
        SeriesOptions {
            abs_tol: T::of(1e-12),
            rel_tol: T::of(1e-10),
            max_terms: 10_000,
        }
    }
}

impl<T: Real> SeriesOptions<T> {
    pub(crate) fn validate(&self) -> Result<(), SpecialFnError<T>> {
        if !(self.abs_tol > T::zero()) {
            return Err(SpecialFnError::Domain {
                name: "abs_tol",
                value: self.abs_tol,
                requirement: "> 0",
            });
        }
        if !(self.rel_tol > T::zero()) {
            return Err(SpecialFnError::Domain {
                name: "rel_tol",
                value: self.rel_tol,
                requirement: "> 0",
            });
        }
        if self.max_terms == 0 {
            return Err(SpecialFnError::Domain {
                name: "max_terms",
                value: T::zero(),
                requirement: "≥ 1",
            });
        }
        Ok(())
    }
}

/// Value of a truncated series together with its residual bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnResult<T> {
    /// Truncated sum.
    pub value: T,
    /// Upper bound on |value − limit| (alternating remainder or
    /// acceleration residual, plus a rounding floor).
    pub error_bound: T,
    /// Terms actually evaluated.
    pub terms_used: usize,
}

/// Errors from domain violations or non-convergent series.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecialFnError<T: Real> {
    /// An argument is outside the function's domain.
    #[error("{name} = {value} violates requirement {requirement}")]
    Domain {
        name: &'static str,
        value: T,
        requirement: &'static str,
    },
    /// A series failed to meet tolerance within `max_terms`; the partial
    /// value and its residual bound are preserved for diagnostics.
    #[error("{context}: series did not converge within {terms_used} terms (partial {partial}, bound {error_bound})")]
    Truncation {
        context: &'static str,
        partial: T,
        error_bound: T,
        terms_used: usize,
    },
}

/// Harmonic number H_n = Σ_{i=1..n} 1/i, with H_0 = 0.
///
/// Accumulated smallest-term-first so the double-precision value is exact
/// to the last bit for every n this crate uses.
///
/// # Examples
///
/// ```
/// use mcnet_core::specialfn::harmonic;
///
/// assert_eq!(harmonic::<f64>(0), 0.0);
/// assert_eq!(harmonic::<f64>(1), 1.0);
/// assert!((harmonic::<f64>(3) - 11.0 / 6.0).abs() < 1e-15);
/// ```
pub fn harmonic<T: Real>(n: u32) -> T {
    let mut sum = T::zero();
    for i in (1..=n).rev() {
        sum = sum + T::one() / T::of_usize(i as usize);
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic::<f64>(0), 0.0);
        assert_eq!(harmonic::<f64>(1), 1.0);
        assert!((harmonic::<f64>(3) - 11.0 / 6.0).abs() < 1e-15);
        assert!((harmonic::<f64>(10) - 2.9289682539682538).abs() < 1e-15);
    }

    #[test]
    fn harmonic_prefix_sum_identity() {
        // Σ_{j=1}^{k-1} H_j = k·H_k − k, the collapse used by the sum-rate
        // approximation.
        for k in 1..=50u32 {
            let lhs: f64 = (1..k).map(harmonic::<f64>).sum();
            let rhs = k as f64 * harmonic::<f64>(k) - k as f64;
            assert!(
                (lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0),
                "k={k}: lhs={lhs} rhs={rhs}"
            );
        }
    }

    #[test]
    fn series_options_validation_rejects_bad_tolerances() {
        let mut opts = SeriesOptions::<f64>::default();
        assert!(opts.validate().is_ok());
        opts.abs_tol = 0.0;
        assert!(matches!(opts.validate(), Err(SpecialFnError::Domain { name: "abs_tol", .. })));
        opts = SeriesOptions::default();
        opts.max_terms = 0;
        assert!(matches!(opts.validate(), Err(SpecialFnError::Domain { name: "max_terms", .. })));
    }
}

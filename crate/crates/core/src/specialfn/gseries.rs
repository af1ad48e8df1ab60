//! The alternating gamma-order series at the heart of the exact per-link
//! rate formula.
//!
//! Expanding ln(1+y) = Σ (−1)^i y^{i+1}/(i+1) under the integral splits the
//! bounded-SNR part of the expected log-rate into
//!
//! ```text
//! G(j, φ) = Σ_{i≥0} (−1)^i [ φ^{h}/(i+1) · Γ(j−h, φ)
//!                          + φ^{−h}/(i+1) · (Γ(j+h, λπ) − Γ(j+h, φ)) ],
//! h = (α/2)(i+1),  λπ = λ_bs·π,
//! ```
//!
//! equivalently G = ∫_φ^∞ ln(1+(φ/t)^{α/2}) t^{j−1}e^{−t} dt
//!              + ∫_{λπ}^φ ln(1+(t/φ)^{α/2}) t^{j−1}e^{−t} dt,
//! which is the oracle the tests integrate directly.
//!
//! Each term is a moment of a positive measure on [0, 1], so the sequence
//! is totally monotone and the accelerated alternating summation applies.
//! Both gamma factors are evaluated with the scale φ^{±h} folded into log
//! space: the first because Γ(j−h, φ) underflows while φ^h overflows, the
//! second split at φ = j+h+1 between a scaled lower-series difference and
//! a regularized-difference form.

use crate::scalar::Real;

use super::alternating::sum_alternating;
use super::gamma::ln_gamma;
use super::incgamma::{lower_gamma_scaled, upper_incomplete_gamma_scaled, upper_regularized};
use super::{SeriesOptions, SpecialFnError, SpecialFnResult};

/// Evaluates G(j, φ) for association order j ≥ 1, path-loss exponent
/// α ≥ 2 and base-station density λ_bs, with φ > λ_bs·π (equivalently a
/// reference SNR above one).
///
/// # Examples
///
/// ```
/// use mcnet_core::specialfn::{g_series, SeriesOptions};
///
/// let g = g_series(1, 6.7701, 3.0, 1e-2, &SeriesOptions::default()).unwrap();
/// assert!(g.value > 0.0 && g.error_bound < 1e-9);
/// ```
pub fn g_series<T: Real>(
    j: u32,
    phi: T,
    alpha: T,
    lambda_bs: T,
    opts: &SeriesOptions<T>,
) -> Result<SpecialFnResult<T>, SpecialFnError<T>> {
    opts.validate()?;
    if j == 0 {
        return Err(SpecialFnError::Domain {
            name: "j",
            value: T::zero(),
            requirement: "≥ 1",
        });
    }
    if !(alpha >= T::of(2.0)) || !alpha.is_finite() {
        return Err(SpecialFnError::Domain {
            name: "alpha",
            value: alpha,
            requirement: "≥ 2 and finite",
        });
    }
    if !(lambda_bs > T::zero()) || !lambda_bs.is_finite() {
        return Err(SpecialFnError::Domain {
            name: "lambda_bs",
            value: lambda_bs,
            requirement: "> 0 and finite",
        });
    }
    let lam_pi = lambda_bs * T::PI();
    if !(phi > lam_pi) || !phi.is_finite() {
        return Err(SpecialFnError::Domain {
            name: "phi",
            value: phi,
            requirement: "> lambda_bs·π and finite (reference SNR above one)",
        });
    }

    let jf = T::of_usize(j as usize);
    let half_alpha = alpha * T::of(0.5);
    let ln_phi = phi.ln();
    let term = |i: usize| -> T {
        let h = half_alpha * T::of_usize(i + 1);
        let inv = T::one() / T::of_usize(i + 1);
        let first = upper_incomplete_gamma_scaled(jf - h, phi, h * ln_phi) * inv;
        let s2 = jf + h;
        let second = if phi < s2 + T::one() {
            (lower_gamma_scaled(s2, phi, -h * ln_phi)
                - lower_gamma_scaled(s2, lam_pi, -h * ln_phi))
                * inv
        } else {
            (ln_gamma(s2) - h * ln_phi).exp()
                * (upper_regularized(s2, lam_pi) - upper_regularized(s2, phi))
                * inv
        };
        first + second
    };

    let (value, engine_bound, terms_used) = sum_alternating(term, "gamma-order series", opts)?;
    // Per-term evaluation error scales with the leading term's magnitude;
    // the accelerated weights are bounded, so a fixed multiple covers it.
    let eval_noise = term(0).abs() * T::epsilon() * T::of(64.0);
    Ok(SpecialFnResult {
        value: value.max(T::zero()),
        error_bound: engine_bound + eval_noise,
        terms_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate, QuadOptions};

    fn opts() -> SeriesOptions<f64> {
        SeriesOptions::default()
    }

    /// Direct quadrature of the two log-kernel integrals the series
    /// represents; an independent route at ~1e−12 accuracy.
    fn quadrature_oracle(j: u32, phi: f64, alpha: f64, lambda_bs: f64) -> f64 {
        let lam_pi = lambda_bs * std::f64::consts::PI;
        let jm1 = j as f64 - 1.0;
        let q = QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            ..QuadOptions::default()
        };
        let outer = integrate(
            |t: f64| (phi / t).powf(alpha / 2.0).ln_1p() * t.powf(jm1) * (-t).exp(),
            phi,
            phi + 140.0,
            &q,
        );
        let inner = integrate(
            |t: f64| (t / phi).powf(alpha / 2.0).ln_1p() * t.powf(jm1) * (-t).exp(),
            lam_pi,
            phi,
            &q,
        );
        outer.value + inner.value
    }

    #[test]
    fn matches_quadrature_across_order_and_exponent_grid() {
        let c = 10f64.powf(3.5);
        for &lambda_bs in &[1e-2_f64, 1e-1] {
            for &alpha in &[2.0_f64, 3.0, 4.0] {
                let phi = lambda_bs * std::f64::consts::PI * c.powf(2.0 / alpha);
                for j in 1..=5u32 {
                    let got = g_series(j, phi, alpha, lambda_bs, &opts()).unwrap();
                    let want = quadrature_oracle(j, phi, alpha, lambda_bs);
                    assert!(
                        (got.value - want).abs() < 1e-6,
                        "j={j} α={alpha} λ={lambda_bs} φ={phi:.4}: \
                         series {} vs quadrature {want}",
                        got.value
                    );
                    assert!(
                        (got.value - want).abs() <= got.error_bound.max(1e-9),
                        "j={j} α={alpha}: bound {} understates error {}",
                        got.error_bound,
                        (got.value - want).abs()
                    );
                }
            }
        }
    }

    #[test]
    fn small_reference_snr_regime_agrees_too() {
        // φ barely above λπ (reference SNR close to one): the inner
        // integral nearly vanishes and terms cancel hardest.
        let lambda_bs = 0.05_f64;
        let lam_pi = lambda_bs * std::f64::consts::PI;
        for &alpha in &[2.0_f64, 4.0] {
            let phi = lam_pi * 1.3;
            for j in 1..=3u32 {
                let got = g_series(j, phi, alpha, lambda_bs, &opts()).unwrap();
                let want = quadrature_oracle(j, phi, alpha, lambda_bs);
                assert!(
                    (got.value - want).abs() < 1e-8,
                    "j={j} α={alpha}: {} vs {want}",
                    got.value
                );
            }
        }
    }

    #[test]
    fn positive_and_finite_on_the_working_grid() {
        for j in 1..=5u32 {
            for &phi in &[0.5_f64, 1.766, 6.77, 30.0, 99.35] {
                let g = g_series(j, phi, 2.0, 1e-2, &opts()).unwrap();
                assert!(g.value >= 0.0 && g.value.is_finite(), "j={j} φ={phi}");
                assert!(g.error_bound.is_finite());
            }
        }
    }

    #[test]
    fn tighter_tolerances_stay_within_reported_bound() {
        let loose = SeriesOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-7,
            max_terms: 10_000,
        };
        let tight = SeriesOptions {
            abs_tol: 1e-9,
            rel_tol: 1e-8,
            max_terms: 10_000,
        };
        for &(j, phi, alpha) in &[(1u32, 6.77_f64, 3.0_f64), (3, 1.766, 4.0), (2, 30.0, 2.0)] {
            let a = g_series(j, phi, alpha, 1e-2, &loose).unwrap();
            let b = g_series(j, phi, alpha, 1e-2, &tight).unwrap();
            let drift = (a.value - b.value).abs();
            assert!(
                drift <= 10.0 * a.error_bound.max(f64::EPSILON),
                "j={j} φ={phi}: drift {drift} vs bound {}",
                a.error_bound
            );
        }
    }

    #[test]
    fn rejects_invalid_parameters() {
        let o = opts();
        assert!(g_series(0, 5.0_f64, 2.0, 1e-2, &o).is_err());
        assert!(g_series(1, 5.0_f64, 1.5, 1e-2, &o).is_err());
        assert!(g_series(1, 5.0_f64, 2.0, 0.0, &o).is_err());
        // φ below λ_bs·π means a reference SNR under one.
        assert!(g_series(1, 0.01_f64, 2.0, 1e-2, &o).is_err());
        let bad = SeriesOptions {
            abs_tol: -1.0,
            ..SeriesOptions::default()
        };
        assert!(g_series(1, 5.0_f64, 2.0, 1e-2, &bad).is_err());
    }

    #[test]
    fn term_budget_surface_reports_truncation() {
        let starved = SeriesOptions {
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            max_terms: 10,
        };
        match g_series(1, 6.77_f64, 3.0, 1e-2, &starved) {
            Err(SpecialFnError::Truncation { terms_used, .. }) => assert!(terms_used <= 10),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn single_precision_smoke() {
        let g32 = g_series(1, 1.766_f32, 4.0, 1e-2, &SeriesOptions::default()).unwrap();
        let g64 = g_series(1, 1.766_f64, 4.0, 1e-2, &opts()).unwrap();
        assert!(
            (g32.value as f64 - g64.value).abs() < 2e-4,
            "f32 {} vs f64 {}",
            g32.value,
            g64.value
        );
    }
}

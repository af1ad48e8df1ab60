//! Accelerated summation of alternating series Σ (−1)^i a_i.
//!
//! The gamma-order series summed elsewhere in this module has terms that
//! decay only like 1/i², so direct summation to 1e−12 can take hundreds of
//! thousands of terms. Its terms are moments of a measure on [0, 1]
//! (totally monotone), which is exactly the class where the Chebyshev
//! acceleration of Cohen, Rodriguez Villegas and Zagier applies: the error
//! after n accelerated terms falls like (3+√8)^{−n}, so ~30 terms reach
//! double precision.
//!
//! Strategy: a short direct phase first (cheap, and exits immediately when
//! the leading term is already below tolerance), then acceleration on the
//! remaining tail with an empirical error check at two depths.

use crate::scalar::Real;

use super::{SeriesOptions, SpecialFnError};

/// Terms summed directly before switching to acceleration. Even, so the
/// tail starts on a +a_i term and keeps the alternating form.
const DIRECT_PHASE: usize = 64;

/// Hard ceiling on the acceleration depth; (3+√8)^{−60} ≈ 1e−46 is far
/// below f64 resolution already.
const MAX_ACCEL_DEPTH: usize = 60;

/// ln(3+√8), the per-term decay rate of the acceleration error.
const LN_ACCEL_RATE: f64 = 1.762_747_174_039_086;

/// Sums Σ_{i≥0} (−1)^i a(i) for non-negative, decreasing, totally monotone
/// terms. Returns (value, error bound, terms evaluated).
pub(crate) fn sum_alternating<T, F>(
    mut a: F,
    context: &'static str,
    opts: &SeriesOptions<T>,
) -> Result<(T, T, usize), SpecialFnError<T>>
where
    T: Real,
    F: FnMut(usize) -> T,
{
    let mut sum = T::zero();
    let mut sign = T::one();
    let mut used = 0usize;
    let direct_cap = DIRECT_PHASE.min(opts.max_terms);
    let mut last_term = T::zero();
    for i in 0..direct_cap {
        let term = a(i);
        used += 1;
        if !term.is_finite() {
            return Err(SpecialFnError::Truncation {
                context,
                partial: sum,
                error_bound: T::infinity(),
                terms_used: used,
            });
        }
        let tol = opts.abs_tol.max(opts.rel_tol * sum.abs());
        if term <= tol && i >= 1 {
            // Remainder of an alternating series with decreasing terms is
            // bounded by its first omitted term.
            return Ok((sum, term, used));
        }
        sum = sum + sign * term;
        sign = -sign;
        last_term = term;
    }
    if direct_cap == opts.max_terms {
        // The term budget ends inside the direct phase without the series
        // having converged; the remainder is bounded by the next term,
        // which (terms decrease) is at most the last one summed.
        return Err(SpecialFnError::Truncation {
            context,
            partial: sum,
            error_bound: last_term,
            terms_used: used,
        });
    }

    // Accelerated tail: sum + Σ_{i≥0} (−1)^i a(DIRECT_PHASE + i).
    let tol = opts.abs_tol.max(opts.rel_tol * sum.abs());
    let head = a(direct_cap);
    used += 1;
    let mut depth = if head > T::zero() && tol > T::zero() {
        let ratio = (head / tol).ln().to_f64().unwrap_or(f64::INFINITY);
        ((ratio / LN_ACCEL_RATE).ceil() as usize).saturating_add(4)
    } else {
        8
    };
    depth = depth.clamp(8, MAX_ACCEL_DEPTH);
    let budget = opts.max_terms.saturating_sub(used);
    if depth > budget {
        return Err(SpecialFnError::Truncation {
            context,
            partial: sum,
            error_bound: head,
            terms_used: used,
        });
    }

    let mut tail_terms = Vec::with_capacity(depth);
    tail_terms.push(head);
    for i in 1..depth {
        let term = a(direct_cap + i);
        used += 1;
        if !term.is_finite() {
            return Err(SpecialFnError::Truncation {
                context,
                partial: sum,
                error_bound: T::infinity(),
                terms_used: used,
            });
        }
        tail_terms.push(term);
    }
    let shallow = accelerate(&tail_terms[..depth.saturating_sub(6).max(8).min(depth)]);
    let tail = accelerate(&tail_terms);
    let theory = head * (-(T::of_usize(depth)) * T::of(LN_ACCEL_RATE)).exp();
    let empirical = (tail - shallow).abs();
    let bound = theory.max(empirical * T::of(4.0)) + sum.abs() * T::epsilon() * T::of(8.0);
    Ok((sum + tail, bound, used))
}

/// Chebyshev-weighted partial sum of Σ (−1)^k a_k over the supplied terms.
fn accelerate<T: Real>(terms: &[T]) -> T {
    let n = terms.len();
    let nf = T::of_usize(n);
    let mut d = (nf * T::of(LN_ACCEL_RATE)).exp();
    d = (d + T::one() / d) * T::of(0.5);
    let mut b = -T::one();
    let mut c = -d;
    let mut s = T::zero();
    for (k, &ak) in terms.iter().enumerate() {
        let kf = T::of_usize(k);
        c = b - c;
        s = s + c * ak;
        b = (kf + nf) * (kf - nf) * b / ((kf + T::of(0.5)) * (kf + T::one()));
    }
    s / d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SeriesOptions<f64> {
        SeriesOptions::default()
    }

    #[test]
    fn ln_two_from_harmonic_alternation() {
        let (v, bound, used) =
            sum_alternating(|i| 1.0 / (i as f64 + 1.0), "ln2", &opts()).unwrap();
        let exact = std::f64::consts::LN_2;
        assert!(
            (v - exact).abs() < 1e-12,
            "got {v}, want {exact}, bound {bound}"
        );
        assert!((v - exact).abs() <= bound, "bound {bound} understates error");
        assert!(used < 150, "used {used} terms");
    }

    #[test]
    fn leibniz_series_for_pi() {
        let (v, bound, _) =
            sum_alternating(|i| 1.0 / (2.0 * i as f64 + 1.0), "pi/4", &opts()).unwrap();
        let exact = std::f64::consts::FRAC_PI_4;
        assert!((v - exact).abs() < 1e-12, "got {v}");
        assert!((v - exact).abs() <= bound);
    }

    #[test]
    fn slowly_decaying_square_root_terms() {
        // η(1/2) = Σ (−1)^i/√(i+1); direct summation would need ~1e24 terms
        // for this accuracy.
        let exact = 0.6048986434216303702;
        let (v, bound, used) =
            sum_alternating(|i| 1.0 / (i as f64 + 1.0).sqrt(), "eta(1/2)", &opts()).unwrap();
        assert!((v - exact).abs() < 1e-11, "got {v}, err {}", (v - exact).abs());
        assert!((v - exact).abs() <= bound, "bound {bound} vs err {}", (v - exact).abs());
        assert!(used < 150);
    }

    #[test]
    fn fast_series_exits_in_direct_phase() {
        // Geometric decay: the direct loop alone reaches tolerance.
        let (v, bound, used) =
            sum_alternating(|i| 0.25_f64.powi(i as i32), "geom", &opts()).unwrap();
        assert!((v - 0.8).abs() < 2e-10, "got {v}");
        assert!((v - 0.8).abs() <= bound, "bound {bound} understates error");
        assert!(used < 30, "expected direct-phase exit, used {used}");
    }

    #[test]
    fn tiny_leading_term_exits_immediately() {
        let (v, bound, used) = sum_alternating(
            |i| 1e-30 / (i as f64 + 1.0),
            "negligible",
            &opts(),
        )
        .unwrap();
        assert!(v.abs() <= 1e-30);
        assert!(bound <= 1e-30);
        assert!(used <= 2);
    }

    #[test]
    fn term_budget_exhaustion_reports_partial() {
        let tight = SeriesOptions {
            abs_tol: 1e-15,
            rel_tol: 0.0,
            max_terms: 20,
        };
        let err = sum_alternating(|i| 1.0 / (i as f64 + 1.0).sqrt(), "budget", &tight)
            .unwrap_err();
        match err {
            SpecialFnError::Truncation {
                partial,
                error_bound,
                terms_used,
                ..
            } => {
                assert!(terms_used <= 20);
                assert!(partial.is_finite());
                assert!(error_bound > 0.0);
            }
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_term_is_an_error() {
        let res = sum_alternating(
            |i| if i == 70 { f64::NAN } else { 1.0 / (i as f64 + 1.0) },
            "poisoned",
            &opts(),
        );
        assert!(res.is_err());
    }

    #[test]
    fn bound_stays_honest_under_tighter_tolerance() {
        // Re-evaluate at 10× tighter tolerance and check the looser run's
        // bound covers the drift.
        let loose = SeriesOptions {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            max_terms: 10_000,
        };
        let tight = SeriesOptions {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_terms: 10_000,
        };
        let f = |i: usize| 1.0 / ((i as f64 + 1.0) * (i as f64 + 2.0)).sqrt();
        let (v_loose, bound, _) = sum_alternating(f, "honesty", &loose).unwrap();
        let (v_tight, _, _) = sum_alternating(f, "honesty", &tight).unwrap();
        assert!(
            (v_loose - v_tight).abs() <= bound.max(1e-8),
            "drift {} exceeds bound {bound}",
            (v_loose - v_tight).abs()
        );
    }
}

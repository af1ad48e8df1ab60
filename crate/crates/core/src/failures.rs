//! Expected sum capacity and outage probability under link failures,
//! without bandwidth re-allocation.
//!
//! Four failure mechanisms are modelled analytically on top of the exact
//! per-link rates from [`crate::analytic`]:
//!
//! * **Random** — every link fails independently with probability p;
//! * **Overload** — a station serving d users fails with probability
//!   1 − d^{−β}, taking all its links down;
//! * **Distance** — links longer than r_max fail deterministically;
//! * **Line of sight** — a link of length r is blocked with probability
//!   [`los_blockage_prob`]`(r)`, zero inside the LoS radius.
//!
//! Each analysis returns the expected sum capacity, the outage
//! probability (no surviving links at all) and the per-link failure
//! probabilities. Re-allocation has no closed form here; the simulator
//! covers it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analytic::{
    distance_pdf, distance_tail, expected_log_snr_exact, NetworkParams, ParamError,
};
use crate::degree::DegreeModel;
use crate::quad::{integrate_split, QuadOptions};
use crate::scalar::Real;
use crate::specialfn::{lower_regularized_series, SeriesOptions, SpecialFnError};

/// Default blockage length scale in the line-of-sight model, metres.
pub const DEFAULT_BLOCKAGE_CONSTANT: f64 = 18.0;

/// A link-failure mechanism and its parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FailureModel<T> {
    /// Independent per-link failure with probability `p`.
    Random { p: T },
    /// Station with degree d fails with probability 1 − d^{−beta}.
    Overload { beta: T },
    /// Links longer than `r_max` metres fail.
    Distance { r_max: T },
    /// Distance-dependent blockage beyond `r_los` metres.
    Los { r_los: T, blockage_constant: T },
}

impl<T: Real> FailureModel<T> {
    /// Line-of-sight model with the default blockage constant.
    pub fn los(r_los: T) -> Self {
        FailureModel::Los {
            r_los,
            blockage_constant: T::of(DEFAULT_BLOCKAGE_CONSTANT),
        }
    }

    /// Checks the parameter against its admissible range.
    pub fn validate(&self) -> Result<(), ParamError> {
        let bad = |name: &'static str, value: T, requirement: &'static str| ParamError {
            name,
            value: value.to_f64().unwrap_or(f64::NAN),
            requirement,
        };
        match *self {
            FailureModel::Random { p } => {
                if !(p >= T::zero() && p <= T::one()) {
                    return Err(bad("p", p, "a probability in [0, 1]"));
                }
            }
            FailureModel::Overload { beta } => {
                if !(beta >= T::zero()) || !beta.is_finite() {
                    return Err(bad("beta", beta, "non-negative and finite"));
                }
            }
            FailureModel::Distance { r_max } => {
                if !(r_max > T::zero()) || !r_max.is_finite() {
                    return Err(bad("r_max", r_max, "strictly positive and finite"));
                }
            }
            FailureModel::Los {
                r_los,
                blockage_constant,
            } => {
                if !(r_los > T::zero()) || !r_los.is_finite() {
                    return Err(bad("r_los", r_los, "strictly positive and finite"));
                }
                if !(blockage_constant > T::zero()) || !blockage_constant.is_finite() {
                    return Err(bad(
                        "blockage_constant",
                        blockage_constant,
                        "strictly positive and finite",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Outcome of an analytic failure computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureAnalysis<T> {
    /// E[C_sum] under the failure model, bit/s.
    pub expected_sum_capacity: T,
    /// Probability that all k links of a user fail.
    pub outage_probability: T,
    /// Failure probability of link j = 1..k.
    pub per_link_fail_prob: Vec<T>,
}

/// Why a failure analysis could not be completed.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FailureError<T: Real> {
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Series(#[from] SpecialFnError<T>),
    #[error("quadrature for {context} did not converge: estimate {estimate}, error bound {error_bound}")]
    Quadrature {
        context: &'static str,
        estimate: T,
        error_bound: T,
    },
}

/// Σ_{j=1}^{k} E[log₂(1+SNR_j)], exact per-link rates.
fn exact_log_snr_sum<T: Real>(p: &NetworkParams<T>) -> Result<T, SpecialFnError<T>> {
    let opts = SeriesOptions::default();
    let mut sum = T::zero();
    for j in 1..=p.k {
        sum = sum + expected_log_snr_exact(j, p, &opts)?.value;
    }
    Ok(sum)
}

/// Radius beyond which the rank-j distance density carries less than
/// ~1e−14 of its mass; used to cap semi-infinite quadratures.
fn far_cutoff<T: Real>(j: u32, p: &NetworkParams<T>) -> T {
    let jf = T::of_usize(j as usize);
    ((jf + T::of(12.0) * jf.sqrt() + T::of(40.0)) / p.lambda_pi()).sqrt()
}

/// Breakpoints spanning `[lo, hi]` with interior nodes around the bulk of
/// the rank-j distance density (λπr² ~ Gamma(j)), so no initial quadrature
/// panel can straddle the bump without noticing it.
fn density_breakpoints<T: Real>(j: u32, p: &NetworkParams<T>, lo: T, hi: T) -> Vec<T> {
    let jf = T::of_usize(j as usize);
    let lam_pi = p.lambda_pi();
    let mut points = vec![lo];
    for u in [
        (jf - T::of(4.0) * jf.sqrt()).max(T::of(0.05)),
        jf,
        jf + T::of(6.0) * jf.sqrt() + T::of(6.0),
    ] {
        let r = (u / lam_pi).sqrt();
        let last = *points.last().expect("seeded with lo");
        if r > last * T::of(1.000001) && r < hi * T::of(0.999999) {
            points.push(r);
        }
    }
    points.push(hi);
    points
}

fn checked_quadrature<T: Real>(
    context: &'static str,
    f: impl Fn(T) -> T,
    points: &[T],
) -> Result<T, FailureError<T>> {
    let (lo, hi) = (points[0], *points.last().expect("non-empty breakpoints"));
    if !(hi > lo) {
        return Ok(T::zero());
    }
    let opts = QuadOptions {
        abs_tol: T::of(1e-12),
        rel_tol: T::of(1e-10),
        ..QuadOptions::default()
    };
    let q = integrate_split(f, points, &opts);
    let budget = T::of(1e-6) * q.value.abs().max(T::of(1e-6));
    if q.error > budget {
        return Err(FailureError::Quadrature {
            context,
            estimate: q.value,
            error_bound: q.error,
        });
    }
    Ok(q.value)
}

/// log₂(1+SNR) at link length `r`, with the sub-metre clamp at c.
pub(crate) fn rate_at<T: Real>(r: T, p: &NetworkParams<T>) -> T {
    let snr = if r <= T::one() {
        p.c
    } else {
        p.c * r.powf(-p.alpha)
    };
    snr.ln_1p() / T::of(2.0).ln()
}

/// Dispatches to the model-specific analysis.
pub fn analyze<T: Real>(
    p: &NetworkParams<T>,
    model: &FailureModel<T>,
) -> Result<FailureAnalysis<T>, FailureError<T>> {
    match *model {
        FailureModel::Random { p: fp } => analyze_random(p, fp),
        FailureModel::Overload { beta } => analyze_overload(p, beta),
        FailureModel::Distance { r_max } => analyze_distance(p, r_max),
        FailureModel::Los {
            r_los,
            blockage_constant,
        } => analyze_los(p, r_los, blockage_constant),
    }
}

/// Independent link failures: capacity scales by (1 − fp), outage is fp^k.
pub fn analyze_random<T: Real>(
    p: &NetworkParams<T>,
    fp: T,
) -> Result<FailureAnalysis<T>, FailureError<T>> {
    FailureModel::Random { p: fp }.validate()?;
    let sum = exact_log_snr_sum(p)?;
    Ok(FailureAnalysis {
        expected_sum_capacity: p.bandwidth_factor() * (T::one() - fp) * sum,
        outage_probability: fp.powi(p.k as i32),
        per_link_fail_prob: vec![fp; p.k as usize],
    })
}

/// Overloaded stations fail with probability 1 − d^{−β}. Capacity follows
/// from E[(D*)^{−β−1}] over the size-biased degree D* (the extra −1 is the
/// equal bandwidth split); the outage form uses the same moment as the
/// per-link survival probability.
pub fn analyze_overload<T: Real>(
    p: &NetworkParams<T>,
    beta: T,
) -> Result<FailureAnalysis<T>, FailureError<T>> {
    FailureModel::Overload { beta }.validate()?;
    let model = DegreeModel::new(p.k, p.lambda_u / p.lambda_bs)?;
    let moment = model.size_biased_inverse_moment(beta);
    let sum = exact_log_snr_sum(p)?;
    // bandwidth_factor × kλ × moment = (W̄_tot/λ_bs)·moment: the station
    // bandwidth density times the size-biased moment.
    let survival = moment * model.mean();
    let fail = (T::one() - moment).max(T::zero()).min(T::one());
    Ok(FailureAnalysis {
        expected_sum_capacity: p.bandwidth_factor() * survival * sum,
        outage_probability: fail.powi(p.k as i32),
        per_link_fail_prob: vec![fail; p.k as usize],
    })
}

/// Links beyond `r_max` metres fail. Per-link capacity truncates the
/// distance integral at r_max; outage is the chance the *nearest* station
/// already sits beyond r_max, e^{−λ_bs π r_max²}, independent of k.
pub fn analyze_distance<T: Real>(
    p: &NetworkParams<T>,
    r_max: T,
) -> Result<FailureAnalysis<T>, FailureError<T>> {
    FailureModel::Distance { r_max }.validate()?;
    let ln2 = T::of(2.0).ln();
    let mut capacity = T::zero();
    let mut fail = Vec::with_capacity(p.k as usize);
    for j in 1..=p.k {
        let jf = T::of_usize(j as usize);
        // Sub-metre links ride at the clamp rate; if r_max < 1 even they
        // are truncated.
        let near_radius = r_max.min(T::one());
        let near = p.c.ln_1p() / ln2
            * lower_regularized_series(jf, p.lambda_pi() * near_radius * near_radius);
        // Beyond the density's support the integrand carries < 1e−14 of
        // the mass, so an enormous r_max does not stretch the quadrature.
        let upper = r_max.min(far_cutoff(j, p));
        let body = checked_quadrature(
            "distance-limited rate",
            |r| rate_at(r, p) * distance_pdf(j, r, p),
            &density_breakpoints(j, p, T::one(), upper),
        )?;
        capacity = capacity + p.bandwidth_factor() * (near + body);
        fail.push(distance_tail(j, r_max, p));
    }
    Ok(FailureAnalysis {
        expected_sum_capacity: capacity,
        outage_probability: (-p.lambda_pi() * r_max * r_max).exp(),
        per_link_fail_prob: fail,
    })
}

/// Blockage probability of a link of length `r`: zero up to `r_los`, then
/// 1 − r^{−1}(r_los + (r − blockage_constant)·e^{−r/(2 r_los)}), clamped
/// to [0, 1] (the raw expression exits the unit interval near r_los when
/// the two length scales differ).
pub fn los_blockage_prob<T: Real>(r: T, r_los: T, blockage_constant: T) -> T {
    assert!(r > T::zero(), "link length must be positive");
    if r <= r_los {
        return T::zero();
    }
    let decay = (-r / (T::of(2.0) * r_los)).exp();
    let raw = T::one() - (r_los + (r - blockage_constant) * decay) / r;
    raw.max(T::zero()).min(T::one())
}

/// Line-of-sight failures: links inside `r_los` always survive; beyond it
/// each survives with probability 1 − g(r). Outage multiplies the k
/// independent per-link blockage expectations E[g(R_j)].
pub fn analyze_los<T: Real>(
    p: &NetworkParams<T>,
    r_los: T,
    blockage_constant: T,
) -> Result<FailureAnalysis<T>, FailureError<T>> {
    FailureModel::Los {
        r_los,
        blockage_constant,
    }
    .validate()?;
    let ln2 = T::of(2.0).ln();
    let g = move |r: T| los_blockage_prob(r, r_los, blockage_constant);
    let mut capacity = T::zero();
    let mut fail = Vec::with_capacity(p.k as usize);
    for j in 1..=p.k {
        let jf = T::of_usize(j as usize);
        let cut = far_cutoff(j, p);
        // Links shorter than both 1 m and r_los: clamp rate, no blockage.
        let safe_radius = r_los.min(T::one());
        let near = p.c.ln_1p() / ln2
            * lower_regularized_series(jf, p.lambda_pi() * safe_radius * safe_radius);
        // Between 1 m and r_los (if any): full rate, no blockage. Past the
        // density support the integrand is numerically dead, so cap at cut.
        let mid_protected = checked_quadrature(
            "protected mid-range rate",
            |r| rate_at(r, p) * distance_pdf(j, r, p),
            &density_breakpoints(j, p, T::one(), r_los.min(cut)),
        )?;
        // When r_los < 1 the clamp region (r_los, 1) is exposed to blockage.
        let sub_clamp_exposed = checked_quadrature(
            "sub-clamp blocked rate",
            |r| (T::one() - g(r)) * rate_at(r, p) * distance_pdf(j, r, p),
            &[r_los, T::one()],
        )?;
        let far = checked_quadrature(
            "far blocked rate",
            |r| (T::one() - g(r)) * rate_at(r, p) * distance_pdf(j, r, p),
            &density_breakpoints(j, p, r_los.max(T::one()), cut),
        )?;
        capacity =
            capacity + p.bandwidth_factor() * (near + mid_protected + sub_clamp_exposed + far);
        // Everything beyond the quadrature horizon is effectively blocked
        // (g → 1), so the remaining tail mass counts as failure.
        let fail_horizon = cut.max(r_los);
        let blocked = checked_quadrature(
            "blockage expectation",
            |r| g(r) * distance_pdf(j, r, p),
            &density_breakpoints(j, p, r_los, fail_horizon),
        )? + distance_tail(j, fail_horizon, p);
        fail.push(blocked.max(T::zero()).min(T::one()));
    }
    let mut outage = T::one();
    for &f in &fail {
        outage = outage * f;
    }
    Ok(FailureAnalysis {
        expected_sum_capacity: capacity,
        outage_probability: outage,
        per_link_fail_prob: fail,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{expected_sum_capacity, CapacityMethod};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Gamma};

    fn params(k: u32) -> NetworkParams<f64> {
        NetworkParams::new(1e-2, 0.1, 2.0, 10f64.powf(3.5), 0.1, k).unwrap()
    }

    fn no_failure_sum(k: u32) -> f64 {
        expected_sum_capacity(&params(k), CapacityMethod::Exact, &SeriesOptions::default())
            .unwrap()
            .sum
    }

    /// Draws R_j for the default intensity: λπR_j² ~ Gamma(j, 1).
    fn sample_distances(j: u32, p: &NetworkParams<f64>, n: usize, seed: u64) -> Vec<f64> {
        let gamma = Gamma::new(j as f64, 1.0).expect("shape j ≥ 1 is valid");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| (gamma.sample(&mut rng) / p.lambda_pi()).sqrt())
            .collect()
    }

    fn mean_and_se(samples: &[f64]) -> (f64, f64) {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }

    #[test]
    fn validation_rejects_out_of_range_parameters() {
        assert!(FailureModel::Random { p: 1.2 }.validate().is_err());
        assert!(FailureModel::Random { p: -0.1 }.validate().is_err());
        assert!(FailureModel::Overload { beta: -1.0 }.validate().is_err());
        assert!(FailureModel::Distance { r_max: 0.0 }.validate().is_err());
        assert!(FailureModel::<f64>::los(0.0).validate().is_err());
        assert!(FailureModel::Los {
            r_los: 10.0,
            blockage_constant: f64::INFINITY
        }
        .validate()
        .is_err());
        // Degree shapes exist only for k ≤ 5.
        assert!(analyze_overload(&params(6), 0.5).is_err());
    }

    #[test]
    fn default_blockage_helper_fills_the_constant() {
        match FailureModel::<f64>::los(25.0) {
            FailureModel::Los {
                r_los,
                blockage_constant,
            } => {
                assert_eq!(r_los, 25.0);
                assert_eq!(blockage_constant, 18.0);
            }
            other => panic!("expected Los variant, got {other:?}"),
        }
    }

    #[test]
    fn random_failure_scales_capacity_and_powers_outage() {
        let p = params(3);
        let base = no_failure_sum(3);
        let zero = analyze_random(&p, 0.0).unwrap();
        assert!(((zero.expected_sum_capacity - base) / base).abs() < 1e-12);
        assert_eq!(zero.outage_probability, 0.0);

        let a = analyze_random(&p, 0.1).unwrap();
        assert!((a.outage_probability - 1e-3).abs() < 1e-16);
        assert!(((a.expected_sum_capacity / base) - 0.9).abs() < 1e-12);
        assert_eq!(a.per_link_fail_prob, vec![0.1; 3]);

        let full = analyze_random(&p, 1.0).unwrap();
        assert_eq!(full.expected_sum_capacity, 0.0);
        assert_eq!(full.outage_probability, 1.0);
    }

    #[test]
    fn overload_without_pressure_only_misses_empty_stations() {
        // β = 0: every occupied station survives, so the only gap from the
        // no-failure capacity is the empty-station mass P(D = 0).
        let p = params(5);
        let model = DegreeModel::new(5, 10.0).unwrap();
        let a = analyze_overload(&p, 0.0).unwrap();
        let ratio = a.expected_sum_capacity / no_failure_sum(5);
        assert!(
            (ratio - (1.0 - model.pmf(0))).abs() < 1e-9,
            "survival ratio {ratio}"
        );
    }

    #[test]
    fn overload_at_huge_beta_keeps_single_user_stations() {
        let p = params(3);
        let model = DegreeModel::<f64>::new(3, 10.0).unwrap();
        let a = analyze_overload(&p, 500.0).unwrap();
        let want = (1.0 - model.pmf(1) / model.mean()).powi(3);
        assert!(
            ((a.outage_probability - want) / want).abs() < 1e-12,
            "{} vs {want}",
            a.outage_probability
        );
    }

    #[test]
    fn overload_matches_brute_force_degree_sums() {
        // Independent oracle: direct summation of the degree series, then
        // the capacity and outage assembled by hand.
        let p = params(3);
        let beta = 0.5;
        let model = DegreeModel::new(3, 10.0).unwrap();
        let mut s = 0.0;
        for n in 1..200_000u64 {
            let term = (n as f64).powf(-beta) * model.pmf(n);
            s += term;
            if term < 1e-300 && n as f64 > model.mean() {
                break;
            }
        }
        let moment = s / model.mean();
        let a = analyze_overload(&p, beta).unwrap();
        let want_cap = p.w_tot_density / p.lambda_bs
            * moment
            * (1..=3)
                .map(|j| {
                    expected_log_snr_exact(j, &p, &SeriesOptions::default())
                        .unwrap()
                        .value
                })
                .sum::<f64>();
        assert!(
            ((a.expected_sum_capacity - want_cap) / want_cap).abs() < 1e-10,
            "capacity {} vs {want_cap}",
            a.expected_sum_capacity
        );
        let want_out = (1.0 - moment).powi(3);
        assert!((a.outage_probability - want_out).abs() < 1e-12);
    }

    #[test]
    fn distance_outage_is_rank_independent_and_explicit() {
        let want = (-1e-2 * std::f64::consts::PI * 900.0).exp();
        for k in 1..=5u32 {
            let a = analyze_distance(&params(k), 30.0).unwrap();
            assert!(
                ((a.outage_probability - want) / want).abs() < 1e-12,
                "k={k}: {}",
                a.outage_probability
            );
        }
        // ≈ 5.2e−13 at these defaults.
        assert!(want > 4e-13 && want < 6e-13, "plug-in value {want}");
    }

    #[test]
    fn distance_capacity_grows_to_the_no_failure_limit() {
        let p = params(3);
        let base = no_failure_sum(3);
        // Strict growth is only resolvable while r_max truncates real mass;
        // past ~45 m the remaining rank-3 tail is below f64 resolution.
        let mut prev = 0.0;
        for &r_max in &[3.0, 5.0, 10.0, 20.0, 35.0] {
            let a = analyze_distance(&p, r_max).unwrap();
            assert!(
                a.expected_sum_capacity > prev,
                "r_max={r_max}: capacity fell"
            );
            assert!(
                a.expected_sum_capacity <= base * (1.0 + 1e-12),
                "r_max={r_max}: exceeded the no-failure value"
            );
            prev = a.expected_sum_capacity;
        }
        let wide = analyze_distance(&p, 1e4).unwrap();
        assert!(
            ((wide.expected_sum_capacity - base) / base).abs() < 1e-4,
            "r_max → ∞ limit: {} vs {base}",
            wide.expected_sum_capacity
        );
    }

    #[test]
    fn distance_below_one_metre_keeps_only_clamped_links() {
        let p = params(1);
        let a = analyze_distance(&p, 0.5).unwrap();
        let want = p.bandwidth_factor()
            * (1.0 + p.c).log2()
            * (1.0 - (-p.lambda_pi() * 0.25).exp());
        assert!(
            ((a.expected_sum_capacity - want) / want).abs() < 1e-12,
            "{} vs {want}",
            a.expected_sum_capacity
        );
    }

    #[test]
    fn blockage_probability_cases() {
        // Inside the LoS radius: never blocked.
        assert_eq!(los_blockage_prob::<f64>(17.9, 18.0, 18.0), 0.0);
        assert_eq!(los_blockage_prob::<f64>(18.0, 18.0, 18.0), 0.0);
        // Matched length scales at r = 2·r_los: 1/2 − e⁻¹/2.
        let got = los_blockage_prob::<f64>(36.0, 18.0, 18.0);
        assert!(
            (got - 0.3160602794142788).abs() < 1e-12,
            "g(36) = {got}"
        );
        // Far field: g → 1 − r_los/r → 1.
        let far = los_blockage_prob(1e7, 18.0, 18.0);
        assert!(far > 1.0 - 1e-5 && far <= 1.0, "g(1e7) = {far}");
        // Raw expression dips negative just beyond r_los when the blockage
        // constant is smaller than r_los; the clamp must hold.
        let clamped_low = los_blockage_prob(30.1, 30.0, 18.0);
        assert_eq!(clamped_low, 0.0);
        // And overshoots one in the opposite imbalance.
        let clamped_high = los_blockage_prob(10.5, 10.0, 50.0);
        assert_eq!(clamped_high, 1.0);
    }

    #[test]
    fn los_with_huge_radius_recovers_no_failure() {
        let p = params(2);
        let base = no_failure_sum(2);
        let a = analyze_los(&p, 1e4, 18.0).unwrap();
        assert!(
            ((a.expected_sum_capacity - base) / base).abs() < 1e-6,
            "{} vs {base}",
            a.expected_sum_capacity
        );
        assert!(a.outage_probability < 1e-8);
    }

    #[test]
    fn los_outage_never_increases_with_more_links() {
        let mut prev = 1.0;
        for k in 1..=5u32 {
            let a = analyze_los(&params(k), 10.0, 18.0).unwrap();
            assert!(
                a.outage_probability <= prev + 1e-15,
                "k={k}: outage {} rose above {prev}",
                a.outage_probability
            );
            assert!(a.outage_probability >= 0.0 && a.outage_probability <= 1.0);
            prev = a.outage_probability;
        }
    }

    #[test]
    fn every_model_stays_between_zero_and_no_failure() {
        let p = params(4);
        let base = no_failure_sum(4);
        let models = [
            FailureModel::Random { p: 0.35 },
            FailureModel::Overload { beta: 0.75 },
            FailureModel::Distance { r_max: 25.0 },
            FailureModel::los(12.0),
        ];
        for m in models {
            let a = analyze(&p, &m).unwrap();
            assert!(
                a.expected_sum_capacity >= 0.0
                    && a.expected_sum_capacity <= base * (1.0 + 1e-12),
                "{m:?}: capacity {} vs ceiling {base}",
                a.expected_sum_capacity
            );
            assert!(
                a.outage_probability >= 0.0 && a.outage_probability <= 1.0,
                "{m:?}: outage {}",
                a.outage_probability
            );
            assert_eq!(a.per_link_fail_prob.len(), 4);
        }
    }

    #[test]
    fn distance_quadrature_matches_monte_carlo() {
        // 10⁶ draws of R_j; the truncated-rate expectation must land
        // within 3 standard errors of the quadrature value.
        let p = params(3);
        let r_max = 20.0;
        let a = analyze_distance(&p, r_max).unwrap();
        let mut mc_sum = 0.0;
        let mut mc_se2 = 0.0;
        for j in 1..=3u32 {
            let samples: Vec<f64> = sample_distances(j, &p, 1_000_000, 7_000 + j as u64)
                .into_iter()
                .map(|r| if r <= r_max { rate_at(r, &p) } else { 0.0 })
                .collect();
            let (mean, se) = mean_and_se(&samples);
            mc_sum += mean;
            mc_se2 += se * se;
        }
        let mc_cap = p.bandwidth_factor() * mc_sum;
        let se_cap = p.bandwidth_factor() * mc_se2.sqrt();
        let z = (a.expected_sum_capacity - mc_cap) / se_cap;
        assert!(
            z.abs() < 3.0,
            "distance capacity {} vs MC {mc_cap} ± {se_cap} (z = {z:.2})",
            a.expected_sum_capacity
        );
    }

    #[test]
    fn los_quadrature_matches_monte_carlo() {
        let p = params(1);
        let r_los = 7.5;
        let a = analyze_los(&p, r_los, 18.0).unwrap();
        let distances = sample_distances(1, &p, 1_000_000, 99);
        let rate: Vec<f64> = distances
            .iter()
            .map(|&r| (1.0 - los_blockage_prob(r, r_los, 18.0)) * rate_at(r, &p))
            .collect();
        let (mean, se) = mean_and_se(&rate);
        let z = (a.expected_sum_capacity - p.bandwidth_factor() * mean)
            / (p.bandwidth_factor() * se);
        assert!(
            z.abs() < 3.0,
            "LoS capacity {} vs MC {} (z = {z:.2})",
            a.expected_sum_capacity,
            p.bandwidth_factor() * mean
        );

        let blocked: Vec<f64> = distances
            .iter()
            .map(|&r| los_blockage_prob(r, r_los, 18.0))
            .collect();
        let (mean_g, se_g) = mean_and_se(&blocked);
        let zg = (a.outage_probability - mean_g) / se_g;
        assert!(
            zg.abs() < 3.0,
            "LoS outage {} vs MC {mean_g} (z = {zg:.2})",
            a.outage_probability
        );
    }

    #[test]
    fn dispatcher_routes_to_the_same_results() {
        let p = params(2);
        let direct = analyze_random(&p, 0.2).unwrap();
        let routed = analyze(&p, &FailureModel::Random { p: 0.2 }).unwrap();
        assert_eq!(direct, routed);
    }
}

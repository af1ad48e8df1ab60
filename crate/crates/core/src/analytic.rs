//! Closed-form network laws: the SNR distribution induced by nearest-BS
//! distances, exact and approximate expected log-rates, and per-link /
//! sum capacity moments.
//!
//! Distances to the j-th nearest base station of a homogeneous PPP obey
//! P(R_j > r) = Γ(j, λπr²)/Γ(j). Received SNR is c·r^{−α} clamped at c
//! inside one metre, which maps that law onto a density on (0, c) plus a
//! point mass at c. The exact expected log-rate assembles incomplete-gamma
//! pieces (including the alternating series and the order derivative from
//! [`crate::specialfn`]); the high-SNR closed form replaces all of it with
//! ln φ + γ − H_{j−1} up to scale, at the price of a restricted validity
//! region.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quad::{integrate_split, QuadOptions};
use crate::scalar::Real;
use crate::specialfn::{
    g_series, gamma, harmonic, lower_regularized_series, upper_incomplete_gamma_dorder,
    upper_regularized, SeriesOptions, SpecialFnError, SpecialFnResult,
};

/// Scenario parameters shared by every analytic and simulated quantity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams<T> {
    /// Base-station density, per m².
    pub lambda_bs: T,
    /// User density, per m².
    pub lambda_u: T,
    /// Path-loss exponent.
    pub alpha: T,
    /// Transmit-power to noise ratio; also the SNR clamp inside one metre.
    pub c: T,
    /// Total bandwidth per area, Hz per m².
    pub w_tot_density: T,
    /// Connectivity degree: links per user.
    pub k: u32,
}

/// Rejected [`NetworkParams`] field.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("parameter `{name}` must be {requirement}, got {value}")]
pub struct ParamError {
    pub name: &'static str,
    pub value: f64,
    pub requirement: &'static str,
}

impl<T: Real> NetworkParams<T> {
    /// Validates and builds a parameter set.
    pub fn new(
        lambda_bs: T,
        lambda_u: T,
        alpha: T,
        c: T,
        w_tot_density: T,
        k: u32,
    ) -> Result<Self, ParamError> {
        let positive: [(&'static str, T); 5] = [
            ("lambda_bs", lambda_bs),
            ("lambda_u", lambda_u),
            ("alpha", alpha),
            ("c", c),
            ("w_tot_density", w_tot_density),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(ParamError {
                    name,
                    value: v.to_f64().unwrap_or(f64::NAN),
                    requirement: "strictly positive and finite",
                });
            }
        }
        if k == 0 {
            return Err(ParamError {
                name: "k",
                value: 0.0,
                requirement: "an integer ≥ 1",
            });
        }
        Ok(NetworkParams {
            lambda_bs,
            lambda_u,
            alpha,
            c,
            w_tot_density,
            k,
        })
    }

    /// The composite φ = λ_bs·π·c^{2/α} governing the SNR law.
    pub fn phi(&self) -> T {
        self.lambda_bs * T::PI() * self.c.powf(T::of(2.0) / self.alpha)
    }

    /// λ_bs·π, the mean number of base stations within one metre... of the
    /// unit disc; the lower limit of every incomplete-gamma argument here.
    pub fn lambda_pi(&self) -> T {
        self.lambda_bs * T::PI()
    }

    /// Per-link bandwidth factor W̄_tot/(k·λ_u), in Hz.
    pub fn bandwidth_factor(&self) -> T {
        self.w_tot_density / (T::of_usize(self.k as usize) * self.lambda_u)
    }

    /// Same scenario with a different connectivity degree.
    pub fn with_k(&self, k: u32) -> Result<Self, ParamError> {
        Self::new(
            self.lambda_bs,
            self.lambda_u,
            self.alpha,
            self.c,
            self.w_tot_density,
            k,
        )
    }
}

/// Which expectation backs a capacity figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CapacityMethod {
    /// Full incomplete-gamma assembly of E[log₂(1+SNR_j)].
    Exact,
    /// High-SNR closed form (α/(2 ln 2))(ln φ + γ − H_{j−1}).
    HighSnrApprox,
}

/// Per-link and summed expected capacities for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityMoments<T> {
    /// E[C_j] for j = 1..k, bit/s.
    pub per_link: Vec<T>,
    /// E[C_sum] = Σ_j E[C_j], bit/s.
    pub sum: T,
    pub method: CapacityMethod,
}

/// Density of SNR_j at `x`, valid on 0 ≤ x < c; zero outside. The clamp
/// at c carries the separate probability [`snr_point_mass`].
pub fn snr_pdf<T: Real>(j: u32, x: T, p: &NetworkParams<T>) -> T {
    assert!(j >= 1, "SNR rank j must be ≥ 1, got {j}");
    if x <= T::zero() || x >= p.c {
        return T::zero();
    }
    let jf = T::of_usize(j as usize);
    // y = φ·x^{−2/α}; ln pdf = ln 2 + j ln y − ln α − ln x − ln Γ(j) − y.
    let ln_y = p.phi().ln() - T::of(2.0) / p.alpha * x.ln();
    let ln_pdf = T::of(2.0).ln() + jf * ln_y - p.alpha.ln() - x.ln()
        - crate::specialfn::ln_gamma(jf)
        - ln_y.exp();
    ln_pdf.exp()
}

/// P(SNR_j = c): the probability the j-th base station sits inside the
/// one-metre clamp radius.
pub fn snr_point_mass<T: Real>(j: u32, p: &NetworkParams<T>) -> T {
    assert!(j >= 1, "SNR rank j must be ≥ 1, got {j}");
    lower_regularized_series(T::of_usize(j as usize), p.lambda_pi())
}

/// P(R_j > r): tail of the distance to the j-th nearest base station.
pub fn distance_tail<T: Real>(j: u32, r: T, p: &NetworkParams<T>) -> T {
    assert!(j >= 1, "distance rank j must be ≥ 1, got {j}");
    if r <= T::zero() {
        return T::one();
    }
    upper_regularized(T::of_usize(j as usize), p.lambda_pi() * r * r)
}

/// Density of R_j at `r`: 2(λπr²)^j e^{−λπr²}/(r·Γ(j)).
pub fn distance_pdf<T: Real>(j: u32, r: T, p: &NetworkParams<T>) -> T {
    assert!(j >= 1, "distance rank j must be ≥ 1, got {j}");
    if r <= T::zero() {
        return T::zero();
    }
    let jf = T::of_usize(j as usize);
    let u = p.lambda_pi() * r * r;
    (T::of(2.0).ln() + jf * u.ln() - u - crate::specialfn::ln_gamma(jf) - r.ln()).exp()
}

/// E[log₂(1+SNR_j)] assembled from incomplete-gamma pieces:
/// G(j, φ)/(ln 2·Γ(j)) for the sub-clamp body, log₂(1+c) times the clamp
/// mass, and an α/(2 ln 2) block mixing Γ(j, ·) differences with the
/// derivative of Γ(a, ·) in the order.
pub fn expected_log_snr_exact<T: Real>(
    j: u32,
    p: &NetworkParams<T>,
    opts: &SeriesOptions<T>,
) -> Result<SpecialFnResult<T>, SpecialFnError<T>> {
    assert!(j >= 1, "SNR rank j must be ≥ 1, got {j}");
    let jf = T::of_usize(j as usize);
    let phi = p.phi();
    let lam_pi = p.lambda_pi();
    let ln2 = T::of(2.0).ln();
    let whole_gamma = gamma(jf).expect("Γ(j) is defined for every rank j ≥ 1");

    let g = g_series(j, phi, p.alpha, p.lambda_bs, opts)?;
    let body = g.value / (ln2 * whole_gamma);

    let clamp = p.c.ln_1p() / ln2 * snr_point_mass(j, p);

    let d_low = upper_incomplete_gamma_dorder(jf, lam_pi, opts)?;
    let d_high = upper_incomplete_gamma_dorder(jf, phi, opts)?;
    // Γ(j, λπ) − Γ(j, φ) expressed through lower regularized values to
    // avoid cancelling two numbers near Γ(j).
    let reg_diff = lower_regularized_series(jf, phi) - lower_regularized_series(jf, lam_pi);
    let scale = p.alpha / (T::of(2.0) * ln2);
    let tail = scale * (phi.ln() * reg_diff - (d_low.value - d_high.value) / whole_gamma);

    let value = body + clamp + tail;
    let error_bound = g.error_bound / (ln2 * whole_gamma)
        + scale * (d_low.error_bound + d_high.error_bound) / whole_gamma
        + (body.abs() + clamp.abs() + tail.abs()) * T::epsilon() * T::of(16.0);
    Ok(SpecialFnResult {
        value,
        error_bound,
        terms_used: g.terms_used + d_low.terms_used + d_high.terms_used,
    })
}

/// A closed-form value plus the flag saying whether the parameters sit in
/// the regime the formula was derived for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxValue<T> {
    pub value: T,
    /// True when λ_bs π < 1, φ > 1 and c > 1 — the high-SNR sparse-network
    /// regime. Outside it the closed form can even go negative.
    pub in_validity_region: bool,
}

/// High-SNR approximation of E[log₂(1+SNR_j)]:
/// (α/(2 ln 2))(ln φ + γ − λ_bs π) at j = 1, and
/// (α/(2 ln 2))(ln φ + γ − H_{j−1}) for j > 1.
pub fn expected_log_snr_approx<T: Real>(j: u32, p: &NetworkParams<T>) -> ApproxValue<T> {
    assert!(j >= 1, "SNR rank j must be ≥ 1, got {j}");
    let phi = p.phi();
    let scale = p.alpha / (T::of(2.0) * T::of(2.0).ln());
    let correction = if j == 1 {
        p.lambda_pi()
    } else {
        harmonic::<T>(j - 1)
    };
    ApproxValue {
        value: scale * (phi.ln() + T::euler_gamma() - correction),
        in_validity_region: p.lambda_pi() < T::one() && phi > T::one() && p.c > T::one(),
    }
}

/// E[C_j] = W̄_tot/(k λ_u) · E[log₂(1+SNR_j)], bit/s.
pub fn expected_capacity_per_link<T: Real>(
    j: u32,
    p: &NetworkParams<T>,
    method: CapacityMethod,
    opts: &SeriesOptions<T>,
) -> Result<T, SpecialFnError<T>> {
    assert!(
        j >= 1 && j <= p.k,
        "link rank j must satisfy 1 ≤ j ≤ k = {}, got {j}",
        p.k
    );
    let log_term = match method {
        CapacityMethod::Exact => expected_log_snr_exact(j, p, opts)?.value,
        CapacityMethod::HighSnrApprox => expected_log_snr_approx(j, p).value,
    };
    Ok(p.bandwidth_factor() * log_term)
}

/// E[C_sum] with its per-link decomposition. The approximate method's sum
/// collapses, via Σ_{j<k} H_j = kH_k − k, to
/// (W̄_tot/λ_u)(α/(2 ln 2))(ln φ + γ + 1 − H_k − λ_bs π/k).
pub fn expected_sum_capacity<T: Real>(
    p: &NetworkParams<T>,
    method: CapacityMethod,
    opts: &SeriesOptions<T>,
) -> Result<CapacityMoments<T>, SpecialFnError<T>> {
    let mut per_link = Vec::with_capacity(p.k as usize);
    for j in 1..=p.k {
        per_link.push(expected_capacity_per_link(j, p, method, opts)?);
    }
    let sum = match method {
        CapacityMethod::Exact => {
            let mut s = T::zero();
            for &v in &per_link {
                s = s + v;
            }
            s
        }
        CapacityMethod::HighSnrApprox => {
            let kf = T::of_usize(p.k as usize);
            p.w_tot_density / p.lambda_u
                * (p.alpha / (T::of(2.0) * T::of(2.0).ln()))
                * (p.phi().ln() + T::euler_gamma() + T::one()
                    - harmonic::<T>(p.k)
                    - p.lambda_pi() / kf)
        }
    };
    Ok(CapacityMoments {
        per_link,
        sum,
        method,
    })
}

/// Ordering report from [`sum_capacity_is_decreasing`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityWitness<T> {
    /// Approximate E[C_sum] for k = 1..=k_max, in order.
    pub sums: Vec<T>,
    /// Whether the sequence strictly decreases.
    pub strictly_decreasing: bool,
    /// True when λ_bs π < 1, the regime where the decrease is provable
    /// (H_{k+1} + λπ/(k+1) > H_k + λπ/k reduces to k > λπ).
    pub guaranteed: bool,
}

/// Evaluates the approximate sum capacity over k = 1..=k_max and reports
/// whether it strictly decreases.
pub fn sum_capacity_is_decreasing<T: Real>(
    p: &NetworkParams<T>,
    k_max: u32,
) -> Result<MonotonicityWitness<T>, ParamError> {
    assert!(k_max >= 1, "k_max must be ≥ 1, got {k_max}");
    let opts = SeriesOptions::default();
    let mut sums = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max {
        let pk = p.with_k(k)?;
        let m = expected_sum_capacity(&pk, CapacityMethod::HighSnrApprox, &opts)
            .expect("the closed-form path has no truncation failure modes");
        sums.push(m.sum);
    }
    let strictly_decreasing = sums.windows(2).all(|w| w[1] < w[0]);
    Ok(MonotonicityWitness {
        sums,
        strictly_decreasing,
        guaranteed: p.lambda_pi() < T::one(),
    })
}

/// Quadrature evaluation of E[log₂(1+SNR_j)] straight from the density
/// plus point mass — the independent oracle for the series assembly.
pub fn expected_log_snr_quadrature<T: Real>(j: u32, p: &NetworkParams<T>) -> T {
    let ln2 = T::of(2.0).ln();
    let opts = QuadOptions {
        abs_tol: T::of(1e-12),
        rel_tol: T::of(1e-10),
        ..QuadOptions::default()
    };
    let pc = *p;
    let body = integrate_split(
        move |x: T| x.ln_1p() / ln2 * snr_pdf(j, x, &pc),
        &[T::zero(), T::one().min(p.c), p.c],
        &opts,
    );
    body.value + p.c.ln_1p() / ln2 * snr_point_mass(j, p)
}

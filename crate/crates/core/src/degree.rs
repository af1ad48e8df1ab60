//! Base-station degree law and its size-biased moments.
//!
//! With users at density λ_u attaching to their k nearest stations at
//! density λ_bs, a station's load D is well fitted by a negative binomial
//! with mean kλ (λ = λ_u/λ_bs) and a connectivity-dependent shape a_k:
//!
//! ```text
//! P(D = n) = Γ(n+a_k)/(Γ(n+1)Γ(a_k)) · a_k^{a_k} (kλ)^n / (kλ+a_k)^{a_k+n}
//! ```
//!
//! Bandwidth and overload calculations need moments of the *size-biased*
//! load D* — the degree of the station serving a randomly chosen user,
//! P(D* = n) ∝ n·P(D = n) — specifically E[(D*)^{−β−1}], which
//! [`DegreeModel::size_biased_inverse_moment`] evaluates by adaptive
//! summation.

use serde::{Deserialize, Serialize};

use crate::analytic::ParamError;
use crate::scalar::Real;
use crate::specialfn::ln_gamma;

/// Negative-binomial shape constants fitted for connectivity degrees 1..5.
pub const SHAPE_CONSTANTS: [f64; 5] = [3.5, 7.2, 11.1, 15.2, 21.2];

/// Degree distribution of a base station at connectivity degree `k` and
/// user-to-station density ratio `lambda_ratio`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegreeModel<T> {
    k: u32,
    lambda_ratio: T,
    shape: T,
}

impl<T: Real> DegreeModel<T> {
    /// Builds the model; `k` must lie in 1..=5 (the fitted-shape range)
    /// and `lambda_ratio` must be positive and finite.
    pub fn new(k: u32, lambda_ratio: T) -> Result<Self, ParamError> {
        if !(1..=5).contains(&k) {
            return Err(ParamError {
                name: "k",
                value: k as f64,
                requirement: "between 1 and 5 (fitted shape constants)",
            });
        }
        if !(lambda_ratio > T::zero()) || !lambda_ratio.is_finite() {
            return Err(ParamError {
                name: "lambda_ratio",
                value: lambda_ratio.to_f64().unwrap_or(f64::NAN),
                requirement: "strictly positive and finite",
            });
        }
        Ok(DegreeModel {
            k,
            lambda_ratio,
            shape: T::of(SHAPE_CONSTANTS[(k - 1) as usize]),
        })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn lambda_ratio(&self) -> T {
        self.lambda_ratio
    }

    /// The fitted shape constant a_k.
    pub fn shape(&self) -> T {
        self.shape
    }

    /// Mean degree kλ.
    pub fn mean(&self) -> T {
        T::of_usize(self.k as usize) * self.lambda_ratio
    }

    fn ln_pmf(&self, n: u64) -> T {
        let a = self.shape;
        let m = self.mean();
        let nf = T::of(n as f64);
        let one = T::one();
        ln_gamma(nf + a) - ln_gamma(nf + one) - ln_gamma(a) + a * a.ln() + nf * m.ln()
            - (a + nf) * (m + a).ln()
    }

    /// P(D = n), evaluated in log space so deep tails stay finite.
    pub fn pmf(&self, n: u64) -> T {
        self.ln_pmf(n).exp()
    }

    /// E[(D*)^{−β−1}] = (1/(kλ)) Σ_{n≥1} n^{−β} P(D = n), the size-biased
    /// inverse moment behind bandwidth splitting (β = 0) and overload
    /// survival. The sum stops once a geometric bound on the remaining
    /// tail drops below 1e−12.
    pub fn size_biased_inverse_moment(&self, beta: T) -> T {
        assert!(
            beta >= T::zero() && beta.is_finite(),
            "moment exponent beta must be ≥ 0 and finite"
        );
        let a = self.shape;
        let mean = self.mean();
        let tail_cut = T::of(1e-12);
        // Successive-term ratio P(n+1)/P(n) = ρ·(n+a)/(n+1) with
        // ρ = kλ/(kλ+a); it decreases in n (a > 1), so once it falls
        // below one it bounds the whole remaining tail geometrically.
        let rho = mean / (mean + a);
        let mut prob = self.pmf(1);
        let mut total = prob; // n = 1 contributes 1^{−β}·P(1)
        let mut n: u64 = 1;
        loop {
            let nf = T::of(n as f64);
            let ratio = rho * (nf + a) / (nf + T::one());
            if ratio < T::one() {
                let tail = prob * ratio / (T::one() - ratio) * (nf + T::one()).powf(-beta);
                if tail < tail_cut {
                    break;
                }
            }
            prob = prob * ratio;
            n += 1;
            total = total + T::of(n as f64).powf(-beta) * prob;
            assert!(
                n < 50_000_000,
                "degree-moment summation failed to converge (kλ = {mean})"
            );
        }
        total / mean
    }

    /// The idealization 1/(kλ) of [`Self::size_biased_inverse_moment`] at
    /// β = 0, which pretends every station has at least one user. The two
    /// differ by the factor 1 − P(D = 0); both are reported so the gap
    /// stays visible in diagnostics.
    pub fn idealized_inverse_mean(&self) -> T {
        self.mean().recip()
    }
}

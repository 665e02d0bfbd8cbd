//! Sample statistics, method-of-moments estimates and their delta-method
//! sampling moments on the `(ln mu, ln(P + 1))` scale.

use core::cmp::Ordering;

use libm::{log, sqrt};

use crate::model::NbParams;
use crate::{Error, Result};

/// Sample size, mean, second raw moment and divide-by-`n` variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    n: u64,
    mean: f64,
    m2: f64,
    s2: f64,
}

/// Which model the moment estimate points to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    NegativeBinomial,
    /// `s^2 <= X̄`: the moment estimate of `P` is not positive.
    PoissonLimit,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NegativeBinomial => "NegativeBinomial",
            Regime::PoissonLimit => "PoissonLimit",
        }
    }
}

impl core::fmt::Display for Regime {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Method-of-moments point estimates. `p_hat` keeps its raw sign; a negative
/// value still defines a valid confidence region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub mu_hat: f64,
    pub p_hat: f64,
    pub log_mu_hat: f64,
    pub log_p1_hat: f64,
    pub regime: Regime,
}

/// Asymptotic moments of `theta1 = ln mu_hat` and `theta2 = ln(P_hat + 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticMoments {
    pub var_log_mu: f64,
    pub var_log_p1: f64,
    pub cov: f64,
    pub rho: f64,
    /// Coefficient making `theta2 - a theta1` uncorrelated with `theta1`.
    pub a: f64,
    /// `Var(theta2 - a theta1)`.
    pub var_resid: f64,
}

/// Exact integer sums of a sample.
#[derive(Debug, Clone, Copy)]
struct Sums {
    n: u128,
    sum: u128,
    sum_sq: u128,
}

impl Sums {
    fn of(data: &[u64]) -> Result<Self> {
        let mut sum: u128 = 0;
        let mut sum_sq: u128 = 0;
        for &x in data {
            let x = x as u128;
            sum = sum.checked_add(x).ok_or(Error::Overflow)?;
            sum_sq = sum_sq.checked_add(x * x).ok_or(Error::Overflow)?;
        }
        Ok(Self { n: data.len() as u128, sum, sum_sq })
    }

    /// `n^2 s^2 = n sum_sq - sum^2`, exact.
    fn scaled_variance(&self) -> Result<u128> {
        let lhs = self.n.checked_mul(self.sum_sq).ok_or(Error::Overflow)?;
        let rhs = self.sum.checked_mul(self.sum).ok_or(Error::Overflow)?;
        Ok(lhs - rhs)
    }
}

impl SampleStats {
    /// Statistics of a count sample, accumulated as exact integer sums.
    pub fn from_counts(data: &[u64]) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::EmptySample(data.len()));
        }
        let sums = Sums::of(data)?;
        let n = data.len() as f64;
        let mean = sums.sum as f64 / n;
        let s2 = sums.scaled_variance()? as f64 / (n * n);
        Ok(Self { n: data.len() as u64, mean, m2: s2 + mean * mean, s2 })
    }

    pub fn from_signed(data: &[i64]) -> Result<Self> {
        if let Some(&bad) = data.iter().find(|&&x| x < 0) {
            return Err(Error::NegativeCount(bad));
        }
        let counts: alloc::vec::Vec<u64> = data.iter().map(|&x| x as u64).collect();
        Self::from_counts(&counts)
    }

    /// From summary moments: mean and second raw moment.
    pub fn from_moments(n: u64, mean: f64, m2: f64) -> Result<Self> {
        Self::check(n, mean)?;
        let s2 = m2 - mean * mean;
        if !(s2 >= 0.0) {
            return Err(Error::InvalidParameter { name: "m2", value: m2 });
        }
        Ok(Self { n, mean, m2, s2 })
    }

    /// From summary moments: mean and divide-by-`n` variance.
    pub fn from_mean_variance(n: u64, mean: f64, s2: f64) -> Result<Self> {
        Self::check(n, mean)?;
        if !(s2.is_finite() && s2 >= 0.0) {
            return Err(Error::InvalidParameter { name: "s2", value: s2 });
        }
        Ok(Self { n, mean, m2: s2 + mean * mean, s2 })
    }

    fn check(n: u64, mean: f64) -> Result<()> {
        if n < 2 {
            return Err(Error::EmptySample(n as usize));
        }
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::InvalidParameter { name: "mean", value: mean });
        }
        Ok(())
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn s2(&self) -> f64 {
        self.s2
    }

    /// Method-of-moments estimates `mu_hat = X̄`, `P_hat = (s^2 - X̄)/X̄`.
    pub fn mme(&self) -> Result<EstimateResult> {
        if self.mean == 0.0 {
            return Err(Error::ZeroMean);
        }
        if self.s2 == 0.0 {
            return Err(Error::ZeroVariance);
        }
        let p_hat = (self.s2 - self.mean) / self.mean;
        Ok(EstimateResult {
            mu_hat: self.mean,
            p_hat,
            log_mu_hat: log(self.mean),
            log_p1_hat: log(self.s2 / self.mean),
            regime: if p_hat <= 0.0 { Regime::PoissonLimit } else { Regime::NegativeBinomial },
        })
    }

    /// First-order deviations `(ln mu_hat - ln mu, ln(P_hat + 1) - ln(P + 1))`
    /// from the linear expansion around the true moments.
    pub fn linearized_estimates(&self, params: &NbParams) -> (f64, f64) {
        let (mu, p) = (params.mu(), params.p_shape());
        let ex2 = mu * (1.0 + mu + p);
        let d_mean = self.mean - mu;
        let dtheta1 = d_mean / mu;
        let dtheta2 =
            -(1.0 + p + 2.0 * mu) / (mu * (1.0 + p)) * d_mean + (self.m2 - ex2) / (mu * (1.0 + p));
        (dtheta1, dtheta2)
    }
}

/// How the sample variance compares with the sample mean, decided exactly on
/// integer sums. `Less` means strictly under-dispersed.
pub fn dispersion(data: &[u64]) -> Result<Ordering> {
    let sums = Sums::of(data)?;
    // s^2 vs X̄  <=>  n sum_sq - sum^2  vs  n sum
    let lhs = sums.scaled_variance()?;
    let rhs = sums.n.checked_mul(sums.sum).ok_or(Error::Overflow)?;
    Ok(lhs.cmp(&rhs))
}

impl EstimateResult {
    /// Estimates as reported elsewhere, as `(mu_hat, P_hat + 1)`.
    pub fn from_reported(mu_hat: f64, p1_hat: f64) -> Result<Self> {
        if !(mu_hat.is_finite() && mu_hat > 0.0) {
            return Err(Error::InvalidParameter { name: "mu_hat", value: mu_hat });
        }
        if !(p1_hat.is_finite() && p1_hat > 0.0) {
            return Err(Error::InvalidParameter { name: "P_hat + 1", value: p1_hat });
        }
        let p_hat = p1_hat - 1.0;
        Ok(Self {
            mu_hat,
            p_hat,
            log_mu_hat: log(mu_hat),
            log_p1_hat: log(p1_hat),
            regime: if p_hat <= 0.0 { Regime::PoissonLimit } else { Regime::NegativeBinomial },
        })
    }

    /// Standardized, decorrelated coordinates `(z1, z2)` at the candidate
    /// `params`; `z1^2 + z2^2` is the region statistic.
    pub fn standardize(&self, params: &NbParams, n: u64) -> (f64, f64) {
        let am = AsymptoticMoments::new(params, n);
        let d1 = self.log_mu_hat - log(params.mu());
        let d2 = self.log_p1_hat - libm::log1p(params.p_shape());
        (d1 / sqrt(am.var_log_mu), (d2 - am.a * d1) / sqrt(am.var_resid))
    }
}

impl AsymptoticMoments {
    pub fn new(params: &NbParams, n: u64) -> Self {
        let (mu, p) = (params.mu(), params.p_shape());
        let n = n as f64;
        let var_log_mu = (p + 1.0) / (mu * n);
        let var_log_p1 = (3.0 * p * p + 2.0 * mu * p + 2.0 * p + 2.0 * mu) / (mu * (1.0 + p) * n);
        let cov = p / (mu * n);
        Self {
            var_log_mu,
            var_log_p1,
            cov,
            rho: cov / sqrt(var_log_mu * var_log_p1),
            a: p / (1.0 + p),
            var_resid: 2.0 * (mu + p) / (mu * n),
        }
    }
}

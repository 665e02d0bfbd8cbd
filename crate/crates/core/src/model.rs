//! Distribution mathematics for `NB(mu, P)`.
//!
//! `P(X = x) = C(x + mu/P - 1, x) (1/(1+P))^(mu/P) (P/(1+P))^x`, which has mean
//! `mu` and variance `mu (1 + P)`. The classic form uses `p = 1/(1+P)` and
//! `alpha = mu/P`. At `P = 0` the family degenerates to `Poisson(mu)`.

use libm::{exp, lgamma, log, log1p, sqrt};

use crate::{Error, Result};

/// Below this count the PMF is an exact log-product; above it, a log-gamma
/// difference. The product avoids cancellation in `lgamma(x + a) - lgamma(a)`
/// when `a = mu/P` is huge (P near the Poisson limit).
const PRODUCT_LIMIT: u64 = 4096;

/// `NB(mu, P)` with `mu > 0` and `P >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NbParams {
    mu: f64,
    p_shape: f64,
}

/// Failure-counting parametrization: success probability `p` and real size `alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicParams {
    p_success: f64,
    alpha: f64,
}

/// `E(X)`, `E(X^2)`, `E(X^3)`, `E(X^4)` of a single observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawMoments {
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
}

/// Variances and covariance of the sample averages of `X` and `X^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingMoments {
    pub var_mean: f64,
    pub var_m2: f64,
    pub cov_mean_m2: f64,
}

impl NbParams {
    pub fn new(mu: f64, p_shape: f64) -> Result<Self> {
        if !(mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidParameter { name: "mu", value: mu });
        }
        if !(p_shape.is_finite() && p_shape >= 0.0) {
            return Err(Error::InvalidParameter { name: "P", value: p_shape });
        }
        Ok(Self { mu, p_shape })
    }

    pub fn poisson(mu: f64) -> Result<Self> {
        Self::new(mu, 0.0)
    }

    pub fn from_classic(classic: ClassicParams) -> Self {
        let p_shape = 1.0 / classic.p_success - 1.0;
        Self { mu: classic.alpha * p_shape, p_shape }
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn p_shape(&self) -> f64 {
        self.p_shape
    }

    #[inline]
    pub fn is_poisson(&self) -> bool {
        self.p_shape == 0.0
    }

    /// `(p, alpha)`; undefined at the Poisson limit where `alpha` diverges.
    pub fn to_classic(&self) -> Result<ClassicParams> {
        if self.is_poisson() {
            return Err(Error::PoissonLimit);
        }
        Ok(ClassicParams {
            p_success: 1.0 / (1.0 + self.p_shape),
            alpha: self.mu / self.p_shape,
        })
    }

    /// `(mu, mu (1 + P))`.
    pub fn mean_variance(&self) -> (f64, f64) {
        (self.mu, self.mu * (1.0 + self.p_shape))
    }

    pub fn ln_pmf(&self, x: u64) -> f64 {
        if self.is_poisson() {
            return poisson_ln_pmf(self.mu, x);
        }
        let (mu, p) = (self.mu, self.p_shape);
        let alpha = mu / p;
        let head = -alpha * log1p(p);
        if x <= PRODUCT_LIMIT {
            // ln C(x + alpha - 1, x) + x ln(P/(1+P)), one factor per k
            let scale = 1.0 + p;
            let mut acc = head;
            for k in 0..x {
                let k = k as f64;
                acc += log((mu + k * p) / (scale * (k + 1.0)));
            }
            acc
        } else {
            let xf = x as f64;
            lgamma(xf + alpha) - lgamma(alpha) - lgamma(xf + 1.0) + head
                + xf * (log(p) - log1p(p))
        }
    }

    pub fn pmf(&self, x: u64) -> f64 {
        exp(self.ln_pmf(x))
    }

    /// Probability generating function `(1 + P - P z)^(-mu/P)`, or
    /// `exp(mu (z - 1))` at the Poisson limit.
    pub fn pgf(&self, z: f64) -> Result<f64> {
        if self.is_poisson() {
            return Ok(exp(self.mu * (z - 1.0)));
        }
        let p = self.p_shape;
        let base = 1.0 + p - p * z;
        if !(base > 0.0) {
            return Err(Error::PgfDomain(base));
        }
        Ok(exp(-(self.mu / p) * log1p(p * (1.0 - z))))
    }

    pub fn raw_moments(&self) -> RawMoments {
        let (mu, p) = (self.mu, self.p_shape);
        let (mu2, p2) = (mu * mu, p * p);
        RawMoments {
            m1: mu,
            m2: mu * (1.0 + mu + p),
            m3: mu * (1.0 + 3.0 * mu + 3.0 * p + 3.0 * mu * p + mu2 + 2.0 * p2),
            m4: mu
                * (1.0
                    + 7.0 * mu
                    + 7.0 * p
                    + 18.0 * mu * p
                    + 6.0 * mu2
                    + 12.0 * p2
                    + 6.0 * mu2 * p
                    + 11.0 * mu * p2
                    + mu2 * mu
                    + 6.0 * p2 * p),
        }
    }

    /// Moments of `(X̄, mean of X^2)` over samples of size `n`.
    pub fn sampling_moments(&self, n: u64) -> SamplingMoments {
        let m = self.raw_moments();
        let n = n as f64;
        SamplingMoments {
            var_mean: (m.m2 - m.m1 * m.m1) / n,
            var_m2: (m.m4 - m.m2 * m.m2) / n,
            cov_mean_m2: (m.m3 - m.m1 * m.m2) / n,
        }
    }

    /// Count `X*` past which the upper tail mass is below `tail`.
    ///
    /// Chebyshev gives `P(X >= mu + sigma / sqrt(tail)) <= tail`; the bound is
    /// then doubled.
    pub fn tail_cutoff(&self, tail: f64) -> u64 {
        let (mean, var) = self.mean_variance();
        let bound = mean + sqrt(var / tail);
        2 * (libm::ceil(bound) as u64).max(1)
    }
}

impl ClassicParams {
    pub fn new(p_success: f64, alpha: f64) -> Result<Self> {
        if !(p_success > 0.0 && p_success < 1.0) {
            return Err(Error::InvalidParameter { name: "p", value: p_success });
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter { name: "alpha", value: alpha });
        }
        Ok(Self { p_success, alpha })
    }

    pub fn p_success(&self) -> f64 {
        self.p_success
    }

    pub fn q_failure(&self) -> f64 {
        1.0 - self.p_success
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl From<ClassicParams> for NbParams {
    fn from(classic: ClassicParams) -> Self {
        NbParams::from_classic(classic)
    }
}

pub fn poisson_ln_pmf(mu: f64, x: u64) -> f64 {
    let xf = x as f64;
    xf * log(mu) - mu - lgamma(xf + 1.0)
}

/// `mu^x e^(-mu) / x!`
pub fn poisson_pmf(mu: f64, x: u64) -> f64 {
    if x == 0 {
        return exp(-mu);
    }
    exp(poisson_ln_pmf(mu, x))
}

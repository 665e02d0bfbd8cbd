//! Seeded sampling from `NB(mu, P)` and `Poisson(mu)`.
//!
//! Every replicate owns a ChaCha8 stream addressed by `(seed, stream_id)`, so
//! a replicate's draws do not depend on which thread runs it or in what order.

use alloc::vec::Vec;

use libm::{exp, floor, lgamma, log, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::model::NbParams;

/// Above this mean Poisson draws switch from inversion to rejection.
const INVERSION_LIMIT: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    pub fn rng(&self) -> StreamRng {
        let mut inner = ChaCha8Rng::seed_from_u64(self.seed);
        inner.set_stream(self.stream_id);
        StreamRng { inner }
    }
}

/// Uniform, normal, gamma and Poisson variates from one stream.
#[derive(Debug, Clone)]
pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by the Marsaglia polar method (one of the pair is kept).
    pub fn normal(&mut self) -> f64 {
        loop {
            let u = 2.0 * self.uniform() - 1.0;
            let v = 2.0 * self.uniform() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                return u * sqrt(-2.0 * log(s) / s);
            }
        }
    }

    /// Gamma(shape, scale) by Marsaglia–Tsang; shapes below one are drawn at
    /// `shape + 1` and scaled by `U^(1/shape)`.
    pub fn gamma(&mut self, shape: f64, scale: f64) -> f64 {
        if shape < 1.0 {
            let g = self.gamma(shape + 1.0, scale);
            return g * exp(log(self.uniform()) / shape);
        }
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / sqrt(9.0 * d);
        loop {
            let (x, v) = loop {
                let x = self.normal();
                let v = 1.0 + c * x;
                if v > 0.0 {
                    break (x, v * v * v);
                }
            };
            let u = self.uniform();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || log(u) < 0.5 * x2 + d * (1.0 - v + log(v)) {
                return d * v * scale;
            }
        }
    }

    pub fn poisson(&mut self, mu: f64) -> u64 {
        if mu <= 0.0 {
            0
        } else if mu <= INVERSION_LIMIT {
            self.poisson_inversion(mu)
        } else {
            self.poisson_ptrs(mu)
        }
    }

    /// Sequential search of the CDF from zero.
    fn poisson_inversion(&mut self, mu: f64) -> u64 {
        'draw: loop {
            let u = self.uniform();
            let mut pmf = exp(-mu);
            let mut cdf = pmf;
            let mut x = 0u64;
            while u > cdf {
                x += 1;
                pmf *= mu / x as f64;
                if pmf == 0.0 {
                    // u fell in the rounding gap above the summed CDF
                    continue 'draw;
                }
                cdf += pmf;
            }
            return x;
        }
    }

    /// Hörmann's transformed rejection with squeeze (PTRS), valid for `mu >= 10`.
    fn poisson_ptrs(&mut self, mu: f64) -> u64 {
        let smu = sqrt(mu);
        let b = 0.931 + 2.53 * smu;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        let ln_mu = log(mu);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = floor((2.0 * a / us + b) * u + mu + 0.43);
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            if log(v) + log(inv_alpha) - log(a / (us * us) + b) <= -mu + k * ln_mu - lgamma(k + 1.0) {
                return k as u64;
            }
        }
    }

    /// One `NB(mu, P)` draw as a Gamma–Poisson mixture:
    /// `Lambda ~ Gamma(mu/P, P)`, `X ~ Poisson(Lambda)`.
    pub fn negative_binomial(&mut self, params: &NbParams) -> u64 {
        if params.is_poisson() {
            return self.poisson(params.mu());
        }
        let p = params.p_shape();
        let lambda = self.gamma(params.mu() / p, p);
        self.poisson(lambda)
    }
}

/// `n` i.i.d. draws from `NB(mu, P)`; the Poisson limit draws `Poisson(mu)`.
pub fn sample_nb(params: &NbParams, n: usize, stream: SeededStream) -> Vec<u64> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.negative_binomial(params)).collect()
}

pub fn sample_poisson(mu: f64, n: usize, stream: SeededStream) -> Vec<u64> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.poisson(mu)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[u64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().map(|&x| x as f64).sum::<f64>() / n;
        let v = xs.iter().map(|&x| (x as f64 - m).powi(2)).sum::<f64>() / n;
        (m, v)
    }

    #[test]
    fn nb_mean_within_clt_bound() {
        let params = NbParams::new(1.0, 1.0).unwrap();
        let xs = sample_nb(&params, 1_000_000, SeededStream::new(11, 0));
        let (m, _) = mean_var(&xs);
        assert!((m - 1.0).abs() < 4.0 * (2.0f64 / 1e6).sqrt(), "{m}");
    }

    #[test]
    fn poisson_limit_is_equidispersed() {
        let params = NbParams::new(3.0, 0.0).unwrap();
        let xs = sample_nb(&params, 1_000_000, SeededStream::new(12, 0));
        let (m, v) = mean_var(&xs);
        assert!((v / m - 1.0).abs() < 0.01, "{}", v / m);
    }

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let params = NbParams::new(2.0, 0.5).unwrap();
        let a = sample_nb(&params, 500, SeededStream::new(7, 3));
        let b = sample_nb(&params, 500, SeededStream::new(7, 3));
        let c = sample_nb(&params, 500, SeededStream::new(7, 4));
        let d = sample_nb(&params, 500, SeededStream::new(8, 3));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn poisson_zero_fraction() {
        let xs = sample_poisson(0.1, 1_000_000, SeededStream::new(13, 0));
        let zeros = xs.iter().filter(|&&x| x == 0).count() as f64 / 1e6;
        assert!((zeros - (-0.1f64).exp()).abs() < 0.002, "{zeros}");
    }

    #[test]
    fn poisson_mean_both_methods() {
        for (mu, seed) in [(5.0, 14), (40.0, 15), (1234.5, 16)] {
            let xs = sample_poisson(mu, 1_000_000, SeededStream::new(seed, 0));
            let (m, v) = mean_var(&xs);
            assert!((m - mu).abs() < 4.0 * (mu / 1e6).sqrt(), "mu={mu} mean={m}");
            assert!((v / mu - 1.0).abs() < 0.01, "mu={mu} var={v}");
        }
    }

    #[test]
    fn gamma_moments_small_and_large_shape() {
        let mut rng = SeededStream::new(17, 0).rng();
        for (shape, scale) in [(0.01, 10.0), (0.3, 1.0), (1.0, 2.0), (7.5, 0.5)] {
            let n = 400_000;
            let xs: Vec<f64> = (0..n).map(|_| rng.gamma(shape, scale)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n as f64;
            let (em, ev) = (shape * scale, shape * scale * scale);
            assert!((m - em).abs() < 5.0 * (ev / n as f64).sqrt(), "shape={shape} mean={m}");
            assert!((v / ev - 1.0).abs() < 0.15, "shape={shape} var={v} expected {ev}");
        }
    }

    #[test]
    fn uniform_stays_open() {
        let mut rng = SeededStream::new(0, 0).rng();
        for _ in 0..100_000 {
            let u = rng.uniform();
            assert!(u > 0.0 && u < 1.0);
        }
    }
}

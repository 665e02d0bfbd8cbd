//! Joint confidence regions for `(mu, P)`.
//!
//! With `theta1 = ln mu`, `theta2 = ln(P + 1)` and the decorrelation
//! coefficient `a = P / (1 + P)`, a candidate `(mu, P)` is inside the
//! `1 - delta` region when
//!
//! ```text
//! (theta1_hat - theta1)^2 / ((1 + P)/(n mu))
//!   + (theta2_hat - theta2 - a (theta1_hat - theta1))^2 / (2 (mu + P)/(n mu))  <=  -2 ln delta
//! ```
//!
//! The variances are evaluated at the candidate, so the region is not an
//! ellipse in `(mu, P)`. Candidates below the `mu` axis (`P < 0`) are
//! admissible whenever both denominators stay positive; that half of the
//! region is read as support for the Poisson model.

use alloc::vec::Vec;

use libm::{exp, log, log1p, sqrt};

use crate::contour;
use crate::estimators::{AsymptoticMoments, EstimateResult};
use crate::model::NbParams;
use crate::{Error, Result};

pub const DEFAULT_GRID_STEPS: usize = 256;
pub const DEFAULT_GRID_SPREAD: f64 = 4.0;

/// A confidence level `1 - delta`, strictly inside `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ConfidenceLevel(f64);

impl ConfidenceLevel {
    pub fn new(level: f64) -> Result<Self> {
        if level > 0.0 && level < 1.0 {
            Ok(Self(level))
        } else {
            Err(Error::InvalidLevel(level))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn delta(&self) -> f64 {
        1.0 - self.0
    }

    pub fn critical_value(&self) -> f64 {
        -2.0 * log(self.delta())
    }
}

/// `c0 = -2 ln delta`: the radius squared of the standardized disc holding
/// probability `1 - delta` under a standard bivariate normal.
pub fn critical_value(delta: f64) -> Result<f64> {
    if delta > 0.0 && delta < 1.0 {
        Ok(-2.0 * log(delta))
    } else {
        Err(Error::InvalidLevel(1.0 - delta))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionProblem {
    log_mu_hat: f64,
    log_p1_hat: f64,
    n: u64,
    levels: Vec<ConfidenceLevel>,
}

impl RegionProblem {
    pub fn new(log_mu_hat: f64, log_p1_hat: f64, n: u64, levels: &[f64]) -> Result<Self> {
        if !log_mu_hat.is_finite() {
            return Err(Error::InvalidParameter { name: "ln mu_hat", value: log_mu_hat });
        }
        if !log_p1_hat.is_finite() {
            return Err(Error::InvalidParameter { name: "ln(P_hat + 1)", value: log_p1_hat });
        }
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n", value: 0.0 });
        }
        if levels.is_empty() {
            return Err(Error::NoLevels);
        }
        let levels = levels.iter().map(|&l| ConfidenceLevel::new(l)).collect::<Result<Vec<_>>>()?;
        Ok(Self { log_mu_hat, log_p1_hat, n, levels })
    }

    pub fn from_estimate(est: &EstimateResult, n: u64, levels: &[f64]) -> Result<Self> {
        Self::new(est.log_mu_hat, est.log_p1_hat, n, levels)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn levels(&self) -> &[ConfidenceLevel] {
        &self.levels
    }

    pub fn log_mu_hat(&self) -> f64 {
        self.log_mu_hat
    }

    pub fn log_p1_hat(&self) -> f64 {
        self.log_p1_hat
    }

    /// `(mu_hat, P_hat)`, with `P_hat` possibly negative.
    pub fn point_estimate(&self) -> (f64, f64) {
        (exp(self.log_mu_hat), exp(self.log_p1_hat) - 1.0)
    }

    /// Region statistic at the candidate `(mu, p)`; `DomainInvalid` outside
    /// `{mu > 0, p > -1, mu + p > 0}`.
    pub fn statistic(&self, mu: f64, p: f64) -> Result<f64> {
        if !(mu > 0.0 && p > -1.0 && mu + p > 0.0 && mu.is_finite() && p.is_finite()) {
            return Err(Error::DomainInvalid { mu, p });
        }
        let n = self.n as f64;
        let d1 = self.log_mu_hat - log(mu);
        let d2 = self.log_p1_hat - log1p(p);
        let resid = d2 - p / (1.0 + p) * d1;
        Ok(d1 * d1 * n * mu / (1.0 + p) + resid * resid * n * mu / (2.0 * (mu + p)))
    }

    pub fn contains(&self, mu: f64, p: f64, level: ConfidenceLevel) -> Result<bool> {
        Ok(self.statistic(mu, p)? <= level.critical_value())
    }

    pub fn contains_at_delta(&self, mu: f64, p: f64, delta: f64) -> Result<bool> {
        Ok(self.statistic(mu, p)? <= critical_value(delta)?)
    }

    /// Grid spanning `exp(theta_hat ± k sd)` on each log axis, with the sds
    /// taken from the asymptotic moments at `guess`.
    pub fn default_grid(&self, guess: &NbParams, k: f64) -> Result<GridSpec> {
        if !(k.is_finite() && k > 0.0) {
            return Err(Error::InvalidGrid("spread k must be positive"));
        }
        let am = AsymptoticMoments::new(guess, self.n);
        let (s1, s2) = (k * sqrt(am.var_log_mu), k * sqrt(am.var_log_p1));
        GridSpec::new(
            exp(self.log_mu_hat - s1),
            exp(self.log_mu_hat + s1),
            exp(self.log_p1_hat - s2) - 1.0,
            exp(self.log_p1_hat + s2) - 1.0,
            DEFAULT_GRID_STEPS,
            DEFAULT_GRID_STEPS,
        )
    }
}

/// Rectangular `(mu, P)` lattice, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub mu_min: f64,
    pub mu_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub mu_steps: usize,
    pub p_steps: usize,
}

impl GridSpec {
    pub fn new(
        mu_min: f64,
        mu_max: f64,
        p_min: f64,
        p_max: f64,
        mu_steps: usize,
        p_steps: usize,
    ) -> Result<Self> {
        if mu_steps < 2 || p_steps < 2 {
            return Err(Error::GridTooCoarse);
        }
        if ![mu_min, mu_max, p_min, p_max].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite"));
        }
        if !(mu_min > 0.0) {
            return Err(Error::InvalidGrid("mu_min must be positive"));
        }
        if !(p_min > -1.0) {
            return Err(Error::InvalidGrid("p_min must exceed -1"));
        }
        if !(mu_max > mu_min && p_max > p_min) {
            return Err(Error::InvalidGrid("bounds must have positive width"));
        }
        Ok(Self { mu_min, mu_max, p_min, p_max, mu_steps, p_steps })
    }

    pub fn len(&self) -> usize {
        self.mu_steps * self.p_steps
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn mu_step(&self) -> f64 {
        (self.mu_max - self.mu_min) / (self.mu_steps - 1) as f64
    }

    pub fn p_step(&self) -> f64 {
        (self.p_max - self.p_min) / (self.p_steps - 1) as f64
    }

    pub fn mu_at(&self, i: f64) -> f64 {
        self.mu_min + i * self.mu_step()
    }

    pub fn p_at(&self, j: f64) -> f64 {
        self.p_min + j * self.p_step()
    }

    /// Coordinates of the row-major point `index` (rows run along `P`).
    pub fn point(&self, index: usize) -> (f64, f64) {
        let (i, j) = (index % self.mu_steps, index / self.mu_steps);
        // pin the far edges to the exact bounds
        let mu = if i + 1 == self.mu_steps { self.mu_max } else { self.mu_at(i as f64) };
        let p = if j + 1 == self.p_steps { self.p_max } else { self.p_at(j as f64) };
        (mu, p)
    }

    pub fn cell_area(&self) -> f64 {
        self.mu_step() * self.p_step()
    }
}

/// An extracted boundary in `(mu, P)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub points: Vec<(f64, f64)>,
    /// False when the curve runs off the grid.
    pub closed: bool,
}

/// Grid points of one level's region on either side of the `mu` axis. Areas
/// count each point as one grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionSplit {
    pub poisson_points: usize,
    pub nb_points: usize,
    pub poisson_area: f64,
    pub nb_area: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelRegion {
    pub level: ConfidenceLevel,
    pub critical: f64,
    pub mask: Vec<bool>,
    pub boundaries: Vec<Polyline>,
    pub split: RegionSplit,
}

/// Region statistic over a grid, with per-level membership and boundaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourGrid {
    pub spec: GridSpec,
    /// Row-major; `None` outside the statistic's domain.
    pub stat: Vec<Option<f64>>,
    pub levels: Vec<LevelRegion>,
}

/// Statistic at every grid point, in row-major order.
pub fn evaluate_grid(problem: &RegionProblem, spec: &GridSpec) -> Vec<Option<f64>> {
    (0..spec.len())
        .map(|idx| {
            let (mu, p) = spec.point(idx);
            problem.statistic(mu, p).ok()
        })
        .collect()
}

impl ContourGrid {
    pub fn new(problem: &RegionProblem, spec: GridSpec) -> Self {
        let stat = evaluate_grid(problem, &spec);
        Self::from_values(problem, spec, stat)
    }

    /// Builds masks, boundaries and splits from precomputed statistic values.
    pub fn from_values(problem: &RegionProblem, spec: GridSpec, stat: Vec<Option<f64>>) -> Self {
        assert_eq!(stat.len(), spec.len(), "one value per grid point");
        let field: Vec<f64> = stat.iter().map(|v| v.unwrap_or(f64::INFINITY)).collect();
        let cell = spec.cell_area();

        let mut levels: Vec<LevelRegion> = problem
            .levels()
            .iter()
            .map(|&level| {
                let critical = level.critical_value();
                let mask: Vec<bool> = field.iter().map(|&v| v <= critical).collect();
                let mut split = RegionSplit::default();
                for (idx, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
                    if spec.point(idx).1 <= 0.0 {
                        split.poisson_points += 1;
                    } else {
                        split.nb_points += 1;
                    }
                }
                split.poisson_area = split.poisson_points as f64 * cell;
                split.nb_area = split.nb_points as f64 * cell;
                let boundaries = contour::march(&field, spec.mu_steps, spec.p_steps, critical)
                    .into_iter()
                    .map(|chain| Polyline {
                        points: chain.points.iter().map(|&(i, j)| (spec.mu_at(i), spec.p_at(j))).collect(),
                        closed: chain.closed,
                    })
                    .collect();
                LevelRegion { level, critical, mask, boundaries, split }
            })
            .collect();
        levels.sort_by(|a, b| a.level.value().total_cmp(&b.level.value()));
        Self { spec, stat, levels }
    }

    pub fn valid_points(&self) -> usize {
        self.stat.iter().filter(|v| v.is_some()).count()
    }

    pub fn level(&self, level: f64) -> Option<&LevelRegion> {
        self.levels.iter().find(|l| l.level.value() == level)
    }
}

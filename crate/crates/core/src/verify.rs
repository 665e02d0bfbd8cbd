//! Monte Carlo experiments: how often samples come out under-dispersed, and
//! how often the confidence region covers the true parameters.
//!
//! Replicate `r` always draws from stream `(seed, r)`. Replicates reduce into
//! integer tallies, so a report does not depend on evaluation order and a
//! parallel driver can merge partial tallies freely.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use libm::sqrt;

use crate::estimators::{dispersion, EstimateResult, SampleStats};
use crate::model::NbParams;
use crate::region::{ConfidenceLevel, RegionProblem};
use crate::simulate::{sample_nb, SeededStream};
use crate::{Error, Result};

pub const DEFAULT_REPS: u64 = 10_000;

/// `sqrt(p (1 - p) / trials)`; NaN without trials.
pub fn binomial_std_error(proportion: f64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    sqrt(proportion * (1.0 - proportion) / trials as f64)
}

/// Method-of-moments estimate from replicate `r`.
pub fn estimate_replicate(params: &NbParams, n: usize, seed: u64, r: u64) -> Result<EstimateResult> {
    let data = sample_nb(params, n, SeededStream::new(seed, r));
    SampleStats::from_counts(&data)?.mme()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEntry {
    pub level: f64,
    pub hits: u64,
    pub coverage: f64,
    pub std_error: f64,
}

/// Coverage of the true `(mu, P)` per confidence level. Replicates whose
/// sample has zero mean or zero variance have no log estimates; they are
/// counted in `degenerate` and left out of every coverage denominator.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageReport {
    pub params: NbParams,
    pub n: u64,
    pub reps: u64,
    pub degenerate: u64,
    pub entries: Vec<CoverageEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoverageOutcome {
    Degenerate,
    /// Region statistic at the true parameters.
    Statistic(f64),
}

#[derive(Debug, Clone)]
pub struct CoverageExperiment {
    params: NbParams,
    n: u64,
    levels: Vec<ConfidenceLevel>,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageTally {
    pub hits: Vec<u64>,
    pub evaluated: u64,
    pub degenerate: u64,
}

impl CoverageExperiment {
    pub fn new(params: NbParams, n: u64, levels: &[f64], seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::EmptySample(n as usize));
        }
        if levels.is_empty() {
            return Err(Error::NoLevels);
        }
        let mut levels = levels.iter().map(|&l| ConfidenceLevel::new(l)).collect::<Result<Vec<_>>>()?;
        levels.sort_by(|a, b| a.value().total_cmp(&b.value()));
        Ok(Self { params, n, levels, seed })
    }

    pub fn levels(&self) -> &[ConfidenceLevel] {
        &self.levels
    }

    pub fn replicate(&self, r: u64) -> CoverageOutcome {
        let est = match estimate_replicate(&self.params, self.n as usize, self.seed, r) {
            Ok(est) => est,
            Err(_) => return CoverageOutcome::Degenerate,
        };
        let levels = [0.5];
        let problem = RegionProblem::new(est.log_mu_hat, est.log_p1_hat, self.n, &levels)
            .expect("finite log estimates");
        // the true P >= 0 is always inside the statistic's domain
        let stat = problem
            .statistic(self.params.mu(), self.params.p_shape())
            .expect("true parameters lie in the domain");
        CoverageOutcome::Statistic(stat)
    }

    pub fn tally(&self) -> CoverageTally {
        CoverageTally { hits: vec![0; self.levels.len()], evaluated: 0, degenerate: 0 }
    }

    pub fn record(&self, tally: &mut CoverageTally, outcome: CoverageOutcome) {
        match outcome {
            CoverageOutcome::Degenerate => tally.degenerate += 1,
            CoverageOutcome::Statistic(stat) => {
                tally.evaluated += 1;
                for (hits, level) in tally.hits.iter_mut().zip(&self.levels) {
                    if stat <= level.critical_value() {
                        *hits += 1;
                    }
                }
            }
        }
    }

    pub fn report(&self, tally: &CoverageTally) -> CoverageReport {
        let used = tally.evaluated;
        let entries = self
            .levels
            .iter()
            .zip(&tally.hits)
            .map(|(level, &hits)| {
                let coverage = if used == 0 { f64::NAN } else { hits as f64 / used as f64 };
                CoverageEntry { level: level.value(), hits, coverage, std_error: binomial_std_error(coverage, used) }
            })
            .collect();
        CoverageReport {
            params: self.params,
            n: self.n,
            reps: tally.evaluated + tally.degenerate,
            degenerate: tally.degenerate,
            entries,
        }
    }

    /// Runs replicates `0..reps` in order.
    pub fn run(&self, reps: u64) -> Result<CoverageReport> {
        if reps == 0 {
            return Err(Error::InvalidParameter { name: "reps", value: 0.0 });
        }
        let mut tally = self.tally();
        for r in 0..reps {
            self.record(&mut tally, self.replicate(r));
        }
        Ok(self.report(&tally))
    }
}

impl CoverageTally {
    pub fn merge(mut self, other: &CoverageTally) -> Self {
        for (a, b) in self.hits.iter_mut().zip(&other.hits) {
            *a += b;
        }
        self.evaluated += other.evaluated;
        self.degenerate += other.degenerate;
        self
    }
}

/// Sequential coverage study.
pub fn coverage(params: NbParams, n: u64, levels: &[f64], reps: u64, seed: u64) -> Result<CoverageReport> {
    CoverageExperiment::new(params, n, levels, seed)?.run(reps)
}

/// Share of samples with `s^2 <= X̄`, i.e. a non-positive moment estimate of
/// `P`. Ties only occur for all-zero samples. `strict_*` counts `s^2 < X̄`
/// alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnderdispersionReport {
    pub params: NbParams,
    pub n: u64,
    pub reps: u64,
    pub count: u64,
    pub proportion: f64,
    pub std_error: f64,
    pub strict_count: u64,
    pub strict_proportion: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct UnderdispersionTally {
    pub reps: u64,
    pub at_most: u64,
    pub strict: u64,
}

impl UnderdispersionTally {
    pub fn record(&mut self, outcome: Ordering) {
        self.reps += 1;
        match outcome {
            Ordering::Less => {
                self.strict += 1;
                self.at_most += 1;
            }
            Ordering::Equal => self.at_most += 1,
            Ordering::Greater => {}
        }
    }

    pub fn merge(self, other: &UnderdispersionTally) -> Self {
        Self {
            reps: self.reps + other.reps,
            at_most: self.at_most + other.at_most,
            strict: self.strict + other.strict,
        }
    }

    pub fn report(&self, params: NbParams, n: u64) -> UnderdispersionReport {
        let reps = self.reps.max(1) as f64;
        let proportion = self.at_most as f64 / reps;
        UnderdispersionReport {
            params,
            n,
            reps: self.reps,
            count: self.at_most,
            proportion,
            std_error: binomial_std_error(proportion, self.reps),
            strict_count: self.strict,
            strict_proportion: self.strict as f64 / reps,
        }
    }
}

/// Sample variance against sample mean for replicate `r`.
pub fn underdispersion_replicate(params: &NbParams, n: u64, seed: u64, r: u64) -> Ordering {
    let data = sample_nb(params, n as usize, SeededStream::new(seed, r));
    dispersion(&data).expect("simulated sums fit in u128")
}

pub fn underdispersion_probability(params: NbParams, n: u64, reps: u64, seed: u64) -> Result<UnderdispersionReport> {
    if reps == 0 {
        return Err(Error::InvalidParameter { name: "reps", value: 0.0 });
    }
    if n < 2 {
        return Err(Error::EmptySample(n as usize));
    }
    let mut tally = UnderdispersionTally::default();
    for r in 0..reps {
        tally.record(underdispersion_replicate(&params, n, seed, r));
    }
    Ok(tally.report(params, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn std_error_matches_binomial_variance() {
        // 30 hits in 120 trials
        let p = 30.0 / 120.0;
        let se = binomial_std_error(p, 120);
        let var = 120.0 * p * (1.0 - p);
        assert!((se - var.sqrt() / 120.0).abs() < 1e-15);
        assert!(binomial_std_error(0.5, 0).is_nan());
    }

    #[test]
    fn coverage_is_monotone_in_level() {
        let params = NbParams::new(1.0, 0.3).unwrap();
        let report = coverage(params, 50, &[0.95, 0.5, 0.8], 2_000, 5).unwrap();
        let cov: Vec<f64> = report.entries.iter().map(|e| e.coverage).collect();
        assert_eq!(report.entries.iter().map(|e| e.level).collect::<Vec<_>>(), [0.5, 0.8, 0.95]);
        assert!(cov.windows(2).all(|w| w[0] <= w[1]), "{cov:?}");
    }

    #[test]
    fn coverage_tends_to_one_near_level_one() {
        let params = NbParams::new(3.0, 0.3).unwrap();
        let report = coverage(params, 50, &[1.0 - 1e-12], 1_000, 2).unwrap();
        assert_eq!(report.entries[0].coverage, 1.0);
    }

    #[test]
    fn degenerate_replicates_are_excluded() {
        // almost every sample is all-zero here
        let params = NbParams::new(0.01, 0.3).unwrap();
        let report = coverage(params, 5, &[0.95], 500, 1).unwrap();
        assert!(report.degenerate > 400);
        let used = report.reps - report.degenerate;
        let e = report.entries[0];
        assert!((e.coverage - e.hits as f64 / used as f64).abs() < 1e-15);
        let expect_se = (e.coverage * (1.0 - e.coverage) / used as f64).sqrt();
        assert!((e.std_error - expect_se).abs() < 1e-15);
    }

    #[test]
    fn tallies_merge_in_any_order() {
        let exp = CoverageExperiment::new(NbParams::new(1.0, 1.0).unwrap(), 30, &[0.5, 0.95], 9).unwrap();
        let mut even = exp.tally();
        let mut odd = exp.tally();
        for r in 0..400 {
            let t = if r % 2 == 0 { &mut even } else { &mut odd };
            exp.record(t, exp.replicate(r));
        }
        let merged = odd.clone().merge(&even);
        assert_eq!(merged, even.merge(&odd));
        assert_eq!(exp.report(&merged), exp.run(400).unwrap());
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = NbParams::new(1.0, 1.0).unwrap();
        assert!(coverage(params, 30, &[0.95], 0, 0).is_err());
        assert!(coverage(params, 30, &[1.5], 10, 0).is_err());
        assert!(coverage(params, 30, &[], 10, 0).is_err());
        assert!(underdispersion_probability(params, 30, 0, 0).is_err());
    }

    #[test]
    fn underdispersion_counts_ties_separately() {
        let params = NbParams::new(0.1, 10.0).unwrap();
        let report = underdispersion_probability(params, 30, 2_000, 3).unwrap();
        assert!(report.count >= report.strict_count);
        // all-zero samples are common at this setting
        assert!(report.proportion > report.strict_proportion + 0.3);
    }
}

//! Rayon drivers. Each replicate owns its random stream and partial results
//! are integer tallies, so every function here returns exactly what the
//! sequential core routine returns, whatever the thread count.

use std::cmp::Ordering;

use nb_region_core::region::evaluate_grid;
use nb_region_core::verify::{
    estimate_replicate, underdispersion_replicate, CoverageExperiment, UnderdispersionTally,
};
use nb_region_core::{
    ContourGrid, CoverageReport, EstimateResult, GridSpec, NbParams, RegionProblem, Result,
    UnderdispersionReport,
};
use rayon::prelude::*;

/// Caps the worker count when set to a positive integer.
pub const THREADS_ENV: &str = "NB_REGION_THREADS";

pub fn thread_pool() -> rayon::ThreadPool {
    let threads = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .expect("thread pool")
}

pub fn coverage(params: NbParams, n: u64, levels: &[f64], reps: u64, seed: u64) -> Result<CoverageReport> {
    if reps == 0 {
        return Err(nb_region_core::Error::InvalidParameter { name: "reps", value: 0.0 });
    }
    let experiment = CoverageExperiment::new(params, n, levels, seed)?;
    let tally = thread_pool().install(|| {
        (0..reps)
            .into_par_iter()
            .fold(
                || experiment.tally(),
                |mut t, r| {
                    experiment.record(&mut t, experiment.replicate(r));
                    t
                },
            )
            .reduce(|| experiment.tally(), |a, b| a.merge(&b))
    });
    Ok(experiment.report(&tally))
}

pub fn underdispersion(params: NbParams, n: u64, reps: u64, seed: u64) -> Result<UnderdispersionReport> {
    if reps == 0 {
        return Err(nb_region_core::Error::InvalidParameter { name: "reps", value: 0.0 });
    }
    if n < 2 {
        return Err(nb_region_core::Error::EmptySample(n as usize));
    }
    let tally = thread_pool().install(|| {
        (0..reps)
            .into_par_iter()
            .fold(UnderdispersionTally::default, |mut t, r| {
                let outcome: Ordering = underdispersion_replicate(&params, n, seed, r);
                t.record(outcome);
                t
            })
            .reduce(UnderdispersionTally::default, |a, b| a.merge(&b))
    });
    Ok(tally.report(params, n))
}

/// Point estimates of replicates `0..reps`, in replicate order; degenerate
/// replicates are dropped.
pub fn estimates(params: NbParams, n: usize, reps: u64, seed: u64) -> Vec<(u64, EstimateResult)> {
    thread_pool().install(|| {
        (0..reps)
            .into_par_iter()
            .filter_map(|r| estimate_replicate(&params, n, seed, r).ok().map(|e| (r, e)))
            .collect()
    })
}

pub fn contour_grid(problem: &RegionProblem, spec: GridSpec) -> ContourGrid {
    let rows: Vec<Vec<Option<f64>>> = thread_pool().install(|| {
        (0..spec.p_steps)
            .into_par_iter()
            .map(|j| {
                (0..spec.mu_steps)
                    .map(|i| {
                        let (mu, p) = spec.point(j * spec.mu_steps + i);
                        problem.statistic(mu, p).ok()
                    })
                    .collect()
            })
            .collect()
    });
    let stat: Vec<Option<f64>> = rows.into_iter().flatten().collect();
    debug_assert_eq!(stat, evaluate_grid(problem, &spec));
    ContourGrid::from_values(problem, spec, stat)
}

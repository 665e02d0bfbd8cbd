//! CSV serialization of Monte Carlo reports.

use std::io::{self, Write};

use nb_region_core::verify::{CoverageReport, UnderdispersionReport};
use nb_region_core::EstimateResult;

use crate::format::sig;

pub const COVERAGE_HEADER: &str = "mu,p,n,level,reps,degenerate,coverage,std_error";
pub const UNDERDISPERSION_HEADER: &str = "mu,p,n,reps,count,proportion,std_error,strict_count,strict_proportion";
pub const SCATTER_HEADER: &str = "replicate,mu_hat,p_hat,log_mu_hat,log_p1_hat";

/// One row per confidence level.
pub fn write_coverage(reports: &[CoverageReport], out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    writeln!(out, "{COVERAGE_HEADER}")?;
    for r in reports {
        for e in &r.entries {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                sig(r.params.mu(), 9),
                sig(r.params.p_shape(), 9),
                r.n,
                sig(e.level, 9),
                r.reps,
                r.degenerate,
                sig(e.coverage, 9),
                sig(e.std_error, 9)
            )?;
        }
    }
    Ok(())
}

pub fn write_underdispersion(reports: &[UnderdispersionReport], out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    writeln!(out, "{UNDERDISPERSION_HEADER}")?;
    for r in reports {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            sig(r.params.mu(), 9),
            sig(r.params.p_shape(), 9),
            r.n,
            r.reps,
            r.count,
            sig(r.proportion, 9),
            sig(r.std_error, 9),
            r.strict_count,
            sig(r.strict_proportion, 9)
        )?;
    }
    Ok(())
}

/// Per-replicate point estimates; degenerate replicates are absent.
pub fn write_scatter(rows: &[(u64, EstimateResult)], out: &mut (impl Write + ?Sized)) -> io::Result<()> {
    writeln!(out, "{SCATTER_HEADER}")?;
    for (r, e) in rows {
        writeln!(
            out,
            "{r},{},{},{},{}",
            sig(e.mu_hat, 9),
            sig(e.p_hat, 9),
            sig(e.log_mu_hat, 9),
            sig(e.log_p1_hat, 9)
        )?;
    }
    Ok(())
}

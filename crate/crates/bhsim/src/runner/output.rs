//! Plot-ready output files: tab-separated time series with a header row,
//! and a TOML manifest recording every parameter, tolerance and measured
//! conservation figure of a run.
//!
//! Data files are written through a temporary path and renamed into place,
//! so an interrupted run never leaves a half-written series behind.
//! Undefined observables (a pair or subset holding no particles) serialize
//! as the literal `NA`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::observables::{contrast, imbalance, purity, two_site_purity};
use crate::propagate::TimeSeries;

use super::config::{Column, ExperimentConfig, PlanSection};

/// Shortest-roundtrip scientific notation; parseable by any plotting tool.
fn fmt(value: f64) -> String {
    format!("{value:e}")
}

fn project(
    series: &TimeSeries,
    index: usize,
    column: &Column,
    subsystems: &[Vec<usize>],
) -> Result<Option<f64>> {
    let record = &series.records[index];
    let value = match column {
        Column::Norm => Some(record.norm),
        Column::Energy => Some(record.energy),
        Column::Filling(j) => Some(record.fillings[*j]),
        Column::SubsystemNumber(k) => {
            Some(subsystems[*k].iter().map(|&s| record.fillings[s]).sum())
        }
        Column::SubsystemPurity(k) => match series.spdm_at(index, &subsystems[*k]) {
            Ok(sigma) => Some(purity(&sigma, subsystems[*k].len())?.value),
            Err(Error::InvalidSubset(_)) => None,
            Err(e) => return Err(e),
        },
        Column::TotalPurity => {
            let all: Vec<usize> = (0..record.fillings.len()).collect();
            let sigma = series.spdm_at(index, &all)?;
            Some(purity(&sigma, all.len())?.value)
        }
        Column::PairContrast(j, k) | Column::PairPurity(j, k) | Column::PairImbalance(j, k) => {
            let all: Vec<usize> = (0..record.fillings.len()).collect();
            let sigma = series.spdm_at(index, &all)?;
            let result = match column {
                Column::PairContrast(..) => contrast(&sigma, *j, *k),
                Column::PairPurity(..) => two_site_purity(&sigma, *j, *k),
                _ => imbalance(&sigma, *j, *k),
            };
            match result {
                Ok(v) => Some(v),
                Err(Error::UndefinedPair { .. }) => None,
                Err(e) => return Err(e),
            }
        }
    };
    Ok(value)
}

pub(super) fn write_series(
    path: &Path,
    series: &TimeSeries,
    columns: &[(String, Column)],
    subsystems: &[Vec<usize>],
) -> Result<()> {
    let tmp = path.with_extension("tsv.tmp");
    let result = (|| -> Result<()> {
        let mut out = std::io::BufWriter::new(fs::File::create(&tmp)?);
        write!(out, "t")?;
        for (name, _) in columns {
            write!(out, "\t{name}")?;
        }
        writeln!(out)?;
        for index in 0..series.len() {
            write!(out, "{}", fmt(series.times[index]))?;
            for (_, column) in columns {
                match project(series, index, column, subsystems)? {
                    Some(v) => write!(out, "\t{}", fmt(v))?,
                    None => write!(out, "\tNA")?,
                }
            }
            writeln!(out)?;
        }
        out.flush()?;
        Ok(())
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
        result?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Serialize)]
struct Manifest<'a> {
    run: ManifestRun<'a>,
    tolerances: ManifestTolerances,
    conservation: ManifestConservation,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct ManifestRun<'a> {
    label: &'a str,
    version: &'a str,
    wall_seconds: f64,
    samples: usize,
}

/// Every tolerance and numeric default that shaped the run, so that a run
/// is auditable from its output directory alone.
#[derive(Serialize)]
struct ManifestTolerances {
    dt: f64,
    sample_every: usize,
    t_final: f64,
    energy_shift: String,
    norm_drift_bound: f64,
    gpe_tol: f64,
    gpe_step_factor: f64,
    gpe_convergence: &'static str,
    basis_ordering: &'static str,
    dense_oracle_cap: usize,
    reduction_chunk: usize,
    condensate_norm_tol: f64,
}

#[derive(Serialize)]
struct ManifestConservation {
    max_norm_drift: f64,
    max_particle_drift: f64,
    max_relative_energy_drift: f64,
}

pub(super) fn write_manifest(
    path: &Path,
    label: &str,
    config: &ExperimentConfig,
    plan: &PlanSection,
    series: &TimeSeries,
    wall_seconds: f64,
) -> Result<()> {
    let total: f64 = config.particles.total as f64;
    let mut max_norm_drift = 0.0f64;
    let mut max_particle_drift = 0.0f64;
    let mut max_energy_drift = 0.0f64;
    let e0 = series.records.first().map(|r| r.energy).unwrap_or(0.0);
    let e_scale = e0.abs().max(1e-2);
    for record in &series.records {
        max_norm_drift = max_norm_drift.max((record.norm - 1.0).abs());
        let particles: f64 = record.fillings.iter().sum();
        max_particle_drift = max_particle_drift.max((particles - total).abs());
        max_energy_drift = max_energy_drift.max((record.energy - e0).abs() / e_scale);
    }

    let manifest = Manifest {
        run: ManifestRun {
            label,
            version: env!("CARGO_PKG_VERSION"),
            wall_seconds,
            samples: series.len(),
        },
        tolerances: ManifestTolerances {
            dt: plan.dt,
            sample_every: plan.sample_every,
            t_final: plan.t_final,
            energy_shift: format!("{:?}", plan.energy_shift).to_lowercase(),
            norm_drift_bound: plan.norm_drift_bound,
            gpe_tol: config.initial.gpe_tol,
            gpe_step_factor: 0.1,
            gpe_convergence: "max successive delta < tol/10 and residual < tol",
            basis_ordering: "descending lexicographic occupation tuples",
            dense_oracle_cap: crate::lattice::DENSE_CAP,
            reduction_chunk: 4096,
            condensate_norm_tol: 1e-12,
        },
        conservation: ManifestConservation {
            max_norm_drift,
            max_particle_drift,
            max_relative_energy_drift: max_energy_drift,
        },
        config,
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("cannot serialize manifest: {e}")))?;
    fs::write(path, text)?;
    Ok(())
}

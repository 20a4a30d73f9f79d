//! Experiment runner: wires the Gross-Pitaevskii seed, state construction,
//! propagation and observables into config-driven runs with plot-ready
//! output files and an auditable manifest.

mod config;
mod output;
mod presets;

pub use config::{
    BondOverride, Column, ExperimentConfig, InitialSection, InitialSource, LatticeSection,
    OutputsSection, ParticlesSection, PlanSection, ShiftChoice, SweepSection, Topology,
};
pub use presets::{preset, PRESET_NAMES};

use std::path::PathBuf;
use std::time::Instant;

use num_complex::Complex64;

use crate::basis;
use crate::error::{Error, Result};
use crate::gpe;
use crate::lattice::{chain_spec, ring_spec, LatticeSpec};
use crate::propagate::{evolve, EnergyShift, Observers, PropagationPlan, TimeSeries};
use crate::state::{condensate_state, product_state, CondensateSpec};

/// Buffers held simultaneously during propagation (state + Runge-Kutta
/// scratch); used for the memory estimate.
const STATE_BUFFERS: u64 = 5;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub output_dir: PathBuf,
    pub workers: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { output_dir: PathBuf::from("out"), workers: None }
    }
}

/// Everything produced by one completed run.
#[derive(Debug)]
pub struct CompletedRun {
    pub label: String,
    pub data_path: PathBuf,
    pub manifest_path: PathBuf,
    pub series: TimeSeries,
    /// 0-based site groups.
    pub subsystems: Vec<Vec<usize>>,
    pub columns: Vec<(String, Column)>,
    pub plan: PlanSection,
}

#[derive(Debug, Default)]
pub struct RunReport {
    pub runs: Vec<CompletedRun>,
}

/// Outcome of checking a configuration without running it.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    /// Invariant violations; empty for a runnable config.
    pub findings: Vec<String>,
    pub dimension: u64,
    /// `STATE_BUFFERS * dimension * 16` bytes.
    pub memory_estimate_bytes: u64,
    pub steps_estimate: u64,
}

/// One sweep-expanded, fully checked run description.
struct ResolvedRun {
    label: String,
    stem: String,
    spec: LatticeSpec,
    total: u32,
    split: Vec<u32>,
    subsystems: Vec<Vec<usize>>,
    initial: InitialSection,
    plan_section: PlanSection,
    columns: Vec<(String, Column)>,
    config_echo: ExperimentConfig,
}

fn build_lattice(section: &LatticeSection, findings: &mut Vec<String>) -> Option<LatticeSpec> {
    let mut spec = match section.topology {
        Topology::Ring => {
            if section.sites.is_some_and(|m| m != 6) {
                findings.push("ring topology is fixed at six sites".into());
                return None;
            }
            if section.j.is_some() {
                findings.push("ring topology uses j1/j2, not j".into());
            }
            let (Some(j1), Some(j2)) = (section.j1, section.j2) else {
                findings.push("ring topology requires j1 and j2".into());
                return None;
            };
            ring_spec(j1, j2)
        }
        Topology::Chain => {
            if section.j1.is_some() || section.j2.is_some() {
                findings.push("chain topology uses j, not j1/j2".into());
            }
            let Some(j) = section.j else {
                findings.push("chain topology requires j".into());
                return None;
            };
            let sites = section.sites.unwrap_or(4);
            if sites < 2 {
                findings.push(format!("a chain needs at least two sites, got {sites}"));
                return None;
            }
            chain_spec(j, sites)
        }
    };
    for bond in &section.bonds {
        if bond.i < 1 || bond.j < 1 {
            findings
                .push(format!("bond override sites are 1-based, got ({}, {})", bond.i, bond.j));
            continue;
        }
        if let Err(e) = spec.set_bond(bond.i - 1, bond.j - 1, bond.strength) {
            findings.push(e.to_string());
        }
    }
    Some(spec)
}

fn resolve(config: &ExperimentConfig) -> (Vec<String>, Vec<ResolvedRun>) {
    let mut findings = Vec::new();
    let mut runs = Vec::new();

    // sweep expansion first; each variant re-derives U from its own lattice
    let variants: Vec<(String, ExperimentConfig)> = match &config.sweep {
        None => vec![(config.name.clone(), strip_sweep(config))],
        Some(sweep) => {
            if sweep.parameter != "j2" {
                findings.push(format!("only 'j2' can be swept, got '{}'", sweep.parameter));
                return (findings, runs);
            }
            if config.lattice.topology != Topology::Ring {
                findings.push("a j2 sweep requires the ring topology".into());
                return (findings, runs);
            }
            if sweep.values.is_empty() {
                findings.push("sweep values must be non-empty".into());
                return (findings, runs);
            }
            sweep
                .values
                .iter()
                .map(|&v| {
                    let mut one = strip_sweep(config);
                    one.lattice.j2 = Some(v);
                    (format!("{}_j2_{v}", config.name), one)
                })
                .collect()
        }
    };

    for (label, variant) in variants {
        let before = findings.len();
        if let Some(resolved) = resolve_one(&label, &variant, &mut findings) {
            if findings.len() == before {
                runs.push(resolved);
            }
        }
    }
    (findings, runs)
}

fn strip_sweep(config: &ExperimentConfig) -> ExperimentConfig {
    let mut one = config.clone();
    one.sweep = None;
    one
}

fn resolve_one(
    label: &str,
    config: &ExperimentConfig,
    findings: &mut Vec<String>,
) -> Option<ResolvedRun> {
    let mut spec = build_lattice(&config.lattice, findings)?;
    let m = spec.site_count();
    let total = config.particles.total;

    // interaction strength U = g/(N-1)
    let g = config.lattice.g;
    if total >= 2 {
        spec = spec.with_interaction(g / (total as f64 - 1.0));
    } else if g != 0.0 {
        findings.push(format!("U = g/(N-1) needs at least two particles, got N = {total}"));
        return None;
    }

    // subsystems: contiguous blocks covering all sites, leading block first
    // (the product embedding places the first factor on the leading sites)
    let subsystems: Vec<Vec<usize>> = match &config.particles.subsystems {
        Some(groups) => {
            let mut zero_based = Vec::new();
            let mut next = 0usize;
            for group in groups {
                let converted: Vec<usize> = group.iter().map(|&s| s.wrapping_sub(1)).collect();
                if converted.iter().enumerate().any(|(o, &s)| s != next + o) {
                    findings.push(format!(
                        "subsystems must be contiguous blocks in site order; got {group:?}"
                    ));
                    return None;
                }
                next += converted.len();
                zero_based.push(converted);
            }
            if next != m {
                findings.push(format!("subsystems must cover all {m} sites exactly once"));
                return None;
            }
            zero_based
        }
        None => {
            if m % 2 != 0 {
                findings.push(format!(
                    "cannot derive subsystems for an odd site count {m}; set particles.subsystems"
                ));
                return None;
            }
            vec![(0..m / 2).collect(), (m / 2..m).collect()]
        }
    };

    let split: Vec<u32> = match &config.particles.split {
        Some(split) => split.clone(),
        None => {
            let half = total / 2;
            vec![total - half, half]
        }
    };
    if split.len() != subsystems.len() {
        findings.push(format!("{} split entries for {} subsystems", split.len(), subsystems.len()));
        return None;
    }
    if split.iter().map(|&n| n as u64).sum::<u64>() != total as u64 {
        findings
            .push(format!("subsystem particle counts {split:?} do not sum to the total {total}"));
        return None;
    }

    // initial-state source
    match config.initial.source {
        InitialSource::Gpe => {
            if config.initial.coefficients.is_some() {
                findings
                    .push("initial.coefficients is only used with source = \"explicit\"".into());
            }
            if !(config.initial.gpe_tol > 0.0) {
                findings.push("initial.gpe_tol must be positive".into());
            }
        }
        InitialSource::Explicit => match &config.initial.coefficients {
            None => findings.push("source = \"explicit\" requires initial.coefficients".into()),
            Some(lists) => {
                if lists.len() != subsystems.len() {
                    findings.push(format!(
                        "{} coefficient lists for {} subsystems",
                        lists.len(),
                        subsystems.len()
                    ));
                } else {
                    for (k, (list, group)) in lists.iter().zip(&subsystems).enumerate() {
                        if list.len() != group.len() {
                            findings.push(format!(
                                "subsystem {} has {} sites but {} coefficients",
                                k + 1,
                                group.len(),
                                list.len()
                            ));
                        } else if list.iter().map(|c| c * c).sum::<f64>() <= 0.0 {
                            findings.push(format!("subsystem {} coefficients are all zero", k + 1));
                        }
                    }
                }
            }
        },
    }

    // propagation plan
    if !(config.plan.dt > 0.0) {
        findings.push(format!("plan.dt must be positive, got {}", config.plan.dt));
    }
    if !(config.plan.t_final >= 0.0) {
        findings.push(format!("plan.t_final must be non-negative, got {}", config.plan.t_final));
    }
    if config.plan.sample_every == 0 {
        findings.push("plan.sample_every must be at least 1".into());
    }
    if !(config.plan.norm_drift_bound > 0.0) {
        findings.push("plan.norm_drift_bound must be positive".into());
    }

    // output columns, checked before any computation
    let mut columns = Vec::new();
    for name in &config.outputs.columns {
        match Column::parse(name) {
            Err(e) => findings.push(e.to_string()),
            Ok(column) => {
                match &column {
                    Column::Filling(j) => {
                        if *j >= m {
                            findings.push(format!("column '{name}': site out of range"));
                        }
                    }
                    Column::SubsystemNumber(k) | Column::SubsystemPurity(k) => {
                        if *k >= subsystems.len() {
                            findings.push(format!("column '{name}': no subsystem {}", k + 1));
                        } else if matches!(column, Column::SubsystemPurity(_))
                            && subsystems[*k].len() < 2
                        {
                            findings
                                .push(format!("column '{name}': purity needs at least two sites"));
                        }
                    }
                    Column::PairContrast(j, k)
                    | Column::PairPurity(j, k)
                    | Column::PairImbalance(j, k) => {
                        if *j >= m || *k >= m || j == k {
                            findings.push(format!("column '{name}': invalid site pair"));
                        }
                    }
                    Column::TotalPurity => {
                        if m < 2 {
                            findings.push(format!("column '{name}': purity needs two sites"));
                        }
                    }
                    Column::Norm | Column::Energy => {}
                }
                columns.push((name.clone(), column));
            }
        }
    }
    if columns.is_empty() {
        findings.push("outputs.columns must request at least one column".into());
    }

    Some(ResolvedRun {
        label: label.to_string(),
        stem: if label == config.name {
            config.outputs.stem.clone()
        } else {
            format!("{}{}", config.outputs.stem, label.trim_start_matches(&config.name))
        },
        spec,
        total,
        split,
        subsystems,
        initial: config.initial.clone(),
        plan_section: config.plan.clone(),
        columns,
        config_echo: config.clone(),
    })
}

/// Check a configuration and report violations, the basis dimension, the
/// memory footprint of a run, and the step count — without computing
/// anything.
pub fn validate(config: &ExperimentConfig) -> ValidationReport {
    let (findings, runs) = resolve(config);
    let (dimension, steps) = runs
        .first()
        .map(|r| {
            let dim = basis::dimension(r.total, r.spec.site_count()).unwrap_or(0);
            let steps = (r.plan_section.t_final / r.plan_section.dt).round() as u64;
            (dim, steps)
        })
        .unwrap_or((0, 0));
    ValidationReport {
        findings,
        dimension,
        memory_estimate_bytes: STATE_BUFFERS * dimension * 16,
        steps_estimate: steps,
    }
}

/// Execute a configuration: for each (sweep-expanded) run, solve the
/// subsystem ground states, assemble the product state, propagate, and
/// write one time-series file plus one manifest. Deterministic for a given
/// config, independent of the worker count.
pub fn run(config: &ExperimentConfig, options: &RunOptions) -> Result<RunReport> {
    match options.workers {
        None => run_inner(config, options),
        Some(workers) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            pool.install(|| run_inner(config, options))
        }
    }
}

fn run_inner(config: &ExperimentConfig, options: &RunOptions) -> Result<RunReport> {
    let (findings, resolved) = resolve(config);
    if !findings.is_empty() {
        return Err(Error::Config(findings.join("; ")));
    }
    std::fs::create_dir_all(&options.output_dir)?;

    let mut report = RunReport::default();
    for run in resolved {
        let started = Instant::now();
        let psi0 = build_initial_state(&run).map_err(|e| stage("initial-state", e))?;

        let plan = make_plan(&run.plan_section).map_err(|e| stage("plan", e))?;
        let observers = Observers {
            correlators: run.columns.iter().any(|(_, c)| {
                matches!(
                    c,
                    Column::SubsystemPurity(_)
                        | Column::TotalPurity
                        | Column::PairContrast(..)
                        | Column::PairPurity(..)
                        | Column::PairImbalance(..)
                )
            }),
        };
        let series = evolve(&run.spec, &psi0, &plan, &observers)?;

        let data_path = options.output_dir.join(format!("{}.tsv", run.stem));
        output::write_series(&data_path, &series, &run.columns, &run.subsystems)
            .map_err(|e| stage("output", e))?;
        let manifest_path = options.output_dir.join(format!("{}.manifest.toml", run.stem));
        output::write_manifest(
            &manifest_path,
            &run.label,
            &run.config_echo,
            &run.plan_section,
            &series,
            started.elapsed().as_secs_f64(),
        )
        .map_err(|e| stage("output", e))?;

        report.runs.push(CompletedRun {
            label: run.label,
            data_path,
            manifest_path,
            series,
            subsystems: run.subsystems,
            columns: run.columns,
            plan: run.plan_section,
        });
    }
    Ok(report)
}

/// Name the failing stage; propagation errors keep their variant so exit
/// codes distinguish convergence from accuracy failures.
fn stage(name: &str, error: Error) -> Error {
    match error {
        e @ (Error::Io(_) | Error::Convergence { .. } | Error::NormDrift { .. }) => e,
        e => Error::Config(format!("{name}: {e}")),
    }
}

fn make_plan(section: &PlanSection) -> Result<PropagationPlan> {
    let mut plan = PropagationPlan::new(section.t_final, section.dt)?
        .with_sample_every(section.sample_every)?;
    plan.renormalize = section.renormalize;
    plan.energy_shift = match section.energy_shift {
        ShiftChoice::Auto => EnergyShift::Auto,
        ShiftChoice::None => EnergyShift::None,
    };
    plan.norm_drift_bound = section.norm_drift_bound;
    Ok(plan)
}

fn build_initial_state(run: &ResolvedRun) -> Result<crate::lattice::StateVector> {
    let mut factors = Vec::new();
    for (k, group) in run.subsystems.iter().enumerate() {
        let particles = run.split[k];
        let unit: Vec<Complex64> = match run.initial.source {
            InitialSource::Gpe => {
                if particles == 0 {
                    // vacuum factor: any unit mode works
                    let c = (1.0 / group.len() as f64).sqrt();
                    group.iter().map(|_| Complex64::new(c, 0.0)).collect()
                } else {
                    let sub_spec = run.spec.restricted_to(group)?;
                    let norm_target = particles as f64 / run.total as f64;
                    let g = run.config_echo.lattice.g;
                    let mf =
                        gpe::solve_ground_state(&sub_spec, g, norm_target, run.initial.gpe_tol)?;
                    mf.unit_coefficients()
                }
            }
            InitialSource::Explicit => {
                let list = &run.initial.coefficients.as_ref().expect("validated")[k];
                let norm: f64 = list.iter().map(|c| c * c).sum::<f64>().sqrt();
                list.iter().map(|&c| Complex64::new(c / norm, 0.0)).collect()
            }
        };
        let cond = CondensateSpec::new(unit, particles, group.clone())?;
        factors.push(condensate_state(&cond)?);
    }
    let mut state = factors.remove(0);
    for factor in factors {
        state = product_state(&state, &factor);
    }
    Ok(state)
}

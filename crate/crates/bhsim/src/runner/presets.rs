//! Ready-made experiment configurations, one per figure-style output.
//!
//! Ring presets default to the desk-scale particle number N = 30, which
//! shows the same qualitative structure (oscillations, antiphase filling,
//! coupling-strength ordering of the purity minima) as the full N = 70 run;
//! the latter needs gigabytes and hours, so it sits behind an explicit
//! override (`--full-scale` or `particles.total=70`).

use super::config::*;
use crate::error::{Error, Result};

pub const PRESET_NAMES: [&str; 6] = [
    "ring-filling",
    "ring-purity-sweep",
    "ring-contrast",
    "chain-numbers",
    "chain-purity",
    "chain-contrast",
];

fn ring_lattice(j2: f64) -> LatticeSection {
    LatticeSection {
        topology: Topology::Ring,
        sites: None,
        j1: Some(1.0),
        j2: Some(j2),
        j: None,
        g: 1.0,
        bonds: Vec::new(),
    }
}

fn ring_particles() -> ParticlesSection {
    ParticlesSection { total: 30, split: Some(vec![15, 15]), subsystems: None }
}

fn chain_lattice() -> LatticeSection {
    LatticeSection {
        topology: Topology::Chain,
        sites: Some(4),
        j1: None,
        j2: None,
        j: Some(2.0),
        g: 0.0,
        bonds: Vec::new(),
    }
}

fn plan(t_final: f64, dt: f64, sample_every: usize) -> PlanSection {
    PlanSection {
        t_final,
        dt,
        sample_every,
        renormalize: false,
        energy_shift: ShiftChoice::Auto,
        norm_drift_bound: 1e-6,
    }
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Build a named preset configuration.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let config = match name {
        "ring-filling" => ExperimentConfig {
            name: name.into(),
            lattice: ring_lattice(2.0),
            particles: ring_particles(),
            initial: InitialSection::default(),
            plan: plan(50.0, 1e-3, 50),
            sweep: None,
            outputs: OutputsSection {
                stem: "ring_filling".into(),
                columns: columns(&[
                    "n1", "n2", "n3", "n4", "n5", "n6", "N_sub1", "N_sub2", "norm", "energy",
                ]),
            },
        },
        "ring-purity-sweep" => ExperimentConfig {
            name: name.into(),
            lattice: ring_lattice(2.0),
            particles: ring_particles(),
            initial: InitialSection::default(),
            // the sweep includes the stiffest coupling, hence the finer step
            plan: plan(50.0, 7e-4, 72),
            sweep: Some(SweepSection {
                parameter: "j2".into(),
                values: vec![0.5, 1.0, 2.0, 3.0],
            }),
            outputs: OutputsSection {
                stem: "ring_purity".into(),
                columns: columns(&["P_sub1", "P_sub2", "P_tot", "norm", "energy"]),
            },
        },
        "ring-contrast" => ExperimentConfig {
            name: name.into(),
            lattice: ring_lattice(2.0),
            particles: ring_particles(),
            initial: InitialSection::default(),
            plan: plan(50.0, 1e-3, 50),
            sweep: None,
            outputs: OutputsSection {
                stem: "ring_contrast".into(),
                columns: columns(&["nu_12", "P_12", "I_12", "P_sub1", "norm", "energy"]),
            },
        },
        "chain-numbers" => ExperimentConfig {
            name: name.into(),
            lattice: chain_lattice(),
            particles: ParticlesSection {
                total: 21,
                split: Some(vec![20, 1]),
                subsystems: None,
            },
            initial: InitialSection::default(),
            plan: plan(30.0, 5e-4, 100),
            sweep: None,
            outputs: OutputsSection {
                stem: "chain_numbers".into(),
                columns: columns(&[
                    "N_sub1", "N_sub2", "n1", "n2", "n3", "n4", "norm", "energy",
                ]),
            },
        },
        "chain-purity" => ExperimentConfig {
            name: name.into(),
            lattice: chain_lattice(),
            particles: ParticlesSection {
                total: 21,
                split: Some(vec![20, 1]),
                subsystems: None,
            },
            initial: InitialSection::default(),
            plan: plan(30.0, 5e-4, 100),
            sweep: None,
            outputs: OutputsSection {
                stem: "chain_purity".into(),
                columns: columns(&["P_sub1", "P_sub2", "P_tot", "norm", "energy"]),
            },
        },
        "chain-contrast" => ExperimentConfig {
            name: name.into(),
            lattice: chain_lattice(),
            particles: ParticlesSection {
                total: 21,
                split: Some(vec![20, 1]),
                subsystems: None,
            },
            initial: InitialSection::default(),
            plan: plan(30.0, 5e-4, 100),
            sweep: None,
            outputs: OutputsSection {
                stem: "chain_contrast".into(),
                columns: columns(&[
                    "nu_12", "nu_34", "P_12", "I_12", "P_34", "I_34", "norm", "energy",
                ]),
            },
        },
        other => {
            return Err(Error::Usage(format!(
                "unknown preset '{other}'; available presets: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(config)
}

//! Experiment configuration: TOML schema, overrides, and the output-column
//! grammar. Site labels in configs and column names are 1-based; they are
//! converted to 0-based indices during resolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub lattice: LatticeSection,
    pub particles: ParticlesSection,
    #[serde(default)]
    pub initial: InitialSection,
    pub plan: PlanSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    pub outputs: OutputsSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    /// Six sites, two three-well subsystems closed into a ring.
    Ring,
    /// Open nearest-neighbor chain.
    Chain,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub topology: Topology,
    /// Chain site count (the ring is fixed at six sites).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sites: Option<usize>,
    /// Ring intra-subsystem bond strength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    /// Ring inter-subsystem bond strength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
    /// Chain bond strength.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// Macroscopic interaction strength; the on-site U is g/(N-1).
    pub g: f64,
    /// Per-bond overrides applied after the topology is built (1-based).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub bonds: Vec<BondOverride>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BondOverride {
    pub i: usize,
    pub j: usize,
    pub strength: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticlesSection {
    pub total: u32,
    /// Particles per subsystem; defaults to an even split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<Vec<u32>>,
    /// Site groups forming the subsystems (1-based); defaults to contiguous
    /// halves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subsystems: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum InitialSource {
    /// Each subsystem starts in the ground state of its isolated
    /// Gross-Pitaevskii equation.
    #[default]
    Gpe,
    /// Explicit per-subsystem mode coefficients (real, any scale; they are
    /// normalized before use).
    Explicit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default)]
    pub source: InitialSource,
    #[serde(default = "default_gpe_tol")]
    pub gpe_tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<Vec<f64>>>,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self { source: InitialSource::Gpe, gpe_tol: default_gpe_tol(), coefficients: None }
    }
}

fn default_gpe_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanSection {
    pub t_final: f64,
    pub dt: f64,
    pub sample_every: usize,
    #[serde(default)]
    pub renormalize: bool,
    #[serde(default)]
    pub energy_shift: ShiftChoice,
    #[serde(default = "default_norm_drift_bound")]
    pub norm_drift_bound: f64,
}

fn default_norm_drift_bound() -> f64 {
    1e-6
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ShiftChoice {
    #[default]
    Auto,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Only "j2" is sweepable: the coupling that drives the dynamics.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputsSection {
    /// Output files are `<stem>.tsv` and `<stem>.manifest.toml` (suffixed
    /// with the sweep value for sweep runs).
    pub stem: String,
    pub columns: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Apply a dotted-path override like `plan.dt=5e-4` or
    /// `particles.split=[20, 1]`. The value is parsed as a TOML literal.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, raw_value) = assignment.split_once('=').ok_or_else(|| {
            Error::Usage(format!("override '{assignment}' must look like key.path=value"))
        })?;
        let parsed: toml::Value = toml::from_str(&format!("value = {raw_value}"))
            .map_err(|e| Error::Usage(format!("cannot parse value in '{assignment}': {e}")))?;
        let value = parsed.get("value").cloned().expect("just parsed");

        let mut doc: toml::Value = toml::Value::try_from(&*self).expect("config re-serializes");
        let mut node = &mut doc;
        let segments: Vec<&str> = path.trim().split('.').collect();
        for (i, segment) in segments.iter().enumerate() {
            let table = node.as_table_mut().ok_or_else(|| {
                Error::Usage(format!("'{}' is not a section", segments[..i].join(".")))
            })?;
            if i + 1 == segments.len() {
                table.insert(segment.to_string(), value);
                break;
            }
            node = table
                .entry(segment.to_string())
                .or_insert(toml::Value::Table(Default::default()));
        }
        *self = doc
            .try_into()
            .map_err(|e| Error::Usage(format!("override '{assignment}' is invalid: {e}")))?;
        Ok(())
    }
}

/// One requested output column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    /// `n<j>`: filling level of one site (0-based here).
    Filling(usize),
    /// `N_sub<k>`: total particle number in one subsystem.
    SubsystemNumber(usize),
    /// `P_sub<k>`: purity of one subsystem's density matrix.
    SubsystemPurity(usize),
    /// `P_tot`: purity over all sites.
    TotalPurity,
    /// `nu_<jk>`: average contrast of a site pair.
    PairContrast(usize, usize),
    /// `P_<jk>`: two-site purity.
    PairPurity(usize, usize),
    /// `I_<jk>`: squared particle imbalance.
    PairImbalance(usize, usize),
    Norm,
    Energy,
}

impl Column {
    /// Parse a 1-based column name; `nu_12` and `nu_1_2` both denote the
    /// pair (1, 2).
    pub fn parse(name: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unknown output column '{name}'"));
        let pair = |rest: &str| -> Result<(usize, usize)> {
            let parts: Vec<&str> = rest.split('_').collect();
            let (a, b) = match parts.as_slice() {
                [single] if single.len() == 2 => {
                    (single[..1].parse().ok(), single[1..].parse().ok())
                }
                [first, second] => (first.parse().ok(), second.parse().ok()),
                _ => (None, None),
            };
            match (a, b) {
                (Some(a), Some(b)) if a >= 1 && b >= 1 => Ok((a, b)),
                _ => Err(bad()),
            }
        };
        if name == "norm" {
            return Ok(Column::Norm);
        }
        if name == "energy" {
            return Ok(Column::Energy);
        }
        if name == "P_tot" {
            return Ok(Column::TotalPurity);
        }
        if let Some(rest) = name.strip_prefix("N_sub") {
            let k: usize = rest.parse().map_err(|_| bad())?;
            if k < 1 {
                return Err(bad());
            }
            return Ok(Column::SubsystemNumber(k - 1));
        }
        if let Some(rest) = name.strip_prefix("P_sub") {
            let k: usize = rest.parse().map_err(|_| bad())?;
            if k < 1 {
                return Err(bad());
            }
            return Ok(Column::SubsystemPurity(k - 1));
        }
        if let Some(rest) = name.strip_prefix("nu_") {
            let (a, b) = pair(rest)?;
            return Ok(Column::PairContrast(a - 1, b - 1));
        }
        if let Some(rest) = name.strip_prefix("P_") {
            let (a, b) = pair(rest)?;
            return Ok(Column::PairPurity(a - 1, b - 1));
        }
        if let Some(rest) = name.strip_prefix("I_") {
            let (a, b) = pair(rest)?;
            return Ok(Column::PairImbalance(a - 1, b - 1));
        }
        if let Some(rest) = name.strip_prefix('n') {
            let j: usize = rest.parse().map_err(|_| bad())?;
            if j < 1 {
                return Err(bad());
            }
            return Ok(Column::Filling(j - 1));
        }
        Err(bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn column_grammar_roundtrip() {
        assert_eq!(Column::parse("n3").unwrap(), Column::Filling(2));
        assert_eq!(Column::parse("N_sub2").unwrap(), Column::SubsystemNumber(1));
        assert_eq!(Column::parse("P_sub1").unwrap(), Column::SubsystemPurity(0));
        assert_eq!(Column::parse("P_tot").unwrap(), Column::TotalPurity);
        assert_eq!(Column::parse("nu_12").unwrap(), Column::PairContrast(0, 1));
        assert_eq!(Column::parse("nu_1_2").unwrap(), Column::PairContrast(0, 1));
        assert_eq!(Column::parse("P_34").unwrap(), Column::PairPurity(2, 3));
        assert_eq!(Column::parse("I_12").unwrap(), Column::PairImbalance(0, 1));
        assert_eq!(Column::parse("norm").unwrap(), Column::Norm);
        assert_eq!(Column::parse("energy").unwrap(), Column::Energy);
        assert!(Column::parse("purity").is_err());
        assert!(Column::parse("n0").is_err());
        assert!(Column::parse("nu_1").is_err());
    }

    #[test]
    fn override_replaces_nested_values() {
        let mut config = crate::runner::preset("chain-numbers").unwrap();
        config.apply_override("plan.dt=0.002").unwrap();
        assert_eq!(config.plan.dt, 0.002);
        config.apply_override("particles.split=[19, 2]").unwrap();
        assert_eq!(config.particles.split, Some(vec![19, 2]));
        config.apply_override("lattice.g=0.5").unwrap();
        assert_eq!(config.lattice.g, 0.5);
        assert!(config.apply_override("plan.dt").is_err());
        assert!(config.apply_override("plan.nonsense=1").is_err());
    }
}

//! Experiment configuration files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use zne_core::circuit::{DdSequence, DecompositionMode, GateDurations, IsingParams};
use zne_core::mitigation::FitPoints;
use zne_core::noise::NoisePlacement;
use zne_core::topology::{heavy_hex_27, Topology};

use crate::error::{LabError, LabResult};
use crate::formats::load_topology;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingConfig {
    pub j: f64,
    pub h: f64,
    pub dt: f64,
    pub steps: usize,
}

impl IsingConfig {
    pub fn params(&self) -> IsingParams {
        IsingParams {
            j: self.j,
            h: self.h,
            dt: self.dt,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Experiment {
    T1 {
        qubits: usize,
        delays_us: Vec<f64>,
    },
    Ghz {
        chain_length: usize,
    },
    Quench {
        ising: IsingConfig,
    },
    TnBaseline {
        ising: IsingConfig,
        bond_dims: Vec<usize>,
    },
    InsertionAudit {
        /// JSON list of `[pauli, probability]` pairs on two qubits.
        channel: PathBuf,
        k: Vec<usize>,
        #[serde(default = "before")]
        placement: NoisePlacement,
    },
}

fn before() -> NoisePlacement {
    NoisePlacement::Before
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Sublattice {
    Nodes { nodes: Vec<usize> },
    Bfs { bfs_from: usize, size: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulatorChoice {
    /// Density matrix up to its qubit limit, trajectories beyond.
    #[default]
    Auto,
    Density,
    Trajectory,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub experiment: Experiment,
    /// `heavy_hex_27`, `chain:<n>` or a topology JSON path.
    #[serde(default = "default_topology")]
    pub topology: String,
    #[serde(default)]
    pub exclude_nodes: Vec<usize>,
    #[serde(default)]
    pub sublattice: Option<Sublattice>,
    #[serde(default = "default_mode")]
    pub decomposition: DecompositionMode,
    #[serde(default = "default_stretch")]
    pub stretch_factors: Vec<f64>,
    #[serde(default = "default_order")]
    pub extrapolation_order: usize,
    #[serde(default)]
    pub fit: FitPoints,
    /// Shots per stretch factor and measurement basis, split evenly over
    /// twirl instances.
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default = "default_instances")]
    pub twirl_instances: usize,
    #[serde(default)]
    pub dd: Option<DdSequence>,
    /// Noise JSON path; absent means noiseless.
    #[serde(default)]
    pub noise: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    /// Bond dimension of the tensor-network comparison, if any.
    #[serde(default)]
    pub tn_bond_dim: Option<usize>,
    #[serde(default)]
    pub simulator: SimulatorChoice,
    #[serde(default)]
    pub durations: GateDurations,
    /// Directory that relative paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
    /// File the config was read from, for error reports.
    #[serde(skip)]
    pub source_path: PathBuf,
}

fn default_topology() -> String {
    "heavy_hex_27".into()
}
fn default_mode() -> DecompositionMode {
    DecompositionMode::NativeRzz
}
fn default_stretch() -> Vec<f64> {
    vec![1.0, 1.6, 2.0]
}
fn default_order() -> usize {
    1
}
fn default_shots() -> u64 {
    100_000
}
fn default_instances() -> usize {
    1
}
fn default_resamples() -> usize {
    50
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> LabResult<Self> {
        let text = fs::read_to_string(path).map_err(|e| LabError::config(path, format!("cannot read: {e}")))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| LabError::config(path, format!("invalid JSON: {e}")))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.source_path = path.to_path_buf();
        cfg.validate().map_err(|m| LabError::config(path, m))?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn kind_name(&self) -> &'static str {
        match self.experiment {
            Experiment::T1 { .. } => "t1",
            Experiment::Ghz { .. } => "ghz",
            Experiment::Quench { .. } => "quench",
            Experiment::TnBaseline { .. } => "tn_baseline",
            Experiment::InsertionAudit { .. } => "insertion_audit",
        }
    }

    fn needs_stretch(&self) -> bool {
        matches!(
            self.experiment,
            Experiment::T1 { .. } | Experiment::Ghz { .. } | Experiment::Quench { .. }
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.needs_stretch() {
            let s = &self.stretch_factors;
            if s.iter().any(|&c| !(c >= 1.0) || !c.is_finite()) {
                return Err("stretch factors must be finite and >= 1".into());
            }
            if s.windows(2).any(|w| w[1] <= w[0]) {
                return Err("stretch factors must be strictly increasing".into());
            }
            if self.extrapolation_order == 0 || s.len() <= self.extrapolation_order {
                return Err(format!(
                    "order {} extrapolation needs more than {} stretch factors",
                    self.extrapolation_order,
                    s.len()
                ));
            }
            if self.twirl_instances == 0 || self.shots < self.twirl_instances as u64 {
                return Err("need at least one twirl instance and one shot per instance".into());
            }
            if self.resamples == 0 {
                return Err("resamples must be positive".into());
            }
        }
        match &self.experiment {
            Experiment::T1 { qubits, delays_us } => {
                if *qubits == 0 || *qubits > 10 {
                    return Err("t1 experiments take 1 to 10 qubits".into());
                }
                if delays_us.is_empty() || delays_us.iter().any(|d| !(*d >= 0.0)) {
                    return Err("delays must be a nonempty list of non-negative times".into());
                }
            }
            Experiment::Ghz { chain_length } => {
                if *chain_length < 2 {
                    return Err("GHZ chains need at least 2 qubits".into());
                }
            }
            Experiment::Quench { ising } => check_ising(ising)?,
            Experiment::TnBaseline { ising, bond_dims } => {
                check_ising(ising)?;
                if bond_dims.is_empty() || bond_dims.contains(&0) {
                    return Err("bond dimensions must be a nonempty list of positive integers".into());
                }
            }
            Experiment::InsertionAudit { k, .. } => {
                if k.is_empty() {
                    return Err("insertion audit needs at least one k".into());
                }
            }
        }
        if self.tn_bond_dim == Some(0) {
            return Err("bond dimension must be positive".into());
        }
        Ok(())
    }

    /// The experiment lattice, renumbered densely, and `map[new] = old`.
    pub fn lattice(&self) -> Result<(Topology, Vec<usize>), String> {
        let mut top = if self.topology == "heavy_hex_27" {
            heavy_hex_27()
        } else if let Some(n) = self.topology.strip_prefix("chain:") {
            Topology::chain(n.parse().map_err(|_| format!("bad chain length `{n}`"))?)
        } else {
            let path = self.resolve(Path::new(&self.topology));
            load_topology(&path).map_err(|e| e.to_string())?
        };
        for &v in &self.exclude_nodes {
            top = top.exclude_node(v).map_err(|e| e.to_string())?;
        }
        if let Some(sub) = &self.sublattice {
            let nodes: Vec<usize> = match sub {
                Sublattice::Nodes { nodes } => nodes.clone(),
                Sublattice::Bfs { bfs_from, size } => {
                    let order = top.bfs_order(*bfs_from);
                    if order.len() < *size {
                        return Err(format!("only {} nodes reachable from {bfs_from}", order.len()));
                    }
                    order[..*size].to_vec()
                }
            };
            top = top.induced(&nodes).map_err(|e| e.to_string())?;
        }
        Ok(top.compact())
    }
}

fn check_ising(i: &IsingConfig) -> Result<(), String> {
    if i.steps == 0 || !(i.dt > 0.0) || !i.j.is_finite() || !i.h.is_finite() {
        return Err("ising parameters need steps >= 1, dt > 0 and finite J, h".into());
    }
    Ok(())
}

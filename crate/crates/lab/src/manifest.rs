//! Run manifest: what was run, with which seeds, and how long each stage
//! took.

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use zne_core::rng::derive_seed;

use crate::config::ExperimentConfig;

pub const STAGE_TWIRL: u64 = 1;
pub const STAGE_SAMPLE: u64 = 2;
pub const STAGE_BOOTSTRAP: u64 = 3;

pub const STRETCH_AVERAGING_NOTE: &str = "stretched-circuit averaging against drifting coherence is a no-op here: \
     the simulated noise is static, so repeated runs at one stretch factor differ only by shot noise";

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub name: String,
    pub seed: Option<u64>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config_hash: String,
    pub code_version: String,
    pub kind: String,
    pub master_seed: u64,
    pub simulator: Option<String>,
    /// `qubit_map[i]` is the lattice label of simulated qubit `i`.
    pub qubit_map: Vec<usize>,
    pub stretch_factors: Vec<f64>,
    pub circuit_time_ns: Option<f64>,
    pub stages: Vec<StageRecord>,
    pub notes: Vec<String>,
}

/// SHA-256 of the config's canonical JSON rendering.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("configs serialize");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            config_hash: config_hash(cfg),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            kind: cfg.kind_name().to_string(),
            master_seed: cfg.seed,
            simulator: None,
            qubit_map: Vec::new(),
            stretch_factors: cfg.stretch_factors.clone(),
            circuit_time_ns: None,
            stages: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn stage_seed(&self, stage: u64) -> u64 {
        derive_seed(self.master_seed, &[stage])
    }

    /// Runs `f`, recording its wall-clock time under `name`.
    pub fn timed<T, E>(&mut self, name: &str, seed: Option<u64>, f: impl FnOnce() -> Result<T, E>) -> Result<T, E> {
        let start = Instant::now();
        let out = f();
        self.stages.push(StageRecord {
            name: name.to_string(),
            seed,
            wall_ms: start.elapsed().as_secs_f64() * 1e3,
        });
        out
    }
}

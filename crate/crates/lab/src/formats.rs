//! File formats: topology, noise and circuit JSON, counts JSON and the CSV
//! tables written by the runner.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use zne_core::circuit::Circuit;
use zne_core::noise::{Confusion, GateErrors, NoiseModel, PauliChannel, ZzCoupling};
use zne_core::pauli::{Pauli, PauliString};
use zne_core::sim::Counts;
use zne_core::topology::Topology;

use crate::error::{LabError, LabResult};

/// Rendering with 12 significant digits, shortest form; exponent notation
/// below 1e-6.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded != 0.0 && rounded.abs() < 1e-6 {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn read(path: &Path) -> LabResult<String> {
    fs::read_to_string(path).map_err(|e| LabError::config(path, format!("cannot read: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyFile {
    pub nodes: Vec<usize>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinates: Option<Vec<(f64, f64)>>,
}

impl TopologyFile {
    pub fn from_topology(t: &Topology) -> Self {
        Self {
            nodes: t.nodes(),
            edges: t.edges().into_iter().map(|(a, b)| [a, b]).collect(),
            coordinates: t.coordinates().map(|c| c.to_vec()),
        }
    }

    pub fn to_topology(&self) -> zne_core::Result<Topology> {
        let edges: Vec<(usize, usize)> = self.edges.iter().map(|e| (e[0], e[1])).collect();
        let t = Topology::with_nodes(&self.nodes, &edges)?;
        match &self.coordinates {
            Some(c) => t.with_coordinates(c.clone()),
            None => Ok(t),
        }
    }
}

pub fn load_topology(path: &Path) -> LabResult<Topology> {
    let file: TopologyFile =
        serde_json::from_str(&read(path)?).map_err(|e| LabError::config(path, format!("topology JSON: {e}")))?;
    file.to_topology().map_err(|e| LabError::config(path, e.to_string()))
}

/// A value given once for all qubits or once per qubit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerQubit<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Clone> PerQubit<T> {
    fn expand(&self, n: usize, what: &str) -> Result<Vec<T>, String> {
        match self {
            PerQubit::All(v) => Ok(vec![v.clone(); n]),
            PerQubit::Each(v) if v.len() == n => Ok(v.clone()),
            PerQubit::Each(v) => Err(format!("{what}: {} entries for {n} qubits", v.len())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutFlips {
    /// P(read 1 | prepared 0).
    pub p01: f64,
    /// P(read 0 | prepared 1).
    pub p10: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZzEntry {
    pub a: usize,
    pub b: usize,
    pub rate_rad_per_us: f64,
}

/// Noise model as stored on disk. Times are in microseconds and crosstalk
/// rates in rad/µs; `null` coherence times mean no decay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseFile {
    #[serde(default)]
    pub t1_us: Option<PerQubit<f64>>,
    #[serde(default)]
    pub t2_us: Option<PerQubit<f64>>,
    #[serde(default)]
    pub gate_error: GateErrors,
    #[serde(default)]
    pub zz: Vec<ZzEntry>,
    /// Same rate on every edge of the experiment topology.
    #[serde(default)]
    pub zz_all_edges_rad_per_us: Option<f64>,
    #[serde(default)]
    pub readout: Option<PerQubit<ReadoutFlips>>,
    #[serde(default)]
    pub prep_error: f64,
    #[serde(default = "one")]
    pub lambda_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl NoiseFile {
    /// Model for `n` qubits; `edges` supplies the all-edges crosstalk.
    pub fn to_model(&self, n: usize, edges: &[(usize, usize)]) -> Result<NoiseModel, String> {
        let times = |v: &Option<PerQubit<f64>>, what| -> Result<Vec<f64>, String> {
            match v {
                None => Ok(vec![f64::INFINITY; n]),
                Some(p) => Ok(p.expand(n, what)?.into_iter().map(|t| t * 1e3).collect()),
            }
        };
        let mut zz: Vec<ZzCoupling> = self
            .zz
            .iter()
            .map(|z| ZzCoupling {
                a: z.a,
                b: z.b,
                rate: z.rate_rad_per_us * 1e-3,
            })
            .collect();
        if let Some(r) = self.zz_all_edges_rad_per_us {
            zz.extend(edges.iter().map(|&(a, b)| ZzCoupling { a, b, rate: r * 1e-3 }));
        }
        let readout = match &self.readout {
            None => vec![Confusion::identity(); n],
            Some(p) => p
                .expand(n, "readout")?
                .into_iter()
                .map(|f| Confusion::from_flips(f.p01, f.p10))
                .collect(),
        };
        let model = NoiseModel {
            t1: times(&self.t1_us, "t1_us")?,
            t2: times(&self.t2_us, "t2_us")?,
            gate_error: self.gate_error.clone(),
            zz_crosstalk: zz,
            readout,
            prep_error: self.prep_error,
            lambda_scale: self.lambda_scale,
        };
        model.validate().map_err(|e| e.to_string())?;
        Ok(model)
    }
}

pub fn load_noise(path: &Path) -> LabResult<NoiseFile> {
    serde_json::from_str(&read(path)?).map_err(|e| LabError::config(path, format!("noise JSON: {e}")))
}

/// A two-qubit Pauli channel stored as `[[pauli, probability], ...]`; the
/// identity takes the remaining probability.
pub fn load_pauli_channel(path: &Path) -> LabResult<PauliChannel> {
    let entries: Vec<(String, f64)> =
        serde_json::from_str(&read(path)?).map_err(|e| LabError::config(path, format!("channel JSON: {e}")))?;
    let parsed = entries
        .iter()
        .map(|(s, p)| PauliString::parse(s).map(|ps| (ps, *p)))
        .collect::<zne_core::Result<Vec<_>>>()
        .map_err(|e| LabError::config(path, e.to_string()))?;
    PauliChannel::from_map(2, &parsed).map_err(|e| LabError::config(path, e.to_string()))
}

pub fn circuit_json(c: &Circuit) -> String {
    serde_json::to_string_pretty(c).expect("circuits serialize")
}

pub fn parse_circuit(s: &str) -> serde_json::Result<Circuit> {
    serde_json::from_str(s)
}

/// One measured setting in a counts file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub qubits: Vec<usize>,
    /// One basis letter per measured qubit.
    pub bases: String,
    /// Bitstring (character `i` is `qubits[i]`) to count.
    pub counts: BTreeMap<String, u64>,
}

impl CountsRecord {
    pub fn from_counts(c: &Counts) -> Self {
        Self {
            qubits: c.qubits.clone(),
            bases: c.bases.iter().map(|b| b.as_char()).collect(),
            counts: c.shots.iter().map(|(&o, &k)| (c.label(o), k)).collect(),
        }
    }

    pub fn to_counts(&self, seed: u64) -> zne_core::Result<Counts> {
        let bases = self
            .bases
            .chars()
            .map(Pauli::from_char)
            .collect::<zne_core::Result<Vec<_>>>()?;
        let mut c = Counts::new(self.qubits.clone(), bases, seed);
        for (label, &k) in &self.counts {
            let o = label
                .chars()
                .enumerate()
                .fold(0u64, |acc, (i, ch)| acc | (u64::from(ch == '1') << i));
            c.record(o, k);
        }
        Ok(c)
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

//! Observables, the GHZ error-location model and magnetization metrics.

use alloc::collections::BTreeMap;
use alloc::format;

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    Weight1,
    LocalZz,
    NonlocalZz,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub pauli: PauliString,
    pub kind: ObservableKind,
}

impl ObservableSpec {
    /// `Z_{chain[j-1]} Z_{chain[j]}`.
    pub fn local_zz(n: usize, chain: &[usize], j: usize) -> Result<Self> {
        check_j(chain.len(), j)?;
        Ok(Self {
            pauli: PauliString::on(n, &[chain[j - 1], chain[j]], Pauli::Z),
            kind: ObservableKind::LocalZz,
        })
    }

    /// `Z_{chain[0]} Z_{chain[j]}`.
    pub fn nonlocal_zz(n: usize, chain: &[usize], j: usize) -> Result<Self> {
        check_j(chain.len(), j)?;
        Ok(Self {
            pauli: PauliString::on(n, &[chain[0], chain[j]], Pauli::Z),
            kind: ObservableKind::NonlocalZz,
        })
    }

    pub fn weight1(n: usize, q: usize, p: Pauli) -> Self {
        Self {
            pauli: PauliString::on(n, &[q], p),
            kind: ObservableKind::Weight1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.pauli.weight();
        let zz_only = self.pauli.0.iter().all(|p| matches!(p, Pauli::I | Pauli::Z));
        let ok = match self.kind {
            ObservableKind::Weight1 => w == 1,
            ObservableKind::LocalZz | ObservableKind::NonlocalZz => w == 2 && zz_only,
            ObservableKind::Custom => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{} is not a {:?} observable",
                self.pauli, self.kind
            )))
        }
    }
}

fn check_j(n: usize, j: usize) -> Result<()> {
    if j == 0 || j >= n {
        return Err(Error::InvalidParameter(format!(
            "observable index {j} outside 1..{}",
            n.saturating_sub(1)
        )));
    }
    Ok(())
}

/// Numbers of initialization (E0), single-qubit or idle (E1) and two-qubit
/// (E2) error locations at which an X error flips the observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorLocationCount {
    pub e0: u32,
    pub e1: u32,
    pub e2: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "j", rename_all = "snake_case")]
pub enum GhzObservable {
    /// `Z_{j-1} Z_j` along the chain.
    Local(usize),
    /// `Z_0 Z_j` along the chain.
    Nonlocal(usize),
}

/// `(1-2 p2)^E2 (1-2 p1)^E1 (1-2 p0)^E0`.
pub fn ghz_model(p0: f64, p1: f64, p2: f64, e: ErrorLocationCount) -> Result<f64> {
    for p in [p0, p1, p2] {
        if !(0.0..=0.5).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(format!("{p} outside [0, 1/2]")));
        }
    }
    Ok((1.0 - 2.0 * p2).powi(e.e2 as i32) * (1.0 - 2.0 * p1).powi(e.e1 as i32) * (1.0 - 2.0 * p0).powi(e.e0 as i32))
}

/// Error locations for a GHZ chain of `n` qubits prepared by a Hadamard on
/// the head and a sequential CNOT cascade, with one idle location per qubit
/// per CNOT step after the qubit's first gate.
///
/// Local: E0 = 1, E2 = 3 (2 when j = n-1), E1 = 2(n-j) - E2.
/// Nonlocal: E0 = j, E2 = j + 2, E1 = 2(n-1) - E2, except at j = n-1 where
/// the last qubit has no later CNOT and E2 = n.
pub fn ghz_locations(n: usize, obs: GhzObservable) -> Result<ErrorLocationCount> {
    let (j, local) = match obs {
        GhzObservable::Local(j) => (j, true),
        GhzObservable::Nonlocal(j) => (j, false),
    };
    check_j(n, j)?;
    let last = j == n - 1;
    let (e0, e2, total) = if local {
        (1, if last { 2 } else { 3 }, 2 * (n - j))
    } else {
        (j, if last { j + 1 } else { j + 2 }, 2 * (n - 1))
    };
    Ok(ErrorLocationCount {
        e0: e0 as u32,
        e1: (total - e2) as u32,
        e2: e2 as u32,
    })
}

/// Per-qubit expectation values keyed by `(qubit, basis)`.
pub type ExpectationTable = BTreeMap<(usize, Pauli), f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Exact,
    Tn,
    ExperimentRaw,
    ExperimentMitigated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationRecord {
    pub step: usize,
    pub m: [f64; 3],
    pub source: Source,
    /// A component lies outside [-1, 1].
    pub unphysical: bool,
}

/// `(Σ<X>, Σ<Y>, Σ<Z>) / N` over `qubits`.
pub fn magnetization(table: &ExpectationTable, qubits: &[usize]) -> Result<[f64; 3]> {
    if qubits.is_empty() {
        return Err(Error::UndefinedMetric("magnetization of zero qubits"));
    }
    let mut m = [0.0; 3];
    for &q in qubits {
        for (k, b) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            m[k] += table
                .get(&(q, b))
                .ok_or_else(|| Error::InvalidParameter(format!("missing <{b}> for qubit {q}")))?;
        }
    }
    let n = qubits.len() as f64;
    Ok(m.map(|x| x / n))
}

pub fn record(step: usize, m: [f64; 3], source: Source) -> MagnetizationRecord {
    MagnetizationRecord {
        step,
        m,
        source,
        unphysical: m.iter().any(|x| x.abs() > 1.0),
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// `|m_ideal - m_method| / |m_ideal|`.
pub fn d_avg(m_ideal: [f64; 3], m_method: [f64; 3]) -> Result<f64> {
    let n = norm3(m_ideal);
    if n == 0.0 {
        return Err(Error::UndefinedMetric("d_avg with zero ideal magnetization"));
    }
    Ok(norm3([
        m_ideal[0] - m_method[0],
        m_ideal[1] - m_method[1],
        m_ideal[2] - m_method[2],
    ]) / n)
}

/// Relative error of an adjacency-averaged `<ZZ>`.
pub fn e_avg_zz(zz_ideal: f64, zz_method: f64) -> Result<f64> {
    if zz_ideal == 0.0 {
        return Err(Error::UndefinedMetric("e_avg with zero ideal <ZZ>"));
    }
    Ok((zz_ideal - zz_method).abs() / zz_ideal.abs())
}

pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::UndefinedMetric("mean of nothing"));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

//! Noise channels, Pauli transfer matrices and the composite noise model
//! attached to circuit gates.
//!
//! Every gate is followed by its noise: the gate-class Pauli channel, then
//! amplitude damping and pure dephasing for the (stretched) duration, then,
//! on delays, the coherent ZZ crosstalk with coupled neighbors. Rates are
//! multiplied by `c * lambda_scale`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{rzz_matrix, Gate, GateKind};
use crate::error::{Error, Result};
use crate::math::{c, CMatrix};
use crate::pauli::{cnot_conjugate, Pauli, PauliString};

const PROB_TOL: f64 = 1e-12;

/// Probabilities of a Pauli channel on `n` qubits, indexed by
/// `PauliString::index`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliChannel {
    n: usize,
    probs: Vec<f64>,
}

impl PauliChannel {
    pub fn new(n: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != 1 << (2 * n) {
            return Err(Error::LengthMismatch {
                expected: 1 << (2 * n),
                found: probs.len(),
            });
        }
        if probs.iter().any(|&p| !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p)) {
            return Err(Error::ProbabilityOutOfRange(format!("{probs:?}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::ProbabilityOutOfRange(format!("probabilities sum to {total}")));
        }
        Ok(Self { n, probs })
    }

    pub fn identity(n: usize) -> Self {
        let mut probs = vec![0.0; 1 << (2 * n)];
        probs[0] = 1.0;
        Self { n, probs }
    }

    /// Uniform depolarizing: probability `p` spread over the non-identity
    /// Paulis.
    pub fn depolarizing(n: usize, p: f64) -> Result<Self> {
        let m = (1 << (2 * n)) - 1;
        let mut probs = vec![p / m as f64; m + 1];
        probs[0] = 1.0 - p;
        Self::new(n, probs)
    }

    /// Independent X errors with probability `p` on each of `n` qubits.
    pub fn bit_flip(n: usize, p: f64) -> Result<Self> {
        Self::product_single(n, Pauli::X, p)
    }

    fn product_single(n: usize, pauli: Pauli, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::ProbabilityOutOfRange(format!("{p}")));
        }
        let mut probs = vec![0.0; 1 << (2 * n)];
        for mask in 0..(1usize << n) {
            let s = PauliString(
                (0..n)
                    .map(|q| if mask >> q & 1 == 1 { pauli } else { Pauli::I })
                    .collect(),
            );
            let k = mask.count_ones() as i32;
            probs[s.index()] = p.powi(k) * (1.0 - p).powi(n as i32 - k);
        }
        Self::new(n, probs)
    }

    /// Probability `p` of `Z`.
    pub fn dephasing(p: f64) -> Result<Self> {
        Self::product_single(1, Pauli::Z, p)
    }

    pub fn from_map(n: usize, entries: &[(PauliString, f64)]) -> Result<Self> {
        let mut probs = vec![0.0; 1 << (2 * n)];
        for (s, p) in entries {
            if s.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
            probs[s.index()] += p;
        }
        let rest: f64 = probs[1..].iter().sum();
        probs[0] += 1.0 - rest - probs[0];
        Self::new(n, probs)
    }

    /// Pauli channel with the given PTM eigenvalues, via the inverse
    /// Walsh-Hadamard transform. Fails if any probability is negative.
    pub fn from_eigenvalues(n: usize, mu: &[f64]) -> Result<Self> {
        let size = 1 << (2 * n);
        if mu.len() != size {
            return Err(Error::LengthMismatch {
                expected: size,
                found: mu.len(),
            });
        }
        let strings: Vec<PauliString> = (0..size).map(|i| PauliString::from_index(i, n)).collect();
        let mut probs = vec![0.0; size];
        for (b, pb) in probs.iter_mut().enumerate() {
            *pb = (0..size).map(|a| sign(&strings[a], &strings[b]) * mu[a]).sum::<f64>() / size as f64;
        }
        if let Some(p) = probs.iter().find(|&&p| p < -1e-10) {
            return Err(Error::NotTwirlable(format!("negative probability {p}")));
        }
        for p in &mut probs {
            *p = p.max(0.0);
        }
        Self::new(n, probs)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, s: &PauliString) -> f64 {
        self.probs[s.index()]
    }

    /// PTM diagonal `mu_a = Σ_b p_b (±1)`, + when `P_a` and `P_b` commute.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let size = self.probs.len();
        let strings: Vec<PauliString> = (0..size).map(|i| PauliString::from_index(i, self.n)).collect();
        (0..size)
            .map(|a| (0..size).map(|b| sign(&strings[a], &strings[b]) * self.probs[b]).sum())
            .collect()
    }

    /// Scales every non-identity probability by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let mut probs: Vec<f64> = self.probs.iter().map(|p| p * s).collect();
        let rest: f64 = probs[1..].iter().sum();
        if probs.iter().skip(1).any(|&p| p > 1.0) || rest > 1.0 + PROB_TOL {
            return Err(Error::ProbabilityOutOfRange(format!(
                "scaling by {s} pushes the error probability to {rest}"
            )));
        }
        probs[0] = 1.0 - rest;
        Self::new(self.n, probs)
    }

    pub fn is_identity(&self) -> bool {
        self.probs[0] >= 1.0 - 1e-15
    }
}

fn sign(a: &PauliString, b: &PauliString) -> f64 {
    if a.commutes_with(b) {
        1.0
    } else {
        -1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Channel {
    Kraus { qubits: usize, ops: Vec<CMatrix> },
    Pauli(PauliChannel),
}

impl Channel {
    pub fn kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let dim = ops.first().map_or(1, |k| k.rows());
        let qubits = dim.trailing_zeros() as usize;
        if ops.is_empty() || dim != 1 << qubits || ops.iter().any(|k| k.rows() != dim || k.cols() != dim) {
            return Err(Error::InvalidParameter(
                "Kraus operators must be square of size 2^n".into(),
            ));
        }
        let sum = ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc.add(&k.adjoint().mul(k)));
        let defect = sum.sub(&CMatrix::identity(dim)).max_abs();
        if defect > 1e-10 {
            return Err(Error::InvalidParameter(format!("Kraus set incomplete by {defect}")));
        }
        Ok(Channel::Kraus { qubits, ops })
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::kraus(vec![u])
    }

    pub fn identity(n: usize) -> Self {
        Channel::Pauli(PauliChannel::identity(n))
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::ProbabilityOutOfRange(format!("damping {gamma}")));
        }
        let k0 = CMatrix::from_vec(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - gamma).sqrt(), 0.0)],
        );
        let k1 = CMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(gamma.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        Ok(Channel::Kraus {
            qubits: 1,
            ops: vec![k0, k1],
        })
    }

    pub fn qubits(&self) -> usize {
        match self {
            Channel::Kraus { qubits, .. } => *qubits,
            Channel::Pauli(p) => p.qubits(),
        }
    }

    pub fn kraus_ops(&self) -> Vec<CMatrix> {
        match self {
            Channel::Kraus { ops, .. } => ops.clone(),
            Channel::Pauli(p) => p
                .probs()
                .iter()
                .enumerate()
                .filter(|(_, &pr)| pr > 0.0)
                .map(|(i, &pr)| PauliString::from_index(i, p.qubits()).matrix().scale(c(pr.sqrt(), 0.0)))
                .collect(),
        }
    }

    /// `Σ K m K†` on a dense matrix of matching dimension.
    pub fn apply(&self, m: &CMatrix) -> CMatrix {
        let dim = 1 << self.qubits();
        self.kraus_ops()
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc.add(&k.mul(m).mul(&k.adjoint())))
    }

    /// Sequential composition: `self` first, then `next`.
    pub fn then(&self, next: &Channel) -> Result<Channel> {
        if let (Channel::Pauli(a), Channel::Pauli(b)) = (self, next) {
            let mu: Vec<f64> = a
                .eigenvalues()
                .iter()
                .zip(b.eigenvalues())
                .map(|(x, y)| x * y)
                .collect();
            return PauliChannel::from_eigenvalues(a.qubits(), &mu).map(Channel::Pauli);
        }
        let mut ops = Vec::new();
        for k2 in next.kraus_ops() {
            for k1 in self.kraus_ops() {
                ops.push(k2.mul(&k1));
            }
        }
        Channel::kraus(ops)
    }
}

/// Pauli transfer matrix `R[a][b] = tr(P_a Λ(P_b)) / 2^n`, Paulis in the
/// order I < X < Y < Z with the first qubit most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Ptm {
    n: usize,
    data: Vec<f64>,
}

impl Ptm {
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        let size = 1 << (2 * n);
        if data.len() != size * size {
            return Err(Error::LengthMismatch {
                expected: size * size,
                found: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn identity(n: usize) -> Self {
        let size = 1 << (2 * n);
        let mut data = vec![0.0; size * size];
        for i in 0..size {
            data[i * size + i] = 1.0;
        }
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        1 << (2 * self.n)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.size() + b]
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.size()).map(|i| self.get(i, i)).collect()
    }

    pub fn from_diagonal(n: usize, diag: &[f64]) -> Self {
        let mut p = Self::identity(n);
        let size = p.size();
        for (i, &d) in diag.iter().enumerate() {
            p.data[i * size + i] = d;
        }
        p
    }

    /// Matrix product; as channels, `other` acts first.
    pub fn compose(&self, other: &Ptm) -> Ptm {
        let s = self.size();
        let mut data = vec![0.0; s * s];
        for i in 0..s {
            for k in 0..s {
                let a = self.data[i * s + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..s {
                    data[i * s + j] += a * other.data[k * s + j];
                }
            }
        }
        Ptm { n: self.n, data }
    }

    pub fn max_abs_diff(&self, other: &Ptm) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Dense PTM of a channel on at most two qubits.
pub fn to_ptm(channel: &Channel) -> Result<Ptm> {
    let n = channel.qubits();
    if n > 2 {
        return Err(Error::TooManyQubits { qubits: n, limit: 2 });
    }
    if let Channel::Pauli(p) = channel {
        return Ok(Ptm::from_diagonal(n, &p.eigenvalues()));
    }
    let size = 1 << (2 * n);
    let paulis: Vec<CMatrix> = (0..size).map(|i| PauliString::from_index(i, n).matrix()).collect();
    let norm = (1 << n) as f64;
    let mut data = vec![0.0; size * size];
    for b in 0..size {
        let out = channel.apply(&paulis[b]);
        for a in 0..size {
            data[a * size + b] = paulis[a].mul(&out).trace().re / norm;
        }
    }
    Ptm::from_rows(n, data)
}

/// The Pauli channel keeping the diagonal of the PTM, which is what
/// averaging conjugation by every Pauli produces.
pub fn pauli_twirl_channel(channel: &Channel) -> Result<PauliChannel> {
    let ptm = to_ptm(channel)?;
    PauliChannel::from_eigenvalues(ptm.qubits(), &ptm.diagonal())
}

/// Conjugation of a Pauli string through CNOT(0, 1), as an index map.
fn cnot_index_map() -> [usize; 16] {
    let mut map = [0usize; 16];
    for (i, slot) in map.iter_mut().enumerate() {
        let s = PauliString::from_index(i, 2);
        let (a, b) = cnot_conjugate(s.0[0], s.0[1]);
        *slot = PauliString(vec![a, b]).index();
    }
    map
}

/// Signed PTM of the ideal CNOT(0, 1).
pub fn cnot_ptm() -> Ptm {
    to_ptm(&Channel::unitary(crate::pauli::cnot_matrix()).expect("unitary")).expect("two qubits")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisePlacement {
    /// The Pauli channel acts just before each CNOT.
    Before,
    /// The Pauli channel acts just after each CNOT.
    After,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InsertionAudit {
    pub k: usize,
    pub labels: Vec<String>,
    /// Effective Pauli eigenvalues of `2k+1` noisy CNOTs relative to one
    /// ideal CNOT.
    pub actual: Vec<f64>,
    /// `mu^(2k+1)`: the noise a single CNOT would carry if the channel were
    /// amplified uniformly.
    pub desired: Vec<f64>,
}

impl InsertionAudit {
    pub fn max_deviation(&self) -> f64 {
        self.actual
            .iter()
            .zip(&self.desired)
            .map(|(a, d)| (a - d).abs())
            .fold(0.0, f64::max)
    }
}

/// Replaces one noisy CNOT by `2k+1` of them and reports the effective
/// noise seen at the position of the single gate.
pub fn identity_insertion_map(channel: &PauliChannel, k: usize, placement: NoisePlacement) -> Result<InsertionAudit> {
    if channel.qubits() != 2 {
        return Err(Error::InvalidParameter(
            "identity insertion needs a 2-qubit Pauli channel".into(),
        ));
    }
    let mu = channel.eigenvalues();
    let noise = Ptm::from_diagonal(2, &mu);
    let cx = cnot_ptm();
    let noisy = match placement {
        NoisePlacement::Before => cx.compose(&noise),
        NoisePlacement::After => noise.compose(&cx),
    };
    let mut total = Ptm::identity(2);
    for _ in 0..(2 * k + 1) {
        total = noisy.compose(&total);
    }
    // CNOT is its own inverse, so strip one ideal CNOT from the product.
    let effective = match placement {
        NoisePlacement::Before => cx.compose(&total),
        NoisePlacement::After => total.compose(&cx),
    };
    let map = cnot_index_map();
    debug_assert!((0..16).all(|i| map[map[i]] == i));
    Ok(InsertionAudit {
        k,
        labels: (0..16)
            .map(|i| PauliString::from_index(i, 2).to_string_compact())
            .collect(),
        actual: effective.diagonal(),
        desired: mu.iter().map(|m| m.powi(2 * k as i32 + 1)).collect(),
    })
}

/// Per-qubit readout confusion: `m[reported][true]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion(pub [[f64; 2]; 2]);

impl Confusion {
    pub fn identity() -> Self {
        Confusion([[1.0, 0.0], [0.0, 1.0]])
    }

    /// `p01` = P(read 1 | prepared 0), `p10` = P(read 0 | prepared 1).
    pub fn from_flips(p01: f64, p10: f64) -> Self {
        Confusion([[1.0 - p01, p10], [p01, 1.0 - p10]])
    }

    pub fn is_stochastic(&self) -> bool {
        let m = &self.0;
        m.iter().flatten().all(|x| (0.0..=1.0).contains(x))
            && (m[0][0] + m[1][0] - 1.0).abs() < PROB_TOL
            && (m[0][1] + m[1][1] - 1.0).abs() < PROB_TOL
    }

    pub fn inverse(&self) -> Option<[[f64; 2]; 2]> {
        let m = &self.0;
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-12 {
            return None;
        }
        Some([[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]])
    }
}

/// Applies a 2x2 matrix to bit `q` of a distribution indexed by bitstring
/// (bit `q` of the index is qubit `q`).
pub fn apply_on_bit(probs: &mut [f64], q: usize, m: &[[f64; 2]; 2]) {
    let stride = 1usize << q;
    for base in 0..probs.len() {
        if base & stride != 0 {
            continue;
        }
        let p0 = probs[base];
        let p1 = probs[base | stride];
        probs[base] = m[0][0] * p0 + m[0][1] * p1;
        probs[base | stride] = m[1][0] * p0 + m[1][1] * p1;
    }
}

/// `(⊗ A_q) p` without forming the full matrix.
pub fn apply_readout_confusion(probs: &[f64], confusion: &[Confusion]) -> Result<Vec<f64>> {
    if probs.len() != 1 << confusion.len() {
        return Err(Error::LengthMismatch {
            expected: 1 << confusion.len(),
            found: probs.len(),
        });
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::ProbabilityOutOfRange(format!("distribution sums to {total}")));
    }
    let mut out = probs.to_vec();
    for (q, a) in confusion.iter().enumerate() {
        if !a.is_stochastic() {
            return Err(Error::NonStochastic(q));
        }
        apply_on_bit(&mut out, q, &a.0);
    }
    Ok(out)
}

/// How a gate class's Pauli error rate is specified.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PauliErrorSpec {
    #[default]
    None,
    Depolarizing {
        p: f64,
    },
    /// Independent X flips on every qubit of the gate.
    BitFlip {
        p: f64,
    },
    /// Explicit Pauli-string probabilities; identity takes the remainder.
    Map {
        entries: Vec<(String, f64)>,
    },
}

impl PauliErrorSpec {
    /// The channel at scale `s = c * lambda_scale`.
    pub fn channel(&self, n: usize, s: f64) -> Result<Option<PauliChannel>> {
        let ch = match self {
            PauliErrorSpec::None => return Ok(None),
            PauliErrorSpec::Depolarizing { p } => PauliChannel::depolarizing(n, check_rate(p * s)?)?,
            PauliErrorSpec::BitFlip { p } => PauliChannel::bit_flip(n, check_rate(p * s)?)?,
            PauliErrorSpec::Map { entries } => {
                let parsed = entries
                    .iter()
                    .map(|(l, p)| PauliString::parse(l).map(|ps| (ps, *p)))
                    .collect::<Result<Vec<_>>>()?;
                PauliChannel::from_map(n, &parsed)?.scaled(s)?
            }
        };
        Ok(if ch.is_identity() { None } else { Some(ch) })
    }
}

fn check_rate(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::ProbabilityOutOfRange(format!("scaled error rate {p}")))
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GateErrors {
    #[serde(default)]
    pub single: PauliErrorSpec,
    #[serde(default)]
    pub cnot: PauliErrorSpec,
    #[serde(default)]
    pub rzz: PauliErrorSpec,
    #[serde(default)]
    pub idle: PauliErrorSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZzCoupling {
    pub a: usize,
    pub b: usize,
    /// Angular rate in rad/ns.
    pub rate: f64,
}

/// Noise parameters. Times are in nanoseconds; an infinite `t1` disables
/// damping and an infinite `t2` disables pure dephasing.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub t1: Vec<f64>,
    pub t2: Vec<f64>,
    pub gate_error: GateErrors,
    pub zz_crosstalk: Vec<ZzCoupling>,
    pub readout: Vec<Confusion>,
    /// Probability of an X error on every qubit before the circuit.
    pub prep_error: f64,
    pub lambda_scale: f64,
}

impl NoiseModel {
    pub fn ideal(n: usize) -> Self {
        Self {
            t1: vec![f64::INFINITY; n],
            t2: vec![f64::INFINITY; n],
            gate_error: GateErrors::default(),
            zz_crosstalk: Vec::new(),
            readout: vec![Confusion::identity(); n],
            prep_error: 0.0,
            lambda_scale: 1.0,
        }
    }

    pub fn qubits(&self) -> usize {
        self.t1.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.t1.len();
        for (name, len) in [("t2", self.t2.len()), ("readout", self.readout.len())] {
            if len != n {
                return Err(Error::InvalidParameter(format!(
                    "{name} has {len} entries for {n} qubits"
                )));
            }
        }
        for q in 0..n {
            let (t1, t2) = (self.t1[q], self.t2[q]);
            if !(t1 > 0.0) || !(t2 > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q}: coherence times must be positive"
                )));
            }
            if t2.is_finite() && t2 > 2.0 * t1 * (1.0 + 1e-12) {
                return Err(Error::InvalidParameter(format!(
                    "qubit {q}: T2 = {t2} exceeds 2 T1 = {}",
                    2.0 * t1
                )));
            }
            if !self.readout[q].is_stochastic() {
                return Err(Error::NonStochastic(q));
            }
        }
        for z in &self.zz_crosstalk {
            if z.a >= n || z.b >= n || z.a == z.b {
                return Err(Error::InvalidParameter(format!("crosstalk pair {}-{}", z.a, z.b)));
            }
        }
        if !(0.0..=0.5).contains(&self.prep_error) {
            return Err(Error::ProbabilityOutOfRange(format!("prep error {}", self.prep_error)));
        }
        if !(self.lambda_scale >= 0.0) {
            return Err(Error::InvalidParameter("lambda_scale must be non-negative".into()));
        }
        Ok(())
    }

    /// Pure dephasing rate `1/T_phi = 1/T2 - 1/(2 T1)`.
    pub fn dephasing_rate(&self, q: usize) -> f64 {
        if self.t2[q].is_infinite() {
            return 0.0;
        }
        (1.0 / self.t2[q] - 0.5 / self.t1[q]).max(0.0)
    }
}

/// A channel acting on specific circuit qubits, listed most significant
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct LocatedChannel {
    pub qubits: Vec<usize>,
    pub channel: Channel,
}

/// Damping followed by dephasing for `time` (already stretched) on one
/// qubit, or `None` when both are off.
pub fn decoherence(model: &NoiseModel, q: usize, time: f64) -> Result<Option<Channel>> {
    let s = model.lambda_scale;
    let gamma = if model.t1[q].is_finite() {
        1.0 - (-time * s / model.t1[q]).exp()
    } else {
        0.0
    };
    let p_phi = 0.5 * (1.0 - (-time * s * model.dephasing_rate(q)).exp());
    match (gamma > 0.0, p_phi > 0.0) {
        (false, false) => Ok(None),
        (true, false) => Ok(Some(Channel::amplitude_damping(gamma)?)),
        (false, true) => Ok(Some(Channel::Pauli(PauliChannel::dephasing(p_phi)?))),
        (true, true) => Ok(Some(
            Channel::amplitude_damping(gamma)?.then(&Channel::Pauli(PauliChannel::dephasing(p_phi)?))?,
        )),
    }
}

/// The noise attached after `gate` at stretch factor `c`, in order of
/// application.
pub fn channel_for_gate(model: &NoiseModel, gate: &Gate, c: f64) -> Result<Vec<LocatedChannel>> {
    if !(c >= 1.0) {
        return Err(Error::InvalidParameter(format!("stretch factor {c} must be >= 1")));
    }
    let mut out = Vec::new();
    let time = gate.duration * if gate.stretchable { c } else { 1.0 };
    let spec = match gate.kind {
        GateKind::Measure { .. } | GateKind::Rz { .. } => return Ok(out),
        _ if gate.duration == 0.0 => return Ok(out),
        GateKind::Rx { .. } | GateKind::U { .. } => &model.gate_error.single,
        GateKind::Cnot => &model.gate_error.cnot,
        GateKind::Rzz { .. } => &model.gate_error.rzz,
        GateKind::Delay => &model.gate_error.idle,
    };
    let scale = if gate.stretchable { c } else { 1.0 } * model.lambda_scale;
    if let Some(p) = spec.channel(gate.qubits.len(), scale)? {
        out.push(LocatedChannel {
            qubits: gate.qubits.clone(),
            channel: Channel::Pauli(p),
        });
    }
    for &q in &gate.qubits {
        if let Some(ch) = decoherence(model, q, time)? {
            out.push(LocatedChannel {
                qubits: vec![q],
                channel: ch,
            });
        }
    }
    if gate.kind == GateKind::Delay {
        let q = gate.qubits[0];
        for z in &model.zz_crosstalk {
            if (z.a == q || z.b == q) && z.rate != 0.0 {
                let angle = z.rate * time * model.lambda_scale;
                out.push(LocatedChannel {
                    qubits: vec![z.a, z.b],
                    channel: Channel::Kraus {
                        qubits: 2,
                        ops: vec![rzz_matrix(angle)],
                    },
                });
            }
        }
    }
    Ok(out)
}

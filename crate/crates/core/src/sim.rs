//! Circuit execution: noiseless statevectors, noisy density matrices and
//! Monte Carlo trajectories, plus measurement counts.
//!
//! Basis-state index bit `q` is qubit `q`. A density matrix of `n` qubits
//! is stored as a vector over `2n` bits, `index = row << n | col`, so a
//! channel on qubit `q` is a 4x4 superoperator on bits `(q + n, q)`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::math::{c, CMatrix, C64, ZERO};
use crate::noise::{channel_for_gate, Channel, Confusion, LocatedChannel, NoiseModel, PauliChannel};
use crate::pauli::{Pauli, PauliString};
use crate::rng::{derive_seed, rng_from};

pub const EXACT_QUBIT_LIMIT: usize = 24;
pub const DENSITY_QUBIT_LIMIT: usize = 10;

/// A linear map on `k <= 4` index bits, stored as its nonzero entries.
/// `bits` lists target bit positions with the most significant local bit
/// first.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOp {
    bits: Vec<usize>,
    entries: Vec<(u8, u8, C64)>,
}

impl SparseOp {
    pub fn from_dense(bits: Vec<usize>, m: &CMatrix) -> Self {
        let dim = 1usize << bits.len();
        debug_assert_eq!(m.rows(), dim);
        let mut entries = Vec::new();
        for i in 0..dim {
            for j in 0..dim {
                let v = m[(i, j)];
                if v != ZERO {
                    entries.push((i as u8, j as u8, v));
                }
            }
        }
        Self { bits, entries }
    }

    pub fn nonzeros(&self) -> usize {
        self.entries.len()
    }

    pub fn apply(&self, data: &mut [C64]) {
        let k = self.bits.len();
        let dim = 1usize << k;
        let mut offsets = [0usize; 16];
        for (l, off) in offsets.iter_mut().enumerate().take(dim) {
            for (i, &b) in self.bits.iter().enumerate() {
                if l >> (k - 1 - i) & 1 == 1 {
                    *off |= 1 << b;
                }
            }
        }
        let mut sorted = self.bits.clone();
        sorted.sort_unstable();
        let mut input = [ZERO; 16];
        let mut output = [ZERO; 16];
        for j in 0..(data.len() >> k) {
            let mut base = j;
            for &b in &sorted {
                base = ((base >> b) << (b + 1)) | (base & ((1 << b) - 1));
            }
            for l in 0..dim {
                input[l] = data[base + offsets[l]];
                output[l] = ZERO;
            }
            for &(o, i, v) in &self.entries {
                output[o as usize] += v * input[i as usize];
            }
            for l in 0..dim {
                data[base + offsets[l]] = output[l];
            }
        }
    }
}

/// Apply a Pauli string to a state vector: `P|x> = i^{nY} (-1)^{|x & z|} |x ^ xmask>`.
fn pauli_masks(p: &PauliString) -> (usize, usize, usize) {
    let (mut x, mut z, mut ny) = (0usize, 0usize, 0usize);
    for (q, s) in p.0.iter().enumerate() {
        match s {
            Pauli::I => {}
            Pauli::X => x |= 1 << q,
            Pauli::Y => {
                x |= 1 << q;
                z |= 1 << q;
                ny += 1;
            }
            Pauli::Z => z |= 1 << q,
        }
    }
    (x, z, ny)
}

fn i_pow(k: usize) -> C64 {
    [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][k % 4]
}

#[inline]
fn parity(x: usize) -> f64 {
    if x.count_ones() & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n: usize,
    amps: Vec<C64>,
}

impl Statevector {
    pub fn zero(n: usize) -> Result<Self> {
        if n > EXACT_QUBIT_LIMIT {
            return Err(Error::TooManyQubits {
                qubits: n,
                limit: EXACT_QUBIT_LIMIT,
            });
        }
        let mut amps = vec![ZERO; 1 << n];
        amps[0] = c(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn from_amplitudes(n: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != 1 << n {
            return Err(Error::LengthMismatch {
                expected: 1 << n,
                found: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let s = 1.0 / self.norm_sqr().sqrt();
        self.amps.iter_mut().for_each(|a| *a *= s);
    }

    pub fn apply_unitary(&mut self, qubits: &[usize], u: &CMatrix) {
        SparseOp::from_dense(qubits.to_vec(), u).apply(&mut self.amps);
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        if let Some(u) = g.unitary() {
            self.apply_unitary(&g.qubits, &u);
        }
    }

    pub fn apply_pauli(&mut self, p: &PauliString) {
        let (x, z, ny) = pauli_masks(p);
        let ph = i_pow(ny);
        let old = self.amps.clone();
        for (idx, a) in old.iter().enumerate() {
            self.amps[idx ^ x] = ph * parity(idx & z) * a;
        }
    }

    pub fn inner(&self, other: &Statevector) -> C64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Statevector) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_len(p, self.n)?;
        let (x, z, ny) = pauli_masks(p);
        let ph = i_pow(ny);
        let v: C64 = self
            .amps
            .iter()
            .enumerate()
            .map(|(idx, a)| self.amps[idx ^ x].conj() * ph * parity(idx & z) * a)
            .sum();
        Ok(v.re)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

fn check_len(p: &PauliString, n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: p.len(),
        });
    }
    Ok(())
}

/// Noiseless evolution of |0...0> in moment order.
pub fn evolve_exact(circuit: &Circuit) -> Result<Statevector> {
    let mut psi = Statevector::zero(circuit.qubit_count)?;
    for g in circuit.gates() {
        psi.apply_gate(g);
    }
    Ok(psi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero(n: usize) -> Result<Self> {
        if n > DENSITY_QUBIT_LIMIT {
            return Err(Error::TooManyQubits {
                qubits: n,
                limit: DENSITY_QUBIT_LIMIT,
            });
        }
        let mut data = vec![ZERO; 1 << (2 * n)];
        data[0] = c(1.0, 0.0);
        Ok(Self { n, data })
    }

    pub fn from_pure(psi: &Statevector) -> Result<Self> {
        let mut rho = Self::zero(psi.n)?;
        let dim = 1 << psi.n;
        for r in 0..dim {
            for col in 0..dim {
                rho.data[r * dim + col] = psi.amps[r] * psi.amps[col].conj();
            }
        }
        Ok(rho)
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        let mut rho = Self::zero(n)?;
        let dim = 1 << n;
        rho.data[0] = ZERO;
        for r in 0..dim {
            rho.data[r * dim + r] = c(1.0 / dim as f64, 0.0);
        }
        Ok(rho)
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.data[r * self.dim() + col]
    }

    pub fn to_matrix(&self) -> CMatrix {
        CMatrix::from_vec(self.dim(), self.dim(), self.data.clone())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim()).map(|r| self.get(r, r)).sum()
    }

    pub fn purity(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for col in 0..d {
                worst = worst.max((self.get(r, col) - self.get(col, r).conj()).norm());
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|r| self.get(r, r).re).collect()
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_pure(&self, psi: &Statevector) -> f64 {
        let d = self.dim();
        let mut acc = ZERO;
        for r in 0..d {
            let a = psi.amps[r].conj();
            if a == ZERO {
                continue;
            }
            for col in 0..d {
                acc += a * self.data[r * d + col] * psi.amps[col];
            }
        }
        acc.re
    }

    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        check_len(p, self.n)?;
        let (x, z, ny) = pauli_masks(p);
        let ph = i_pow(ny);
        let d = self.dim();
        let v: C64 = (0..d).map(|r| self.data[r * d + (r ^ x)] * ph * parity(r & z)).sum();
        Ok(v.re)
    }

    pub fn apply_superop(&mut self, op: &SparseOp) {
        op.apply(&mut self.data);
    }

    /// Continues noisy evolution through `circuit` at stretch factor `c`,
    /// calling `at_barrier(k, state)` when the `k`-th barrier is reached.
    pub fn run(
        &mut self,
        circuit: &Circuit,
        model: &NoiseModel,
        c: f64,
        mut at_barrier: impl FnMut(usize, &DensityMatrix) -> Result<()>,
    ) -> Result<()> {
        if circuit.qubit_count != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: circuit.qubit_count,
            });
        }
        let mut barrier = 0;
        for m in &circuit.moments {
            if m.barrier {
                at_barrier(barrier, self)?;
                barrier += 1;
            }
            for g in &m.gates {
                for op in compile_density_gate(self.n, g, model, c)? {
                    op.apply(&mut self.data);
                }
            }
        }
        Ok(())
    }
}

/// `Σ K ⊗ conj(K)`, row index `(r, c)` with `r` most significant.
pub fn superoperator(ops: &[CMatrix]) -> CMatrix {
    let d = ops[0].rows();
    ops.iter()
        .fold(CMatrix::zeros(d * d, d * d), |acc, k| acc.add(&k.kron(&k.conj())))
}

/// Embeds an operator on `sub` into the space of `full` (both lists of
/// qubits, most significant first).
fn embed(op: &CMatrix, sub: &[usize], full: &[usize]) -> CMatrix {
    if sub == full {
        return op.clone();
    }
    let k = full.len();
    let dim = 1usize << k;
    let pos: Vec<usize> = sub
        .iter()
        .map(|q| full.iter().position(|f| f == q).expect("subset"))
        .collect();
    let sub_index = |x: usize| -> (usize, usize) {
        let mut s = 0;
        let mut rest = x;
        for &p in &pos {
            let bit = x >> (k - 1 - p) & 1;
            s = (s << 1) | bit;
            rest &= !(1 << (k - 1 - p));
        }
        (s, rest)
    };
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let (si, ri) = sub_index(i);
        for j in 0..dim {
            let (sj, rj) = sub_index(j);
            if ri == rj {
                out[(i, j)] = op[(si, sj)];
            }
        }
    }
    out
}

fn density_bits(n: usize, qubits: &[usize]) -> Vec<usize> {
    qubits.iter().map(|&q| q + n).chain(qubits.iter().copied()).collect()
}

fn channel_superop(ch: &LocatedChannel, full: &[usize]) -> CMatrix {
    let ops: Vec<CMatrix> = ch
        .channel
        .kraus_ops()
        .iter()
        .map(|k| embed(k, &ch.qubits, full))
        .collect();
    superoperator(&ops)
}

/// The gate's unitary followed by its noise on the gate's qubits, fused
/// into one superoperator, plus separate operators for noise reaching
/// other qubits.
pub fn compile_density_gate(n: usize, g: &Gate, model: &NoiseModel, c: f64) -> Result<Vec<SparseOp>> {
    let noise = channel_for_gate(model, g, c)?;
    let u = g.unitary();
    if u.is_none() && noise.is_empty() {
        return Ok(Vec::new());
    }
    let dim = 1usize << g.qubits.len();
    let mut s = superoperator(&[u.unwrap_or_else(|| CMatrix::identity(dim))]);
    let mut extra = Vec::new();
    for ch in &noise {
        if ch.qubits.iter().all(|q| g.qubits.contains(q)) {
            s = channel_superop(ch, &g.qubits).mul(&s);
        } else {
            let sup = superoperator(&ch.channel.kraus_ops());
            extra.push(SparseOp::from_dense(density_bits(n, &ch.qubits), &sup));
        }
    }
    let mut out = vec![SparseOp::from_dense(density_bits(n, &g.qubits), &s)];
    out.extend(extra);
    Ok(out)
}

fn prep_channel(model: &NoiseModel) -> Result<Option<PauliChannel>> {
    if model.prep_error > 0.0 {
        Ok(Some(PauliChannel::bit_flip(1, model.prep_error)?))
    } else {
        Ok(None)
    }
}

/// Noisy evolution from |0...0>, including preparation errors.
pub fn evolve_density(circuit: &Circuit, model: &NoiseModel, c: f64) -> Result<DensityMatrix> {
    evolve_density_snapshots(circuit, model, c, |_, _| Ok(()))
}

pub fn evolve_density_snapshots(
    circuit: &Circuit,
    model: &NoiseModel,
    c: f64,
    at_barrier: impl FnMut(usize, &DensityMatrix) -> Result<()>,
) -> Result<DensityMatrix> {
    let n = circuit.qubit_count;
    check_model(model, n)?;
    let mut rho = DensityMatrix::zero(n)?;
    if let Some(p) = prep_channel(model)? {
        let sup = superoperator(&Channel::Pauli(p).kraus_ops());
        for q in 0..n {
            rho.apply_superop(&SparseOp::from_dense(density_bits(n, &[q]), &sup));
        }
    }
    rho.run(circuit, model, c, at_barrier)?;
    Ok(rho)
}

fn check_model(model: &NoiseModel, n: usize) -> Result<()> {
    if model.qubits() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            found: model.qubits(),
        });
    }
    model.validate()
}

/// Measured outcomes. Bit `i` of an outcome key is the result for
/// `qubits[i]`, measured in `bases[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Counts {
    pub qubits: Vec<usize>,
    pub bases: Vec<Pauli>,
    pub shots: BTreeMap<u64, u64>,
    pub total: u64,
    pub seed: u64,
}

impl Counts {
    pub fn new(qubits: Vec<usize>, bases: Vec<Pauli>, seed: u64) -> Self {
        Self {
            qubits,
            bases,
            shots: BTreeMap::new(),
            total: 0,
            seed,
        }
    }

    pub fn record(&mut self, outcome: u64, k: u64) {
        *self.shots.entry(outcome).or_insert(0) += k;
        self.total += k;
    }

    pub fn merge(&mut self, other: &Counts) {
        for (&o, &k) in &other.shots {
            self.record(o, k);
        }
    }

    /// Bitstring label; character `i` is the outcome of `qubits[i]`.
    pub fn label(&self, outcome: u64) -> alloc::string::String {
        (0..self.qubits.len())
            .map(|i| if outcome >> i & 1 == 1 { '1' } else { '0' })
            .collect()
    }

    /// Empirical distribution over outcome keys.
    pub fn distribution(&self) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::EmptyCounts);
        }
        let mut p = vec![0.0; 1 << self.qubits.len()];
        for (&o, &k) in &self.shots {
            p[o as usize] = k as f64 / self.total as f64;
        }
        Ok(p)
    }

    /// Distribution over the bits at `positions` (indices into `qubits`),
    /// built from the sparse shot table.
    pub fn marginal_distribution(&self, positions: &[usize]) -> Result<Vec<f64>> {
        if self.total == 0 {
            return Err(Error::EmptyCounts);
        }
        let mut p = vec![0.0; 1 << positions.len()];
        for (&o, &k) in &self.shots {
            let key = positions
                .iter()
                .enumerate()
                .fold(0usize, |acc, (i, &b)| acc | ((o as usize >> b & 1) << i));
            p[key] += k as f64 / self.total as f64;
        }
        Ok(p)
    }

    /// Positions within `qubits` of the non-identity factors of `p`, after
    /// checking that they were measured in the matching basis.
    pub fn support(&self, p: &PauliString) -> Result<Vec<usize>> {
        let mut out = Vec::new();
        for (q, &s) in p.0.iter().enumerate() {
            if s == Pauli::I {
                continue;
            }
            let i = self
                .qubits
                .iter()
                .position(|&m| m == q)
                .ok_or_else(|| Error::InvalidParameter(format!("qubit {q} was not measured")))?;
            if self.bases[i] != s {
                return Err(Error::BasisMismatch {
                    qubit: q,
                    measured: self.bases[i].as_char(),
                    requested: s.as_char(),
                });
            }
            out.push(i);
        }
        Ok(out)
    }

    /// Mean of the ±1 eigenvalue of `p` over all shots.
    pub fn expectation(&self, p: &PauliString) -> Result<f64> {
        let support = self.support(p)?;
        if self.total == 0 {
            return Err(Error::EmptyCounts);
        }
        let mask: u64 = support.iter().map(|&i| 1u64 << i).sum();
        let s: i64 = self
            .shots
            .iter()
            .map(|(&o, &k)| {
                if (o & mask).count_ones() % 2 == 0 {
                    k as i64
                } else {
                    -(k as i64)
                }
            })
            .sum();
        Ok(s as f64 / self.total as f64)
    }
}

/// Draws `shots` outcomes from `probs` by inverse-CDF sampling.
pub fn sample_counts(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> BTreeMap<u64, u64> {
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in probs {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut out = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.random::<f64>() * acc;
        let k = cdf.partition_point(|&x| x <= u).min(probs.len() - 1);
        *out.entry(k as u64).or_insert(0) += 1;
    }
    out
}

/// Distribution of the measured qubits (in the given order) from a full
/// computational-basis distribution.
pub fn marginal(probs: &[f64], qubits: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << qubits.len()];
    for (idx, &p) in probs.iter().enumerate() {
        let key = qubits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &q)| acc | ((idx >> q & 1) << i));
        out[key] += p;
    }
    out
}

/// Qubits measured by the circuit, in first-measured order, with bases.
pub fn measured_qubits(circuit: &Circuit) -> (Vec<usize>, Vec<Pauli>) {
    let mut qs = Vec::new();
    let mut bases = Vec::new();
    for g in circuit.gates() {
        if let GateKind::Measure { basis } = g.kind {
            if !qs.contains(&g.qubits[0]) {
                qs.push(g.qubits[0]);
                bases.push(basis);
            }
        }
    }
    (qs, bases)
}

/// One trajectory operation: a unitary or a stochastic channel.
#[derive(Debug, Clone)]
enum TrajOp {
    Unitary(SparseOp),
    Pauli(Vec<(f64, PauliString)>),
    Kraus(Vec<SparseOp>),
}

/// A circuit compiled for repeated trajectory sampling.
#[derive(Debug, Clone)]
pub struct TrajectoryProgram {
    n: usize,
    ops: Vec<TrajOp>,
    prep: Option<f64>,
    measured: Vec<usize>,
    bases: Vec<Pauli>,
    readout: Vec<Confusion>,
}

fn embed_pauli(n: usize, qubits: &[usize], local: &PauliString) -> PauliString {
    let mut s = PauliString::identity(n);
    for (i, &q) in qubits.iter().enumerate() {
        s.0[q] = local.0[i];
    }
    s
}

impl TrajectoryProgram {
    pub fn compile(circuit: &Circuit, model: &NoiseModel, c: f64) -> Result<Self> {
        let n = circuit.qubit_count;
        check_model(model, n)?;
        if n > EXACT_QUBIT_LIMIT {
            return Err(Error::TooManyQubits {
                qubits: n,
                limit: EXACT_QUBIT_LIMIT,
            });
        }
        let mut ops = Vec::new();
        for g in circuit.gates() {
            if let Some(u) = g.unitary() {
                ops.push(TrajOp::Unitary(SparseOp::from_dense(g.qubits.clone(), &u)));
            }
            for ch in channel_for_gate(model, g, c)? {
                ops.push(match &ch.channel {
                    Channel::Pauli(p) => {
                        let mut acc = 0.0;
                        let cdf = p
                            .probs()
                            .iter()
                            .enumerate()
                            .filter(|(_, &pr)| pr > 0.0)
                            .map(|(i, &pr)| {
                                acc += pr;
                                (acc, embed_pauli(n, &ch.qubits, &PauliString::from_index(i, p.qubits())))
                            })
                            .collect();
                        TrajOp::Pauli(cdf)
                    }
                    Channel::Kraus { qubits, ops: ks } => {
                        if *qubits > 2 {
                            return Err(Error::NotUnravelable(*qubits));
                        }
                        if ks.len() == 1 {
                            TrajOp::Unitary(SparseOp::from_dense(ch.qubits.clone(), &ks[0]))
                        } else {
                            TrajOp::Kraus(ks.iter().map(|k| SparseOp::from_dense(ch.qubits.clone(), k)).collect())
                        }
                    }
                });
            }
        }
        let (measured, bases) = measured_qubits(circuit);
        Ok(Self {
            n,
            ops,
            prep: (model.prep_error > 0.0).then_some(model.prep_error),
            readout: measured.iter().map(|&q| model.readout[q]).collect(),
            measured,
            bases,
        })
    }

    /// Final (unmeasured) state of one trajectory.
    pub fn run_state(&self, rng: &mut ChaCha8Rng) -> Statevector {
        let mut psi = Statevector::zero(self.n).expect("checked at compile time");
        if let Some(p) = self.prep {
            let mut flip = 0usize;
            for q in 0..self.n {
                if rng.random::<f64>() < p {
                    flip |= 1 << q;
                }
            }
            psi.amps.swap(0, flip);
        }
        for op in &self.ops {
            match op {
                TrajOp::Unitary(u) => u.apply(&mut psi.amps),
                TrajOp::Pauli(cdf) => {
                    let u: f64 = rng.random::<f64>() * cdf.last().map_or(1.0, |x| x.0);
                    let k = cdf.partition_point(|x| x.0 <= u).min(cdf.len() - 1);
                    if cdf[k].1.weight() > 0 {
                        psi.apply_pauli(&cdf[k].1);
                    }
                }
                TrajOp::Kraus(ops) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut chosen = None;
                    for (i, k) in ops.iter().enumerate() {
                        let mut trial = psi.amps.clone();
                        k.apply(&mut trial);
                        let w: f64 = trial.iter().map(|a| a.norm_sqr()).sum();
                        acc += w;
                        if u < acc || i + 1 == ops.len() {
                            chosen = Some(trial);
                            break;
                        }
                    }
                    psi.amps = chosen.expect("nonempty Kraus set");
                    psi.normalize();
                }
            }
        }
        psi
    }

    /// One shot: evolve, sample a bitstring of the measured qubits, pass it
    /// through the readout confusion.
    pub fn shot(&self, rng: &mut ChaCha8Rng) -> u64 {
        let psi = self.run_state(rng);
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut idx = psi.amps.len() - 1;
        for (i, a) in psi.amps.iter().enumerate() {
            acc += a.norm_sqr();
            if u < acc {
                idx = i;
                break;
            }
        }
        let mut outcome = 0u64;
        for (i, &q) in self.measured.iter().enumerate() {
            let bit = idx >> q & 1;
            let m = &self.readout[i].0;
            let p_one = m[1][bit];
            if rng.random::<f64>() < p_one {
                outcome |= 1 << i;
            }
        }
        outcome
    }

    /// Shots `range` of the run seeded by `seed`; shot `s` uses the stream
    /// `(seed, [s])`, so any partition of the shots merges to the same
    /// counts.
    pub fn sample_range(&self, seed: u64, range: core::ops::Range<u64>) -> Counts {
        let mut counts = Counts::new(self.measured.clone(), self.bases.clone(), seed);
        for s in range {
            let mut rng = rng_from(seed, &[s]);
            counts.record(self.shot(&mut rng), 1);
        }
        counts
    }
}

pub fn evolve_trajectories(circuit: &Circuit, model: &NoiseModel, c: f64, shots: u64, seed: u64) -> Result<Counts> {
    let prog = TrajectoryProgram::compile(circuit, model, c)?;
    Ok(prog.sample_range(seed, 0..shots))
}

/// Counts for the measured qubits of a density matrix whose measurement
/// basis changes have already been applied.
pub fn sample_density(
    rho: &DensityMatrix,
    qubits: &[usize],
    bases: &[Pauli],
    readout: &[Confusion],
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    let mut probs = marginal(&rho.diagonal(), qubits);
    for (i, a) in readout.iter().enumerate() {
        if !a.is_stochastic() {
            return Err(Error::NonStochastic(qubits[i]));
        }
        crate::noise::apply_on_bit(&mut probs, i, &a.0);
    }
    let mut rng = rng_from(derive_seed(seed, &[0x5a4d]), &[]);
    let mut counts = Counts::new(qubits.to_vec(), bases.to_vec(), seed);
    for (o, k) in sample_counts(&probs, shots, &mut rng) {
        counts.record(o, k);
    }
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ghz, build_t1, GateDurations};
    use crate::topology::Topology;

    #[test]
    fn rabi() {
        let mut circ = Circuit::new(1);
        circ.push(vec![Gate::rx(0, 0.7, &GateDurations::default())]);
        let psi = evolve_exact(&circ).unwrap();
        let z = psi.expectation(&PauliString::parse("Z").unwrap()).unwrap();
        assert!((z - 0.7f64.cos()).abs() < 1e-14);
    }

    #[test]
    fn bell_pair() {
        let top = Topology::chain(2);
        let circ = build_ghz(&top, &[0, 1], &GateDurations::default()).unwrap();
        let psi = evolve_exact(&circ).unwrap();
        assert!((psi.expectation(&PauliString::parse("ZZ").unwrap()).unwrap() - 1.0).abs() < 1e-14);
        assert!((psi.expectation(&PauliString::parse("XX").unwrap()).unwrap() - 1.0).abs() < 1e-14);
        assert!(psi.expectation(&PauliString::parse("ZI").unwrap()).unwrap().abs() < 1e-14);
        let rho = evolve_density(&circ, &NoiseModel::ideal(2), 1.0).unwrap();
        assert!((rho.fidelity_pure(&psi) - 1.0).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t1_decay_matches_closed_form() {
        let mut m = NoiseModel::ideal(1);
        m.t1[0] = 100_000.0;
        let d = GateDurations {
            single: 0.0,
            ..GateDurations::default()
        };
        let circ = build_t1(1, 50_000.0, 1.0, &d).unwrap();
        for c in [1.0, 1.5, 2.0] {
            let rho = evolve_density(&circ, &m, c).unwrap();
            let z = rho.expectation(&PauliString::parse("Z").unwrap()).unwrap();
            assert!((z - (1.0 - 2.0 * (-c * 0.5f64).exp())).abs() < 1e-12);
        }
    }

    #[test]
    fn mixed_state_paulis_vanish() {
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        for i in 1..16 {
            assert!(rho.expectation(&PauliString::from_index(i, 2)).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn trajectories_are_deterministic_and_clean() {
        let mut circ = Circuit::new(3);
        circ.push(
            (0..3)
                .map(|q| Gate::measure(q, Pauli::Z, &GateDurations::default()))
                .collect(),
        );
        let a = evolve_trajectories(&circ, &NoiseModel::ideal(3), 1.0, 1000, 7).unwrap();
        assert_eq!(a.shots.get(&0), Some(&1000));
        let mut noisy = NoiseModel::ideal(3);
        noisy.readout = vec![Confusion::from_flips(0.1, 0.1); 3];
        let x = evolve_trajectories(&circ, &noisy, 1.0, 500, 9).unwrap();
        let y = evolve_trajectories(&circ, &noisy, 1.0, 500, 9).unwrap();
        assert_eq!(x, y);
        let mut split = TrajectoryProgram::compile(&circ, &noisy, 1.0)
            .unwrap()
            .sample_range(9, 0..200);
        split.merge(
            &TrajectoryProgram::compile(&circ, &noisy, 1.0)
                .unwrap()
                .sample_range(9, 200..500),
        );
        assert_eq!(split.shots, x.shots);
    }

    #[test]
    fn counts_basis_check() {
        let counts = Counts::new(vec![0], vec![Pauli::X], 0);
        assert!(matches!(
            counts.expectation(&PauliString::parse("Z").unwrap()),
            Err(Error::BasisMismatch { .. })
        ));
    }

    #[test]
    fn limits() {
        assert!(DensityMatrix::zero(11).is_err());
        assert!(Statevector::zero(25).is_err());
        let mut psi = Statevector::zero(1).unwrap();
        psi.apply_pauli(&PauliString::parse("Y").unwrap());
        assert!((psi.amplitudes()[1] - c(0.0, 1.0)).norm() < 1e-15);
    }
}

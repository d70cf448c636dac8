//! Gate-level circuits with explicit durations, the three circuit families
//! used in the experiments, and the transformations applied before
//! execution: stretching, Pauli twirling, single-qubit merging, idle filling
//! and dynamical decoupling.
//!
//! Times are in nanoseconds. The schedule is as-soon-as-possible per qubit;
//! moments only order gates on a shared qubit, except that a moment marked
//! as a barrier (or one containing measurements) first synchronizes every
//! qubit to the latest ready time.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{c, cis, CMatrix, C64};
use crate::pauli::{cnot_conjugate, cnot_matrix, Pauli, ZZ_TWIRL_SET};
use crate::rng::rng_from;
use crate::topology::{validate_path, EdgeColoring, Topology};

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateKind {
    Rx { theta: f64 },
    Rz { theta: f64 },
    U { theta: f64, phi: f64, lambda: f64 },
    Cnot,
    Rzz { theta: f64 },
    Delay,
    Measure { basis: Pauli },
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Rzz { .. } => 2,
            _ => 1,
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Delay | GateKind::Measure { .. })
    }

    fn angles(&self) -> [f64; 3] {
        match *self {
            GateKind::Rx { theta } | GateKind::Rz { theta } | GateKind::Rzz { theta } => [theta, 0.0, 0.0],
            GateKind::U { theta, phi, lambda } => [theta, phi, lambda],
            _ => [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    #[serde(flatten)]
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub duration: f64,
    pub stretchable: bool,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize], duration: f64) -> Self {
        let stretchable = !matches!(kind, GateKind::Measure { .. });
        Self {
            kind,
            qubits: qubits.to_vec(),
            duration,
            stretchable,
        }
    }

    pub fn rx(q: usize, theta: f64, d: &GateDurations) -> Self {
        Self::new(GateKind::Rx { theta }, &[q], d.single)
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::new(GateKind::Rz { theta }, &[q], 0.0)
    }

    pub fn u(q: usize, theta: f64, phi: f64, lambda: f64, duration: f64) -> Self {
        Self::new(GateKind::U { theta, phi, lambda }, &[q], duration)
    }

    pub fn cnot(control: usize, target: usize, d: &GateDurations) -> Self {
        Self::new(GateKind::Cnot, &[control, target], d.cnot)
    }

    pub fn rzz(a: usize, b: usize, theta: f64, d: &GateDurations) -> Self {
        Self::new(GateKind::Rzz { theta }, &[a, b], d.rzz_native)
    }

    pub fn delay(q: usize, duration: f64) -> Self {
        Self::new(GateKind::Delay, &[q], duration)
    }

    pub fn measure(q: usize, basis: Pauli, d: &GateDurations) -> Self {
        Self::new(GateKind::Measure { basis }, &[q], d.measure)
    }

    /// The 2x2 or 4x4 unitary, first listed qubit most significant.
    /// `None` for delays and measurements.
    pub fn unitary(&self) -> Option<CMatrix> {
        Some(match self.kind {
            GateKind::Rx { theta } => rx_matrix(theta),
            GateKind::Rz { theta } => rz_matrix(theta),
            GateKind::U { theta, phi, lambda } => u_matrix(theta, phi, lambda),
            GateKind::Cnot => cnot_matrix(),
            GateKind::Rzz { theta } => rzz_matrix(theta),
            GateKind::Delay | GateKind::Measure { .. } => return None,
        })
    }

    pub fn is_single_qubit_unitary(&self) -> bool {
        matches!(
            self.kind,
            GateKind::Rx { .. } | GateKind::Rz { .. } | GateKind::U { .. }
        )
    }
}

pub fn rx_matrix(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_vec(2, 2, vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)])
}

pub fn ry_matrix(theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    CMatrix::from_vec(2, 2, vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
}

pub fn rz_matrix(theta: f64) -> CMatrix {
    CMatrix::from_diagonal(&[cis(-theta / 2.0), cis(theta / 2.0)])
}

/// `RZ(phi) RY(theta) RZ(lambda)`.
pub fn u_matrix(theta: f64, phi: f64, lambda: f64) -> CMatrix {
    rz_matrix(phi).mul(&ry_matrix(theta)).mul(&rz_matrix(lambda))
}

/// `exp(-i theta ZZ / 2)`.
pub fn rzz_matrix(theta: f64) -> CMatrix {
    let a = cis(-theta / 2.0);
    let b = cis(theta / 2.0);
    CMatrix::from_diagonal(&[a, b, b, a])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDurations {
    pub single: f64,
    pub cnot: f64,
    pub rzz_native: f64,
    pub measure: f64,
}

impl Default for GateDurations {
    fn default() -> Self {
        Self {
            single: 35.0,
            cnot: 450.0,
            rzz_native: 120.0,
            measure: 700.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionMode {
    CnotPair,
    NativeRzz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DdSequence {
    X2,
    XY4,
    XY8,
}

impl DdSequence {
    pub fn pulse_count(self) -> usize {
        match self {
            DdSequence::X2 => 2,
            DdSequence::XY4 => 4,
            DdSequence::XY8 => 8,
        }
    }

    fn shorter(self) -> Option<DdSequence> {
        match self {
            DdSequence::XY8 => Some(DdSequence::XY4),
            DdSequence::XY4 => Some(DdSequence::X2),
            DdSequence::X2 => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Moment {
    pub gates: Vec<Gate>,
    #[serde(default)]
    pub barrier: bool,
}

impl Moment {
    pub fn new(gates: Vec<Gate>) -> Self {
        Self { gates, barrier: false }
    }

    pub fn barrier() -> Self {
        Self {
            gates: Vec::new(),
            barrier: true,
        }
    }

    /// Barriers and measurement moments synchronize all qubits.
    pub fn synchronizes(&self) -> bool {
        self.barrier || self.gates.iter().any(|g| matches!(g.kind, GateKind::Measure { .. }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub qubit_count: usize,
    pub moments: Vec<Moment>,
}

/// Start time of every gate, indexed `[moment][gate]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub starts: Vec<Vec<f64>>,
    /// Time at which each synchronizing moment released the qubits.
    pub sync_times: Vec<Option<f64>>,
    pub total_time: f64,
}

/// A maximal stretch of time during which a qubit that has already been
/// acted on waits for its next operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleWindow {
    pub qubit: usize,
    pub start: f64,
    pub end: f64,
    /// Index of the moment before which the window closes; equal to the
    /// moment count for windows running to the end of the circuit.
    pub before_moment: usize,
}

impl Circuit {
    pub fn new(qubit_count: usize) -> Self {
        Self {
            qubit_count,
            moments: Vec::new(),
        }
    }

    pub fn push(&mut self, gates: Vec<Gate>) {
        if !gates.is_empty() {
            self.moments.push(Moment::new(gates));
        }
    }

    pub fn push_barrier(&mut self) {
        self.moments.push(Moment::barrier());
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.moments.iter().flat_map(|m| m.gates.iter())
    }

    pub fn count(&self, pred: impl Fn(&GateKind) -> bool) -> usize {
        self.gates().filter(|g| pred(&g.kind)).count()
    }

    pub fn barrier_count(&self) -> usize {
        self.moments.iter().filter(|m| m.barrier).count()
    }

    /// Structural checks: arity, qubit range, disjointness within moments,
    /// finite parameters, non-negative durations, virtual RZ.
    pub fn validate(&self) -> Result<()> {
        for (mi, m) in self.moments.iter().enumerate() {
            let mut used = vec![false; self.qubit_count];
            for g in &m.gates {
                if g.qubits.len() != g.kind.arity() {
                    return Err(Error::InvalidGate(format!("moment {mi}: arity of {:?}", g.kind)));
                }
                if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
                    return Err(Error::InvalidGate(format!("moment {mi}: repeated qubit")));
                }
                for &q in &g.qubits {
                    if q >= self.qubit_count {
                        return Err(Error::InvalidGate(format!("moment {mi}: qubit {q} out of range")));
                    }
                    if used[q] {
                        return Err(Error::InvalidGate(format!("moment {mi}: qubit {q} used twice")));
                    }
                    used[q] = true;
                }
                if !g.duration.is_finite() || g.duration < 0.0 {
                    return Err(Error::InvalidGate(format!("moment {mi}: duration {}", g.duration)));
                }
                if g.kind.angles().iter().any(|a| !a.is_finite()) {
                    return Err(Error::InvalidGate(format!("moment {mi}: non-finite angle")));
                }
                if matches!(g.kind, GateKind::Rz { .. }) && g.duration != 0.0 {
                    return Err(Error::InvalidGate(format!("moment {mi}: RZ must be virtual")));
                }
            }
        }
        Ok(())
    }

    pub fn schedule(&self) -> Schedule {
        let mut ready = vec![0.0f64; self.qubit_count];
        let mut starts = Vec::with_capacity(self.moments.len());
        let mut sync_times = Vec::with_capacity(self.moments.len());
        for m in &self.moments {
            if m.synchronizes() {
                let t = ready.iter().copied().fold(0.0, f64::max);
                ready.iter_mut().for_each(|r| *r = t);
                sync_times.push(Some(t));
            } else {
                sync_times.push(None);
            }
            let mut row = Vec::with_capacity(m.gates.len());
            for g in &m.gates {
                let s = g.qubits.iter().map(|&q| ready[q]).fold(0.0, f64::max);
                for &q in &g.qubits {
                    ready[q] = s + g.duration;
                }
                row.push(s);
            }
            starts.push(row);
        }
        Schedule {
            starts,
            sync_times,
            total_time: ready.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn total_time(&self) -> f64 {
        self.schedule().total_time
    }

    /// Idle windows of every qubit after its first operation, closed by its
    /// next gate, by a synchronizing moment, or by the end of the circuit.
    pub fn idle_windows(&self) -> Vec<IdleWindow> {
        let sched = self.schedule();
        let mut ready: Vec<Option<f64>> = vec![None; self.qubit_count];
        let mut out = Vec::new();
        let close = |q: usize, r: &mut Option<f64>, t: f64, before: usize, out: &mut Vec<IdleWindow>| {
            if let Some(start) = *r {
                if t - start > TIME_EPS {
                    out.push(IdleWindow {
                        qubit: q,
                        start,
                        end: t,
                        before_moment: before,
                    });
                }
            }
        };
        for (mi, m) in self.moments.iter().enumerate() {
            if let Some(t) = sched.sync_times[mi] {
                for (q, r) in ready.iter_mut().enumerate() {
                    close(q, r, t, mi, &mut out);
                    if r.is_some() {
                        *r = Some(t);
                    }
                }
            }
            for (g, &s) in m.gates.iter().zip(&sched.starts[mi]) {
                for &q in &g.qubits {
                    close(q, &mut ready[q], s, mi, &mut out);
                    ready[q] = Some(s + g.duration);
                }
            }
        }
        let n = self.moments.len();
        for (q, r) in ready.iter_mut().enumerate() {
            close(q, r, sched.total_time, n, &mut out);
        }
        out
    }

    /// Replaces every idle window by the gates returned from `fill`, which
    /// must have total duration equal to the window length.
    fn fill_windows(&self, mut fill: impl FnMut(&IdleWindow) -> Vec<Gate>) -> Circuit {
        let windows = self.idle_windows();
        let mut by_moment: Vec<Vec<Vec<Gate>>> = vec![Vec::new(); self.moments.len() + 1];
        for w in &windows {
            let gates = fill(w);
            if !gates.is_empty() {
                by_moment[w.before_moment].push(gates);
            }
        }
        let mut out = Circuit::new(self.qubit_count);
        let emit = |out: &mut Circuit, seqs: &mut Vec<Vec<Gate>>| {
            let depth = seqs.iter().map(Vec::len).max().unwrap_or(0);
            for k in 0..depth {
                let layer: Vec<Gate> = seqs.iter().filter_map(|s| s.get(k).cloned()).collect();
                out.push(layer);
            }
        };
        for (mi, m) in self.moments.iter().enumerate() {
            emit(&mut out, &mut by_moment[mi]);
            out.moments.push(m.clone());
        }
        emit(&mut out, &mut by_moment[self.moments.len()]);
        out
    }

    /// Makes all idle time explicit as `Delay` gates. Windows are split at
    /// every time at which any gate starts or ends, so each delay covers an
    /// interval over which no other qubit changes state.
    pub fn fill_idle(&self) -> Circuit {
        let sched = self.schedule();
        let mut events: Vec<f64> = Vec::new();
        for (m, row) in self.moments.iter().zip(&sched.starts) {
            for (g, &s) in m.gates.iter().zip(row) {
                events.push(s);
                events.push(s + g.duration);
            }
        }
        events.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        events.dedup_by(|a, b| (*a - *b).abs() < TIME_EPS);
        self.fill_windows(|w| {
            let mut cuts: Vec<f64> = events
                .iter()
                .copied()
                .filter(|&t| t > w.start + TIME_EPS && t < w.end - TIME_EPS)
                .collect();
            cuts.push(w.end);
            let mut prev = w.start;
            cuts.into_iter()
                .map(|t| {
                    let g = Gate::delay(w.qubit, t - prev);
                    prev = t;
                    g
                })
                .collect()
        })
    }

    /// Inserts a dynamical decoupling sequence into every idle window long
    /// enough to hold its pulses, falling back to shorter sequences in
    /// windows that cannot.
    pub fn insert_dd(&self, sequence: DdSequence, durations: &GateDurations) -> Circuit {
        let pulse = durations.single;
        self.fill_windows(|w| {
            let len = w.end - w.start;
            let mut seq = Some(sequence);
            while let Some(s) = seq {
                if len > s.pulse_count() as f64 * pulse + TIME_EPS {
                    return dd_gates(s, w.qubit, len - s.pulse_count() as f64 * pulse, pulse);
                }
                seq = s.shorter();
            }
            Vec::new()
        })
    }

    /// Multiplies the durations of stretchable gates by `c`.
    pub fn stretch(&self, c: f64) -> Result<Circuit> {
        if !(c >= 1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("stretch factor {c} must be >= 1")));
        }
        let mut out = self.clone();
        for m in &mut out.moments {
            for g in &mut m.gates {
                if g.stretchable {
                    g.duration *= c;
                }
            }
        }
        Ok(out)
    }

    /// Randomly twirled copies: every CNOT is sandwiched by a uniformly drawn
    /// Pauli pair and its conjugate through the CNOT, every RZZ by the same
    /// pair from {II, XX, YY, ZZ} on both sides. Instance `i`, two-qubit gate
    /// `k` draws from the stream seeded by `(seed, [i, k])`.
    pub fn twirl(&self, seed: u64, instances: usize) -> Result<Vec<Circuit>> {
        if instances == 0 {
            return Err(Error::InvalidParameter("at least one twirl instance".into()));
        }
        Ok((0..instances).map(|i| self.twirl_instance(seed, i as u64)).collect())
    }

    fn twirl_instance(&self, seed: u64, instance: u64) -> Circuit {
        let mut out = Circuit::new(self.qubit_count);
        let mut counter = 0u64;
        for m in &self.moments {
            let mut before = Vec::new();
            let mut after = Vec::new();
            for g in &m.gates {
                let pair = match g.kind {
                    GateKind::Cnot => {
                        let mut rng = rng_from(seed, &[instance, counter]);
                        let a = Pauli::from_index(rng.random_range(0..4));
                        let b = Pauli::from_index(rng.random_range(0..4));
                        Some(((a, b), cnot_conjugate(a, b)))
                    }
                    GateKind::Rzz { .. } => {
                        let mut rng = rng_from(seed, &[instance, counter]);
                        let p = ZZ_TWIRL_SET[rng.random_range(0..4)];
                        Some((p, p))
                    }
                    _ => None,
                };
                if let Some(((a, b), (a2, b2))) = pair {
                    counter += 1;
                    before.extend(pauli_gate(g.qubits[0], a));
                    before.extend(pauli_gate(g.qubits[1], b));
                    after.extend(pauli_gate(g.qubits[0], a2));
                    after.extend(pauli_gate(g.qubits[1], b2));
                }
            }
            out.push(before);
            out.moments.push(m.clone());
            out.push(after);
        }
        out
    }

    /// Collapses each run of single-qubit gates on a qubit, delimited by
    /// other operations on that qubit or by barriers, into one gate: nothing
    /// if the run is the identity, an RZ if it is diagonal, a U otherwise.
    /// The merged gate takes the longest duration in its run.
    pub fn merge_single_qubit(&self) -> Circuit {
        let mut out = Circuit::new(self.qubit_count);
        let mut pending: Vec<Vec<Gate>> = vec![Vec::new(); self.qubit_count];
        let flush = |qs: &mut dyn Iterator<Item = usize>, pending: &mut Vec<Vec<Gate>>, out: &mut Circuit| {
            let merged: Vec<Gate> = qs
                .filter_map(|q| merge_run(q, core::mem::take(&mut pending[q])))
                .collect();
            out.push(merged);
        };
        for m in &self.moments {
            if m.synchronizes() {
                flush(&mut (0..self.qubit_count), &mut pending, &mut out);
            }
            let mut rest = Vec::new();
            for g in &m.gates {
                if g.is_single_qubit_unitary() {
                    pending[g.qubits[0]].push(g.clone());
                } else {
                    rest.push(g.clone());
                }
            }
            if !rest.is_empty() || m.barrier {
                let mut touched: Vec<usize> = rest.iter().flat_map(|g| g.qubits.iter().copied()).collect();
                touched.sort_unstable();
                flush(&mut touched.into_iter(), &mut pending, &mut out);
                out.moments.push(Moment {
                    gates: rest,
                    barrier: m.barrier,
                });
            }
        }
        flush(&mut (0..self.qubit_count), &mut pending, &mut out);
        out
    }
}

fn merge_run(q: usize, run: Vec<Gate>) -> Option<Gate> {
    if run.is_empty() {
        return None;
    }
    if run.len() == 1 {
        return Some(run.into_iter().next().expect("one gate"));
    }
    let duration = run.iter().map(|g| g.duration).fold(0.0, f64::max);
    let mut u = CMatrix::identity(2);
    for g in &run {
        u = g.unitary().expect("single-qubit unitary").mul(&u);
    }
    let m = Gate::u(q, 0.0, 0.0, 0.0, duration);
    if u.distance_up_to_phase(&CMatrix::identity(2)) < 1e-12 {
        return None;
    }
    if u[(0, 1)].norm() < 1e-14 && u[(1, 0)].norm() < 1e-14 {
        let theta = (u[(1, 1)] / u[(0, 0)]).arg();
        return Some(Gate::rz(q, theta));
    }
    let (theta, phi, lambda) = zyz_angles(&u);
    Some(Gate {
        kind: GateKind::U { theta, phi, lambda },
        ..m
    })
}

/// Angles with `u = e^{i alpha} RZ(phi) RY(theta) RZ(lambda)`.
pub fn zyz_angles(u: &CMatrix) -> (f64, f64, f64) {
    let det = u[(0, 0)] * u[(1, 1)] - u[(0, 1)] * u[(1, 0)];
    let s = det.sqrt();
    let v: [C64; 4] = [u[(0, 0)] / s, u[(0, 1)] / s, u[(1, 0)] / s, u[(1, 1)] / s];
    let theta = 2.0 * v[2].norm().atan2(v[0].norm());
    let (sum, diff) = if v[2].norm() < 1e-14 {
        (2.0 * v[3].arg(), 0.0)
    } else if v[0].norm() < 1e-14 {
        (0.0, 2.0 * v[2].arg())
    } else {
        (2.0 * v[3].arg(), 2.0 * v[2].arg())
    };
    (theta, (sum + diff) / 2.0, (sum - diff) / 2.0)
}

/// Zero-duration Pauli used for twirling; identity yields nothing.
fn pauli_gate(q: usize, p: Pauli) -> Option<Gate> {
    match p {
        Pauli::I => None,
        Pauli::X => Some(Gate::new(GateKind::Rx { theta: PI }, &[q], 0.0)),
        Pauli::Y => Some(Gate::u(q, PI, 0.0, 0.0, 0.0)),
        Pauli::Z => Some(Gate::rz(q, PI)),
    }
}

fn dd_gates(seq: DdSequence, q: usize, tau: f64, pulse: f64) -> Vec<Gate> {
    let x = |theta: f64| Gate::new(GateKind::Rx { theta }, &[q], pulse);
    let y = || Gate::u(q, PI, 0.0, 0.0, pulse);
    let d = |t: f64| Gate::delay(q, t);
    match seq {
        DdSequence::X2 => vec![d(tau / 4.0), x(PI), d(tau / 2.0), x(-PI), d(tau / 4.0)],
        DdSequence::XY4 => vec![
            d(tau / 8.0),
            x(PI),
            d(tau / 4.0),
            y(),
            d(tau / 4.0),
            x(PI),
            d(tau / 4.0),
            y(),
            d(tau / 8.0),
        ],
        DdSequence::XY8 => {
            let mut out = vec![d(tau / 16.0)];
            let pattern = [true, false, true, false, false, true, false, true];
            for (i, is_x) in pattern.into_iter().enumerate() {
                if i > 0 {
                    out.push(d(tau / 8.0));
                }
                out.push(if is_x { x(PI) } else { y() });
            }
            out.push(d(tau / 16.0));
            out
        }
    }
}

/// Per qubit: X(π), a delay of `stretch * delay`, and a Z measurement.
pub fn build_t1(qubits: usize, delay: f64, stretch: f64, d: &GateDurations) -> Result<Circuit> {
    if !(delay >= 0.0) || !delay.is_finite() {
        return Err(Error::InvalidParameter(format!("delay {delay} must be >= 0")));
    }
    if !(stretch >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "stretch factor {stretch} must be >= 1"
        )));
    }
    let mut circ = Circuit::new(qubits);
    circ.push((0..qubits).map(|q| Gate::rx(q, PI, d)).collect());
    if delay > 0.0 {
        circ.push((0..qubits).map(|q| Gate::delay(q, stretch * delay)).collect());
    }
    circ.push((0..qubits).map(|q| Gate::measure(q, Pauli::Z, d)).collect());
    Ok(circ)
}

/// Hadamard-equivalent U(π/2, 0, π) on `chain[0]` followed by CNOTs along
/// the chain, control at the lower chain position. No measurement.
pub fn build_ghz(top: &Topology, chain: &[usize], d: &GateDurations) -> Result<Circuit> {
    validate_path(top, chain)?;
    if chain.is_empty() {
        return Err(Error::NotAPath("empty chain".into()));
    }
    let mut circ = Circuit::new(top.node_bound());
    circ.push(vec![Gate::u(chain[0], FRAC_PI_2, 0.0, PI, d.single)]);
    for w in chain.windows(2) {
        circ.push(vec![Gate::cnot(w[0], w[1], d)]);
    }
    Ok(circ)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub j: f64,
    pub h: f64,
    pub dt: f64,
}

/// First-order Trotter circuit for `H = -J Σ Z_a Z_b + h Σ X`: each step is
/// an RX(2h·dt) layer followed by one RZZ(−2J·dt) layer per color class,
/// and ends with a barrier. In CNOT mode each RZZ(θ) on (a, b), a < b,
/// becomes CNOT(a, b) RZ_b(θ) CNOT(a, b).
pub fn build_trotter(
    top: &Topology,
    coloring: &EdgeColoring,
    p: IsingParams,
    steps: usize,
    mode: DecompositionMode,
    d: &GateDurations,
) -> Result<Circuit> {
    coloring.validate(top)?;
    let mut circ = Circuit::new(top.node_bound());
    let theta = -2.0 * p.j * p.dt;
    for _ in 0..steps {
        circ.push(
            top.nodes()
                .into_iter()
                .map(|q| Gate::rx(q, 2.0 * p.h * p.dt, d))
                .collect(),
        );
        for class in &coloring.classes {
            match mode {
                DecompositionMode::NativeRzz => {
                    circ.push(class.iter().map(|&(a, b)| Gate::rzz(a, b, theta, d)).collect());
                }
                DecompositionMode::CnotPair => {
                    circ.push(class.iter().map(|&(a, b)| Gate::cnot(a, b, d)).collect());
                    circ.push(class.iter().map(|&(_, b)| Gate::rz(b, theta)).collect());
                    circ.push(class.iter().map(|&(a, b)| Gate::cnot(a, b, d)).collect());
                }
            }
        }
        circ.push_barrier();
    }
    Ok(circ)
}

/// Rotation taking the eigenbasis of `basis` to the computational basis.
pub fn basis_change(q: usize, basis: Pauli, d: &GateDurations) -> Option<Gate> {
    match basis {
        Pauli::X => Some(Gate::u(q, FRAC_PI_2, 0.0, PI, d.single)),
        Pauli::Y => Some(Gate::u(q, FRAC_PI_2, 0.0, FRAC_PI_2, d.single)),
        Pauli::Z | Pauli::I => None,
    }
}

/// Appends basis changes and measurements of the listed qubits.
pub fn measure_in(circ: &Circuit, qubits: &[usize], basis: Pauli, d: &GateDurations) -> Circuit {
    let mut out = circ.clone();
    out.push(qubits.iter().filter_map(|&q| basis_change(q, basis, d)).collect());
    out.moments.push(Moment::new(
        qubits.iter().map(|&q| Gate::measure(q, basis, d)).collect(),
    ));
    out
}

/// Ideal single-qubit unitary of a merged run, exposed for tests.
pub fn product_unitary(gates: &[Gate]) -> CMatrix {
    gates.iter().fold(CMatrix::identity(2), |acc, g| {
        g.unitary().map(|u| u.mul(&acc)).unwrap_or(acc)
    })
}

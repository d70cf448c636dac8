//! Simple-update tensor-network evolution for Trotterized Ising dynamics on
//! arbitrary graphs.
//!
//! Each node carries a tensor `Γ_v` with the physical index first and one
//! bond index per incident edge, in ascending neighbor order. Each edge
//! carries a vector of bond weights `λ_e`. Expectations contract one or two
//! tensors with `λ` absorbed on every outer bond, which is exact on trees in
//! canonical form and the usual mean-field environment otherwise.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::circuit::{rx_matrix, rzz_matrix, IsingParams};
use crate::error::{Error, Result};
use crate::math::{svd, CMatrix, C64, ZERO};
use crate::pauli::Pauli;
use crate::topology::{Edge, EdgeColoring, Topology};

/// Singular values below this fraction of the largest are dropped.
pub const RELATIVE_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
struct Tensor {
    shape: Vec<usize>,
    data: Vec<C64>,
}

impl Tensor {
    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.shape.len()];
        for i in (0..self.shape.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.shape[i + 1];
        }
        s
    }

    /// New axis `i` is old axis `perm[i]`.
    fn permute(&self, perm: &[usize]) -> Tensor {
        let old = self.strides();
        let shape: Vec<usize> = perm.iter().map(|&p| self.shape[p]).collect();
        let mut out = vec![ZERO; self.data.len()];
        let mut idx = vec![0usize; shape.len()];
        for v in out.iter_mut() {
            let src: usize = idx.iter().zip(perm).map(|(&i, &p)| i * old[p]).sum();
            *v = self.data[src];
            for ax in (0..shape.len()).rev() {
                idx[ax] += 1;
                if idx[ax] < shape[ax] {
                    break;
                }
                idx[ax] = 0;
            }
        }
        Tensor { shape, data: out }
    }

    fn scale_axis(&mut self, axis: usize, f: &[f64]) {
        let st = self.strides()[axis];
        let dim = self.shape[axis];
        for (k, v) in self.data.iter_mut().enumerate() {
            *v *= f[(k / st) % dim];
        }
    }
}

fn inverse_permutation(p: &[usize]) -> Vec<usize> {
    let mut q = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        q[x] = i;
    }
    q
}

fn ordered(a: usize, b: usize) -> Edge {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone)]
pub struct TnState {
    max_bond: usize,
    nodes: Vec<usize>,
    neighbors: Vec<Vec<usize>>,
    gammas: Vec<Option<Tensor>>,
    lambdas: BTreeMap<Edge, Vec<f64>>,
    truncation_error: f64,
}

/// Product state with every active qubit in `|0⟩`.
pub fn tn_init_product(top: &Topology, max_bond: usize) -> Result<TnState> {
    if max_bond == 0 {
        return Err(Error::InvalidParameter("bond dimension must be positive".into()));
    }
    let n = top.node_bound();
    let mut neighbors = vec![Vec::new(); n];
    let mut gammas = vec![None; n];
    for v in top.nodes() {
        neighbors[v] = top.neighbors(v);
        let mut shape = vec![2];
        shape.extend(core::iter::repeat_n(1, neighbors[v].len()));
        gammas[v] = Some(Tensor {
            shape,
            data: vec![C64::new(1.0, 0.0), ZERO],
        });
    }
    let lambdas = top.edges().into_iter().map(|e| (e, vec![1.0])).collect();
    Ok(TnState {
        max_bond,
        nodes: top.nodes(),
        neighbors,
        gammas,
        lambdas,
        truncation_error: 0.0,
    })
}

impl TnState {
    pub fn max_bond(&self) -> usize {
        self.max_bond
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.lambdas.keys().copied().collect()
    }

    pub fn bond_dimension(&self, a: usize, b: usize) -> Option<usize> {
        self.lambdas.get(&ordered(a, b)).map(|l| l.len())
    }

    pub fn bond_weights(&self, a: usize, b: usize) -> Option<&[f64]> {
        self.lambdas.get(&ordered(a, b)).map(|l| l.as_slice())
    }

    /// Sum of the normalized weights discarded by the bond cap over all
    /// two-site updates.
    pub fn truncation_error(&self) -> f64 {
        self.truncation_error
    }

    fn gamma(&self, v: usize) -> Result<&Tensor> {
        self.gammas.get(v).and_then(|g| g.as_ref()).ok_or(Error::UnknownNode(v))
    }

    fn bond_axis(&self, v: usize, other: usize) -> Result<usize> {
        self.neighbors[v]
            .iter()
            .position(|&w| w == other)
            .map(|i| i + 1)
            .ok_or_else(|| Error::InvalidGate(format!("{v}-{other} is not an edge")))
    }

    /// `Γ_v` with `λ` absorbed on every bond except the one toward `skip`.
    fn absorbed(&self, v: usize, skip: Option<usize>) -> Result<Tensor> {
        let mut t = self.gamma(v)?.clone();
        for (i, &w) in self.neighbors[v].iter().enumerate() {
            if Some(w) != skip {
                t.scale_axis(i + 1, &self.lambdas[&ordered(v, w)]);
            }
        }
        Ok(t)
    }

    fn strip(&self, t: &mut Tensor, v: usize, skip: usize, axes: &[usize]) {
        for (&w, &ax) in self.neighbors[v].iter().filter(|&&w| w != skip).zip(axes) {
            let inv: Vec<f64> = self.lambdas[&ordered(v, w)].iter().map(|x| 1.0 / x).collect();
            t.scale_axis(ax, &inv);
        }
    }

    /// `Θ[(s_a, outer_a), (s_b, outer_b)]` for the edge, with all weights
    /// absorbed, plus the permutations used to build it.
    fn theta(&self, a: usize, b: usize) -> Result<(CMatrix, Vec<usize>, Vec<usize>, Vec<usize>, Vec<usize>)> {
        let e = ordered(a, b);
        let lam = self
            .lambdas
            .get(&e)
            .ok_or_else(|| Error::InvalidGate(format!("{a}-{b} is not an edge")))?;
        let ax_a = self.bond_axis(a, b)?;
        let ax_b = self.bond_axis(b, a)?;
        let ta = self.absorbed(a, Some(b))?;
        let tb = self.absorbed(b, Some(a))?;
        let mut pa: Vec<usize> = (0..ta.shape.len()).filter(|&i| i != ax_a).collect();
        pa.push(ax_a);
        let mut pb = vec![ax_b];
        pb.extend((0..tb.shape.len()).filter(|&i| i != ax_b));
        let mut ma = ta.permute(&pa);
        let chi = lam.len();
        ma.scale_axis(ma.shape.len() - 1, lam);
        let mb = tb.permute(&pb);
        let rows = ma.data.len() / chi;
        let cols = mb.data.len() / chi;
        let theta = CMatrix::from_vec(rows, chi, ma.data).mul(&CMatrix::from_vec(chi, cols, mb.data));
        let shape_a: Vec<usize> = ma.shape[..ma.shape.len() - 1].to_vec();
        let shape_b: Vec<usize> = mb.shape[1..].to_vec();
        Ok((theta, pa, pb, shape_a, shape_b))
    }

    /// Applies a 2x2 unitary to qubit `v`.
    pub fn apply_single(&mut self, v: usize, u: &CMatrix) -> Result<()> {
        let t = self
            .gammas
            .get_mut(v)
            .and_then(|g| g.as_mut())
            .ok_or(Error::UnknownNode(v))?;
        let rest = t.data.len() / 2;
        let (lo, hi) = t.data.split_at_mut(rest);
        for (x0, x1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (a, b) = (*x0, *x1);
            *x0 = u[(0, 0)] * a + u[(0, 1)] * b;
            *x1 = u[(1, 0)] * a + u[(1, 1)] * b;
        }
        Ok(())
    }

    /// Applies a 4x4 unitary to the edge `(a, b)`, `a` being the more
    /// significant qubit of the matrix, and truncates the bond. Returns the
    /// normalized discarded weight of this update.
    pub fn apply_two_site(&mut self, a: usize, b: usize, u: &CMatrix) -> Result<f64> {
        let (theta, pa, pb, shape_a, shape_b) = self.theta(a, b)?;
        let oa = theta.rows() / 2;
        let ob = theta.cols() / 2;
        let mut g = CMatrix::zeros(theta.rows(), theta.cols());
        for sa in 0..2 {
            for sb in 0..2 {
                for ta in 0..2 {
                    for tb in 0..2 {
                        let w = u[(2 * sa + sb, 2 * ta + tb)];
                        if w == ZERO {
                            continue;
                        }
                        for ia in 0..oa {
                            for ib in 0..ob {
                                let src = theta[(ta * oa + ia, tb * ob + ib)];
                                let dst = &mut g.data_mut()[(sa * oa + ia) * theta.cols() + sb * ob + ib];
                                *dst += w * src;
                            }
                        }
                    }
                }
            }
        }
        let d = svd(&g);
        let s = &d.singular_values;
        let total: f64 = s.iter().map(|x| x * x).sum();
        if total == 0.0 {
            return Err(Error::InvalidParameter("two-site update produced a zero state".into()));
        }
        let rank = s.iter().take_while(|&&x| x > RELATIVE_CUTOFF * s[0]).count().max(1);
        let keep = rank.min(self.max_bond);
        // Values below the cutoff are numerical zeros, not truncation.
        let discarded: f64 = s[keep..rank].iter().map(|x| x * x).sum::<f64>() / total;
        self.truncation_error += discarded;
        let norm = s[..keep].iter().map(|x| x * x).sum::<f64>().sqrt();
        let lam: Vec<f64> = s[..keep].iter().map(|x| x / norm).collect();

        let mut new_a = vec![ZERO; theta.rows() * keep];
        for r in 0..theta.rows() {
            for k in 0..keep {
                new_a[r * keep + k] = d.u[(r, k)];
            }
        }
        let mut sa = shape_a.clone();
        sa.push(keep);
        let mut ta = Tensor { shape: sa, data: new_a };
        let outer_a: Vec<usize> = (1..shape_a.len()).collect();
        self.strip(&mut ta, a, b, &outer_a);

        let mut new_b = vec![ZERO; keep * theta.cols()];
        for k in 0..keep {
            for cidx in 0..theta.cols() {
                new_b[k * theta.cols() + cidx] = d.v[(cidx, k)].conj();
            }
        }
        let mut sb = vec![keep];
        sb.extend_from_slice(&shape_b);
        let mut tb = Tensor { shape: sb, data: new_b };
        let outer_b: Vec<usize> = (2..shape_b.len() + 1).collect();
        self.strip(&mut tb, b, a, &outer_b);

        self.gammas[a] = Some(ta.permute(&inverse_permutation(&pa)));
        self.gammas[b] = Some(tb.permute(&inverse_permutation(&pb)));
        self.lambdas.insert(ordered(a, b), lam);
        Ok(discarded)
    }

    /// Replaces `Γ_a → Γ_a W` and `Γ_b → W^{-1} Γ_b` on the bond toward `b`
    /// (with `a < b`). The weights are left alone, so reported
    /// expectations are unchanged only for gauges commuting with `diag(λ)`.
    pub fn gauge_bond(&mut self, a: usize, b: usize, w: &CMatrix, w_inv: &CMatrix) -> Result<()> {
        let (a, b) = ordered(a, b);
        for (v, other, m) in [(a, b, w.clone()), (b, a, w_inv.adjoint().conj())] {
            let ax = self.bond_axis(v, other)?;
            let t = self.gamma(v)?;
            let mut p: Vec<usize> = (0..t.shape.len()).filter(|&i| i != ax).collect();
            p.push(ax);
            let pt = t.permute(&p);
            let chi = *pt.shape.last().unwrap_or(&1);
            if m.rows() != chi || m.cols() != chi {
                return Err(Error::LengthMismatch {
                    expected: chi,
                    found: m.rows(),
                });
            }
            // Bond index last: Γ_b W^{-T} contracts W^{-1} on the bond.
            let mat = CMatrix::from_vec(pt.data.len() / chi, chi, pt.data).mul(&m);
            let nt = Tensor {
                shape: pt.shape.clone(),
                data: mat.data().to_vec(),
            };
            self.gammas[v] = Some(nt.permute(&inverse_permutation(&p)));
        }
        Ok(())
    }

    /// Single-site expectation of a Pauli, ratio form.
    pub fn measure_local(&self, v: usize, p: Pauli) -> Result<f64> {
        let t = self.absorbed(v, None)?;
        let rest = t.data.len() / 2;
        let mut rho = [[ZERO; 2]; 2];
        for s in 0..2 {
            for s2 in 0..2 {
                rho[s][s2] = (0..rest)
                    .map(|r| t.data[s * rest + r] * t.data[s2 * rest + r].conj())
                    .sum();
            }
        }
        let o = p.matrix();
        let num: C64 = (0..2)
            .flat_map(|s| (0..2).map(move |s2| (s, s2)))
            .map(|(s, s2)| o[(s2, s)] * rho[s][s2])
            .sum();
        let den = (rho[0][0] + rho[1][1]).re;
        Ok(num.re / den)
    }

    /// `<Z_a Z_b>` on an edge, ratio form.
    pub fn measure_zz(&self, a: usize, b: usize) -> Result<f64> {
        let (theta, ..) = self.theta(a, b)?;
        let oa = theta.rows() / 2;
        let ob = theta.cols() / 2;
        let mut num = 0.0;
        let mut den = 0.0;
        for r in 0..theta.rows() {
            for cidx in 0..theta.cols() {
                let w = theta[(r, cidx)].norm_sqr();
                let sign = if (r / oa) ^ (cidx / ob) == 0 { 1.0 } else { -1.0 };
                num += sign * w;
                den += w;
            }
        }
        Ok(num / den)
    }
}

pub fn tn_apply_single(state: &mut TnState, v: usize, u: &CMatrix) -> Result<()> {
    state.apply_single(v, u)
}

pub fn tn_apply_two_site(state: &mut TnState, a: usize, b: usize, u: &CMatrix) -> Result<f64> {
    state.apply_two_site(a, b, u)
}

pub fn tn_measure_local(state: &TnState, v: usize, p: Pauli) -> Result<f64> {
    state.measure_local(v, p)
}

pub fn tn_measure_zz(state: &TnState, a: usize, b: usize) -> Result<f64> {
    state.measure_zz(a, b)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TnStepRecord {
    pub step: usize,
    /// Average `(<X>, <Y>, <Z>)` over active qubits.
    pub m: [f64; 3],
    /// `<Z_a Z_b>` per edge in ascending order.
    pub zz: Vec<(Edge, f64)>,
    pub zz_mean: f64,
    pub truncation_error: f64,
}

fn snapshot(state: &TnState, step: usize) -> Result<TnStepRecord> {
    let mut m = [0.0; 3];
    for &v in state.nodes() {
        for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
            m[k] += state.measure_local(v, p)?;
        }
    }
    let n = state.nodes().len() as f64;
    let zz = state
        .edges()
        .into_iter()
        .map(|(a, b)| state.measure_zz(a, b).map(|z| ((a, b), z)))
        .collect::<Result<Vec<_>>>()?;
    let zz_mean = if zz.is_empty() {
        0.0
    } else {
        zz.iter().map(|x| x.1).sum::<f64>() / zz.len() as f64
    };
    Ok(TnStepRecord {
        step,
        m: m.map(|x| x / n),
        zz,
        zz_mean,
        truncation_error: state.truncation_error(),
    })
}

/// Runs the same first-order Trotter sequence as the circuit builder and
/// records magnetization and edge correlations after each step, starting
/// with step 0.
pub fn tn_evolve_trotter(
    top: &Topology,
    coloring: &EdgeColoring,
    p: IsingParams,
    steps: usize,
    max_bond: usize,
) -> Result<Vec<TnStepRecord>> {
    coloring.validate(top)?;
    let mut state = tn_init_product(top, max_bond)?;
    let rx = rx_matrix(2.0 * p.h * p.dt);
    let rzz = rzz_matrix(-2.0 * p.j * p.dt);
    let mut out = vec![snapshot(&state, 0)?];
    for step in 1..=steps {
        for v in top.nodes() {
            state.apply_single(v, &rx)?;
        }
        for class in &coloring.classes {
            for &(a, b) in class {
                state.apply_two_site(a, b, &rzz)?;
            }
        }
        out.push(snapshot(&state, step)?);
    }
    Ok(out)
}

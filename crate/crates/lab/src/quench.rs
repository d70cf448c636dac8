//! Ising quench experiments and the tensor-network baseline.

use std::collections::BTreeMap;

use rayon::prelude::*;
use zne_core::analysis::{d_avg, e_avg_zz};
use zne_core::baseline::{tn_evolve_trotter, TnStepRecord};
use zne_core::circuit::{basis_change, build_trotter, measure_in, Circuit};
use zne_core::noise::{Confusion, NoiseModel};
use zne_core::pauli::{Pauli, PauliString};
use zne_core::rng::derive_seed;
use zne_core::sim::{
    compile_density_gate, evolve_density_snapshots, sample_density, Counts, Statevector, EXACT_QUBIT_LIMIT,
};
use zne_core::topology::{color_edges, Edge, Topology};

use crate::config::{ExperimentConfig, IsingConfig};
use crate::error::LabResult;
use crate::formats::{fmt_f64, opt, CountsRecord};
use crate::manifest::{STAGE_BOOTSTRAP, STAGE_SAMPLE, STAGE_TWIRL};
use crate::pipeline::{
    bootstrap_estimates, dress, estimate, lattice, load_model, mitigation_header, mitigation_row, simulate,
    simulator_name, spread, uses_density, write_counts, write_table, Ctx, Estimate, Fail, Observable, PointCounts,
    SummaryRow, SUMMARY_HEADER,
};

const BASES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

/// Per qubit `X`, `Y`, `Z` (settings 0, 1, 2), then `ZZ` on every edge.
fn observables(n: usize, edges: &[Edge], labels: &[usize]) -> Vec<Observable> {
    let mut out = Vec::new();
    for q in 0..n {
        for (s, b) in BASES.into_iter().enumerate() {
            out.push(Observable {
                label: format!("{b}{}", labels[q]),
                setting: s,
                pauli: PauliString::on(n, &[q], b),
            });
        }
    }
    for &(a, b) in edges {
        out.push(Observable {
            label: format!("ZZ{}-{}", labels[a], labels[b]),
            setting: 2,
            pauli: PauliString::on(n, &[a, b], Pauli::Z),
        });
    }
    out
}

/// Magnetization vector and mean edge `<ZZ>` from values ordered as in
/// [`observables`].
fn aggregate(n: usize, v: &[f64]) -> ([f64; 3], f64) {
    let mut m = [0.0; 3];
    for q in 0..n {
        for k in 0..3 {
            m[k] += v[3 * q + k] / n as f64;
        }
    }
    let zz = &v[3 * n..];
    let zz_mean = if zz.is_empty() {
        0.0
    } else {
        zz.iter().sum::<f64>() / zz.len() as f64
    };
    (m, zz_mean)
}

/// Ideal values of `obs` after each Trotter step of `base`.
fn exact_snapshots(base: &Circuit, obs: &[Observable]) -> zne_core::Result<Vec<Vec<f64>>> {
    let mut psi = Statevector::zero(base.qubit_count)?;
    let mut out = Vec::new();
    for m in &base.moments {
        if m.barrier {
            out.push(
                obs.iter()
                    .map(|o| psi.expectation(&o.pauli))
                    .collect::<zne_core::Result<Vec<_>>>()?,
            );
        }
        for g in &m.gates {
            psi.apply_gate(g);
        }
    }
    Ok(out)
}

/// Moments of `circ` before its `k`-th barrier (1-based).
fn prefix(circ: &Circuit, k: usize) -> Circuit {
    let mut out = Circuit::new(circ.qubit_count);
    let mut seen = 0;
    for m in &circ.moments {
        if m.barrier {
            seen += 1;
            if seen == k {
                break;
            }
        }
        out.moments.push(m.clone());
    }
    out
}

/// `[step - 1][basis]` counts for one stretch factor and instance from the
/// density path, changing basis on a copy of each step's state.
#[allow(clippy::too_many_arguments)]
fn density_counts(
    circ: &Circuit,
    model: &NoiseModel,
    cfg: &ExperimentConfig,
    ci: usize,
    inst: usize,
    shots: u64,
    seed: u64,
) -> zne_core::Result<Vec<Vec<Counts>>> {
    let n = circ.qubit_count;
    let c = cfg.stretch_factors[ci];
    let qubits: Vec<usize> = (0..n).collect();
    let readout: Vec<Confusion> = model.readout.clone();
    let changes = BASES
        .iter()
        .map(|&b| {
            let mut ops = Vec::new();
            for q in 0..n {
                if let Some(g) = basis_change(q, b, &cfg.durations) {
                    ops.extend(compile_density_gate(n, &g, model, c)?);
                }
            }
            Ok(ops)
        })
        .collect::<zne_core::Result<Vec<_>>>()?;
    let mut out = Vec::new();
    evolve_density_snapshots(circ, model, c, |k, rho| {
        let step = k as u64 + 1;
        let mut per_basis = Vec::new();
        for (bi, &b) in BASES.iter().enumerate() {
            let s = derive_seed(seed, &[ci as u64, inst as u64, step, bi as u64]);
            let counts = if changes[bi].is_empty() {
                sample_density(rho, &qubits, &vec![b; n], &readout, shots, s)?
            } else {
                let mut r = rho.clone();
                for op in &changes[bi] {
                    r.apply_superop(op);
                }
                sample_density(&r, &qubits, &vec![b; n], &readout, shots, s)?
            };
            per_basis.push(counts);
        }
        out.push(per_basis);
        Ok(())
    })?;
    Ok(out)
}

pub(crate) fn quench(ctx: &mut Ctx, ising: &IsingConfig) -> LabResult<Vec<SummaryRow>> {
    let cfg = ctx.cfg;
    let (top, map) = lattice(ctx)?;
    let n = top.node_count();
    let edges = top.edges();
    let model = load_model(ctx, n, &edges)?;
    let coloring = color_edges(&top);
    let steps = ising.steps;
    let density = uses_density(cfg.simulator, n);
    ctx.manifest.qubit_map = map.clone();
    ctx.manifest.simulator = Some(simulator_name(density));

    let base = ctx.stage("build", None, || {
        Ok(build_trotter(
            &top,
            &coloring,
            ising.params(),
            steps,
            cfg.decomposition,
            &cfg.durations,
        )?)
    })?;
    let twirl_seed = ctx.manifest.stage_seed(STAGE_TWIRL);
    let instances = ctx.stage("dd_twirl", Some(twirl_seed), || {
        let circs: Vec<Circuit> = dress(&base, cfg)
            .twirl(twirl_seed, cfg.twirl_instances)?
            .iter()
            .map(Circuit::merge_single_qubit)
            .collect();
        if circs.iter().any(|c| c.barrier_count() != steps) {
            return Err(Fail::Msg("transformed circuit lost its step barriers".into()));
        }
        Ok(circs)
    })?;
    ctx.manifest.circuit_time_ns = Some(instances[0].total_time());

    let sample_seed = ctx.manifest.stage_seed(STAGE_SAMPLE);
    let nc = cfg.stretch_factors.len();
    let ni = cfg.twirl_instances;
    // counts[ci * ni + inst][step - 1][basis]
    let counts: Vec<Vec<Vec<Counts>>> = ctx.stage("simulate", Some(sample_seed), || {
        let jobs: Vec<(usize, usize)> = (0..nc).flat_map(|ci| (0..ni).map(move |i| (ci, i))).collect();
        if density {
            jobs.par_iter()
                .map(|&(ci, i)| {
                    let shots = crate::pipeline::instance_shots(cfg.shots, ni, i);
                    Ok(density_counts(&instances[i], &model, cfg, ci, i, shots, sample_seed)?)
                })
                .collect::<Result<Vec<_>, Fail>>()
        } else {
            let all: Vec<usize> = (0..n).collect();
            jobs.iter()
                .map(|&(ci, i)| {
                    let shots = crate::pipeline::instance_shots(cfg.shots, ni, i);
                    (1..=steps)
                        .map(|s| {
                            BASES
                                .iter()
                                .enumerate()
                                .map(|(bi, &b)| {
                                    let circ = measure_in(&prefix(&instances[i], s), &all, b, &cfg.durations);
                                    let seed = derive_seed(sample_seed, &[ci as u64, i as u64, s as u64, bi as u64]);
                                    Ok(simulate(&circ, &model, cfg.stretch_factors[ci], shots, seed, false)?)
                                })
                                .collect::<Result<Vec<_>, Fail>>()
                        })
                        .collect::<Result<Vec<_>, Fail>>()
                })
                .collect::<Result<Vec<_>, Fail>>()
        }
    })?;

    let mut records = BTreeMap::new();
    for ci in 0..nc {
        for i in 0..ni {
            for (s, per_basis) in counts[ci * ni + i].iter().enumerate() {
                for (b, c) in BASES.iter().zip(per_basis) {
                    let key = format!(
                        "c={}/instance={i:02}/step={:03}/basis={b}",
                        fmt_f64(cfg.stretch_factors[ci]),
                        s + 1
                    );
                    records.insert(key, CountsRecord::from_counts(c));
                }
            }
        }
    }
    let cp = ctx.file("counts.json");
    ctx.stage("write_counts", None, || Ok(write_counts(&cp, &records)?))?;

    let obs = observables(n, &edges, &map);
    let exact = if n <= EXACT_QUBIT_LIMIT {
        Some(ctx.stage("exact", None, || Ok(exact_snapshots(&base, &obs)?))?)
    } else {
        ctx.manifest.notes.push(format!(
            "no exact oracle: {n} qubits exceed the limit of {EXACT_QUBIT_LIMIT}"
        ));
        None
    };
    let tn = match cfg.tn_bond_dim {
        Some(d) => Some((
            d,
            ctx.stage("tn_baseline", None, || {
                Ok(tn_evolve_trotter(&top, &coloring, ising.params(), steps, d)?)
            })?,
        )),
        None => None,
    };

    let boot_seed = ctx.manifest.stage_seed(STAGE_BOOTSTRAP);
    let results: Vec<(Vec<Estimate>, Vec<Vec<f64>>)> = ctx.stage("mitigate", Some(boot_seed), || {
        (1..=steps)
            .into_par_iter()
            .map(|s| {
                let data: PointCounts = (0..nc)
                    .map(|ci| (0..ni).map(|i| counts[ci * ni + i][s - 1].clone()).collect())
                    .collect();
                let est = estimate(&data, &obs, &model, cfg)?;
                let samples = bootstrap_estimates(&data, &obs, &model, cfg, derive_seed(boot_seed, &[s as u64]))?;
                Ok((est, samples))
            })
            .collect::<Result<Vec<_>, Fail>>()
    })?;

    let tables = QuenchTables::build(cfg, n, ising, &obs, &results, exact.as_deref(), tn.as_ref());
    let dir = ctx.dir.clone();
    ctx.stage("write_tables", None, || tables.write(cfg, &dir))?;
    Ok(tables.summary)
}

#[derive(Default)]
struct QuenchTables {
    expectations: Vec<Vec<String>>,
    mitigation: Vec<Vec<String>>,
    magnetization: Vec<Vec<String>>,
    summary: Vec<SummaryRow>,
}

const MAGNETIZATION_HEADER: [&str; 13] = [
    "step",
    "param",
    "source",
    "m_x",
    "m_y",
    "m_z",
    "zz_mean",
    "stderr_m_x",
    "stderr_m_y",
    "stderr_m_z",
    "stderr_zz_mean",
    "truncation_error",
    "unphysical",
];

fn magnetization_row(
    step: usize,
    param: f64,
    source: &str,
    m: [f64; 3],
    zz: f64,
    stderr: Option<[f64; 4]>,
    truncation: Option<f64>,
) -> Vec<String> {
    let mut r = vec![step.to_string(), fmt_f64(param), source.to_string()];
    r.extend(m.iter().map(|x| fmt_f64(*x)));
    r.push(fmt_f64(zz));
    match stderr {
        Some(s) => r.extend(s.iter().map(|x| fmt_f64(*x))),
        None => r.extend(std::iter::repeat_n(String::new(), 4)),
    }
    r.push(opt(truncation));
    r.push((m.iter().any(|x| x.abs() > 1.0) || zz.abs() > 1.0).to_string());
    r
}

pub(crate) fn tn_source(d: usize) -> String {
    format!("tn_simple_update_D{d}")
}

impl QuenchTables {
    fn build(
        cfg: &ExperimentConfig,
        n: usize,
        ising: &IsingConfig,
        obs: &[Observable],
        results: &[(Vec<Estimate>, Vec<Vec<f64>>)],
        exact: Option<&[Vec<f64>]>,
        tn: Option<&(usize, Vec<TnStepRecord>)>,
    ) -> Self {
        let mut t = QuenchTables::default();
        for (si, (est, samples)) in results.iter().enumerate() {
            let step = si + 1;
            let param = step as f64 * ising.dt;
            for (o, e) in obs.iter().zip(est) {
                let (qubit, basis) = match o.label.strip_prefix("ZZ") {
                    Some(pair) => (pair.to_string(), "ZZ".to_string()),
                    None => (o.label[1..].to_string(), o.label[..1].to_string()),
                };
                for (c, v) in cfg.stretch_factors.iter().zip(&e.per_c) {
                    t.expectations.push(vec![
                        step.to_string(),
                        qubit.clone(),
                        basis.clone(),
                        fmt_f64(*c),
                        fmt_f64(v.value),
                        fmt_f64(v.stderr),
                    ]);
                }
            }
            for (k, (o, e)) in obs.iter().zip(est).enumerate() {
                let per_c: Vec<f64> = e.per_c.iter().map(|x| x.value).collect();
                let sd = spread(samples, |s| s[k]);
                t.mitigation.push(mitigation_row(
                    cfg,
                    step,
                    param,
                    &o.label,
                    "experiment",
                    &per_c,
                    e.mitigated.estimate,
                    Some(sd),
                ));
            }
            let mitigated: Vec<f64> = est.iter().map(|e| e.mitigated.estimate).collect();
            let (m_mit, zz_mit) = aggregate(n, &mitigated);
            let per_c_agg: Vec<([f64; 3], f64)> = (0..cfg.stretch_factors.len())
                .map(|ci| aggregate(n, &est.iter().map(|e| e.per_c[ci].value).collect::<Vec<_>>()))
                .collect();
            let boot = [0, 1, 2].map(|k| spread(samples, |s| aggregate(n, s).0[k]));
            let boot_zz = spread(samples, |s| aggregate(n, s).1);
            for (k, label) in ["M_x", "M_y", "M_z"].into_iter().enumerate() {
                let per_c: Vec<f64> = per_c_agg.iter().map(|a| a.0[k]).collect();
                t.mitigation.push(mitigation_row(
                    cfg,
                    step,
                    param,
                    label,
                    "experiment",
                    &per_c,
                    m_mit[k],
                    Some(boot[k]),
                ));
            }
            let per_c_zz: Vec<f64> = per_c_agg.iter().map(|a| a.1).collect();
            t.mitigation.push(mitigation_row(
                cfg,
                step,
                param,
                "ZZ_mean",
                "experiment",
                &per_c_zz,
                zz_mit,
                Some(boot_zz),
            ));

            let (m_raw, zz_raw) = per_c_agg[0];
            t.magnetization.push(magnetization_row(
                step,
                param,
                "experiment_raw",
                m_raw,
                zz_raw,
                None,
                None,
            ));
            t.magnetization.push(magnetization_row(
                step,
                param,
                "experiment_mitigated",
                m_mit,
                zz_mit,
                Some([boot[0], boot[1], boot[2], boot_zz]),
                None,
            ));

            let mut row = SummaryRow::empty(step);
            let ideal = exact.map(|e| aggregate(n, &e[si]));
            if let Some(values) = exact {
                for (o, v) in obs.iter().zip(&values[si]) {
                    t.mitigation
                        .push(mitigation_row(cfg, step, param, &o.label, "exact", &[], *v, None));
                }
                let (m, zz) = aggregate(n, &values[si]);
                t.magnetization
                    .push(magnetization_row(step, param, "exact", m, zz, None, None));
            }
            if let Some((m_id, zz_id)) = ideal {
                row.d_avg_exp = d_avg(m_id, m_mit).ok();
                row.e_avg_exp = e_avg_zz(zz_id, zz_mit).ok();
                row.d_avg_raw = d_avg(m_id, m_raw).ok();
                row.e_avg_raw = e_avg_zz(zz_id, zz_raw).ok();
            }
            if let Some((d, recs)) = tn {
                let r = &recs[step];
                let src = tn_source(*d);
                for (k, label) in ["M_x", "M_y", "M_z"].into_iter().enumerate() {
                    t.mitigation
                        .push(mitigation_row(cfg, step, param, label, &src, &[], r.m[k], None));
                }
                t.mitigation
                    .push(mitigation_row(cfg, step, param, "ZZ_mean", &src, &[], r.zz_mean, None));
                t.magnetization.push(magnetization_row(
                    step,
                    param,
                    &src,
                    r.m,
                    r.zz_mean,
                    None,
                    Some(r.truncation_error),
                ));
                if let Some((m_id, zz_id)) = ideal {
                    row.d_avg_peps = d_avg(m_id, r.m).ok();
                    row.e_avg_peps = e_avg_zz(zz_id, r.zz_mean).ok();
                }
            }
            t.summary.push(row);
        }
        t
    }

    fn write(&self, cfg: &ExperimentConfig, dir: &std::path::Path) -> Result<(), Fail> {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        write_table(
            &dir.join("expectations.csv"),
            &s(&["step", "qubit", "basis", "stretch", "value", "stderr"]),
            &self.expectations,
        )?;
        write_table(&dir.join("mitigation.csv"), &mitigation_header(cfg), &self.mitigation)?;
        write_table(
            &dir.join("magnetization.csv"),
            &s(&MAGNETIZATION_HEADER),
            &self.magnetization,
        )?;
        let rows: Vec<Vec<String>> = self.summary.iter().map(SummaryRow::cells).collect();
        write_table(&dir.join("summary.csv"), &s(&SUMMARY_HEADER), &rows)?;
        Ok(())
    }
}

/// Tensor-network evolution at each bond dimension, compared with the exact
/// oracle when the lattice is small enough. Returns the summary of the
/// first bond dimension.
pub(crate) fn tn_baseline(ctx: &mut Ctx, ising: &IsingConfig, bond_dims: &[usize]) -> LabResult<Vec<SummaryRow>> {
    let cfg = ctx.cfg;
    let (top, map): (Topology, Vec<usize>) = lattice(ctx)?;
    let n = top.node_count();
    let edges = top.edges();
    let coloring = color_edges(&top);
    ctx.manifest.qubit_map = map.clone();
    ctx.manifest.simulator = Some("tn_simple_update".into());
    let runs = ctx.stage("tn_baseline", None, || {
        bond_dims
            .par_iter()
            .map(|&d| Ok((d, tn_evolve_trotter(&top, &coloring, ising.params(), ising.steps, d)?)))
            .collect::<Result<Vec<_>, Fail>>()
    })?;
    let obs = observables(n, &edges, &map);
    let exact = if n <= EXACT_QUBIT_LIMIT {
        let base = build_trotter(
            &top,
            &coloring,
            ising.params(),
            ising.steps,
            cfg.decomposition,
            &cfg.durations,
        )
        .map_err(|e| ctx.config_error(e.to_string()))?;
        Some(ctx.stage("exact", None, || Ok(exact_snapshots(&base, &obs)?))?)
    } else {
        ctx.manifest.notes.push(format!(
            "no exact oracle: {n} qubits exceed the limit of {EXACT_QUBIT_LIMIT}"
        ));
        None
    };
    let mut mag = Vec::new();
    let mut summaries = Vec::new();
    for step in 1..=ising.steps {
        let param = step as f64 * ising.dt;
        if let Some(e) = &exact {
            let (m, zz) = aggregate(n, &e[step - 1]);
            mag.push(magnetization_row(step, param, "exact", m, zz, None, None));
        }
    }
    for (d, recs) in &runs {
        let mut rows = Vec::new();
        for step in 1..=ising.steps {
            let param = step as f64 * ising.dt;
            let r = &recs[step];
            mag.push(magnetization_row(
                step,
                param,
                &tn_source(*d),
                r.m,
                r.zz_mean,
                None,
                Some(r.truncation_error),
            ));
            let mut row = SummaryRow::empty(step);
            if let Some(e) = &exact {
                let (m, zz) = aggregate(n, &e[step - 1]);
                row.d_avg_peps = d_avg(m, r.m).ok();
                row.e_avg_peps = e_avg_zz(zz, r.zz_mean).ok();
            }
            rows.push(row);
        }
        summaries.push((*d, rows));
    }
    let dir = ctx.dir.clone();
    ctx.stage("write_tables", None, || {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        write_table(&dir.join("magnetization.csv"), &s(&MAGNETIZATION_HEADER), &mag)?;
        for (d, rows) in &summaries {
            let cells: Vec<Vec<String>> = rows.iter().map(SummaryRow::cells).collect();
            write_table(&dir.join(format!("summary_D{d}.csv")), &s(&SUMMARY_HEADER), &cells)?;
        }
        Ok(())
    })?;
    Ok(summaries.into_iter().next().map(|s| s.1).unwrap_or_default())
}

//! `run`: executes one experiment config into an output directory.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use zne_core::analysis::ObservableSpec;
use zne_core::circuit::{build_ghz, build_t1, measure_in, Circuit};
use zne_core::mitigation::{
    average_twirl_instances, binomial_stderr, bootstrap, corrected_expectation, extrapolate_with, InstanceEstimate,
    MitigatedValue, StretchPoint, StretchSeries,
};
use zne_core::noise::{identity_insertion_map, Confusion, NoiseModel, NoisePlacement, PauliChannel};
use zne_core::pauli::{Pauli, PauliString};
use zne_core::rng::derive_seed;
use zne_core::sim::{evolve_density, measured_qubits, sample_density, Counts, TrajectoryProgram, DENSITY_QUBIT_LIMIT};
use zne_core::topology::{longest_chain, Edge, Topology};

use crate::config::{Experiment, ExperimentConfig, SimulatorChoice};
use crate::error::{LabError, LabResult};
use crate::formats::{fmt_f64, load_noise, load_pauli_channel, opt, write_csv, write_json, CountsRecord};
use crate::manifest::{Manifest, STAGE_BOOTSTRAP, STAGE_SAMPLE, STAGE_TWIRL, STRETCH_AVERAGING_NOTE};
use crate::quench;

/// Trajectory shots are drawn in chunks of this size, one task each.
const SHOT_CHUNK: u64 = 1000;

/// One line of `summary.csv`. Missing entries are metrics that were not
/// computed or are undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub step: usize,
    pub d_avg_exp: Option<f64>,
    pub d_avg_peps: Option<f64>,
    pub e_avg_exp: Option<f64>,
    pub e_avg_peps: Option<f64>,
    pub d_avg_raw: Option<f64>,
    pub e_avg_raw: Option<f64>,
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "step",
    "d_avg_exp",
    "d_avg_peps",
    "e_avg_exp",
    "e_avg_peps",
    "d_avg_raw",
    "e_avg_raw",
];

impl SummaryRow {
    pub fn empty(step: usize) -> Self {
        Self {
            step,
            d_avg_exp: None,
            d_avg_peps: None,
            e_avg_exp: None,
            e_avg_peps: None,
            d_avg_raw: None,
            e_avg_raw: None,
        }
    }

    pub fn cells(&self) -> Vec<String> {
        vec![
            self.step.to_string(),
            opt(self.d_avg_exp),
            opt(self.d_avg_peps),
            opt(self.e_avg_exp),
            opt(self.e_avg_peps),
            opt(self.d_avg_raw),
            opt(self.e_avg_raw),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub summary: Vec<SummaryRow>,
    pub manifest: Manifest,
}

/// Failure inside a stage, before the stage name is attached.
#[derive(Debug)]
pub(crate) enum Fail {
    Core(zne_core::Error),
    Io(std::io::Error),
    Msg(String),
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fail::Core(e) => write!(f, "{e}"),
            Fail::Io(e) => write!(f, "{e}"),
            Fail::Msg(m) => f.write_str(m),
        }
    }
}

impl From<zne_core::Error> for Fail {
    fn from(e: zne_core::Error) -> Self {
        Fail::Core(e)
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail::Io(e)
    }
}

impl From<String> for Fail {
    fn from(e: String) -> Self {
        Fail::Msg(e)
    }
}

pub(crate) struct Ctx<'a> {
    pub cfg: &'a ExperimentConfig,
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl Ctx<'_> {
    pub fn stage<T>(
        &mut self,
        name: &'static str,
        seed: Option<u64>,
        f: impl FnOnce() -> Result<T, Fail>,
    ) -> LabResult<T> {
        let path = self.cfg.source_path.clone();
        self.manifest
            .timed(name, seed, f)
            .map_err(|e| LabError::stage(name, &path, e))
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn config_error(&self, message: impl Into<String>) -> LabError {
        LabError::config(&self.cfg.source_path, message)
    }
}

fn partial_path(out: &Path) -> PathBuf {
    let mut name = out
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "out".into());
    name.push(".partial");
    out.with_file_name(name)
}

/// Runs `cfg`. Results are written to `<output_dir>.partial` and moved into
/// place only if every stage succeeds; on failure nothing is left behind.
pub fn run(cfg: &ExperimentConfig) -> LabResult<RunReport> {
    cfg.validate().map_err(|m| LabError::config(&cfg.source_path, m))?;
    let out = cfg.output_path();
    let partial = partial_path(&out);
    let io = |e: std::io::Error| LabError::stage("output", &cfg.source_path, e);
    if partial.exists() {
        fs::remove_dir_all(&partial).map_err(io)?;
    }
    fs::create_dir_all(&partial).map_err(io)?;
    match execute(cfg, &partial) {
        Ok(mut report) => {
            if out.exists() {
                fs::remove_dir_all(&out).map_err(io)?;
            }
            fs::rename(&partial, &out).map_err(io)?;
            report.output_dir = out;
            Ok(report)
        }
        Err(e) => {
            let _ = fs::remove_dir_all(&partial);
            Err(e)
        }
    }
}

fn execute(cfg: &ExperimentConfig, dir: &Path) -> LabResult<RunReport> {
    let mut ctx = Ctx {
        cfg,
        dir: dir.to_path_buf(),
        manifest: Manifest::new(cfg),
    };
    let summary = match &cfg.experiment {
        Experiment::T1 { qubits, delays_us } => t1(&mut ctx, *qubits, delays_us)?,
        Experiment::Ghz { chain_length } => ghz(&mut ctx, *chain_length)?,
        Experiment::Quench { ising } => quench::quench(&mut ctx, ising)?,
        Experiment::TnBaseline { ising, bond_dims } => quench::tn_baseline(&mut ctx, ising, bond_dims)?,
        Experiment::InsertionAudit { channel, k, placement } => audit(&mut ctx, channel, k, *placement)?,
    };
    if matches!(
        cfg.experiment,
        Experiment::T1 { .. } | Experiment::Ghz { .. } | Experiment::Quench { .. }
    ) {
        ctx.manifest.notes.push(STRETCH_AVERAGING_NOTE.to_string());
    }
    let manifest = ctx.manifest.clone();
    let path = ctx.file("manifest.json");
    ctx.stage("write_manifest", None, || Ok(write_json(&path, &manifest)?))?;
    Ok(RunReport {
        output_dir: dir.to_path_buf(),
        summary,
        manifest: ctx.manifest,
    })
}

pub(crate) fn load_model(ctx: &Ctx, n: usize, edges: &[Edge]) -> LabResult<NoiseModel> {
    match &ctx.cfg.noise {
        None => Ok(NoiseModel::ideal(n)),
        Some(p) => {
            let path = ctx.cfg.resolve(p);
            load_noise(&path)?
                .to_model(n, edges)
                .map_err(|m| LabError::config(&path, m))
        }
    }
}

pub(crate) fn lattice(ctx: &Ctx) -> LabResult<(Topology, Vec<usize>)> {
    ctx.cfg.lattice().map_err(|m| ctx.config_error(m))
}

pub(crate) fn uses_density(choice: SimulatorChoice, n: usize) -> bool {
    match choice {
        SimulatorChoice::Density => true,
        SimulatorChoice::Trajectory => false,
        SimulatorChoice::Auto => n <= DENSITY_QUBIT_LIMIT,
    }
}

pub(crate) fn simulator_name(density: bool) -> String {
    if density { "density" } else { "trajectory" }.to_string()
}

/// Makes idle time explicit: dynamical decoupling where configured, plain
/// delays everywhere else.
pub(crate) fn dress(base: &Circuit, cfg: &ExperimentConfig) -> Circuit {
    match cfg.dd {
        Some(seq) => base.insert_dd(seq, &cfg.durations).fill_idle(),
        None => base.fill_idle(),
    }
}

pub(crate) fn instance_shots(total: u64, instances: usize, i: usize) -> u64 {
    let k = instances as u64;
    total / k + u64::from((i as u64) < total % k)
}

/// Counts from a circuit that ends in measurements.
pub(crate) fn simulate(
    circuit: &Circuit,
    model: &NoiseModel,
    c: f64,
    shots: u64,
    seed: u64,
    density: bool,
) -> zne_core::Result<Counts> {
    if density {
        let rho = evolve_density(circuit, model, c)?;
        let (qs, bases) = measured_qubits(circuit);
        let readout: Vec<Confusion> = qs.iter().map(|&q| model.readout[q]).collect();
        return sample_density(&rho, &qs, &bases, &readout, shots, seed);
    }
    let prog = TrajectoryProgram::compile(circuit, model, c)?;
    let chunks: Vec<u64> = (0..shots.div_ceil(SHOT_CHUNK)).collect();
    let parts: Vec<Counts> = chunks
        .par_iter()
        .map(|&k| prog.sample_range(seed, k * SHOT_CHUNK..((k + 1) * SHOT_CHUNK).min(shots)))
        .collect();
    let (qs, bases) = measured_qubits(circuit);
    let mut out = Counts::new(qs, bases, seed);
    for p in &parts {
        out.merge(p);
    }
    Ok(out)
}

/// An observable read from one measurement setting.
#[derive(Debug, Clone)]
pub(crate) struct Observable {
    pub label: String,
    pub setting: usize,
    pub pauli: PauliString,
}

/// Counts of one data point, indexed `[stretch][instance][setting]`.
pub(crate) type PointCounts = Vec<Vec<Vec<Counts>>>;

#[derive(Debug, Clone)]
pub(crate) struct Estimate {
    /// Readout-corrected, instance-pooled value per stretch factor.
    pub per_c: Vec<InstanceEstimate>,
    pub mitigated: MitigatedValue,
}

fn confusion_for(model: &NoiseModel, counts: &Counts) -> Vec<Confusion> {
    counts.qubits.iter().map(|&q| model.readout[q]).collect()
}

pub(crate) fn estimate(
    data: &PointCounts,
    obs: &[Observable],
    model: &NoiseModel,
    cfg: &ExperimentConfig,
) -> zne_core::Result<Vec<Estimate>> {
    obs.iter()
        .map(|o| {
            let per_c = data
                .iter()
                .map(|instances| {
                    let items = instances
                        .iter()
                        .map(|settings| {
                            let counts = &settings[o.setting];
                            let value = corrected_expectation(counts, &confusion_for(model, counts), &o.pauli)?;
                            Ok(InstanceEstimate {
                                value,
                                stderr: binomial_stderr(value.clamp(-1.0, 1.0), counts.total),
                                shots: counts.total,
                            })
                        })
                        .collect::<zne_core::Result<Vec<_>>>()?;
                    average_twirl_instances(&items)
                })
                .collect::<zne_core::Result<Vec<_>>>()?;
            let series = StretchSeries::new(
                cfg.stretch_factors
                    .iter()
                    .zip(&per_c)
                    .map(|(&c, e)| StretchPoint {
                        c,
                        value: e.value,
                        stderr: e.stderr,
                    })
                    .collect(),
            )?;
            let mitigated = extrapolate_with(&series, cfg.extrapolation_order, cfg.fit)?;
            Ok(Estimate { per_c, mitigated })
        })
        .collect()
}

/// Bootstrap samples of every mitigated estimate: `samples[r][observable]`.
pub(crate) fn bootstrap_estimates(
    data: &PointCounts,
    obs: &[Observable],
    model: &NoiseModel,
    cfg: &ExperimentConfig,
    seed: u64,
) -> zne_core::Result<Vec<Vec<f64>>> {
    let shape: Vec<Vec<usize>> = data.iter().map(|i| i.iter().map(Vec::len).collect()).collect();
    let flat: Vec<Counts> = data.iter().flatten().flatten().cloned().collect();
    let result = bootstrap(&flat, cfg.resamples, seed, |set| {
        let mut it = set.iter().cloned();
        let rebuilt: PointCounts = shape
            .iter()
            .map(|inst| inst.iter().map(|&k| it.by_ref().take(k).collect()).collect())
            .collect();
        Ok(estimate(&rebuilt, obs, model, cfg)?
            .into_iter()
            .map(|e| e.mitigated.estimate)
            .collect::<Vec<f64>>())
    })?;
    Ok(result.samples)
}

/// Sample standard deviation of `f` over bootstrap samples.
pub(crate) fn spread(samples: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> f64 {
    zne_core::mitigation::BootstrapResult {
        samples: samples.iter().map(|s| f(s)).collect(),
    }
    .std()
}

pub(crate) fn mitigation_header(cfg: &ExperimentConfig) -> Vec<String> {
    let mut h: Vec<String> = ["step", "param", "observable", "source"].map(String::from).to_vec();
    h.extend(cfg.stretch_factors.iter().map(|c| format!("value_c{}", fmt_f64(*c))));
    h.extend(["estimate", "stderr", "unphysical"].map(String::from));
    h
}

/// One `mitigation.csv` row; `per_c` is empty for sources without stretch
/// data.
pub(crate) fn mitigation_row(
    cfg: &ExperimentConfig,
    step: usize,
    param: f64,
    label: &str,
    source: &str,
    per_c: &[f64],
    estimate: f64,
    stderr: Option<f64>,
) -> Vec<String> {
    let mut r = vec![step.to_string(), fmt_f64(param), label.to_string(), source.to_string()];
    r.extend((0..cfg.stretch_factors.len()).map(|i| per_c.get(i).map(|v| fmt_f64(*v)).unwrap_or_default()));
    r.push(fmt_f64(estimate));
    r.push(opt(stderr));
    r.push((estimate.abs() > 1.0).to_string());
    r
}

pub(crate) fn write_table(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(path, &h, rows)
}

pub(crate) fn write_counts(path: &Path, records: &BTreeMap<String, CountsRecord>) -> std::io::Result<()> {
    let f = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    serde_json::to_writer(&mut w, records)?;
    std::io::Write::write_all(&mut w, b"\n")
}

/// Mitigation and error tables for experiments with a known ideal value per
/// observable (t1 and ghz). `points[i]` is `(step, param, counts)`.
fn ideal_value_outputs(
    ctx: &mut Ctx,
    model: &NoiseModel,
    points: &[(usize, f64, PointCounts)],
    obs: &[Observable],
    ideal: &[f64],
) -> LabResult<()> {
    let cfg = ctx.cfg;
    let boot_seed = ctx.manifest.stage_seed(STAGE_BOOTSTRAP);
    let results = ctx.stage("mitigate", Some(boot_seed), || {
        points
            .par_iter()
            .enumerate()
            .map(|(i, (_, _, data))| {
                let est = estimate(data, obs, model, cfg)?;
                let samples = bootstrap_estimates(data, obs, model, cfg, derive_seed(boot_seed, &[i as u64]))?;
                Ok((est, samples))
            })
            .collect::<Result<Vec<_>, Fail>>()
    })?;
    let mut mit_rows = Vec::new();
    let mut err_rows = Vec::new();
    for ((step, param, _), (est, samples)) in points.iter().zip(&results) {
        for (k, (o, e)) in obs.iter().zip(est).enumerate() {
            let per_c: Vec<f64> = e.per_c.iter().map(|x| x.value).collect();
            let sd = spread(samples, |s| s[k]);
            mit_rows.push(mitigation_row(
                cfg,
                *step,
                *param,
                &o.label,
                "experiment",
                &per_c,
                e.mitigated.estimate,
                Some(sd),
            ));
            err_rows.push(vec![
                step.to_string(),
                fmt_f64(*param),
                o.label.clone(),
                fmt_f64(ideal[k]),
                fmt_f64(per_c[0]),
                fmt_f64(e.mitigated.estimate),
                fmt_f64((per_c[0] - ideal[k]).abs()),
                fmt_f64((e.mitigated.estimate - ideal[k]).abs()),
            ]);
        }
    }
    let header = mitigation_header(cfg);
    let (mp, ep) = (ctx.file("mitigation.csv"), ctx.file("errors.csv"));
    ctx.stage("write_tables", None, || {
        write_table(&mp, &header, &mit_rows)?;
        write_csv(
            &ep,
            &[
                "step",
                "param",
                "observable",
                "ideal",
                "raw",
                "mitigated",
                "raw_error",
                "mitigated_error",
            ],
            &err_rows,
        )?;
        Ok(())
    })
}

fn t1(ctx: &mut Ctx, n: usize, delays_us: &[f64]) -> LabResult<Vec<SummaryRow>> {
    let cfg = ctx.cfg;
    let model = load_model(ctx, n, &[])?;
    let density = uses_density(cfg.simulator, n);
    ctx.manifest.qubit_map = (0..n).collect();
    ctx.manifest.simulator = Some(simulator_name(density));
    if cfg.dd.is_some() {
        ctx.manifest
            .notes
            .push("dd is not applied to t1 circuits: the delay is the quantity under study".into());
    }
    if cfg.twirl_instances > 1 {
        ctx.manifest
            .notes
            .push("t1 circuits have no two-qubit gates, so twirl instances are identical and merged".into());
    }
    let circuits = ctx.stage("build", None, || {
        delays_us
            .iter()
            .map(|&d| Ok(build_t1(n, d * 1e3, 1.0, &cfg.durations)?))
            .collect::<Result<Vec<_>, Fail>>()
    })?;
    let sample_seed = ctx.manifest.stage_seed(STAGE_SAMPLE);
    let jobs: Vec<(usize, usize)> = (0..delays_us.len())
        .flat_map(|di| (0..cfg.stretch_factors.len()).map(move |ci| (di, ci)))
        .collect();
    let counts = ctx.stage("simulate", Some(sample_seed), || {
        jobs.par_iter()
            .map(|&(di, ci)| {
                let seed = derive_seed(sample_seed, &[di as u64, ci as u64]);
                Ok(simulate(
                    &circuits[di],
                    &model,
                    cfg.stretch_factors[ci],
                    cfg.shots,
                    seed,
                    density,
                )?)
            })
            .collect::<Result<Vec<_>, Fail>>()
    })?;
    let mut records = BTreeMap::new();
    let nc = cfg.stretch_factors.len();
    let points: Vec<(usize, f64, PointCounts)> = (0..delays_us.len())
        .map(|di| {
            let data: PointCounts = (0..nc).map(|ci| vec![vec![counts[di * nc + ci].clone()]]).collect();
            (di, delays_us[di], data)
        })
        .collect();
    for &(di, ci) in &jobs {
        records.insert(
            format!("delay={di:03}/c={}", fmt_f64(cfg.stretch_factors[ci])),
            CountsRecord::from_counts(&counts[di * nc + ci]),
        );
    }
    let obs: Vec<Observable> = (1..=n)
        .map(|k| {
            let qs: Vec<usize> = (0..k).collect();
            let pauli = PauliString::on(n, &qs, Pauli::Z);
            Observable {
                label: pauli.to_string_compact(),
                setting: 0,
                pauli,
            }
        })
        .collect();
    let ideal: Vec<f64> = (1..=n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let cp = ctx.file("counts.json");
    ctx.stage("write_counts", None, || Ok(write_counts(&cp, &records)?))?;
    ideal_value_outputs(ctx, &model, &points, &obs, &ideal)?;
    Ok(Vec::new())
}

fn ghz(ctx: &mut Ctx, length: usize) -> LabResult<Vec<SummaryRow>> {
    let cfg = ctx.cfg;
    let (lat, map) = lattice(ctx)?;
    let chain = longest_chain(&lat, length).map_err(|e| ctx.config_error(e.to_string()))?;
    let (sub, sub_map) = lat
        .induced(&chain)
        .map_err(|e| ctx.config_error(e.to_string()))?
        .compact();
    let local: Vec<usize> = chain
        .iter()
        .map(|v| sub_map.iter().position(|x| x == v).expect("chain node kept"))
        .collect();
    let n = sub.node_count();
    let model = load_model(ctx, n, &sub.edges())?;
    let density = uses_density(cfg.simulator, n);
    ctx.manifest.qubit_map = sub_map.iter().map(|&v| map[v]).collect();
    ctx.manifest.simulator = Some(simulator_name(density));
    let twirl_seed = ctx.manifest.stage_seed(STAGE_TWIRL);
    let all: Vec<usize> = (0..n).collect();
    let circuits = ctx.stage("build", Some(twirl_seed), || {
        let base = build_ghz(&sub, &local, &cfg.durations)?;
        Ok(dress(&base, cfg)
            .twirl(twirl_seed, cfg.twirl_instances)?
            .iter()
            .map(|c| measure_in(&c.merge_single_qubit(), &all, Pauli::Z, &cfg.durations))
            .collect::<Vec<_>>())
    })?;
    ctx.manifest.circuit_time_ns = Some(circuits[0].total_time());
    let sample_seed = ctx.manifest.stage_seed(STAGE_SAMPLE);
    let ni = cfg.twirl_instances;
    let jobs: Vec<(usize, usize)> = (0..cfg.stretch_factors.len())
        .flat_map(|ci| (0..ni).map(move |i| (ci, i)))
        .collect();
    let counts = ctx.stage("simulate", Some(sample_seed), || {
        jobs.par_iter()
            .map(|&(ci, i)| {
                let seed = derive_seed(sample_seed, &[ci as u64, i as u64]);
                let shots = instance_shots(cfg.shots, ni, i);
                Ok(simulate(
                    &circuits[i],
                    &model,
                    cfg.stretch_factors[ci],
                    shots,
                    seed,
                    density,
                )?)
            })
            .collect::<Result<Vec<_>, Fail>>()
    })?;
    let mut records = BTreeMap::new();
    for (&(ci, i), c) in jobs.iter().zip(&counts) {
        records.insert(
            format!("c={}/instance={i:02}", fmt_f64(cfg.stretch_factors[ci])),
            CountsRecord::from_counts(c),
        );
    }
    let data: PointCounts = (0..cfg.stretch_factors.len())
        .map(|ci| (0..ni).map(|i| vec![counts[ci * ni + i].clone()]).collect())
        .collect();
    let mut obs = Vec::new();
    for j in 1..n {
        let spec = ObservableSpec::local_zz(n, &local, j).map_err(|e| ctx.config_error(e.to_string()))?;
        obs.push(Observable {
            label: format!("local_{j}"),
            setting: 0,
            pauli: spec.pauli,
        });
    }
    for j in 1..n {
        let spec = ObservableSpec::nonlocal_zz(n, &local, j).map_err(|e| ctx.config_error(e.to_string()))?;
        obs.push(Observable {
            label: format!("nonlocal_{j}"),
            setting: 0,
            pauli: spec.pauli,
        });
    }
    let ideal = vec![1.0; obs.len()];
    let cp = ctx.file("counts.json");
    ctx.stage("write_counts", None, || Ok(write_counts(&cp, &records)?))?;
    ideal_value_outputs(ctx, &model, &[(0, length as f64, data)], &obs, &ideal)?;
    Ok(Vec::new())
}

/// Rows `(k, pauli, actual, desired, deviation)` of an identity-insertion
/// audit.
pub fn audit_rows(
    channel: &PauliChannel,
    ks: &[usize],
    placement: NoisePlacement,
) -> zne_core::Result<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    for &k in ks {
        let a = identity_insertion_map(channel, k, placement)?;
        for ((label, act), des) in a.labels.iter().zip(&a.actual).zip(&a.desired) {
            rows.push(vec![
                k.to_string(),
                label.clone(),
                fmt_f64(*act),
                fmt_f64(*des),
                fmt_f64((act - des).abs()),
            ]);
        }
    }
    Ok(rows)
}

pub const AUDIT_HEADER: [&str; 5] = ["k", "pauli", "actual", "desired", "deviation"];

fn audit(ctx: &mut Ctx, channel: &Path, ks: &[usize], placement: NoisePlacement) -> LabResult<Vec<SummaryRow>> {
    let ch = load_pauli_channel(&ctx.cfg.resolve(channel))?;
    let path = ctx.file("insertion_audit.csv");
    ctx.stage("audit", None, || {
        let rows = audit_rows(&ch, ks, placement)?;
        write_csv(&path, &AUDIT_HEADER, &rows)?;
        Ok(())
    })?;
    Ok(Vec::new())
}

//! One-axis parameter sweeps over a config template.

use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use rayon::prelude::*;

use crate::config::{Experiment, ExperimentConfig, Sublattice};
use crate::error::{LabError, LabResult};
use crate::formats::{fmt_f64, opt, write_csv};
use crate::pipeline::{run, SummaryRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    #[value(name = "J")]
    J,
    Steps,
    #[value(name = "lattice_size")]
    LatticeSize,
    #[value(name = "D")]
    D,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::J => "J",
            Axis::Steps => "steps",
            Axis::LatticeSize => "lattice_size",
            Axis::D => "D",
        }
    }
}

fn as_count(v: f64, axis: Axis) -> Result<usize, String> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e9 {
        Ok(v as usize)
    } else {
        Err(format!("{} must be a positive integer, got {v}", axis.name()))
    }
}

/// The template with `axis` set to `value`, writing to its own
/// subdirectory of the template's output directory.
pub fn grid_point(template: &ExperimentConfig, axis: Axis, value: f64) -> Result<ExperimentConfig, String> {
    let mut cfg = template.clone();
    let ising = match &mut cfg.experiment {
        Experiment::Quench { ising } | Experiment::TnBaseline { ising, .. } => Some(ising),
        _ => None,
    };
    match axis {
        Axis::J => ising.ok_or("the J axis needs a quench or tn_baseline template")?.j = value,
        Axis::Steps => {
            ising
                .ok_or("the steps axis needs a quench or tn_baseline template")?
                .steps = as_count(value, axis)?
        }
        Axis::LatticeSize => {
            let size = as_count(value, axis)?;
            let from = match &template.sublattice {
                Some(Sublattice::Bfs { bfs_from, .. }) => *bfs_from,
                Some(Sublattice::Nodes { .. }) => return Err("lattice_size sweeps need a bfs sublattice".into()),
                None => 0,
            };
            cfg.sublattice = Some(Sublattice::Bfs { bfs_from: from, size });
        }
        Axis::D => {
            let d = as_count(value, axis)?;
            match &mut cfg.experiment {
                Experiment::TnBaseline { bond_dims, .. } => *bond_dims = vec![d],
                Experiment::Quench { .. } => cfg.tn_bond_dim = Some(d),
                _ => return Err("the D axis needs a quench or tn_baseline template".into()),
            }
        }
    }
    cfg.output_dir = template.output_dir.join(format!("{}={}", axis.name(), fmt_f64(value)));
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug)]
pub struct GridPoint {
    pub value: f64,
    pub result: LabResult<Vec<SummaryRow>>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub grid_csv: PathBuf,
    pub points: Vec<GridPoint>,
}

impl SweepReport {
    pub fn failures(&self) -> impl Iterator<Item = (f64, &LabError)> {
        self.points
            .iter()
            .filter_map(|p| p.result.as_ref().err().map(|e| (p.value, e)))
    }
}

/// Runs every grid point, keeping going past failures, and writes
/// `grid.csv` into the template's output directory.
pub fn sweep(template: &ExperimentConfig, axis: Axis, values: &[f64]) -> LabResult<SweepReport> {
    if values.is_empty() {
        return Err(LabError::config(
            &template.source_path,
            "sweep needs at least one axis value",
        ));
    }
    let configs = values
        .iter()
        .map(|&v| {
            grid_point(template, axis, v)
                .map_err(|m| LabError::config(&template.source_path, format!("{}={v}: {m}", axis.name())))
        })
        .collect::<LabResult<Vec<_>>>()?;
    let points: Vec<GridPoint> = configs
        .par_iter()
        .zip(values)
        .map(|(cfg, &value)| GridPoint {
            value,
            result: run(cfg).map(|r| r.summary),
        })
        .collect();
    let mut rows = Vec::new();
    for p in &points {
        match &p.result {
            Ok(summary) => {
                for r in summary {
                    let mut row = vec![axis.name().to_string(), fmt_f64(p.value)];
                    row.extend(r.cells());
                    row.push("ok".into());
                    rows.push(row);
                }
            }
            Err(e) => {
                let mut row = vec![axis.name().to_string(), fmt_f64(p.value), String::new()];
                row.extend(std::iter::repeat_n(opt(None), 6));
                row.push(format!("error: {e}"));
                rows.push(row);
            }
        }
    }
    let dir = template.output_path();
    let grid_csv = dir.join("grid.csv");
    let io = |e: std::io::Error| LabError::stage("sweep_grid", &template.source_path, e);
    fs::create_dir_all(&dir).map_err(io)?;
    write_csv(
        &grid_csv,
        &[
            "axis",
            "value",
            "step",
            "d_avg_exp",
            "d_avg_peps",
            "e_avg_exp",
            "e_avg_peps",
            "d_avg_raw",
            "e_avg_raw",
            "status",
        ],
        &rows,
    )
    .map_err(io)?;
    Ok(SweepReport { grid_csv, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn template() -> ExperimentConfig {
        serde_json::from_str(
            r#"{"kind": "tn_baseline", "ising": {"j": 0.1, "h": 1, "dt": 0.5, "steps": 2},
                "bond_dims": [2], "sublattice": {"bfs_from": 12, "size": 6}, "output_dir": "sw"}"#,
        )
        .unwrap()
    }

    #[test]
    fn axes_edit_the_right_fields() {
        let t = template();
        let p = grid_point(&t, Axis::J, 0.3).unwrap();
        assert!(matches!(p.experiment, Experiment::TnBaseline { ising, .. } if ising.j == 0.3));
        assert_eq!(p.output_dir, PathBuf::from("sw/J=0.3"));
        let p = grid_point(&t, Axis::LatticeSize, 8.0).unwrap();
        assert_eq!(p.sublattice, Some(Sublattice::Bfs { bfs_from: 12, size: 8 }));
        let p = grid_point(&t, Axis::D, 4.0).unwrap();
        assert!(matches!(p.experiment, Experiment::TnBaseline { ref bond_dims, .. } if bond_dims == &[4]));
        assert!(grid_point(&t, Axis::Steps, 2.5).is_err());
    }
}

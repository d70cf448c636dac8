//! Zero-noise extrapolation, readout-error inversion and bootstrap
//! uncertainty.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)] // float methods for no_std; shadowed by inherent ones when std is linked
use num_traits::Float as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::solve_real;
use crate::noise::{apply_on_bit, Confusion};
use crate::pauli::PauliString;
use crate::rng::rng_from;
use crate::sim::{sample_counts, Counts};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StretchPoint {
    pub c: f64,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StretchSeries {
    pub points: Vec<StretchPoint>,
}

impl StretchSeries {
    pub fn new(points: Vec<StretchPoint>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if !(p.c >= 1.0) || !p.c.is_finite() {
                return Err(Error::InvalidParameter(format!("stretch factor {} must be >= 1", p.c)));
            }
            if points[..i].iter().any(|q| q.c == p.c) {
                return Err(Error::DuplicateStretch(p.c));
            }
        }
        if points.windows(2).any(|w| w[0].c > w[1].c) {
            return Err(Error::InvalidParameter("stretch factors must increase".into()));
        }
        Ok(Self { points })
    }

    /// Noise-free values: zero uncertainty at every point.
    pub fn exact(cs: &[f64], values: &[f64]) -> Result<Self> {
        if cs.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: cs.len(),
                found: values.len(),
            });
        }
        Self::new(
            cs.iter()
                .zip(values)
                .map(|(&c, &value)| StretchPoint { c, value, stderr: 0.0 })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtrapolationMethod {
    RichardsonExact,
    LeastSquares,
}

/// Which points a fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitPoints {
    /// Interpolate when there are exactly `order + 1` points, otherwise
    /// weighted least squares over all of them.
    #[default]
    All,
    /// Interpolate through the `order + 1` smallest stretch factors.
    Lowest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MitigatedValue {
    pub estimate: f64,
    pub stderr: f64,
    pub order: usize,
    pub method: ExtrapolationMethod,
    /// `|estimate| > 1` for a Pauli observable. The estimate is kept as is.
    pub unphysical: bool,
}

/// Weights `w` with `estimate = Σ w_i y_i` for a degree-`order` polynomial
/// in `c` evaluated at `c = 0`.
pub fn extrapolation_weights(cs: &[f64], sigmas: &[f64], order: usize) -> Result<(Vec<f64>, ExtrapolationMethod)> {
    if order == 0 || cs.len() <= order {
        return Err(Error::NotEnoughPoints {
            order,
            points: cs.len(),
        });
    }
    for (i, &c) in cs.iter().enumerate() {
        if cs[..i].contains(&c) {
            return Err(Error::DuplicateStretch(c));
        }
    }
    if cs.len() == order + 1 {
        let w = (0..cs.len())
            .map(|i| {
                (0..cs.len())
                    .filter(|&j| j != i)
                    .map(|j| -cs[j] / (cs[i] - cs[j]))
                    .product()
            })
            .collect();
        return Ok((w, ExtrapolationMethod::RichardsonExact));
    }
    let use_sigma = sigmas.iter().all(|&s| s > 0.0);
    let wts: Vec<f64> = (0..cs.len())
        .map(|i| if use_sigma { 1.0 / (sigmas[i] * sigmas[i]) } else { 1.0 })
        .collect();
    let m = order + 1;
    let mut normal = vec![0.0; m * m];
    for (i, &c) in cs.iter().enumerate() {
        for a in 0..m {
            for b in 0..m {
                normal[a * m + b] += wts[i] * c.powi(a as i32) * c.powi(b as i32);
            }
        }
    }
    let mut e0 = vec![0.0; m];
    e0[0] = 1.0;
    let x = solve_real(&normal, &e0, m).ok_or(Error::InvalidParameter("singular fit".into()))?;
    let w = cs
        .iter()
        .enumerate()
        .map(|(i, &c)| wts[i] * (0..m).map(|a| c.powi(a as i32) * x[a]).sum::<f64>())
        .collect();
    Ok((w, ExtrapolationMethod::LeastSquares))
}

pub fn extrapolate(series: &StretchSeries, order: usize) -> Result<MitigatedValue> {
    extrapolate_with(series, order, FitPoints::All)
}

pub fn extrapolate_with(series: &StretchSeries, order: usize, fit: FitPoints) -> Result<MitigatedValue> {
    let pts: &[StretchPoint] = match fit {
        FitPoints::All => &series.points,
        FitPoints::Lowest => {
            if series.points.len() <= order {
                return Err(Error::NotEnoughPoints {
                    order,
                    points: series.points.len(),
                });
            }
            &series.points[..order + 1]
        }
    };
    let cs: Vec<f64> = pts.iter().map(|p| p.c).collect();
    let sig: Vec<f64> = pts.iter().map(|p| p.stderr).collect();
    let (w, method) = extrapolation_weights(&cs, &sig, order)?;
    let estimate: f64 = w.iter().zip(pts).map(|(w, p)| w * p.value).sum();
    let stderr = w
        .iter()
        .zip(pts)
        .map(|(w, p)| (w * p.stderr).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(MitigatedValue {
        estimate,
        stderr,
        order,
        method,
        unphysical: estimate.abs() > 1.0,
    })
}

/// `(⊗ A_q^{-1}) p`, qubit by qubit.
pub fn readout_mitigate(probs: &[f64], confusion: &[Confusion]) -> Result<Vec<f64>> {
    if probs.len() != 1 << confusion.len() {
        return Err(Error::LengthMismatch {
            expected: 1 << confusion.len(),
            found: probs.len(),
        });
    }
    let mut out = probs.to_vec();
    for (q, a) in confusion.iter().enumerate() {
        let inv = a.inverse().ok_or(Error::SingularConfusion(q))?;
        apply_on_bit(&mut out, q, &inv);
    }
    Ok(out)
}

/// Readout-corrected expectation of `p` from counts. `confusion[i]`
/// belongs to `counts.qubits[i]`. Only the observable's support is
/// corrected, which equals correcting the full distribution and then
/// marginalizing.
pub fn corrected_expectation(counts: &Counts, confusion: &[Confusion], p: &PauliString) -> Result<f64> {
    let support = counts.support(p)?;
    let local = counts.marginal_distribution(&support)?;
    let conf: Vec<Confusion> = support.iter().map(|&i| confusion[i]).collect();
    let fixed = readout_mitigate(&local, &conf)?;
    Ok(fixed
        .iter()
        .enumerate()
        .map(|(k, v)| if k.count_ones() % 2 == 0 { *v } else { -*v })
        .sum())
}

/// Binomial standard error of a ±1-valued mean.
pub fn binomial_stderr(expectation: f64, shots: u64) -> f64 {
    ((1.0 - expectation * expectation).max(0.0) / shots as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapResult<T> {
    pub samples: Vec<T>,
}

impl BootstrapResult<f64> {
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Sample standard deviation (n - 1 denominator).
    pub fn std(&self) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        (self.samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

/// Multinomial resample of `counts` with the same total.
pub fn resample(counts: &Counts, seed: u64, path: &[u64]) -> Result<Counts> {
    if counts.total == 0 {
        return Err(Error::EmptyCounts);
    }
    let keys: Vec<u64> = counts.shots.keys().copied().collect();
    let probs: Vec<f64> = counts.shots.values().map(|&k| k as f64 / counts.total as f64).collect();
    let mut rng = rng_from(seed, path);
    let mut out = Counts::new(counts.qubits.clone(), counts.bases.clone(), seed);
    for (i, k) in sample_counts(&probs, counts.total, &mut rng) {
        out.record(keys[i as usize], k);
    }
    Ok(out)
}

/// Resamples every element of `data` independently `resamples` times and
/// evaluates `pipeline` on each resampled set. Resample `r`, element `i`
/// uses the stream `(seed, [r, i])`.
pub fn bootstrap<T>(
    data: &[Counts],
    resamples: usize,
    seed: u64,
    mut pipeline: impl FnMut(&[Counts]) -> Result<T>,
) -> Result<BootstrapResult<T>> {
    if resamples == 0 {
        return Err(Error::InvalidParameter("at least one resample".into()));
    }
    if data.is_empty() || data.iter().any(|c| c.total == 0) {
        return Err(Error::EmptyCounts);
    }
    let mut samples = Vec::with_capacity(resamples);
    for r in 0..resamples {
        let set = data
            .iter()
            .enumerate()
            .map(|(i, c)| resample(c, seed, &[r as u64, i as u64]))
            .collect::<Result<Vec<_>>>()?;
        samples.push(pipeline(&set)?);
    }
    Ok(BootstrapResult { samples })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceEstimate {
    pub value: f64,
    pub stderr: f64,
    pub shots: u64,
}

/// Shot-weighted mean over twirl instances with the matching pooled
/// standard error.
pub fn average_twirl_instances(items: &[InstanceEstimate]) -> Result<InstanceEstimate> {
    let total: u64 = items.iter().map(|i| i.shots).sum();
    if items.is_empty() || total == 0 {
        return Err(Error::EmptyCounts);
    }
    let t = total as f64;
    let value = items.iter().map(|i| i.value * i.shots as f64 / t).sum();
    let stderr = items
        .iter()
        .map(|i| (i.stderr * i.shots as f64 / t).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(InstanceEstimate {
        value,
        stderr,
        shots: total,
    })
}

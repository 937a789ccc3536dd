use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator_norm;
use crate::calculus::{default_t_sequence, horizontal_gradient, pansu_differential, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::metric::HomogeneousNorm;
use crate::mollify::fit_slope;
use crate::sampling::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Finite,
    Infinite,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularConfig {
    pub q: f64,
    pub n_min: i32,
    pub n_max: i32,
    pub samples: usize,
    pub seed: u64,
    pub margin: f64,
    /// Finite-difference step at unit scale; shrunk with the annulus.
    pub fd: FdConfig,
    /// Pansu scales at unit scale; shrunk with the annulus.
    pub t_sequence: Vec<f64>,
    /// Relative Pansu disagreement above which a sample is excluded.
    pub stability_tol: f64,
}

impl Default for AnnularConfig {
    fn default() -> Self {
        Self {
            q: 2.0,
            n_min: 1,
            n_max: 12,
            samples: 10_000,
            seed: 42,
            margin: 0.1,
            fd: FdConfig::default(),
            t_sequence: default_t_sequence(),
            stability_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    pub q: f64,
    pub homogeneous_dimension: usize,
    pub n: Vec<i32>,
    /// `|A_n|` times the mean of `|D_H f|^q` over the valid samples of
    /// annulus `n`.
    pub sums: Vec<f64>,
    /// Slope of `log2 S_n` against `n`.
    pub slope: f64,
    pub margin: f64,
    pub verdict: Verdict,
    pub samples_per_annulus: usize,
    pub excluded: usize,
    pub unreliable: bool,
    pub unit_annulus_measure: f64,
}

pub const MAX_EXCLUDED_FRACTION: f64 = 0.2;

/// Samples the unit annulus `{1 <= N < 2}` once and reuses dilated copies
/// on every annulus `2^-n <= N < 2^{1-n}`, so the measure factor is exactly
/// `2^{-nQ}`.
pub fn lq_annular_classify<M: GroupMap + ?Sized>(f: &M, config: &AnnularConfig) -> Result<IntegrabilityReport> {
    if !(config.q > 0.0) {
        return Err(CarnotError::InvalidParameter(format!("q must be positive, got {}", config.q)));
    }
    if config.n_max < config.n_min || config.samples == 0 {
        return Err(CarnotError::InvalidParameter("empty annulus range or sample count".into()));
    }
    let g = f.source();
    let norm = HomogeneousNorm::default_for(g);
    let boxes: Vec<(f64, f64)> = norm
        .unit_box(g)
        .iter()
        .enumerate()
        .map(|(c, (a, b))| {
            let s = 2f64.powi(g.spec().layer_of(c) as i32);
            (a * s, b * s)
        })
        .collect();
    let box_volume: f64 = boxes.iter().map(|(a, b)| b - a).product();
    let mut r = rng(config.seed);
    let mut unit = Vec::with_capacity(config.samples);
    let mut draws = 0usize;
    while unit.len() < config.samples {
        draws += 1;
        if draws > config.samples * 1000 {
            return Err(CarnotError::Degenerate("annulus sampler rejected almost every draw".into()));
        }
        let u: Vec<f64> = boxes.iter().map(|(a, b)| r.random_range(*a..*b)).collect();
        let n = norm.eval(g, &u);
        if (1.0..2.0).contains(&n) {
            unit.push(u);
        }
    }
    let unit_measure = box_volume * config.samples as f64 / draws as f64;
    let qd = g.homogeneous_dimension();

    let mut ns = Vec::new();
    let mut sums = Vec::new();
    let mut excluded = 0usize;
    for n in config.n_min..=config.n_max {
        let scale = 2f64.powi(-n);
        let fd = FdConfig {
            h: config.fd.h * scale,
            ..config.fd
        };
        let ts: Vec<f64> = config.t_sequence.iter().map(|t| t * scale).collect();
        let values: Vec<Option<f64>> = unit
            .par_iter()
            .map(|u| {
                let mut p = u.clone();
                g.dilate_in_place(scale, &mut p);
                sample_value(f, &p, fd, &ts, config)
            })
            .collect();
        let valid: Vec<f64> = values.iter().flatten().copied().collect();
        excluded += values.len() - valid.len();
        if valid.is_empty() {
            return Err(CarnotError::Degenerate(format!("no stable samples on annulus {n}")));
        }
        let mean = valid.iter().sum::<f64>() / valid.len() as f64;
        ns.push(n);
        sums.push(unit_measure * scale.powi(qd as i32) * mean);
    }
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let ys: Vec<f64> = sums.iter().map(|s| s.log2()).collect();
    let slope = fit_slope(&xs, &ys);
    let verdict = if slope < -config.margin {
        Verdict::Finite
    } else if slope > config.margin {
        Verdict::Infinite
    } else {
        Verdict::Inconclusive
    };
    let total = config.samples * ns.len();
    Ok(IntegrabilityReport {
        q: config.q,
        homogeneous_dimension: qd,
        n: ns,
        sums,
        slope,
        margin: config.margin,
        verdict,
        samples_per_annulus: config.samples,
        excluded,
        unreliable: excluded as f64 > MAX_EXCLUDED_FRACTION * total as f64,
        unit_annulus_measure: unit_measure,
    })
}

fn sample_value<M: GroupMap + ?Sized>(f: &M, p: &[f64], fd: FdConfig, ts: &[f64], config: &AnnularConfig) -> Option<f64> {
    let pansu = pansu_differential(f, p, ts).ok()?;
    let scale = pansu
        .matrix
        .entries
        .iter()
        .flatten()
        .fold(1.0f64, |a, x| a.max(x.abs()));
    if !(pansu.disagreement <= config.stability_tol * scale) {
        return None;
    }
    let d = horizontal_gradient(f, p, fd).ok()?;
    let v = operator_norm(&d).powf(config.q);
    v.is_finite().then_some(v)
}

/// Measured verdict for the patched inversion against the printed
/// `eps < 2 - exp(-(2n+2)/(2n+1))` condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatchedComparison {
    pub eps: f64,
    pub q: f64,
    pub printed_bound: f64,
    pub printed_predicts_finite: bool,
    /// `2q - q log2(2 - eps) - Q`.
    pub predicted_slope: f64,
    /// `eps` at which the predicted slope changes sign.
    pub empirical_threshold: f64,
    pub measured_slope: f64,
    pub measured: Verdict,
    pub agree: bool,
}

pub fn patched_comparison(heisenberg_n: usize, eps: f64, report: &IntegrabilityReport) -> PatchedComparison {
    let n = heisenberg_n as f64;
    let q = report.q;
    let qd = report.homogeneous_dimension as f64;
    let printed_bound = 2.0 - (-(2.0 * n + 2.0) / (2.0 * n + 1.0)).exp();
    let printed_predicts_finite = eps < printed_bound;
    let measured_finite = report.verdict == Verdict::Finite;
    PatchedComparison {
        eps,
        q,
        printed_bound,
        printed_predicts_finite,
        predicted_slope: 2.0 * q - q * (2.0 - eps).log2() - qd,
        empirical_threshold: 2.0 - 2f64.powf((2.0 * q - qd) / q),
        measured_slope: report.slope,
        measured: report.verdict,
        agree: report.verdict != Verdict::Inconclusive && printed_predicts_finite == measured_finite,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::MapDescriptor;
    use crate::group::CarnotGroup;

    #[test]
    fn identity_slope_is_measure_decay() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let f = MapDescriptor::identity(&g);
        let cfg = AnnularConfig {
            q: 2.0,
            n_max: 4,
            samples: 200,
            ..AnnularConfig::default()
        };
        let r = lq_annular_classify(&f, &cfg).unwrap();
        assert!((r.slope + 4.0).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Finite);
        assert_eq!(r.excluded, 0);
    }
}

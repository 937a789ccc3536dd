//! Homogeneous norms, the layerwise quasi-metric `d_K`, horizontal curve
//! length and Euclidean comparability diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::group::CarnotGroup;
use crate::sampling::{rng, uniform_in_box};

/// `d_K(p, q) = sum_j |(q^{-1} p)_j|^{1/w_j}` with `w_j` the layer of `j`.
pub fn quasi_metric_dk(g: &CarnotGroup, p: &[f64], q: &[f64]) -> Result<f64> {
    g.check(p)?;
    g.check(q)?;
    let mut x = vec![0.0; g.dim()];
    g.left_quotient_into(q, p, &mut x);
    Ok(layerwise(g, &x))
}

fn layerwise(g: &CarnotGroup, x: &[f64]) -> f64 {
    let spec = g.spec();
    (1..=spec.step())
        .map(|k| {
            x[spec.layer_range(k)]
                .iter()
                .map(|c| c.abs().powf(1.0 / k as f64))
                .sum::<f64>()
        })
        .sum()
}

/// `d_K(p, e)`.
pub fn layerwise_norm(g: &CarnotGroup, p: &[f64]) -> f64 {
    layerwise(g, p)
}

/// `((|z|^2)^2 + 16 t^2)^{1/4}` on a Heisenberg group.
pub fn koranyi_norm(g: &CarnotGroup, p: &[f64]) -> Result<f64> {
    if g.spec().heisenberg_rank().is_none() {
        return Err(CarnotError::NotHeisenberg);
    }
    g.check(p)?;
    Ok(koranyi_unchecked(p))
}

pub(crate) fn koranyi_unchecked(p: &[f64]) -> f64 {
    let n = p.len() - 1;
    let z2: f64 = p[..n].iter().map(|x| x * x).sum();
    let t = p[n];
    (z2 * z2 + 16.0 * t * t).sqrt().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomogeneousNorm {
    Koranyi,
    Layerwise,
}

impl HomogeneousNorm {
    /// Korányi on Heisenberg groups, layerwise elsewhere.
    pub fn default_for(g: &CarnotGroup) -> Self {
        if g.spec().heisenberg_rank().is_some() {
            HomogeneousNorm::Koranyi
        } else {
            HomogeneousNorm::Layerwise
        }
    }

    pub fn eval(self, g: &CarnotGroup, p: &[f64]) -> f64 {
        match self {
            HomogeneousNorm::Koranyi => koranyi_unchecked(p),
            HomogeneousNorm::Layerwise => layerwise(g, p),
        }
    }

    /// Distance `N(q^{-1} p)`.
    pub fn distance(self, g: &CarnotGroup, p: &[f64], q: &[f64]) -> f64 {
        let mut x = vec![0.0; g.dim()];
        g.left_quotient_into(q, p, &mut x);
        self.eval(g, &x)
    }

    /// Coordinate box containing the unit ball.
    pub fn unit_box(self, g: &CarnotGroup) -> Vec<(f64, f64)> {
        match self {
            HomogeneousNorm::Koranyi => {
                let n = g.dim() - 1;
                let mut b = vec![(-1.0, 1.0); n];
                b.push((-0.25, 0.25));
                b
            }
            HomogeneousNorm::Layerwise => vec![(-1.0, 1.0); g.dim()],
        }
    }
}

/// Trapezoidal integral of the Euclidean norm of left-trivialised
/// horizontal velocities sampled at `times`.
pub fn horizontal_length(g: &CarnotGroup, times: &[f64], velocities: &[Vec<f64>]) -> Result<f64> {
    if times.len() != velocities.len() {
        return Err(CarnotError::DimensionMismatch {
            expected: times.len(),
            got: velocities.len(),
        });
    }
    let m = g.rank();
    let mut speeds = Vec::with_capacity(times.len());
    for v in velocities {
        g.check(v)?;
        if let Some(x) = v[m..].iter().find(|x| x.abs() > 1e-9) {
            return Err(CarnotError::InvalidParameter(format!(
                "velocity has a non-horizontal component {x}"
            )));
        }
        speeds.push(v[..m].iter().map(|x| x * x).sum::<f64>().sqrt());
    }
    Ok(times
        .windows(2)
        .zip(speeds.windows(2))
        .map(|(t, s)| 0.5 * (t[1] - t[0]) * (s[0] + s[1]))
        .sum())
}

/// Empirical constants for `|p-q| / C_low <= d_K(p,q) <= C_high |p-q|^{1/s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Comparability {
    pub c_low: f64,
    pub c_high: f64,
    pub pairs: usize,
}

/// Fits both constants over `samples` seeded pairs in `[lo, hi]^N`.
/// Constants are clamped below by 1.
pub fn comparability_fit(g: &CarnotGroup, lo: f64, hi: f64, samples: usize, seed: u64) -> Result<Comparability> {
    if !(hi > lo) {
        return Err(CarnotError::Degenerate(format!("box [{lo}, {hi}] is empty")));
    }
    if samples == 0 {
        return Err(CarnotError::InvalidParameter("need at least one pair".into()));
    }
    let mut r = rng(seed);
    let pairs: Vec<_> = (0..samples)
        .map(|_| {
            (
                uniform_in_box(&mut r, g.dim(), lo, hi),
                uniform_in_box(&mut r, g.dim(), lo, hi),
            )
        })
        .collect();
    Ok(fit_pairs(g, pairs.iter().map(|(p, q)| (&p[..], &q[..]))))
}

pub(crate) fn fit_pairs<'a>(g: &CarnotGroup, pairs: impl Iterator<Item = (&'a [f64], &'a [f64])>) -> Comparability {
    let s = g.step() as f64;
    let mut c_low = 1.0f64;
    let mut c_high = 1.0f64;
    let mut count = 0;
    for (p, q) in pairs {
        count += 1;
        let e: f64 = p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        if e == 0.0 {
            continue;
        }
        let mut x = vec![0.0; g.dim()];
        g.left_quotient_into(q, p, &mut x);
        let d = layerwise(g, &x);
        c_low = c_low.max(e / d);
        c_high = c_high.max(d / e.powf(1.0 / s));
    }
    Comparability {
        c_low,
        c_high,
        pairs: count,
    }
}

/// Smallest `c` with `d_K(p,r) <= c (d_K(p,q) + d_K(q,r))` over seeded
/// triples in `[lo, hi]^N`.
pub fn quasi_triangle_constant(g: &CarnotGroup, lo: f64, hi: f64, triples: usize, seed: u64) -> Result<f64> {
    if !(hi > lo) {
        return Err(CarnotError::Degenerate(format!("box [{lo}, {hi}] is empty")));
    }
    let mut r = rng(seed);
    let mut c = 0.0f64;
    for _ in 0..triples {
        let p = uniform_in_box(&mut r, g.dim(), lo, hi);
        let q = uniform_in_box(&mut r, g.dim(), lo, hi);
        let s = uniform_in_box(&mut r, g.dim(), lo, hi);
        let lhs = quasi_metric_dk(g, &p, &s)?;
        let rhs = quasi_metric_dk(g, &p, &q)? + quasi_metric_dk(g, &q, &s)?;
        if rhs > 0.0 {
            c = c.max(lhs / rhs);
        }
    }
    Ok(c)
}

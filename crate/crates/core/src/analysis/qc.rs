use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::operator_norm;
use crate::calculus::{horizontal_gradient, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};
use crate::metric::{quasi_metric_dk, HomogeneousNorm};
use crate::sampling::{rng, unit_sphere_point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionSample {
    pub r: f64,
    pub max: f64,
    pub min: f64,
    /// `max / min`.
    pub h: f64,
}

/// Unit-sphere directions: normalised `+-e_i` followed by seeded samples.
fn sphere_directions(g: &CarnotGroup, norm: HomogeneousNorm, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::with_capacity(2 * g.dim() + count);
    for i in 0..g.dim() {
        for sign in [1.0, -1.0] {
            let mut e = vec![0.0; g.dim()];
            e[i] = sign;
            let n = norm.eval(g, &e);
            g.dilate_in_place(1.0 / n, &mut e);
            dirs.push(e);
        }
    }
    let mut r = rng(seed);
    dirs.extend((0..count).map(|_| unit_sphere_point(g, norm, &mut r).into_inner()));
    dirs
}

/// Metric distortion `H(x, f, r)` over the sphere of radius `r` around `x`.
/// Distances use the Korányi gauge on Heisenberg groups and `d_K`
/// elsewhere.
pub fn distortion_estimate<M: GroupMap + ?Sized>(
    f: &M,
    x: &[f64],
    r_list: &[f64],
    directions: usize,
    seed: u64,
) -> Result<Vec<DistortionSample>> {
    let g = f.source();
    let gt = f.target();
    if r_list.is_empty() || r_list.iter().any(|r| !(*r > 0.0)) {
        return Err(CarnotError::InvalidParameter("radii must be positive".into()));
    }
    let norm = HomogeneousNorm::default_for(g);
    let tnorm = HomogeneousNorm::default_for(gt);
    let dirs = sphere_directions(g, norm, directions, seed);
    let fx = f.apply(x)?;
    let mut out = Vec::with_capacity(r_list.len());
    let mut q = vec![0.0; g.dim()];
    for &r in r_list {
        let mut hi = 0.0f64;
        let mut lo = f64::INFINITY;
        for u in &dirs {
            let mut step = u.clone();
            g.dilate_in_place(r, &mut step);
            g.multiply_into(x, &step, &mut q);
            let d = tnorm.distance(gt, &f.apply(&q)?, &fx);
            hi = hi.max(d);
            lo = lo.min(d);
        }
        out.push(DistortionSample {
            r,
            max: hi,
            min: lo,
            h: hi / lo,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcConfig {
    pub k_target: f64,
    pub fd: FdConfig,
    /// Grid points (from the front) that also get a distortion sample.
    pub distortion_points: usize,
    pub r_list: Vec<f64>,
    pub directions: usize,
    pub seed: u64,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self {
            k_target: 1.05,
            fd: FdConfig::default(),
            distortion_points: 10,
            r_list: vec![1e-2, 1e-3],
            directions: 64,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    /// Smallest `K` with `|D_H f|^m <= K |det D_H f|` over the grid.
    pub k: f64,
    pub k_target: f64,
    pub points: usize,
    /// Points with a singular horizontal block.
    pub excluded: usize,
    /// Distortion at the smallest radius for each sampled point.
    pub distortion: Vec<DistortionSample>,
    pub h_max: f64,
    pub pass: bool,
}

pub fn qc_certificate<M: GroupMap + ?Sized>(f: &M, grid: &[Point], config: &QcConfig) -> Result<QcReport> {
    if grid.is_empty() {
        return Err(CarnotError::InvalidParameter("empty grid".into()));
    }
    let m = f.source().rank() as i32;
    let ks: Vec<Option<f64>> = grid
        .par_iter()
        .map(|p| {
            let d = horizontal_gradient(f, p, config.fd)?;
            if d.nrows() != d.ncols() {
                return Err(CarnotError::Degenerate("horizontal block is not square".into()));
            }
            let n = operator_norm(&d).powi(m);
            let det = d.determinant().abs();
            Ok((det > 1e-12 * n && n.is_finite()).then(|| n / det))
        })
        .collect::<Result<_>>()?;
    let excluded = ks.iter().filter(|k| k.is_none()).count();
    let k = ks.iter().flatten().copied().fold(f64::NAN, f64::max);
    let distortion: Vec<DistortionSample> = grid
        .iter()
        .take(config.distortion_points)
        .map(|p| {
            distortion_estimate(f, p, &config.r_list, config.directions, config.seed)
                .map(|mut s| s.pop().expect("non-empty radii"))
        })
        .collect::<Result<_>>()?;
    let h_max = distortion.iter().map(|s| s.h).fold(f64::NAN, f64::max);
    let pass = k <= config.k_target && distortion.iter().all(|s| s.h.is_finite());
    Ok(QcReport {
        k,
        k_target: config.k_target,
        points: grid.len(),
        excluded,
        distortion,
        h_max,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub r_squared: f64,
    pub pairs: usize,
    pub skipped: usize,
}

/// Least-squares slope of `log d_K(f(x), f(y))` against `log d_K(x, y)`
/// over seeded pairs `x, y = center * delta_rho u` with `rho`
/// log-uniform in `[rmin, rmax]`. Pairs outside the map domain are skipped.
pub fn holder_estimate<M: GroupMap + ?Sized>(
    f: &M,
    center: &[f64],
    pairs: usize,
    rmin: f64,
    rmax: f64,
    seed: u64,
) -> Result<HolderFit> {
    let g = f.source();
    let gt = f.target();
    if !(rmin > 0.0 && rmax > rmin) {
        return Err(CarnotError::Degenerate(format!("scale range [{rmin}, {rmax}]")));
    }
    let norm = HomogeneousNorm::default_for(g);
    let mut r = rng(seed);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut skipped = 0;
    let sample = |r: &mut rand_chacha::ChaCha8Rng| {
        let rho = rmin * (rmax / rmin).powf(r.random::<f64>());
        let mut u = unit_sphere_point(g, norm, r).into_inner();
        g.dilate_in_place(rho, &mut u);
        let mut p = vec![0.0; g.dim()];
        g.multiply_into(center, &u, &mut p);
        p
    };
    for _ in 0..pairs {
        let x = sample(&mut r);
        let y = sample(&mut r);
        let d = quasi_metric_dk(g, &x, &y)?;
        let image = f.apply(&x).and_then(|fx| Ok((fx, f.apply(&y)?)));
        match image {
            Ok((fx, fy)) if d > 0.0 => {
                let dd = quasi_metric_dk(gt, &fx, &fy)?;
                if dd > 0.0 && dd.is_finite() {
                    xs.push(d.ln());
                    ys.push(dd.ln());
                } else {
                    skipped += 1;
                }
            }
            _ => skipped += 1,
        }
    }
    if xs.len() < 2 {
        return Err(CarnotError::Degenerate("fewer than two usable pairs".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(CarnotError::Degenerate("all pairs at the same distance".into()));
    }
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(HolderFit {
        exponent: sxy / sxx,
        r_squared,
        pairs: xs.len(),
        skipped,
    })
}

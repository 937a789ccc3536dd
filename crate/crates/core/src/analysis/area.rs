use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::coordinate_jacobian;
use crate::algebra::AlgebraSpec;
use crate::calculus::{graded_automorphism, horizontal_gradient, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::sampling::rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AreaDomain {
    /// Unit ball in the horizontal coordinates of h^n times `[0, height]`.
    HeisenbergSlab { height: f64 },
    /// Coordinate box `[lo, hi]^N` on a filiform group.
    FiliformBox { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaConfig {
    pub order: usize,
    /// Replaces the printed Jacobian exponent on Heisenberg slabs.
    pub exponent_override: Option<f64>,
    /// Monte Carlo points for horizontal balls of dimension above two.
    pub mc_samples: usize,
    pub seed: u64,
    pub fd: FdConfig,
}

impl Default for AreaConfig {
    fn default() -> Self {
        Self {
            order: 12,
            exponent_override: None,
            mc_samples: 4000,
            seed: 42,
            fd: FdConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AreaReport {
    pub domain: AreaDomain,
    pub domain_volume: f64,
    /// Value with the printed exponents (or the override).
    pub value: f64,
    /// Exponents applied to the slice Jacobian (slab) or to
    /// `(X_1 f^{x_1}, X_2 f^{x_2})` (box).
    pub exponents: Vec<f64>,
    /// Value with exponents consistent with the image measure scaling.
    pub consistent_value: f64,
    pub consistent_exponents: Vec<f64>,
    /// `jacobian * volume` when the caller knows the exact Jacobian.
    pub exact: Option<f64>,
    /// `|value - exact| / |exact|`.
    pub relative_gap: Option<f64>,
    pub exponent_mismatch: bool,
}

fn gauss(order: usize) -> Result<GaussLegendre> {
    NonZeroUsize::new(order)
        .map(GaussLegendre::new)
        .ok_or_else(|| CarnotError::InvalidParameter("quadrature order must be positive".into()))
}

/// Nodes and weights of `[a, b]`.
fn interval(rule: &GaussLegendre, a: f64, b: f64) -> Vec<(f64, f64)> {
    rule.as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| (0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w))
        .collect()
}

fn unit_ball_volume(dim: usize) -> f64 {
    // pi^{d/2} / Gamma(d/2 + 1), even d only
    let n = dim / 2;
    std::f64::consts::PI.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>()
}

/// Quadrature of the area-formula integrand over the domain. `exact_jacobian`
/// is the Jacobian of the map when it is a graded automorphism.
pub fn area_integral<M: GroupMap + ?Sized>(
    f: &M,
    domain: AreaDomain,
    config: &AreaConfig,
    exact_jacobian: Option<f64>,
) -> Result<AreaReport> {
    let g = f.source();
    let rule = gauss(config.order)?;
    match domain {
        AreaDomain::HeisenbergSlab { height } => {
            let n = g.spec().heisenberg_rank().ok_or(CarnotError::NotHeisenberg)?;
            if !(height > 0.0) {
                return Err(CarnotError::InvalidParameter("slab height must be positive".into()));
            }
            let m = 2 * n;
            let printed = config.exponent_override.unwrap_or(2.0);
            let consistent = (n as f64 + 1.0) / n as f64;
            // horizontal nodes with weights summing to the ball volume
            let disk: Vec<(Vec<f64>, f64)> = if n == 1 {
                let radial = interval(&rule, 0.0, 1.0);
                let k = 2 * config.order;
                let mut out = Vec::with_capacity(radial.len() * k);
                for &(r, w) in &radial {
                    for j in 0..k {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
                        out.push((vec![r * th.cos(), r * th.sin()], w * r * 2.0 * std::f64::consts::PI / k as f64));
                    }
                }
                out
            } else {
                let mut r = rng(config.seed);
                let vol = unit_ball_volume(m);
                let w = vol / config.mc_samples as f64;
                let mut out = Vec::with_capacity(config.mc_samples);
                while out.len() < config.mc_samples {
                    let z: Vec<f64> = (0..m).map(|_| r.random_range(-1.0..1.0)).collect();
                    if z.iter().map(|x| x * x).sum::<f64>() < 1.0 {
                        out.push((z, w));
                    }
                }
                out
            };
            let heights = interval(&rule, 0.0, height);
            let inputs: Vec<usize> = (0..m).collect();
            let mut value = 0.0;
            let mut consistent_value = 0.0;
            for (z, wz) in &disk {
                for &(t, wt) in &heights {
                    let mut p = z.clone();
                    p.push(t);
                    let det = coordinate_jacobian(f, &p, &inputs, &inputs, config.fd)?
                        .determinant()
                        .abs();
                    value += wz * wt * det.powf(printed);
                    consistent_value += wz * wt * det.powf(consistent);
                }
            }
            let volume = unit_ball_volume(m) * height;
            let exact = exact_jacobian.map(|j| j.abs() * volume);
            Ok(AreaReport {
                domain,
                domain_volume: volume,
                value,
                exponents: vec![printed],
                consistent_value,
                consistent_exponents: vec![consistent],
                exact,
                relative_gap: exact.map(|e| (value - e).abs() / e.abs()),
                exponent_mismatch: (printed - consistent).abs() > 1e-12,
            })
        }
        AreaDomain::FiliformBox { lo, hi } => {
            let spec = g.spec();
            if spec.layer_dims()[0] != 2 || spec.layer_dims()[1..].iter().any(|&d| d != 1) {
                return Err(CarnotError::InvalidParameter("box area needs a filiform group".into()));
            }
            if !(hi > lo) {
                return Err(CarnotError::Degenerate(format!("box [{lo}, {hi}] is empty")));
            }
            let s = spec.step() as f64;
            let ea = (s * s - s + 2.0) / 2.0;
            let printed = [ea, s - 1.0];
            let consistent = [ea, s];
            let axis = interval(&rule, lo, hi);
            let dim = g.dim();
            let mut idx = vec![0usize; dim];
            let mut value = 0.0;
            let mut consistent_value = 0.0;
            'grid: loop {
                let p: Vec<f64> = idx.iter().map(|&i| axis[i].0).collect();
                let w: f64 = idx.iter().map(|&i| axis[i].1).product();
                let d = horizontal_gradient(f, &p, config.fd)?;
                let (x1, x2) = (d[(0, 0)], d[(1, 1)]);
                value += w * x1.powf(printed[0]) * x2.powf(printed[1]);
                consistent_value += w * x1.powf(consistent[0]) * x2.powf(consistent[1]);
                for c in 0..dim {
                    idx[c] += 1;
                    if idx[c] < axis.len() {
                        continue 'grid;
                    }
                    idx[c] = 0;
                }
                break;
            }
            let volume = (hi - lo).powi(dim as i32);
            let exact = exact_jacobian.map(|j| j.abs() * volume);
            Ok(AreaReport {
                domain,
                domain_volume: volume,
                value,
                exponents: printed.to_vec(),
                consistent_value,
                consistent_exponents: consistent.to_vec(),
                exact,
                relative_gap: exact.map(|e| (value - e).abs() / e.abs()),
                exponent_mismatch: true,
            })
        }
    }
}

/// Determinant bookkeeping for `auto(diag(a, c))` on the filiform algebra
/// of step `n`, set against the printed exponents
/// `a^{(n^2-n+2)/2} c^{n-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiliformArea {
    pub n: usize,
    pub a: f64,
    pub c: f64,
    pub layer_dets: Vec<f64>,
    pub layer_product: f64,
    /// Determinant of the full graded matrix.
    pub direct_det: f64,
    pub printed_exponents: (f64, f64),
    pub printed_det: f64,
    pub layer_exponents: (f64, f64),
    pub volume: f64,
    pub printed_area: f64,
    pub layer_area: f64,
    pub mismatch: bool,
}

pub fn filiform_area(n: usize, a: f64, c: f64, volume: f64) -> Result<FiliformArea> {
    let spec = AlgebraSpec::filiform(n)?;
    let block = DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, c]);
    let aut = graded_automorphism(&spec, &block)?;
    let layer_product = aut.det();
    let direct_det = aut.matrix.determinant();
    let nf = n as f64;
    let ea = (nf * nf - nf + 2.0) / 2.0;
    let printed_exponents = (ea, nf - 1.0);
    let printed_det = a.powf(ea) * c.powf(nf - 1.0);
    Ok(FiliformArea {
        n,
        a,
        c,
        layer_dets: aut.layer_dets.clone(),
        layer_product,
        direct_det,
        printed_exponents,
        printed_det,
        layer_exponents: (ea, nf),
        volume,
        printed_area: printed_det * volume,
        layer_area: layer_product * volume,
        mismatch: (printed_det - layer_product).abs() > 1e-12 * layer_product.abs().max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnboundednessReport {
    pub levels: Vec<f64>,
    pub areas: Vec<f64>,
    /// `area_i / area_0`.
    pub ratios: Vec<f64>,
    /// Ratios within 10% of `h_i / h_0`.
    pub linear: bool,
    pub verdict: String,
}

/// Area integrals over slabs of increasing height.
pub fn unboundedness_probe<M: GroupMap + ?Sized>(f: &M, levels: &[f64], config: &AreaConfig) -> Result<UnboundednessReport> {
    if levels.is_empty() || levels.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CarnotError::InvalidParameter("levels must be increasing".into()));
    }
    let areas: Vec<f64> = levels
        .iter()
        .map(|&h| area_integral(f, AreaDomain::HeisenbergSlab { height: h }, config, None).map(|r| r.value))
        .collect::<Result<_>>()?;
    let zero = areas.iter().all(|a| a.abs() < 1e-12);
    let ratios: Vec<f64> = areas.iter().map(|a| a / areas[0]).collect();
    let linear = !zero
        && ratios
            .iter()
            .zip(levels)
            .all(|(r, h)| (r - h / levels[0]).abs() <= 0.1 * h / levels[0]);
    let verdict = if zero {
        "bounded-compatible"
    } else if linear {
        "divergent"
    } else {
        "inconclusive"
    };
    Ok(UnboundednessReport {
        levels: levels.to_vec(),
        areas,
        ratios,
        linear,
        verdict: verdict.into(),
    })
}

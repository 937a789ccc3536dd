use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coordinate_jacobian;
use crate::calculus::{flow, horizontal_gradient, restricted_gradient, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::group::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariancePoint {
    pub point: Point,
    pub det: Option<f64>,
    /// `|Z det(D_H f)|` at the point.
    pub residual: Option<f64>,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// 0-based basis index of the vertical field.
    pub z: usize,
    pub subset: Option<Vec<usize>>,
    pub points: Vec<InvariancePoint>,
    /// Over stable points only.
    pub max_residual: f64,
    pub unstable: usize,
}

/// Central difference of `det(D_H f)` (or of the block restricted to
/// `subset`) along the flow of `Z`, with step `step` and one Richardson
/// step; the inner gradient uses `fd`.
pub fn invariance_check<M: GroupMap + ?Sized>(
    f: &M,
    z: usize,
    grid: &[Point],
    step: f64,
    fd: FdConfig,
    subset: Option<&[usize]>,
) -> Result<InvarianceReport> {
    let g = f.source();
    if z >= g.dim() || g.spec().layer_of(z) < 2 {
        return Err(CarnotError::InvalidParameter(format!(
            "direction {} is not vertical",
            z + 1
        )));
    }
    if let Some(s) = subset {
        let m = g.rank().min(f.target().rank());
        if s.is_empty() || s.iter().any(|&i| i >= m) {
            return Err(CarnotError::InvalidParameter("subset must index horizontal directions".into()));
        }
    }
    if !(step > 0.0) {
        return Err(CarnotError::InvalidParameter("step must be positive".into()));
    }
    let det_at = |q: &[f64]| -> Result<f64> {
        let d = match subset {
            Some(s) => restricted_gradient(f, q, s, fd)?,
            None => horizontal_gradient(f, q, fd)?,
        };
        if d.nrows() != d.ncols() {
            return Err(CarnotError::DimensionMismatch {
                expected: d.nrows(),
                got: d.ncols(),
            });
        }
        Ok(d.determinant())
    };
    let points: Vec<InvariancePoint> = grid
        .par_iter()
        .map(|p| {
            let central = |h: f64| -> Result<f64> {
                Ok((det_at(&flow(g, p, z, h))? - det_at(&flow(g, p, z, -h))?) / (2.0 * h))
            };
            let outcome = (|| -> Result<(f64, f64, f64)> {
                let det = det_at(p)?;
                let coarse = central(step)?;
                let fine = central(step / 2.0)?;
                Ok((det, coarse, fine))
            })();
            match outcome {
                Ok((det, coarse, fine)) => {
                    let value = (4.0 * fine - coarse) / 3.0;
                    let stable = value.is_finite() && (fine - coarse).abs() <= 1e-3 * (1.0 + value.abs());
                    InvariancePoint {
                        point: p.clone(),
                        det: Some(det),
                        residual: Some(value.abs()),
                        stable,
                    }
                }
                Err(_) => InvariancePoint {
                    point: p.clone(),
                    det: None,
                    residual: None,
                    stable: false,
                },
            }
        })
        .collect();
    let unstable = points.iter().filter(|p| !p.stable).count();
    let max_residual = points
        .iter()
        .filter(|p| p.stable)
        .filter_map(|p| p.residual)
        .fold(0.0, f64::max);
    Ok(InvarianceReport {
        z,
        subset: subset.map(<[usize]>::to_vec),
        points,
        max_residual,
        unstable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub s_values: Vec<f64>,
    /// `dets[i][j]`: determinant at horizontal point `i` on slice `s_j`.
    pub dets: Vec<Vec<f64>>,
    /// Per horizontal point, `max_s - min_s` of the determinant.
    pub variations: Vec<f64>,
    pub max_variation: f64,
}

/// Variation across slices of `det D(pi o f(., s))`, where every vertical
/// coordinate of the source is set to `s` and `pi` keeps the horizontal
/// target coordinates.
pub fn slice_constancy<M: GroupMap + ?Sized>(
    f: &M,
    s_values: &[f64],
    horizontal: &[Vec<f64>],
    fd: FdConfig,
) -> Result<SliceReport> {
    let g = f.source();
    let m = g.rank();
    if f.target().rank() != m {
        return Err(CarnotError::Degenerate("slice Jacobian is not square".into()));
    }
    if s_values.is_empty() || horizontal.is_empty() {
        return Err(CarnotError::InvalidParameter("empty slice grid".into()));
    }
    let inputs: Vec<usize> = (0..m).collect();
    let dets: Vec<Vec<f64>> = horizontal
        .par_iter()
        .map(|z| {
            if z.len() != m {
                return Err(CarnotError::DimensionMismatch { expected: m, got: z.len() });
            }
            s_values
                .iter()
                .map(|&s| {
                    let mut p = z.clone();
                    p.resize(g.dim(), s);
                    Ok(coordinate_jacobian(f, &p, &inputs, &inputs, fd)?.determinant())
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let variations: Vec<f64> = dets
        .iter()
        .map(|row| {
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect();
    let max_variation = variations.iter().copied().fold(0.0, f64::max);
    Ok(SliceReport {
        s_values: s_values.to_vec(),
        dets,
        variations,
        max_variation,
    })
}

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{horizontal_gradient, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorPoint {
    pub point: Point,
    /// `energy[i][j]`: squared Frobenius norm of the block from source
    /// factor `i` to target factor `j`.
    pub energy: Vec<Vec<f64>>,
    pub sigma: Vec<usize>,
    /// Off-assignment energy over total energy.
    pub residual: f64,
    pub ambiguous: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorReport {
    /// Most frequent assignment over the grid.
    pub sigma: Vec<usize>,
    pub agreement: usize,
    pub ambiguous: usize,
    pub max_residual: f64,
    pub points: Vec<FactorPoint>,
}

/// Two assignments whose diagonal energies are this close are ambiguous.
pub const AMBIGUITY_RATIO: f64 = 0.95;

fn horizontal_factor_indices(g: &CarnotGroup) -> Result<Vec<Vec<usize>>> {
    let factors = g.spec().factors();
    if factors.len() < 2 {
        return Err(CarnotError::InvalidParameter(format!("{} is not a product group", g.spec().name())));
    }
    let m = g.rank();
    Ok(factors
        .iter()
        .map(|idx| idx.iter().copied().filter(|&i| i < m).collect())
        .collect())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Reads off the factor permutation from the block structure of `D_H f`.
/// All assignments are scored exhaustively.
pub fn factor_detect<M: GroupMap + ?Sized>(f: &M, grid: &[Point], fd: FdConfig) -> Result<FactorReport> {
    let src = horizontal_factor_indices(f.source())?;
    let tgt = horizontal_factor_indices(f.target())?;
    if src.len() != tgt.len() {
        return Err(CarnotError::Misaligned(format!(
            "{} source factors against {} target factors",
            src.len(),
            tgt.len()
        )));
    }
    if grid.is_empty() {
        return Err(CarnotError::InvalidParameter("empty grid".into()));
    }
    let k = src.len();
    let perms = permutations(k);
    let points: Vec<FactorPoint> = grid
        .par_iter()
        .map(|p| {
            let d = horizontal_gradient(f, p, fd)?;
            let energy: Vec<Vec<f64>> = src
                .iter()
                .map(|rows| {
                    tgt.iter()
                        .map(|cols| {
                            rows.iter()
                                .flat_map(|&r| cols.iter().map(move |&c| (r, c)))
                                .map(|(r, c)| d[(r, c)].powi(2))
                                .sum()
                        })
                        .collect()
                })
                .collect();
            let total: f64 = energy.iter().flatten().sum();
            let mut scored: Vec<(f64, &Vec<usize>)> = perms
                .iter()
                .map(|s| ((0..k).map(|i| energy[i][s[i]]).sum::<f64>(), s))
                .collect();
            // stable sort keeps lexicographic order among ties
            scored.sort_by(|a, b| b.0.total_cmp(&a.0));
            let best = scored[0].0;
            let ambiguous = best <= 0.0 || scored.get(1).is_some_and(|s| s.0 >= AMBIGUITY_RATIO * best);
            Ok(FactorPoint {
                point: p.clone(),
                sigma: scored[0].1.clone(),
                residual: if total > 0.0 { (total - best) / total } else { 0.0 },
                ambiguous,
                energy,
            })
        })
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<&[usize], usize> = BTreeMap::new();
    for p in points.iter().filter(|p| !p.ambiguous) {
        *counts.entry(&p.sigma).or_default() += 1;
    }
    let (sigma, agreement) = counts
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(s, c)| (s.to_vec(), *c))
        .unwrap_or_else(|| ((0..k).collect(), 0));
    Ok(FactorReport {
        sigma,
        agreement,
        ambiguous: points.iter().filter(|p| p.ambiguous).count(),
        max_residual: points.iter().map(|p| p.residual).fold(0.0, f64::max),
        points,
    })
}

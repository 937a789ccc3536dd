use serde::{Deserialize, Serialize};

use crate::calculus::{flow, GroupMap};
use crate::error::{CarnotError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerProfile {
    /// 0-based basis index of the curve direction.
    pub direction: usize,
    /// Layer (1-based) of the curve direction.
    pub curve_layer: usize,
    pub h_values: Vec<f64>,
    /// `energy[a][k]`: mean of `|c_k|^{1/(k+1)} / h^{1/i}` over the steps at
    /// `h_values[a]`, with `c_k` the layer-`(k+1)` part of the image
    /// increment.
    pub energy: Vec<Vec<f64>>,
    /// Per target layer: energy at the smallest `h` above `1e-3` and not
    /// decaying between the two smallest `h`.
    pub nonvanishing: Vec<bool>,
    /// Steps dropped because the map could not be evaluated.
    pub skipped: usize,
}

pub fn default_h_list() -> Vec<f64> {
    vec![1e-2, 2.5e-3, 6.25e-4, 1.5625e-4]
}

/// Increments `f(gamma(t))^{-1} f(gamma(t + h))` along `gamma(t) = start *
/// exp(t e_v)` for `t = s * span / steps`, split into layers and normalised
/// by the size `h^{1/i}` of the source increment.
pub fn curve_layer_probe<M: GroupMap + ?Sized>(
    f: &M,
    start: &[f64],
    direction: usize,
    steps: usize,
    span: f64,
    h_list: &[f64],
) -> Result<LayerProfile> {
    let g = f.source();
    let gt = f.target();
    if direction >= g.dim() {
        return Err(CarnotError::InvalidParameter(format!("direction {} out of range", direction + 1)));
    }
    if steps == 0 || h_list.len() < 2 || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(CarnotError::InvalidParameter("need steps and at least two positive h".into()));
    }
    let i = g.spec().layer_of(direction) as f64;
    let mut energy = Vec::with_capacity(h_list.len());
    let mut skipped = 0;
    let mut c = vec![0.0; gt.dim()];
    for &h in h_list {
        let mut sums = vec![0.0; gt.step()];
        let mut used = 0usize;
        for s in 0..steps {
            let t = s as f64 * span / steps as f64;
            let image = f
                .apply(&flow(g, start, direction, t))
                .and_then(|a| Ok((a, f.apply(&flow(g, start, direction, t + h))?)));
            let Ok((a, b)) = image else {
                skipped += 1;
                continue;
            };
            gt.left_quotient_into(&a, &b, &mut c);
            used += 1;
            for (k, sum) in sums.iter_mut().enumerate() {
                let size = c[gt.spec().layer_range(k + 1)].iter().map(|x| x * x).sum::<f64>().sqrt();
                *sum += size.powf(1.0 / (k + 1) as f64) / h.powf(1.0 / i);
            }
        }
        if used == 0 {
            return Err(CarnotError::Evaluation("no evaluable step on the curve".into()));
        }
        energy.push(sums.iter().map(|s| s / used as f64).collect::<Vec<f64>>());
    }
    let n = energy.len();
    let nonvanishing = (0..gt.step())
        .map(|k| {
            let last = energy[n - 1][k];
            last > 1e-3 && last > 0.75 * energy[n - 2][k]
        })
        .collect();
    Ok(LayerProfile {
        direction,
        curve_layer: i as usize,
        h_values: h_list.to_vec(),
        energy,
        nonvanishing,
        skipped,
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::group::CarnotGroup;
use crate::metric::HomogeneousNorm;
use crate::mollify::{Mollifier, MollifierConfig, Profile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalEstimate {
    pub radii: Vec<f64>,
    /// Average of `|g|` over the `d_K` ball of each radius.
    pub averages: Vec<f64>,
    pub value: f64,
}

/// Largest `d_K`-ball average of `|g|` around `p` over the given radii.
pub fn maximal_estimate<F>(g: &CarnotGroup, field: F, p: &[f64], radii: &[f64], order: usize) -> Result<MaximalEstimate>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(CarnotError::InvalidParameter("radii must be positive".into()));
    }
    let config = MollifierConfig {
        profile: Profile::Constant,
        norm: Some(HomogeneousNorm::Layerwise),
        order,
        ..MollifierConfig::default()
    };
    let ball = Mollifier::new(g, radii[0], config)?;
    let mut averages = Vec::with_capacity(radii.len());
    for &r in radii {
        let m = ball.rescaled(r)?;
        let avg = m.average(g, |x| Ok(vec![field(x)?.abs()]), p, 1)?;
        averages.push(avg[0]);
    }
    let value = averages.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(MaximalEstimate {
        radii: radii.to_vec(),
        averages,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::quasi_metric_dk;

    #[test]
    fn constant_field() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let m = maximal_estimate(&g, |_| Ok(-3.0), &[0.1, 0.2, 0.3], &[0.5, 1.0], 8).unwrap();
        assert!((m.value - 3.0).abs() < 1e-12);
    }

    #[test]
    fn indicator_of_containing_ball() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let c = [0.2, 0.1, 0.0];
        let ind = |x: &[f64]| Ok(if quasi_metric_dk(&g, x, &c).unwrap() < 1.0 { 1.0 } else { 0.0 });
        let m = maximal_estimate(&g, ind, &c, &[0.1, 0.2], 8).unwrap();
        assert!((m.value - 1.0).abs() < 1e-12);
    }
}

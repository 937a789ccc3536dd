//! Verification harness built on the calculus and mollification layers.
//!
//! Checks assert only where a property is forced by the map family; other
//! maps get exploratory reports.

mod area;
mod factor;
mod integrability;
mod invariance;
mod layers;
mod maximal;
mod qc;

pub use area::{
    area_integral, filiform_area, unboundedness_probe, AreaConfig, AreaDomain, AreaReport, FiliformArea,
    UnboundednessReport,
};
pub use factor::{factor_detect, FactorPoint, FactorReport};
pub use integrability::{
    lq_annular_classify, patched_comparison, AnnularConfig, IntegrabilityReport, PatchedComparison,
    Verdict,
};
pub use invariance::{
    invariance_check, slice_constancy, InvariancePoint, InvarianceReport, SliceReport,
};
pub use layers::{curve_layer_probe, default_h_list, LayerProfile};
pub use maximal::{maximal_estimate, MaximalEstimate};
pub use qc::{
    distortion_estimate, holder_estimate, qc_certificate, DistortionSample, HolderFit, QcConfig,
    QcReport,
};

use nalgebra::DMatrix;

use crate::calculus::{FdConfig, GroupMap};
use crate::error::Result;

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().max()
}

/// Euclidean Jacobian of `p -> f(p)[outputs]` with respect to the
/// coordinates `inputs`, by central differences with one Richardson step.
/// Row `r` holds the derivatives along `inputs[r]`.
pub fn coordinate_jacobian<M: GroupMap + ?Sized>(
    f: &M,
    p: &[f64],
    inputs: &[usize],
    outputs: &[usize],
    fd: FdConfig,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(inputs.len(), outputs.len());
    let mut x = p.to_vec();
    let mut central = |i: usize, h: f64| -> Result<Vec<f64>> {
        x[i] = p[i] + h;
        let a = f.apply(&x)?;
        x[i] = p[i] - h;
        let b = f.apply(&x)?;
        x[i] = p[i];
        Ok(outputs.iter().map(|&o| (a[o] - b[o]) / (2.0 * h)).collect())
    };
    for (r, &i) in inputs.iter().enumerate() {
        let coarse = central(i, fd.h)?;
        let row = if fd.richardson {
            let fine = central(i, fd.h / 2.0)?;
            fine.iter().zip(&coarse).map(|(a, b)| (4.0 * a - b) / 3.0).collect()
        } else {
            coarse
        };
        for (c, v) in row.into_iter().enumerate() {
            out[(r, c)] = v;
        }
    }
    Ok(out)
}

//! Left-invariant frames and coframes, derivatives along left-invariant
//! fields, horizontal gradients and numerical Pansu differentials.
//!
//! With `A = ad_p`, the left-invariant field of basis vector `e_v` at `p` is
//! `(I + A/2 + A^2/12) e_v` and the Maurer-Cartan coframe is
//! `I - A/2 + A^2/6`; the two are exactly inverse because `A^3 = 0` in
//! step <= 3. Rows of the coframe belonging to layers >= 2 are the contact
//! forms.
//!
//! Matrices of horizontal differentials follow the row convention: entry
//! `(i, j)` is the derivative of the `j`-th target coordinate along `X_i`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraSpec;
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};

/// Pointwise map between two Carnot groups.
pub trait GroupMap: Sync {
    fn source(&self) -> &CarnotGroup;
    fn target(&self) -> &CarnotGroup;
    fn apply(&self, p: &[f64]) -> Result<Vec<f64>>;
}

/// Finite-difference settings shared by the derivative routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    pub h: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            h: 1e-4,
            richardson: true,
        }
    }
}

impl FdConfig {
    pub fn with_h(h: f64) -> Self {
        Self {
            h,
            ..Self::default()
        }
    }
}

/// Columns are the left-invariant fields at `p` in coordinate components.
pub fn frame_at(g: &CarnotGroup, p: &Point) -> Result<DMatrix<f64>> {
    g.check(p)?;
    let a = g.ad_matrix(p);
    let n = g.dim();
    Ok(DMatrix::identity(n, n) + &a * 0.5 + (&a * &a) / 12.0)
}

/// Rows are the left-invariant coforms at `p`: `dx_i` for horizontal `i`,
/// contact forms for the higher layers.
pub fn coframe_at(g: &CarnotGroup, p: &Point) -> Result<DMatrix<f64>> {
    g.check(p)?;
    let a = g.ad_matrix(p);
    let n = g.dim();
    Ok(DMatrix::identity(n, n) - &a * 0.5 + (&a * &a) / 6.0)
}

/// `p * (t e_v)`: the flow of the left-invariant field `X_v` for time `t`.
pub fn flow(g: &CarnotGroup, p: &[f64], v: usize, t: f64) -> Vec<f64> {
    let mut step = vec![0.0; g.dim()];
    step[v] = t;
    let mut out = vec![0.0; g.dim()];
    g.multiply_into(p, &step, &mut out);
    out
}

/// Central difference of `f` along `X_v` at `p`, optionally with one
/// Richardson step (`(4 D(h/2) - D(h)) / 3`).
pub fn derive_along<F>(g: &CarnotGroup, f: F, p: &[f64], v: usize, fd: FdConfig) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    if !(fd.h > 0.0) {
        return Err(CarnotError::InvalidParameter(format!(
            "step size must be positive, got {}",
            fd.h
        )));
    }
    g.check(p)?;
    if v >= g.dim() {
        return Err(CarnotError::InvalidParameter(format!(
            "direction index {v} out of range"
        )));
    }
    let central = |h: f64| -> Result<Vec<f64>> {
        let plus = f(&flow(g, p, v, h))?;
        let minus = f(&flow(g, p, v, -h))?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    };
    let coarse = central(fd.h)?;
    if !fd.richardson {
        return Ok(coarse);
    }
    let fine = central(fd.h / 2.0)?;
    Ok(fine
        .iter()
        .zip(&coarse)
        .map(|(f2, f1)| (4.0 * f2 - f1) / 3.0)
        .collect())
}

/// Derivatives of every target coordinate along `X_v`.
pub fn derive_map<M: GroupMap + ?Sized>(f: &M, p: &[f64], v: usize, fd: FdConfig) -> Result<Vec<f64>> {
    derive_along(f.source(), |x| f.apply(x), p, v, fd)
}

/// `D_H f(p)`: entry `(i, j)` is `X_i f^{x_j}` over horizontal indices.
pub fn horizontal_gradient<M: GroupMap + ?Sized>(f: &M, p: &[f64], fd: FdConfig) -> Result<DMatrix<f64>> {
    let m = f.source().rank();
    let m2 = f.target().rank();
    let mut out = DMatrix::zeros(m, m2);
    for i in 0..m {
        let d = derive_map(f, p, i, fd)?;
        for j in 0..m2 {
            out[(i, j)] = d[j];
        }
    }
    Ok(out)
}

/// Horizontal gradient restricted to a subset of horizontal directions and
/// the matching target coordinates.
pub fn restricted_gradient<M: GroupMap + ?Sized>(
    f: &M,
    p: &[f64],
    subset: &[usize],
    fd: FdConfig,
) -> Result<DMatrix<f64>> {
    let mut out = DMatrix::zeros(subset.len(), subset.len());
    for (r, &i) in subset.iter().enumerate() {
        let d = derive_map(f, p, i, fd)?;
        for (c, &j) in subset.iter().enumerate() {
            out[(r, c)] = d[j];
        }
    }
    Ok(out)
}

/// `delta_{1/t}( f(p)^{-1} * f(p * delta_t(v)) )`.
pub fn pansu_quotient<M: GroupMap + ?Sized>(f: &M, p: &[f64], v: &[f64], t: f64) -> Result<Point> {
    if !(t > 0.0) {
        return Err(CarnotError::InvalidParameter(format!(
            "scale must be positive, got {t}"
        )));
    }
    let g = f.source();
    let gt = f.target();
    g.check(p)?;
    g.check(v)?;
    let mut step = v.to_vec();
    g.dilate_in_place(t, &mut step);
    let mut moved = vec![0.0; g.dim()];
    g.multiply_into(p, &step, &mut moved);
    let base = f.apply(p)?;
    let far = f.apply(&moved)?;
    gt.check(&base)?;
    gt.check(&far)?;
    let mut out = vec![0.0; gt.dim()];
    gt.left_quotient_into(&base, &far, &mut out);
    gt.dilate_in_place(1.0 / t, &mut out);
    Ok(Point::new(out))
}

/// Numerical Pansu differential in block form. Columns are source basis
/// directions, rows are target coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PansuMatrix {
    pub entries: Vec<Vec<f64>>,
    pub source_layers: Vec<usize>,
    pub target_layers: Vec<usize>,
    pub t_sequence: Vec<f64>,
}

impl PansuMatrix {
    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let rows = self.entries.len();
        let cols = self.entries.first().map_or(0, Vec::len);
        DMatrix::from_fn(rows, cols, |r, c| self.entries[r][c])
    }

    /// Largest entry whose row and column belong to different layers.
    pub fn off_layer_max(&self) -> f64 {
        let mut worst = 0.0f64;
        for (r, row) in self.entries.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                if self.target_layers[r] != self.source_layers[c] {
                    worst = worst.max(x.abs());
                }
            }
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PansuReport {
    pub matrix: PansuMatrix,
    pub homomorphism_defect: f64,
    pub off_layer_max: f64,
    /// Largest change between the extrapolated estimate with and without
    /// the smallest scale.
    pub disagreement: f64,
    pub stable: bool,
}

pub const PANSU_STABILITY_TOL: f64 = 1e-3;

pub fn default_t_sequence() -> Vec<f64> {
    vec![0.02, 0.01, 0.005, 0.0025]
}

/// Neville extrapolation of samples `(t_i, y_i)` to `t = 0`.
pub fn extrapolate_to_zero(ts: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = ts.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (ts[i + k] * p[i] - ts[i] * p[i + 1]) / (ts[i + k] - ts[i]);
        }
    }
    p[0]
}

pub fn pansu_differential<M: GroupMap + ?Sized>(f: &M, p: &[f64], ts: &[f64]) -> Result<PansuReport> {
    if ts.is_empty() || ts.windows(2).any(|w| !(w[1] < w[0])) || ts.iter().any(|t| !(*t > 0.0)) {
        return Err(CarnotError::InvalidParameter(
            "t sequence must be positive and strictly decreasing".into(),
        ));
    }
    let g = f.source();
    let gt = f.target();
    let n = g.dim();
    let n2 = gt.dim();
    // samples[t][col] = quotient
    let mut samples = Vec::with_capacity(ts.len());
    for &t in ts {
        let mut cols = Vec::with_capacity(n);
        for v in 0..n {
            let mut e = vec![0.0; n];
            e[v] = 1.0;
            cols.push(pansu_quotient(f, p, &e, t)?);
        }
        samples.push(cols);
    }
    let mut entries = vec![vec![0.0; n]; n2];
    let mut disagreement = 0.0f64;
    for c in 0..n {
        for r in 0..n2 {
            let ys: Vec<f64> = samples.iter().map(|s| s[c][r]).collect();
            let full = extrapolate_to_zero(ts, &ys);
            entries[r][c] = full;
            if ts.len() > 1 {
                let partial = extrapolate_to_zero(&ts[..ts.len() - 1], &ys[..ys.len() - 1]);
                disagreement = disagreement.max((full - partial).abs());
            }
        }
    }
    let matrix = PansuMatrix {
        entries,
        source_layers: (0..n).map(|i| g.spec().layer_of(i)).collect(),
        target_layers: (0..n2).map(|i| gt.spec().layer_of(i)).collect(),
        t_sequence: ts.to_vec(),
    };
    let homomorphism_defect = homomorphism_defect(g.spec(), gt.spec(), &matrix.to_dmatrix());
    let off_layer_max = matrix.off_layer_max();
    Ok(PansuReport {
        matrix,
        homomorphism_defect,
        off_layer_max,
        disagreement,
        stable: disagreement <= PANSU_STABILITY_TOL,
    })
}

/// `max_{i<j} |M [e_i, e_j] - [M e_i, M e_j]|` with `M` acting on columns.
pub fn homomorphism_defect(src: &AlgebraSpec, tgt: &AlgebraSpec, m: &DMatrix<f64>) -> f64 {
    let n = src.dim();
    let col = |i: usize| -> Vec<f64> { m.column(i).iter().copied().collect() };
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let mut ei = vec![0.0; n];
            let mut ej = vec![0.0; n];
            ei[i] = 1.0;
            ej[j] = 1.0;
            let b = src.bracket(&ei, &ej).expect("sized");
            let mapped = m * nalgebra::DVector::from_vec(b);
            let image = tgt.bracket(&col(i), &col(j)).expect("sized");
            for (a, b) in mapped.iter().zip(&image) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    worst
}

/// The graded automorphism induced by a horizontal block.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedAutomorphism {
    /// Column `v` is the image of `e_v`.
    pub matrix: DMatrix<f64>,
    pub layer_dets: Vec<f64>,
}

impl GradedAutomorphism {
    /// Product of the layer determinants.
    pub fn det(&self) -> f64 {
        self.layer_dets.iter().product()
    }
}

/// Pushes a horizontal block (row `i` = image of `e_i`) through brackets
/// layer by layer. Works for any step.
pub fn graded_automorphism(spec: &AlgebraSpec, horizontal_block: &DMatrix<f64>) -> Result<GradedAutomorphism> {
    let n = spec.dim();
    let m = spec.layer_dims()[0];
    if horizontal_block.nrows() != m || horizontal_block.ncols() != m {
        return Err(CarnotError::DimensionMismatch {
            expected: m,
            got: horizontal_block.nrows().max(horizontal_block.ncols()),
        });
    }
    let unit = |i: usize| {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        e
    };
    let mut images: Vec<Vec<f64>> = vec![vec![0.0; n]; n];
    for (i, image) in images.iter_mut().enumerate().take(m) {
        for j in 0..m {
            image[j] = horizontal_block[(i, j)];
        }
    }
    for k in 1..spec.step() {
        let target = spec.layer_range(k + 1);
        let d = target.len();
        // pick bracket pairs whose values span layer k+1
        let mut chosen: Vec<(usize, usize)> = Vec::new();
        let mut basis = DMatrix::<f64>::zeros(d, 0);
        'outer: for i in spec.layer_range(1) {
            for y in spec.layer_range(k) {
                let b = spec.bracket(&unit(i), &unit(y)).expect("sized");
                let restricted: Vec<f64> = b[target.clone()].to_vec();
                let last = basis.ncols();
                let mut candidate = basis.clone().insert_column(last, 0.0);
                for (r, x) in restricted.iter().enumerate() {
                    candidate[(r, last)] = *x;
                }
                if candidate.rank(1e-10) > basis.ncols() {
                    basis = candidate;
                    chosen.push((i, y));
                    if chosen.len() == d {
                        break 'outer;
                    }
                }
            }
        }
        if chosen.len() < d {
            return Err(CarnotError::NotExtendable(format!(
                "layer {} is not generated by brackets with the first layer",
                k + 1
            )));
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| CarnotError::NotExtendable("singular bracket basis".into()))?;
        let bracket_images: Vec<Vec<f64>> = chosen
            .iter()
            .map(|(i, y)| spec.bracket(&images[*i], &images[*y]).expect("sized"))
            .collect();
        for (r, b) in target.clone().enumerate() {
            // e_b = sum_c inv[(c, r)] * chosen_c
            let mut image = vec![0.0; n];
            for (c, bi) in bracket_images.iter().enumerate() {
                let coef = inv[(c, r)];
                for (o, x) in image.iter_mut().zip(bi) {
                    *o += coef * x;
                }
            }
            images[b] = image;
        }
    }
    // consistency on every pair
    let scale = images
        .iter()
        .flatten()
        .fold(1.0f64, |acc, x| acc.max(x.abs()));
    for i in 0..n {
        for j in (i + 1)..n {
            let b = spec.bracket(&unit(i), &unit(j)).expect("sized");
            let mut lhs = vec![0.0; n];
            for (c, coef) in b.iter().enumerate() {
                if *coef != 0.0 {
                    for (o, x) in lhs.iter_mut().zip(&images[c]) {
                        *o += coef * x;
                    }
                }
            }
            let rhs = spec.bracket(&images[i], &images[j]).expect("sized");
            let err = lhs
                .iter()
                .zip(&rhs)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if err > 1e-9 * scale * scale {
                return Err(CarnotError::NotExtendable(format!(
                    "bracket [e{}, e{}] is not preserved (error {err:.3e})",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    let matrix = DMatrix::from_fn(n, n, |r, c| images[c][r]);
    let layer_dets = (1..=spec.step())
        .map(|k| {
            let range = spec.layer_range(k);
            let block = matrix
                .view((range.start, range.start), (range.len(), range.len()))
                .clone_owned();
            block.determinant()
        })
        .collect();
    Ok(GradedAutomorphism { matrix, layer_dets })
}

/// Determinant of the graded automorphism as a product of layer
/// determinants.
pub fn graded_automorphism_det(spec: &AlgebraSpec, horizontal_block: &DMatrix<f64>) -> Result<f64> {
    Ok(graded_automorphism(spec, horizontal_block)?.det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn frame_at_identity_is_identity() {
        let g = CarnotGroup::filiform(3).unwrap();
        let f = frame_at(&g, &g.identity()).unwrap();
        assert_eq!(f, DMatrix::identity(4, 4));
    }

    #[test]
    fn heisenberg_frame_column() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let p = Point::new(vec![0.7, -1.3, 2.0]);
        let f = frame_at(&g, &p).unwrap();
        assert_eq!(f.column(0).iter().copied().collect::<Vec<_>>(), vec![1.0, 0.0, 0.65]);
        assert_eq!(f.column(1).iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 0.35]);
    }

    #[test]
    fn coframe_at_identity_selects_coordinates() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let c = coframe_at(&g, &g.identity()).unwrap();
        assert_eq!(c.row(2).iter().copied().collect::<Vec<_>>(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn derive_along_coordinate_examples() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let fd = FdConfig::default();
        let a1 = derive_along(&g, |x| Ok(vec![x[0]]), &[0.3, 0.2, 0.1], 0, fd).unwrap();
        assert!((a1[0] - 1.0).abs() < 1e-12);
        let b = derive_along(&g, |x| Ok(vec![x[2]]), &[0.0, 1.0, 0.0], 0, fd).unwrap();
        assert!((b[0] + 0.5).abs() < 1e-10);
        assert!(derive_along(&g, |x| Ok(vec![x[0]]), &[0.0; 3], 0, FdConfig::with_h(0.0)).is_err());
    }

    #[test]
    fn richardson_improves_order() {
        let g = CarnotGroup::heisenberg(1).unwrap();
        let f = |x: &[f64]| Ok(vec![(x[0] * 3.0).sin() + x[2].exp()]);
        let p = [0.2, 0.4, -0.3];
        // X_1 = d/dA1 - A2/2 d/dB
        let exact = 3.0 * (0.6f64).cos() - 0.2 * (-0.3f64).exp();
        let plain = derive_along(&g, f, &p, 0, FdConfig { h: 1e-2, richardson: false }).unwrap()[0];
        let rich = derive_along(&g, f, &p, 0, FdConfig { h: 1e-2, richardson: true }).unwrap()[0];
        assert!((rich - exact).abs() < 1e-3 * (plain - exact).abs());
    }

    #[test]
    fn neville_recovers_polynomials() {
        let ts = [0.4, 0.2, 0.1];
        let ys: Vec<f64> = ts.iter().map(|t| 2.0 + 3.0 * t - t * t).collect();
        assert!((extrapolate_to_zero(&ts, &ys) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn automorphism_determinants() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        let id = graded_automorphism_det(&h1, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(id, 1.0);
        let (a, c) = (1.5, -0.7);
        let det = graded_automorphism_det(&h1, &dmatrix![a, 0.0; 0.0, c]).unwrap();
        assert!((det - (a * c).powi(2)).abs() < 1e-12);

        let f3 = AlgebraSpec::filiform(3).unwrap();
        let det = graded_automorphism_det(&f3, &dmatrix![a, 0.0; 0.0, c]).unwrap();
        assert!((det - a * c * (a * c) * (a * a * c)).abs() < 1e-12);

        let aut = graded_automorphism(&f3, &dmatrix![2.0, 1.0; 0.0, 3.0]).unwrap();
        assert_eq!(aut.layer_dets.len(), 3);
        assert!((aut.layer_dets[1] - 6.0).abs() < 1e-12);
        assert!((aut.layer_dets[2] - 12.0).abs() < 1e-12);
    }

    #[test]
    fn dilation_block_gives_lambda_to_q() {
        for spec in [
            AlgebraSpec::heisenberg(2).unwrap(),
            AlgebraSpec::filiform(5).unwrap(),
        ] {
            let m = spec.layer_dims()[0];
            let lambda = 1.3;
            let det = graded_automorphism_det(&spec, &(DMatrix::identity(m, m) * lambda)).unwrap();
            let expected = lambda.powi(spec.homogeneous_dimension() as i32);
            assert!((det - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn non_extendable_block_rejected() {
        // a generic 4x4 block does not preserve the symplectic form of h^2
        let h2 = AlgebraSpec::heisenberg(2).unwrap();
        let block = dmatrix![
            1.0, 2.0, 0.0, 0.0;
            0.0, 1.0, 0.0, 0.0;
            0.0, 0.0, 1.0, 0.0;
            0.0, 0.0, 0.0, 1.0
        ];
        assert!(matches!(
            graded_automorphism(&h2, &block),
            Err(CarnotError::NotExtendable(_))
        ));
        // on f^3 the image of e_2 may not pick up an e_1 component
        let f3 = AlgebraSpec::filiform(3).unwrap();
        assert!(graded_automorphism(&f3, &dmatrix![1.0, 0.0; 1.0, 1.0]).is_err());
    }
}

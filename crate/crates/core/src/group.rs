//! Group arithmetic in exponential coordinates of the first kind, step <= 3.
//!
//! With horizontal coordinates `A`, second-layer `B` and third-layer `C`,
//! structure constants `alpha` (`[d_i, d_j] = alpha_k^{ij} e_k`) and `beta`
//! (`[d_i, e_k] = beta_m^{ik} f_m`):
//!
//! ```text
//! (A,B,C) * (a,b,c) = (A + a,
//!                      B_k + b_k + 1/2 sum_{i<j} alpha_k^{ij} (A_i a_j - a_i A_j),
//!                      C_m + c_m + 1/2 sum beta_m^{ij} (A_i b_j - B_j a_i)
//!                            + 1/12 sum (A_l - a_l) alpha_k^{ij} (A_i a_j - a_i A_j) beta_m^{lk})
//! ```
//!
//! Inversion is coordinate negation. [`CarnotGroup::bch_reference`] evaluates
//! the truncated Baker-Campbell-Hausdorff series through the bracket alone and
//! serves as an independent check of the closed form.

use std::fmt;
use std::ops::{Deref, DerefMut};
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::algebra::AlgebraSpec;
use crate::error::{CarnotError, Result};

/// Graded coordinate vector in exponential coordinates of the first kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn zeros(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Parses comma-separated decimals, e.g. `"1,0,0.5"`.
    pub fn parse(text: &str) -> Result<Self> {
        text.split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| {
                    CarnotError::InvalidParameter(format!("bad coordinate `{}`", t.trim()))
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Point)
    }

    pub fn max_abs_diff(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Point {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| format!("{x}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

pub const MAX_DIM: usize = 64;

/// A Carnot group of step <= 3 with cached structure constants.
#[derive(Debug, Clone)]
pub struct CarnotGroup {
    spec: Arc<AlgebraSpec>,
    q: usize,
    // (i, j, k, alpha_k^{ij}) with i < j horizontal, k in layer 2
    alpha: Vec<(usize, usize, usize, f64)>,
    // (i, k, m, beta_m^{ik}) with i horizontal, k in layer 2, m in layer 3
    beta: Vec<(usize, usize, usize, f64)>,
}

impl PartialEq for CarnotGroup {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

impl CarnotGroup {
    pub fn new(spec: AlgebraSpec) -> Result<Self> {
        Self::from_arc(Arc::new(spec))
    }

    pub fn from_arc(spec: Arc<AlgebraSpec>) -> Result<Self> {
        if spec.step() > 3 {
            return Err(CarnotError::StepTooLarge(spec.step()));
        }
        if spec.dim() > MAX_DIM {
            return Err(CarnotError::InvalidParameter(format!(
                "group dimension {} exceeds {MAX_DIM}",
                spec.dim()
            )));
        }
        let report = spec.validate();
        if !report.is_valid() {
            let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(CarnotError::InvalidParameter(format!(
                "algebra is not a valid stratified algebra: {}",
                msgs.join("; ")
            )));
        }
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for &(i, j, k, c) in spec.structure_constants() {
            if i >= j {
                continue;
            }
            match (spec.layer_of(i), spec.layer_of(j)) {
                (1, 1) => alpha.push((i, j, k, c)),
                (1, 2) => beta.push((i, j, k, c)),
                _ => {}
            }
        }
        let q = spec.homogeneous_dimension();
        Ok(Self {
            spec,
            q,
            alpha,
            beta,
        })
    }

    pub fn heisenberg(n: usize) -> Result<Self> {
        Self::new(AlgebraSpec::heisenberg(n)?)
    }

    pub fn filiform(n: usize) -> Result<Self> {
        Self::new(AlgebraSpec::filiform(n)?)
    }

    pub fn product(factors: &[&CarnotGroup]) -> Result<Self> {
        let specs: Vec<&AlgebraSpec> = factors.iter().map(|g| g.spec.as_ref()).collect();
        Self::new(AlgebraSpec::product(&specs)?)
    }

    /// Factor groups of a product group; empty for non-products.
    pub fn factor_groups(&self) -> Result<Vec<CarnotGroup>> {
        self.spec.factor_specs()?.into_iter().map(CarnotGroup::new).collect()
    }

    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn spec_arc(&self) -> &Arc<AlgebraSpec> {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn step(&self) -> usize {
        self.spec.step()
    }

    pub fn homogeneous_dimension(&self) -> usize {
        self.q
    }

    /// Dimension of the horizontal layer.
    pub fn rank(&self) -> usize {
        self.spec.layer_dims()[0]
    }

    pub fn identity(&self) -> Point {
        Point::zeros(self.dim())
    }

    pub fn check(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim() {
            return Err(CarnotError::DimensionMismatch {
                expected: self.dim(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Group law, as the closed form in the module docs.
    pub fn multiply(&self, p: &Point, q: &Point) -> Result<Point> {
        self.check(p)?;
        self.check(q)?;
        let mut out = vec![0.0; self.dim()];
        self.multiply_into(p, q, &mut out);
        Ok(Point(out))
    }

    pub(crate) fn multiply_into(&self, p: &[f64], q: &[f64], out: &mut [f64]) {
        for ((o, a), b) in out.iter_mut().zip(p).zip(q) {
            *o = a + b;
        }
        if self.alpha.is_empty() {
            return;
        }
        // w_k = sum_{i<j} alpha_k^{ij} (A_i a_j - a_i A_j)
        let mut w = [0.0f64; MAX_DIM];
        let w = &mut w[..self.dim()];
        for &(i, j, k, c) in &self.alpha {
            w[k] += c * (p[i] * q[j] - q[i] * p[j]);
        }
        for &(_, _, k, _) in &self.alpha {
            out[k] = p[k] + q[k] + 0.5 * w[k];
        }
        for &(i, k, m, c) in &self.beta {
            out[m] += 0.5 * c * (p[i] * q[k] - p[k] * q[i])
                + c * (p[i] - q[i]) * w[k] / 12.0;
        }
    }

    /// Coordinate negation.
    pub fn inverse(&self, p: &Point) -> Result<Point> {
        self.check(p)?;
        Ok(Point(p.iter().map(|x| -x).collect()))
    }

    /// `q^{-1} * p` through the expanded formula with its own sign pattern
    /// (the `(A_l + a_l)` term), not by composing `inverse` and `multiply`.
    pub fn left_quotient(&self, q: &Point, p: &Point) -> Result<Point> {
        self.check(p)?;
        self.check(q)?;
        let mut out = vec![0.0; self.dim()];
        self.left_quotient_into(q, p, &mut out);
        Ok(Point(out))
    }

    pub(crate) fn left_quotient_into(&self, q: &[f64], p: &[f64], out: &mut [f64]) {
        // q plays (A, B, C), p plays (a, b, c)
        for ((o, big), small) in out.iter_mut().zip(q).zip(p) {
            *o = small - big;
        }
        if self.alpha.is_empty() {
            return;
        }
        let mut w = [0.0f64; MAX_DIM];
        let w = &mut w[..self.dim()];
        for &(i, j, k, c) in &self.alpha {
            w[k] += c * (q[i] * p[j] - p[i] * q[j]);
        }
        for &(_, _, k, _) in &self.alpha {
            out[k] = p[k] - q[k] - 0.5 * w[k];
        }
        for &(i, k, m, c) in &self.beta {
            out[m] += -0.5 * c * (q[i] * p[k] - q[k] * p[i]) + c * (q[i] + p[i]) * w[k] / 12.0;
        }
    }

    /// Layer-by-layer coordinates of `q^{-1} p`: entry `k-1` holds the
    /// projections onto layer `k`.
    pub fn layer_projections(&self, q: &Point, p: &Point) -> Result<Vec<Vec<f64>>> {
        let r = self.left_quotient(q, p)?;
        Ok((1..=self.step())
            .map(|k| r[self.spec.layer_range(k)].to_vec())
            .collect())
    }

    /// `delta_lambda`: layer k scaled by `lambda^k`.
    pub fn dilate(&self, lambda: f64, p: &Point) -> Result<Point> {
        if !(lambda > 0.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        self.check(p)?;
        let mut out = p.clone();
        self.dilate_in_place(lambda, &mut out);
        Ok(out)
    }

    pub(crate) fn dilate_in_place(&self, lambda: f64, p: &mut [f64]) {
        let mut scale = 1.0;
        for k in 1..=self.step() {
            scale *= lambda;
            for x in &mut p[self.spec.layer_range(k)] {
                *x *= scale;
            }
        }
    }

    /// `x + y + 1/2 [x,y] + 1/12 ([x,[x,y]] + [y,[y,x]])`.
    pub fn bch_reference(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        self.check(y)?;
        let b = |u: &[f64], v: &[f64]| self.spec.bracket(u, v).expect("sized");
        let xy = b(x, y);
        let yx: Vec<f64> = xy.iter().map(|v| -v).collect();
        let xxy = b(x, &xy);
        let yyx = b(y, &yx);
        Ok((0..self.dim())
            .map(|k| x[k] + y[k] + 0.5 * xy[k] + (xxy[k] + yyx[k]) / 12.0)
            .collect())
    }

    /// Matrix of `ad_p`: column `v` is `[p, e_v]`.
    pub fn ad_matrix(&self, p: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for &(i, j, k, c) in self.spec.structure_constants() {
            m[(k, j)] += c * p[i];
        }
        m
    }

    /// Layer-wise slices of a point.
    pub fn layer<'a>(&self, p: &'a [f64], k: usize) -> &'a [f64] {
        &p[self.spec.layer_range(k)]
    }
}

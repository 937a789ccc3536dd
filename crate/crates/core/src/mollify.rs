//! Group mollification `f_eps(p) = sum_k W_k f(p * (delta_eps u_k)^{-1})`
//! with unit-scale nodes `u_k` and weights proportional to
//! `profile(N(u_k))`, so `eta_eps(z) = eps^{-Q} c profile(N(delta_{1/eps} z))`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calculus::{coframe_at, derive_map, horizontal_gradient, FdConfig, GroupMap};
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};
use crate::metric::HomogeneousNorm;
use crate::sampling::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `exp(-1/(1-r^2))` on `r < 1`.
    Bump,
    /// Indicator of the unit ball.
    Constant,
}

impl Profile {
    pub fn eval(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            Profile::Bump => (-1.0 / (1.0 - r * r)).exp(),
            Profile::Constant => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifierConfig {
    pub profile: Profile,
    /// Defaults to Korányi on Heisenberg groups, layerwise elsewhere.
    pub norm: Option<HomogeneousNorm>,
    /// Gauss-Legendre points per half-panel and coordinate.
    pub order: usize,
    /// Dimensions above this use Monte Carlo.
    pub max_tensor_dim: usize,
    pub mc_samples: usize,
    pub seed: u64,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Bump,
            norm: None,
            order: 8,
            max_tensor_dim: 6,
            mc_samples: 20_000,
            seed: 42,
        }
    }
}

/// Normalised mollifier at scale `eps`.
#[derive(Debug, Clone)]
pub struct Mollifier {
    eps: f64,
    config: MollifierConfig,
    norm: HomogeneousNorm,
    dim: usize,
    q: usize,
    // unit-scale nodes, flattened
    nodes: Vec<f64>,
    weights: Vec<f64>,
    normalizer: f64,
}

impl Mollifier {
    /// Builds the quadrature and sets the normaliser so the weights sum to one.
    pub fn new(g: &CarnotGroup, eps: f64, config: MollifierConfig) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "mollifier scale must be positive, got {eps}"
            )));
        }
        let norm = config.norm.unwrap_or_else(|| HomogeneousNorm::default_for(g));
        if norm == HomogeneousNorm::Koranyi && g.spec().heisenberg_rank().is_none() {
            return Err(CarnotError::NotHeisenberg);
        }
        let (nodes, raw) = if g.dim() <= config.max_tensor_dim {
            tensor_nodes(g, norm, config)?
        } else {
            monte_carlo_nodes(g, norm, config)?
        };
        let total: f64 = raw.iter().sum();
        if !(total > 0.0) {
            return Err(CarnotError::Degenerate("mollifier profile integrates to zero".into()));
        }
        let volume: f64 = if g.dim() <= config.max_tensor_dim {
            1.0
        } else {
            norm.unit_box(g).iter().map(|(a, b)| b - a).product()
        };
        let weights = raw.iter().map(|w| w / total).collect();
        Ok(Self {
            eps,
            config,
            norm,
            dim: g.dim(),
            q: g.homogeneous_dimension(),
            nodes,
            weights,
            normalizer: 1.0 / (total * volume),
        })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn norm(&self) -> HomogeneousNorm {
        self.norm
    }

    pub fn config(&self) -> &MollifierConfig {
        &self.config
    }

    /// `c` in `eta_eps(z) = eps^{-Q} c profile(N(delta_{1/eps} z))`.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn node_count(&self) -> usize {
        self.weights.len()
    }

    /// Same nodes at a different scale.
    pub fn rescaled(&self, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "mollifier scale must be positive, got {eps}"
            )));
        }
        Ok(Self { eps, ..self.clone() })
    }

    /// `eta_eps(z)`.
    pub fn density(&self, g: &CarnotGroup, z: &[f64]) -> f64 {
        let mut u = z.to_vec();
        g.dilate_in_place(1.0 / self.eps, &mut u);
        self.eps.powi(-(self.q as i32)) * self.normalizer * self.config.profile.eval(self.norm.eval(g, &u))
    }

    /// `sum_k W_k h(p * (delta_eps u_k)^{-1})` for any vector-valued `h`.
    pub fn average<F>(&self, g: &CarnotGroup, h: F, p: &[f64], out_dim: usize) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        g.check(p)?;
        let mut acc = vec![0.0; out_dim];
        let mut z = vec![0.0; self.dim];
        let mut q = vec![0.0; self.dim];
        for (u, w) in self.nodes.chunks_exact(self.dim).zip(&self.weights) {
            for (zi, ui) in z.iter_mut().zip(u) {
                *zi = -ui;
            }
            g.dilate_in_place(self.eps, &mut z);
            g.multiply_into(p, &z, &mut q);
            let y = h(&q)?;
            for (a, b) in acc.iter_mut().zip(&y) {
                *a += w * b;
            }
        }
        Ok(acc)
    }
}

fn tensor_nodes(g: &CarnotGroup, norm: HomogeneousNorm, config: MollifierConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let order = NonZeroUsize::new(config.order)
        .ok_or_else(|| CarnotError::InvalidParameter("quadrature order must be positive".into()))?;
    let rule = GaussLegendre::new(order);
    let boxes = norm.unit_box(g);
    // per coordinate: two half-panels, u = +-L s^k on s in [0,1]
    let axes: Vec<Vec<(f64, f64)>> = (0..g.dim())
        .map(|c| {
            let k = g.spec().layer_of(c) as i32;
            let half = boxes[c].1;
            let mut pts = Vec::with_capacity(2 * config.order);
            for &(x, w) in rule.as_node_weight_pairs() {
                let s = 0.5 * (x + 1.0);
                let ws = 0.5 * w * half * k as f64 * s.powi(k - 1);
                let u = half * s.powi(k);
                pts.push((-u, ws));
                pts.push((u, ws));
            }
            pts
        })
        .collect();
    let dim = g.dim();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim];
    let mut u = vec![0.0; dim];
    loop {
        let mut w = 1.0;
        for c in 0..dim {
            let (x, wc) = axes[c][idx[c]];
            u[c] = x;
            w *= wc;
        }
        let v = w * config.profile.eval(norm.eval(g, &u));
        if v > 0.0 {
            nodes.extend_from_slice(&u);
            weights.push(v);
        }
        let mut c = 0;
        loop {
            if c == dim {
                return Ok((nodes, weights));
            }
            idx[c] += 1;
            if idx[c] < axes[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

fn monte_carlo_nodes(g: &CarnotGroup, norm: HomogeneousNorm, config: MollifierConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let boxes = norm.unit_box(g);
    let mut r = rng(config.seed);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut u = vec![0.0; g.dim()];
    for _ in 0..config.mc_samples {
        for (x, (a, b)) in u.iter_mut().zip(&boxes) {
            *x = r.random_range(*a..*b);
        }
        let v = config.profile.eval(norm.eval(g, &u));
        if v > 0.0 {
            nodes.extend_from_slice(&u);
            weights.push(v / config.mc_samples as f64);
        }
    }
    Ok((nodes, weights))
}

/// `f_eps` as a map in its own right.
pub struct Mollified<'a, M: GroupMap + ?Sized> {
    pub map: &'a M,
    pub mollifier: &'a Mollifier,
}

impl<M: GroupMap + ?Sized> GroupMap for Mollified<'_, M> {
    fn source(&self) -> &CarnotGroup {
        self.map.source()
    }

    fn target(&self) -> &CarnotGroup {
        self.map.target()
    }

    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.mollifier
            .average(self.map.source(), |x| self.map.apply(x), p, self.map.target().dim())
    }
}

/// Target coordinates of `f_eps(p)`, averaged componentwise.
pub fn mollify_map<M: GroupMap + ?Sized>(f: &M, m: &Mollifier, p: &[f64]) -> Result<Point> {
    Mollified { map: f, mollifier: m }.apply(p).map(Point::new)
}

/// Which quantity a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Component {
    /// `omega_row(X_v f_eps)` with `omega_row` a row of the target coframe.
    Form { row: usize, direction: usize },
    /// Frobenius norm of `D_H f_eps - D_H f`.
    Grad,
}

impl Component {
    /// `wK:Xi` (K-th contact form), `dxJ:Xi` (J-th horizontal coform) or
    /// `grad`; indices are 1-based.
    pub fn parse(text: &str, source: &CarnotGroup, target: &CarnotGroup) -> Result<Self> {
        let text = text.trim();
        let bad = || CarnotError::InvalidParameter(format!("bad component `{text}`"));
        if text == "grad" {
            return Ok(Component::Grad);
        }
        let (form, dir) = text.split_once(':').ok_or_else(bad)?;
        let direction: usize = dir.trim().strip_prefix('X').ok_or_else(bad)?.parse().map_err(|_| bad())?;
        let row = if let Some(k) = form.strip_prefix("dx") {
            let j: usize = k.parse().map_err(|_| bad())?;
            if j == 0 || j > target.rank() {
                return Err(bad());
            }
            j - 1
        } else if let Some(k) = form.strip_prefix('w') {
            let j: usize = k.parse().map_err(|_| bad())?;
            if j == 0 || target.rank() + j > target.dim() {
                return Err(bad());
            }
            target.rank() + j - 1
        } else {
            return Err(bad());
        };
        if direction == 0 || direction > source.dim() {
            return Err(bad());
        }
        Ok(Component::Form {
            row,
            direction: direction - 1,
        })
    }

    /// Integrability exponent attached to the component: `q / wt(omega)` for
    /// forms, `q` for the gradient.
    pub fn exponent(self, q: f64, target: &CarnotGroup) -> f64 {
        match self {
            Component::Form { row, .. } => q / target.spec().layer_of(row) as f64,
            Component::Grad => q,
        }
    }
}

/// `omega_row` evaluated on `X_v f_eps` at `p`.
pub fn pullback_component<M: GroupMap + ?Sized>(
    f: &M,
    m: &Mollifier,
    p: &[f64],
    direction: usize,
    row: usize,
    fd: FdConfig,
) -> Result<f64> {
    let fe = Mollified { map: f, mollifier: m };
    let base = Point::new(fe.apply(p)?);
    let coframe = coframe_at(f.target(), &base)?;
    let d = derive_map(&fe, p, direction, fd)?;
    Ok((0..d.len()).map(|c| coframe[(row, c)] * d[c]).sum())
}

/// Frobenius norm of `D_H f_eps(p) - D_H f(p)`.
pub fn gradient_error<M: GroupMap + ?Sized>(f: &M, m: &Mollifier, p: &[f64], fd: FdConfig) -> Result<f64> {
    let fe = Mollified { map: f, mollifier: m };
    let a = horizontal_gradient(&fe, p, fd)?;
    let b = horizontal_gradient(f, p, fd)?;
    Ok((a - b).norm())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub eps: Vec<f64>,
    pub q: f64,
    pub component: Component,
    pub mollifier: MollifierConfig,
    pub fd: FdConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub eps: f64,
    pub norm: f64,
    /// Fitted slope over the rows so far; absent for the first row.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub component: Component,
    /// Exponent of the discrete `L^r` norm.
    pub exponent: f64,
    pub points: usize,
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log norm` against `log eps`; positive when
    /// the norms decay.
    pub slope: f64,
    /// Norms strictly decrease with `eps`.
    pub monotone: bool,
    /// All norms at rounding-noise level; the slope carries no information.
    pub degenerate: bool,
}

pub const DEGENERATE_LEVEL: f64 = 1e-9;

/// `(mean |x|^r)^{1/r}`.
pub fn discrete_lr(values: &[f64], r: f64) -> f64 {
    let n = values.len() as f64;
    (values.iter().map(|v| v.abs().powf(r)).sum::<f64>() / n).powf(1.0 / r)
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return f64::NAN;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn log_slope(eps: &[f64], norms: &[f64]) -> f64 {
    if norms.iter().any(|n| !(*n > 0.0)) {
        return f64::NAN;
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    fit_slope(&xs, &ys)
}

pub fn convergence_sweep<M: GroupMap + ?Sized>(f: &M, grid: &[Point], config: &SweepConfig) -> Result<ConvergenceReport> {
    if grid.is_empty() {
        return Err(CarnotError::InvalidParameter("empty grid".into()));
    }
    if config.eps.is_empty()
        || config.eps.iter().any(|e| !(*e > 0.0))
        || config.eps.windows(2).any(|w| !(w[1] < w[0]))
    {
        return Err(CarnotError::InvalidParameter(
            "eps list must be positive and strictly decreasing".into(),
        ));
    }
    if !(config.q > 0.0) {
        return Err(CarnotError::InvalidParameter(format!("q must be positive, got {}", config.q)));
    }
    let exponent = config.component.exponent(config.q, f.target());
    let base = Mollifier::new(f.source(), config.eps[0], config.mollifier)?;
    let mut norms = Vec::with_capacity(config.eps.len());
    for &eps in &config.eps {
        let m = base.rescaled(eps)?;
        let values: Vec<f64> = grid
            .par_iter()
            .map(|p| match config.component {
                Component::Form { row, direction } => pullback_component(f, &m, p, direction, row, config.fd),
                Component::Grad => gradient_error(f, &m, p, config.fd),
            })
            .collect::<Result<_>>()?;
        norms.push(discrete_lr(&values, exponent));
    }
    let rows = config
        .eps
        .iter()
        .zip(&norms)
        .enumerate()
        .map(|(i, (&eps, &norm))| SweepRow {
            eps,
            norm,
            slope: (i > 0).then(|| log_slope(&config.eps[..=i], &norms[..=i])),
        })
        .collect();
    Ok(ConvergenceReport {
        component: config.component,
        exponent,
        points: grid.len(),
        rows,
        slope: log_slope(&config.eps, &norms),
        monotone: norms.windows(2).all(|w| w[1] < w[0]),
        degenerate: norms.iter().all(|n| *n < DEGENERATE_LEVEL),
    })
}

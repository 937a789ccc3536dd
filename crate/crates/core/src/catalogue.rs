//! Concrete maps between Carnot groups and combinators over them.
//!
//! Map expressions:
//!
//! ```text
//! id | inv | inv_nophase | dil(2) | lt(1,0,0)
//! patched(eps=0.05,nmax=20) | auto([[a,b],[0,c]]) | lin([[..],..])
//! jet(k) | twist(k) | split(k)
//! prod(f, g) | perm([1,0]; f, g) | comp(f, g)
//! ```
//!
//! `comp(f, g)` is `f` after `g`. `perm(s; f_0, ..)` sends factor `i` of the
//! source through `f_i` into factor `s[i]` of the target (0-based).

use std::fmt;

use nalgebra::DMatrix;

use crate::calculus::{graded_automorphism, GroupMap};
use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};
use crate::metric::koranyi_unchecked;

#[derive(Debug, Clone)]
pub enum MapKind {
    Identity,
    LeftTranslation(Point),
    Dilation(f64),
    /// `block` is the horizontal block in row convention, `matrix` acts on
    /// coordinate columns.
    GradedAutomorphism {
        block: DMatrix<f64>,
        matrix: DMatrix<f64>,
    },
    KoranyiInversion,
    /// `(-z/|p|^2, -t/|p|^4)` without the complex phase; not a contact map.
    InversionNoPhase,
    PatchedInversion {
        eps: f64,
        n_max: u32,
    },
    PermutedProduct {
        maps: Vec<MapDescriptor>,
        sigma: Vec<usize>,
    },
    /// Applied right to left.
    Composition(Vec<MapDescriptor>),
    /// Linear in coordinates, row convention: `f(p) = M^T p`. A horizontal
    /// block leaves the higher layers unchanged.
    Linear(DMatrix<f64>),
    /// Contact map on f^3: the second prolongation of the plane map
    /// `(x, y) -> (x + k sin y, y + k sin x)`, read through a jet chart.
    JetShear(f64),
    /// `(x e^{kt}, y, t)` on h^1.
    Twist(f64),
    /// `(x + k sin y, y + k sin x, t + k t^3)` on h^1.
    Split(f64),
}

#[derive(Debug, Clone)]
pub struct MapDescriptor {
    source: CarnotGroup,
    target: CarnotGroup,
    kind: MapKind,
}

impl MapDescriptor {
    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn identity(g: &CarnotGroup) -> Self {
        Self::endo(g, MapKind::Identity)
    }

    fn endo(g: &CarnotGroup, kind: MapKind) -> Self {
        Self {
            source: g.clone(),
            target: g.clone(),
            kind,
        }
    }

    pub fn left_translation(g: &CarnotGroup, by: Point) -> Result<Self> {
        g.check(&by)?;
        Ok(Self::endo(g, MapKind::LeftTranslation(by)))
    }

    pub fn dilation(g: &CarnotGroup, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "dilation factor must be positive, got {lambda}"
            )));
        }
        Ok(Self::endo(g, MapKind::Dilation(lambda)))
    }

    pub fn graded_automorphism(g: &CarnotGroup, block: DMatrix<f64>) -> Result<Self> {
        let aut = graded_automorphism(g.spec(), &block)?;
        Ok(Self::endo(
            g,
            MapKind::GradedAutomorphism {
                block,
                matrix: aut.matrix,
            },
        ))
    }

    pub fn koranyi_inversion(g: &CarnotGroup) -> Result<Self> {
        require_heisenberg(g)?;
        Ok(Self::endo(g, MapKind::KoranyiInversion))
    }

    pub fn inversion_nophase(g: &CarnotGroup) -> Result<Self> {
        require_heisenberg(g)?;
        Ok(Self::endo(g, MapKind::InversionNoPhase))
    }

    pub fn patched_inversion(g: &CarnotGroup, eps: f64, n_max: u32) -> Result<Self> {
        require_heisenberg(g)?;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CarnotError::InvalidParameter(format!(
                "patched inversion needs 0 < eps < 1, got {eps}"
            )));
        }
        if n_max == 0 {
            return Err(CarnotError::InvalidParameter("nmax must be positive".into()));
        }
        Ok(Self::endo(g, MapKind::PatchedInversion { eps, n_max }))
    }

    pub fn linear(g: &CarnotGroup, m: DMatrix<f64>) -> Result<Self> {
        let ok = (m.nrows() == g.rank() && m.ncols() == g.rank())
            || (m.nrows() == g.dim() && m.ncols() == g.dim());
        if !ok {
            return Err(CarnotError::DimensionMismatch {
                expected: g.dim(),
                got: m.nrows(),
            });
        }
        Ok(Self::endo(g, MapKind::Linear(m)))
    }

    pub fn jet_shear(g: &CarnotGroup, k: f64) -> Result<Self> {
        if g.spec().layer_dims() != [2, 1, 1] || *g.spec() != *CarnotGroup::filiform(3)?.spec() {
            return Err(CarnotError::InvalidParameter("jet() needs the filiform group f3".into()));
        }
        Ok(Self::endo(g, MapKind::JetShear(k)))
    }

    pub fn twist(g: &CarnotGroup, k: f64) -> Result<Self> {
        require_h1(g, "twist")?;
        Ok(Self::endo(g, MapKind::Twist(k)))
    }

    pub fn split(g: &CarnotGroup, k: f64) -> Result<Self> {
        require_h1(g, "split")?;
        Ok(Self::endo(g, MapKind::Split(k)))
    }

    pub fn product(maps: Vec<MapDescriptor>) -> Result<Self> {
        let sigma = (0..maps.len()).collect();
        Self::permuted_product(maps, sigma)
    }

    /// Factor `i` goes through `maps[i]` into target factor `sigma[i]`.
    pub fn permuted_product(maps: Vec<MapDescriptor>, sigma: Vec<usize>) -> Result<Self> {
        if maps.is_empty() {
            return Err(CarnotError::Misaligned("a product needs at least one factor".into()));
        }
        let mut seen = vec![false; maps.len()];
        if sigma.len() != maps.len() || sigma.iter().any(|&s| s >= maps.len() || std::mem::replace(&mut seen[s], true)) {
            return Err(CarnotError::Misaligned(format!(
                "{sigma:?} is not a permutation of {} factors",
                maps.len()
            )));
        }
        let sources: Vec<&CarnotGroup> = maps.iter().map(|m| &m.source).collect();
        let mut targets: Vec<&CarnotGroup> = vec![&maps[0].target; maps.len()];
        for (i, m) in maps.iter().enumerate() {
            targets[sigma[i]] = &m.target;
        }
        let source = CarnotGroup::product(&sources)?;
        let target = CarnotGroup::product(&targets)?;
        Ok(Self {
            source,
            target,
            kind: MapKind::PermutedProduct { maps, sigma },
        })
    }

    /// `maps[0]` after `maps[1]` after ...
    pub fn composition(maps: Vec<MapDescriptor>) -> Result<Self> {
        if maps.is_empty() {
            return Err(CarnotError::Misaligned("empty composition".into()));
        }
        for w in maps.windows(2) {
            if w[1].target != w[0].source {
                return Err(CarnotError::Misaligned(format!(
                    "cannot compose {} after {}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Self {
            source: maps.last().unwrap().source.clone(),
            target: maps[0].target.clone(),
            kind: MapKind::Composition(maps),
        })
    }

    pub fn evaluate(&self, p: &Point) -> Result<Point> {
        self.source.check(p)?;
        self.eval(p).map(Point::new)
    }

    fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        let g = &self.source;
        match &self.kind {
            MapKind::Identity => Ok(p.to_vec()),
            MapKind::LeftTranslation(a) => {
                let mut out = vec![0.0; p.len()];
                g.multiply_into(a, p, &mut out);
                Ok(out)
            }
            MapKind::Dilation(l) => {
                let mut out = p.to_vec();
                g.dilate_in_place(*l, &mut out);
                Ok(out)
            }
            MapKind::GradedAutomorphism { matrix, .. } => Ok(mat_vec(matrix, p)),
            MapKind::KoranyiInversion => inversion(p, true),
            MapKind::InversionNoPhase => inversion(p, false),
            MapKind::PatchedInversion { eps, n_max } => {
                let r = koranyi_unchecked(p);
                let n = annulus_index(r)
                    .filter(|n| (1..=*n_max as i64).contains(n))
                    .ok_or_else(|| {
                        CarnotError::OutsideDomain(format!(
                            "norm {r} is outside [2^-{n_max}, 1)"
                        ))
                    })?;
                let mut out = inversion(p, true)?;
                g.dilate_in_place((2.0 - eps).powi(-(n as i32)), &mut out);
                Ok(out)
            }
            MapKind::PermutedProduct { maps, sigma } => {
                let src = g.spec().factors();
                let tgt = self.target.spec().factors();
                let mut out = vec![0.0; self.target.dim()];
                for (i, m) in maps.iter().enumerate() {
                    let x: Vec<f64> = src[i].iter().map(|&k| p[k]).collect();
                    let y = m.eval(&x)?;
                    for (&k, v) in tgt[sigma[i]].iter().zip(y) {
                        out[k] = v;
                    }
                }
                Ok(out)
            }
            MapKind::Composition(maps) => {
                let mut x = p.to_vec();
                for m in maps.iter().rev() {
                    x = m.eval(&x)?;
                }
                Ok(x)
            }
            MapKind::Linear(m) => {
                if m.nrows() == p.len() {
                    Ok(mat_vec(&m.transpose(), p))
                } else {
                    let r = m.nrows();
                    let mut out = p.to_vec();
                    for j in 0..r {
                        out[j] = (0..r).map(|i| m[(i, j)] * p[i]).sum();
                    }
                    Ok(out)
                }
            }
            MapKind::JetShear(k) => jet_shear(p, *k),
            MapKind::Twist(k) => Ok(vec![p[0] * (k * p[2]).exp(), p[1], p[2]]),
            MapKind::Split(k) => Ok(vec![
                p[0] + k * p[1].sin(),
                p[1] + k * p[0].sin(),
                p[2] + k * p[2].powi(3),
            ]),
        }
    }

    /// True when the map is a graded automorphism by construction.
    pub fn is_graded_homomorphism(&self) -> bool {
        match &self.kind {
            MapKind::Identity | MapKind::Dilation(_) | MapKind::GradedAutomorphism { .. } => true,
            MapKind::PermutedProduct { maps, .. } | MapKind::Composition(maps) => {
                maps.iter().all(MapDescriptor::is_graded_homomorphism)
            }
            _ => false,
        }
    }

    /// Constant Jacobian of the map with respect to Haar measure, when it is
    /// known in closed form.
    pub fn graded_jacobian(&self) -> Option<f64> {
        match &self.kind {
            MapKind::Identity | MapKind::LeftTranslation(_) => Some(1.0),
            MapKind::Dilation(l) => Some(l.powi(self.source.homogeneous_dimension() as i32)),
            MapKind::GradedAutomorphism { matrix, .. } => Some(matrix.determinant().abs()),
            MapKind::PermutedProduct { maps, .. } | MapKind::Composition(maps) => {
                maps.iter().map(MapDescriptor::graded_jacobian).product()
            }
            _ => None,
        }
    }
}

/// `n` with `2^-n <= r < 2^-n+1`.
pub fn annulus_index(r: f64) -> Option<i64> {
    if !(r > 0.0) || !r.is_finite() {
        return None;
    }
    let mut n = (-r.log2()).ceil() as i64;
    while 2f64.powi(-n as i32) > r {
        n += 1;
    }
    while 2f64.powi(-(n as i32) + 1) <= r {
        n -= 1;
    }
    Some(n)
}

fn mat_vec(m: &DMatrix<f64>, p: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * p[c]).sum())
        .collect()
}

/// Korányi inversion on h^n, `z_j = x_j + i y_j`:
/// `z -> -z / (|z|^2 + 4 i t)`, `t -> -t / |p|^4`.
fn inversion(p: &[f64], phase: bool) -> Result<Vec<f64>> {
    let n = (p.len() - 1) / 2;
    let t = p[2 * n];
    let z2: f64 = p[..2 * n].iter().map(|x| x * x).sum();
    let n4 = z2 * z2 + 16.0 * t * t;
    if n4 == 0.0 {
        return Err(CarnotError::OutsideDomain("inversion is undefined at the identity".into()));
    }
    let mut out = vec![0.0; p.len()];
    if phase {
        // -z (|z|^2 - 4it) / |p|^4
        let (re, im) = (z2 / n4, -4.0 * t / n4);
        for j in 0..n {
            let (x, y) = (p[j], p[n + j]);
            out[j] = -(x * re - y * im);
            out[n + j] = -(x * im + y * re);
        }
    } else {
        let s = n4.sqrt();
        for j in 0..2 * n {
            out[j] = -p[j] / s;
        }
    }
    out[2 * n] = -t / n4;
    Ok(out)
}

/// Jet chart `(a1, a2, a3, a4) -> (x, y, y', y'')` for f^3.
fn to_jet(a: &[f64]) -> [f64; 4] {
    let (a1, a2, a3, a4) = (a[0], a[1], a[2], a[3]);
    [
        a1,
        a4 - 0.5 * a1 * a3 + a1 * a1 * a2 / 6.0,
        -a3 + 0.5 * a1 * a2,
        a2,
    ]
}

fn from_jet(j: [f64; 4]) -> Vec<f64> {
    let [x, y, y1, y2] = j;
    let a3 = 0.5 * x * y2 - y1;
    let a4 = y + 0.5 * x * a3 - x * x * y2 / 6.0;
    vec![x, y2, a3, a4]
}

/// Second prolongation of `(x, y) -> (x + k sin y, y + k sin x)`.
fn jet_shear(p: &[f64], k: f64) -> Result<Vec<f64>> {
    let [x, y, y1, y2] = to_jet(p);
    let (sx, cx, sy, cy) = (x.sin(), x.cos(), y.sin(), y.cos());
    // total derivatives of the new coordinates along the jet
    let dx = 1.0 + k * cy * y1;
    let dy = k * cx + y1;
    let ddx = -k * sy * y1 * y1 + k * cy * y2;
    let ddy = -k * sx + y2;
    if dx.abs() < 1e-8 {
        return Err(CarnotError::OutsideDomain(format!(
            "jet map is singular at {p:?}"
        )));
    }
    Ok(from_jet([
        x + k * sy,
        y + k * sx,
        dy / dx,
        (ddy * dx - dy * ddx) / dx.powi(3),
    ]))
}

fn require_heisenberg(g: &CarnotGroup) -> Result<()> {
    g.spec().heisenberg_rank().map(|_| ()).ok_or(CarnotError::NotHeisenberg)
}

fn require_h1(g: &CarnotGroup, what: &str) -> Result<()> {
    match g.spec().heisenberg_rank() {
        Some(1) => Ok(()),
        _ => Err(CarnotError::InvalidParameter(format!("{what}() needs h1"))),
    }
}

impl GroupMap for MapDescriptor {
    fn source(&self) -> &CarnotGroup {
        &self.source
    }

    fn target(&self) -> &CarnotGroup {
        &self.target
    }

    fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.eval(p)
    }
}

fn fmt_matrix(m: &DMatrix<f64>) -> String {
    let rows: Vec<String> = (0..m.nrows())
        .map(|r| {
            let cells: Vec<String> = (0..m.ncols()).map(|c| m[(r, c)].to_string()).collect();
            format!("[{}]", cells.join(","))
        })
        .collect();
    format!("[{}]", rows.join(","))
}

impl fmt::Display for MapDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |maps: &[MapDescriptor]| maps.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",");
        match &self.kind {
            MapKind::Identity => write!(f, "id"),
            MapKind::LeftTranslation(p) => write!(f, "lt({p})"),
            MapKind::Dilation(l) => write!(f, "dil({l})"),
            MapKind::GradedAutomorphism { block, .. } => write!(f, "auto({})", fmt_matrix(block)),
            MapKind::KoranyiInversion => write!(f, "inv"),
            MapKind::InversionNoPhase => write!(f, "inv_nophase"),
            MapKind::PatchedInversion { eps, n_max } => write!(f, "patched(eps={eps},nmax={n_max})"),
            MapKind::PermutedProduct { maps, sigma } => {
                if sigma.iter().enumerate().all(|(i, &s)| i == s) {
                    write!(f, "prod({})", join(maps))
                } else {
                    let s: Vec<String> = sigma.iter().map(usize::to_string).collect();
                    write!(f, "perm([{}];{})", s.join(","), join(maps))
                }
            }
            MapKind::Composition(maps) => write!(f, "comp({})", join(maps)),
            MapKind::Linear(m) => write!(f, "lin({})", fmt_matrix(m)),
            MapKind::JetShear(k) => write!(f, "jet({k})"),
            MapKind::Twist(k) => write!(f, "twist({k})"),
            MapKind::Split(k) => write!(f, "split({k})"),
        }
    }
}

/// Parses a map expression with source group `g`.
pub fn parse_map(expr: &str, g: &CarnotGroup) -> Result<MapDescriptor> {
    let expr = expr.trim();
    let err = |msg: String| CarnotError::Expression(msg);
    let (name, args) = match expr.find('(') {
        Some(open) => {
            let inner = expr[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| err(format!("unbalanced parentheses in `{expr}`")))?;
            (expr[..open].trim(), Some(inner))
        }
        None => (expr, None),
    };
    let no_args = |m: MapDescriptor| -> Result<MapDescriptor> {
        match args {
            None => Ok(m),
            Some(a) if a.trim().is_empty() => Ok(m),
            Some(_) => Err(err(format!("`{name}` takes no arguments"))),
        }
    };
    let args_str = args.unwrap_or("");
    match name {
        "id" | "identity" => no_args(MapDescriptor::identity(g)),
        "inv" => no_args(MapDescriptor::koranyi_inversion(g)?),
        "inv_nophase" => no_args(MapDescriptor::inversion_nophase(g)?),
        "dil" => MapDescriptor::dilation(g, single_number(args_str, name)?),
        "jet" => MapDescriptor::jet_shear(g, single_number(args_str, name)?),
        "twist" => MapDescriptor::twist(g, single_number(args_str, name)?),
        "split" => MapDescriptor::split(g, single_number(args_str, name)?),
        "lt" => {
            let coords = split_top(args_str, ',')
                .iter()
                .map(|s| parse_number(s))
                .collect::<Result<Vec<_>>>()?;
            MapDescriptor::left_translation(g, Point::new(coords))
        }
        "patched" => {
            let mut eps = 0.05;
            let mut nmax = 20u32;
            for (pos, a) in split_top(args_str, ',').iter().enumerate() {
                if a.is_empty() {
                    continue;
                }
                let (key, value) = match a.split_once('=') {
                    Some((k, v)) => (k.trim(), v.trim()),
                    None => (if pos == 0 { "eps" } else { "nmax" }, a.as_str()),
                };
                match key {
                    "eps" => eps = parse_number(value)?,
                    "nmax" => {
                        nmax = value
                            .parse()
                            .map_err(|_| err(format!("bad nmax `{value}`")))?
                    }
                    _ => return Err(err(format!("unknown patched() argument `{key}`"))),
                }
            }
            MapDescriptor::patched_inversion(g, eps, nmax)
        }
        "auto" => MapDescriptor::graded_automorphism(g, parse_matrix(args_str)?),
        "lin" => MapDescriptor::linear(g, parse_matrix(args_str)?),
        "prod" | "perm" => {
            let (sigma, rest) = if name == "perm" {
                let (s, rest) = args_str
                    .split_once(';')
                    .ok_or_else(|| err("perm needs `sigma; maps`".into()))?;
                let sigma: Vec<usize> = serde_json::from_str(s.trim())
                    .map_err(|_| err(format!("bad permutation `{}`", s.trim())))?;
                (Some(sigma), rest)
            } else {
                (None, args_str)
            };
            let factors = g.factor_groups()?;
            let parts = split_top(rest, ',');
            if factors.is_empty() || parts.len() != factors.len() {
                return Err(CarnotError::Misaligned(format!(
                    "{} maps given for a group with {} factors",
                    parts.len(),
                    factors.len()
                )));
            }
            let maps = parts
                .iter()
                .zip(&factors)
                .map(|(s, fg)| parse_map(s, fg))
                .collect::<Result<Vec<_>>>()?;
            match sigma {
                Some(s) => MapDescriptor::permuted_product(maps, s),
                None => MapDescriptor::product(maps),
            }
        }
        "comp" => {
            let parts = split_top(args_str, ',');
            if parts.is_empty() || parts.iter().any(String::is_empty) {
                return Err(err("comp needs at least one map".into()));
            }
            let mut maps = Vec::with_capacity(parts.len());
            let mut current = g.clone();
            for s in parts.iter().rev() {
                let m = parse_map(s, &current)?;
                current = m.target.clone();
                maps.push(m);
            }
            maps.reverse();
            MapDescriptor::composition(maps)
        }
        _ => Err(err(format!("unknown map `{name}`"))),
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| CarnotError::Expression(format!("bad number `{}`", s.trim())))
}

fn single_number(args: &str, name: &str) -> Result<f64> {
    let parts = split_top(args, ',');
    if parts.len() != 1 {
        return Err(CarnotError::Expression(format!("`{name}` takes one number")));
    }
    parse_number(&parts[0])
}

fn parse_matrix(s: &str) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(s.trim())
        .map_err(|_| CarnotError::Expression(format!("bad matrix `{}`", s.trim())))?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != rows[0].len()) {
        return Err(CarnotError::Expression("matrix rows must have equal length".into()));
    }
    Ok(DMatrix::from_fn(n, rows[0].len(), |r, c| rows[r][c]))
}

/// Splits on `sep` outside brackets and parentheses.
fn split_top(s: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for ch in s.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

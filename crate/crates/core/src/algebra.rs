//! Stratified Lie algebras given by layer dimensions and structure constants.
//!
//! Basis indices are global and 0-based in the API (`0..dim`), with layer
//! boundaries derived from `layer_dims`. Spec files and reports use 1-based
//! indices. Structure constants are stored as exact rationals; a cached
//! sparse `f64` copy backs the numeric bracket.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};

pub type Rational = BigRational;

mod parse;

pub use parse::parse_algebra_spec;

/// Families the builtin constructors know about.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlgebraKind {
    Heisenberg(usize),
    Filiform(usize),
    Product,
    Custom,
}

/// A basis vector together with its weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisVector {
    pub index: usize,
    pub layer: usize,
}

#[derive(Debug, Clone)]
pub struct AlgebraSpec {
    name: String,
    layer_dims: Vec<usize>,
    offsets: Vec<usize>,
    table: BTreeMap<(usize, usize), Vec<Rational>>,
    kind: AlgebraKind,
    factors: Vec<Vec<usize>>,
    // (i, j, k, c): [e_i, e_j] has coefficient c on e_k, every ordered pair.
    sparse: Vec<(usize, usize, usize, f64)>,
}

impl PartialEq for AlgebraSpec {
    fn eq(&self, other: &Self) -> bool {
        self.layer_dims == other.layer_dims && self.table == other.table
    }
}

/// One violated identity found by [`AlgebraSpec::validate`]. Indices are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry { i: usize, j: usize },
    Grading { i: usize, j: usize, index: usize },
    Jacobi { i: usize, j: usize, k: usize },
    Generation { layer: usize, rank: usize, expected: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Antisymmetry { i, j } => write!(f, "[{i},{j}] != -[{j},{i}]"),
            Violation::Grading { i, j, index } => {
                write!(f, "[{i},{j}] has a component on e{index} in the wrong layer")
            }
            Violation::Jacobi { i, j, k } => write!(f, "Jacobi identity fails on ({i},{j},{k})"),
            Violation::Generation {
                layer,
                rank,
                expected,
            } => write!(
                f,
                "[g1, g{}] has rank {rank} in layer {layer}, expected {expected}",
                layer - 1
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[cfg(test)]
pub(crate) fn int(n: i64) -> Rational {
    Rational::from_integer(num_bigint::BigInt::from(n))
}

pub(crate) fn rational_to_f64(r: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

impl AlgebraSpec {
    /// Builds a spec from brackets on pairs `i < j`; the opposite orientation
    /// is filled in by antisymmetry.
    pub fn new(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        brackets: impl IntoIterator<Item = ((usize, usize), Vec<Rational>)>,
    ) -> Result<Self> {
        let mut table = BTreeMap::new();
        for ((i, j), v) in brackets {
            if i == j {
                return Err(CarnotError::InvalidParameter(format!(
                    "bracket of e{} with itself",
                    i + 1
                )));
            }
            let (a, b, v) = if i < j {
                (i, j, v)
            } else {
                (j, i, v.into_iter().map(|c| -c).collect())
            };
            let neg: Vec<Rational> = v.iter().map(|c| -c.clone()).collect();
            table.insert((a, b), v);
            table.insert((b, a), neg);
        }
        Self::from_table(name, layer_dims, table)
    }

    /// Stores the table exactly as given, one entry per ordered pair. Used to
    /// build tables that deliberately break an identity.
    pub fn from_table(
        name: impl Into<String>,
        layer_dims: Vec<usize>,
        table: BTreeMap<(usize, usize), Vec<Rational>>,
    ) -> Result<Self> {
        if layer_dims.is_empty() || layer_dims.contains(&0) {
            return Err(CarnotError::InvalidParameter(
                "layer dimensions must be positive".into(),
            ));
        }
        let dim: usize = layer_dims.iter().sum();
        let mut offsets = Vec::with_capacity(layer_dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for d in &layer_dims {
            acc += d;
            offsets.push(acc);
        }
        let mut clean = BTreeMap::new();
        for ((i, j), v) in table {
            if i >= dim || j >= dim {
                return Err(CarnotError::DimensionMismatch {
                    expected: dim,
                    got: i.max(j) + 1,
                });
            }
            if v.len() != dim {
                return Err(CarnotError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_zero()) {
                clean.insert((i, j), v);
            }
        }
        let mut sparse = Vec::new();
        for (&(i, j), v) in &clean {
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() {
                    sparse.push((i, j, k, rational_to_f64(c)));
                }
            }
        }
        Ok(Self {
            name: name.into(),
            layer_dims,
            offsets,
            table: clean,
            kind: AlgebraKind::Custom,
            factors: Vec::new(),
            sparse,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> &AlgebraKind {
        &self.kind
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    /// Index range of layer `k` (1-based layer).
    pub fn layer_range(&self, k: usize) -> Range<usize> {
        self.offsets[k - 1]..self.offsets[k]
    }

    /// Weight (1-based layer) of basis index `i`.
    pub fn layer_of(&self, i: usize) -> usize {
        self.offsets.partition_point(|&o| o <= i)
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisVector> + '_ {
        (0..self.dim()).map(|index| BasisVector {
            index,
            layer: self.layer_of(index),
        })
    }

    /// For product algebras: global basis indices of each factor, listed in
    /// the factor's own basis order.
    pub fn factors(&self) -> &[Vec<usize>] {
        &self.factors
    }

    pub fn homogeneous_dimension(&self) -> usize {
        self.layer_dims
            .iter()
            .enumerate()
            .map(|(k, d)| (k + 1) * d)
            .sum()
    }

    /// Raw table entry for the ordered pair `(i, j)`.
    pub fn bracket_entry(&self, i: usize, j: usize) -> Option<&[Rational]> {
        self.table.get(&(i, j)).map(Vec::as_slice)
    }

    pub fn table(&self) -> &BTreeMap<(usize, usize), Vec<Rational>> {
        &self.table
    }

    pub(crate) fn structure_constants(&self) -> &[(usize, usize, usize, f64)] {
        &self.sparse
    }

    /// Exact bilinear extension of the table.
    pub fn bracket_exact(&self, x: &[Rational], y: &[Rational]) -> Result<Vec<Rational>> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut out = vec![Rational::zero(); self.dim()];
        for (&(i, j), v) in &self.table {
            if x[i].is_zero() || y[j].is_zero() {
                continue;
            }
            let s = &x[i] * &y[j];
            for (o, c) in out.iter_mut().zip(v) {
                if !c.is_zero() {
                    *o += &s * c;
                }
            }
        }
        Ok(out)
    }

    /// Floating-point bracket.
    pub fn bracket(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let mut out = vec![0.0; self.dim()];
        self.bracket_into(x, y, &mut out);
        Ok(out)
    }

    /// Unchecked bracket accumulating into `out` (which is overwritten).
    pub(crate) fn bracket_into(&self, x: &[f64], y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for &(i, j, k, c) in &self.sparse {
            out[k] += c * x[i] * y[j];
        }
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(CarnotError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    fn unit(&self, i: usize) -> Vec<Rational> {
        let mut v = vec![Rational::zero(); self.dim()];
        v[i] = Rational::one();
        v
    }

    /// Checks antisymmetry, grading, Jacobi and generation by the first layer,
    /// all in exact arithmetic.
    pub fn validate(&self) -> ValidationReport {
        let n = self.dim();
        let s = self.step();
        let mut violations = Vec::new();
        let zero = vec![Rational::zero(); n];

        for i in 0..n {
            for j in i..n {
                let a = self.table.get(&(i, j)).unwrap_or(&zero);
                let b = self.table.get(&(j, i)).unwrap_or(&zero);
                if a.iter().zip(b).any(|(x, y)| !(x + y).is_zero()) {
                    violations.push(Violation::Antisymmetry { i: i + 1, j: j + 1 });
                }
            }
        }

        for (&(i, j), v) in &self.table {
            let target = self.layer_of(i) + self.layer_of(j);
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() && (target > s || self.layer_of(k) != target) {
                    violations.push(Violation::Grading {
                        i: i + 1,
                        j: j + 1,
                        index: k + 1,
                    });
                }
            }
        }

        let e: Vec<Vec<Rational>> = (0..n).map(|i| self.unit(i)).collect();
        let br = |x: &[Rational], y: &[Rational]| self.bracket_exact(x, y).expect("sized");
        for i in 0..n {
            for j in (i + 1)..n {
                for k in (j + 1)..n {
                    let a = br(&e[i], &br(&e[j], &e[k]));
                    let b = br(&e[j], &br(&e[k], &e[i]));
                    let c = br(&e[k], &br(&e[i], &e[j]));
                    let nonzero = a
                        .iter()
                        .zip(&b)
                        .zip(&c)
                        .any(|((x, y), z)| !(x + y + z).is_zero());
                    if nonzero {
                        violations.push(Violation::Jacobi {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }

        for k in 1..s {
            let target = self.layer_range(k + 1);
            let mut rows = Vec::new();
            for i in self.layer_range(1) {
                for y in self.layer_range(k) {
                    let v = br(&e[i], &e[y]);
                    rows.push(v[target.clone()].to_vec());
                }
            }
            let rank = rational_rank(rows);
            if rank != target.len() {
                violations.push(Violation::Generation {
                    layer: k + 1,
                    rank,
                    expected: target.len(),
                });
            }
        }

        ValidationReport { violations }
    }

    /// Heisenberg algebra h^n with the symplectic convention
    /// `[e_i, e_{n+i}] = e_{2n+1}` for `i = 1..n`.
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(CarnotError::InvalidParameter(
                "heisenberg needs n >= 1".into(),
            ));
        }
        let dim = 2 * n + 1;
        let brackets = (0..n).map(|i| {
            let mut v = vec![Rational::zero(); dim];
            v[2 * n] = Rational::one();
            ((i, n + i), v)
        });
        let mut spec = Self::new(format!("heisenberg({n})"), vec![2 * n, 1], brackets)?;
        spec.kind = AlgebraKind::Heisenberg(n);
        Ok(spec)
    }

    /// Step-`n` filiform algebra: layers `(2, 1, ..., 1)` with
    /// `[e_1, e_k] = e_{k+1}` for `k = 2..n`.
    pub fn filiform(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(CarnotError::InvalidParameter(format!(
                "filiform step must be >= 3, got {n}"
            )));
        }
        let dim = n + 1;
        let mut layers = vec![2];
        layers.extend(std::iter::repeat_n(1, n - 1));
        let brackets = (1..n).map(|k| {
            let mut v = vec![Rational::zero(); dim];
            v[k + 1] = Rational::one();
            ((0, k), v)
        });
        let mut spec = Self::new(format!("filiform({n})"), layers, brackets)?;
        spec.kind = AlgebraKind::Filiform(n);
        Ok(spec)
    }

    /// Direct sum, ordered layer by layer: layer k of the product lists
    /// layer k of each factor in turn.
    pub fn product(factors: &[&AlgebraSpec]) -> Result<Self> {
        if factors.is_empty() {
            return Err(CarnotError::InvalidParameter(
                "product needs at least one factor".into(),
            ));
        }
        let step = factors.iter().map(|f| f.step()).max().unwrap();
        let mut layer_dims = vec![0; step];
        for f in factors {
            for (k, d) in f.layer_dims.iter().enumerate() {
                layer_dims[k] += d;
            }
        }
        // global index of (factor, local index)
        let mut maps: Vec<Vec<usize>> = factors.iter().map(|f| vec![0; f.dim()]).collect();
        let mut next = 0;
        for k in 1..=step {
            for (fi, f) in factors.iter().enumerate() {
                if k <= f.step() {
                    for local in f.layer_range(k) {
                        maps[fi][local] = next;
                        next += 1;
                    }
                }
            }
        }
        let dim = next;
        let mut table = BTreeMap::new();
        for (fi, f) in factors.iter().enumerate() {
            for (&(i, j), v) in &f.table {
                let mut w = vec![Rational::zero(); dim];
                for (k, c) in v.iter().enumerate() {
                    w[maps[fi][k]] = c.clone();
                }
                table.insert((maps[fi][i], maps[fi][j]), w);
            }
        }
        let name = factors
            .iter()
            .map(|f| f.name.as_str())
            .collect::<Vec<_>>()
            .join(" x ");
        let mut spec = Self::from_table(name, layer_dims, table)?;
        spec.kind = AlgebraKind::Product;
        spec.factors = maps;
        Ok(spec)
    }

    /// Subalgebra spanned by `indices` (ascending, closed under brackets),
    /// reindexed from zero. Recovers the factors of a product.
    pub fn restrict(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.dim()];
        for (l, &g) in indices.iter().enumerate() {
            if g >= self.dim() || (l > 0 && g <= indices[l - 1]) {
                return Err(CarnotError::InvalidParameter(
                    "restriction indices must be ascending and in range".into(),
                ));
            }
            local[g] = l;
        }
        let mut layer_dims = vec![0; self.step()];
        for &g in indices {
            layer_dims[self.layer_of(g) - 1] += 1;
        }
        while layer_dims.last() == Some(&0) {
            layer_dims.pop();
        }
        let mut table = BTreeMap::new();
        for (&(i, j), v) in &self.table {
            let (li, lj) = (local[i], local[j]);
            if li == usize::MAX || lj == usize::MAX {
                continue;
            }
            let mut w = vec![Rational::zero(); indices.len()];
            for (k, c) in v.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                if local[k] == usize::MAX {
                    return Err(CarnotError::InvalidParameter(
                        "restriction is not closed under brackets".into(),
                    ));
                }
                w[local[k]] = c.clone();
            }
            table.insert((li, lj), w);
        }
        let mut spec = Self::from_table(name, layer_dims, table)?;
        if let Some(n) = spec.heisenberg_rank() {
            spec.kind = AlgebraKind::Heisenberg(n);
        }
        Ok(spec)
    }

    /// Factor algebras of a product spec, in factor order.
    pub fn factor_specs(&self) -> Result<Vec<Self>> {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, idx)| {
                let name = self
                    .name
                    .split(" x ")
                    .nth(i)
                    .map_or_else(|| format!("factor{}", i + 1), str::to_string);
                self.restrict(name, idx)
            })
            .collect()
    }

    /// Named constructor: `heisenberg n`, `filiform n`.
    pub fn builtin(name: &str, params: &[usize]) -> Result<Self> {
        match (name, params) {
            ("heisenberg", [n]) => Self::heisenberg(*n),
            ("filiform", [n]) => Self::filiform(*n),
            ("heisenberg" | "filiform", _) => Err(CarnotError::InvalidParameter(format!(
                "{name} takes one integer parameter"
            ))),
            _ => Err(CarnotError::UnknownBuiltin(name.to_string())),
        }
    }

    /// Returns `n` when the table equals the symplectic Heisenberg table h^n.
    pub fn heisenberg_rank(&self) -> Option<usize> {
        if let AlgebraKind::Heisenberg(n) = self.kind {
            return Some(n);
        }
        if self.layer_dims.len() != 2 || self.layer_dims[1] != 1 || self.layer_dims[0] % 2 != 0 {
            return None;
        }
        let n = self.layer_dims[0] / 2;
        let h = Self::heisenberg(n).ok()?;
        (h.table == self.table).then_some(n)
    }
}

/// Rank of a list of row vectors over the rationals.
pub(crate) fn rational_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let factor = &rows[r][c] / &pivot;
                for cc in c..cols {
                    let delta = &factor * &rows[rank][cc];
                    rows[r][cc] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(dim: usize, entries: &[(usize, i64)]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); dim];
        for &(k, c) in entries {
            out[k] = int(c);
        }
        out
    }

    #[test]
    fn heisenberg_dimensions() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        assert_eq!(h1.layer_dims(), &[2, 1]);
        assert_eq!(h1.homogeneous_dimension(), 4);
        for n in 1..5 {
            let h = AlgebraSpec::heisenberg(n).unwrap();
            assert_eq!(h.homogeneous_dimension(), 2 * n + 2);
        }
        assert_eq!(AlgebraSpec::heisenberg(2).unwrap().layer_dims(), &[4, 1]);
    }

    #[test]
    fn filiform_dimensions() {
        let f3 = AlgebraSpec::filiform(3).unwrap();
        assert_eq!(f3.layer_dims(), &[2, 1, 1]);
        assert_eq!(f3.homogeneous_dimension(), 7);
        assert_eq!(AlgebraSpec::filiform(4).unwrap().layer_dims(), &[2, 1, 1, 1]);
        assert!(AlgebraSpec::filiform(2).is_err());
    }

    #[test]
    fn builtins_validate() {
        for n in 1..=3 {
            assert!(AlgebraSpec::heisenberg(n).unwrap().validate().is_valid());
        }
        for n in 3..=6 {
            assert!(AlgebraSpec::filiform(n).unwrap().validate().is_valid());
        }
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        let f3 = AlgebraSpec::filiform(3).unwrap();
        let p = AlgebraSpec::product(&[&h1, &f3]).unwrap();
        assert!(p.validate().is_valid());
    }

    #[test]
    fn product_factors_round_trip() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        let f3 = AlgebraSpec::filiform(3).unwrap();
        let p = AlgebraSpec::product(&[&h1, &f3]).unwrap();
        let parts = p.factor_specs().unwrap();
        assert_eq!(parts[0], h1);
        assert_eq!(parts[1], f3);
        assert_eq!(parts[0].heisenberg_rank(), Some(1));
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(
            AlgebraSpec::builtin("engel", &[3]),
            Err(CarnotError::UnknownBuiltin(_))
        ));
    }

    #[test]
    fn bracket_examples() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        assert_eq!(
            h1.bracket(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
        let x = [0.3, -1.2, 4.0];
        assert_eq!(h1.bracket(&x, &x).unwrap(), vec![0.0; 3]);

        let f3 = AlgebraSpec::filiform(3).unwrap();
        let e1 = v(4, &[(0, 1)]);
        let e2 = v(4, &[(1, 1)]);
        let inner = f3.bracket_exact(&e1, &e2).unwrap();
        let outer = f3.bracket_exact(&e1, &inner).unwrap();
        assert_eq!(outer, v(4, &[(3, 1)]));
        assert!(h1.bracket(&[1.0, 0.0], &x).is_err());
    }

    #[test]
    fn product_has_no_cross_brackets() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        let p = AlgebraSpec::product(&[&h1, &h1]).unwrap();
        assert_eq!(p.layer_dims(), &[4, 2]);
        assert_eq!(p.factors(), &[vec![0, 1, 4], vec![2, 3, 5]]);
        assert_eq!(p.homogeneous_dimension(), 8);
        // [x of factor 0, y of factor 1] = 0
        assert!(p.bracket_entry(0, 3).is_none());
        assert_eq!(p.bracket_entry(0, 1).unwrap(), v(6, &[(4, 1)]).as_slice());
        assert_eq!(p.bracket_entry(2, 3).unwrap(), v(6, &[(5, 1)]).as_slice());
    }

    #[test]
    fn broken_antisymmetry_is_one_violation() {
        let h1 = AlgebraSpec::heisenberg(1).unwrap();
        let mut table = h1.table().clone();
        table.insert((1, 0), v(3, &[(2, 1)]));
        let bad = AlgebraSpec::from_table("bad", vec![2, 1], table).unwrap();
        let report = bad.validate();
        assert_eq!(
            report.violations,
            vec![Violation::Antisymmetry { i: 1, j: 2 }]
        );
    }

    #[test]
    fn broken_generation_detected() {
        let abelian = AlgebraSpec::new("r2+r1", vec![2, 1], Vec::new()).unwrap();
        let report = abelian.validate();
        assert_eq!(
            report.violations,
            vec![Violation::Generation {
                layer: 2,
                rank: 0,
                expected: 1
            }]
        );
    }

    #[test]
    fn heisenberg_detection() {
        let spec = parse_algebra_spec("layers 2 1\n[1,2] = 3").unwrap();
        assert_eq!(spec.heisenberg_rank(), Some(1));
        let f3 = AlgebraSpec::filiform(3).unwrap();
        assert_eq!(f3.heisenberg_rank(), None);
    }

    #[test]
    fn layer_lookup() {
        let f3 = AlgebraSpec::filiform(3).unwrap();
        let layers: Vec<usize> = f3.basis().map(|b| b.layer).collect();
        assert_eq!(layers, vec![1, 1, 2, 3]);
        assert_eq!(f3.layer_range(2), 2..3);
    }
}

//! Seeded point samplers and grid specifications.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CarnotError, Result};
use crate::group::{CarnotGroup, Point};
use crate::metric::HomogeneousNorm;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the coordinate box `[lo, hi]^N`.
pub fn uniform_in_box<R: Rng>(rng: &mut R, dim: usize, lo: f64, hi: f64) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(lo..hi)).collect())
}

/// Point on the unit sphere of `norm`, obtained by dilating a uniform box
/// sample.
pub fn unit_sphere_point<R: Rng>(g: &CarnotGroup, norm: HomogeneousNorm, rng: &mut R) -> Point {
    loop {
        let p = uniform_in_box(rng, g.dim(), -1.0, 1.0);
        let r = norm.eval(g, &p);
        if r > 1e-3 {
            let mut p = p;
            g.dilate_in_place(1.0 / r, &mut p);
            return p;
        }
    }
}

/// Point sets accepted by grid-based reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `n` points with homogeneous norm log-spaced in `[rmin, rmax]` and
    /// seeded directions.
    Annulus { rmin: f64, rmax: f64, n: usize },
    /// `n` seeded uniform points in the coordinate box `[lo, hi]^N`.
    Box { lo: f64, hi: f64, n: usize },
}

impl GridSpec {
    /// Parses `annulus(rmin,rmax,n)` or `box(lo,hi,n)`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = || CarnotError::InvalidParameter(format!("bad grid `{text}`"));
        let open = text.find('(').ok_or_else(bad)?;
        let body = text[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args: Vec<&str> = body.split(',').map(str::trim).collect();
        if args.len() != 3 {
            return Err(bad());
        }
        let a: f64 = args[0].parse().map_err(|_| bad())?;
        let b: f64 = args[1].parse().map_err(|_| bad())?;
        let n: usize = args[2].parse().map_err(|_| bad())?;
        let spec = match &text[..open] {
            "annulus" => GridSpec::Annulus { rmin: a, rmax: b, n },
            "box" => GridSpec::Box { lo: a, hi: b, n },
            _ => return Err(bad()),
        };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            GridSpec::Annulus { rmin, rmax, n } => rmin > 0.0 && rmax >= rmin && n > 0,
            GridSpec::Box { lo, hi, n } => hi > lo && n > 0,
        };
        if ok {
            Ok(())
        } else {
            Err(CarnotError::InvalidParameter(format!("degenerate grid {self:?}")))
        }
    }

    pub fn points(&self, g: &CarnotGroup, seed: u64) -> Result<Vec<Point>> {
        self.check()?;
        let mut rng = rng(seed);
        Ok(match *self {
            GridSpec::Annulus { rmin, rmax, n } => {
                let norm = HomogeneousNorm::default_for(g);
                (0..n)
                    .map(|i| {
                        let s = (i as f64 + 0.5) / n as f64;
                        let r = rmin * (rmax / rmin).powf(s);
                        let mut p = unit_sphere_point(g, norm, &mut rng);
                        g.dilate_in_place(r, &mut p);
                        p
                    })
                    .collect()
            }
            GridSpec::Box { lo, hi, n } => (0..n)
                .map(|_| uniform_in_box(&mut rng, g.dim(), lo, hi))
                .collect(),
        })
    }
}

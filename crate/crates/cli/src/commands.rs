use std::fs;
use std::path::Path;

use carnot_core::analysis::{
    area_integral, curve_layer_probe, default_h_list, factor_detect, filiform_area, holder_estimate,
    invariance_check, lq_annular_classify, patched_comparison, qc_certificate, slice_constancy,
    unboundedness_probe, AnnularConfig, AreaConfig, AreaDomain, AreaReport, FiliformArea, HolderFit,
    IntegrabilityReport, PatchedComparison, QcConfig, UnboundednessReport,
};
use carnot_core::calculus::{coframe_at, default_t_sequence, frame_at, pansu_differential, FdConfig};
use carnot_core::catalogue::MapKind;
use carnot_core::metric::{comparability_fit, koranyi_norm, layerwise_norm, quasi_metric_dk, Comparability};
use carnot_core::mollify::{convergence_sweep, Component, MollifierConfig, SweepConfig};
use carnot_core::report::{Format, Tabular};
use carnot_core::sampling::GridSpec;
use carnot_core::{parse_map, AlgebraSpec, CarnotGroup, MapDescriptor, Point};
use carnot_core::algebra::parse_algebra_spec;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::args::{Command, Common, FormatArg};
use crate::error::CliError;
use crate::output::{config_value, render, write, Meta};

type Res<T> = Result<T, CliError>;

fn config<T>(r: carnot_core::Result<T>) -> Res<T> {
    r.map_err(|e| CliError::Config(e.to_string()))
}

fn builtin_factor(name: &str) -> Res<AlgebraSpec> {
    let bad = || CliError::Config(format!("unknown group `{name}`"));
    let (kind, n) = name.split_at(1.min(name.len()));
    let n: usize = n.parse().map_err(|_| bad())?;
    match kind {
        "h" => config(AlgebraSpec::heisenberg(n)),
        "f" => config(AlgebraSpec::filiform(n)),
        _ => Err(bad()),
    }
}

/// A file path, or builtin names such as `h2`, `f4`, `h1xh1`.
pub fn load_algebra(name: &str) -> Res<AlgebraSpec> {
    let path = Path::new(name);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
        return config(parse_algebra_spec(&text));
    }
    let factors = name.split('x').map(builtin_factor).collect::<Res<Vec<_>>>()?;
    if factors.len() == 1 {
        return Ok(factors.into_iter().next().expect("one factor"));
    }
    config(AlgebraSpec::product(&factors.iter().collect::<Vec<_>>()))
}

fn load_group(name: &str) -> Res<CarnotGroup> {
    config(CarnotGroup::new(load_algebra(name)?))
}

fn point(g: &CarnotGroup, coords: &[f64]) -> Res<Point> {
    if coords.len() != g.dim() {
        return Err(CliError::Config(format!(
            "point has {} coordinates, group has dimension {}",
            coords.len(),
            g.dim()
        )));
    }
    Ok(Point::new(coords.to_vec()))
}

fn grid(g: &CarnotGroup, spec: &str, seed: u64) -> Res<Vec<Point>> {
    config(config(GridSpec::parse(spec))?.points(g, seed))
}

fn resolve_format(common: &Common, default: Format) -> Format {
    match common.format {
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Csv) => Format::Csv,
        None => match common.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => default,
        },
    }
}

#[derive(Debug, Serialize)]
struct FrameReport {
    point: Point,
    /// Row `i` holds the coordinates of `X_{i+1}`.
    frame: Vec<Vec<f64>>,
    /// Row `i` holds the coefficients of the `i+1`-th dual form.
    coframe: Vec<Vec<f64>>,
}
impl Tabular for FrameReport {}

#[derive(Debug, Serialize)]
struct EvalReport {
    map: String,
    point: Point,
    image: Point,
}
impl Tabular for EvalReport {}

#[derive(Debug, Serialize)]
struct MetricReport {
    point: Point,
    other: Point,
    dk: f64,
    layerwise_norm: f64,
    koranyi_norm: Option<f64>,
    comparability: Comparability,
}
impl Tabular for MetricReport {}

#[derive(Debug, Serialize)]
struct IntegrabilityOutput {
    integrability: IntegrabilityReport,
    patched: Option<PatchedComparison>,
}
impl Tabular for IntegrabilityOutput {
    fn table(&self) -> carnot_core::Result<carnot_core::report::Table> {
        self.integrability.table()
    }
}

#[derive(Debug, Serialize)]
struct HolderOutput {
    fit: HolderFit,
    p: Option<f64>,
    /// `1 - Q/p`.
    sobolev_exponent: Option<f64>,
}
impl Tabular for HolderOutput {}

#[derive(Debug, Serialize)]
struct AreaOutput {
    area: AreaReport,
    filiform: Option<FiliformArea>,
    unboundedness: Option<UnboundednessReport>,
}
impl Tabular for AreaOutput {}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect()
}

fn rows_t(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.ncols()).map(|c| m.column(c).iter().copied().collect()).collect()
}

fn finish<T: Tabular>(command: &Command, report: &T, default: Format) -> Res<()> {
    let common = command.common();
    let meta = Meta {
        command: command.name(),
        config: config_value(command),
        seed: common.seed,
    };
    let text = render(&meta, report, resolve_format(common, default))?;
    write(common.out.as_deref(), &text)
}

fn map_on(g: &CarnotGroup, expr: &str) -> Res<MapDescriptor> {
    config(parse_map(expr, g))
}

pub fn run(command: &Command) -> Res<()> {
    let common = command.common();
    let seed = common.seed;
    match command {
        Command::Validate(a) => {
            let spec = load_algebra(a.algebra.as_deref().unwrap_or(&common.group))?;
            finish(command, &spec.validate(), Format::Json)
        }
        Command::ShowFrame(a) => {
            let g = load_group(&common.group)?;
            let p = point(&g, &a.point)?;
            let report = FrameReport {
                frame: rows_t(&frame_at(&g, &p)?),
                coframe: rows(&coframe_at(&g, &p)?),
                point: p,
            };
            finish(command, &report, Format::Json)
        }
        Command::Eval(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let p = point(&g, &a.point)?;
            let report = EvalReport {
                map: f.to_string(),
                image: f.evaluate(&p)?,
                point: p,
            };
            finish(command, &report, Format::Json)
        }
        Command::Metric(a) => {
            let g = load_group(&common.group)?;
            let p = point(&g, &a.point)?;
            let q = match &a.other {
                Some(o) => point(&g, o)?,
                None => g.identity(),
            };
            let report = MetricReport {
                dk: quasi_metric_dk(&g, &p, &q)?,
                layerwise_norm: layerwise_norm(&g, &p),
                koranyi_norm: koranyi_norm(&g, &p).ok(),
                comparability: config(comparability_fit(&g, a.lo, a.hi, a.samples, seed))?,
                point: p,
                other: q,
            };
            finish(command, &report, Format::Json)
        }
        Command::Pansu(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let p = point(&g, &a.point)?;
            let ts = a.t.clone().unwrap_or_else(default_t_sequence);
            finish(command, &pansu_differential(&f, &p, &ts)?, Format::Json)
        }
        Command::MollifySweep(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let component = config(Component::parse(&a.component, &g, &g))?;
            let points = grid(&g, &a.grid, seed)?;
            let cfg = SweepConfig {
                eps: a.eps.clone(),
                q: a.q,
                component,
                mollifier: MollifierConfig {
                    order: a.order,
                    seed,
                    ..MollifierConfig::default()
                },
                fd: FdConfig::with_h(a.h),
            };
            finish(command, &convergence_sweep(&f, &points, &cfg)?, Format::Csv)
        }
        Command::Integrability(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let cfg = AnnularConfig {
                q: a.q,
                n_min: a.n_min,
                n_max: a.n_max,
                samples: a.samples,
                seed,
                margin: a.margin,
                ..AnnularConfig::default()
            };
            let integrability = lq_annular_classify(&f, &cfg)?;
            let patched = match (f.kind(), g.spec().heisenberg_rank()) {
                (MapKind::PatchedInversion { eps, .. }, Some(n)) => Some(patched_comparison(n, *eps, &integrability)),
                _ => None,
            };
            finish(command, &IntegrabilityOutput { integrability, patched }, Format::Json)
        }
        Command::Invariance(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let z = match a.z {
                Some(0) => return Err(CliError::Config("--z is 1-based".into())),
                Some(z) => z - 1,
                None => g.dim() - 1,
            };
            let subset: Option<Vec<usize>> = match &a.subset {
                Some(s) if s.contains(&0) => return Err(CliError::Config("--subset is 1-based".into())),
                Some(s) => Some(s.iter().map(|i| i - 1).collect()),
                None => None,
            };
            let points = grid(&g, &a.grid, seed)?;
            let report = invariance_check(&f, z, &points, a.step, FdConfig::default(), subset.as_deref())?;
            finish(command, &report, Format::Json)
        }
        Command::Slices(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let horizontal: Vec<Vec<f64>> = grid(&g, &a.grid, seed)?
                .into_iter()
                .map(|p| p[..g.rank()].to_vec())
                .collect();
            let report = slice_constancy(&f, &a.s, &horizontal, FdConfig::default())?;
            finish(command, &report, Format::Json)
        }
        Command::Holder(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let center = match &a.point {
                Some(c) => point(&g, c)?,
                None => g.identity(),
            };
            let fit = holder_estimate(&f, &center, a.pairs, a.rmin, a.rmax, seed)?;
            let q = g.homogeneous_dimension() as f64;
            let report = HolderOutput {
                fit,
                p: a.p,
                sobolev_exponent: a.p.map(|p| 1.0 - q / p),
            };
            finish(command, &report, Format::Json)
        }
        Command::Qc(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let points = grid(&g, &a.grid, seed)?;
            let cfg = QcConfig {
                k_target: a.k_target,
                distortion_points: a.distortion_points,
                r_list: a.r.clone(),
                directions: a.directions,
                seed,
                ..QcConfig::default()
            };
            finish(command, &qc_certificate(&f, &points, &cfg)?, Format::Json)
        }
        Command::Area(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let cfg = AreaConfig {
                order: a.order,
                exponent_override: a.exponent,
                seed,
                ..AreaConfig::default()
            };
            let heisenberg = g.spec().heisenberg_rank().is_some();
            let domain = if heisenberg {
                AreaDomain::HeisenbergSlab { height: a.height }
            } else {
                AreaDomain::FiliformBox { lo: a.lo, hi: a.hi }
            };
            let area = area_integral(&f, domain, &cfg, f.graded_jacobian())?;
            let filiform = match f.kind() {
                MapKind::GradedAutomorphism { block, .. }
                    if !heisenberg && block[(0, 1)] == 0.0 && block[(1, 0)] == 0.0 =>
                {
                    Some(filiform_area(g.step(), block[(0, 0)], block[(1, 1)], area.domain_volume)?)
                }
                _ => None,
            };
            let unboundedness = match &a.levels {
                Some(levels) => Some(unboundedness_probe(&f, levels, &cfg)?),
                None => None,
            };
            finish(
                command,
                &AreaOutput {
                    area,
                    filiform,
                    unboundedness,
                },
                Format::Json,
            )
        }
        Command::Factor(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let points = grid(&g, &a.grid, seed)?;
            finish(command, &factor_detect(&f, &points, FdConfig::default())?, Format::Json)
        }
        Command::Layers(a) => {
            let g = load_group(&common.group)?;
            let f = map_on(&g, &a.map)?;
            let start = match &a.point {
                Some(c) => point(&g, c)?,
                None => g.identity(),
            };
            let direction = match a.direction {
                Some(0) => return Err(CliError::Config("--direction is 1-based".into())),
                Some(d) => d - 1,
                None => g.dim() - 1,
            };
            let hs = a.h.clone().unwrap_or_else(default_h_list);
            let report = curve_layer_probe(&f, &start, direction, a.steps, a.span, &hs)?;
            finish(command, &report, Format::Json)
        }
    }
}

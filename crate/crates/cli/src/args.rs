use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "carnot-lab", version, about = "Numerical experiments on Carnot groups")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Builtin group (h1, h2, f3, h1xh1, ...) or a path to an algebra file.
    #[arg(long, default_value = "h1")]
    pub group: String,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Defaults to the extension of --out, then to the command's usual format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Check antisymmetry, grading, Jacobi and generation of a bracket table.
    Validate(ValidateArgs),
    /// Left-invariant frame and coframe at a point.
    ShowFrame(PointArgs),
    /// Evaluate a map expression.
    Eval(EvalArgs),
    /// Quasi-metric, norms and comparability constants.
    Metric(MetricArgs),
    /// Numerical Pansu differential.
    Pansu(PansuArgs),
    /// Decay of mollified pullback components.
    MollifySweep(SweepArgs),
    /// Annular L^q integrability of the horizontal gradient.
    Integrability(IntegrabilityArgs),
    /// Vertical derivative of det(D_H f).
    Invariance(InvarianceArgs),
    /// Variation of the slice Jacobian across vertical levels.
    Slices(SlicesArgs),
    /// Log-log fit of the metric distortion exponent.
    Holder(HolderArgs),
    /// Quasiconformality constant and metric distortion.
    Qc(QcArgs),
    /// Area-formula integrals.
    Area(AreaArgs),
    /// Factor permutation of a product map.
    Factor(FactorArgs),
    /// Layer profile of image increments along a curve.
    Layers(LayersArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: Common,
    /// Algebra file or builtin; falls back to --group.
    #[arg(long)]
    pub algebra: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct PointArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct MetricArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
    /// Second point; the identity when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub other: Option<Vec<f64>>,
    /// Pairs for the comparability fit.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub hi: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PansuArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Vec<f64>,
    /// Decreasing scales for the extrapolation.
    #[arg(long, value_delimiter = ',')]
    pub t: Option<Vec<f64>>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
    pub eps: Vec<f64>,
    /// `wK:Xv`, `dxK:Xv` or `grad`.
    #[arg(long, default_value = "w1:X1")]
    pub component: String,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value = "box(-1,1,50)")]
    pub grid: String,
    /// Gauss-Legendre order per half-panel.
    #[arg(long, default_value_t = 8)]
    pub order: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub h: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct IntegrabilityArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1)]
    pub n_min: i32,
    #[arg(long, default_value_t = 12)]
    pub n_max: i32,
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct InvarianceArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    /// 1-based vertical basis index; the last one when absent.
    #[arg(long)]
    pub z: Option<usize>,
    #[arg(long, default_value = "box(-1,1,100)")]
    pub grid: String,
    #[arg(long, default_value_t = 1e-3)]
    pub step: f64,
    /// 1-based horizontal indices of a sub-block.
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<usize>>,
}

#[derive(Debug, Args, Serialize)]
pub struct SlicesArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-1,0,1,2")]
    pub s: Vec<f64>,
    /// Horizontal coordinates are taken from these points.
    #[arg(long, default_value = "box(-1,1,20)")]
    pub grid: String,
}

#[derive(Debug, Args, Serialize)]
pub struct HolderArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    /// Centre of the sample pairs; the identity when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    #[arg(long, default_value_t = 2000)]
    pub pairs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub rmin: f64,
    #[arg(long, default_value_t = 1.0)]
    pub rmax: f64,
    /// Sobolev exponent; reports `1 - Q/p` alongside the fit.
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct QcArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value = "annulus(0.5,2,200)")]
    pub grid: String,
    #[arg(long, default_value_t = 1.05)]
    pub k_target: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.001")]
    pub r: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    #[arg(long, default_value_t = 10)]
    pub distortion_points: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct AreaArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    /// Slab height on Heisenberg groups.
    #[arg(long, default_value_t = 1.0)]
    pub height: f64,
    /// Slab heights for the growth probe.
    #[arg(long, value_delimiter = ',')]
    pub levels: Option<Vec<f64>>,
    /// Jacobian exponent on Heisenberg slabs.
    #[arg(long)]
    pub exponent: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub order: usize,
    /// Box bounds on filiform groups.
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub hi: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct FactorArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    #[arg(long, default_value = "box(-1,1,100)")]
    pub grid: String,
}

#[derive(Debug, Args, Serialize)]
pub struct LayersArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub map: String,
    /// Curve start; the identity when absent.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub point: Option<Vec<f64>>,
    /// 1-based basis index of the curve direction; the last one when absent.
    #[arg(long)]
    pub direction: Option<usize>,
    #[arg(long, default_value_t = 16)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub span: f64,
    #[arg(long, value_delimiter = ',')]
    pub h: Option<Vec<f64>>,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::ShowFrame(_) => "show-frame",
            Command::Eval(_) => "eval",
            Command::Metric(_) => "metric",
            Command::Pansu(_) => "pansu",
            Command::MollifySweep(_) => "mollify-sweep",
            Command::Integrability(_) => "integrability",
            Command::Invariance(_) => "invariance",
            Command::Slices(_) => "slices",
            Command::Holder(_) => "holder",
            Command::Qc(_) => "qc",
            Command::Area(_) => "area",
            Command::Factor(_) => "factor",
            Command::Layers(_) => "layers",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Validate(a) => &a.common,
            Command::ShowFrame(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Metric(a) => &a.common,
            Command::Pansu(a) => &a.common,
            Command::MollifySweep(a) => &a.common,
            Command::Integrability(a) => &a.common,
            Command::Invariance(a) => &a.common,
            Command::Slices(a) => &a.common,
            Command::Holder(a) => &a.common,
            Command::Qc(a) => &a.common,
            Command::Area(a) => &a.common,
            Command::Factor(a) => &a.common,
            Command::Layers(a) => &a.common,
        }
    }
}

//! Exact group arithmetic and numerical sub-Riemannian calculus on Carnot
//! groups of step at most three, with a verification harness for
//! mollification, integrability, invariance and quasiconformality checks.

pub mod algebra;
pub mod analysis;
pub mod calculus;
pub mod catalogue;
pub mod error;
pub mod group;
pub mod metric;
pub mod mollify;
pub mod report;
pub mod sampling;

pub use catalogue::{parse_map, MapDescriptor};
pub use algebra::{AlgebraSpec, ValidationReport, Violation};
pub use error::{CarnotError, Result};
pub use group::{CarnotGroup, Point};

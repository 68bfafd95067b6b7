//! Section-space outlier detection for high-dimensional numeric data.
//!
//! Each dimension is cut into equal-width sections. The k-NS detector scores
//! points by how dense their sections are and by how far they drift from
//! their section mates when those are mapped onto other dimensions. PSD,
//! RPGS and LOF are included as comparison detectors, alongside a synthetic
//! Gaussian-mixture generator and a precision/recall harness.

pub mod baselines;
pub mod datagen;
pub mod error;
pub mod eval;
pub mod io;
pub mod kns;
pub mod matrix;
pub mod presets;
pub mod projection;
pub mod report;
pub mod section;

pub use error::{Error, Result};
pub use kns::{dists, kns_components, run_kns, sec_valp};
pub use matrix::DataMatrix;
pub use projection::{
    projection_schedule, sec_val, DetectorParams, ProjectionSense, Schedule, ScoreComponents,
    SiVariant,
};
pub use report::ScoreReport;
pub use section::{compute_range, DimensionRange, SectionSpace};

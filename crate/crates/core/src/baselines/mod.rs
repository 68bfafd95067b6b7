//! Comparison detectors: PSD, RPGS and LOF.

pub mod lof;
pub mod psd;
pub mod rpgs;

pub use lof::{lof_scores, run_lof};
pub use psd::{
    psd_components, psd_params, psd_sec_valp, run_psd, section_clusters, SectionCluster,
};
pub use rpgs::{rpgs_center_value, run_rpgs, CenterFrame};

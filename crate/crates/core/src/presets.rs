//! Tuned parameters for the eight benchmark families.

use serde::{Deserialize, Serialize};

use crate::baselines::psd_params;
use crate::datagen::SyntheticSpec;
use crate::error::{Error, Result};
use crate::eval::Algorithm;
use crate::projection::DetectorParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preset {
    pub row: usize,
    pub n_points: usize,
    pub n_dims: usize,
    pub lof_knn: usize,
    pub psd_dst: usize,
    pub psd_scn: u32,
    pub kns_k: usize,
    pub kns_scn: u32,
}

#[allow(clippy::too_many_arguments)]
const fn row(
    row: usize,
    n_points: usize,
    n_dims: usize,
    lof_knn: usize,
    psd_dst: usize,
    psd_scn: u32,
    kns_k: usize,
    kns_scn: u32,
) -> Preset {
    Preset {
        row,
        n_points,
        n_dims,
        lof_knn,
        psd_dst,
        psd_scn,
        kns_k,
        kns_scn,
    }
}

pub const PRESETS: [Preset; 8] = [
    row(1, 500, 10, 8, 20, 25, 5, 25),
    row(2, 500, 100, 10, 20, 25, 6, 25),
    row(3, 1000, 100, 10, 40, 25, 10, 40),
    row(4, 500, 500, 10, 20, 25, 6, 25),
    row(5, 1000, 500, 10, 30, 34, 10, 34),
    row(6, 500, 1000, 10, 20, 25, 6, 25),
    row(7, 1000, 1000, 10, 30, 34, 10, 34),
    row(8, 1000, 10000, 10, 30, 34, 10, 34),
];

impl Preset {
    /// Looks up `row1`..`row8` (or a bare row number).
    pub fn by_name(name: &str) -> Result<Self> {
        let digits = name.strip_prefix("row").unwrap_or(name);
        digits
            .parse::<usize>()
            .ok()
            .and_then(|r| r.checked_sub(1))
            .and_then(|i| PRESETS.get(i).copied())
            .ok_or_else(|| Error::param(format!("unknown preset {name:?}; expected row1..row8")))
    }

    pub fn name(&self) -> String {
        format!("row{}", self.row)
    }

    pub fn dataset(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec::mixture(self.n_points, self.n_dims, seed)
    }

    pub fn kns(&self, seed: u64) -> DetectorParams {
        DetectorParams::new(self.kns_k, self.kns_scn).with_seed(seed)
    }

    pub fn psd(&self, seed: u64) -> DetectorParams {
        psd_params(self.psd_dst, self.psd_scn).with_seed(seed)
    }

    pub fn algorithms(&self, seed: u64) -> Vec<Algorithm> {
        vec![
            Algorithm::Kns(self.kns(seed)),
            Algorithm::Psd(self.psd(seed)),
            Algorithm::Lof { knn: self.lof_knn },
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(Preset::by_name("row2").unwrap().kns_k, 6);
        assert_eq!(Preset::by_name("8").unwrap().n_dims, 10000);
        assert!(Preset::by_name("row0").is_err());
        assert!(Preset::by_name("row9").is_err());
        assert!(Preset::by_name("paper").is_err());
    }

    #[test]
    fn shapes_match_families() {
        for (p, shape) in PRESETS.iter().zip(crate::datagen::TABLE1_SHAPES) {
            assert_eq!((p.n_points, p.n_dims), shape);
        }
    }
}

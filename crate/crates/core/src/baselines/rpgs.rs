//! Rim projected grid statistic (RPGS) center-section values.
//!
//! Only the center-section function is defined precisely; [`run_rpgs`] is a
//! plain mean of it over dimensions and is not a faithful RPGS score.

use crate::error::Result;
use crate::matrix::DataMatrix;
use crate::report::ScoreReport;
use crate::section::SectionSpace;

/// Occupied-range extent of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CenterFrame {
    pub min_sec: u32,
    pub max_sec: u32,
    /// `ceil((min_sec + max_sec) / 2)`.
    pub center: u32,
}

impl CenterFrame {
    pub fn of(space: &SectionSpace, dim: usize) -> Self {
        let occ = space.occupancies(dim);
        let min_sec = occ.iter().position(|&c| c > 0).map_or(1, |i| i as u32 + 1);
        let max_sec = occ.iter().rposition(|&c| c > 0).map_or(1, |i| i as u32 + 1);
        Self::new(min_sec, max_sec)
    }

    pub fn new(min_sec: u32, max_sec: u32) -> Self {
        Self {
            min_sec,
            max_sec,
            center: (min_sec + max_sec).div_ceil(2),
        }
    }

    /// Distance of `section` from the center, scaled to `[0, 1]` against the
    /// rim on the same side.
    pub fn value(&self, section: u32) -> f64 {
        if self.max_sec == self.min_sec {
            return 0.0;
        }
        if section > self.center {
            f64::from(section - self.center) / f64::from(self.max_sec - self.center)
        } else if section < self.center {
            f64::from(self.center - section) / f64::from(self.center - self.min_sec)
        } else {
            0.0
        }
    }
}

pub fn rpgs_center_value(space: &SectionSpace, dim: usize, point: usize) -> f64 {
    CenterFrame::of(space, dim).value(space.section_of(dim, point))
}

/// Mean center-section value over all dimensions (non-canonical aggregate).
pub fn run_rpgs(data: &DataMatrix, scn: u32) -> Result<ScoreReport> {
    let space = SectionSpace::build(data, scn)?;
    let n = space.n_points();
    let m = space.n_dims();
    let mut scores = vec![0.0; n];
    for dim in 0..m {
        let frame = CenterFrame::of(&space, dim);
        for (s, &sec) in scores.iter_mut().zip(space.dimension_sections(dim)) {
            *s += frame.value(sec);
        }
    }
    for s in &mut scores {
        *s /= m as f64;
    }
    ScoreReport::new("rpgs", scores)
}

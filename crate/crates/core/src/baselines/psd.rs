//! Projected section density (PSD).
//!
//! Same three-step orchestration as k-NS; in a projection each member is
//! valued by the occupancy of its target section times the length of the
//! section cluster that section belongs to.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::projection::{
    self, DetectorParams, Orchestrator, ProjectionSense, ScoreComponents, SectionScorer,
};
use crate::report::ScoreReport;
use crate::section::SectionSpace;

/// A maximal run of consecutive non-empty sections in one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectionCluster {
    pub dimension: usize,
    /// First section ID of the run (1-based, inclusive).
    pub first: u32,
    /// Last section ID of the run (inclusive).
    pub last: u32,
}

impl SectionCluster {
    pub fn clu_len(&self) -> u32 {
        self.last - self.first + 1
    }

    pub fn contains(&self, section: u32) -> bool {
        (self.first..=self.last).contains(&section)
    }
}

/// Splits the non-empty sections of `dim` into maximal consecutive runs.
pub fn section_clusters(space: &SectionSpace, dim: usize) -> Vec<SectionCluster> {
    let mut out = Vec::new();
    let mut start: Option<u32> = None;
    for (i, &c) in space.occupancies(dim).iter().enumerate() {
        let sec = i as u32 + 1;
        match (c > 0, start) {
            (true, None) => start = Some(sec),
            (false, Some(first)) => {
                out.push(SectionCluster {
                    dimension: dim,
                    first,
                    last: sec - 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(first) = start {
        out.push(SectionCluster {
            dimension: dim,
            first,
            last: space.scn(),
        });
    }
    out
}

/// `Sec × CluLen` for every section of every dimension, `[dim * scn + s - 1]`.
/// Empty sections hold 0.
fn section_products(space: &SectionSpace) -> Vec<f64> {
    let scn = space.scn() as usize;
    let mut out = vec![0.0; space.n_dims() * scn];
    for dim in 0..space.n_dims() {
        for c in section_clusters(space, dim) {
            for sec in c.first..=c.last {
                out[dim * scn + (sec - 1) as usize] =
                    f64::from(space.occupancy(dim, sec)) * f64::from(c.clu_len());
            }
        }
    }
    out
}

pub(crate) struct PsdScorer {
    products: Vec<f64>,
    scn: usize,
}

impl PsdScorer {
    pub fn new(space: &SectionSpace) -> Self {
        Self {
            products: section_products(space),
            scn: space.scn() as usize,
        }
    }
}

impl SectionScorer for PsdScorer {
    fn raw_values(&self, space: &SectionSpace, target: usize, members: &[u32], out: &mut Vec<f64>) {
        let secs = space.dimension_sections(target);
        let row = &self.products[target * self.scn..(target + 1) * self.scn];
        out.extend(
            members
                .iter()
                .map(|&p| row[(secs[p as usize] - 1) as usize]),
        );
    }
}

/// PSD projection ratio of one point for a single `source -> target`
/// projection. `dst` sets the section-size gate exactly as `k` does for k-NS.
pub fn psd_sec_valp(
    space: &SectionSpace,
    source: usize,
    target: usize,
    point: usize,
    dst: usize,
) -> Result<f64> {
    if source == target {
        return Err(Error::Contract(
            "projection source and target dimensions must differ".into(),
        ));
    }
    let members = space.members(source, space.section_of(source, point));
    let gate = projection::small_section_threshold(dst);
    if members.len() < gate {
        return Err(Error::Contract(format!(
            "section of point {point} holds {} points, below the scoring threshold {gate}",
            members.len()
        )));
    }
    let mut raw = Vec::with_capacity(members.len());
    PsdScorer::new(space).raw_values(space, target, members, &mut raw);
    let mut out = vec![0.0; space.n_points()];
    projection::normalize_into(members, &raw, &mut out);
    Ok(out[point])
}

/// PSD parameters start from the k-NS ones with `dst` in `k` and the literal
/// projection sense.
pub fn psd_params(dst: usize, scn: u32) -> DetectorParams {
    DetectorParams::new(dst, scn).with_sense(ProjectionSense::Literal)
}

/// Scores every point with PSD. `params.k` is the `dst` parameter.
pub fn run_psd(data: &DataMatrix, params: &DetectorParams) -> Result<ScoreReport> {
    let space = projection::prepare(data, params)?;
    Orchestrator {
        scorer: PsdScorer::new(&space),
        space: &space,
        params: *params,
    }
    .score("psd")
}

pub fn psd_components(data: &DataMatrix, params: &DetectorParams) -> Result<ScoreComponents> {
    let space = projection::prepare(data, params)?;
    Ok(Orchestrator {
        scorer: PsdScorer::new(&space),
        space: &space,
        params: *params,
    }
    .components())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn space(rows: &[Vec<f64>], scn: u32) -> SectionSpace {
        SectionSpace::build(&DataMatrix::from_rows(rows).unwrap(), scn).unwrap()
    }

    #[test]
    fn clusters_are_maximal_runs() {
        // dimension 0 over scn = 6: sections 1,2 occupied, 3 empty, 4 occupied,
        // 5 empty, 6 occupied
        let rows: Vec<Vec<f64>> = [0.0, 1.0, 1.2, 3.5, 5.9]
            .iter()
            .map(|&x| vec![x, 0.0])
            .collect();
        let s = space(&rows, 6);
        let occ = s.occupancies(0).to_vec();
        assert_eq!(occ, vec![1, 2, 0, 1, 0, 1]);
        let cl = section_clusters(&s, 0);
        let spans: Vec<_> = cl.iter().map(|c| (c.first, c.last, c.clu_len())).collect();
        assert_eq!(spans, vec![(1, 2, 2), (4, 4, 1), (6, 6, 1)]);
        let non_empty = occ.iter().filter(|&&c| c > 0).count() as u32;
        assert_eq!(
            cl.iter().map(SectionCluster::clu_len).sum::<u32>(),
            non_empty
        );
    }

    #[test]
    fn three_member_products() {
        // source section {a, b, c}; target products a = b = 3 * 2, c = 3 * 1
        let rows = vec![
            vec![5.0, 0.0],
            vec![5.0, 0.0],
            vec![5.0, 3.5],
            vec![0.0, 0.0],
            vec![0.0, 1.5],
            vec![0.0, 3.5],
            vec![0.0, 3.5],
            vec![0.0, 5.9],
        ];
        let s = space(&rows, 6);
        assert_eq!(s.members(0, 6), &[0, 1, 2]);
        assert_eq!(s.occupancies(1), &[3, 1, 0, 3, 0, 1]);
        let a = psd_sec_valp(&s, 0, 1, 0, 2).unwrap();
        let b = psd_sec_valp(&s, 0, 1, 1, 2).unwrap();
        let c = psd_sec_valp(&s, 0, 1, 2, 2).unwrap();
        assert_abs_diff_eq!(a, 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.2, epsilon = 1e-15);
        assert_abs_diff_eq!(c, 0.6, epsilon = 1e-15);
    }

    #[test]
    fn constant_target_gives_unit_ratio() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![1.0, 7.0, i as f64]).collect();
        let s = space(&rows, 3);
        for p in 0..5 {
            assert_eq!(psd_sec_valp(&s, 0, 1, p, 2).unwrap(), 1.0);
        }
    }

    #[test]
    fn constant_data_scores_equal() {
        let rows: Vec<Vec<f64>> = (0..12).map(|_| vec![1.0, 2.0, 3.0]).collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let r = run_psd(&data, &DetectorParams::new(2, 5).with_alpha(2)).unwrap();
        assert!(r.scores.iter().all(|&x| x == r.scores[0]));
    }
}

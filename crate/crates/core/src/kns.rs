//! The k-nearest-sections (k-NS) detector.
//!
//! Points are grouped by their section in a source dimension; each group is
//! then mapped onto a target dimension and every member is compared against
//! its `k` closest co-members there, with closeness measured in section steps.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::projection::{self, DetectorParams, Orchestrator, ScoreComponents, SectionScorer};
use crate::report::ScoreReport;
use crate::section::SectionSpace;

/// Section distance between two points in `dim`: `|Δ section| + 1`.
#[inline]
pub fn dists(space: &SectionSpace, dim: usize, a: usize, b: usize) -> u32 {
    space.section_of(dim, a).abs_diff(space.section_of(dim, b)) + 1
}

/// Sum of the `k` smallest squared section distances from a point in section
/// `at` to the other members of its group, given the group's target-section
/// histogram `hist` (index 0 is section 1). The point itself is counted in
/// `hist` and excluded here.
///
/// Equal distances contribute equally, so which tied neighbour is chosen does
/// not change the sum.
fn k_nearest_sq_sum(hist: &[u32], at: usize, k: usize) -> f64 {
    let mut need = k as u64;
    let mut total = 0u64;
    let same = u64::from(hist[at]) - 1;
    let take = same.min(need);
    total += take;
    need -= take;
    let mut step = 1usize;
    while need > 0 && (at >= step || at + step < hist.len()) {
        let mut avail = 0u64;
        if at >= step {
            avail += u64::from(hist[at - step]);
        }
        if at + step < hist.len() {
            avail += u64::from(hist[at + step]);
        }
        let take = avail.min(need);
        let d = (step + 1) as u64;
        total += take * d * d;
        need -= take;
        step += 1;
    }
    total as f64
}

pub(crate) struct KnsScorer {
    pub k: usize,
}

impl SectionScorer for KnsScorer {
    fn raw_values(&self, space: &SectionSpace, target: usize, members: &[u32], out: &mut Vec<f64>) {
        let scn = space.scn() as usize;
        let mut hist = vec![0u32; scn];
        let secs = space.dimension_sections(target);
        for &p in members {
            hist[(secs[p as usize] - 1) as usize] += 1;
        }
        // members sharing a target section share the value
        let mut cache = vec![f64::NAN; scn];
        for &p in members {
            let at = (secs[p as usize] - 1) as usize;
            if cache[at].is_nan() {
                cache[at] = k_nearest_sq_sum(&hist, at, self.k);
            }
            out.push(cache[at]);
        }
    }
}

/// Projected nearest-section ratio of one point for a single
/// `source -> target` projection.
///
/// Requires the point's source section to hold at least `ceil(3k/2)` points;
/// the detector substitutes 1 for smaller sections before ever calling this.
pub fn sec_valp(
    space: &SectionSpace,
    source: usize,
    target: usize,
    point: usize,
    k: usize,
) -> Result<f64> {
    if source == target {
        return Err(Error::Contract(
            "projection source and target dimensions must differ".into(),
        ));
    }
    let members = space.members(source, space.section_of(source, point));
    let gate = projection::small_section_threshold(k);
    if members.len() < gate || k < 1 {
        return Err(Error::Contract(format!(
            "section of point {point} holds {} points, below the scoring threshold {gate}",
            members.len()
        )));
    }
    let mut raw = Vec::with_capacity(members.len());
    KnsScorer { k }.raw_values(space, target, members, &mut raw);
    let mut out = vec![0.0; space.n_points()];
    projection::normalize_into(members, &raw, &mut out);
    Ok(out[point])
}

/// Scores every point of `data` with k-NS. Higher scores are more outlying.
pub fn run_kns(data: &DataMatrix, params: &DetectorParams) -> Result<ScoreReport> {
    let space = projection::prepare(data, params)?;
    Orchestrator {
        space: &space,
        scorer: KnsScorer { k: params.k },
        params: *params,
    }
    .score("kns")
}

/// All density ratios and projection ratios of a k-NS run. Holds
/// `events × n` values; meant for inspection and testing on modest inputs.
pub fn kns_components(data: &DataMatrix, params: &DetectorParams) -> Result<ScoreComponents> {
    let space = projection::prepare(data, params)?;
    Ok(Orchestrator {
        space: &space,
        scorer: KnsScorer { k: params.k },
        params: *params,
    }
    .components())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::{sec_val, Schedule};
    use approx::assert_abs_diff_eq;

    fn space(rows: &[Vec<f64>], scn: u32) -> SectionSpace {
        SectionSpace::build(&DataMatrix::from_rows(rows).unwrap(), scn).unwrap()
    }

    #[test]
    fn dists_floor_is_one() {
        // target sections with scn = 4 over [0, 3]: 0 -> 1, 1 -> 2, 3 -> 4
        let s = space(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 3.0]], 4);
        assert_eq!(dists(&s, 1, 0, 0), 1);
        assert_eq!(dists(&s, 1, 0, 1), 2);
        assert_eq!(dists(&s, 1, 1, 2), 3);
        assert_eq!(dists(&s, 0, 1, 2), 1);
    }

    #[test]
    fn dists_two_and_five() {
        let s = space(
            &[
                vec![1.0, 0.0],
                vec![4.0, 0.0],
                vec![0.0, 0.0],
                vec![5.0, 0.0],
            ],
            6,
        );
        let a = s.section_of(0, 0);
        let b = s.section_of(0, 1);
        assert_eq!((a, b), (2, 5));
        assert_eq!(dists(&s, 0, 0, 1), 4);
    }

    #[test]
    fn three_member_section_ratio() {
        // source dim constant -> one section {a, b, c}; target sections 1, 1, 4
        let s = space(&[vec![2.0, 0.0], vec![2.0, 0.0], vec![2.0, 3.0]], 4);
        assert_eq!(s.dimension_sections(1), &[1, 1, 4]);
        let a = sec_valp(&s, 0, 1, 0, 2).unwrap();
        let b = sec_valp(&s, 0, 1, 1, 2).unwrap();
        let c = sec_valp(&s, 0, 1, 2, 2).unwrap();
        assert_abs_diff_eq!(a, 17.0 / 22.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 17.0 / 22.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c, 32.0 / 22.0, epsilon = 1e-15);
    }

    #[test]
    fn uniform_target_gives_unit_ratio() {
        // both dims constant: every point shares one section everywhere
        let rows: Vec<Vec<f64>> = (0..7).map(|_| vec![1.0, 0.0]).collect();
        let s = space(&rows, 3);
        for p in 0..rows.len() {
            assert_eq!(sec_valp(&s, 0, 1, p, 2).unwrap(), 1.0);
        }
    }

    #[test]
    fn small_section_is_contract_error() {
        let s = space(&[vec![0.0, 0.0], vec![0.0, 1.0], vec![9.0, 3.0]], 4);
        assert!(matches!(sec_valp(&s, 0, 1, 0, 2), Err(Error::Contract(_))));
        assert!(matches!(sec_valp(&s, 1, 1, 0, 2), Err(Error::Contract(_))));
    }

    #[test]
    fn sec_val_examples() {
        // one point per section: density equals the average
        let s = space(
            &[
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![2.0, 0.0],
                vec![3.0, 0.0],
            ],
            4,
        );
        for p in 0..4 {
            assert_eq!(sec_val(&s, 0, p), 1.0);
        }
        // one isolated point against a section holding 7: d = 8/2 = 4, ratio 1/4
        let mut rows: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0, 0.0]).collect();
        rows.push(vec![10.0, 0.0]);
        let s = space(&rows, 4);
        assert_eq!(s.avg_density(0), 4.0);
        assert_abs_diff_eq!(sec_val(&s, 0, 7), 0.0625, epsilon = 1e-15);
    }

    #[test]
    fn single_point_has_unit_sec_val() {
        let s = space(&[vec![3.0, 4.0]], 5);
        assert_eq!(sec_val(&s, 0, 0), 1.0);
        assert_eq!(sec_val(&s, 1, 0), 1.0);
    }

    #[test]
    fn k_nearest_sum_walks_outward() {
        // histogram over 5 sections
        let hist = [2, 0, 3, 0, 1];
        // point in section 3 (index 2): two same-section at 1, then need
        // k=4 -> two more at distance 3 (sections 1 and 5) -> 1+1+9+9
        assert_eq!(k_nearest_sq_sum(&hist, 2, 4), 20.0);
        assert_eq!(k_nearest_sq_sum(&hist, 4, 2), 9.0 + 9.0);
    }

    #[test]
    fn identical_points_score_one() {
        let rows: Vec<Vec<f64>> = (0..10).map(|_| vec![1.0, 2.0, 3.0]).collect();
        let data = DataMatrix::from_rows(&rows).unwrap();
        let p = DetectorParams::new(2, 4).with_alpha(2);
        let r = run_kns(&data, &p).unwrap();
        assert!(r.scores.iter().all(|&s| s == 1.0));
        let p = p.with_schedule(Schedule::Exhaustive);
        assert!(run_kns(&data, &p).unwrap().scores.iter().all(|&s| s == 1.0));
    }
}

//! Equal-width section grid over each dimension.
//!
//! Every dimension's raw range is widened by 0.1% of its length (half on each
//! end) and cut into `scn` equal sections. Section IDs are 1-based.

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Fraction of the raw length added to each end of a dimension's range.
const ENLARGE_PER_SIDE: f64 = 0.0005;

/// Enlarged bounds and section width of one dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionRange {
    pub lo: f64,
    pub hi: f64,
    pub width: f64,
    /// Raw minimum equals raw maximum.
    pub degenerate: bool,
}

impl DimensionRange {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// 1-based section of `x`, clamped into `1..=scn`.
    #[inline]
    pub fn section_of(&self, x: f64, scn: u32) -> u32 {
        if self.degenerate {
            return 1;
        }
        let t = ((x - self.lo) / self.width).floor();
        if t < 0.0 {
            1
        } else if t >= f64::from(scn) {
            scn
        } else {
            t as u32 + 1
        }
    }
}

/// Enlarged range for a dimension whose raw values span `[raw_min, raw_max]`.
pub fn compute_range(raw_min: f64, raw_max: f64, scn: u32) -> Result<DimensionRange> {
    if !raw_min.is_finite() || !raw_max.is_finite() {
        return Err(Error::data(format!(
            "non-finite range bounds ({raw_min}, {raw_max})"
        )));
    }
    if raw_min > raw_max {
        return Err(Error::data(format!(
            "range minimum {raw_min} exceeds maximum {raw_max}"
        )));
    }
    if scn < 1 {
        return Err(Error::param("section count must be positive"));
    }
    let len = raw_max - raw_min;
    if len == 0.0 {
        return Ok(DimensionRange {
            lo: raw_min,
            hi: raw_min,
            width: 0.0,
            degenerate: true,
        });
    }
    let lo = raw_min - ENLARGE_PER_SIDE * len;
    let hi = raw_max + ENLARGE_PER_SIDE * len;
    Ok(DimensionRange {
        lo,
        hi,
        width: (hi - lo) / f64::from(scn),
        degenerate: false,
    })
}

/// Section assignment and occupancy for every dimension of a dataset.
///
/// Immutable after construction. Besides the `PointInfo` / `SectionInfo`
/// grids it keeps, per dimension, the point IDs bucketed by section (in
/// ascending ID order) so detectors can walk a section's members directly.
#[derive(Debug, Clone)]
pub struct SectionSpace {
    scn: u32,
    n: usize,
    m: usize,
    ranges: Vec<DimensionRange>,
    /// `[dim * n + point]`, values in `1..=scn`.
    point_info: Vec<u32>,
    /// `[dim * scn + (section - 1)]`.
    section_info: Vec<u32>,
    avg_density: Vec<f64>,
    /// Per dimension, point IDs grouped by section.
    members: Vec<u32>,
    /// `[dim * (scn + 1) + (section - 1)]` start offsets into `members`.
    offsets: Vec<u32>,
}

impl SectionSpace {
    pub fn build(data: &DataMatrix, scn: u32) -> Result<Self> {
        if scn < 2 {
            return Err(Error::param(format!(
                "section count must be at least 2, got {scn}"
            )));
        }
        let n = data.n_points();
        let m = data.n_dims();
        let s = scn as usize;
        let mut ranges = Vec::with_capacity(m);
        let mut point_info = vec![0u32; n * m];
        let mut section_info = vec![0u32; m * s];
        let mut avg_density = Vec::with_capacity(m);
        let mut members = vec![0u32; n * m];
        let mut offsets = vec![0u32; m * (s + 1)];

        for dim in 0..m {
            let (lo, hi) = data
                .column(dim)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                    (lo.min(x), hi.max(x))
                });
            let range = compute_range(lo, hi, scn)?;
            let ids = &mut point_info[dim * n..(dim + 1) * n];
            let counts = &mut section_info[dim * s..(dim + 1) * s];
            for (p, x) in data.column(dim).enumerate() {
                let sec = range.section_of(x, scn);
                ids[p] = sec;
                counts[(sec - 1) as usize] += 1;
            }
            let occupied = counts.iter().filter(|&&c| c > 0).count();
            avg_density.push(n as f64 / occupied as f64);

            // counting sort keeps ascending point order within a section
            let offs = &mut offsets[dim * (s + 1)..(dim + 1) * (s + 1)];
            for sec in 0..s {
                offs[sec + 1] = offs[sec] + counts[sec];
            }
            let mut cursor: Vec<u32> = offs[..s].to_vec();
            let bucket = &mut members[dim * n..(dim + 1) * n];
            for (p, &sec) in ids.iter().enumerate() {
                let c = &mut cursor[(sec - 1) as usize];
                bucket[*c as usize] = p as u32;
                *c += 1;
            }
            ranges.push(range);
        }

        let space = Self {
            scn,
            n,
            m,
            ranges,
            point_info,
            section_info,
            avg_density,
            members,
            offsets,
        };
        debug_assert!(space.check_conservation());
        Ok(space)
    }

    pub fn scn(&self) -> u32 {
        self.scn
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn n_dims(&self) -> usize {
        self.m
    }

    pub fn range(&self, dim: usize) -> &DimensionRange {
        &self.ranges[dim]
    }

    /// 1-based section ID of `point` in `dim`.
    #[inline]
    pub fn section_of(&self, dim: usize, point: usize) -> u32 {
        self.point_info[dim * self.n + point]
    }

    /// Section IDs of every point in `dim`.
    pub fn dimension_sections(&self, dim: usize) -> &[u32] {
        &self.point_info[dim * self.n..(dim + 1) * self.n]
    }

    /// Number of points in a 1-based section.
    #[inline]
    pub fn occupancy(&self, dim: usize, section: u32) -> u32 {
        self.section_info[dim * self.scn as usize + (section - 1) as usize]
    }

    /// Occupancy counts of all sections of `dim`, index 0 is section 1.
    pub fn occupancies(&self, dim: usize) -> &[u32] {
        let s = self.scn as usize;
        &self.section_info[dim * s..(dim + 1) * s]
    }

    /// Average density over non-empty sections (`d_i`).
    pub fn avg_density(&self, dim: usize) -> f64 {
        self.avg_density[dim]
    }

    /// Point IDs in a 1-based section, ascending.
    pub fn members(&self, dim: usize, section: u32) -> &[u32] {
        let base = dim * (self.scn as usize + 1);
        let lo = self.offsets[base + (section - 1) as usize] as usize;
        let hi = self.offsets[base + section as usize] as usize;
        &self.members[dim * self.n + lo..dim * self.n + hi]
    }

    /// Non-empty sections of `dim` with their members, ascending by section.
    pub fn occupied_sections(&self, dim: usize) -> impl Iterator<Item = (u32, &[u32])> {
        (1..=self.scn)
            .map(move |sec| (sec, self.members(dim, sec)))
            .filter(|(_, mem)| !mem.is_empty())
    }

    fn check_conservation(&self) -> bool {
        (0..self.m).all(|d| {
            self.occupancies(d)
                .iter()
                .map(|&c| c as usize)
                .sum::<usize>()
                == self.n
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn range_matches_worked_example() {
        let x = compute_range(5.0, 23.0, 5).unwrap();
        assert_abs_diff_eq!(x.lo, 4.991, epsilon = 1e-12);
        assert_abs_diff_eq!(x.hi, 23.009, epsilon = 1e-12);
        assert_abs_diff_eq!(x.length(), 18.018, epsilon = 1e-12);
        assert_abs_diff_eq!(x.width, 3.6036, epsilon = 1e-12);

        let y = compute_range(6.0, 25.0, 5).unwrap();
        assert_abs_diff_eq!(y.lo, 5.9905, epsilon = 1e-12);
        assert_abs_diff_eq!(y.hi, 25.0095, epsilon = 1e-12);
        assert_abs_diff_eq!(y.length(), 19.019, epsilon = 1e-12);
        assert_abs_diff_eq!(y.width, 3.8038, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_range() {
        let r = compute_range(7.0, 7.0, 5).unwrap();
        assert!(r.degenerate);
        assert_eq!((r.lo, r.hi, r.width), (7.0, 7.0, 0.0));
        assert_eq!(r.section_of(7.0, 5), 1);
    }

    #[test]
    fn non_finite_range_is_invalid_data() {
        assert!(matches!(
            compute_range(f64::NAN, 1.0, 5),
            Err(Error::InvalidData(_))
        ));
        assert!(compute_range(0.0, f64::INFINITY, 5).is_err());
    }

    #[test]
    fn first_point_lands_in_first_section() {
        let x = compute_range(5.0, 23.0, 5).unwrap();
        assert_eq!(x.section_of(5.0, 5), 1);
        assert_eq!(x.section_of(23.0, 5), 5);
        // clamping guard
        assert_eq!(x.section_of(-100.0, 5), 1);
        assert_eq!(x.section_of(100.0, 5), 5);
    }

    #[test]
    fn rejects_small_scn() {
        let d = DataMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!(matches!(
            SectionSpace::build(&d, 1),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn avg_density_counts_only_occupied_sections() {
        // 23 points; dimension 0 spreads over all 5 sections, dimension 1
        // leaves section 3 empty.
        let mut rows = Vec::new();
        for p in 0..23 {
            let x = (p % 5) as f64;
            let y = [0.0, 1.0, 3.0, 4.0][p % 4];
            rows.push(vec![x, y]);
        }
        let d = DataMatrix::from_rows(&rows).unwrap();
        let s = SectionSpace::build(&d, 5).unwrap();
        assert_abs_diff_eq!(s.avg_density(0), 4.6, epsilon = 1e-12);
        assert_eq!(s.occupancy(1, 3), 0);
        assert_abs_diff_eq!(s.avg_density(1), 5.75, epsilon = 1e-12);
    }

    #[test]
    fn members_are_bucketed_in_id_order() {
        let d = DataMatrix::from_rows(&[
            vec![0.0, 1.0],
            vec![10.0, 1.0],
            vec![0.1, 2.0],
            vec![9.9, 3.0],
        ])
        .unwrap();
        let s = SectionSpace::build(&d, 2).unwrap();
        assert_eq!(s.members(0, 1), &[0, 2]);
        assert_eq!(s.members(0, 2), &[1, 3]);
        let occ: Vec<_> = s.occupied_sections(0).map(|(sec, _)| sec).collect();
        assert_eq!(occ, vec![1, 2]);
    }

    #[test]
    fn constant_column_maps_to_section_one() {
        let d = DataMatrix::from_rows(&[vec![3.0, 1.0], vec![3.0, 2.0], vec![3.0, 5.0]]).unwrap();
        let s = SectionSpace::build(&d, 4).unwrap();
        assert!(s.range(0).degenerate);
        assert_eq!(s.dimension_sections(0), &[1, 1, 1]);
        assert_eq!(s.avg_density(0), 3.0);
    }
}

//! Shared orchestration for the section-space detectors.
//!
//! Both k-NS and PSD follow the same three steps: a per-dimension density
//! ratio, a batch of projection events where every non-empty source section
//! is compared in a target dimension, and a per-point combination of the two.
//! Only the raw per-member value computed in a projection differs, which is
//! what [`SectionScorer`] abstracts.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::report::ScoreReport;
use crate::section::SectionSpace;

/// How the per-point score combines density ratios and projection ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SiVariant {
    /// `2 / (mean(sec_val²) + mean(sec_valp^±2))`, see [`ProjectionSense`].
    #[default]
    Reciprocal,
    /// `w1·Σ sec_val + w2·Σ sec_valp`.
    Weighted,
}

/// How the reciprocal score treats projection ratios.
///
/// A k-NS projection ratio grows when a point drifts away from its section
/// mates, which under the reciprocal score would pull outliers down. The
/// inverted sense feeds `1/sec_valp²` into the score instead so both terms
/// push outliers up. PSD ratios already shrink for outliers and use the
/// literal sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionSense {
    #[default]
    Inverted,
    Literal,
}

/// Which (source, target) dimension pairs are projected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    /// `alpha` passes, each over a fresh random dimension order, projecting
    /// every dimension onto its successor (last wraps to first).
    #[default]
    Random,
    /// All `m·(m-1)` ordered pairs, source-major. Intended for reference runs
    /// on small inputs.
    Exhaustive,
}

/// Parameters shared by the section-space detectors.
///
/// For PSD, `k` carries the `dst` parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    pub k: usize,
    pub scn: u32,
    pub alpha: usize,
    pub seed: u64,
    pub variant: SiVariant,
    #[serde(default)]
    pub sense: ProjectionSense,
    /// Overrides the weighted-variant defaults `1/m` and `1/(m(m-1))`.
    pub weights: Option<(f64, f64)>,
    pub schedule: Schedule,
}

impl DetectorParams {
    pub const DEFAULT_ALPHA: usize = 5;

    pub fn new(k: usize, scn: u32) -> Self {
        Self {
            k,
            scn,
            alpha: Self::DEFAULT_ALPHA,
            seed: 0,
            variant: SiVariant::Reciprocal,
            sense: ProjectionSense::Inverted,
            weights: None,
            schedule: Schedule::Random,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_alpha(mut self, alpha: usize) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn with_variant(mut self, variant: SiVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_sense(mut self, sense: ProjectionSense) -> Self {
        self.sense = sense;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn with_weights(mut self, w1: f64, w2: f64) -> Self {
        self.weights = Some((w1, w2));
        self
    }

    /// Checks the parameters against a dataset with `m` dimensions.
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.k < 2 {
            return Err(Error::param(format!(
                "k must be at least 2, got {}",
                self.k
            )));
        }
        if self.scn < 2 {
            return Err(Error::param(format!(
                "scn must be at least 2, got {}",
                self.scn
            )));
        }
        if self.schedule == Schedule::Random && (self.alpha < 1 || self.alpha > m - 1) {
            return Err(Error::param(format!(
                "alpha must lie in 1..={} for {m} dimensions, got {}",
                m - 1,
                self.alpha
            )));
        }
        if let Some((w1, w2)) = self.weights {
            if !(w1.is_finite() && w2.is_finite() && w1 >= 0.0 && w2 >= 0.0) {
                return Err(Error::param("weights must be finite and non-negative"));
            }
        }
        Ok(())
    }

    /// Smallest section size that is scored in a projection: `ceil(3k/2)`.
    pub fn small_section_threshold(&self) -> usize {
        small_section_threshold(self.k)
    }
}

pub fn small_section_threshold(k: usize) -> usize {
    (3 * k).div_ceil(2)
}

/// Projection events for an `m`-dimensional dataset.
///
/// The random schedule draws one permutation per pass from a ChaCha8 stream
/// seeded with `seed`, so the schedule is identical on every platform.
pub fn projection_schedule(m: usize, params: &DetectorParams) -> Vec<(usize, usize)> {
    match params.schedule {
        Schedule::Exhaustive => (0..m)
            .flat_map(|src| (0..m).filter(move |&t| t != src).map(move |t| (src, t)))
            .collect(),
        Schedule::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let mut order: Vec<usize> = (0..m).collect();
            let mut events = Vec::with_capacity(params.alpha * m);
            for _ in 0..params.alpha {
                order.shuffle(&mut rng);
                for i in 0..m {
                    events.push((order[i], order[(i + 1) % m]));
                }
            }
            events
        }
    }
}

/// `(occupancy / avg_density)²` of the point's section.
#[inline]
pub fn sec_val(space: &SectionSpace, dim: usize, point: usize) -> f64 {
    let occ = f64::from(space.occupancy(dim, space.section_of(dim, point)));
    let r = occ / space.avg_density(dim);
    r * r
}

/// Raw per-member value of a projection: one value per member of a source
/// section, measured in the target dimension. Must be strictly positive.
pub(crate) trait SectionScorer: Sync {
    fn raw_values(&self, space: &SectionSpace, target: usize, members: &[u32], out: &mut Vec<f64>);
}

/// Ratio of each member's raw value against the section mean.
pub(crate) fn normalize_into(members: &[u32], raw: &[f64], out: &mut [f64]) {
    let s = members.len() as f64;
    let mean = raw.iter().sum::<f64>() / s;
    for (&p, &v) in members.iter().zip(raw) {
        out[p as usize] = v / mean;
    }
}

/// Evaluates one projection event, writing a ratio for every point.
pub(crate) fn project_event<S: SectionScorer + ?Sized>(
    space: &SectionSpace,
    scorer: &S,
    source: usize,
    target: usize,
    gate: usize,
    out: &mut [f64],
) {
    let mut raw = Vec::new();
    for (_, members) in space.occupied_sections(source) {
        if members.len() < gate {
            for &p in members {
                out[p as usize] = 1.0;
            }
        } else {
            raw.clear();
            scorer.raw_values(space, target, members, &mut raw);
            normalize_into(members, &raw, out);
        }
    }
}

/// Every intermediate value of a section-space detector run.
#[derive(Debug, Clone)]
pub struct ScoreComponents {
    pub n: usize,
    pub m: usize,
    /// `[dim * n + point]`.
    pub sec_val: Vec<f64>,
    /// `[event * n + point]`.
    pub sec_valp: Vec<f64>,
    pub schedule: Vec<(usize, usize)>,
}

impl ScoreComponents {
    pub fn sec_val(&self, dim: usize, point: usize) -> f64 {
        self.sec_val[dim * self.n + point]
    }

    pub fn sec_valp(&self, event: usize, point: usize) -> f64 {
        self.sec_valp[event * self.n + point]
    }

    pub fn event(&self, event: usize) -> &[f64] {
        &self.sec_valp[event * self.n..(event + 1) * self.n]
    }
}

/// Per-point running sums over dimensions and projection events.
struct Totals {
    sv: Vec<f64>,
    sv_sq: Vec<f64>,
    svp: Vec<f64>,
    /// `Σ sec_valp²` or `Σ sec_valp⁻²` depending on the sense.
    svp_sq: Vec<f64>,
}

impl Totals {
    fn new(n: usize) -> Self {
        Self {
            sv: vec![0.0; n],
            sv_sq: vec![0.0; n],
            svp: vec![0.0; n],
            svp_sq: vec![0.0; n],
        }
    }
}

/// Squared projection ratio as it enters the reciprocal score.
#[inline]
pub fn projection_term(svp: f64, sense: ProjectionSense) -> f64 {
    match sense {
        ProjectionSense::Literal => svp * svp,
        ProjectionSense::Inverted => 1.0 / (svp * svp),
    }
}

/// Events evaluated per parallel batch; batches are merged in event order so
/// results do not depend on the worker count.
const EVENT_BATCH: usize = 32;

pub(crate) struct Orchestrator<'a, S: SectionScorer> {
    pub space: &'a SectionSpace,
    pub scorer: S,
    pub params: DetectorParams,
}

impl<'a, S: SectionScorer> Orchestrator<'a, S> {
    fn sec_vals(&self) -> Vec<f64> {
        let n = self.space.n_points();
        let mut out = vec![0.0; n * self.space.n_dims()];
        out.par_chunks_mut(n).enumerate().for_each(|(dim, row)| {
            for (p, v) in row.iter_mut().enumerate() {
                *v = sec_val(self.space, dim, p);
            }
        });
        out
    }

    /// Runs `events`, handing each finished event's ratios to `sink` in
    /// schedule order.
    fn run_events(&self, events: &[(usize, usize)], mut sink: impl FnMut(&[f64])) {
        let n = self.space.n_points();
        let gate = self.params.small_section_threshold();
        for batch in events.chunks(EVENT_BATCH) {
            let results: Vec<Vec<f64>> = batch
                .par_iter()
                .map(|&(src, tgt)| {
                    let mut out = vec![0.0; n];
                    project_event(self.space, &self.scorer, src, tgt, gate, &mut out);
                    out
                })
                .collect();
            for r in &results {
                sink(r);
            }
        }
    }

    pub fn components(&self) -> ScoreComponents {
        let n = self.space.n_points();
        let m = self.space.n_dims();
        let schedule = projection_schedule(m, &self.params);
        let mut sec_valp = Vec::with_capacity(schedule.len() * n);
        self.run_events(&schedule, |r| sec_valp.extend_from_slice(r));
        ScoreComponents {
            n,
            m,
            sec_val: self.sec_vals(),
            sec_valp,
            schedule,
        }
    }

    pub fn score(&self, name: &str) -> Result<ScoreReport> {
        let n = self.space.n_points();
        let m = self.space.n_dims();
        let schedule = projection_schedule(m, &self.params);
        let mut totals = Totals::new(n);
        let sv = self.sec_vals();
        for row in sv.chunks_exact(n) {
            accumulate(&mut totals.sv, &mut totals.sv_sq, row, |v| v * v);
        }
        let sense = self.params.sense;
        self.run_events(&schedule, |r| {
            accumulate(&mut totals.svp, &mut totals.svp_sq, r, |v| {
                projection_term(v, sense)
            })
        });
        let scores = combine(&totals, m, schedule.len(), &self.params);
        ScoreReport::new(name, scores)
    }
}

fn accumulate(sum: &mut [f64], sum_sq: &mut [f64], row: &[f64], sq: impl Fn(f64) -> f64) {
    for ((s, q), &v) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(row) {
        *s += v;
        *q += sq(v);
    }
}

fn combine(t: &Totals, m: usize, events: usize, params: &DetectorParams) -> Vec<f64> {
    let md = m as f64;
    let ed = events as f64;
    match params.variant {
        SiVariant::Reciprocal => t
            .sv_sq
            .iter()
            .zip(&t.svp_sq)
            .map(|(&a, &b)| si_reciprocal(a / md, b / ed))
            .collect(),
        SiVariant::Weighted => {
            let (w1, w2) = params
                .weights
                .unwrap_or((1.0 / md, 1.0 / (md * (md - 1.0))));
            t.sv.iter()
                .zip(&t.svp)
                .map(|(&a, &b)| w1 * a + w2 * b)
                .collect()
        }
    }
}

/// Reciprocal score from the mean squared density ratio and the mean
/// projection term.
#[inline]
pub fn si_reciprocal(mean_sv_sq: f64, mean_svp_sq: f64) -> f64 {
    2.0 / (mean_sv_sq + mean_svp_sq)
}

/// Validates inputs and builds the section space shared by every detector.
pub(crate) fn prepare(data: &DataMatrix, params: &DetectorParams) -> Result<SectionSpace> {
    params.validate(data.n_dims())?;
    if data.n_points() <= params.scn as usize {
        log::warn!(
            "{} points over {} sections per dimension; density ratios will be coarse",
            data.n_points(),
            params.scn
        );
    }
    SectionSpace::build(data, params.scn)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_rounds_up() {
        assert_eq!(small_section_threshold(2), 3);
        assert_eq!(small_section_threshold(5), 8);
        assert_eq!(small_section_threshold(6), 9);
        assert_eq!(small_section_threshold(10), 15);
    }

    #[test]
    fn random_schedule_is_a_cycle_per_pass() {
        let p = DetectorParams::new(3, 5).with_alpha(3).with_seed(9);
        let ev = projection_schedule(7, &p);
        assert_eq!(ev.len(), 21);
        for pass in ev.chunks(7) {
            let mut srcs: Vec<_> = pass.iter().map(|e| e.0).collect();
            let mut tgts: Vec<_> = pass.iter().map(|e| e.1).collect();
            srcs.sort();
            tgts.sort();
            assert_eq!(srcs, (0..7).collect::<Vec<_>>());
            assert_eq!(tgts, (0..7).collect::<Vec<_>>());
            assert!(pass.iter().all(|(s, t)| s != t));
            for w in pass.windows(2) {
                assert_eq!(w[0].1, w[1].0);
            }
            assert_eq!(pass[6].1, pass[0].0);
        }
        assert_eq!(ev, projection_schedule(7, &p));
    }

    #[test]
    fn exhaustive_schedule_covers_all_pairs() {
        let p = DetectorParams::new(2, 5).with_schedule(Schedule::Exhaustive);
        let ev = projection_schedule(4, &p);
        assert_eq!(ev.len(), 12);
        assert_eq!(ev[0], (0, 1));
        assert_eq!(ev[3], (1, 0));
    }

    #[test]
    fn alpha_bounds() {
        let p = DetectorParams::new(2, 5).with_alpha(5);
        assert!(p.validate(6).is_ok());
        assert!(matches!(p.validate(5), Err(Error::Parameter(_))));
        assert!(DetectorParams::new(1, 5).with_alpha(1).validate(3).is_err());
        assert!(DetectorParams::new(2, 1).with_alpha(1).validate(3).is_err());
        assert!(DetectorParams::new(2, 5).with_alpha(0).validate(3).is_err());
    }

    #[test]
    fn reciprocal_of_unit_ratios_is_one() {
        assert_eq!(si_reciprocal(1.0, 1.0), 1.0);
    }
}

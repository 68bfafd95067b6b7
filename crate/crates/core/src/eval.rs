//! Precision/recall measurement, top-N agreement and timed benchmark runs.

use std::collections::{BTreeSet, HashSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_lof, run_psd, run_rpgs};
use crate::datagen::{LabeledDataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::kns::run_kns;
use crate::matrix::DataMatrix;
use crate::projection::DetectorParams;
use crate::report::ScoreReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    /// 1-based rank at which this outlier was retrieved.
    pub rank: usize,
    pub recall: f64,
    pub precision: f64,
}

impl PrPoint {
    pub fn f_measure(&self) -> f64 {
        2.0 * self.precision * self.recall / (self.precision + self.recall)
    }
}

/// One point per true outlier, in retrieval order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    pub best_f: f64,
    /// Rank cutoff where `best_f` is reached.
    pub best_cutoff: usize,
}

impl PrCurve {
    pub fn final_precision(&self) -> f64 {
        self.points.last().map_or(0.0, |p| p.precision)
    }
}

pub fn pr_curve(ranking: &[usize], truth: &HashSet<usize>) -> Result<PrCurve> {
    if truth.is_empty() {
        return Err(Error::param("ground truth holds no outliers"));
    }
    let total = truth.len() as f64;
    let mut points = Vec::with_capacity(truth.len());
    for (i, p) in ranking.iter().enumerate() {
        if truth.contains(p) {
            let found = points.len() + 1;
            points.push(PrPoint {
                rank: i + 1,
                recall: found as f64 / total,
                precision: found as f64 / (i + 1) as f64,
            });
        }
    }
    if points.len() != truth.len() {
        return Err(Error::param(format!(
            "{} outlier(s) missing from the ranking",
            truth.len() - points.len()
        )));
    }
    let best = points
        .iter()
        .max_by(|a, b| {
            a.f_measure()
                .total_cmp(&b.f_measure())
                .then(b.rank.cmp(&a.rank))
        })
        .expect("non-empty");
    Ok(PrCurve {
        best_f: best.f_measure(),
        best_cutoff: best.rank,
        points,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairOverlap {
    pub a: String,
    pub b: String,
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub top_n: usize,
    pub pairs: Vec<PairOverlap>,
    /// Point indices in every report's top `n`, ascending.
    pub common: Vec<usize>,
}

pub fn top_n_overlap(reports: &[ScoreReport], n: usize) -> Result<OverlapReport> {
    if let Some(r) = reports.iter().find(|r| r.len() < n) {
        return Err(Error::param(format!(
            "top {n} requested but {} scored only {} points",
            r.algorithm,
            r.len()
        )));
    }
    let sets: Vec<BTreeSet<usize>> = reports
        .iter()
        .map(|r| r.top(n).iter().copied().collect())
        .collect();
    let mut pairs = Vec::new();
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            pairs.push(PairOverlap {
                a: reports[i].algorithm.clone(),
                b: reports[j].algorithm.clone(),
                shared: sets[i].intersection(&sets[j]).count(),
            });
        }
    }
    let common = match sets.split_first() {
        Some((first, rest)) => first
            .iter()
            .copied()
            .filter(|p| rest.iter().all(|s| s.contains(p)))
            .collect(),
        None => Vec::new(),
    };
    Ok(OverlapReport {
        top_n: n,
        pairs,
        common,
    })
}

/// A detector together with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "lowercase")]
pub enum Algorithm {
    Kns(DetectorParams),
    /// `k` carries the `dst` parameter.
    Psd(DetectorParams),
    Lof {
        knn: usize,
    },
    Rpgs {
        scn: u32,
    },
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Kns(_) => "kns",
            Algorithm::Psd(_) => "psd",
            Algorithm::Lof { .. } => "lof",
            Algorithm::Rpgs { .. } => "rpgs",
        }
    }

    pub fn run(&self, data: &DataMatrix) -> Result<ScoreReport> {
        match self {
            Algorithm::Kns(p) => run_kns(data, p),
            Algorithm::Psd(p) => run_psd(data, p),
            Algorithm::Lof { knn } => run_lof(data, *knn),
            Algorithm::Rpgs { scn } => run_rpgs(data, *scn),
        }
    }
}

/// CPU time consumed by this process so far.
pub fn process_cpu_time() -> Duration {
    let mut ts = libc::timespec {
        tv_sec: 0,
        tv_nsec: 0,
    };
    // SAFETY: `ts` is a valid, writable timespec.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return Duration::ZERO;
    }
    Duration::new(ts.tv_sec as u64, ts.tv_nsec as u32)
}

/// Runs `f` and returns its output with the process CPU time it consumed.
pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = process_cpu_time();
    let out = f();
    (out, process_cpu_time().saturating_sub(start))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub cpu_seconds: f64,
    pub curve: Option<PrCurve>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset: SyntheticSpec,
    pub results: Vec<AlgorithmResult>,
}

impl EvalReport {
    pub fn result(&self, name: &str) -> Option<&AlgorithmResult> {
        self.results.iter().find(|r| r.algorithm.name() == name)
    }

    pub fn best_f(&self, name: &str) -> Option<f64> {
        self.result(name)?.curve.as_ref().map(|c| c.best_f)
    }
}

/// Runs each algorithm once, sequentially, on the same dataset. A failing
/// algorithm is recorded and the rest still run.
pub fn benchmark(dataset: &LabeledDataset, algorithms: &[Algorithm]) -> EvalReport {
    let truth: HashSet<usize> = dataset.outlier_ids().into_iter().collect();
    let results = algorithms
        .iter()
        .map(|alg| {
            let (res, cpu) = timed(|| alg.run(&dataset.data));
            let res = res.and_then(|r| pr_curve(&r.ranking, &truth));
            let (curve, error) = match res {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            AlgorithmResult {
                algorithm: alg.clone(),
                cpu_seconds: cpu.as_secs_f64(),
                curve,
                error,
            }
        })
        .collect();
    EvalReport {
        dataset: dataset.spec.clone(),
        results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::generate;

    fn set(ids: &[usize]) -> HashSet<usize> {
        ids.iter().copied().collect()
    }

    #[test]
    fn perfect_ranking() {
        let ranking: Vec<usize> = (0..50).collect();
        let c = pr_curve(&ranking, &set(&(0..10).collect::<Vec<_>>())).unwrap();
        assert!(c.points.iter().all(|p| p.precision == 1.0));
        assert_eq!(c.best_f, 1.0);
        assert_eq!(c.best_cutoff, 10);
    }

    #[test]
    fn tenth_outlier_at_rank_23() {
        let ranking: Vec<usize> = (0..100).collect();
        let mut truth: Vec<usize> = (0..9).collect();
        truth.push(22);
        let c = pr_curve(&ranking, &set(&truth)).unwrap();
        let last = c.points.last().unwrap();
        assert_eq!(last.recall, 1.0);
        assert!((last.precision - 0.4348).abs() < 5e-5);
        // nine at the top: P = 1, R = 0.9
        assert!((c.best_f - 2.0 * 0.9 / 1.9).abs() < 1e-12);
        assert_eq!(c.best_cutoff, 9);
    }

    #[test]
    fn worst_case() {
        let ranking: Vec<usize> = (0..500).collect();
        let c = pr_curve(&ranking, &set(&(490..500).collect::<Vec<_>>())).unwrap();
        assert_eq!(c.final_precision(), 10.0 / 500.0);
    }

    #[test]
    fn empty_truth_is_parameter_error() {
        assert!(matches!(
            pr_curve(&[0, 1], &set(&[])),
            Err(Error::Parameter(_))
        ));
        assert!(pr_curve(&[0, 1], &set(&[5])).is_err());
    }

    #[test]
    fn overlap_bounds() {
        let a = ScoreReport::new("a", vec![5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let b = ScoreReport::new("b", vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let same = top_n_overlap(&[a.clone(), a.clone()], 3).unwrap();
        assert_eq!(same.pairs[0].shared, 3);
        let disjoint = top_n_overlap(&[a.clone(), b.clone()], 2).unwrap();
        assert_eq!(disjoint.pairs[0].shared, 0);
        assert!(disjoint.common.is_empty());
        let three = top_n_overlap(&[a.clone(), b, a], 3).unwrap();
        assert_eq!(three.pairs.len(), 3);
        assert_eq!(three.common, vec![2]);
        assert!(top_n_overlap(&[ScoreReport::new("c", vec![1.0]).unwrap()], 2).is_err());
    }

    #[test]
    fn benchmark_records_failures() {
        let ds = generate(&SyntheticSpec::mixture(60, 4, 2)).unwrap();
        let report = benchmark(
            &ds,
            &[
                Algorithm::Lof { knn: 5 },
                Algorithm::Lof { knn: 600 },
                Algorithm::Rpgs { scn: 10 },
            ],
        );
        assert_eq!(report.results.len(), 3);
        assert!(report.results[0].curve.is_some());
        assert!(report.results[1].error.is_some());
        assert!(report.results[2].curve.is_some());
        assert!(benchmark(&ds, &[]).results.is_empty());
    }
}

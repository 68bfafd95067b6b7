use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-point scores with a descending ranking.
///
/// `ranking[0]` is the most outlying point. Ties are broken by ascending
/// point index so the ranking is fully deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub algorithm: String,
    pub scores: Vec<f64>,
    pub ranking: Vec<usize>,
}

impl ScoreReport {
    pub fn new(algorithm: impl Into<String>, scores: Vec<f64>) -> Result<Self> {
        if let Some(p) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Contract(format!(
                "score of point {p} is not finite ({})",
                scores[p]
            )));
        }
        let ranking = rank_descending(&scores);
        Ok(Self {
            algorithm: algorithm.into(),
            scores,
            ranking,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// The `n` highest-scoring point indices.
    pub fn top(&self, n: usize) -> &[usize] {
        &self.ranking[..n.min(self.ranking.len())]
    }

    /// `true` for every point among the top `n`.
    pub fn top_n_flags(&self, n: usize) -> Vec<bool> {
        let mut flags = vec![false; self.scores.len()];
        for &p in self.top(n) {
            flags[p] = true;
        }
        flags
    }

    /// Points whose score exceeds `factor` times the mean score, in ranking
    /// order.
    pub fn above_mean_multiple(&self, factor: f64) -> Vec<usize> {
        let mean = self.scores.iter().sum::<f64>() / self.scores.len() as f64;
        self.ranking
            .iter()
            .copied()
            .take_while(|&p| self.scores[p] > factor * mean)
            .collect()
    }
}

/// Indices sorted by descending score, ties by ascending index.
pub fn rank_descending(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_breaks_ties_by_index() {
        let r = ScoreReport::new("x", vec![1.0, 3.0, 3.0, 0.5]).unwrap();
        assert_eq!(r.ranking, vec![1, 2, 0, 3]);
        assert_eq!(r.top_n_flags(2), vec![false, true, true, false]);
    }

    #[test]
    fn mean_multiple_cutoff() {
        let r = ScoreReport::new("x", vec![1.0, 1.0, 1.0, 5.0]).unwrap();
        // mean = 2
        assert_eq!(r.above_mean_multiple(2.0), vec![3]);
        assert!(r.above_mean_multiple(3.0).is_empty());
    }

    #[test]
    fn rejects_non_finite() {
        assert!(ScoreReport::new("x", vec![1.0, f64::NAN]).is_err());
    }
}

//! Gaussian-mixture datasets with hidden uniform outliers.
//!
//! Random streams: cluster parameters and the point shuffle come from a
//! ChaCha8 generator seeded with `seed` on stream 0; the coordinates of
//! dimension `d` come from the same seed on stream `d + 1`. Each column can
//! therefore be generated independently and the output does not depend on
//! generation order.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;

/// Resampling attempts per outlier coordinate that falls outside the normal
/// points' range.
pub const CONTAINMENT_RETRIES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::param(format!(
                "{name} must be a finite interval with lo < hi, got ({}, {})",
                self.lo, self.hi
            )));
        }
        Ok(())
    }

    fn uniform(&self) -> Uniform<f64> {
        Uniform::new(self.lo, self.hi).expect("validated interval")
    }
}

/// How often cluster means and deviations are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ParamScope {
    /// A fresh `(mu, sigma)` for every cluster and dimension.
    #[default]
    PerClusterDim,
    /// One `(mu, sigma)` per cluster, shared by all its dimensions.
    PerCluster,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_points: usize,
    pub n_dims: usize,
    pub n_clusters: usize,
    pub n_outliers: usize,
    pub mu_range: Interval,
    pub sigma_range: Interval,
    pub outlier_range: Interval,
    #[serde(default)]
    pub param_scope: ParamScope,
    pub seed: u64,
}

/// `(n_points, n_dims)` of the eight benchmark families.
pub const TABLE1_SHAPES: [(usize, usize); 8] = [
    (500, 10),
    (500, 100),
    (1000, 100),
    (500, 500),
    (1000, 500),
    (500, 1000),
    (1000, 1000),
    (1000, 10000),
];

impl SyntheticSpec {
    /// Five clusters with means in 20–80 and deviations in 10–20, plus ten
    /// outliers uniform over 20–100.
    pub fn mixture(n_points: usize, n_dims: usize, seed: u64) -> Self {
        Self {
            n_points,
            n_dims,
            n_clusters: 5,
            n_outliers: 10,
            mu_range: Interval::new(20.0, 80.0),
            sigma_range: Interval::new(10.0, 20.0),
            outlier_range: Interval::new(20.0, 100.0),
            param_scope: ParamScope::default(),
            seed,
        }
    }

    /// Benchmark family `row` (1-based, 1..=8).
    pub fn table1(row: usize, seed: u64) -> Result<Self> {
        let (n, m) = row
            .checked_sub(1)
            .and_then(|i| TABLE1_SHAPES.get(i))
            .ok_or_else(|| Error::param(format!("dataset row must be 1..=8, got {row}")))?;
        Ok(Self::mixture(*n, *m, seed))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_outliers >= self.n_points {
            return Err(Error::param(format!(
                "outlier count {} must be below point count {}",
                self.n_outliers, self.n_points
            )));
        }
        if self.n_clusters == 0 {
            return Err(Error::param("at least one cluster is required"));
        }
        if self.n_dims < 2 {
            return Err(Error::param("at least two dimensions are required"));
        }
        self.mu_range.validate("mu_range")?;
        self.sigma_range.validate("sigma_range")?;
        if self.sigma_range.lo <= 0.0 {
            return Err(Error::param("sigma_range must be positive"));
        }
        self.outlier_range.validate("outlier_range")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Normal(usize),
    Outlier,
}

impl Label {
    pub fn is_outlier(&self) -> bool {
        matches!(self, Label::Outlier)
    }
}

#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Vec<Label>,
    pub spec: SyntheticSpec,
    /// `(outlier, dimension)` coordinates still outside the normal points'
    /// range after resampling.
    pub containment_escapes: usize,
}

impl LabeledDataset {
    /// Indices of the planted outliers, ascending.
    pub fn outlier_ids(&self) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| l.is_outlier())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn escape_fraction(&self) -> f64 {
        let total = self.spec.n_outliers * self.spec.n_dims;
        if total == 0 {
            0.0
        } else {
            self.containment_escapes as f64 / total as f64
        }
    }

    /// Normal points with at least one coordinate in the outer 1% of their
    /// dimension's normal values: the `max(1, round(0.5%))` smallest or
    /// largest. Diagnostic only.
    pub fn noisy_points(&self) -> Vec<usize> {
        let normals: Vec<usize> = (0..self.labels.len())
            .filter(|&p| !self.labels[p].is_outlier())
            .collect();
        let mut flagged = vec![false; self.labels.len()];
        let mut col = Vec::with_capacity(normals.len());
        for dim in 0..self.data.n_dims() {
            col.clear();
            col.extend(normals.iter().map(|&p| self.data.get(p, dim)));
            col.sort_by(f64::total_cmp);
            let tail = ((0.005 * col.len() as f64).round() as usize).max(1);
            if 2 * tail >= col.len() {
                continue;
            }
            let lo = col[tail];
            let hi = col[col.len() - 1 - tail];
            for &p in &normals {
                let x = self.data.get(p, dim);
                if x < lo || x > hi {
                    flagged[p] = true;
                }
            }
        }
        normals.into_iter().filter(|&p| flagged[p]).collect()
    }
}

/// Cluster of every point before shuffling: balanced blocks, then outliers.
fn initial_labels(spec: &SyntheticSpec) -> Vec<Label> {
    let normals = spec.n_points - spec.n_outliers;
    let base = normals / spec.n_clusters;
    let extra = normals % spec.n_clusters;
    let mut labels = Vec::with_capacity(spec.n_points);
    for c in 0..spec.n_clusters {
        let size = base + usize::from(c < extra);
        labels.extend(std::iter::repeat_n(Label::Normal(c), size));
    }
    labels.extend(std::iter::repeat_n(Label::Outlier, spec.n_outliers));
    labels
}

fn column_rng(seed: u64, dim: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(dim as u64 + 1);
    rng
}

pub fn generate(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let n = spec.n_points;
    let m = spec.n_dims;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mu = spec.mu_range.uniform();
    let sigma = spec.sigma_range.uniform();
    let mut draw = || {
        let mean = mu.sample(&mut rng);
        let sd = sigma.sample(&mut rng);
        Normal::new(mean, sd).expect("positive deviation")
    };
    // [cluster * m + dim]
    let cluster_params: Vec<Normal<f64>> = match spec.param_scope {
        ParamScope::PerClusterDim => (0..spec.n_clusters * m).map(|_| draw()).collect(),
        ParamScope::PerCluster => (0..spec.n_clusters)
            .flat_map(|_| std::iter::repeat_n(draw(), m))
            .collect(),
    };
    let mut labels = initial_labels(spec);
    labels.shuffle(&mut rng);

    let outlier_dist = spec.outlier_range.uniform();
    let columns: Vec<(Vec<f64>, usize)> = (0..m)
        .into_par_iter()
        .map(|dim| {
            let mut rng = column_rng(spec.seed, dim);
            let mut col: Vec<f64> = labels
                .iter()
                .map(|l| match l {
                    Label::Normal(c) => cluster_params[c * m + dim].sample(&mut rng),
                    Label::Outlier => outlier_dist.sample(&mut rng),
                })
                .collect();
            let escapes = contain_outliers(&mut col, &labels, &outlier_dist, &mut rng);
            (col, escapes)
        })
        .collect();

    let mut values = vec![0.0; n * m];
    let mut containment_escapes = 0;
    for (dim, (col, escapes)) in columns.iter().enumerate() {
        containment_escapes += escapes;
        for (p, &x) in col.iter().enumerate() {
            values[p * m + dim] = x;
        }
    }
    if containment_escapes > 0 {
        log::warn!(
            "{containment_escapes} outlier coordinate(s) remain outside the normal range after {CONTAINMENT_RETRIES} retries"
        );
    }
    Ok(LabeledDataset {
        data: DataMatrix::from_row_major(n, m, values)?,
        labels,
        spec: spec.clone(),
        containment_escapes,
    })
}

/// Resamples outlier coordinates outside `[min, max]` of the normal ones.
/// Returns how many still lie outside.
fn contain_outliers(
    col: &mut [f64],
    labels: &[Label],
    dist: &Uniform<f64>,
    rng: &mut impl Rng,
) -> usize {
    let (lo, hi) = col
        .iter()
        .zip(labels)
        .filter(|(_, l)| !l.is_outlier())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (&x, _)| {
            (lo.min(x), hi.max(x))
        });
    if lo > hi {
        return 0;
    }
    let mut escapes = 0;
    for (x, l) in col.iter_mut().zip(labels) {
        if !l.is_outlier() {
            continue;
        }
        let mut tries = 0;
        while (*x < lo || *x > hi) && tries < CONTAINMENT_RETRIES {
            *x = dist.sample(rng);
            tries += 1;
        }
        if *x < lo || *x > hi {
            escapes += 1;
        }
    }
    escapes
}

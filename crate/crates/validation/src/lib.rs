//! Direct, unoptimised re-implementations of the section-space detectors
//! and LOF, used as oracles for the production code in `kns`.

use kns::{DetectorParams, ProjectionSense, Schedule};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Grid {
    pub n: usize,
    pub m: usize,
    pub scn: u32,
    /// `sec[d][p]`, 1-based.
    pub sec: Vec<Vec<u32>>,
}

pub fn grid(rows: &[Vec<f64>], scn: u32) -> Grid {
    let n = rows.len();
    let m = rows[0].len();
    let mut sec = vec![vec![0u32; n]; m];
    for d in 0..m {
        let min = rows.iter().map(|r| r[d]).fold(f64::INFINITY, f64::min);
        let max = rows.iter().map(|r| r[d]).fold(f64::NEG_INFINITY, f64::max);
        for p in 0..n {
            sec[d][p] = if max == min {
                1
            } else {
                let lo = min - 0.0005 * (max - min);
                let hi = max + 0.0005 * (max - min);
                let w = (hi - lo) / f64::from(scn);
                let s = ((rows[p][d] - lo) / w).floor();
                (s.max(0.0) as u32 + 1).min(scn)
            };
        }
    }
    Grid { n, m, scn, sec }
}

impl Grid {
    pub fn count(&self, d: usize, s: u32) -> usize {
        self.sec[d].iter().filter(|&&x| x == s).count()
    }

    pub fn mates(&self, d: usize, p: usize) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.sec[d][q] == self.sec[d][p])
            .collect()
    }

    pub fn sec_val(&self, d: usize, p: usize) -> f64 {
        let nonempty = (1..=self.scn).filter(|&s| self.count(d, s) > 0).count();
        let avg = self.n as f64 / nonempty as f64;
        let r = self.count(d, self.sec[d][p]) as f64 / avg;
        r * r
    }

    pub fn dists(&self, d: usize, a: usize, b: usize) -> u32 {
        self.sec[d][a].abs_diff(self.sec[d][b]) + 1
    }

    pub fn knn_dist(&self, t: usize, p: usize, mates: &[usize], k: usize) -> f64 {
        let mut ds: Vec<u32> = mates
            .iter()
            .filter(|&&q| q != p)
            .map(|&q| self.dists(t, p, q).pow(2))
            .collect();
        ds.sort();
        ds.iter().take(k).sum::<u32>() as f64
    }

    pub fn clu_len(&self, d: usize, s: u32) -> u32 {
        let mut lo = s;
        while lo > 1 && self.count(d, lo - 1) > 0 {
            lo -= 1;
        }
        let mut hi = s;
        while hi < self.scn && self.count(d, hi + 1) > 0 {
            hi += 1;
        }
        hi - lo + 1
    }

    pub fn psd_value(&self, t: usize, p: usize) -> f64 {
        let s = self.sec[t][p];
        (self.count(t, s) as u32 * self.clu_len(t, s)) as f64
    }

    pub fn sec_valp(&self, src: usize, tgt: usize, p: usize, k: usize, psd: bool) -> f64 {
        let mates = self.mates(src, p);
        if mates.len() < (3 * k).div_ceil(2) {
            return 1.0;
        }
        let value = |q: usize| {
            if psd {
                self.psd_value(tgt, q)
            } else {
                self.knn_dist(tgt, q, &mates, k)
            }
        };
        let mut total = 0.0;
        for &q in &mates {
            total += value(q);
        }
        value(p) / (total / mates.len() as f64)
    }
}

pub fn schedule(m: usize, alpha: usize, seed: u64, exhaustive: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    if exhaustive {
        for s in 0..m {
            for t in 0..m {
                if s != t {
                    out.push((s, t));
                }
            }
        }
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..m).collect();
    for _ in 0..alpha {
        order.shuffle(&mut rng);
        for i in 0..m {
            out.push((order[i], order[(i + 1) % m]));
        }
    }
    out
}

/// Scores accumulated in the same order as production: dimensions first,
/// then events in schedule order.
pub fn oracle_si(g: &Grid, p: &DetectorParams, psd: bool) -> Vec<f64> {
    let events = schedule(g.m, p.alpha, p.seed, p.schedule == Schedule::Exhaustive);
    (0..g.n)
        .map(|pt| {
            let mut a = 0.0;
            for d in 0..g.m {
                let v = g.sec_val(d, pt);
                a += v * v;
            }
            let mut b = 0.0;
            for &(s, t) in &events {
                let v = g.sec_valp(s, t, pt, p.k, psd);
                b += match p.sense {
                    ProjectionSense::Literal => v * v,
                    ProjectionSense::Inverted => 1.0 / (v * v),
                };
            }
            2.0 / (a / g.m as f64 + b / events.len() as f64)
        })
        .collect()
}

/// The literal reciprocal score as one expression per point, without
/// running sums.
pub fn literal_si(g: &Grid, p: &DetectorParams) -> Vec<f64> {
    let events = schedule(g.m, p.alpha, p.seed, p.schedule == Schedule::Exhaustive);
    (0..g.n)
        .map(|pt| {
            let sv: Vec<f64> = (0..g.m).map(|d| g.sec_val(d, pt).powi(2)).collect();
            let svp: Vec<f64> = events
                .iter()
                .map(|&(s, t)| g.sec_valp(s, t, pt, p.k, false).powi(2))
                .collect();
            let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
            1.0 / ((mean(&sv) + mean(&svp)) / 2.0)
        })
        .collect()
}

pub fn random_instance(rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, u32) {
    let n = rng.random_range(3..=30);
    let m = rng.random_range(2..=6);
    let scn = rng.random_range(2..=5);
    // coarse values so that ties and shared sections are common
    let rows = (0..n)
        .map(|_| {
            (0..m)
                .map(|_| f64::from(rng.random_range(0..12u8)))
                .collect()
        })
        .collect();
    (rows, scn)
}

pub fn brute_lof(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = rows.len();
    let d = |a: usize, b: usize| {
        rows[a]
            .iter()
            .zip(&rows[b])
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let kdist: Vec<f64> = (0..n)
        .map(|p| {
            let mut v: Vec<f64> = (0..n).filter(|&q| q != p).map(|q| d(p, q)).collect();
            v.sort_by(f64::total_cmp);
            v[k - 1]
        })
        .collect();
    let hood =
        |p: usize| -> Vec<usize> { (0..n).filter(|&q| q != p && d(p, q) <= kdist[p]).collect() };
    let lrd: Vec<f64> = (0..n)
        .map(|p| {
            let h = hood(p);
            let reach: f64 = h.iter().map(|&o| kdist[o].max(d(p, o))).sum();
            1.0 / (reach / h.len() as f64 + 1e-10)
        })
        .collect();
    (0..n)
        .map(|p| {
            let h = hood(p);
            h.iter().map(|&o| lrd[o]).sum::<f64>() / h.len() as f64 / lrd[p]
        })
        .collect()
}

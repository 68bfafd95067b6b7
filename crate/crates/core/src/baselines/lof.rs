//! Local outlier factor over Euclidean distance with exact neighbour search.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DataMatrix;
use crate::report::ScoreReport;

/// Added to the mean reachability distance so duplicated points get a large
/// but finite local density.
const REACH_EPS: f64 = 1e-10;

fn distance_matrix(data: &DataMatrix) -> Vec<f64> {
    let n = data.n_points();
    let mut d = vec![0.0; n * n];
    d.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        let a = data.row(i);
        for (j, out) in row.iter_mut().enumerate() {
            if j != i {
                let b = data.row(j);
                *out = a
                    .iter()
                    .zip(b)
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
            }
        }
    });
    d
}

/// LOF score of every point.
///
/// The neighbourhood of a point holds every other point within its k-distance,
/// so it can exceed `knn` members when distances tie.
pub fn lof_scores(data: &DataMatrix, knn: usize) -> Result<Vec<f64>> {
    let n = data.n_points();
    if knn == 0 || knn >= n {
        return Err(Error::param(format!(
            "knn must lie in 1..{n} for {n} points, got {knn}"
        )));
    }
    let dist = distance_matrix(data);
    let row = |i: usize| &dist[i * n..(i + 1) * n];

    let neighbourhoods: Vec<(f64, Vec<usize>)> = (0..n)
        .into_par_iter()
        .map(|p| {
            let r = row(p);
            let mut order: Vec<usize> = (0..n).filter(|&q| q != p).collect();
            order.sort_by(|&a, &b| r[a].total_cmp(&r[b]).then(a.cmp(&b)));
            let kdist = r[order[knn - 1]];
            let cut = order.partition_point(|&q| r[q] <= kdist);
            order.truncate(cut);
            (kdist, order)
        })
        .collect();

    let lrd: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|p| {
            let (_, nb) = &neighbourhoods[p];
            let reach: f64 = nb.iter().map(|&o| neighbourhoods[o].0.max(row(p)[o])).sum();
            1.0 / (reach / nb.len() as f64 + REACH_EPS)
        })
        .collect();

    Ok((0..n)
        .map(|p| {
            let nb = &neighbourhoods[p].1;
            nb.iter().map(|&o| lrd[o]).sum::<f64>() / nb.len() as f64 / lrd[p]
        })
        .collect())
}

pub fn run_lof(data: &DataMatrix, knn: usize) -> Result<ScoreReport> {
    ScoreReport::new("lof", lof_scores(data, knn)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rejects_large_knn() {
        let d = DataMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(matches!(lof_scores(&d, 2), Err(Error::Parameter(_))));
        assert!(lof_scores(&d, 0).is_err());
    }

    #[test]
    fn regular_polygon_scores_one() {
        let rows: Vec<Vec<f64>> = (0..8)
            .map(|i| {
                let t = i as f64 * std::f64::consts::TAU / 8.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        let d = DataMatrix::from_rows(&rows).unwrap();
        for s in lof_scores(&d, 2).unwrap() {
            assert_abs_diff_eq!(s, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn four_point_reference() {
        // knn = 2, evaluated by hand from the definitions:
        // lrd(A) = lrd(D) = 2(sqrt2 - 1), lrd(B) = 1/sqrt2, lrd(C) = 2/(sqrt5 + 3)
        let d = DataMatrix::from_rows(&[
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![3.0, 0.0],
            vec![1.0, 1.0],
        ])
        .unwrap();
        let s = lof_scores(&d, 2).unwrap();
        let r2 = 2f64.sqrt();
        let lrd_a = 2.0 * (r2 - 1.0);
        let lrd_b = 1.0 / r2;
        assert_abs_diff_eq!(s[2], (r2 - 1.0) * (5f64.sqrt() + 3.0), epsilon = 1e-8);
        assert_abs_diff_eq!(s[3], (lrd_b + lrd_a) / 2.0 / lrd_a, epsilon = 1e-8);
        assert_eq!(run_lof(&d, 2).unwrap().ranking[0], 2);
    }

    #[test]
    fn duplicates_stay_finite() {
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| vec![1.0, 1.0])
            .chain([vec![4.0, 4.0]])
            .collect();
        let d = DataMatrix::from_rows(&rows).unwrap();
        let s = lof_scores(&d, 2).unwrap();
        assert!(s.iter().all(|v| v.is_finite()));
        assert_eq!(run_lof(&d, 2).unwrap().ranking[0], 5);
    }
}

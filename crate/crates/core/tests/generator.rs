use std::collections::HashMap;

use kns::datagen::{generate, Label, SyntheticSpec};
use kns::io::{self, MatrixFormat};

#[test]
fn dataset_two_shape_and_labels() {
    let ds = generate(&SyntheticSpec::table1(2, 11).unwrap()).unwrap();
    assert_eq!((ds.data.n_points(), ds.data.n_dims()), (500, 100));
    assert_eq!(ds.outlier_ids().len(), 10);
    let mut sizes: HashMap<usize, usize> = HashMap::new();
    for l in &ds.labels {
        if let Label::Normal(c) = l {
            *sizes.entry(*c).or_default() += 1;
        }
    }
    assert_eq!(sizes.len(), 5);
    assert!(sizes.values().all(|&s| s == 98));
}

#[test]
fn uneven_clusters_differ_by_one() {
    let mut spec = SyntheticSpec::mixture(103, 3, 1);
    spec.n_outliers = 0;
    let ds = generate(&spec).unwrap();
    assert!(ds.outlier_ids().is_empty());
    assert_eq!(ds.containment_escapes, 0);
    let mut sizes = vec![0usize; 5];
    for l in &ds.labels {
        match l {
            Label::Normal(c) => sizes[*c] += 1,
            Label::Outlier => unreachable!(),
        }
    }
    let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
    assert!(hi - lo <= 1, "{sizes:?}");
}

#[test]
fn same_seed_same_dataset() {
    let spec = SyntheticSpec::mixture(200, 20, 5);
    let a = generate(&spec).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| generate(&spec).unwrap());
    assert_eq!(a.data, b.data);
    assert_eq!(a.labels, b.labels);
    let c = generate(&SyntheticSpec::mixture(200, 20, 6)).unwrap();
    assert_ne!(a.data, c.data);
}

#[test]
fn cluster_moments_fall_in_parameter_ranges() {
    // The drawn (mu, sigma) are internal; the sample mean must lie within
    // 3σ/√size of some mu in the range, and the sample deviation near the
    // sigma range.
    let spec = SyntheticSpec::mixture(5010, 8, 3);
    let ds = generate(&spec).unwrap();
    let size = 1000.0f64;
    let tol = 3.0 * spec.sigma_range.hi / size.sqrt();
    for c in 0..5 {
        let members: Vec<usize> = (0..ds.labels.len())
            .filter(|&p| ds.labels[p] == Label::Normal(c))
            .collect();
        assert_eq!(members.len(), 1000);
        for d in 0..spec.n_dims {
            let col: Vec<f64> = members.iter().map(|&p| ds.data.get(p, d)).collect();
            let mean = col.iter().sum::<f64>() / size;
            let sd = (col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (size - 1.0)).sqrt();
            assert!(
                mean > spec.mu_range.lo - tol && mean < spec.mu_range.hi + tol,
                "cluster {c} dim {d}: mean {mean}"
            );
            assert!(
                sd > 0.9 * spec.sigma_range.lo && sd < 1.1 * spec.sigma_range.hi,
                "sd {sd}"
            );
        }
    }
}

#[test]
fn outliers_stay_inside_the_normal_hull() {
    for seed in 1..=3 {
        let ds = generate(&SyntheticSpec::table1(2, seed).unwrap()).unwrap();
        assert!(ds.escape_fraction() < 0.01, "{}", ds.escape_fraction());
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = SyntheticSpec::mixture(10, 3, 0);
    spec.n_outliers = 10;
    assert!(matches!(generate(&spec), Err(kns::Error::Parameter(_))));
    let mut spec = SyntheticSpec::mixture(10, 3, 0);
    spec.n_clusters = 0;
    assert!(generate(&spec).is_err());
    assert!(SyntheticSpec::table1(9, 0).is_err());
}

#[test]
fn noisy_points_are_normal_tail_members() {
    let ds = generate(&SyntheticSpec::table1(1, 4).unwrap()).unwrap();
    let noisy = ds.noisy_points();
    assert!(!noisy.is_empty());
    assert!(noisy.iter().all(|&p| !ds.labels[p].is_outlier()));
}

#[test]
fn written_dataset_reads_back() {
    let dir = tempfile::tempdir().unwrap();
    let ds = generate(&SyntheticSpec::mixture(60, 4, 8)).unwrap();
    io::write_dataset(dir.path(), &ds).unwrap();
    let back = io::ingest_matrix(&dir.path().join("data.csv"), MatrixFormat::Delimited).unwrap();
    assert_eq!(back, ds.data);
    let outliers = io::read_outlier_labels(&dir.path().join("labels.csv")).unwrap();
    assert_eq!(outliers, ds.outlier_ids());
    let spec: SyntheticSpec =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spec.json")).unwrap())
            .unwrap();
    assert_eq!(spec, ds.spec);
}

//! End-to-end sweeps on small synthetic datasets.

use std::path::PathBuf;

use reid_core::dataset::{generate_synthetic, Perturbation, SyntheticSpec};
use reid_core::harness::{read_results_csv, run_grid, GridSpec};

fn small_dataset(dir: &std::path::Path, seed: u64) -> PathBuf {
    let spec = SyntheticSpec {
        persons: 8,
        views: 2,
        width: 16,
        height: 40,
        seed,
        perturbation: Perturbation::default(),
    };
    generate_synthetic(&spec, dir).expect("synthetic dataset")
}

#[test]
fn preferred_configuration_sweep_yields_twelve_rows() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(&dir.path().join("data"), 3);

    // The recommended starting configuration: the three leading bin-to-bin
    // distances, HSV, small histograms, mid-range stripe counts.
    let spec = GridSpec::from_toml_str(&format!(
        r#"
        datasets = ["{}"]
        color_spaces = ["HSV"]
        distances = ["Bhattacharyya", "ChiSquare", "Intersection"]
        bins = [16, 32]
        stripes = [5, 10]
        seed = 9
        "#,
        manifest.display()
    ))
    .unwrap();
    spec.validate(false).unwrap();

    let out = run_grid(&spec, &dir.path().join("out"), 2).unwrap();
    assert_eq!(out.results.len(), 12);
    assert!(out.results.iter().all(|r| r.error.is_none()));

    let rows = read_results_csv(&out.csv_path).unwrap();
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r.color_space == "HSV"));
    assert!(rows.iter().all(|r| r.probes == Some(8) && r.gallery == Some(8)));
    // Sorted by (dataset, color space, distance, bins, stripes).
    let key: Vec<(String, usize, usize)> = rows
        .iter()
        .map(|r| (r.distance.clone(), r.bins, r.stripes))
        .collect();
    let mut sorted = key.clone();
    sorted.sort_by(|a, b| {
        let ka: reid_core::DistanceKind = a.0.parse().unwrap();
        let kb: reid_core::DistanceKind = b.0.parse().unwrap();
        ka.cmp(&kb).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
    });
    assert_eq!(key, sorted);
}

#[test]
fn missing_dataset_fills_rows_with_errors_instead_of_aborting() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(&dir.path().join("data"), 4);

    let spec = GridSpec {
        datasets: vec![PathBuf::from("/nonexistent/manifest.csv"), manifest],
        color_spaces: vec![reid_core::ColorSpace::Hsv],
        distances: vec![reid_core::DistanceKind::Bhattacharyya],
        bins: vec![16],
        stripes: vec![5],
        seed: 1,
    };
    let out = run_grid(&spec, &dir.path().join("out"), 1).unwrap();
    assert_eq!(out.results.len(), 2);
    let broken = &out.results[0];
    assert!(broken.config.dataset.starts_with("/nonexistent"));
    assert!(broken.metrics.is_none());
    assert!(broken.error.is_some());
    let healthy = &out.results[1];
    assert!(healthy.error.is_none());
    assert!(healthy.metrics.is_some());
}

#[test]
fn extended_grid_unlocks_ycbcr_and_odd_factors() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(&dir.path().join("data"), 5);

    let spec = GridSpec {
        datasets: vec![manifest],
        color_spaces: vec![reid_core::ColorSpace::YCbCr],
        distances: vec![reid_core::DistanceKind::Intersection],
        bins: vec![24],
        stripes: vec![3],
        seed: 2,
    };
    assert!(spec.validate(false).is_err());
    spec.validate(true).unwrap();
    let out = run_grid(&spec, &dir.path().join("out"), 1).unwrap();
    assert_eq!(out.results.len(), 1);
    assert!(out.results[0].error.is_none(), "{:?}", out.results[0].error);
}

#[test]
fn rerun_is_deterministic_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = small_dataset(&dir.path().join("data"), 6);
    let spec = GridSpec {
        datasets: vec![manifest],
        color_spaces: vec![reid_core::ColorSpace::Rgb, reid_core::ColorSpace::Hsv],
        distances: vec![
            reid_core::DistanceKind::Bhattacharyya,
            reid_core::DistanceKind::KullbackLeibler,
            reid_core::DistanceKind::Mahalanobis,
        ],
        bins: vec![16, 32],
        stripes: vec![1, 5],
        seed: 11,
    };
    let a = run_grid(&spec, &dir.path().join("a"), 1).unwrap();
    let b = run_grid(&spec, &dir.path().join("b"), 4).unwrap();
    assert_eq!(a.results.len(), b.results.len());
    for (ra, rb) in a.results.iter().zip(&b.results) {
        assert_eq!(ra.config, rb.config);
        assert_eq!(ra.metrics, rb.metrics);
        assert_eq!(ra.error, rb.error);
    }
}

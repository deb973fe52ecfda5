use std::path::PathBuf;

use rvflx::data::{discover_datasets, load_csv, load_dataset_dir, stratified_kfold, CsvOptions, LabelColumn};
use rvflx::experiment::{run_grid, run_sensitivity_alpha, Grid};
use rvflx::matrix::TransposeKind;
use rvflx::models::{HyperParams, ModelKind};
use rvflx::Error;

fn data_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

#[test]
fn bundled_datasets_have_expected_shapes() {
    let found = discover_datasets(&data_root()).unwrap();
    let mut shapes: Vec<(String, usize, usize, usize)> = found
        .iter()
        .map(|p| {
            let ds = load_dataset_dir(p).unwrap();
            (ds.name.clone(), ds.n_samples(), ds.n_features(), ds.n_classes())
        })
        .collect();
    shapes.sort();
    assert_eq!(
        shapes,
        vec![
            ("acute_inflammation".to_string(), 120, 6, 2),
            ("iris".to_string(), 150, 4, 3),
            ("monks_3".to_string(), 554, 6, 2),
            ("thyroid_small".to_string(), 360, 21, 3),
        ]
    );
}

#[test]
fn stratified_folds_keep_rare_class_in_every_fold() {
    let ds = load_dataset_dir(&data_root().join("thyroid_small")).unwrap();
    let plan = stratified_kfold(&ds, 5, 0).unwrap();
    let rare = ds.class_counts().iter().enumerate().min_by_key(|(_, c)| **c).unwrap().0;
    for f in 0..5 {
        let test = plan.test_indices(f);
        assert!(test.iter().any(|&i| ds.labels[i] == rare), "fold {f}");
    }
}

#[test]
fn csv_errors_name_row_and_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "a,b,y\n1,2,x\n3,oops,y\n").unwrap();
    let err = load_csv(&path, &CsvOptions::default()).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, Error::Parse { .. }), "{msg}");
    assert!(msg.contains('3') && msg.contains('2'), "{msg}");
}

#[test]
fn label_column_can_be_first() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("first.csv");
    std::fs::write(&path, "y;a;b\nu;1;2\nv;3;4\nu;5;6\n").unwrap();
    let opts = CsvOptions { delimiter: b';', label_column: LabelColumn::First, header: true };
    let ds = load_csv(&path, &opts).unwrap();
    assert_eq!(ds.n_features(), 2);
    assert_eq!(ds.class_names, vec!["u", "v"]);
    assert_eq!(ds.labels, vec![0, 1, 0]);
}

#[test]
fn sensitivity_curve_on_imbalanced_data_is_informative() {
    let ds = load_dataset_dir(&data_root().join("thyroid_small")).unwrap();
    let plan = stratified_kfold(&ds, 5, 0).unwrap();
    let hp = HyperParams { n_hidden: 63, c: 10.0, ..HyperParams::default() };
    let alphas = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let curve = run_sensitivity_alpha(&ds, ModelKind::RvflxN, &hp, &alphas, &plan, TransposeKind::Hermitian).unwrap();
    assert_eq!(curve.len(), alphas.len());
    let majority = 100.0 * *ds.class_counts().iter().max().unwrap() as f64 / ds.n_samples() as f64;
    for p in &curve {
        assert!(p.mean_accuracy.is_finite() && p.std_dev.is_finite());
        assert_eq!(p.fold_accuracies.len(), 5);
        assert!(p.mean_accuracy > majority, "alpha {} at {}", p.alpha, p.mean_accuracy);
    }
    let distinct = curve.windows(2).any(|w| w[0].mean_accuracy != w[1].mean_accuracy);
    assert!(distinct, "sparsity had no effect at all");
}

#[test]
fn grid_search_on_iris_beats_chance_for_every_kind() {
    let ds = load_dataset_dir(&data_root().join("iris")).unwrap();
    let plan = stratified_kfold(&ds, 5, 3).unwrap();
    let grid = Grid {
        c_values: vec![0.1, 10.0],
        n_hidden_values: vec![23, 63],
        alpha_values: vec![0.0, 0.3],
        ..Grid::default()
    };
    for kind in ModelKind::ALL {
        let res = run_grid(&ds, kind, &grid, &plan).unwrap();
        assert!(res.mean_accuracy > 90.0, "{kind}: {}", res.mean_accuracy);
        assert_eq!(res.points_evaluated, grid.n_points(kind));
        assert_eq!(res.points_failed, 0);
    }
}

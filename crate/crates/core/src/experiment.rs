//! Cross-validated grid search, α sensitivity curves and ablations.
//!
//! Grid points are enumerated in the order seeds, `N_h`, `α`, `ϖ`,
//! activation, `C`. Every point sharing the same `(seed, N_h, α, ϖ)` also
//! shares its random hidden weights, so the harness evaluates such a group in
//! one pass: hidden features are computed once per fold and activation, and
//! one Gram matrix serves every `C`. The autoencoder transform depends on `C`,
//! so `rvflx_auto` recomputes its features per `C`.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activations::{apply_complex, apply_real, ActivationKind};
use crate::data::{normalize_fold, Dataset, FoldPlan, ZScoreParams};
use crate::error::{Error, Result};
use crate::matrix::{complex_matmul, ComplexMatrix, ComplexRidge, RealMatrix, RidgeMode, Rng, TransposeKind};
use crate::models::{
    argmax_rows, check_training_data, design_complex, design_real, init_complex_params, init_real_params,
    pre_activation_complex, pre_activation_real, predict, train_with, uses_direct_link, HyperParams, ModelKind,
    TrainOptions, STREAM_TRANSFORM,
};
use crate::solvers::RealRidge;
use crate::transforms::{apply_transform, fit_apply_autoencoder, Varpi};

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

pub const PREPROCESSING_NOTE: &str =
    "features z-scored per fold with training-fold mean and population std; zero-variance columns set to 0";
pub const TIE_BREAK_NOTE: &str =
    "highest mean CV accuracy; ties go to smaller n_hidden, then larger C, then the first point in enumeration order";
pub const ACCURACY_NOTE: &str =
    "reported accuracy is the mean test accuracy over the CV folds of the selected point (no nested CV); std_dev uses n-1";

/// Hyperparameter ranges searched by [`run_grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub c_values: Vec<f64>,
    pub n_hidden_values: Vec<usize>,
    pub activations: Vec<ActivationKind>,
    pub alpha_values: Vec<f64>,
    pub varpi_values: Vec<Varpi>,
    pub models: Vec<ModelKind>,
    pub seeds: Vec<u64>,
    pub n_folds: usize,
    pub transpose: TransposeKind,
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            c_values: (-5..=5).map(|e| 10f64.powi(e)).collect(),
            n_hidden_values: (3..=203).step_by(20).collect(),
            activations: ActivationKind::ALL.to_vec(),
            alpha_values: (0..=5).map(|i| i as f64 / 10.0).collect(),
            varpi_values: vec![Varpi::ZERO, Varpi::ONE],
            models: ModelKind::ALL.to_vec(),
            seeds: vec![0],
            n_folds: 5,
            transpose: TransposeKind::Hermitian,
        }
    }
}

impl Grid {
    /// A grid with exactly one value per axis.
    pub fn singleton(hp: &HyperParams) -> Self {
        Self {
            c_values: vec![hp.c],
            n_hidden_values: vec![hp.n_hidden],
            activations: vec![hp.activation],
            alpha_values: vec![hp.alpha],
            varpi_values: vec![hp.varpi],
            seeds: vec![hp.seed],
            ..Self::default()
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: Grid = serde_json::from_str(s).map_err(|e| Error::Config(format!("grid file: {e}")))?;
        g.validate()?;
        Ok(g)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("c_values", self.c_values.is_empty()),
            ("n_hidden_values", self.n_hidden_values.is_empty()),
            ("activations", self.activations.is_empty()),
            ("alpha_values", self.alpha_values.is_empty()),
            ("varpi_values", self.varpi_values.is_empty()),
            ("models", self.models.is_empty()),
            ("seeds", self.seeds.is_empty()),
        ];
        if let Some((name, _)) = empty.iter().find(|(_, e)| *e) {
            return Err(Error::Config(format!("grid axis {name} is empty")));
        }
        if let Some(c) = self.c_values.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
            return Err(Error::Config(format!("C value {c} must be positive and finite")));
        }
        if self.n_hidden_values.contains(&0) {
            return Err(Error::Config("n_hidden values must be at least 1".into()));
        }
        for &a in &self.alpha_values {
            let tenths = (a * 10.0).round();
            if !(0.0..=5.0).contains(&tenths) || (a * 10.0 - tenths).abs() > 1e-9 {
                return Err(Error::Config(format!("alpha {a} is not one of 0, 0.1, ..., 0.5")));
            }
        }
        if self.n_folds < 2 {
            return Err(Error::Config("n_folds must be at least 2".into()));
        }
        Ok(())
    }

    /// Number of grid points evaluated for `kind`.
    pub fn n_points(&self, kind: ModelKind) -> usize {
        self.groups(kind).len() * self.activations.len() * self.c_values.len()
    }

    /// Distinct random-structure groups for `kind`. Real kinds ignore `α`
    /// and `ϖ`; `rvflx_n` ignores `ϖ`.
    fn groups(&self, kind: ModelKind) -> Vec<(u64, usize, f64, Varpi)> {
        let alphas: Vec<f64> = if kind.is_complex() { self.alpha_values.clone() } else { vec![0.0] };
        let varpis: Vec<Varpi> = if kind == ModelKind::RvflxAuto {
            self.varpi_values.clone()
        } else {
            vec![Varpi::ONE]
        };
        let mut out = Vec::new();
        for &s in &self.seeds {
            for &n in &self.n_hidden_values {
                for &a in &alphas {
                    for &v in &varpis {
                        out.push((s, n, a, v));
                    }
                }
            }
        }
        out
    }
}

/// Seed of the random hidden weights (and encoder) for one point. Points
/// that differ only in activation or `C` share it.
pub fn derive_seed(base: u64, dataset: &str, kind: ModelKind, n_hidden: usize, alpha: f64, varpi: Varpi) -> u64 {
    let mut h = Sha256::new();
    h.update(base.to_le_bytes());
    h.update(dataset.as_bytes());
    h.update([0u8]);
    h.update(kind.name().as_bytes());
    h.update([0u8]);
    h.update((n_hidden as u64).to_le_bytes());
    h.update(alpha.to_bits().to_le_bytes());
    h.update([varpi.value()]);
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub dataset: String,
    pub kind: ModelKind,
    pub best: HyperParams,
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub points_evaluated: usize,
    pub points_failed: usize,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation; zero for fewer than two values.
pub fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// One fold's normalised train/test split.
#[derive(Debug, Clone)]
pub struct PreparedFold {
    pub train_ids: Vec<usize>,
    pub test_ids: Vec<usize>,
    pub z_train: RealMatrix,
    pub z_test: RealMatrix,
    pub w_train: RealMatrix,
    pub test_labels: Vec<usize>,
    pub zscore: ZScoreParams,
}

pub fn prepare_folds(ds: &Dataset, plan: &FoldPlan) -> Result<Vec<PreparedFold>> {
    if plan.assignments.len() != ds.n_samples() {
        return Err(Error::Argument(format!(
            "fold plan covers {} rows, dataset has {}",
            plan.assignments.len(),
            ds.n_samples()
        )));
    }
    (0..plan.n_folds)
        .map(|f| {
            let train_ids = plan.train_indices(f);
            let test_ids = plan.test_indices(f);
            if train_ids.is_empty() || test_ids.is_empty() {
                return Err(Error::Data(format!("fold {f} has an empty split")));
            }
            let raw_train = ds.features.select_rows(&train_ids);
            let (z_train, z_test, zscore) = normalize_fold(&raw_train, &ds.features.select_rows(&test_ids))?;
            if cfg!(debug_assertions) {
                let mut seen = vec![false; ds.n_samples()];
                for &i in &train_ids {
                    seen[i] = true;
                }
                assert!(test_ids.iter().all(|&i| !seen[i]), "fold {f}: test row in training split");
                assert_eq!(
                    ZScoreParams::fit(&raw_train),
                    zscore,
                    "fold {f}: normalisation not fitted on training rows"
                );
            }
            Ok(PreparedFold {
                w_train: ds.targets_onehot.select_rows(&train_ids),
                test_labels: test_ids.iter().map(|&i| ds.labels[i]).collect(),
                train_ids,
                test_ids,
                z_train,
                z_test,
                zscore,
            })
        })
        .collect()
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    100.0 * hits as f64 / truth.len() as f64
}

/// Per-fold test accuracies of one configuration, trained through the
/// public model API.
pub fn cross_validate(folds: &[PreparedFold], kind: ModelKind, hp: &HyperParams, transpose: TransposeKind) -> Result<Vec<f64>> {
    let opts = TrainOptions { transpose };
    folds
        .iter()
        .map(|f| {
            let m = train_with(kind, hp, &f.z_train, &f.w_train, &opts)?;
            Ok(accuracy(&predict(&m, &f.z_test)?.labels, &f.test_labels))
        })
        .collect()
}

struct Group {
    n_hidden: usize,
    alpha: f64,
    varpi: Varpi,
    seed: u64,
}

/// Accuracy lists indexed by `activation * n_c + c`.
type Cells = Vec<Result<Vec<f64>>>;

fn record(cells: &mut Cells, idx: usize, r: Result<f64>) {
    match (&mut cells[idx], r) {
        (Ok(v), Ok(a)) => v.push(a),
        (cell @ Ok(_), Err(e)) => *cell = Err(e),
        (Err(_), _) => {}
    }
}

fn fail_all(cells: &mut Cells, range: std::ops::Range<usize>, e: &Error) {
    for i in range {
        if cells[i].is_ok() {
            cells[i] = Err(Error::Experiment(e.to_string()));
        }
    }
}

fn eval_group(folds: &[PreparedFold], kind: ModelKind, grid: &Grid, g: &Group) -> Cells {
    let n_c = grid.c_values.len();
    let n_cells = grid.activations.len() * n_c;
    let mut cells: Cells = (0..n_cells).map(|_| Ok(Vec::with_capacity(folds.len()))).collect();
    let hp = HyperParams {
        c: 1.0,
        n_hidden: g.n_hidden,
        activation: ActivationKind::Relu,
        alpha: g.alpha,
        varpi: g.varpi,
        direct_link: true,
        seed: g.seed,
    };
    let dl = uses_direct_link(kind, &hp);
    let r = folds[0].z_train.cols();
    for fold in folds {
        if let Err(e) = check_training_data(&fold.z_train, &fold.w_train) {
            fail_all(&mut cells, 0..n_cells, &e);
            continue;
        }
        let res = match kind {
            ModelKind::Rvfl | ModelKind::Elm => eval_real_fold(fold, grid, &hp, dl, r, &mut cells),
            ModelKind::RvflxN => eval_natural_fold(fold, grid, &hp, dl, r, &mut cells),
            ModelKind::RvflxAuto => eval_auto_fold(fold, grid, &hp, dl, r, &mut cells),
        };
        if let Err(e) = res {
            fail_all(&mut cells, 0..n_cells, &e);
        }
    }
    cells
}

fn eval_real_fold(f: &PreparedFold, grid: &Grid, hp: &HyperParams, dl: bool, r: usize, cells: &mut Cells) -> Result<()> {
    let n_c = grid.c_values.len();
    let params = init_real_params(hp.n_hidden, r, hp.seed)?;
    let pre_tr = pre_activation_real(&f.z_train, &params)?;
    let pre_te = pre_activation_real(&f.z_test, &params)?;
    for (ai, &act) in grid.activations.iter().enumerate() {
        let g_tr = design_real(&f.z_train, apply_real(act, &pre_tr), dl)?;
        let g_te = design_real(&f.z_test, apply_real(act, &pre_te), dl)?;
        let ridge = match RealRidge::new(&g_tr, &f.w_train, RidgeMode::Auto) {
            Ok(r) => r,
            Err(e) => {
                fail_all(cells, ai * n_c..(ai + 1) * n_c, &e);
                continue;
            }
        };
        for (ci, &c) in grid.c_values.iter().enumerate() {
            let acc = ridge
                .solve(c)
                .and_then(|eta| g_te.matmul(&eta))
                .map(|s| accuracy(&argmax_rows(&s), &f.test_labels));
            record(cells, ai * n_c + ci, acc);
        }
    }
    Ok(())
}

fn complex_scores(g_te: &ComplexMatrix, ridge: &ComplexRidge, c: f64) -> Result<RealMatrix> {
    Ok(complex_matmul(g_te, &ridge.solve(c)?)?.magnitude())
}

fn eval_natural_fold(f: &PreparedFold, grid: &Grid, hp: &HyperParams, dl: bool, r: usize, cells: &mut Cells) -> Result<()> {
    let n_c = grid.c_values.len();
    let params = init_complex_params(hp, r)?;
    let zx_tr = ComplexMatrix::from_real(&f.z_train);
    let zx_te = ComplexMatrix::from_real(&f.z_test);
    let pre_tr = pre_activation_complex(&zx_tr, &params.weights, &params.bias)?;
    let pre_te = pre_activation_complex(&zx_te, &params.weights, &params.bias)?;
    for (ai, &act) in grid.activations.iter().enumerate() {
        let g_tr = design_complex(&zx_tr, apply_complex(act, &pre_tr), dl)?;
        let g_te = design_complex(&zx_te, apply_complex(act, &pre_te), dl)?;
        let ridge = match ComplexRidge::new(&g_tr, &f.w_train, RidgeMode::Auto, grid.transpose) {
            Ok(r) => r,
            Err(e) => {
                fail_all(cells, ai * n_c..(ai + 1) * n_c, &e);
                continue;
            }
        };
        for (ci, &c) in grid.c_values.iter().enumerate() {
            let acc = complex_scores(&g_te, &ridge, c).map(|s| accuracy(&argmax_rows(&s), &f.test_labels));
            record(cells, ai * n_c + ci, acc);
        }
    }
    Ok(())
}

fn eval_auto_fold(f: &PreparedFold, grid: &Grid, hp: &HyperParams, dl: bool, r: usize, cells: &mut Cells) -> Result<()> {
    let n_c = grid.c_values.len();
    let params = init_complex_params(hp, r)?;
    for (ci, &c) in grid.c_values.iter().enumerate() {
        let mut rng = Rng::with_stream(hp.seed, STREAM_TRANSFORM);
        let features = fit_apply_autoencoder(&f.z_train, c, hp.varpi, &mut rng).and_then(|(t, zx_tr)| {
            let zx_te = apply_transform(&t, &f.z_test)?;
            let pre_tr = pre_activation_complex(&zx_tr, &params.weights, &params.bias)?;
            let pre_te = pre_activation_complex(&zx_te, &params.weights, &params.bias)?;
            Ok((zx_tr, zx_te, pre_tr, pre_te))
        });
        let (zx_tr, zx_te, pre_tr, pre_te) = match features {
            Ok(v) => v,
            Err(e) => {
                for ai in 0..grid.activations.len() {
                    record(cells, ai * n_c + ci, Err(Error::Experiment(e.to_string())));
                }
                continue;
            }
        };
        for (ai, &act) in grid.activations.iter().enumerate() {
            let acc = (|| {
                let g_tr = design_complex(&zx_tr, apply_complex(act, &pre_tr), dl)?;
                let g_te = design_complex(&zx_te, apply_complex(act, &pre_te), dl)?;
                let ridge = ComplexRidge::new(&g_tr, &f.w_train, RidgeMode::Auto, grid.transpose)?;
                complex_scores(&g_te, &ridge, c)
            })()
            .map(|s| accuracy(&argmax_rows(&s), &f.test_labels));
            record(cells, ai * n_c + ci, acc);
        }
    }
    Ok(())
}

/// Cross-validated outcome of a single grid point.
#[derive(Debug)]
pub struct PointOutcome {
    pub hp: HyperParams,
    pub folds: Result<Vec<f64>>,
}

/// Every grid point for `kind` in enumeration order, with its fold
/// accuracies or the error that stopped it.
pub fn evaluate_grid(ds: &Dataset, kind: ModelKind, grid: &Grid, plan: &FoldPlan) -> Result<Vec<PointOutcome>> {
    grid.validate()?;
    let folds = prepare_folds(ds, plan)?;
    let groups: Vec<Group> = grid
        .groups(kind)
        .into_iter()
        .map(|(s, n, a, v)| Group {
            n_hidden: n,
            alpha: a,
            varpi: v,
            seed: derive_seed(s, &ds.name, kind, n, a, v),
        })
        .collect();
    let evaluated: Vec<Cells> = groups.par_iter().map(|g| eval_group(&folds, kind, grid, g)).collect();
    let mut out = Vec::with_capacity(grid.n_points(kind));
    for (g, cells) in groups.iter().zip(evaluated) {
        let mut cells = cells.into_iter();
        for &act in &grid.activations {
            for &c in &grid.c_values {
                let hp = HyperParams {
                    c,
                    n_hidden: g.n_hidden,
                    activation: act,
                    alpha: g.alpha,
                    varpi: g.varpi,
                    direct_link: kind != ModelKind::Elm,
                    seed: g.seed,
                };
                out.push(PointOutcome {
                    hp,
                    folds: cells.next().expect("one cell per point"),
                });
            }
        }
    }
    Ok(out)
}

/// Index of the winning point under the documented tie-break.
pub fn select_best(points: &[PointOutcome]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, p) in points.iter().enumerate() {
        let Ok(folds) = &p.folds else { continue };
        let m = mean(folds);
        let better = match best {
            None => true,
            Some((j, bm)) => {
                let b = &points[j].hp;
                m > bm || (m == bm && (p.hp.n_hidden < b.n_hidden || (p.hp.n_hidden == b.n_hidden && p.hp.c > b.c)))
            }
        };
        if better {
            best = Some((i, m));
        }
    }
    best.map(|(i, _)| i)
}

pub fn run_grid(ds: &Dataset, kind: ModelKind, grid: &Grid, plan: &FoldPlan) -> Result<RunResult> {
    let start = Instant::now();
    let points = evaluate_grid(ds, kind, grid, plan)?;
    let mut failed = 0;
    for p in &points {
        if let Err(e) = &p.folds {
            failed += 1;
            log::warn!("{} {kind} point {:?} skipped: {e}", ds.name, p.hp);
        }
    }
    let Some(i) = select_best(&points) else {
        return Err(Error::Experiment(format!(
            "all {} grid points failed for {kind} on {}",
            points.len(),
            ds.name
        )));
    };
    let folds = points[i].folds.as_ref().expect("selected point succeeded").clone();
    Ok(RunResult {
        dataset: ds.name.clone(),
        kind,
        best: points[i].hp,
        mean_accuracy: mean(&folds),
        std_dev: std_dev(&folds),
        fold_accuracies: folds,
        points_evaluated: points.len(),
        points_failed: failed,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub alpha: f64,
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub fold_accuracies: Vec<f64>,
}

/// Cross-validated accuracy for each `α`, every other setting held fixed.
pub fn run_sensitivity_alpha(
    ds: &Dataset,
    kind: ModelKind,
    fixed: &HyperParams,
    alpha_values: &[f64],
    plan: &FoldPlan,
    transpose: TransposeKind,
) -> Result<Vec<CurvePoint>> {
    if !kind.is_complex() {
        return Err(Error::Argument(format!("sensitivity over alpha needs a complex model, got {kind}")));
    }
    let folds = prepare_folds(ds, plan)?;
    alpha_values
        .iter()
        .map(|&alpha| {
            let hp = HyperParams { alpha, ..*fixed };
            let accs = cross_validate(&folds, kind, &hp, transpose)?;
            Ok(CurvePoint {
                alpha,
                mean_accuracy: mean(&accs),
                std_dev: std_dev(&accs),
                fold_accuracies: accs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AblationVariant {
    Full,
    AlphaZero,
    WithoutDirectLink,
    WithoutDirectLinkAlphaZero,
}

impl AblationVariant {
    pub const ALL: [AblationVariant; 4] = [
        AblationVariant::Full,
        AblationVariant::AlphaZero,
        AblationVariant::WithoutDirectLink,
        AblationVariant::WithoutDirectLinkAlphaZero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AblationVariant::Full => "full",
            AblationVariant::AlphaZero => "alpha0",
            AblationVariant::WithoutDirectLink => "wodl",
            AblationVariant::WithoutDirectLinkAlphaZero => "wodl_alpha0",
        }
    }

    pub fn apply(self, hp: &HyperParams) -> HyperParams {
        let (alpha, direct_link) = match self {
            AblationVariant::Full => (hp.alpha, true),
            AblationVariant::AlphaZero => (0.0, true),
            AblationVariant::WithoutDirectLink => (hp.alpha, false),
            AblationVariant::WithoutDirectLinkAlphaZero => (0.0, false),
        };
        HyperParams { alpha, direct_link, ..*hp }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: AblationVariant,
    pub hyperparams: HyperParams,
    pub mean_accuracy: f64,
    pub std_dev: f64,
    pub fold_accuracies: Vec<f64>,
    pub eta_rows: usize,
}

/// The four ablation variants of `hp` under the same folds and seed.
pub fn run_ablation(
    ds: &Dataset,
    kind: ModelKind,
    hp: &HyperParams,
    plan: &FoldPlan,
    transpose: TransposeKind,
) -> Result<Vec<AblationRow>> {
    if !kind.is_complex() {
        return Err(Error::Argument(format!("ablation needs a complex model, got {kind}")));
    }
    let folds = prepare_folds(ds, plan)?;
    AblationVariant::ALL
        .iter()
        .map(|&variant| {
            let vhp = variant.apply(hp);
            let accs = cross_validate(&folds, kind, &vhp, transpose)?;
            let eta_rows = if vhp.direct_link { ds.n_features() + vhp.n_hidden } else { vhp.n_hidden };
            Ok(AblationRow {
                variant,
                hyperparams: vhp,
                mean_accuracy: mean(&accs),
                std_dev: std_dev(&accs),
                fold_accuracies: accs,
                eta_rows,
            })
        })
        .collect()
}

/// Run-level context stored next to every result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub n_folds: usize,
    pub transpose: TransposeKind,
    pub preprocessing: String,
    pub tie_break: String,
    pub accuracy: String,
}

impl ResultsMetadata {
    pub fn new(config_hash: impl Into<String>, seed: u64, grid: &Grid) -> Self {
        Self {
            config_hash: config_hash.into(),
            seed,
            n_folds: grid.n_folds,
            transpose: grid.transpose,
            preprocessing: PREPROCESSING_NOTE.into(),
            tie_break: TIE_BREAK_NOTE.into(),
            accuracy: ACCURACY_NOTE.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub metadata: ResultsMetadata,
    pub results: Vec<RunResult>,
    pub failures: Vec<RunFailure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub dataset: String,
    pub kind: Option<ModelKind>,
    pub error: String,
}

pub const RESULTS_CSV_HEADER: [&str; 16] = [
    "schema_version",
    "dataset",
    "model",
    "mean_accuracy",
    "std_dev",
    "c",
    "n_hidden",
    "activation",
    "alpha",
    "varpi",
    "direct_link",
    "seed",
    "fold_accuracies",
    "points_evaluated",
    "points_failed",
    "config_hash",
];

pub fn write_results_csv(path: &Path, results: &[RunResult], meta: &ResultsMetadata) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESULTS_CSV_HEADER)?;
    for r in results {
        let folds = r.fold_accuracies.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
        w.write_record([
            RESULTS_SCHEMA_VERSION.to_string(),
            r.dataset.clone(),
            r.kind.name().to_string(),
            r.mean_accuracy.to_string(),
            r.std_dev.to_string(),
            r.best.c.to_string(),
            r.best.n_hidden.to_string(),
            r.best.activation.to_string(),
            r.best.alpha.to_string(),
            r.best.varpi.to_string(),
            r.best.direct_link.to_string(),
            r.best.seed.to_string(),
            folds,
            r.points_evaluated.to_string(),
            r.points_failed.to_string(),
            meta.config_hash.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_results_json(path: &Path, file: &ResultsFile) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, file)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Wall times live apart from the result payload so reruns can be compared
/// byte for byte.
pub fn write_timings(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut s = String::from("dataset,model,wall_time_secs\n");
    for r in results {
        let _ = writeln!(s, "{},{},{:.3}", r.dataset, r.kind.name(), r.wall_time_secs);
    }
    std::fs::write(path, s)?;
    Ok(())
}

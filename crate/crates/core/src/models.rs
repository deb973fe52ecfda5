//! RVFL, ELM and the complex-valued RVFL-X variants.
//!
//! Real kinds build `G₂ = [Z, σ(Z F_w + F_b)]` (ELM drops `Z`) and solve a real
//! ridge problem. Complex kinds first map `Z` to `Zˣ` through a fitted
//! transform, draw complex hidden weights, sparsify a fixed fraction of them,
//! build `G₂ˣ = [Zˣ, σˣ(Zˣ F̂_w + F̂_b)]`, solve the complex ridge problem
//! against the real one-hot targets and score with the elementwise magnitude.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::activations::{apply_complex, apply_real, ActivationKind};
use crate::error::{argument, Error, Result};
use crate::matrix::{
    complex_matmul, uniform_matrix, ComplexMatrix, ComplexRidge, RealMatrix, RidgeMode, Rng,
    TransposeKind,
};
use crate::solvers::RealRidge;
use crate::transforms::{apply_transform, fit_apply_autoencoder, fit_natural, FittedTransform, Varpi};

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Sub-streams of a hyperparameter seed.
pub(crate) const STREAM_TRANSFORM: u64 = 1;
pub(crate) const STREAM_HIDDEN: u64 = 2;
pub(crate) const STREAM_MASK: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Rvfl,
    Elm,
    RvflxN,
    RvflxAuto,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Rvfl,
        ModelKind::Elm,
        ModelKind::RvflxN,
        ModelKind::RvflxAuto,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Rvfl => "rvfl",
            ModelKind::Elm => "elm",
            ModelKind::RvflxN => "rvflx_n",
            ModelKind::RvflxAuto => "rvflx_auto",
        }
    }

    /// Name used in report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            ModelKind::Rvfl => "RVFL",
            ModelKind::Elm => "RVFLwoDL",
            ModelKind::RvflxN => "RVFL-X-N",
            ModelKind::RvflxAuto => "RVFL-X-Auto",
        }
    }

    pub fn is_complex(self) -> bool {
        matches!(self, ModelKind::RvflxN | ModelKind::RvflxAuto)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "rvfl" => Ok(ModelKind::Rvfl),
            "elm" | "rvflwodl" => Ok(ModelKind::Elm),
            "rvflx_n" | "rvfl_x_n" => Ok(ModelKind::RvflxN),
            "rvflx_auto" | "rvfl_x_auto" => Ok(ModelKind::RvflxAuto),
            _ => argument(format!("unknown model kind '{s}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperParams {
    pub c: f64,
    pub n_hidden: usize,
    pub activation: ActivationKind,
    pub alpha: f64,
    pub varpi: Varpi,
    pub direct_link: bool,
    pub seed: u64,
}

impl Default for HyperParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            n_hidden: 103,
            activation: ActivationKind::Relu,
            alpha: 0.0,
            varpi: Varpi::ONE,
            direct_link: true,
            seed: 0,
        }
    }
}

impl HyperParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0) || !self.c.is_finite() {
            return argument(format!("C must be positive and finite, got {}", self.c));
        }
        if self.n_hidden == 0 {
            return argument("n_hidden must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return argument(format!("alpha must lie in [0, 1], got {}", self.alpha));
        }
        Ok(())
    }
}

/// Number of entries zeroed for sparsity fraction `alpha` out of `count`.
pub fn sparsified_count(alpha: f64, count: usize) -> usize {
    // the epsilon absorbs representation error such as 0.3 * 10 = 2.9999...
    ((alpha * count as f64) + 1e-9).floor() as usize
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealHidden {
    pub weights: RealMatrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexHidden {
    pub weights: ComplexMatrix,
    pub bias: Vec<Complex64>,
}

impl ComplexHidden {
    /// Same parameters with every imaginary component set to zero.
    pub fn without_imaginary(&self) -> Self {
        Self {
            weights: self.weights.map(|z| Complex64::new(z.re, 0.0)),
            bias: self.bias.iter().map(|z| Complex64::new(z.re, 0.0)).collect(),
        }
    }
}

/// Real hidden weights (uniform [-1, 1], r x N) and biases (uniform [0, 1],
/// one per node) from the hidden stream of `seed`.
pub fn init_real_params(n_hidden: usize, r: usize, seed: u64) -> Result<RealHidden> {
    let mut rng = Rng::with_stream(seed, STREAM_HIDDEN);
    draw_real_hidden(&mut rng, n_hidden, r)
}

fn draw_real_hidden(rng: &mut Rng, n_hidden: usize, r: usize) -> Result<RealHidden> {
    if r == 0 || n_hidden == 0 {
        return argument("hidden layer needs at least one input and one node");
    }
    let weights = uniform_matrix(rng, r, n_hidden, -1.0, 1.0)?;
    let bias = (0..n_hidden).map(|_| rng.uniform(0.0, 1.0)).collect();
    Ok(RealHidden { weights, bias })
}

/// Complex hidden weights and biases after `α`-sparsification.
///
/// The real parts are drawn first, in the same order as
/// [`init_real_params`], so both share their real draws for a given seed.
pub fn init_complex_params(hp: &HyperParams, r: usize) -> Result<ComplexHidden> {
    hp.validate()?;
    let n = hp.n_hidden;
    let mut rng = Rng::with_stream(hp.seed, STREAM_HIDDEN);
    let real = draw_real_hidden(&mut rng, n, r)?;
    let w_im = uniform_matrix(&mut rng, r, n, -1.0, 1.0)?;
    let b_im: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
    let mut weights = ComplexMatrix::from_parts(&real.weights, &w_im)?;
    let mut bias: Vec<Complex64> = real
        .bias
        .iter()
        .zip(&b_im)
        .map(|(&a, &b)| Complex64::new(a, b))
        .collect();

    let mut mask_rng = Rng::with_stream(hp.seed, STREAM_MASK);
    let zero = Complex64::new(0.0, 0.0);
    let wd = weights.data_mut();
    for i in mask_rng.sample_indices(wd.len(), sparsified_count(hp.alpha, wd.len())) {
        wd[i] = zero;
    }
    for i in mask_rng.sample_indices(n, sparsified_count(hp.alpha, n)) {
        bias[i] = zero;
    }
    Ok(ComplexHidden { weights, bias })
}

/// `Z F_w + F_b`, bias broadcast over rows.
pub fn pre_activation_real(z: &RealMatrix, hidden: &RealHidden) -> Result<RealMatrix> {
    let mut h = z.matmul(&hidden.weights)?;
    let n = h.cols();
    for (idx, v) in h.data_mut().iter_mut().enumerate() {
        *v += hidden.bias[idx % n];
    }
    Ok(h)
}

pub fn pre_activation_complex(zx: &ComplexMatrix, fw: &ComplexMatrix, fb: &[Complex64]) -> Result<ComplexMatrix> {
    if fb.len() != fw.cols() {
        return argument(format!(
            "bias length {} does not match {} hidden nodes",
            fb.len(),
            fw.cols()
        ));
    }
    let mut h = complex_matmul(zx, fw)?;
    let n = h.cols();
    for (idx, v) in h.data_mut().iter_mut().enumerate() {
        *v += fb[idx % n];
    }
    Ok(h)
}

pub fn forward_hidden_real(z: &RealMatrix, hidden: &RealHidden, kind: ActivationKind) -> Result<RealMatrix> {
    Ok(apply_real(kind, &pre_activation_real(z, hidden)?))
}

/// `σˣ(Zˣ F̂_w + F̂_b)`, k x N_h.
pub fn forward_hidden_complex(
    zx: &ComplexMatrix,
    fw: &ComplexMatrix,
    fb: &[Complex64],
    kind: ActivationKind,
) -> Result<ComplexMatrix> {
    Ok(apply_complex(kind, &pre_activation_complex(zx, fw, fb)?))
}

pub(crate) fn design_real(z: &RealMatrix, g1: RealMatrix, direct_link: bool) -> Result<RealMatrix> {
    if direct_link {
        z.hstack(&g1)
    } else {
        Ok(g1)
    }
}

pub(crate) fn design_complex(zx: &ComplexMatrix, g1: ComplexMatrix, direct_link: bool) -> Result<ComplexMatrix> {
    if direct_link {
        zx.hstack(&g1)
    } else {
        Ok(g1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "params", rename_all = "lowercase")]
pub enum HiddenLayer {
    Real(RealHidden),
    Complex(ComplexHidden),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "field", content = "weights", rename_all = "lowercase")]
pub enum OutputWeights {
    Real(RealMatrix),
    Complex(ComplexMatrix),
}

impl OutputWeights {
    pub fn rows(&self) -> usize {
        match self {
            OutputWeights::Real(m) => m.rows(),
            OutputWeights::Complex(m) => m.rows(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrainOptions {
    pub transpose: TransposeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub schema_version: u32,
    pub kind: ModelKind,
    pub hyperparams: HyperParams,
    pub n_features: usize,
    pub direct_link: bool,
    pub transpose: TransposeKind,
    pub hidden: HiddenLayer,
    pub transform: Option<FittedTransform>,
    pub eta: OutputWeights,
    pub class_labels: Vec<String>,
}

/// Scores and arg-max class per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub scores: RealMatrix,
    pub labels: Vec<usize>,
}

/// Whether `kind` feeds the raw (transformed) input straight to the output.
pub fn uses_direct_link(kind: ModelKind, hp: &HyperParams) -> bool {
    match kind {
        ModelKind::Rvfl => true,
        ModelKind::Elm => false,
        ModelKind::RvflxN | ModelKind::RvflxAuto => hp.direct_link,
    }
}

pub(crate) fn check_training_data(z: &RealMatrix, w: &RealMatrix) -> Result<()> {
    if z.rows() == 0 {
        return Err(Error::Data("training set has no rows".into()));
    }
    if z.rows() != w.rows() {
        return argument(format!(
            "features have {} rows but targets have {}",
            z.rows(),
            w.rows()
        ));
    }
    if w.cols() < 2 {
        return Err(Error::Data("need at least two classes".into()));
    }
    for i in 0..w.rows() {
        let row = w.row(i);
        let ones = row.iter().filter(|&&v| v == 1.0).count();
        let zeros = row.iter().filter(|&&v| v == 0.0).count();
        if ones != 1 || ones + zeros != row.len() {
            return Err(Error::Data(format!("target row {i} is not one-hot")));
        }
    }
    let present = (0..w.cols()).filter(|&j| (0..w.rows()).any(|i| w.get(i, j) == 1.0)).count();
    if present < 2 {
        return Err(Error::Data("training targets contain a single class".into()));
    }
    Ok(())
}

pub fn train(kind: ModelKind, hp: &HyperParams, z: &RealMatrix, w_onehot: &RealMatrix) -> Result<FittedModel> {
    train_with(kind, hp, z, w_onehot, &TrainOptions::default())
}

pub fn train_with(
    kind: ModelKind,
    hp: &HyperParams,
    z: &RealMatrix,
    w_onehot: &RealMatrix,
    opts: &TrainOptions,
) -> Result<FittedModel> {
    hp.validate()?;
    check_training_data(z, w_onehot)?;
    let r = z.cols();
    let direct_link = uses_direct_link(kind, hp);
    let (hidden, transform, eta) = if kind.is_complex() {
        let (transform, zx) = match kind {
            ModelKind::RvflxAuto => {
                let mut rng = Rng::with_stream(hp.seed, STREAM_TRANSFORM);
                fit_apply_autoencoder(z, hp.c, hp.varpi, &mut rng)?
            }
            _ => (fit_natural(z), ComplexMatrix::from_real(z)),
        };
        let params = init_complex_params(hp, r)?;
        let g1 = forward_hidden_complex(&zx, &params.weights, &params.bias, hp.activation)?;
        let g2 = design_complex(&zx, g1, direct_link)?;
        let eta = ComplexRidge::new(&g2, w_onehot, RidgeMode::Auto, opts.transpose)?.solve(hp.c)?;
        (HiddenLayer::Complex(params), Some(transform), OutputWeights::Complex(eta))
    } else {
        let params = init_real_params(hp.n_hidden, r, hp.seed)?;
        let g1 = forward_hidden_real(z, &params, hp.activation)?;
        let g2 = design_real(z, g1, direct_link)?;
        let eta = RealRidge::new(&g2, w_onehot, RidgeMode::Auto)?.solve(hp.c)?;
        (HiddenLayer::Real(params), None, OutputWeights::Real(eta))
    };
    Ok(FittedModel {
        schema_version: MODEL_SCHEMA_VERSION,
        kind,
        hyperparams: *hp,
        n_features: r,
        direct_link,
        transpose: opts.transpose,
        hidden,
        transform,
        eta,
        class_labels: (0..w_onehot.cols()).map(|j| j.to_string()).collect(),
    })
}

/// Index of the largest entry in each row; ties go to the lowest index.
pub fn argmax_rows(scores: &RealMatrix) -> Vec<usize> {
    (0..scores.rows())
        .map(|i| {
            let row = scores.row(i);
            let mut best = 0;
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

impl FittedModel {
    pub fn with_class_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.class_labels.len() {
            return argument(format!(
                "{} labels for {} classes",
                labels.len(),
                self.class_labels.len()
            ));
        }
        self.class_labels = labels;
        Ok(self)
    }

    pub fn predict(&self, z: &RealMatrix) -> Result<Prediction> {
        predict(self, z)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: FittedModel = serde_json::from_str(s)?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported model schema version {}",
                m.schema_version
            )));
        }
        let expected = if m.direct_link {
            m.n_features + m.hyperparams.n_hidden
        } else {
            m.hyperparams.n_hidden
        };
        if m.eta.rows() != expected {
            return Err(Error::Data(format!(
                "output weights have {} rows, expected {expected}",
                m.eta.rows()
            )));
        }
        Ok(m)
    }
}

pub fn predict(m: &FittedModel, z: &RealMatrix) -> Result<Prediction> {
    if z.cols() != m.n_features {
        return argument(format!(
            "model trained on {} features, got {}",
            m.n_features,
            z.cols()
        ));
    }
    let act = m.hyperparams.activation;
    let scores = match (&m.hidden, &m.eta) {
        (HiddenLayer::Real(h), OutputWeights::Real(eta)) => {
            let g2 = design_real(z, forward_hidden_real(z, h, act)?, m.direct_link)?;
            g2.matmul(eta)?
        }
        (HiddenLayer::Complex(h), OutputWeights::Complex(eta)) => {
            let zx = match &m.transform {
                Some(t) => apply_transform(t, z)?,
                None => return Err(Error::Data("complex model without a transform".into())),
            };
            let g1 = forward_hidden_complex(&zx, &h.weights, &h.bias, act)?;
            let g2 = design_complex(&zx, g1, m.direct_link)?;
            complex_matmul(&g2, eta)?.magnitude()
        }
        _ => return Err(Error::Data("hidden layer and output weights disagree in field".into())),
    };
    let labels = argmax_rows(&scores);
    Ok(Prediction { scores, labels })
}

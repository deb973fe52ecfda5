//! Real to complex dataset conversion.
//!
//! The natural transform embeds `Z` as `Z + i·0`. The autoencoder transform
//! draws a random encoder `E` (r x r, uniform on [-1, 1]), forms the latent
//! `Ŝ = ξ(Z E)`, fits the decoder `V*` by ridge regression of `Z` on `Ŝ`, and
//! uses `S = ξ(Z (ϖ V* + (1 − ϖ) V*ᵀ))` as the imaginary part.
//!
//! `ξ` is per-column min-max scaling to [0, 1]. Its ranges are learned on the
//! fitting matrix and reused (with clamping) on unseen rows.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};
use crate::matrix::{uniform_matrix, ComplexMatrix, RealMatrix, Rng};
use crate::solvers::{real_ridge, RidgeMode};

pub const TRANSFORM_SCHEMA_VERSION: u32 = 1;

/// Binary switch between `V*` (1) and `V*ᵀ` (0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Varpi(u8);

impl Varpi {
    pub const ZERO: Varpi = Varpi(0);
    pub const ONE: Varpi = Varpi(1);

    pub fn new(v: u8) -> Result<Self> {
        match v {
            0 | 1 => Ok(Varpi(v)),
            _ => argument(format!("varpi must be 0 or 1, got {v}")),
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for Varpi {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Varpi::new(v)
    }
}

impl From<Varpi> for u8 {
    fn from(v: Varpi) -> u8 {
        v.0
    }
}

impl fmt::Display for Varpi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TransformKind {
    Natural,
    Autoencoder { varpi: Varpi },
}

/// Per-column `(min, max)` ranges of the min-max normaliser.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct XiParams {
    pub ranges: Vec<(f64, f64)>,
}

impl XiParams {
    pub fn fit(m: &RealMatrix) -> Self {
        let ranges = (0..m.cols())
            .map(|j| {
                (0..m.rows()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = m.get(i, j);
                    (lo.min(v), hi.max(v))
                })
            })
            .collect();
        Self { ranges }
    }

    /// Scales each column into [0, 1]; values outside the fitted range are
    /// clamped and constant columns map to 0.
    pub fn apply(&self, m: &RealMatrix) -> Result<RealMatrix> {
        if m.cols() != self.ranges.len() {
            return argument(format!(
                "normaliser fitted on {} columns, got {}",
                self.ranges.len(),
                m.cols()
            ));
        }
        let mut out = m.clone();
        let cols = m.cols();
        for (idx, v) in out.data_mut().iter_mut().enumerate() {
            let (lo, hi) = self.ranges[idx % cols];
            let span = hi - lo;
            *v = if span > 0.0 {
                ((*v - lo) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
        }
        Ok(out)
    }
}

/// Fits `ξ` on `m` and returns the scaled matrix with its parameters.
pub fn xi_fit_apply(m: &RealMatrix) -> Result<(RealMatrix, XiParams)> {
    if m.rows() == 0 || m.cols() == 0 {
        return argument("cannot normalise an empty matrix");
    }
    let params = XiParams::fit(m);
    Ok((params.apply(m)?, params))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedTransform {
    pub schema_version: u32,
    pub kind: TransformKind,
    pub n_features: usize,
    pub encoder_weights: Option<RealMatrix>,
    pub decoder_weights: Option<RealMatrix>,
    pub xi_params: Option<XiParams>,
}

impl FittedTransform {
    /// The `r x r` map `ϖ V* + (1 − ϖ) V*ᵀ` applied before `ξ`.
    pub fn latent_map(&self) -> Option<RealMatrix> {
        match (self.kind, &self.decoder_weights) {
            (TransformKind::Autoencoder { varpi }, Some(v)) => Some(mix_decoder(v, varpi)),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: FittedTransform = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }

    fn validate(&self) -> Result<()> {
        if self.schema_version != TRANSFORM_SCHEMA_VERSION {
            return Err(Error::Data(format!(
                "unsupported transform schema version {}",
                self.schema_version
            )));
        }
        let r = self.n_features;
        match self.kind {
            TransformKind::Natural => {
                if self.encoder_weights.is_some() || self.decoder_weights.is_some() {
                    return Err(Error::Data("natural transform carries autoencoder state".into()));
                }
            }
            TransformKind::Autoencoder { .. } => {
                let square = |m: &Option<RealMatrix>| m.as_ref().is_some_and(|m| m.shape() == (r, r));
                let xi_ok = self.xi_params.as_ref().is_some_and(|x| x.ranges.len() == r);
                if !square(&self.encoder_weights) || !square(&self.decoder_weights) || !xi_ok {
                    return Err(Error::Data("autoencoder transform state is incomplete".into()));
                }
            }
        }
        Ok(())
    }
}

fn mix_decoder(v: &RealMatrix, varpi: Varpi) -> RealMatrix {
    if varpi == Varpi::ONE {
        v.clone()
    } else {
        v.transpose()
    }
}

pub fn fit_natural(z: &RealMatrix) -> FittedTransform {
    FittedTransform {
        schema_version: TRANSFORM_SCHEMA_VERSION,
        kind: TransformKind::Natural,
        n_features: z.cols(),
        encoder_weights: None,
        decoder_weights: None,
        xi_params: None,
    }
}

pub fn fit_autoencoder(z: &RealMatrix, c: f64, varpi: Varpi, rng: &mut Rng) -> Result<FittedTransform> {
    fit_apply_autoencoder(z, c, varpi, rng).map(|(t, _)| t)
}

/// Fits the autoencoder transform and also returns the complex version of
/// the fitting matrix.
pub fn fit_apply_autoencoder(
    z: &RealMatrix,
    c: f64,
    varpi: Varpi,
    rng: &mut Rng,
) -> Result<(FittedTransform, ComplexMatrix)> {
    if !(c > 0.0) || !c.is_finite() {
        return argument(format!("regularisation C must be positive and finite, got {c}"));
    }
    let r = z.cols();
    if z.rows() == 0 || r == 0 {
        return argument("cannot fit an autoencoder on an empty matrix");
    }
    let encoder = uniform_matrix(rng, r, r, -1.0, 1.0)?;
    let (latent, _) = xi_fit_apply(&z.matmul(&encoder)?)?;
    let decoder = real_ridge(&latent, z, c, RidgeMode::Auto)?;
    let (imag, xi) = xi_fit_apply(&z.matmul(&mix_decoder(&decoder, varpi))?)?;
    let zx = ComplexMatrix::from_parts(z, &imag)?;
    let t = FittedTransform {
        schema_version: TRANSFORM_SCHEMA_VERSION,
        kind: TransformKind::Autoencoder { varpi },
        n_features: r,
        encoder_weights: Some(encoder),
        decoder_weights: Some(decoder),
        xi_params: Some(xi),
    };
    Ok((t, zx))
}

pub fn apply_transform(t: &FittedTransform, z: &RealMatrix) -> Result<ComplexMatrix> {
    if z.cols() != t.n_features {
        return argument(format!(
            "transform fitted on {} features, got {}",
            t.n_features,
            z.cols()
        ));
    }
    match t.kind {
        TransformKind::Natural => Ok(ComplexMatrix::from_real(z)),
        TransformKind::Autoencoder { .. } => {
            let map = t
                .latent_map()
                .ok_or_else(|| Error::Data("autoencoder transform without decoder".into()))?;
            let xi = t
                .xi_params
                .as_ref()
                .ok_or_else(|| Error::Data("autoencoder transform without ξ ranges".into()))?;
            let imag = xi.apply(&z.matmul(&map)?)?;
            ComplexMatrix::from_parts(z, &imag)
        }
    }
}

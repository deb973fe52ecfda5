//! Hidden-layer activations and their componentwise complex lift.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::matrix::{ComplexMatrix, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sigmoid,
    Sine,
    Tribas,
    Radbas,
    Tansig,
    Relu,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 6] = [
        ActivationKind::Sigmoid,
        ActivationKind::Sine,
        ActivationKind::Tribas,
        ActivationKind::Radbas,
        ActivationKind::Tansig,
        ActivationKind::Relu,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Sine => "sine",
            ActivationKind::Tribas => "tribas",
            ActivationKind::Radbas => "radbas",
            ActivationKind::Tansig => "tansig",
            ActivationKind::Relu => "relu",
        }
    }

    #[inline]
    pub fn eval(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            ActivationKind::Sine => x.sin(),
            ActivationKind::Tribas => (1.0 - x.abs()).max(0.0),
            ActivationKind::Radbas => (-x * x).exp(),
            ActivationKind::Tansig => 2.0 / (1.0 + (-2.0 * x).exp()) - 1.0,
            ActivationKind::Relu => x.max(0.0),
        }
    }

    /// `σ(Re z) + i σ(Im z)`.
    #[inline]
    pub fn eval_complex(self, z: Complex64) -> Complex64 {
        Complex64::new(self.eval(z.re), self.eval(z.im))
    }
}

impl fmt::Display for ActivationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ActivationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        ActivationKind::ALL
            .into_iter()
            .find(|k| k.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| Error::Argument(format!("unknown activation '{s}'")))
    }
}

pub fn apply_real(kind: ActivationKind, m: &RealMatrix) -> RealMatrix {
    m.map(|x| kind.eval(x))
}

pub fn apply_complex(kind: ActivationKind, m: &ComplexMatrix) -> ComplexMatrix {
    m.map(|z| kind.eval_complex(z))
}

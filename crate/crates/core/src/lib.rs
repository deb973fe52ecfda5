//! Random vector functional link networks with a complex-valued hidden layer.

pub mod activations;
pub mod cli;
pub mod data;
pub mod error;
pub mod experiment;
pub mod matrix;
pub mod models;
pub mod solvers;
pub mod stats;
pub mod transforms;

pub use error::{Error, Result};

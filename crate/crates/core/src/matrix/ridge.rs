//! Regularised least squares over complex design matrices with real targets.
//!
//! Minimises `C/2 ‖Gη − W‖² + 1/2 ‖η‖²`. Primal form solves the `p x p` system
//! `(GᴴG + I/C) η = GᴴW`; dual form solves the `k x k` system
//! `(GGᴴ + I/C) X = W` and returns `η = GᴴX`.

use serde::{Deserialize, Serialize};

use super::{complex_matmul, ComplexLu, ComplexMatrix, RealMatrix};
use crate::error::{argument, Error, Result};

/// Which closed form to use. `Auto` picks `Dual` iff samples < features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RidgeMode {
    Primal,
    Dual,
    #[default]
    Auto,
}

impl RidgeMode {
    /// Resolves `Auto` for a design matrix with `samples` rows and `features`
    /// columns; explicit modes pass through.
    pub fn resolve(self, samples: usize, features: usize) -> RidgeMode {
        match self {
            RidgeMode::Auto if samples < features => RidgeMode::Dual,
            RidgeMode::Auto => RidgeMode::Primal,
            m => m,
        }
    }
}

/// Transpose used in the closed form. `Hermitian` is the minimiser of the
/// complex objective; `Literal` applies a plain transpose.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TransposeKind {
    #[default]
    Hermitian,
    Literal,
}

fn star(g: &ComplexMatrix, kind: TransposeKind) -> ComplexMatrix {
    match kind {
        TransposeKind::Hermitian => g.adjoint(),
        TransposeKind::Literal => g.transpose(),
    }
}

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return argument(format!("regularisation C must be positive and finite, got {c}"));
    }
    Ok(())
}

fn add_diagonal(m: &ComplexMatrix, shift: f64) -> ComplexMatrix {
    let mut out = m.clone();
    let n = out.rows();
    let data = out.data_mut();
    for i in 0..n {
        data[i * n + i].re += shift;
    }
    out
}

/// Gram matrix and right-hand side of one design matrix, reusable across
/// many values of `C`.
#[derive(Debug, Clone)]
pub struct ComplexRidge {
    mode: RidgeMode,
    g_star: ComplexMatrix,
    gram: ComplexMatrix,
    rhs: ComplexMatrix,
}

impl ComplexRidge {
    pub fn new(
        g: &ComplexMatrix,
        w: &RealMatrix,
        mode: RidgeMode,
        transpose: TransposeKind,
    ) -> Result<Self> {
        if g.rows() != w.rows() {
            return argument(format!(
                "design has {} rows but targets have {}",
                g.rows(),
                w.rows()
            ));
        }
        if g.rows() == 0 || g.cols() == 0 {
            return argument("empty design matrix");
        }
        if !g.as_slice().iter().all(|z| z.is_finite()) || !w.is_finite() {
            return Err(Error::Numeric("non-finite input to ridge solve".into()));
        }
        let mode = mode.resolve(g.rows(), g.cols());
        let g_star = star(g, transpose);
        let w_c = ComplexMatrix::from_real(w);
        let (gram, rhs) = match mode {
            RidgeMode::Dual => (complex_matmul(g, &g_star)?, w_c),
            _ => (complex_matmul(&g_star, g)?, complex_matmul(&g_star, &w_c)?),
        };
        Ok(Self {
            mode,
            g_star,
            gram,
            rhs,
        })
    }

    /// The resolved branch (never `Auto`).
    pub fn mode(&self) -> RidgeMode {
        self.mode
    }

    pub fn solve(&self, c: f64) -> Result<ComplexMatrix> {
        check_c(c)?;
        let lu = ComplexLu::factor(&add_diagonal(&self.gram, 1.0 / c))?;
        let x = lu.solve(&self.rhs)?;
        let eta = match self.mode {
            RidgeMode::Dual => complex_matmul(&self.g_star, &x)?,
            _ => x,
        };
        if !eta.as_slice().iter().all(|z| z.is_finite()) {
            return Err(Error::Numeric("ridge solution is not finite".into()));
        }
        Ok(eta)
    }
}

/// Output weights for complex design `g` and real targets `w`, using the
/// Hermitian transpose.
pub fn hermitian_solve_regularized(
    g: &ComplexMatrix,
    w: &RealMatrix,
    c: f64,
    mode: RidgeMode,
) -> Result<ComplexMatrix> {
    hermitian_solve_with(g, w, c, mode, TransposeKind::Hermitian)
}

pub fn hermitian_solve_with(
    g: &ComplexMatrix,
    w: &RealMatrix,
    c: f64,
    mode: RidgeMode,
    transpose: TransposeKind,
) -> Result<ComplexMatrix> {
    check_c(c)?;
    ComplexRidge::new(g, w, mode, transpose)?.solve(c)
}

/// Max-norm of `(GᴴG + I/C)η − GᴴW` divided by `max(1, ‖GᴴW‖_max)`.
pub fn complex_normal_residual(
    g: &ComplexMatrix,
    w: &RealMatrix,
    c: f64,
    eta: &ComplexMatrix,
    transpose: TransposeKind,
) -> Result<f64> {
    check_c(c)?;
    let g_star = star(g, transpose);
    let gram = add_diagonal(&complex_matmul(&g_star, g)?, 1.0 / c);
    let lhs = complex_matmul(&gram, eta)?;
    let rhs = complex_matmul(&g_star, &ComplexMatrix::from_real(w))?;
    let resid = lhs
        .as_slice()
        .iter()
        .zip(rhs.as_slice())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()));
    Ok(resid / rhs.max_abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{uniform_matrix, Rng};

    fn random_complex(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_parts(
            &uniform_matrix(rng, rows, cols, -1.0, 1.0).unwrap(),
            &uniform_matrix(rng, rows, cols, -1.0, 1.0).unwrap(),
        )
        .unwrap()
    }

    fn rel_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        let scale = a.max_abs().max(b.max_abs()).max(1e-300);
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
            / scale
    }

    #[test]
    fn ridge_limit_recovers_identity() {
        let g = ComplexMatrix::identity(2);
        let w = RealMatrix::identity(2);
        for mode in [RidgeMode::Primal, RidgeMode::Dual] {
            let eta = hermitian_solve_regularized(&g, &w, 1e12, mode).unwrap();
            assert!(rel_diff(&eta, &ComplexMatrix::identity(2)) < 1e-6);
        }
    }

    #[test]
    fn primal_and_dual_agree_on_wide_design() {
        let mut rng = Rng::new(21);
        let g = random_complex(&mut rng, 5, 8);
        let w = uniform_matrix(&mut rng, 5, 3, 0.0, 1.0).unwrap();
        let p = hermitian_solve_regularized(&g, &w, 0.7, RidgeMode::Primal).unwrap();
        let d = hermitian_solve_regularized(&g, &w, 0.7, RidgeMode::Dual).unwrap();
        assert!(rel_diff(&p, &d) < 1e-8);
    }

    #[test]
    fn real_design_gives_real_weights() {
        let mut rng = Rng::new(4);
        let g = ComplexMatrix::from_real(&uniform_matrix(&mut rng, 9, 4, -1.0, 1.0).unwrap());
        let w = uniform_matrix(&mut rng, 9, 2, 0.0, 1.0).unwrap();
        for mode in [RidgeMode::Primal, RidgeMode::Dual] {
            let eta = hermitian_solve_regularized(&g, &w, 3.0, mode).unwrap();
            assert!(eta.im().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn auto_mode_branch_rule() {
        assert_eq!(RidgeMode::Auto.resolve(4, 7), RidgeMode::Dual);
        assert_eq!(RidgeMode::Auto.resolve(7, 7), RidgeMode::Primal);
        assert_eq!(RidgeMode::Auto.resolve(9, 7), RidgeMode::Primal);
        let mut rng = Rng::new(2);
        let g = random_complex(&mut rng, 4, 7);
        let w = RealMatrix::zeros(4, 1);
        let r = ComplexRidge::new(&g, &w, RidgeMode::Auto, TransposeKind::Hermitian).unwrap();
        assert_eq!(r.mode(), RidgeMode::Dual);
    }

    #[test]
    fn residual_certificate_holds() {
        let mut rng = Rng::new(6);
        let g = random_complex(&mut rng, 12, 5);
        let w = uniform_matrix(&mut rng, 12, 2, 0.0, 1.0).unwrap();
        let eta = hermitian_solve_regularized(&g, &w, 10.0, RidgeMode::Auto).unwrap();
        let r = complex_normal_residual(&g, &w, 10.0, &eta, TransposeKind::Hermitian).unwrap();
        assert!(r <= 1e-8, "residual {r}");
    }

    #[test]
    fn literal_transpose_differs_for_complex_design() {
        let mut rng = Rng::new(9);
        let g = random_complex(&mut rng, 10, 3);
        let w = uniform_matrix(&mut rng, 10, 2, 0.0, 1.0).unwrap();
        let h = hermitian_solve_with(&g, &w, 1.0, RidgeMode::Primal, TransposeKind::Hermitian)
            .unwrap();
        let l = hermitian_solve_with(&g, &w, 1.0, RidgeMode::Primal, TransposeKind::Literal)
            .unwrap();
        assert!(rel_diff(&h, &l) > 1e-3);
        let r = complex_normal_residual(&g, &w, 1.0, &l, TransposeKind::Literal).unwrap();
        assert!(r <= 1e-8);
    }

    #[test]
    fn invalid_c_rejected() {
        let g = ComplexMatrix::identity(2);
        let w = RealMatrix::identity(2);
        for c in [0.0, -1.0, f64::NAN] {
            assert!(matches!(
                hermitian_solve_regularized(&g, &w, c, RidgeMode::Auto),
                Err(Error::Argument(_))
            ));
        }
    }
}

//! Real ridge closed forms, primal `(GᵀG + I/C)⁻¹GᵀW` and dual
//! `Gᵀ(GGᵀ + I/C)⁻¹W`.

use crate::error::{argument, Error, Result};
use crate::matrix::{RealLu, RealMatrix};

pub use crate::matrix::RidgeMode;

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return argument(format!("regularisation C must be positive and finite, got {c}"));
    }
    Ok(())
}

fn add_diagonal(m: &RealMatrix, shift: f64) -> RealMatrix {
    let mut out = m.clone();
    let n = out.rows();
    let data = out.data_mut();
    for i in 0..n {
        data[i * n + i] += shift;
    }
    out
}

/// Gram matrix of one real design, reusable across `C` values.
#[derive(Debug, Clone)]
pub struct RealRidge {
    mode: RidgeMode,
    g: RealMatrix,
    gram: RealMatrix,
    rhs: RealMatrix,
}

impl RealRidge {
    pub fn new(g: &RealMatrix, w: &RealMatrix, mode: RidgeMode) -> Result<Self> {
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
        let mode = mode.resolve(g.rows(), g.cols());
        let (gram, rhs) = match mode {
            RidgeMode::Dual => (g.matmul_t(g)?, w.clone()),
            _ => (g.t_matmul(g)?, g.t_matmul(w)?),
        };
        Ok(Self {
            mode,
            g: g.clone(),
            gram,
            rhs,
        })
    }

    pub fn mode(&self) -> RidgeMode {
        self.mode
    }

    pub fn solve(&self, c: f64) -> Result<RealMatrix> {
        check_c(c)?;
        let x = RealLu::factor(&add_diagonal(&self.gram, 1.0 / c))?.solve(&self.rhs)?;
        let eta = match self.mode {
            RidgeMode::Dual => self.g.t_matmul(&x)?,
            _ => x,
        };
        if !eta.is_finite() {
            return Err(Error::Numeric("ridge solution is not finite".into()));
        }
        Ok(eta)
    }
}

pub fn real_ridge(g: &RealMatrix, w: &RealMatrix, c: f64, mode: RidgeMode) -> Result<RealMatrix> {
    check_c(c)?;
    RealRidge::new(g, w, mode)?.solve(c)
}

/// Max-norm of `(GᵀG + I/C)η − GᵀW` over `max(1, ‖GᵀW‖_max)`.
pub fn real_normal_residual(g: &RealMatrix, w: &RealMatrix, c: f64, eta: &RealMatrix) -> Result<f64> {
    check_c(c)?;
    let lhs = add_diagonal(&g.t_matmul(g)?, 1.0 / c).matmul(eta)?;
    let rhs = g.t_matmul(w)?;
    let resid = lhs
        .as_slice()
        .iter()
        .zip(rhs.as_slice())
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(resid / rhs.max_abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{uniform_matrix, Rng};

    fn rel_diff(a: &RealMatrix, b: &RealMatrix) -> f64 {
        let scale = a.max_abs().max(b.max_abs()).max(1e-300);
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
            / scale
    }

    #[test]
    fn ridge_limit() {
        let i = RealMatrix::identity(2);
        let eta = real_ridge(&i, &i, 1e12, RidgeMode::Auto).unwrap();
        assert!(rel_diff(&eta, &i) < 1e-6);
    }

    #[test]
    fn primal_dual_agree() {
        let mut rng = Rng::new(30);
        let g = uniform_matrix(&mut rng, 4, 7, -1.0, 1.0).unwrap();
        let w = uniform_matrix(&mut rng, 4, 2, 0.0, 1.0).unwrap();
        let p = real_ridge(&g, &w, 2.0, RidgeMode::Primal).unwrap();
        let d = real_ridge(&g, &w, 2.0, RidgeMode::Dual).unwrap();
        assert!(rel_diff(&p, &d) < 1e-8);
    }

    #[test]
    fn strong_regularisation_shrinks() {
        let mut rng = Rng::new(31);
        let g = uniform_matrix(&mut rng, 10, 4, -1.0, 1.0).unwrap();
        let w = uniform_matrix(&mut rng, 10, 2, 0.0, 1.0).unwrap();
        let small = real_ridge(&g, &w, 1e-5, RidgeMode::Auto).unwrap();
        let large = real_ridge(&g, &w, 1e5, RidgeMode::Auto).unwrap();
        assert!(small.max_abs() < large.max_abs());
    }

    #[test]
    fn auto_picks_dual_for_wide() {
        let mut rng = Rng::new(32);
        let g = uniform_matrix(&mut rng, 3, 5, -1.0, 1.0).unwrap();
        let w = RealMatrix::zeros(3, 1);
        assert_eq!(RealRidge::new(&g, &w, RidgeMode::Auto).unwrap().mode(), RidgeMode::Dual);
        let g = uniform_matrix(&mut rng, 5, 5, -1.0, 1.0).unwrap();
        let w = RealMatrix::zeros(5, 1);
        assert_eq!(RealRidge::new(&g, &w, RidgeMode::Auto).unwrap().mode(), RidgeMode::Primal);
    }

    #[test]
    fn certificate_and_errors() {
        let mut rng = Rng::new(33);
        let g = uniform_matrix(&mut rng, 8, 3, -1.0, 1.0).unwrap();
        let w = uniform_matrix(&mut rng, 8, 2, 0.0, 1.0).unwrap();
        let eta = real_ridge(&g, &w, 5.0, RidgeMode::Auto).unwrap();
        assert!(real_normal_residual(&g, &w, 5.0, &eta).unwrap() <= 1e-8);
        assert!(matches!(real_ridge(&g, &w, 0.0, RidgeMode::Auto), Err(Error::Argument(_))));
        let w_bad = RealMatrix::zeros(7, 2);
        assert!(real_ridge(&g, &w_bad, 1.0, RidgeMode::Auto).is_err());
    }
}

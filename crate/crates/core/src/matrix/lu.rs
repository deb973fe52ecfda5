//! LU factorisation with partial (row) pivoting for real and complex square
//! systems.

use num_complex::Complex64;

use super::{ComplexMatrix, RealMatrix};
use crate::error::{argument, Error, Result};

#[derive(Debug, Clone)]
pub struct RealLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl RealLu {
    pub fn factor(a: &RealMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return argument(format!("LU needs a square matrix, got {}x{}", n, a.cols()));
        }
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in k + 1..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Numeric(format!("singular matrix at pivot {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            let (top, bottom) = lu.split_at_mut((k + 1) * n);
            let row_k = &top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let row_i = &mut bottom[i * n..(i + 1) * n];
                let l = row_i[k] / pivot;
                row_i[k] = l;
                for (x, &y) in row_i[k + 1..].iter_mut().zip(row_k) {
                    *x -= l * y;
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    pub fn solve(&self, b: &RealMatrix) -> Result<RealMatrix> {
        let n = self.n;
        if b.rows() != n {
            return argument(format!("rhs has {} rows, system has {n}", b.rows()));
        }
        let m = b.cols();
        let mut x = vec![0.0; n * m];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * m..(i + 1) * m].copy_from_slice(b.row(p));
        }
        for i in 0..n {
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l != 0.0 {
                    for c in 0..m {
                        x[i * m + c] -= l * x[k * m + c];
                    }
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                for c in 0..m {
                    x[i * m + c] -= u * x[k * m + c];
                }
            }
            let d = self.lu[i * n + i];
            for c in 0..m {
                x[i * m + c] /= d;
            }
        }
        RealMatrix::from_vec(n, m, x)
    }
}

/// Complex LU on split real/imaginary planes.
#[derive(Debug, Clone)]
pub struct ComplexLu {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
    perm: Vec<usize>,
}

impl ComplexLu {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return argument(format!("LU needs a square matrix, got {}x{}", n, a.cols()));
        }
        let mut re: Vec<f64> = a.as_slice().iter().map(|z| z.re).collect();
        let mut im: Vec<f64> = a.as_slice().iter().map(|z| z.im).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = re[k * n + k].hypot(im[k * n + k]);
            for i in k + 1..n {
                let v = re[i * n + k].hypot(im[i * n + k]);
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best > 0.0) || !best.is_finite() {
                return Err(Error::Numeric(format!("singular matrix at pivot {k}")));
            }
            if p != k {
                for j in 0..n {
                    re.swap(k * n + j, p * n + j);
                    im.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = Complex64::new(re[k * n + k], im[k * n + k]);
            let (re_top, re_bot) = re.split_at_mut((k + 1) * n);
            let (im_top, im_bot) = im.split_at_mut((k + 1) * n);
            let rk_re = &re_top[k * n + k + 1..k * n + n];
            let rk_im = &im_top[k * n + k + 1..k * n + n];
            for i in 0..n - k - 1 {
                let ri_re = &mut re_bot[i * n..(i + 1) * n];
                let ri_im = &mut im_bot[i * n..(i + 1) * n];
                let l = Complex64::new(ri_re[k], ri_im[k]) / pivot;
                ri_re[k] = l.re;
                ri_im[k] = l.im;
                let (lr, li) = (l.re, l.im);
                for (((xr, xi), &yr), &yi) in ri_re[k + 1..]
                    .iter_mut()
                    .zip(ri_im[k + 1..].iter_mut())
                    .zip(rk_re)
                    .zip(rk_im)
                {
                    *xr -= lr * yr - li * yi;
                    *xi -= lr * yi + li * yr;
                }
            }
        }
        Ok(Self { n, re, im, perm })
    }

    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.n;
        if b.rows() != n {
            return argument(format!("rhs has {} rows, system has {n}", b.rows()));
        }
        let m = b.cols();
        let mut x = vec![Complex64::new(0.0, 0.0); n * m];
        for (i, &p) in self.perm.iter().enumerate() {
            x[i * m..(i + 1) * m].copy_from_slice(b.row(p));
        }
        let at = |i: usize, j: usize| Complex64::new(self.re[i * n + j], self.im[i * n + j]);
        for i in 0..n {
            for k in 0..i {
                let l = at(i, k);
                for c in 0..m {
                    let v = x[k * m + c];
                    x[i * m + c] -= l * v;
                }
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = at(i, k);
                for c in 0..m {
                    let v = x[k * m + c];
                    x[i * m + c] -= u * v;
                }
            }
            let d = at(i, i);
            for c in 0..m {
                x[i * m + c] /= d;
            }
        }
        ComplexMatrix::from_vec(n, m, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{complex_matmul, uniform_matrix, Rng};

    #[test]
    fn real_solve_recovers_rhs() {
        let mut rng = Rng::new(1);
        let a = uniform_matrix(&mut rng, 6, 6, -1.0, 1.0).unwrap();
        let b = uniform_matrix(&mut rng, 6, 2, -1.0, 1.0).unwrap();
        let x = RealLu::factor(&a).unwrap().solve(&b).unwrap();
        let ax = a.matmul(&x).unwrap();
        for (u, v) in ax.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).abs() < 1e-10);
        }
    }

    #[test]
    fn complex_solve_recovers_rhs() {
        let mut rng = Rng::new(2);
        let a = ComplexMatrix::from_parts(
            &uniform_matrix(&mut rng, 5, 5, -1.0, 1.0).unwrap(),
            &uniform_matrix(&mut rng, 5, 5, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let b = ComplexMatrix::from_parts(
            &uniform_matrix(&mut rng, 5, 3, -1.0, 1.0).unwrap(),
            &uniform_matrix(&mut rng, 5, 3, -1.0, 1.0).unwrap(),
        )
        .unwrap();
        let x = ComplexLu::factor(&a).unwrap().solve(&b).unwrap();
        let ax = complex_matmul(&a, &x).unwrap();
        for (u, v) in ax.as_slice().iter().zip(b.as_slice()) {
            assert!((u - v).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_is_numeric_error() {
        let a = RealMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(RealLu::factor(&a), Err(Error::Numeric(_))));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = RealMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
        let b = RealMatrix::from_rows(&[[2.0], [3.0]]).unwrap();
        let x = RealLu::factor(&a).unwrap().solve(&b).unwrap();
        assert_eq!(x.as_slice(), &[3.0, 2.0]);
    }
}

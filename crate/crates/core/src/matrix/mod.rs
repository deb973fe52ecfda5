//! Dense row-major real and complex matrices.
//!
//! Products go through `matrixmultiply::dgemm`. Complex products are assembled
//! from four real products on the split real/imaginary planes, so a complex
//! matrix whose imaginary plane is zero multiplies bit-for-bit like its real
//! counterpart.

mod lu;
mod ridge;
mod rng;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{argument, Error, Result};

pub use lu::{ComplexLu, RealLu};
pub use ridge::{
    complex_normal_residual, hermitian_solve_regularized, hermitian_solve_with, ComplexRidge,
    RidgeMode, TransposeKind,
};
pub use rng::{uniform_matrix, Rng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawReal")]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct RawReal {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawReal> for RealMatrix {
    type Error = Error;

    fn try_from(raw: RawReal) -> Result<Self> {
        RealMatrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl RealMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return argument(format!(
                "data length {} does not match shape {rows}x{cols}",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return argument(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    pub(crate) fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hstack(&self, other: &RealMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return argument(format!(
                "hstack row mismatch: {} vs {}",
                self.rows, other.rows
            ));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn matmul(&self, other: &RealMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return argument(format!(
                "matmul shape mismatch: {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        gemm(self.view(), other.view(), 1.0, 0.0, &mut out);
        Ok(out)
    }

    /// `selfᵀ · other` without materialising the transpose.
    pub fn t_matmul(&self, other: &RealMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return argument(format!(
                "t_matmul shape mismatch: ({}x{})ᵀ * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.cols, other.cols);
        gemm(self.view().t(), other.view(), 1.0, 0.0, &mut out);
        Ok(out)
    }

    /// `self · otherᵀ` without materialising the transpose.
    pub fn matmul_t(&self, other: &RealMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return argument(format!(
                "matmul_t shape mismatch: {}x{} * ({}x{})ᵀ",
                self.rows, self.cols, other.rows, other.cols
            ));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        gemm(self.view(), other.view().t(), 1.0, 0.0, &mut out);
        Ok(out)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    fn view(&self) -> View<'_> {
        View {
            rows: self.rows,
            cols: self.cols,
            rs: self.cols as isize,
            cs: 1,
            data: &self.data,
        }
    }
}

/// Strided read-only view used to feed `dgemm`.
#[derive(Clone, Copy)]
struct View<'a> {
    rows: usize,
    cols: usize,
    rs: isize,
    cs: isize,
    data: &'a [f64],
}

impl View<'_> {
    fn t(self) -> Self {
        Self {
            rows: self.cols,
            cols: self.rows,
            rs: self.cs,
            cs: self.rs,
            data: self.data,
        }
    }
}

/// `out = alpha * a * b + beta * out`.
fn gemm(a: View<'_>, b: View<'_>, alpha: f64, beta: f64, out: &mut RealMatrix) {
    debug_assert_eq!(a.cols, b.rows);
    debug_assert_eq!((a.rows, b.cols), (out.rows, out.cols));
    if out.data.is_empty() {
        return;
    }
    if a.cols == 0 {
        for v in &mut out.data {
            *v *= beta;
        }
        return;
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let rsc = out.cols as isize;
    // SAFETY: every view covers exactly rows*cols elements of its backing
    // slice with the given strides, and `out` is an exclusively borrowed
    // m x n row-major buffer.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            alpha,
            a.data.as_ptr(),
            a.rs,
            a.cs,
            b.data.as_ptr(),
            b.rs,
            b.cs,
            beta,
            out.data.as_mut_ptr(),
            rsc,
            1,
        );
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawComplex")]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

#[derive(Deserialize)]
struct RawComplex {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl TryFrom<RawComplex> for ComplexMatrix {
    type Error = Error;

    fn try_from(raw: RawComplex) -> Result<Self> {
        ComplexMatrix::from_vec(raw.rows, raw.cols, raw.data)
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return argument(format!(
                "data length {} does not match shape {rows}x{cols}",
                data.len()
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite entry at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows<R: AsRef<[Complex64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return argument(format!("row {i} has {} entries, expected {cols}", r.len()));
            }
            data.extend_from_slice(r);
        }
        Self::from_vec(rows.len(), cols, data)
    }

    /// Combines a real and an imaginary plane of equal shape.
    pub fn from_parts(re: &RealMatrix, im: &RealMatrix) -> Result<Self> {
        if re.shape() != im.shape() {
            return argument(format!(
                "real plane {:?} and imaginary plane {:?} differ in shape",
                re.shape(),
                im.shape()
            ));
        }
        Ok(Self {
            rows: re.rows,
            cols: re.cols,
            data: re
                .data
                .iter()
                .zip(&im.data)
                .map(|(&a, &b)| Complex64::new(a, b))
                .collect(),
        })
    }

    pub fn from_real(re: &RealMatrix) -> Self {
        Self {
            rows: re.rows,
            cols: re.cols,
            data: re.data.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn re(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.re).collect(),
        }
    }

    pub fn im(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.im).collect(),
        }
    }

    /// Elementwise magnitude `sqrt(re² + im²)`.
    pub fn magnitude(&self) -> RealMatrix {
        RealMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.norm()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Conjugate (Hermitian) transpose.
    pub fn adjoint(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).conj());
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    pub fn hstack(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.rows != other.rows {
            return argument(format!(
                "hstack row mismatch: {} vs {}",
                self.rows, other.rows
            ));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(Self {
            rows: self.rows,
            cols,
            data,
        })
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        complex_matmul(self, other)
    }
}

/// Complex matrix product `a · b`.
pub fn complex_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return argument(format!(
            "complex matmul shape mismatch: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let (ar, ai) = (a.re(), a.im());
    let (br, bi) = (b.re(), b.im());
    let mut re = RealMatrix::zeros(a.rows, b.cols);
    let mut im = RealMatrix::zeros(a.rows, b.cols);
    gemm(ar.view(), br.view(), 1.0, 0.0, &mut re);
    gemm(ai.view(), bi.view(), -1.0, 1.0, &mut re);
    gemm(ar.view(), bi.view(), 1.0, 0.0, &mut im);
    gemm(ai.view(), br.view(), 1.0, 1.0, &mut im);
    ComplexMatrix::from_parts(&re, &im)
}

/// Complex-by-real product `a · b`, used when a real target matrix meets a
/// complex design matrix.
pub fn complex_real_matmul(a: &ComplexMatrix, b: &RealMatrix) -> Result<ComplexMatrix> {
    if a.cols != b.rows {
        return argument(format!(
            "complex matmul shape mismatch: {}x{} * {}x{}",
            a.rows, a.cols, b.rows, b.cols
        ));
    }
    let re = a.re().matmul(b)?;
    let im = a.im().matmul(b)?;
    ComplexMatrix::from_parts(&re, &im)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(rng: &mut Rng, rows: usize, cols: usize) -> ComplexMatrix {
        let re = uniform_matrix(rng, rows, cols, -1.0, 1.0).unwrap();
        let im = uniform_matrix(rng, rows, cols, -1.0, 1.0).unwrap();
        ComplexMatrix::from_parts(&re, &im).unwrap()
    }

    fn naive(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<Complex64> {
        let mut out = vec![c(0.0, 0.0); a.rows() * b.cols()];
        for i in 0..a.rows() {
            for j in 0..b.cols() {
                let mut acc = c(0.0, 0.0);
                for t in 0..a.cols() {
                    let (x, y) = (a.get(i, t), b.get(t, j));
                    acc += c(x.re * y.re - x.im * y.im, x.re * y.im + x.im * y.re);
                }
                out[i * b.cols() + j] = acc;
            }
        }
        out
    }

    fn max_rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
        let scale = a.iter().chain(b).fold(1.0_f64, |m, z| m.max(z.norm()));
        a.iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).norm()))
            / scale
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = ComplexMatrix::from_rows(&[[c(0.0, 1.0)]]).unwrap();
        let p = complex_matmul(&i, &i).unwrap();
        assert_eq!(p.get(0, 0), c(-1.0, 0.0));
    }

    #[test]
    fn identity_is_neutral() {
        let mut rng = Rng::new(3);
        let a = random_complex(&mut rng, 3, 4);
        let p = complex_matmul(&a, &ComplexMatrix::identity(4)).unwrap();
        assert_eq!(p, a);
    }

    #[test]
    fn matches_triple_loop() {
        let mut rng = Rng::new(11);
        let a = random_complex(&mut rng, 3, 4);
        let b = random_complex(&mut rng, 4, 2);
        let p = complex_matmul(&a, &b).unwrap();
        assert!(max_rel_diff(p.as_slice(), &naive(&a, &b)) < 1e-14);
    }

    #[test]
    fn shape_mismatch_is_argument_error() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(complex_matmul(&a, &b), Err(Error::Argument(_))));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(matches!(
            RealMatrix::from_vec(1, 2, vec![1.0, f64::NAN]),
            Err(Error::Numeric(_))
        ));
        assert!(matches!(
            RealMatrix::from_vec(1, 2, vec![1.0]),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn transposed_products_agree_with_explicit_transpose() {
        let mut rng = Rng::new(5);
        let a = uniform_matrix(&mut rng, 5, 3, -1.0, 1.0).unwrap();
        let b = uniform_matrix(&mut rng, 5, 4, -1.0, 1.0).unwrap();
        let direct = a.t_matmul(&b).unwrap();
        let explicit = a.transpose().matmul(&b).unwrap();
        for (x, y) in direct.as_slice().iter().zip(explicit.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
        let c2 = b.transpose();
        let direct = a.transpose().matmul_t(&c2).unwrap();
        for (x, y) in direct.as_slice().iter().zip(explicit.as_slice()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_imaginary_product_matches_real_product_bitwise() {
        let mut rng = Rng::new(8);
        let a = uniform_matrix(&mut rng, 7, 5, -1.0, 1.0).unwrap();
        let b = uniform_matrix(&mut rng, 5, 6, -1.0, 1.0).unwrap();
        let real = a.matmul(&b).unwrap();
        let cplx = complex_matmul(&ComplexMatrix::from_real(&a), &ComplexMatrix::from_real(&b))
            .unwrap();
        assert_eq!(cplx.re(), real);
        assert!(cplx.im().as_slice().iter().all(|&v| v == 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn associative_and_distributive(seed in any::<u64>(), m in 1usize..5, n in 1usize..5, p in 1usize..5, q in 1usize..5) {
                let mut rng = crate::matrix::Rng::new(seed);
                let a = random_complex(&mut rng, m, n);
                let b = random_complex(&mut rng, n, p);
                let b2 = random_complex(&mut rng, n, p);
                let cm = random_complex(&mut rng, p, q);
                let left = complex_matmul(&complex_matmul(&a, &b).unwrap(), &cm).unwrap();
                let right = complex_matmul(&a, &complex_matmul(&b, &cm).unwrap()).unwrap();
                prop_assert!(max_rel_diff(left.as_slice(), right.as_slice()) < 1e-10);

                let sum: Vec<Complex64> = b.as_slice().iter().zip(b2.as_slice()).map(|(x, y)| x + y).collect();
                let bsum = ComplexMatrix::from_vec(n, p, sum).unwrap();
                let lhs = complex_matmul(&a, &bsum).unwrap();
                let r1 = complex_matmul(&a, &b).unwrap();
                let r2 = complex_matmul(&a, &b2).unwrap();
                let rhs: Vec<Complex64> = r1.as_slice().iter().zip(r2.as_slice()).map(|(x, y)| x + y).collect();
                prop_assert!(max_rel_diff(lhs.as_slice(), &rhs) < 1e-10);
            }
        }
    }
}

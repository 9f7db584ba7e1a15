use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix stored row-major: entry `(r, c)` lives at
/// `data[r * cols + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting empty shapes,
    /// length mismatches and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries", rows * cols),
                actual: format!("{} entries", data.len()),
            });
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                pos / cols,
                pos % cols
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Internal constructor for data already known to be well formed.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        debug_assert!(rows > 0 && cols > 0 && data.len() == rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self::from_raw(rows, cols, vec![Complex64::new(0.0, 0.0); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(columns: &[Vec<Complex64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != rows) {
            return Err(Error::invalid("columns of unequal length"));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend(columns.iter().map(|c| c[r]));
        }
        Self::new(rows, cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Complex64> {
        (0..self.rows).map(|r| self.data[r * self.cols + c]).collect()
    }

    pub fn hermitian(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                data.push(self.data[r * self.cols + c].conj());
            }
        }
        Self::from_raw(self.cols, self.rows, data)
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("{} rows on the right operand", self.cols),
                actual: format!("{}", other.rows),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows * other.cols];
        for r in 0..self.rows {
            let out_row = &mut out[r * other.cols..(r + 1) * other.cols];
            for (k, &a) in self.row(r).iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (o, &b) in out_row.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(self.rows, other.cols, out))
    }

    /// `self · v`.
    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                expected: format!("vector of length {}", self.cols),
                actual: format!("{}", v.len()),
            });
        }
        Ok((0..self.rows)
            .map(|r| self.row(r).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `self^H · v` without materializing the Hermitian transpose.
    pub fn hermitian_mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.rows {
            return Err(Error::ShapeMismatch {
                expected: format!("vector of length {}", self.rows),
                actual: format!("{}", v.len()),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.cols];
        for (r, &vr) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(r)) {
                *o += a.conj() * vr;
            }
        }
        Ok(out)
    }

    /// `self^H · self`, exactly Hermitian.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let mut g = Self::zeros(n, n);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..n {
                let ai = row[i].conj();
                for j in i..n {
                    g.data[i * n + j] += ai * row[j];
                }
            }
        }
        for i in 0..n {
            g.data[i * n + i].im = 0.0;
            for j in 0..i {
                g.data[i * n + j] = g.data[j * n + i].conj();
            }
        }
        g
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * s).collect())
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(
        &self,
        other: &ComplexMatrix,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", self.rows, self.cols),
                actual: format!("{}x{}", other.rows, other.cols),
            });
        }
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        ))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise modulus of `self - other` (infinity on shape mismatch).
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(ComplexMatrix::new(0, 2, vec![]).is_err());
        assert!(ComplexMatrix::new(2, 2, vec![c(1.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::new(1, 2, vec![c(1.0, 0.0), c(f64::NAN, 0.0)]).is_err());
        assert!(ComplexMatrix::new(1, 1, vec![c(f64::INFINITY, 0.0)]).is_err());
    }

    #[test]
    fn hermitian_of_identity_and_scalar() {
        assert_eq!(ComplexMatrix::identity(3).hermitian(), ComplexMatrix::identity(3));
        let j = ComplexMatrix::new(1, 1, vec![c(0.0, 1.0)]).unwrap();
        assert_eq!(j.hermitian()[(0, 0)], c(0.0, -1.0));
    }

    #[test]
    fn hermitian_is_an_involution() {
        let m = ComplexMatrix::from_fn(4, 2, |r, k| c(r as f64 - 1.5, 0.3 * k as f64 + r as f64));
        let h = m.hermitian();
        assert_eq!(h.shape(), (2, 4));
        assert_eq!(h[(1, 3)], m[(3, 1)].conj());
        assert_eq!(h.hermitian(), m);
    }

    #[test]
    fn matmul_and_vector_products_agree() {
        let a = ComplexMatrix::from_fn(3, 2, |r, k| c(r as f64, k as f64 + 1.0));
        let v = vec![c(1.0, -1.0), c(0.5, 2.0)];
        let col = ComplexMatrix::from_columns(&[v.clone()]).unwrap();
        let prod = a.matmul(&col).unwrap();
        let mv = a.mul_vec(&v).unwrap();
        for r in 0..3 {
            assert!((prod[(r, 0)] - mv[r]).norm() < 1e-15);
        }
        let w = vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5)];
        let hv = a.hermitian_mul_vec(&w).unwrap();
        let expected = a.hermitian().mul_vec(&w).unwrap();
        for k in 0..2 {
            assert!((hv[k] - expected[k]).norm() < 1e-14);
        }
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn gram_matches_explicit_product() {
        let a = ComplexMatrix::from_fn(5, 3, |r, k| c((r * 3 + k) as f64 * 0.1, r as f64 - k as f64));
        let g = a.gram();
        let explicit = a.hermitian().matmul(&a).unwrap();
        assert!(g.max_abs_diff(&explicit) < 1e-12);
        assert_eq!(g, g.hermitian());
    }

    #[test]
    fn from_columns_layout() {
        let m = ComplexMatrix::from_columns(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(3.0, 0.0), c(4.0, 0.0)]]).unwrap();
        assert_eq!(m[(0, 1)], c(3.0, 0.0));
        assert_eq!(m[(1, 0)], c(2.0, 0.0));
        assert_eq!(m.column(1), vec![c(3.0, 0.0), c(4.0, 0.0)]);
    }
}

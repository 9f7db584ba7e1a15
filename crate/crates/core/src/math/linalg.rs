use num_complex::Complex64;

use super::matrix::ComplexMatrix;
use crate::error::{Error, Result};

/// Pivots smaller than this fraction of the largest pivot mark the matrix
/// as singular.
const RELATIVE_PIVOT_TOLERANCE: f64 = 1e-12;

/// Householder diagonal entries smaller than this fraction of the largest
/// one mark the matrix as column-rank deficient.
const RELATIVE_RANK_TOLERANCE: f64 = 1e-10;

/// LU factorization with partial (row) pivoting, `P·A = L·U`.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    n: usize,
    // L (unit diagonal, strictly lower part) and U packed together, row-major.
    lu: Vec<Complex64>,
    perm: Vec<usize>,
}

impl LuDecomposition {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::ShapeMismatch {
                expected: "square matrix".into(),
                actual: format!("{}x{}", a.rows(), a.cols()),
            });
        }
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut max_pivot = 0.0f64;
        let mut min_pivot = f64::INFINITY;

        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|r| (r, lu[r * n + k].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmag == 0.0 {
                return Err(Error::Singular { dimension: n });
            }
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            max_pivot = max_pivot.max(pmag);
            min_pivot = min_pivot.min(pmag);

            let pivot = lu[k * n + k];
            for r in (k + 1)..n {
                let factor = lu[r * n + k] / pivot;
                lu[r * n + k] = factor;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let (upper, lower) = lu.split_at_mut(r * n);
                let pivot_row = &upper[k * n + k + 1..k * n + n];
                for (dst, &src) in lower[k + 1..n].iter_mut().zip(pivot_row) {
                    *dst -= factor * src;
                }
            }
        }
        if min_pivot < RELATIVE_PIVOT_TOLERANCE * max_pivot {
            return Err(Error::Singular { dimension: n });
        }
        Ok(Self { n, lu, perm })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    /// Solves `A·X = B` for every column of `b`.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.n;
        if b.rows() != n {
            return Err(Error::ShapeMismatch {
                expected: format!("{n} rows"),
                actual: format!("{}", b.rows()),
            });
        }
        let m = b.cols();
        let mut x: Vec<Complex64> = Vec::with_capacity(n * m);
        for &p in &self.perm {
            x.extend_from_slice(b.row(p));
        }
        // forward substitution with unit-diagonal L
        for r in 1..n {
            let (done, rest) = x.split_at_mut(r * m);
            let row = &mut rest[..m];
            for k in 0..r {
                let l = self.lu[r * n + k];
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for (dst, &src) in row.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                    *dst -= l * src;
                }
            }
        }
        // back substitution with U
        for r in (0..n).rev() {
            let (head, tail) = x.split_at_mut((r + 1) * m);
            let row = &mut head[r * m..];
            for k in (r + 1)..n {
                let u = self.lu[r * n + k];
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let src_row = &tail[(k - r - 1) * m..(k - r) * m];
                for (dst, &src) in row.iter_mut().zip(src_row) {
                    *dst -= u * src;
                }
            }
            let inv = 1.0 / self.lu[r * n + r];
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        Ok(ComplexMatrix::from_raw(n, m, x))
    }
}

/// Solves `a·X = b` by partial-pivoted LU.
pub fn solve_linear(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    LuDecomposition::factor(a)?.solve(b)
}

/// Solves `(g + λI)·X = b` with `λ = 1e-6 · trace(g) / dim` when `loading`
/// is set, plain `g·X = b` otherwise.
pub fn solve_hermitian_loaded(g: &ComplexMatrix, b: &ComplexMatrix, loading: bool) -> Result<ComplexMatrix> {
    if !loading {
        return solve_linear(g, b);
    }
    let n = g.rows();
    let trace: f64 = (0..n).map(|i| g[(i, i)].re).sum();
    let lambda = 1e-6 * trace / n as f64;
    let mut loaded = g.clone();
    for i in 0..n {
        loaded[(i, i)] += lambda;
    }
    solve_linear(&loaded, b)
}

/// Moore–Penrose pseudoinverse `(MᴴM)⁻¹Mᴴ` of a tall, full-column-rank
/// matrix, computed through a Householder QR of `m` (never forming the Gram).
pub fn pseudoinverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(Error::RankDeficient { rows, cols });
    }
    // Column-major working copy: column j at a[j*rows..(j+1)*rows].
    let mut a: Vec<Complex64> = (0..cols).flat_map(|j| m.column(j)).collect();
    let mut reflectors: Vec<Vec<Complex64>> = Vec::with_capacity(cols);
    let mut diag = Vec::with_capacity(cols);

    for k in 0..cols {
        let x = &a[k * rows + k..(k + 1) * rows];
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::RankDeficient { rows, cols });
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = x.to_vec();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm > 0.0 {
            for z in &mut v {
                *z /= vnorm;
            }
            for j in k..cols {
                let col = &mut a[j * rows + k..(j + 1) * rows];
                let s: Complex64 = v.iter().zip(col.iter()).map(|(vi, ci)| vi.conj() * ci).sum();
                for (ci, vi) in col.iter_mut().zip(&v) {
                    *ci -= 2.0 * vi * s;
                }
            }
        }
        diag.push(a[k * rows + k]);
        reflectors.push(v);
    }

    let largest = diag.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if diag.iter().any(|z| z.norm() <= RELATIVE_RANK_TOLERANCE * largest) {
        return Err(Error::RankDeficient { rows, cols });
    }

    // First `cols` rows of Qᴴ = H_n ··· H_1, built row by row as eᵢᵀ·H_n···H_1.
    let mut qh: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); cols * rows];
    for i in 0..cols {
        let row = &mut qh[i * rows..(i + 1) * rows];
        row[i] = Complex64::new(1.0, 0.0);
        for k in (0..cols).rev() {
            let v = &reflectors[k];
            let seg = &mut row[k..];
            let s: Complex64 = seg.iter().zip(v).map(|(r, vi)| r * vi).sum();
            for (r, vi) in seg.iter_mut().zip(v) {
                *r -= 2.0 * s * vi.conj();
            }
        }
    }

    // Back-substitute R·X = Qᴴ[0..cols, :].
    let r_at = |i: usize, j: usize| a[j * rows + i];
    let mut x = qh;
    for i in (0..cols).rev() {
        for k in (i + 1)..cols {
            let rik = r_at(i, k);
            let (head, tail) = x.split_at_mut(k * rows);
            let src = &tail[..rows];
            for (dst, &s) in head[i * rows..(i + 1) * rows].iter_mut().zip(src) {
                *dst -= rik * s;
            }
        }
        let inv = 1.0 / r_at(i, i);
        for v in &mut x[i * rows..(i + 1) * rows] {
            *v *= inv;
        }
    }
    Ok(ComplexMatrix::from_raw(cols, rows, x))
}

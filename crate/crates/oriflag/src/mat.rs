//! Small dense matrices over a generic scalar, with the f64 helpers used by
//! the numeric flag operations. Exact arithmetic runs over `BigRational`.

use crate::weyl::SignedPermutation;
use crate::{Error, Result};
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

/// Field-like scalar for elimination. `EXACT` types compare to zero exactly;
/// floating types use an epsilon against `magnitude`.
pub trait Scalar:
    Clone
    + PartialEq
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    const EXACT: bool;
    fn magnitude(&self) -> f64;
    fn from_int(v: i64) -> Self;
    fn is_positive_value(&self) -> bool;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn magnitude(&self) -> f64 {
        self.abs()
    }

    fn from_int(v: i64) -> Self {
        v as f64
    }

    fn is_positive_value(&self) -> bool {
        *self > 0.0
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.to_f64().map(f64::abs).unwrap_or(1.0)
        }
    }

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(v.into())
    }

    fn is_positive_value(&self) -> bool {
        self.is_positive()
    }
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Parse("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// The matrix of a signed permutation.
    pub fn from_signed_permutation(w: &SignedPermutation) -> Self {
        let n = w.rank();
        let mut m = Self::zeros(n, n);
        for (j, (&r, &s)) in w.perm().iter().zip(w.signs()).enumerate() {
            m[(r, j)] = T::from_int(s as i64);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)].clone();
                if a == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    /// Columns of `self` followed by columns of `other`.
    pub fn concat_cols(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Mat<U> {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Mat<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl Mat<f64> {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    }

    /// Determinant by LU with partial pivoting.
    pub fn det(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut det = 1.0;
        for j in 0..n {
            let pivot = (j..n)
                .max_by(|&p, &q| a[(p, j)].abs().total_cmp(&a[(q, j)].abs()))
                .unwrap();
            if a[(pivot, j)] == 0.0 {
                return 0.0;
            }
            if pivot != j {
                for k in 0..n {
                    let tmp = a[(j, k)];
                    a[(j, k)] = a[(pivot, k)];
                    a[(pivot, k)] = tmp;
                }
                det = -det;
            }
            det *= a[(j, j)];
            for i in j + 1..n {
                let factor = a[(i, j)] / a[(j, j)];
                for k in j..n {
                    let s = a[(j, k)];
                    a[(i, k)] -= factor * s;
                }
            }
        }
        det
    }

    /// Modified Gram-Schmidt. Returns Q with orthonormal columns such that
    /// self = Q·R with R upper triangular and positive diagonal, or an error
    /// when a column loses all but a relative `eps` of its norm to the
    /// projections, i.e. is numerically dependent.
    pub fn orthonormalize(&self, eps: f64) -> Result<Mat<f64>> {
        let (n, k) = (self.rows, self.cols);
        let mut q = self.clone();
        for j in 0..k {
            let original: f64 = (0..n).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
            for prev in 0..j {
                let dot: f64 = (0..n).map(|i| q[(i, prev)] * q[(i, j)]).sum();
                for i in 0..n {
                    let s = q[(i, prev)];
                    q[(i, j)] -= dot * s;
                }
            }
            let norm: f64 = (0..n).map(|i| q[(i, j)] * q[(i, j)]).sum::<f64>().sqrt();
            if norm <= eps * original {
                return Err(Error::Degenerate(format!(
                    "column {j} is linearly dependent"
                )));
            }
            for i in 0..n {
                q[(i, j)] /= norm;
            }
        }
        Ok(q)
    }

    /// Rank relative to `eps`, by Gram-Schmidt column sweeps.
    pub fn rank(&self, eps: f64) -> usize {
        let (n, k) = (self.rows, self.cols);
        let mut basis: Vec<Vec<f64>> = Vec::new();
        let scale = self.max_abs().max(1.0);
        for j in 0..k {
            let mut v = self.col(j);
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= dot * y;
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > eps * scale {
                for x in v.iter_mut() {
                    *x /= norm;
                }
                basis.push(v);
            }
            if basis.len() == n {
                break;
            }
        }
        basis.len()
    }

    /// Inverse by Gauss-Jordan with partial pivoting.
    pub fn inverse(&self, eps: f64) -> Result<Mat<f64>> {
        assert!(self.is_square());
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Mat::<f64>::identity(n);
        let scale = self.max_abs().max(1.0);
        for j in 0..n {
            let pivot = (j..n)
                .max_by(|&p, &q| a[(p, j)].abs().total_cmp(&a[(q, j)].abs()))
                .unwrap();
            if a[(pivot, j)].abs() <= eps * scale {
                return Err(Error::Degenerate("matrix is singular".into()));
            }
            if pivot != j {
                for k in 0..n {
                    let (x, y) = (a[(j, k)], a[(pivot, k)]);
                    a[(j, k)] = y;
                    a[(pivot, k)] = x;
                    let (x, y) = (inv[(j, k)], inv[(pivot, k)]);
                    inv[(j, k)] = y;
                    inv[(pivot, k)] = x;
                }
            }
            let d = a[(j, j)];
            for k in 0..n {
                a[(j, k)] /= d;
                inv[(j, k)] /= d;
            }
            for i in 0..n {
                if i != j && a[(i, j)] != 0.0 {
                    let factor = a[(i, j)];
                    for k in 0..n {
                        let s = a[(j, k)];
                        a[(i, k)] -= factor * s;
                        let s = inv[(j, k)];
                        inv[(i, k)] -= factor * s;
                    }
                }
            }
        }
        Ok(inv)
    }

    /// An orthonormal basis of the kernel, as columns.
    pub fn kernel(&self, eps: f64) -> Mat<f64> {
        // Row-reduce a copy, tracking pivot columns.
        let (m, k) = (self.rows, self.cols);
        let mut a = self.clone();
        let scale = self.max_abs().max(1.0);
        let mut pivot_cols: Vec<usize> = Vec::new();
        let mut row = 0usize;
        for col in 0..k {
            let pivot = (row..m).max_by(|&p, &q| a[(p, col)].abs().total_cmp(&a[(q, col)].abs()));
            let Some(p) = pivot else { break };
            if a[(p, col)].abs() <= eps * scale {
                continue;
            }
            if p != row {
                for c in 0..k {
                    let tmp = a[(row, c)];
                    a[(row, c)] = a[(p, c)];
                    a[(p, c)] = tmp;
                }
            }
            let inv = 1.0 / a[(row, col)];
            for c in 0..k {
                a[(row, c)] *= inv;
            }
            for r in 0..m {
                if r != row && a[(r, col)] != 0.0 {
                    let factor = a[(r, col)];
                    for c in 0..k {
                        let s = a[(row, c)];
                        a[(r, c)] -= factor * s;
                    }
                }
            }
            pivot_cols.push(col);
            row += 1;
            if row == m {
                break;
            }
        }
        let free_cols: Vec<usize> = (0..k).filter(|c| !pivot_cols.contains(c)).collect();
        let mut out = Mat::zeros(k, free_cols.len());
        for (idx, &fc) in free_cols.iter().enumerate() {
            out[(fc, idx)] = 1.0;
            for (r, &pc) in pivot_cols.iter().enumerate() {
                out[(pc, idx)] = -a[(r, fc)];
            }
        }
        out
    }
}

impl Mat<BigRational> {
    pub fn to_f64(&self) -> Mat<f64> {
        self.map(|x| x.to_f64().expect("rational fits in f64"))
    }
}

/// Converts an integer matrix to rationals.
pub fn mat_q_from_i64(rows: Vec<Vec<i64>>) -> Result<Mat<BigRational>> {
    Mat::from_rows(
        rows.into_iter()
            .map(|r| r.into_iter().map(BigRational::from_int).collect())
            .collect(),
    )
}

//! Numeric oriented flags, the signed Bruhat factorization, relative
//! positions of concrete flags, and oriented sums and intersections of
//! oriented subspaces.

use crate::bruhat::PositionSpace;
use crate::mat::{Mat, Scalar};
use crate::weyl::SignedPermutation;
use crate::{Error, Result};

pub const DEFAULT_EPS: f64 = 1e-9;

/// A complete oriented flag, stored as a rotation matrix: column j spans the
/// j-th oriented line, leading column spans give all oriented parts.
#[derive(Debug, Clone)]
pub struct OrientedFlag {
    rep: Mat<f64>,
}

impl OrientedFlag {
    pub fn identity(n: usize) -> Self {
        Self {
            rep: Mat::identity(n),
        }
    }

    pub fn rep(&self) -> &Mat<f64> {
        &self.rep
    }

    pub fn n(&self) -> usize {
        self.rep.rows()
    }

    pub fn dist(&self, other: &Self) -> f64 {
        self.rep.max_abs_diff(&other.rep)
    }

    /// Left translate g·F, re-canonicalized.
    pub fn translate(&self, g: &Mat<f64>, eps: f64) -> Result<Self> {
        canonicalize(&g.mul(&self.rep), eps)
    }

    /// Right multiplication by a signed permutation (an orientation twist).
    pub fn twist(&self, m: &SignedPermutation) -> Self {
        Self {
            rep: self.rep.mul(&Mat::from_signed_permutation(m)),
        }
    }
}

/// Canonical flag representative of a positive-determinant matrix: the Q of
/// the unique decomposition g = Q·u with Q a rotation and u upper triangular
/// with positive diagonal.
pub fn canonicalize(g: &Mat<f64>, eps: f64) -> Result<OrientedFlag> {
    if !g.is_square() {
        return Err(Error::RankMismatch(g.rows(), g.cols()));
    }
    let q = g.orthonormalize(eps)?;
    // The determinant of the orthonormal factor is ±1 and carries the sign
    // of det(g); it is numerically reliable even when g is badly scaled.
    if q.det() < 0.0 {
        return Err(Error::NonPositiveDeterminant);
    }
    Ok(OrientedFlag { rep: q })
}

/// The unique extended Weyl group element w with g ∈ B₀wB₀, by signed
/// elimination: per column, the pivot is the lowest unused row whose entry is
/// significant; entries above the pivot and right of it are cleared by
/// operations that stay in B₀ on either side.
pub fn bruhat_factorize<T: Scalar>(g: &Mat<T>, eps: f64) -> Result<SignedPermutation> {
    if !g.is_square() {
        return Err(Error::RankMismatch(g.rows(), g.cols()));
    }
    let n = g.rows();
    let mut a = g.clone();
    let mut perm = vec![0usize; n];
    let mut signs = vec![0i8; n];
    let mut used = vec![false; n];
    for j in 0..n {
        // Column scale over unused rows, for the relative pivot threshold.
        let scale: f64 = (0..n)
            .filter(|&i| !used[i])
            .map(|i| a[(i, j)].magnitude().powi(2))
            .sum::<f64>()
            .sqrt();
        let significant = |x: &T| {
            if T::EXACT {
                !x.is_zero()
            } else {
                x.magnitude() > eps * scale
            }
        };
        let pivot = (0..n)
            .rev()
            .find(|&i| !used[i] && significant(&a[(i, j)]));
        let Some(r) = pivot else {
            return Err(Error::Degenerate(format!(
                "no usable pivot in column {j}"
            )));
        };
        let pivot_val = a[(r, j)].clone();
        perm[j] = r;
        signs[j] = if pivot_val.is_positive_value() { 1 } else { -1 };
        // Positive-rescale the column so the pivot entry is ±1.
        let abs_pivot = if signs[j] > 0 {
            pivot_val.clone()
        } else {
            -pivot_val.clone()
        };
        for i in 0..n {
            if !used[i] {
                a[(i, j)] = a[(i, j)].clone() / abs_pivot.clone();
            }
        }
        // Clear above the pivot: add multiples of its (lower) row to upper
        // rows, a left multiplication from B₀.
        for i in 0..n {
            if used[i] || i >= r || a[(i, j)].is_zero() {
                continue;
            }
            let factor = a[(i, j)].clone() / a[(r, j)].clone();
            for c in 0..n {
                let s = a[(r, c)].clone();
                a[(i, c)] = a[(i, c)].clone() - factor.clone() * s;
            }
        }
        // Clear right of the pivot: add multiples of this (earlier) column
        // to later columns, a right multiplication from B₀.
        for c in j + 1..n {
            if a[(r, c)].is_zero() {
                continue;
            }
            let factor = a[(r, c)].clone() / a[(r, j)].clone();
            for i in 0..n {
                if used[i] {
                    continue;
                }
                let s = a[(i, j)].clone();
                a[(i, c)] = a[(i, c)].clone() - factor.clone() * s;
            }
        }
        used[r] = true;
    }
    SignedPermutation::new(perm, signs).map_err(|_| Error::NotUnimodular)
}

/// Allocation-free f64 factorization core for hot loops. `buf` is the n×n
/// matrix in row-major order and is destroyed; `perm`/`signs` receive the
/// result. Semantics match `bruhat_factorize::<f64>`.
pub fn factorize_f64_in_place(
    buf: &mut [f64],
    n: usize,
    eps: f64,
    perm: &mut [usize],
    signs: &mut [i8],
    used: &mut [bool],
) -> Result<()> {
    debug_assert_eq!(buf.len(), n * n);
    used[..n].fill(false);
    for j in 0..n {
        let mut scale = 0.0f64;
        for i in 0..n {
            if !used[i] {
                scale += buf[i * n + j] * buf[i * n + j];
            }
        }
        let scale = scale.sqrt();
        let mut pivot = usize::MAX;
        for i in (0..n).rev() {
            if !used[i] && buf[i * n + j].abs() > eps * scale {
                pivot = i;
                break;
            }
        }
        if pivot == usize::MAX {
            return Err(Error::Degenerate(format!("no usable pivot in column {j}")));
        }
        let r = pivot;
        let pivot_val = buf[r * n + j];
        perm[j] = r;
        signs[j] = if pivot_val > 0.0 { 1 } else { -1 };
        let abs_pivot = pivot_val.abs();
        for i in 0..n {
            if !used[i] {
                buf[i * n + j] /= abs_pivot;
            }
        }
        let pivot_entry = buf[r * n + j];
        for i in 0..r {
            if used[i] || buf[i * n + j] == 0.0 {
                continue;
            }
            let factor = buf[i * n + j] / pivot_entry;
            for c in 0..n {
                buf[i * n + c] -= factor * buf[r * n + c];
            }
        }
        for c in j + 1..n {
            if buf[r * n + c] == 0.0 {
                continue;
            }
            let factor = buf[r * n + c] / pivot_entry;
            for i in 0..n {
                if !used[i] {
                    buf[i * n + c] -= factor * buf[i * n + j];
                }
            }
        }
        used[r] = true;
    }
    // Determinant +1 check without allocating.
    let mut det = 1i8;
    let mut seen = [false; 32];
    let seen = &mut seen[..n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut at = start;
        let mut len = 0;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        if len % 2 == 0 {
            det = -det;
        }
    }
    for &s in signs[..n].iter() {
        det *= s;
    }
    if det != 1 {
        return Err(Error::NotUnimodular);
    }
    Ok(())
}

/// Relative position of two flags in a position space.
pub fn relative_position(
    f1: &OrientedFlag,
    f2: &OrientedFlag,
    space: &PositionSpace,
    eps: f64,
) -> Result<usize> {
    let w = bruhat_factorize(&f1.rep().transpose().mul(f2.rep()), eps)?;
    Ok(space.class_of(&w))
}

/// An oriented subspace of ℝⁿ: a full-column-rank basis matrix, oriented by
/// its column order.
#[derive(Debug, Clone)]
pub struct OrientedSubspace {
    basis: Mat<f64>,
}

impl OrientedSubspace {
    pub fn new(basis: Mat<f64>, eps: f64) -> Result<Self> {
        if basis.cols() > basis.rows() {
            return Err(Error::RankMismatch(basis.rows(), basis.cols()));
        }
        if basis.cols() > 0 {
            basis.orthonormalize(eps)?; // full column rank check
        }
        Ok(Self { basis })
    }

    /// The oriented line spanned by a nonzero vector.
    pub fn line(v: &[f64], eps: f64) -> Result<Self> {
        Self::new(
            Mat::from_rows(v.iter().map(|&x| vec![x]).collect())?,
            eps,
        )
    }

    pub fn basis(&self) -> &Mat<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    /// Same subspace with the opposite orientation: last basis column flipped.
    pub fn flipped(&self) -> Self {
        let mut basis = self.basis.clone();
        let last = basis.cols() - 1;
        for i in 0..basis.rows() {
            basis[(i, last)] = -basis[(i, last)];
        }
        Self { basis }
    }
}

/// Oriented direct sum: a positive basis of A extended by a positive basis
/// of B. Errors when the summands are not transverse.
pub fn oriented_sum(a: &OrientedSubspace, b: &OrientedSubspace, eps: f64) -> Result<OrientedSubspace> {
    if a.ambient() != b.ambient() {
        return Err(Error::RankMismatch(a.ambient(), b.ambient()));
    }
    if a.dim() + b.dim() > a.ambient() {
        return Err(Error::NonTransverseSummands);
    }
    let joined = a.basis.concat_cols(&b.basis);
    if joined.rank(eps) != a.dim() + b.dim() {
        return Err(Error::NonTransverseSummands);
    }
    Ok(OrientedSubspace { basis: joined })
}

/// Orientation sign of a full basis: the sign of det[basis], requiring a
/// square concatenation.
fn det_sign(m: &Mat<f64>, eps: f64) -> Result<f64> {
    let d = m.det();
    if d.abs() <= eps * m.max_abs().max(1.0).powi(m.rows() as i32) {
        return Err(Error::Degenerate("orientation determinant near zero".into()));
    }
    Ok(d.signum())
}

/// Extends `partial` (columns inside span(`from`)) to a basis of span(`from`)
/// using columns of `from`; returns the appended columns.
fn complete_within(partial: &Mat<f64>, from: &Mat<f64>, eps: f64) -> Mat<f64> {
    let n = from.rows();
    let target = from.cols();
    let mut chosen = partial.clone();
    let mut extra = Mat::zeros(n, 0);
    for j in 0..from.cols() {
        if chosen.cols() == target {
            break;
        }
        let candidate = Mat::from_fn(n, 1, |i, _| from[(i, j)]);
        let trial = chosen.concat_cols(&candidate);
        if trial.rank(eps) == chosen.cols() + 1 {
            chosen = trial;
            extra = extra.concat_cols(&candidate);
        }
    }
    debug_assert_eq!(chosen.cols(), target);
    extra
}

/// Oriented intersection of two subspaces spanning ℝⁿ, normalized so that
/// A' ⊕ (A∩B) ⊕ B' is positively oriented where A' ⊕ B and A ⊕ B' are.
pub fn oriented_intersection(
    a: &OrientedSubspace,
    b: &OrientedSubspace,
    eps: f64,
) -> Result<OrientedSubspace> {
    let n = a.ambient();
    if b.ambient() != n {
        return Err(Error::RankMismatch(n, b.ambient()));
    }
    let joined = a.basis.concat_cols(&b.basis);
    if joined.rank(eps) != n {
        return Err(Error::SumNotFull);
    }
    let inter_dim = a.dim() + b.dim() - n;
    if inter_dim == 0 {
        return OrientedSubspace::new(Mat::zeros(n, 0), eps);
    }

    // Kernel of [A | B] parametrizes the intersection: A·x_A = -B·x_B.
    let kernel = joined.kernel(eps);
    debug_assert_eq!(kernel.cols(), inter_dim);
    let x_a = Mat::from_fn(a.dim(), inter_dim, |i, j| kernel[(i, j)]);
    let mut inter = a.basis.mul(&x_a);
    // Normalize columns for numeric stability; orientation fixed below.
    inter = inter.orthonormalize(eps)?;

    // Complements of the intersection inside A and B, with orientations
    // still arbitrary. The normalizations A' ⊕ B ≐ ℝⁿ and A ⊕ B' ≐ ℝⁿ enter
    // as sign corrections: flipping an orientation flips every determinant
    // that contains the block, so only the sign product matters.
    let a_prime = complete_within(&inter, &a.basis, eps);
    let b_prime = complete_within(&inter, &b.basis, eps);
    if a_prime.cols() + inter.cols() + b_prime.cols() != n {
        return Err(Error::SumNotFull);
    }
    let sign_a = det_sign(&a_prime.concat_cols(&b.basis), eps)?;
    let sign_b = det_sign(&a.basis.concat_cols(&b_prime), eps)?;
    let raw = det_sign(&a_prime.concat_cols(&inter).concat_cols(&b_prime), eps)?;
    let result = OrientedSubspace { basis: inter };
    // A' ⊕ (A∩B) ⊕ B' ≐ ℝⁿ for the normalized orientations.
    Ok(if sign_a * sign_b * raw < 0.0 {
        result.flipped()
    } else {
        result
    })
}

/// Completes an oriented line to a positive-determinant matrix whose first
/// column is the line; the remaining columns are auxiliary.
pub fn extend_line_to_matrix(p: &OrientedSubspace, eps: f64) -> Result<Mat<f64>> {
    if p.dim() != 1 {
        return Err(Error::RankMismatch(p.dim(), 1));
    }
    let n = p.ambient();
    let v = p.basis.col(0);
    let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= eps {
        return Err(Error::Degenerate("zero line vector".into()));
    }
    // Skip the standard basis vector most aligned with the line.
    let dominant = (0..n)
        .max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs()))
        .unwrap();
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        m[(i, 0)] = v[i] / norm;
    }
    let mut col = 1;
    for i in 0..n {
        if i == dominant {
            continue;
        }
        m[(i, col)] = 1.0;
        col += 1;
    }
    let d = m.det();
    if d == 0.0 {
        return Err(Error::Degenerate("line completion failed".into()));
    }
    if d < 0.0 {
        for i in 0..n {
            m[(i, n - 1)] = -m[(i, n - 1)];
        }
    }
    Ok(m)
}

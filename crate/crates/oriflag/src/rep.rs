//! Irreducible representations SL(2,ℝ) → SL(n,ℝ) in the orthonormal basis of
//! the symmetric power, block embeddings with the interlacing conjugator, and
//! exact computation of the Hitchin and block transversality types.

use crate::flag::bruhat_factorize;
use crate::mat::{Mat, Scalar};
use crate::weyl::{GroupContext, SignedPermutation};
use crate::{Error, Result};
use num::{BigInt, BigRational, One, Signed, Zero};

type Q = BigRational;

fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut out = BigInt::one();
    for i in 0..k.min(n - k) {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

/// The rotation by π/2 that generates the Weyl group of SL(2,ℝ).
pub fn rot90_q() -> Mat<Q> {
    Mat::from_rows(vec![
        vec![Q::zero(), Q::one()],
        vec![-Q::one(), Q::zero()],
    ])
    .expect("2x2")
}

pub fn rot90_f64() -> Mat<f64> {
    Mat::from_rows(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).expect("2x2")
}

fn check_2x2<T: Scalar>(a: &Mat<T>) -> Result<()> {
    if a.rows() != 2 || a.cols() != 2 {
        return Err(Error::RankMismatch(a.rows(), 2));
    }
    Ok(())
}

/// Entry polynomial of the symmetric power in the plain monomial basis
/// X^{n-i}Y^{i-1}: the coefficient matrix of (aX+cY)^{n-j}(bX+dY)^{j-1}.
fn sym_monomial_entry<T: Scalar>(n: usize, a: &Mat<T>, i: usize, j: usize) -> T {
    let (aa, bb, cc, dd) = (
        a[(0, 0)].clone(),
        a[(0, 1)].clone(),
        a[(1, 0)].clone(),
        a[(1, 1)].clone(),
    );
    let mut sum = T::zero();
    // p factors of Y from (aX+cY)^{n-j}, q from (bX+dY)^{j-1}, p + q = i - 1.
    for p in 0..=(i - 1).min(n - j) {
        let qq = i - 1 - p;
        if qq > j - 1 {
            continue;
        }
        let coeff = binomial(n - j, p) * binomial(j - 1, qq);
        let coeff = T::from_int(i64::try_from(&coeff).expect("binomial fits i64"));
        let term = power(&aa, n - j - p)
            * power(&cc, p)
            * power(&bb, j - 1 - qq)
            * power(&dd, qq);
        sum = sum + coeff * term;
    }
    sum
}

fn power<T: Scalar>(x: &T, e: usize) -> T {
    let mut out = T::one();
    for _ in 0..e {
        out = out * x.clone();
    }
    out
}

/// Exact symmetric power in the monomial basis; a group homomorphism but not
/// orthogonal.
pub fn sym_power_monomial(n: usize, a: &Mat<Q>) -> Result<Mat<Q>> {
    check_2x2(a)?;
    Ok(Mat::from_fn(n, n, |i0, j0| {
        sym_monomial_entry(n, a, i0 + 1, j0 + 1)
    }))
}

/// The irreducible representation in the orthonormal basis
/// e_i = √C(n-1,i-1)·X^{n-i}Y^{i-1}, computed in floating point.
pub fn irreducible_rep(n: usize, a: &Mat<f64>) -> Result<Mat<f64>> {
    check_2x2(a)?;
    let c: Vec<f64> = (0..n)
        .map(|k| i64::try_from(&binomial(n - 1, k)).expect("binomial fits i64") as f64)
        .collect();
    Ok(Mat::from_fn(n, n, |i0, j0| {
        sym_monomial_entry(n, a, i0 + 1, j0 + 1) * (c[j0] / c[i0]).sqrt()
    }))
}

/// Exact irreducible representation for inputs whose image is rational; the
/// normalization √(C(n-1,j-1)/C(n-1,i-1)) must cancel on every nonzero entry,
/// which is asserted.
pub fn irreducible_rep_exact(n: usize, a: &Mat<Q>) -> Result<Mat<Q>> {
    check_2x2(a)?;
    let mut out = Mat::zeros(n, n);
    for i0 in 0..n {
        for j0 in 0..n {
            let p = sym_monomial_entry(n, a, i0 + 1, j0 + 1);
            if p.is_zero() {
                continue;
            }
            let ratio = Q::new(binomial(n - 1, j0), binomial(n - 1, i0));
            let root = rational_sqrt(&ratio).ok_or_else(|| {
                Error::VerificationMismatch(format!(
                    "entry ({},{}) of the symmetric power is irrational",
                    i0 + 1,
                    j0 + 1
                ))
            })?;
            out[(i0, j0)] = p * root;
        }
    }
    Ok(out)
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let num = x.numer();
    let den = x.denom();
    let sn = num.sqrt();
    let sd = den.sqrt();
    if &(&sn * &sn) == num && &(&sd * &sd) == den {
        Some(Q::new(sn, sd))
    } else {
        None
    }
}

/// The block embedding ι_k ⊕ ι_{n-k}; k = 0 or k = n degenerates to the
/// irreducible representation.
pub fn block_embedding(n: usize, k: usize, a: &Mat<f64>) -> Result<Mat<f64>> {
    check_2x2(a)?;
    if k == 0 || k == n {
        return irreducible_rep(n, a);
    }
    if k > n {
        return Err(Error::BlockRange { n, k });
    }
    let top = irreducible_rep(k, a)?;
    let bottom = irreducible_rep(n - k, a)?;
    Ok(block_diag(&top, &bottom))
}

pub fn block_embedding_exact(n: usize, k: usize, a: &Mat<Q>) -> Result<Mat<Q>> {
    check_2x2(a)?;
    if k == 0 || k == n {
        return irreducible_rep_exact(n, a);
    }
    if k > n {
        return Err(Error::BlockRange { n, k });
    }
    let top = irreducible_rep_exact(k, a)?;
    let bottom = irreducible_rep_exact(n - k, a)?;
    Ok(block_diag(&top, &bottom))
}

fn block_diag<T: Scalar>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let n = a.rows() + b.rows();
    Mat::from_fn(n, n, |i, j| {
        if i < a.rows() && j < a.cols() {
            a[(i, j)].clone()
        } else if i >= a.rows() && j >= a.cols() {
            b[(i - a.rows(), j - a.cols())].clone()
        } else {
            T::zero()
        }
    })
}

/// Diagonal weight exponents of the block embedding at diag(λ, 1/λ):
/// (k-1, k-3, ..., 1-k) followed by (n-k-1, ..., k+1-n).
fn block_exponents(n: usize, k: usize) -> Vec<i64> {
    let mut e: Vec<i64> = (0..k).map(|t| k as i64 - 1 - 2 * t as i64).collect();
    e.extend((0..n - k).map(|t| (n - k) as i64 - 1 - 2 * t as i64));
    e
}

/// The signed permutation sorting the block-embedding weights into strictly
/// decreasing order, with the sign on the last column fixing the determinant.
/// A single block (k = 0 or k = n) is already sorted, giving the identity.
pub fn interlacer(n: usize, k: usize) -> Result<SignedPermutation> {
    if n % 2 == 0 || k > n {
        return Err(Error::BlockRange { n, k });
    }
    if k == 0 || k == n {
        let ctx = GroupContext::new(n, false)?;
        return Ok(ctx.identity());
    }
    let exps = block_exponents(n, k);
    let mut sorted: Vec<i64> = exps.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::VerificationMismatch(
            "duplicate weights cannot be sorted uniquely".into(),
        ));
    }
    let perm: Vec<usize> = exps
        .iter()
        .map(|e| sorted.iter().position(|s| s == e).unwrap())
        .collect();
    let mut signs = vec![1i8; n];
    if SignedPermutation::new(perm.clone(), signs.clone()).is_err() {
        signs[n - 1] = -1;
    }
    SignedPermutation::new(perm, signs)
}

/// The Hitchin transversality type: the antidiagonal with entry
/// (n+1-j, j) = (-1)^{n-j}, which is the image of the quarter rotation under
/// the irreducible representation.
pub fn hitchin_w0(n: usize) -> Result<SignedPermutation> {
    if n < 2 {
        return Err(Error::RankTooSmall(n));
    }
    let perm: Vec<usize> = (0..n).rev().collect();
    let signs: Vec<i8> = perm.iter().map(|&r| if r % 2 == 0 { 1 } else { -1 }).collect();
    SignedPermutation::new(perm, signs)
}

/// The closed-form block transversality type: antidiagonal blocks J (all
/// ones), the middle sign δ, K (alternating, -1 first) and L (all (-1)^{Q-1}).
pub fn wk_formula(n: usize, k: usize) -> Result<SignedPermutation> {
    if n % 2 == 0 || n < 3 || k < 1 || k > n - 1 {
        return Err(Error::BlockRange { n, k });
    }
    let q = k.min(n - k);
    let big_q = k.max(n - k);
    let nj = (n - 1) / 2;
    let delta: i8 = if k % 2 == 1 {
        if ((k - 1) / 2) % 2 == 0 {
            1
        } else {
            -1
        }
    } else if ((n - k - 1) / 2) % 2 == 0 {
        1
    } else {
        -1
    };
    let l_sign: i8 = if (big_q - 1) % 2 == 0 { 1 } else { -1 };
    // Antidiagonal signs, reading the entry (a, n+1-a) for a = 1..n.
    let mut signs = Vec::with_capacity(n);
    signs.extend(std::iter::repeat(1i8).take(nj)); // J
    signs.push(delta);
    for t in 1..q {
        signs.push(if t % 2 == 1 { -1 } else { 1 }); // K
    }
    signs.extend(std::iter::repeat(l_sign).take((big_q - q + 1) / 2)); // L
    debug_assert_eq!(signs.len(), n);
    let ctx = GroupContext::new(n, false)?;
    ctx.antidiagonal(&signs)
}

/// Computes the block transversality type from the representation itself:
/// factorize z·b_k(rot90)·z⁻¹ and normalize under conjugation by signs. The
/// result is checked against the closed form and returned in canonical form.
pub fn block_transversality(n: usize, k: usize) -> Result<SignedPermutation> {
    if n % 2 == 0 || n < 3 {
        return Err(Error::BlockRange { n, k });
    }
    let ctx = GroupContext::new(n, false)?;
    if k == 0 || k == n {
        let (canon, _) = ctx.canonicalize_transverse(&hitchin_w0(n)?)?;
        return Ok(canon);
    }
    if k > n {
        return Err(Error::BlockRange { n, k });
    }
    let z = interlacer(n, k)?;
    let zmat: Mat<Q> = Mat::from_signed_permutation(&z);
    let zinv: Mat<Q> = Mat::from_signed_permutation(&ctx.inverse(&z));
    let b = block_embedding_exact(n, k, &rot90_q())?;
    let conj = zmat.mul(&b).mul(&zinv);
    let w = bruhat_factorize(&conj, 0.0)?;
    let (canon, _) = ctx.canonicalize_transverse(&w)?;

    let formula = wk_formula(n, k)?;
    let (formula_canon, _) = ctx.canonicalize_transverse(&formula)?;
    if formula_canon != formula {
        return Err(Error::VerificationMismatch(format!(
            "closed form for n={n}, k={k} is not in canonical form"
        )));
    }
    if canon != formula {
        return Err(Error::VerificationMismatch(format!(
            "computed transversality type {canon} differs from the closed form {formula}"
        )));
    }
    Ok(canon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn qi(v: i64) -> Q {
        Q::from_int(v)
    }

    fn rand_q_mat(rng: &mut impl Rng) -> Mat<Q> {
        Mat::from_fn(2, 2, |_, _| {
            Q::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=4).into())
        })
    }

    #[test]
    fn irreducible_rep_of_identity() {
        for n in 2..=6 {
            let id = irreducible_rep(n, &Mat::identity(2)).unwrap();
            assert!(id.max_abs_diff(&Mat::identity(n)) < 1e-14);
            let idq = irreducible_rep_exact(n, &Mat::<Q>::identity(2)).unwrap();
            assert_eq!(idq, Mat::<Q>::identity(n));
        }
    }

    #[test]
    fn irreducible_rep_of_rot90_is_hitchin_type() {
        let w = irreducible_rep_exact(3, &rot90_q()).unwrap();
        let expect = mat_from_i64(vec![
            vec![0, 0, 1],
            vec![0, -1, 0],
            vec![1, 0, 0],
        ]);
        assert_eq!(w, expect);
        for n in 2..=9 {
            let wq = irreducible_rep_exact(n, &rot90_q()).unwrap();
            let w = bruhat_factorize(&wq, 0.0).unwrap();
            assert_eq!(w, hitchin_w0(n).unwrap(), "n={n}");
        }
    }

    fn mat_from_i64(rows: Vec<Vec<i64>>) -> Mat<Q> {
        crate::mat::mat_q_from_i64(rows).unwrap()
    }

    #[test]
    fn irreducible_rep_of_diagonal_is_weights() {
        let a = Mat::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let m = irreducible_rep(3, &a).unwrap();
        let expect = Mat::from_rows(vec![
            vec![4.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.25],
        ])
        .unwrap();
        assert!(m.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn monomial_symmetric_power_is_a_homomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=6 {
            for _ in 0..20 {
                let a = rand_q_mat(&mut rng);
                let b = rand_q_mat(&mut rng);
                let pa = sym_power_monomial(n, &a).unwrap();
                let pb = sym_power_monomial(n, &b).unwrap();
                let pab = sym_power_monomial(n, &a.mul(&b)).unwrap();
                assert_eq!(pab, pa.mul(&pb), "n={n}");
            }
        }
    }

    #[test]
    fn rotations_map_to_rotations() {
        for n in 2..=7 {
            for &t in &[0.3f64, 1.1, -0.7, 2.9] {
                let a = Mat::from_rows(vec![
                    vec![t.cos(), -t.sin()],
                    vec![t.sin(), t.cos()],
                ])
                .unwrap();
                let m = irreducible_rep(n, &a).unwrap();
                let gram = m.transpose().mul(&m);
                assert!(
                    gram.max_abs_diff(&Mat::identity(n)) < 1e-12,
                    "n={n}, t={t}"
                );
                assert!((m.det() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn center_maps_to_signed_identity() {
        for n in 2..=7 {
            let neg = Mat::from_rows(vec![vec![-1.0, 0.0], vec![0.0, -1.0]]).unwrap();
            let m = irreducible_rep(n, &neg).unwrap();
            let sign = if (n - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let mut expect = Mat::<f64>::identity(n);
            for i in 0..n {
                expect[(i, i)] = sign;
            }
            assert!(m.max_abs_diff(&expect) < 1e-14);
        }
    }

    #[test]
    fn upper_triangular_is_preserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 2..=6 {
            for _ in 0..20 {
                let diag = rng.gen_range(0.2..2.0);
                let a = Mat::from_rows(vec![
                    vec![diag, rng.gen_range(-2.0..2.0)],
                    vec![0.0, 1.0 / diag],
                ])
                .unwrap();
                let m = irreducible_rep(n, &a).unwrap();
                for i in 0..n {
                    for j in 0..i {
                        assert!(m[(i, j)].abs() < 1e-12);
                    }
                    assert!(m[(i, i)] > 0.0);
                }
            }
        }
    }

    #[test]
    fn block_embedding_examples() {
        // n=3, k=1: ι₁ trivial, ι₂ identity on SL(2).
        let a = Mat::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let m = block_embedding(3, 1, &a).unwrap();
        let expect = Mat::from_rows(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        assert!(m.max_abs_diff(&expect) < 1e-14);

        // k=0 degenerates to the irreducible representation.
        let m0 = block_embedding(5, 0, &a).unwrap();
        let mi = irreducible_rep(5, &a).unwrap();
        assert!(m0.max_abs_diff(&mi) < 1e-14);

        // b_k(-1) has blocks (-1)^{k-1} and (-1)^{n-k-1}.
        let neg = mat_from_i64(vec![vec![-1, 0], vec![0, -1]]);
        for (n, k) in [(5usize, 2usize), (7, 3), (9, 4)] {
            let m = block_embedding_exact(n, k, &neg).unwrap();
            for i in 0..n {
                let expect = if i < k {
                    if (k - 1) % 2 == 0 { 1 } else { -1 }
                } else if (n - k - 1) % 2 == 0 {
                    1
                } else {
                    -1
                };
                assert_eq!(m[(i, i)], qi(expect));
            }
        }
    }

    #[test]
    fn interlacer_sorts_weights() {
        for n in [3usize, 5, 7, 9] {
            for k in 1..n {
                let z = interlacer(n, k).unwrap();
                let exps = block_exponents(n, k);
                // z g z⁻¹ reorders the diagonal: entry at row z(j) is exps[j].
                let mut diag = vec![0i64; n];
                for (j, &e) in exps.iter().enumerate() {
                    diag[z.perm()[j]] = e;
                }
                assert!(
                    diag.windows(2).all(|w| w[0] > w[1]),
                    "n={n}, k={k}: {diag:?}"
                );
            }
        }
        // Sorting check through actual matrices for λ = 2.
        let lambda = Mat::from_rows(vec![vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        for n in [3usize, 5, 7, 9] {
            for k in 1..n {
                let z = interlacer(n, k).unwrap();
                let c = GroupContext::new(n, false).unwrap();
                let zm: Mat<f64> = Mat::from_signed_permutation(&z);
                let zinv: Mat<f64> = Mat::from_signed_permutation(&c.inverse(&z));
                let g = block_embedding(n, k, &lambda).unwrap();
                let sorted = zm.mul(&g).mul(&zinv);
                for i in 0..n - 1 {
                    assert!(sorted[(i, i)] > sorted[(i + 1, i + 1)]);
                }
            }
        }
        assert!(interlacer(4, 1).is_err());
        // A single block needs no interlacing.
        let c3 = GroupContext::new(3, false).unwrap();
        assert_eq!(interlacer(3, 3).unwrap(), c3.identity());
        assert_eq!(interlacer(3, 0).unwrap(), c3.identity());
    }

    #[test]
    fn hitchin_w0_examples() {
        let c3 = GroupContext::new(3, false).unwrap();
        assert_eq!(
            hitchin_w0(3).unwrap(),
            c3.antidiagonal(&[1, -1, 1]).unwrap()
        );
        let w2 = hitchin_w0(2).unwrap();
        let rot: Mat<f64> = Mat::from_signed_permutation(&w2);
        assert!(rot.max_abs_diff(&rot90_f64()) < 1e-15);
        for n in 2..=9 {
            let c = GroupContext::new(n, false).unwrap();
            assert!(c.is_transverse(&hitchin_w0(n).unwrap()));
        }
    }

    #[test]
    fn block_transversality_n3() {
        // n=3, k=1: J=[1], K empty, L=[-1], δ=+1.
        let w = block_transversality(3, 1).unwrap();
        let c = GroupContext::new(3, false).unwrap();
        assert_eq!(w, c.antidiagonal(&[1, 1, -1]).unwrap());
        assert_eq!(w.entry(0, 2), 1);
        assert_eq!(w.entry(1, 1), 1);
        assert_eq!(w.entry(2, 0), -1);

        // Hitchin degenerate case.
        let w0 = block_transversality(3, 0).unwrap();
        assert_eq!(w0, c.antidiagonal(&[1, -1, 1]).unwrap());
    }

    #[test]
    fn block_transversality_matches_formula_all_small_n() {
        for n in [3usize, 5, 7, 9] {
            for k in 1..n {
                let w = block_transversality(n, k).unwrap();
                assert_eq!(w, wk_formula(n, k).unwrap(), "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn wk_square_is_center_image() {
        for n in [3usize, 5, 7] {
            let c = GroupContext::new(n, false).unwrap();
            for k in 1..n {
                let z = interlacer(n, k).unwrap();
                let zmat: Mat<Q> = Mat::from_signed_permutation(&z);
                let zinv: Mat<Q> = Mat::from_signed_permutation(&c.inverse(&z));
                let neg = mat_from_i64(vec![vec![-1, 0], vec![0, -1]]);
                let m = zmat
                    .mul(&block_embedding_exact(n, k, &neg).unwrap())
                    .mul(&zinv);
                let m = bruhat_factorize(&m, 0.0).unwrap();
                let wk = block_transversality(n, k).unwrap();
                assert_eq!(c.compose(&wk, &wk), m, "n={n}, k={k}");
            }
        }
    }

    #[test]
    fn float_and_exact_representations_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for n in 2..=6 {
            for _ in 0..10 {
                // Diagonal and rotation inputs have rational/exact images.
                let t: i64 = rng.gen_range(1..=3);
                let d = Mat::from_rows(vec![
                    vec![t as f64, 0.0],
                    vec![0.0, 1.0 / t as f64],
                ])
                .unwrap();
                let dq = mat_from_i64(vec![vec![t, 0], vec![0, 0]]);
                let mut dq = dq;
                dq[(1, 1)] = Q::new(1.into(), t.into());
                let mf = irreducible_rep(n, &d).unwrap();
                let mq = irreducible_rep_exact(n, &dq).unwrap().to_f64();
                assert!(mf.max_abs_diff(&mq) < 1e-9 * mf.max_abs());
            }
        }
    }

    #[test]
    fn exactness_assertion_fires_for_irrational_entries() {
        // A unipotent has √2 in its n=3 symmetric power.
        let u = mat_from_i64(vec![vec![1, 1], vec![0, 1]]);
        assert!(matches!(
            irreducible_rep_exact(3, &u),
            Err(Error::VerificationMismatch(_))
        ));
        // The float path handles it fine.
        let uf = Mat::from_rows(vec![vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let m = irreducible_rep(3, &uf).unwrap();
        assert!((m[(0, 1)] - 2.0f64.sqrt()).abs() < 1e-12);
    }
}

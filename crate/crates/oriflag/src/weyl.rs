//! Exact arithmetic in the extended Weyl group of SL(n,ℝ).
//!
//! Elements are signed permutation matrices of determinant +1, stored as a
//! permutation plus a sign per column. In projective mode (PSL(n,ℝ), n even)
//! the pair {w, -w} is identified and stored by the representative whose
//! first column carries a positive sign.

use crate::{Error, Result};
use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

/// Ambient group: SL(n,ℝ), or PSL(n,ℝ) when `projective` is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupContext {
    n: usize,
    projective: bool,
}

/// A signed permutation matrix with determinant +1.
///
/// `perm[j]` is the (0-based) row of the unique nonzero entry in column `j`,
/// and `signs[j]` is that entry. The text encoding is 1-based: `+2 -1 +3`
/// sends column 1 to +row 2, column 2 to -row 1, column 3 to +row 3.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SignedPermutation {
    perm: Vec<usize>,
    signs: Vec<i8>,
}

impl SignedPermutation {
    /// Builds an element from raw data, checking that `perm` is a bijection
    /// and the determinant is +1.
    pub fn new(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let n = perm.len();
        if signs.len() != n {
            return Err(Error::RankMismatch(n, signs.len()));
        }
        let mut seen = vec![false; n];
        for &r in &perm {
            if r >= n || seen[r] {
                return Err(Error::Parse("perm is not a bijection".into()));
            }
            seen[r] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Parse("signs must be +1 or -1".into()));
        }
        let w = Self { perm, signs };
        if w.det() != 1 {
            return Err(Error::NotUnimodular);
        }
        Ok(w)
    }

    pub fn rank(&self) -> usize {
        self.perm.len()
    }

    /// Row index (0-based) of the nonzero entry in column `j`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// Sign of the permutation times the product of entry signs.
    fn det(&self) -> i8 {
        let mut det = if permutation_sign(&self.perm) { 1i8 } else { -1 };
        for &s in &self.signs {
            det *= s;
        }
        det
    }

    /// Word length of the underlying permutation: its inversion count.
    pub fn length(&self) -> usize {
        let mut inv = 0;
        for i in 0..self.perm.len() {
            for j in i + 1..self.perm.len() {
                if self.perm[i] > self.perm[j] {
                    inv += 1;
                }
            }
        }
        inv
    }

    /// True if every entry sits on the main diagonal.
    pub fn is_diagonal(&self) -> bool {
        self.perm.iter().enumerate().all(|(j, &r)| r == j)
    }

    /// True if the underlying permutation is the longest element.
    pub fn is_antidiagonal(&self) -> bool {
        let n = self.perm.len();
        self.perm.iter().enumerate().all(|(j, &r)| r == n - 1 - j)
    }

    /// The matrix entry at `(row, col)`, in {-1, 0, 1}.
    pub fn entry(&self, row: usize, col: usize) -> i8 {
        if self.perm[col] == row {
            self.signs[col]
        } else {
            0
        }
    }

    fn negated(&self) -> Self {
        Self {
            perm: self.perm.clone(),
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Comparison key matching the lexicographic order of the text encoding
    /// (per column: sign first with `+` before `-`, then the row index).
    fn key(&self) -> impl Iterator<Item = (u8, usize)> + '_ {
        self.perm
            .iter()
            .zip(&self.signs)
            .map(|(&r, &s)| (if s > 0 { 0u8 } else { 1 }, r))
    }
}

impl PartialOrd for SignedPermutation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SignedPermutation {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(other.key())
    }
}

impl fmt::Display for SignedPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (j, (&r, &s)) in self.perm.iter().zip(&self.signs).enumerate() {
            if j > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", if s > 0 { '+' } else { '-' }, r + 1)?;
        }
        Ok(())
    }
}

impl FromStr for SignedPermutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut perm = Vec::new();
        let mut signs = Vec::new();
        for tok in s.split_whitespace() {
            let (sign, rest) = match tok.as_bytes().first() {
                Some(b'+') => (1i8, &tok[1..]),
                Some(b'-') => (-1i8, &tok[1..]),
                _ => return Err(Error::Parse(format!("token `{tok}` must start with + or -"))),
            };
            let row: usize = rest
                .parse()
                .map_err(|_| Error::Parse(format!("bad row index in `{tok}`")))?;
            if row == 0 {
                return Err(Error::Parse("row indices are 1-based".into()));
            }
            perm.push(row - 1);
            signs.push(sign);
        }
        Self::new(perm, signs)
    }
}

impl GroupContext {
    pub fn new(n: usize, projective: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::RankTooSmall(n));
        }
        if projective && n % 2 != 0 {
            return Err(Error::ProjectiveOddRank(n));
        }
        Ok(Self { n, projective })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn projective(&self) -> bool {
        self.projective
    }

    /// Number of simple roots.
    pub fn root_count(&self) -> usize {
        self.n - 1
    }

    /// Canonical representative: in projective mode the first sign is +1.
    pub fn canonize(&self, w: SignedPermutation) -> SignedPermutation {
        if self.projective && w.signs[0] < 0 {
            w.negated()
        } else {
            w
        }
    }

    fn check_rank(&self, w: &SignedPermutation) -> Result<()> {
        if w.rank() != self.n {
            return Err(Error::RankMismatch(self.n, w.rank()));
        }
        Ok(())
    }

    pub fn identity(&self) -> SignedPermutation {
        SignedPermutation {
            perm: (0..self.n).collect(),
            signs: vec![1; self.n],
        }
    }

    /// Matrix product of two elements.
    pub fn compose(&self, a: &SignedPermutation, b: &SignedPermutation) -> SignedPermutation {
        assert_eq!(a.rank(), b.rank(), "rank mismatch in compose");
        let n = a.rank();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for j in 0..n {
            perm[j] = a.perm[b.perm[j]];
            signs[j] = a.signs[b.perm[j]] * b.signs[j];
        }
        self.canonize(SignedPermutation { perm, signs })
    }

    pub fn inverse(&self, w: &SignedPermutation) -> SignedPermutation {
        let n = w.rank();
        let mut perm = vec![0; n];
        let mut signs = vec![1i8; n];
        for j in 0..n {
            perm[w.perm[j]] = j;
            signs[w.perm[j]] = w.signs[j];
        }
        self.canonize(SignedPermutation { perm, signs })
    }

    /// Composes a slice of elements left to right; empty product is the identity.
    pub fn product(&self, ws: &[&SignedPermutation]) -> SignedPermutation {
        ws.iter()
            .fold(self.identity(), |acc, w| self.compose(&acc, w))
    }

    /// The standard generator v(αᵢ): the rotation block [[0,-1],[1,0]] in
    /// rows and columns {i, i+1}, identity elsewhere. `i` is 1-based.
    pub fn generator(&self, i: usize) -> Result<SignedPermutation> {
        if i < 1 || i > self.n - 1 {
            return Err(Error::RootIndexOutOfRange {
                index: i,
                max: self.n - 1,
            });
        }
        let mut w = self.identity();
        w.perm[i - 1] = i;
        w.perm[i] = i - 1;
        w.signs[i - 1] = 1;
        w.signs[i] = -1;
        Ok(self.canonize(w))
    }

    /// All diagonal sign matrices of determinant +1, sorted.
    pub fn mbar_elements(&self) -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        for mask in 0u32..(1 << self.n) {
            if mask.count_ones() % 2 != 0 {
                continue;
            }
            if self.projective && mask & 1 != 0 {
                continue;
            }
            let signs = (0..self.n)
                .map(|j| if mask >> j & 1 == 1 { -1i8 } else { 1 })
                .collect();
            out.push(SignedPermutation {
                perm: (0..self.n).collect(),
                signs,
            });
        }
        out.sort();
        out
    }

    /// All lifts of the longest Weyl element: antidiagonal matrices whose
    /// count of -1 entries has the parity of n(n-1)/2. Sorted.
    pub fn transverse_elements(&self) -> Vec<SignedPermutation> {
        let parity = (self.n * (self.n - 1) / 2) % 2;
        let mut out = HashSet::new();
        for mask in 0u32..(1 << self.n) {
            if mask.count_ones() as usize % 2 != parity {
                continue;
            }
            let signs = (0..self.n)
                .map(|j| if mask >> j & 1 == 1 { -1i8 } else { 1 })
                .collect();
            out.insert(self.canonize(SignedPermutation {
                perm: (0..self.n).rev().collect(),
                signs,
            }));
        }
        let mut out: Vec<_> = out.into_iter().collect();
        out.sort();
        out
    }

    pub fn is_transverse(&self, w: &SignedPermutation) -> bool {
        w.rank() == self.n && w.is_antidiagonal()
    }

    pub fn is_in_mbar(&self, w: &SignedPermutation) -> bool {
        w.rank() == self.n && w.is_diagonal()
    }

    /// The opposition involution on root indices: ι(i) = n - i.
    pub fn opposition(&self, i: usize) -> Result<usize> {
        if i < 1 || i > self.n - 1 {
            return Err(Error::RootIndexOutOfRange {
                index: i,
                max: self.n - 1,
            });
        }
        Ok(self.n - i)
    }

    /// Writes w as v(α_{i₁})···v(α_{i_k})·m with k = length(w) and m diagonal,
    /// peeling the smallest left descent at each step.
    pub fn reduced_word(&self, w: &SignedPermutation) -> (Vec<usize>, SignedPermutation) {
        self.reduced_word_by(w, false)
    }

    /// Variant choosing the largest descent at each step; same element, in
    /// general a different reduced word.
    pub fn reduced_word_largest_descent(
        &self,
        w: &SignedPermutation,
    ) -> (Vec<usize>, SignedPermutation) {
        self.reduced_word_by(w, true)
    }

    fn reduced_word_by(&self, w: &SignedPermutation, largest: bool) -> (Vec<usize>, SignedPermutation) {
        let n = self.n;
        let mut cur = w.clone();
        let mut word = Vec::with_capacity(w.length());
        loop {
            // Column position of each row value.
            let mut col_of = vec![0; n];
            for (j, &r) in cur.perm.iter().enumerate() {
                col_of[r] = j;
            }
            // Left descent at i: row i appears in a later column than row i+1.
            let is_descent = |i: &usize| col_of[i - 1] > col_of[*i];
            let pick = if largest {
                (1..n).rev().find(is_descent)
            } else {
                (1..n).find(is_descent)
            };
            match pick {
                Some(i) => {
                    let vinv = self.inverse(&self.generator(i).expect("valid index"));
                    cur = self.compose(&vinv, &cur);
                    word.push(i);
                }
                None => break,
            }
        }
        debug_assert!(cur.is_diagonal());
        (word, cur)
    }

    /// The canonical conjugate of a transverse element under the sign group:
    /// the representative whose upper-right corner block (size (n-1)/2 for odd
    /// n, (n-2)/2 for even n) has all +1 entries. Also returns the conjugator.
    pub fn canonicalize_transverse(
        &self,
        w0: &SignedPermutation,
    ) -> Result<(SignedPermutation, SignedPermutation)> {
        self.check_rank(w0)?;
        if !self.is_transverse(w0) {
            return Err(Error::NotTransverse);
        }
        let block = if self.n % 2 == 1 {
            (self.n - 1) / 2
        } else {
            (self.n - 2) / 2
        };
        let mut found: Option<(SignedPermutation, SignedPermutation)> = None;
        for m in self.mbar_elements() {
            let cand = self.compose(&self.compose(&m, w0), &self.inverse(&m));
            // Rows 1..=block hold the antidiagonal entries of columns n-block..n.
            let ok = (0..block).all(|r| cand.signs[self.n - 1 - r] > 0);
            if ok {
                match &found {
                    Some((prev, _)) if *prev != cand => {
                        unreachable!("transverse canonical form is not unique")
                    }
                    Some(_) => {}
                    None => found = Some((cand, m)),
                }
            }
        }
        Ok(found.expect("every transverse class has a canonical form"))
    }

    /// Builds the antidiagonal element with the given signs, read from the
    /// top-right entry down to the bottom-left.
    pub fn antidiagonal(&self, signs_top_right_first: &[i8]) -> Result<SignedPermutation> {
        if signs_top_right_first.len() != self.n {
            return Err(Error::RankMismatch(self.n, signs_top_right_first.len()));
        }
        // Entry (i, n+1-i) = signs[i-1]; column j = n-1-i0 carries sign i0.
        let mut signs = vec![1i8; self.n];
        for (i0, &s) in signs_top_right_first.iter().enumerate() {
            signs[self.n - 1 - i0] = s;
        }
        let w = SignedPermutation::new((0..self.n).rev().collect(), signs)?;
        Ok(self.canonize(w))
    }

    /// Builds the diagonal element with the given signs.
    pub fn diagonal(&self, signs: &[i8]) -> Result<SignedPermutation> {
        if signs.len() != self.n {
            return Err(Error::RankMismatch(self.n, signs.len()));
        }
        let w = SignedPermutation::new((0..self.n).collect(), signs.to_vec())?;
        Ok(self.canonize(w))
    }

    /// Enumerates the whole group, sorted. Size is 2^{n-1}·n!, half that in
    /// projective mode; intended for small n.
    pub fn elements(&self) -> Vec<SignedPermutation> {
        let mut out = Vec::new();
        let mut perm: Vec<usize> = (0..self.n).collect();
        permute(&mut perm, 0, &mut |p| {
            let base_parity = if permutation_sign(p) { 0u32 } else { 1 };
            for mask in 0u32..(1 << self.n) {
                if mask.count_ones() % 2 != base_parity % 2 {
                    continue;
                }
                if self.projective && mask & 1 != 0 {
                    continue;
                }
                let signs = (0..self.n)
                    .map(|j| if mask >> j & 1 == 1 { -1i8 } else { 1 })
                    .collect();
                out.push(SignedPermutation {
                    perm: p.to_vec(),
                    signs,
                });
            }
        });
        out.sort();
        out
    }
}

/// True for even permutations.
fn permutation_sign(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    let mut even = true;
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        if len % 2 == 0 {
            even = !even;
        }
    }
    even
}

fn permute(perm: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        f(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, f);
        perm.swap(k, i);
    }
}

//! The refined Bruhat order on the extended Weyl group, oriented parabolic
//! types, and the double-coset spaces of relative positions.
//!
//! The order is computed combinatorially: everything below an element is
//! obtained by deleting or squaring letters in a reduced word, and the order
//! on a double quotient R\W̃/S is induced by multiplying that lower set by R
//! and S.

use crate::bits::BitSet;
use crate::weyl::{GroupContext, SignedPermutation};
use crate::{Error, Result};
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

/// An oriented parabolic type R = ⟨v(θ), E⟩: a subset θ of the simple roots
/// together with a subgroup E of the diagonal sign group containing the sign
/// part of ⟨v(θ)⟩.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParabolicType {
    theta: Vec<usize>,
    e: Vec<SignedPermutation>,
    elements: Vec<SignedPermutation>,
}

impl ParabolicType {
    /// Root indices (1-based), sorted.
    pub fn theta(&self) -> &[usize] {
        &self.theta
    }

    /// The sign subgroup E, sorted.
    pub fn e_subgroup(&self) -> &[SignedPermutation] {
        &self.e
    }

    /// The full element set ⟨v(θ)⟩·E, sorted.
    pub fn elements(&self) -> &[SignedPermutation] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Closure of a generating set under the group product.
fn closure(ctx: &GroupContext, gens: &[SignedPermutation]) -> Vec<SignedPermutation> {
    let mut seen: HashSet<SignedPermutation> = gens.iter().cloned().collect();
    seen.insert(ctx.identity());
    let mut frontier: Vec<SignedPermutation> = seen.iter().cloned().collect();
    while let Some(w) = frontier.pop() {
        for g in gens {
            let next = ctx.compose(&w, g);
            if seen.insert(next.clone()) {
                frontier.push(next);
            }
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort();
    out
}

/// The subgroup ⟨v(θ)⟩ generated by the chosen root lifts.
pub fn v_theta_group(ctx: &GroupContext, theta: &[usize]) -> Result<Vec<SignedPermutation>> {
    let gens: Result<Vec<_>> = theta.iter().map(|&i| ctx.generator(i)).collect();
    Ok(closure(ctx, &gens?))
}

/// The sign part M̄_θ = ⟨v(θ)⟩ ∩ M̄.
pub fn mbar_theta(ctx: &GroupContext, theta: &[usize]) -> Result<Vec<SignedPermutation>> {
    Ok(v_theta_group(ctx, theta)?
        .into_iter()
        .filter(|w| ctx.is_in_mbar(w))
        .collect())
}

/// Builds and validates an oriented parabolic type from θ and E.
pub fn make_parabolic_type(
    ctx: &GroupContext,
    theta: &[usize],
    e: &[SignedPermutation],
) -> Result<ParabolicType> {
    let theta: BTreeSet<usize> = theta.iter().copied().collect();
    for &i in &theta {
        if i < 1 || i > ctx.root_count() {
            return Err(Error::RootIndexOutOfRange {
                index: i,
                max: ctx.root_count(),
            });
        }
    }
    if theta.len() >= ctx.root_count() {
        return Err(Error::ThetaNotProper);
    }
    let theta: Vec<usize> = theta.into_iter().collect();

    let mut e_set: BTreeSet<SignedPermutation> = e.iter().cloned().collect();
    e_set.insert(ctx.identity());
    for m in &e_set {
        if !ctx.is_in_mbar(m) {
            return Err(Error::ENotSubgroup);
        }
        for m2 in &e_set {
            if !e_set.contains(&ctx.compose(m, m2)) {
                return Err(Error::ENotSubgroup);
            }
        }
    }
    for m in mbar_theta(ctx, &theta)? {
        if !e_set.contains(&m) {
            return Err(Error::EMissingThetaSigns);
        }
    }
    let e: Vec<SignedPermutation> = e_set.into_iter().collect();

    let v_group = v_theta_group(ctx, &theta)?;
    let mut elements: BTreeSet<SignedPermutation> = BTreeSet::new();
    for v in &v_group {
        for m in &e {
            elements.insert(ctx.compose(v, m));
        }
    }
    // ⟨v(θ)⟩E = E⟨v(θ)⟩; the generated subgroup equals the product set.
    debug_assert!(v_group
        .iter()
        .all(|v| e.iter().all(|m| elements.contains(&ctx.compose(m, v)))));
    Ok(ParabolicType {
        theta,
        e,
        elements: elements.into_iter().collect(),
    })
}

/// The trivial type R = {1}.
pub fn trivial_type(ctx: &GroupContext) -> ParabolicType {
    make_parabolic_type(ctx, &[], &[]).expect("trivial type is valid")
}

/// Recovers (θ, E) from a bare element set, or reports that the set is not
/// of the form ⟨v(θ)⟩·E.
pub fn recover_theta_e(
    ctx: &GroupContext,
    set: &[SignedPermutation],
) -> Result<(Vec<usize>, Vec<SignedPermutation>)> {
    let set: BTreeSet<SignedPermutation> = set.iter().cloned().collect();
    // θ = π(R) ∩ Δ: the simple transpositions hit by the projection.
    let mut theta = Vec::new();
    for i in 1..=ctx.root_count() {
        let gen = ctx.generator(i)?;
        if set.iter().any(|w| w.perm() == gen.perm()) {
            theta.push(i);
        }
    }
    let e: Vec<SignedPermutation> = set.iter().filter(|w| ctx.is_in_mbar(w)).cloned().collect();
    let rebuilt = make_parabolic_type(ctx, &theta, &e).map_err(|_| Error::NotAParabolicType)?;
    if rebuilt.elements() != set.into_iter().collect::<Vec<_>>() {
        return Err(Error::NotAParabolicType);
    }
    Ok((theta, e))
}

/// The lower set A_w: all elements obtained from the canonical reduced word
/// of w by deleting or squaring letters.
pub fn lower_set(ctx: &GroupContext, w: &SignedPermutation) -> HashSet<SignedPermutation> {
    let (word, m) = ctx.reduced_word(w);
    lower_set_from_word(ctx, &word, &m)
}

/// Same lower set computed from an explicitly given reduced word; the result
/// does not depend on the word, which tests exploit.
pub fn lower_set_from_word(
    ctx: &GroupContext,
    word: &[usize],
    m: &SignedPermutation,
) -> HashSet<SignedPermutation> {
    let mut set: HashSet<SignedPermutation> = HashSet::new();
    set.insert(m.clone());
    for &i in word.iter().rev() {
        let v = ctx.generator(i).expect("valid root index");
        let v2 = ctx.compose(&v, &v);
        let mut next = HashSet::with_capacity(set.len() * 3);
        for x in &set {
            next.insert(x.clone());
            next.insert(ctx.compose(&v, x));
            next.insert(ctx.compose(&v2, x));
        }
        set = next;
    }
    set
}

/// The refined Bruhat order on the full group: a ≤ b iff a ∈ A_b.
pub fn leq_tilde(ctx: &GroupContext, a: &SignedPermutation, b: &SignedPermutation) -> bool {
    lower_set(ctx, b).contains(&ctx.canonize(a.clone()))
}

/// Checks whether a = q·b for a conjugate q of a generator or its inverse;
/// for length(b) = length(a) + 1 this is equivalent to a ≤ b.
pub fn folding_check(
    ctx: &GroupContext,
    a: &SignedPermutation,
    b: &SignedPermutation,
) -> Result<bool> {
    if b.length() != a.length() + 1 {
        return Err(Error::LengthGap);
    }
    let q = ctx.compose(a, &ctx.inverse(b));
    for w in ctx.elements() {
        let winv = ctx.inverse(&w);
        for i in 1..=ctx.root_count() {
            let v = ctx.generator(i)?;
            let conj = ctx.compose(&ctx.compose(&w, &v), &winv);
            if conj == q || ctx.inverse(&conj) == q {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// The finite poset of relative positions R\W̃/S with canonical class
/// representatives and the induced Bruhat order.
#[derive(Debug, Clone)]
pub struct PositionSpace {
    ctx: GroupContext,
    r: ParabolicType,
    s: ParabolicType,
    classes: Vec<SignedPermutation>,
    class_of: HashMap<SignedPermutation, usize>,
    /// Dense lookup keyed by (Lehmer code, sign mask); present for small n.
    dense: Option<Vec<u32>>,
    /// up[a] holds b iff ⟦a⟧ ≤ ⟦b⟧.
    up: Vec<BitSet>,
    /// down[b] holds a iff ⟦a⟧ ≤ ⟦b⟧.
    down: Vec<BitSet>,
}

fn lehmer_index(perm: &[usize]) -> usize {
    let n = perm.len();
    let mut idx = 0usize;
    for i in 0..n {
        let smaller_after = (i + 1..n).filter(|&j| perm[j] < perm[i]).count();
        idx = idx * (n - i) + smaller_after;
    }
    idx
}

fn dense_key(w: &SignedPermutation) -> usize {
    let n = w.rank();
    let mut mask = 0usize;
    for (j, &s) in w.signs().iter().enumerate() {
        if s < 0 {
            mask |= 1 << j;
        }
    }
    lehmer_index(w.perm()) << n | mask
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Builds the space of relative positions R\W̃/S.
///
/// Enumerates the whole group, so this is intended for small n; the order is
/// materialized as dense bit matrices for O(1) queries.
pub fn position_space(ctx: &GroupContext, r: &ParabolicType, s: &ParabolicType) -> PositionSpace {
    let elements = ctx.elements();
    let n = ctx.n();
    let mut class_of: HashMap<SignedPermutation, usize> = HashMap::with_capacity(elements.len());
    let mut classes: Vec<SignedPermutation> = Vec::new();
    for w in &elements {
        if class_of.contains_key(w) {
            continue;
        }
        // First unassigned element in ascending order is the minimum of its
        // double coset, hence the canonical representative.
        let idx = classes.len();
        classes.push(w.clone());
        for rr in r.elements() {
            let rw = ctx.compose(rr, w);
            for ss in s.elements() {
                class_of.insert(ctx.compose(&rw, ss), idx);
            }
        }
        debug_assert!(class_of.contains_key(w));
    }

    let count = classes.len();
    let mut up = vec![BitSet::new(count); count];
    let mut down = vec![BitSet::new(count); count];
    for (c, rep) in classes.iter().enumerate() {
        let a_w = lower_set(ctx, rep);
        // ⟦w'⟧ ≤ ⟦w⟧ iff w' ∈ R·A_w·S; that set is a union of classes, so
        // marking the class of each product suffices.
        let mut below = BitSet::new(count);
        for rr in r.elements() {
            for a in &a_w {
                let ra = ctx.compose(rr, a);
                for ss in s.elements() {
                    below.set(class_of[&ctx.compose(&ra, ss)], true);
                }
            }
        }
        for b in below.iter_ones() {
            up[b].set(c, true);
        }
        down[c] = below;
    }

    let dense = if n <= 7 {
        let mut table = vec![u32::MAX; factorial(n) << n];
        for (w, &c) in &class_of {
            table[dense_key(w)] = c as u32;
        }
        Some(table)
    } else {
        None
    };

    PositionSpace {
        ctx: *ctx,
        r: r.clone(),
        s: s.clone(),
        classes,
        class_of,
        dense,
        up,
        down,
    }
}

impl PositionSpace {
    pub fn ctx(&self) -> &GroupContext {
        &self.ctx
    }

    pub fn r(&self) -> &ParabolicType {
        &self.r
    }

    pub fn s(&self) -> &ParabolicType {
        &self.s
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Canonical representatives, ascending in the encoding order.
    pub fn classes(&self) -> &[SignedPermutation] {
        &self.classes
    }

    pub fn class_rep(&self, c: usize) -> &SignedPermutation {
        &self.classes[c]
    }

    /// Class index of an arbitrary element.
    pub fn class_of(&self, w: &SignedPermutation) -> usize {
        let w = self.ctx.canonize(w.clone());
        if let Some(table) = &self.dense {
            table[dense_key(&w)] as usize
        } else {
            self.class_of[&w]
        }
    }

    /// Class lookup from raw factorization output, avoiding allocation in
    /// hot loops. `perm` and `signs` must form a determinant +1 element.
    #[inline]
    pub fn class_of_raw(&self, perm: &[usize], signs: &[i8]) -> usize {
        if let Some(table) = &self.dense {
            let n = perm.len();
            let flip = self.ctx.projective() && signs[0] < 0;
            let mut mask = 0usize;
            for (j, &s) in signs.iter().enumerate() {
                if (s < 0) != flip {
                    mask |= 1 << j;
                }
            }
            table[lehmer_index(perm) << n | mask] as usize
        } else {
            let w = SignedPermutation::new(perm.to_vec(), signs.to_vec())
                .expect("factorization output is unimodular");
            self.class_of(&w)
        }
    }

    /// ⟦a⟧ ≤ ⟦b⟧ by class index.
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.up[a].get(b)
    }

    pub fn down_set(&self, c: usize) -> &BitSet {
        &self.down[c]
    }

    pub fn up_set(&self, c: usize) -> &BitSet {
        &self.up[c]
    }

    /// Indices of classes containing a transverse element.
    pub fn transverse_classes(&self) -> Vec<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        for t in self.ctx.transverse_elements() {
            out.insert(self.class_of(&t));
        }
        out.into_iter().collect()
    }

    /// Verifies reflexivity, antisymmetry and transitivity of the order.
    pub fn verify_partial_order(&self) -> Result<()> {
        let n = self.len();
        for a in 0..n {
            if !self.leq(a, a) {
                return Err(Error::VerificationMismatch(format!(
                    "order not reflexive at class {a}"
                )));
            }
            for b in 0..n {
                if a != b && self.leq(a, b) && self.leq(b, a) {
                    return Err(Error::VerificationMismatch(format!(
                        "order not antisymmetric on classes {a}, {b}"
                    )));
                }
                // a ≤ b forces up(b) ⊆ up(a).
                if self.leq(a, b) && !self.up[b].is_subset(&self.up[a]) {
                    return Err(Error::VerificationMismatch(format!(
                        "order not transitive above classes {a}, {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Hasse edges (lower, upper), ascending.
    pub fn covering_relations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for upper in 0..n {
            for lower in self.down[upper].iter_ones() {
                if lower == upper {
                    continue;
                }
                let strictly_between = self.down[upper]
                    .iter_ones()
                    .any(|z| z != lower && z != upper && self.leq(lower, z));
                if !strictly_between {
                    out.push((lower, upper));
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// An order-reversing involution on a position space given by left
/// multiplication with a transverse element.
#[derive(Debug, Clone)]
pub struct InvolutionAction {
    w0: SignedPermutation,
    map: Vec<usize>,
}

impl InvolutionAction {
    pub fn w0(&self) -> &SignedPermutation {
        &self.w0
    }

    pub fn apply(&self, c: usize) -> usize {
        self.map[c]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn has_fixed_point(&self) -> bool {
        self.map.iter().enumerate().any(|(i, &j)| i == j)
    }
}

/// Builds the left action of a transverse w0 on a position space, verifying
/// the preconditions that make it an order-reversing involution.
pub fn involution_action(
    space: &PositionSpace,
    w0: &SignedPermutation,
) -> Result<InvolutionAction> {
    let ctx = space.ctx();
    if !ctx.is_transverse(w0) {
        return Err(Error::NotTransverse);
    }
    let theta: BTreeSet<usize> = space.r().theta().iter().copied().collect();
    for &i in &theta {
        if !theta.contains(&ctx.opposition(i)?) {
            return Err(Error::ThetaNotIotaInvariant);
        }
    }
    let e: BTreeSet<&SignedPermutation> = space.r().e_subgroup().iter().collect();
    let w0_inv = ctx.inverse(w0);
    for m in space.r().e_subgroup() {
        let conj = ctx.compose(&ctx.compose(w0, m), &w0_inv);
        if !e.contains(&conj) {
            return Err(Error::W0DoesNotNormalizeE);
        }
    }
    let w0_sq = ctx.compose(w0, w0);
    if !e.contains(&w0_sq) {
        return Err(Error::W0SquareNotInE);
    }

    let map: Vec<usize> = space
        .classes()
        .iter()
        .map(|rep| space.class_of(&ctx.compose(w0, rep)))
        .collect();
    for (c, &img) in map.iter().enumerate() {
        if map[img] != c {
            return Err(Error::VerificationMismatch(format!(
                "action is not involutive at class {c}"
            )));
        }
    }
    for a in 0..map.len() {
        for b in 0..map.len() {
            if space.leq(a, b) && !space.leq(map[b], map[a]) {
                return Err(Error::VerificationMismatch(format!(
                    "action does not reverse the order on classes {a}, {b}"
                )));
            }
        }
    }
    Ok(InvolutionAction {
        w0: ctx.canonize(w0.clone()),
        map,
    })
}

/// DOT export of the Hasse diagram, rank-grouped by length of the canonical
/// representative; an involution is drawn as dashed red arrows.
pub fn hasse_dot(space: &PositionSpace, action: Option<&InvolutionAction>) -> String {
    let mut out = String::new();
    out.push_str("digraph bruhat {\n");
    out.push_str("  rankdir=TB;\n  node [shape=box, fontname=\"monospace\"];\n");
    for (c, rep) in space.classes().iter().enumerate() {
        let _ = writeln!(out, "  n{} [label=\"{}\"];", c, rep);
    }
    let mut by_length: HashMap<usize, Vec<usize>> = HashMap::new();
    for (c, rep) in space.classes().iter().enumerate() {
        by_length.entry(rep.length()).or_default().push(c);
    }
    let mut lengths: Vec<usize> = by_length.keys().copied().collect();
    lengths.sort_unstable();
    for len in lengths {
        out.push_str("  { rank=same;");
        for c in &by_length[&len] {
            let _ = write!(out, " n{c};");
        }
        out.push_str(" }\n");
    }
    for (lower, upper) in space.covering_relations() {
        let _ = writeln!(out, "  n{upper} -> n{lower};");
    }
    if let Some(act) = action {
        for (c, &img) in act.map().iter().enumerate() {
            if c < img {
                let _ = writeln!(
                    out,
                    "  n{c} -> n{img} [style=dashed, color=red, dir=both, constraint=false];"
                );
            } else if c == img {
                let _ = writeln!(
                    out,
                    "  n{c} -> n{c} [style=dashed, color=red, constraint=false];"
                );
            }
        }
    }
    out.push_str("}\n");
    out
}

/// The sphere example for odd n: R describes oriented flags of the two middle
/// dimensions up to a simultaneous flip, S stabilizes an oriented line, and
/// w0 is the transverse element with -1 as its middle entry.
pub fn sphere_data(
    ctx: &GroupContext,
) -> Result<(ParabolicType, ParabolicType, SignedPermutation)> {
    let n = ctx.n();
    if n % 2 == 0 || n < 3 {
        return Err(Error::BlockRange { n, k: 0 });
    }
    let mid = (n - 1) / 2; // roots α_mid and α_{mid+1} are removed from θ
    let theta: Vec<usize> = (1..n).filter(|&i| i != mid && i != mid + 1).collect();
    let e: Vec<SignedPermutation> = ctx
        .mbar_elements()
        .into_iter()
        .filter(|m| m.signs()[mid] > 0)
        .collect();
    let r = make_parabolic_type(ctx, &theta, &e)?;

    let eta: Vec<usize> = (2..n).collect();
    let f = mbar_theta(ctx, &eta)?;
    let s = make_parabolic_type(ctx, &eta, &f)?;

    let mut signs = vec![1i8; n];
    signs[mid] = -1; // middle antidiagonal entry, reading from the top right
    if (n * (n - 1) / 2) % 2 == 0 {
        signs[n - 1] = -1;
    }
    let w0 = ctx.antidiagonal(&signs)?;
    Ok((r, s, w0))
}

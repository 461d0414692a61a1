//! Fat, slim and balanced ideals in position spaces, exhaustive enumeration
//! of balanced ideals, and the oriented-Grassmannian existence criterion.

use crate::bits::BitSet;
use crate::bruhat::{InvolutionAction, PositionSpace};
use crate::{Error, Result};

/// A downward-closed set of classes of a position space, stored as a bitset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ideal {
    members: BitSet,
}

impl Ideal {
    /// Wraps a member set after checking downward closure.
    pub fn new(space: &PositionSpace, members: BitSet) -> Result<Self> {
        for x in members.iter_ones() {
            if !space.down_set(x).is_subset(&members) {
                return Err(Error::NotAnIdeal);
            }
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &BitSet {
        &self.members
    }

    pub fn contains(&self, class: usize) -> bool {
        self.members.get(class)
    }

    pub fn len(&self) -> usize {
        self.members.count()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Member classes, ascending.
    pub fn class_indices(&self) -> Vec<usize> {
        self.members.iter_ones().collect()
    }

    /// Right translate I·m as an ideal of the same space.
    pub fn right_translate(
        &self,
        space: &PositionSpace,
        m: &crate::weyl::SignedPermutation,
    ) -> Result<Self> {
        let ctx = space.ctx();
        let mut members = BitSet::new(space.len());
        for c in self.members.iter_ones() {
            members.set(space.class_of(&ctx.compose(space.class_rep(c), m)), true);
        }
        Ideal::new(space, members)
    }
}

/// I is fat when every class outside I maps into I under the involution.
pub fn is_fat(space: &PositionSpace, action: &InvolutionAction, ideal: &Ideal) -> Result<bool> {
    Ideal::new(space, ideal.members.clone())?;
    Ok((0..space.len()).all(|x| ideal.contains(x) || ideal.contains(action.apply(x))))
}

/// I is slim when no class of I maps back into I under the involution.
pub fn is_slim(space: &PositionSpace, action: &InvolutionAction, ideal: &Ideal) -> Result<bool> {
    Ideal::new(space, ideal.members.clone())?;
    Ok((0..space.len()).all(|x| !ideal.contains(x) || !ideal.contains(action.apply(x))))
}

/// Fat and slim: exactly one class of every involution orbit is in I.
pub fn is_balanced(
    space: &PositionSpace,
    action: &InvolutionAction,
    ideal: &Ideal,
) -> Result<bool> {
    Ok(is_fat(space, action, ideal)? && is_slim(space, action, ideal)?)
}

/// The complete list of balanced ideals together with the partition into
/// right-translation classes under the sign group.
#[derive(Debug, Clone)]
pub struct BalancedCensus {
    ideals: Vec<Ideal>,
    mbar_classes: Vec<Vec<usize>>,
}

impl BalancedCensus {
    pub fn count(&self) -> usize {
        self.ideals.len()
    }

    pub fn ideals(&self) -> &[Ideal] {
        &self.ideals
    }

    /// Orbits of the right sign-group action, as sorted ideal indices.
    pub fn mbar_classes(&self) -> &[Vec<usize>] {
        &self.mbar_classes
    }
}

/// Enumerates every balanced ideal of the space under the given involution.
///
/// Backtracking over involution orbits: committing a class to the ideal pulls
/// in its whole down-set and expels the involution images, and vice versa;
/// contradictions prune the branch. Output order is deterministic.
pub fn enumerate_balanced(space: &PositionSpace, action: &InvolutionAction) -> BalancedCensus {
    let order: Vec<usize> = (0..space.len()).collect();
    enumerate_balanced_with_order(space, action, &order)
}

/// Enumeration with an explicit processing order over classes; the resulting
/// census is the same set for any order, which tests exercise.
pub fn enumerate_balanced_with_order(
    space: &PositionSpace,
    action: &InvolutionAction,
    order: &[usize],
) -> BalancedCensus {
    let n = space.len();
    let mut ideals = Vec::new();
    if !action.has_fixed_point() {
        let mut state: Vec<i8> = vec![0; n]; // 0 unknown, 1 in, -1 out
        let mut trail: Vec<usize> = Vec::new();
        search(space, action, order, &mut state, &mut trail, &mut ideals);
    }
    ideals.sort();
    ideals.dedup();
    let mbar_classes = mbar_orbits(space, &ideals);
    BalancedCensus {
        ideals,
        mbar_classes,
    }
}

/// Decides `class` in or out and propagates closure and involution
/// constraints, recording every newly decided class on the trail. Returns
/// false on contradiction.
fn assign(
    space: &PositionSpace,
    action: &InvolutionAction,
    state: &mut [i8],
    trail: &mut Vec<usize>,
    class: usize,
    value: i8,
) -> bool {
    let mut queue = vec![(class, value)];
    while let Some((x, v)) = queue.pop() {
        match state[x] {
            cur if cur == v => continue,
            0 => {
                state[x] = v;
                trail.push(x);
                // One element per orbit: σx takes the opposite value.
                queue.push((action.apply(x), -v));
                if v > 0 {
                    for y in space.down_set(x).iter_ones() {
                        queue.push((y, 1));
                    }
                } else {
                    for y in space.up_set(x).iter_ones() {
                        queue.push((y, -1));
                    }
                }
            }
            _ => return false,
        }
    }
    true
}

fn search(
    space: &PositionSpace,
    action: &InvolutionAction,
    order: &[usize],
    state: &mut Vec<i8>,
    trail: &mut Vec<usize>,
    out: &mut Vec<Ideal>,
) {
    let next = order.iter().copied().find(|&c| state[c] == 0);
    let Some(pivot) = next else {
        let mut members = BitSet::new(space.len());
        for (c, &v) in state.iter().enumerate() {
            if v > 0 {
                members.set(c, true);
            }
        }
        debug_assert!(Ideal::new(space, members.clone()).is_ok());
        out.push(Ideal { members });
        return;
    };
    for value in [1i8, -1] {
        let mark = trail.len();
        if assign(space, action, state, trail, pivot, value) {
            search(space, action, order, state, trail, out);
        }
        while trail.len() > mark {
            state[trail.pop().unwrap()] = 0;
        }
    }
}

fn mbar_orbits(space: &PositionSpace, ideals: &[Ideal]) -> Vec<Vec<usize>> {
    let ctx = space.ctx();
    let index_of = |ideal: &Ideal| ideals.binary_search(ideal).ok();
    let mut seen = vec![false; ideals.len()];
    let mut orbits = Vec::new();
    for start in 0..ideals.len() {
        if seen[start] {
            continue;
        }
        let mut orbit = Vec::new();
        for m in ctx.mbar_elements() {
            let translate = ideals[start]
                .right_translate(space, &m)
                .expect("right translates of ideals are ideals");
            let idx = index_of(&translate).expect("balanced census is closed under translation");
            if !seen[idx] {
                seen[idx] = true;
                orbit.push(idx);
            }
        }
        orbit.sort_unstable();
        orbits.push(orbit);
    }
    orbits
}

/// Shrinks the full ideal to a minimal fat one, which is then balanced.
/// Classes are dropped in decreasing length (ties by encoding order) while
/// fatness and closure allow, until a fixed point.
pub fn minimal_fat_ideal(space: &PositionSpace, action: &InvolutionAction) -> Result<Ideal> {
    if action.has_fixed_point() {
        return Err(Error::FixedPoint);
    }
    let mut removal: Vec<usize> = (0..space.len()).collect();
    removal.sort_by(|&a, &b| {
        let (ra, rb) = (space.class_rep(a), space.class_rep(b));
        rb.length().cmp(&ra.length()).then_with(|| ra.cmp(rb))
    });

    let mut members = BitSet::new(space.len());
    for c in 0..space.len() {
        members.set(c, true);
    }
    loop {
        let mut changed = false;
        for &x in &removal {
            if !members.get(x) {
                continue;
            }
            // Removable: x maximal in the ideal, and σx inside so the orbit
            // of x stays covered.
            let maximal = space
                .up_set(x)
                .iter_ones()
                .all(|y| y == x || !members.get(y));
            let sx = action.apply(x);
            if maximal && sx != x && members.get(sx) {
                members.set(x, false);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let ideal = Ideal::new(space, members)?;
    if !is_balanced(space, action, &ideal)? {
        return Err(Error::VerificationMismatch(
            "minimal fat ideal is not balanced".into(),
        ));
    }
    Ok(ideal)
}

/// Closed-form existence of a balanced ideal for oriented Grassmannians:
/// true iff (n even and k odd) or (n odd and k(n+k+2)/2 odd).
pub fn grassmannian_exists(n: usize, k: usize) -> Result<bool> {
    if n < 3 || k < 1 || k > n - 1 {
        return Err(Error::GrassmannianRange { n, k });
    }
    let case_even = n % 2 == 0 && k % 2 == 1;
    let case_odd = n % 2 == 1 && (k * (n + k + 2) / 2) % 2 == 1;
    Ok(case_even || case_odd)
}

/// Brute-force oracle: scans all (sign, k-subset) states under the induced
/// involution and reports whether it is fixed-point free.
pub fn grassmannian_fixed_point_oracle(n: usize, k: usize) -> Result<bool> {
    if n < 3 || k < 1 || k > n - 1 {
        return Err(Error::GrassmannianRange { n, k });
    }
    // A fixed point needs the subset to be symmetric under i -> n+1-i and
    // the sign factor (-1)^{k(k-1)/2 + Σ(i_j + 1)} to be +1.
    for mask in 0u64..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let symmetric = (0..n).all(|i0| (mask >> i0 & 1) == (mask >> (n - 1 - i0) & 1));
        if !symmetric {
            continue;
        }
        let sum: usize = (0..n)
            .filter(|&i0| mask >> i0 & 1 == 1)
            .map(|i0| i0 + 2)
            .sum();
        let exponent = k * (k - 1) / 2 + sum;
        if exponent % 2 == 0 {
            return Ok(false); // fixed point exists
        }
    }
    Ok(true)
}

//! Permutation-group predicates and the group-order oracle.
//!
//! Everything here works on an explicit [`GeneratorSet`] and knows nothing
//! about prefix-reversal theory; the classifier's rules are cross-checked
//! against these routines.
//!
//! The order computation builds a base and strong generating set. A seeded
//! product-replacement phase grows the chain quickly; the result is accepted
//! only when the chain's orbit product meets a proven upper bound (the order
//! of the orbit-wise symmetric group, halved when every generator is even).
//! Otherwise a deterministic Schreier-generator sweep completes the chain,
//! so the returned order is exact either way.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::perm::{PermError, Permutation};

/// Degrees above this are rejected by [`group_order`].
pub const MAX_ORACLE_DEGREE: usize = 128;

pub type GroupOrder = BigUint;

/// A set of points of `{1..n}`.
pub type PointSet = BTreeSet<usize>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error("point {point} out of range 1..={degree}")]
    PointOutOfRange { point: usize, degree: usize },
    #[error("generators do not act transitively")]
    NotTransitive,
    #[error("points must differ")]
    EqualPoints,
    #[error("degree {0} exceeds the oracle limit")]
    DegreeTooLarge(usize),
    #[error("parts do not partition 1..={0}")]
    NotAPartition(usize),
    #[error("permutation is not a full cycle")]
    NotNCycle,
    #[error("expected 1 <= a < c < b <= n, got a={a}, b={b}, c={c}, n={n}")]
    BadOrdering {
        n: usize,
        a: usize,
        b: usize,
        c: usize,
    },
    #[error("generator list is empty")]
    EmptyGenerators,
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// Generators of a permutation group of degree `n`. Identity elements and
/// duplicates are dropped on construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    degree: usize,
    generators: Vec<Permutation>,
}

impl GeneratorSet {
    pub fn new(degree: usize, generators: Vec<Permutation>) -> Result<GeneratorSet, GroupError> {
        if generators.is_empty() {
            return Err(GroupError::EmptyGenerators);
        }
        let mut kept: Vec<Permutation> = Vec::with_capacity(generators.len());
        for g in generators {
            if g.degree() != degree {
                return Err(PermError::DegreeMismatch {
                    left: degree,
                    right: g.degree(),
                }
                .into());
            }
            if !g.is_identity() && !kept.contains(&g) {
                kept.push(g);
            }
        }
        Ok(GeneratorSet {
            degree,
            generators: kept,
        })
    }

    /// `{r_i : i in indices}` at degree `n`.
    pub fn reversals(degree: usize, indices: &[usize]) -> Result<GeneratorSet, GroupError> {
        let gens = indices
            .iter()
            .map(|&i| Permutation::reversal(degree, i))
            .collect::<Result<Vec<_>, _>>()?;
        GeneratorSet::new(degree, gens)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    fn check_point(&self, x: usize) -> Result<(), GroupError> {
        if x == 0 || x > self.degree {
            Err(GroupError::PointOutOfRange {
                point: x,
                degree: self.degree,
            })
        } else {
            Ok(())
        }
    }
}

/// The orbits of a group, each sorted, ordered by smallest point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitPartition(pub Vec<Vec<usize>>);

/// A partition of `{1..n}`; parts sorted, ordered by smallest point.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct BlockPartition {
    parts: Vec<Vec<usize>>,
}

impl BlockPartition {
    /// Validates that `parts` partitions `{1..n}` and normalizes the order.
    pub fn new(degree: usize, parts: Vec<Vec<usize>>) -> Result<BlockPartition, GroupError> {
        let mut seen = vec![false; degree];
        let mut parts: Vec<Vec<usize>> = parts
            .into_iter()
            .filter(|p| !p.is_empty())
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        for part in &parts {
            for &x in part {
                if x == 0 || x > degree || seen[x - 1] {
                    return Err(GroupError::NotAPartition(degree));
                }
                seen[x - 1] = true;
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(GroupError::NotAPartition(degree));
        }
        parts.sort_unstable_by_key(|p| p[0]);
        Ok(BlockPartition { parts })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn degree(&self) -> usize {
        self.parts.iter().map(|p| p.len()).sum()
    }

    /// Common part size, if all parts have the same size.
    pub fn block_size(&self) -> Option<usize> {
        let first = self.parts.first()?.len();
        self.parts.iter().all(|p| p.len() == first).then_some(first)
    }

    /// More than one part and not all singletons.
    pub fn is_nontrivial(&self) -> bool {
        self.parts.len() > 1 && self.parts.iter().any(|p| p.len() > 1)
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when already joined.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }

    fn classes(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let r = self.find(x);
            by_root[r].push(x + 1);
        }
        by_root.into_iter().filter(|c| !c.is_empty()).collect()
    }
}

/// Closure of `{x}` under the generators.
pub fn orbit_of(gens: &GeneratorSet, x: usize) -> Result<PointSet, GroupError> {
    gens.check_point(x)?;
    let n = gens.degree();
    let mut seen = vec![false; n];
    let mut queue = vec![x - 1];
    seen[x - 1] = true;
    while let Some(p) = queue.pop() {
        for g in gens.generators() {
            let q = g.image0(p);
            if !seen[q] {
                seen[q] = true;
                queue.push(q);
            }
        }
    }
    Ok((0..n).filter(|&p| seen[p]).map(|p| p + 1).collect())
}

pub fn orbits(gens: &GeneratorSet) -> OrbitPartition {
    let n = gens.degree();
    let mut uf = UnionFind::new(n);
    for g in gens.generators() {
        for p in 0..n {
            uf.union(p, g.image0(p));
        }
    }
    let mut classes = uf.classes();
    classes.sort_unstable_by_key(|c| c[0]);
    OrbitPartition(classes)
}

pub fn is_transitive(gens: &GeneratorSet) -> bool {
    gens.degree() <= 1
        || orbit_of(gens, 1)
            .map(|o| o.len() == gens.degree())
            .unwrap_or(false)
}

/// Finest block system in which `a` and `b` share a block.
pub fn minimal_block(
    gens: &GeneratorSet,
    a: usize,
    b: usize,
) -> Result<BlockPartition, GroupError> {
    gens.check_point(a)?;
    gens.check_point(b)?;
    if a == b {
        return Err(GroupError::EqualPoints);
    }
    if !is_transitive(gens) {
        return Err(GroupError::NotTransitive);
    }
    Ok(minimal_block_unchecked(gens, a - 1, b - 1))
}

fn minimal_block_unchecked(gens: &GeneratorSet, a: usize, b: usize) -> BlockPartition {
    let n = gens.degree();
    let mut uf = UnionFind::new(n);
    uf.union(a, b);
    let mut pending = vec![(a, b)];
    while let Some((x, y)) = pending.pop() {
        for g in gens.generators() {
            let (gx, gy) = (g.image0(x), g.image0(y));
            if uf.union(gx, gy) {
                pending.push((gx, gy));
            }
        }
    }
    let mut classes = uf.classes();
    classes.sort_unstable_by_key(|c| c[0]);
    BlockPartition { parts: classes }
}

/// Some nontrivial block system, or `None` when the action is primitive.
pub fn find_nontrivial_block_system(
    gens: &GeneratorSet,
) -> Result<Option<BlockPartition>, GroupError> {
    if !is_transitive(gens) {
        return Err(GroupError::NotTransitive);
    }
    Ok((1..gens.degree())
        .map(|x| minimal_block_unchecked(gens, 0, x))
        .find(|p| p.parts.len() > 1))
}

pub fn all_even(gens: &GeneratorSet) -> bool {
    gens.generators().iter().all(|g| !g.parity().is_odd())
}

/// True iff every generator maps `delta` onto itself and `delta` is a
/// nonempty proper subset of `{1..n}`.
pub fn verify_invariant_set(gens: &GeneratorSet, delta: &PointSet) -> bool {
    let n = gens.degree();
    if delta.is_empty() || delta.len() >= n || delta.iter().any(|&x| x == 0 || x > n) {
        return false;
    }
    gens.generators().iter().all(|g| {
        delta
            .iter()
            .all(|&x| delta.contains(&(g.image0(x - 1) + 1)))
    })
}

/// True iff `parts` is a nontrivial partition whose parts are permuted by
/// every generator. Equal part sizes are also required when the action is
/// transitive.
pub fn verify_block_partition(
    gens: &GeneratorSet,
    parts: &[Vec<usize>],
) -> Result<bool, GroupError> {
    let n = gens.degree();
    let partition = BlockPartition::new(n, parts.to_vec())?;
    if !partition.is_nontrivial() {
        return Ok(false);
    }
    let mut part_of = vec![0usize; n];
    for (i, part) in partition.parts.iter().enumerate() {
        for &x in part {
            part_of[x - 1] = i;
        }
    }
    for g in gens.generators() {
        for part in &partition.parts {
            let target = part_of[g.image0(part[0] - 1)];
            let size = partition.parts[target].len();
            if size != part.len() || part.iter().any(|&x| part_of[g.image0(x - 1)] != target) {
                return Ok(false);
            }
        }
    }
    if is_transitive(gens) && partition.block_size().is_none() {
        return Ok(false);
    }
    Ok(true)
}

/// Orbit-wise symmetric group order, halved when every generator is even.
fn order_upper_bound(gens: &GeneratorSet) -> BigUint {
    let mut bound = BigUint::one();
    for orbit in orbits(gens).0 {
        for f in 2..=orbit.len() {
            bound *= f as u32;
        }
    }
    if all_even(gens) && bound > BigUint::one() {
        bound /= 2u32;
    }
    bound
}

struct Level {
    base: usize,
    /// Indices into `StabChain::strong`.
    gens: Vec<usize>,
    orbit: Vec<usize>,
    /// `u_p^{-1}` for each orbit point `p`, where `u_p(base) = p`.
    inv_trans: Vec<Option<Permutation>>,
}

impl Level {
    fn new(n: usize, base: usize) -> Level {
        let mut inv_trans = vec![None; n];
        inv_trans[base] = Some(Permutation::identity(n));
        Level {
            base,
            gens: Vec::new(),
            orbit: vec![base],
            inv_trans,
        }
    }
}

/// Base and strong generating set under construction.
struct StabChain {
    n: usize,
    strong: Vec<Permutation>,
    strong_inv: Vec<Permutation>,
    levels: Vec<Level>,
}

impl StabChain {
    fn new(n: usize) -> StabChain {
        StabChain {
            n,
            strong: Vec::new(),
            strong_inv: Vec::new(),
            levels: Vec::new(),
        }
    }

    /// Strips `g` through levels `from..`; returns the residue and the level
    /// where stripping stopped (`levels.len()` if it went all the way).
    fn sift(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (i, level) in self.levels.iter().enumerate().skip(from) {
            let beta = g.image0(level.base);
            match &level.inv_trans[beta] {
                Some(inv) => g = inv.compose_unchecked(&g),
                None => return (g, i),
            }
        }
        let depth = self.levels.len();
        (g, depth)
    }

    /// Adds `h` as a strong generator on levels `lo..=hi`, opening a new level
    /// when `hi == levels.len()`.
    fn add_generator(&mut self, h: Permutation, lo: usize, hi: usize) {
        if hi == self.levels.len() {
            let moved = (0..self.n)
                .find(|&p| h.image0(p) != p)
                .expect("non-identity residue");
            self.levels.push(Level::new(self.n, moved));
        }
        let idx = self.strong.len();
        self.strong_inv.push(h.inverse());
        self.strong.push(h);
        for i in lo..=hi {
            self.levels[i].gens.push(idx);
            self.extend_orbit(i, idx);
        }
    }

    fn extend_orbit(&mut self, level_idx: usize, new_gen: usize) {
        let StabChain {
            strong,
            strong_inv,
            levels,
            ..
        } = self;
        let level = &mut levels[level_idx];
        let old_len = level.orbit.len();
        let push = |level: &mut Level, from: usize, s: usize| {
            let to = strong[s].image0(from);
            if level.inv_trans[to].is_none() {
                let inv_from = level.inv_trans[from].as_ref().expect("orbit point");
                level.inv_trans[to] = Some(inv_from.compose_unchecked(&strong_inv[s]));
                level.orbit.push(to);
            }
        };
        for oi in 0..old_len {
            let p = level.orbit[oi];
            push(level, p, new_gen);
        }
        let mut oi = old_len;
        while oi < level.orbit.len() {
            let p = level.orbit[oi];
            for gi in 0..level.gens.len() {
                let s = level.gens[gi];
                push(level, p, s);
            }
            oi += 1;
        }
    }

    fn order(&self) -> BigUint {
        self.levels
            .iter()
            .fold(BigUint::one(), |acc, l| acc * BigUint::from(l.orbit.len()))
    }

    /// Product-replacement phase; stops once `bound` is reached or after a
    /// run of elements that already sift.
    fn grow_randomly(&mut self, gens: &[Permutation], bound: &BigUint) {
        const SEED: u64 = 0x5eed_cafe;
        const WARMUP: usize = 40;
        const PATIENCE: usize = 24;
        let mut rng = ChaCha8Rng::seed_from_u64(SEED);
        let slots = gens.len().max(10);
        let mut state: Vec<Permutation> =
            (0..slots).map(|i| gens[i % gens.len()].clone()).collect();
        let mut acc = Permutation::identity(self.n);
        let step = |state: &mut Vec<Permutation>, acc: &mut Permutation, rng: &mut ChaCha8Rng| {
            let i = rng.gen_range(0..slots);
            let mut j = rng.gen_range(0..slots - 1);
            if j >= i {
                j += 1;
            }
            let other = if rng.gen_bool(0.5) {
                state[j].clone()
            } else {
                state[j].inverse()
            };
            state[i] = if rng.gen_bool(0.5) {
                state[i].compose_unchecked(&other)
            } else {
                other.compose_unchecked(&state[i])
            };
            *acc = acc.compose_unchecked(&state[i]);
        };
        for _ in 0..WARMUP {
            step(&mut state, &mut acc, &mut rng);
        }
        let mut quiet = 0;
        while quiet < PATIENCE {
            step(&mut state, &mut acc, &mut rng);
            let (h, j) = self.sift(acc.clone(), 0);
            if j == self.levels.len() && h.is_identity() {
                quiet += 1;
                continue;
            }
            quiet = 0;
            // Level 0 already carries the input generators.
            let lo = if j == 0 { 0 } else { 1 };
            self.add_generator(h, lo, j);
            if &self.order() == bound {
                return;
            }
        }
    }

    /// Deterministic Schreier-Sims completion of the current chain.
    fn complete(&mut self) {
        let mut tested: Vec<HashSet<(usize, usize)>> = vec![HashSet::new(); self.levels.len()];
        let mut i = self.levels.len() as isize - 1;
        while i >= 0 {
            let li = i as usize;
            let mut restart = None;
            'scan: for oi in 0.. {
                if oi >= self.levels[li].orbit.len() {
                    break;
                }
                for gp in 0.. {
                    if gp >= self.levels[li].gens.len() {
                        break;
                    }
                    if !tested[li].insert((oi, gp)) {
                        continue;
                    }
                    let level = &self.levels[li];
                    let beta = level.orbit[oi];
                    let s = level.gens[gp];
                    let gamma = self.strong[s].image0(beta);
                    let u_beta = level.inv_trans[beta].as_ref().unwrap().inverse();
                    let inv_gamma = level.inv_trans[gamma].as_ref().unwrap();
                    let schreier =
                        inv_gamma.compose_unchecked(&self.strong[s].compose_unchecked(&u_beta));
                    let (h, j) = self.sift(schreier, li + 1);
                    if j < self.levels.len() || !h.is_identity() {
                        self.add_generator(h, li + 1, j);
                        tested.resize_with(self.levels.len(), HashSet::new);
                        restart = Some(j);
                        break 'scan;
                    }
                }
            }
            match restart {
                Some(j) => i = j as isize,
                None => i -= 1,
            }
        }
    }
}

fn build_chain(gens: &GeneratorSet) -> StabChain {
    let n = gens.degree();
    let mut chain = StabChain::new(n);
    let Some(first) = gens.generators().first() else {
        return chain;
    };
    let moved = (0..n)
        .find(|&p| first.image0(p) != p)
        .expect("identity filtered out");
    chain.levels.push(Level::new(n, moved));
    for g in gens.generators() {
        let idx = chain.strong.len();
        chain.strong.push(g.clone());
        chain.strong_inv.push(g.inverse());
        chain.levels[0].gens.push(idx);
        chain.extend_orbit(0, idx);
    }
    let bound = order_upper_bound(gens);
    chain.grow_randomly(gens.generators(), &bound);
    if chain.order() != bound {
        chain.complete();
    }
    chain
}

/// Exact order of the group generated by `gens`.
pub fn group_order(gens: &GeneratorSet) -> Result<GroupOrder, GroupError> {
    if gens.degree() > MAX_ORACLE_DEGREE {
        return Err(GroupError::DegreeTooLarge(gens.degree()));
    }
    Ok(build_chain(gens).order())
}

pub fn factorial_big(n: usize) -> BigUint {
    (2..=n as u32).fold(BigUint::one(), |acc, f| acc * f)
}

/// True iff the order of the generated group is `n!`.
pub fn generates_sym(gens: &GeneratorSet) -> Result<bool, GroupError> {
    Ok(group_order(gens)? == factorial_big(gens.degree()))
}

/// Same answer as [`generates_sym`], but rejects intransitive, imprimitive,
/// and all-even generator sets before building a chain. Used by large scans.
pub fn generates_sym_screened(gens: &GeneratorSet) -> Result<bool, GroupError> {
    let n = gens.degree();
    if n > MAX_ORACLE_DEGREE {
        return Err(GroupError::DegreeTooLarge(n));
    }
    if n <= 1 {
        return Ok(true);
    }
    if !is_transitive(gens) || all_even(gens) {
        return Ok(false);
    }
    if n >= 3 && find_nontrivial_block_system(gens)?.is_some() {
        return Ok(false);
    }
    generates_sym(gens)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// For an `n`-cycle `sigma` and points `a != b`: finds `q` with
/// `sigma^q(a) = b` and reports whether `gcd(q, n) = 1`, which holds iff
/// `sigma` and the transposition `(a b)` generate the symmetric group.
pub fn lemma_ncycle_transposition(
    sigma: &Permutation,
    a: usize,
    b: usize,
) -> Result<bool, GroupError> {
    let n = sigma.degree();
    for x in [a, b] {
        if x == 0 || x > n {
            return Err(GroupError::PointOutOfRange {
                point: x,
                degree: n,
            });
        }
    }
    if a == b {
        return Err(GroupError::EqualPoints);
    }
    if !sigma.is_full_cycle() {
        return Err(GroupError::NotNCycle);
    }
    Ok(gcd(cycle_distance(sigma, a, b), n) == 1)
}

/// Smallest `q > 0` with `sigma^q(a) = b`, assuming both lie on one cycle.
pub fn cycle_distance(sigma: &Permutation, a: usize, b: usize) -> usize {
    let mut x = a - 1;
    let mut q = 0;
    loop {
        x = sigma.image0(x);
        q += 1;
        if x == b - 1 || q > sigma.degree() {
            return q;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThreeCycleOutcome {
    FullSym,
    Alternating,
    Smaller,
}

/// Subgroup generated by `(1 2 ... n)` and a 3-cycle on `a < c < b`,
/// decided by `gcd(b - a, c - a, n)` and the parity of `n`.
pub fn lemma_ncycle_3cycle(
    n: usize,
    a: usize,
    b: usize,
    c: usize,
) -> Result<ThreeCycleOutcome, GroupError> {
    if !(1 <= a && a < c && c < b && b <= n) {
        return Err(GroupError::BadOrdering { n, a, b, c });
    }
    Ok(if gcd(gcd(b - a, c - a), n) != 1 {
        ThreeCycleOutcome::Smaller
    } else if n % 2 == 0 {
        ThreeCycleOutcome::FullSym
    } else {
        ThreeCycleOutcome::Alternating
    })
}

/// Classifies a group order as `n!`, `n!/2`, or smaller.
pub fn classify_order(n: usize, order: &BigUint) -> ThreeCycleOutcome {
    let full = factorial_big(n);
    if *order == full {
        ThreeCycleOutcome::FullSym
    } else if n >= 2 && order * 2u32 == full {
        ThreeCycleOutcome::Alternating
    } else {
        ThreeCycleOutcome::Smaller
    }
}

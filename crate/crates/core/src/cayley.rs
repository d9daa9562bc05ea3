//! Metrics of cubic pancake graphs: Cayley graphs of `Sym_n` with connection
//! set `{r_n, r_m, r_k}`.
//!
//! Vertices are permutations indexed by Lehmer rank. The neighbors of `π`
//! are `π∘r_i`, i.e. the one-line form of `π` with a prefix reversed.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::classifier::Triple;
use crate::grouptest::{generates_sym, GroupError};
use crate::perm::{factorial, lehmer_rank, lehmer_unrank, Permutation, ReversalWord};

/// Largest degree accepted by the BFS (one byte per vertex).
pub const MAX_BFS_DEGREE: usize = 11;

/// Largest degree for which the Hamiltonian search materializes adjacency.
pub const MAX_HAMILTON_DEGREE: usize = 9;

pub const DEFAULT_GIRTH_CAP: usize = 32;

pub const DEFAULT_HAMILTON_BUDGET: u64 = 2_000_000;

const UNSEEN: u8 = u8::MAX;

const HAMILTON_SEED: u64 = 0x4a3_1c7e;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CayleyError {
    #[error("{0} does not generate the symmetric group; the graph is disconnected")]
    Disconnected(Triple),
    #[error("degree {0} exceeds the BFS limit of {MAX_BFS_DEGREE}")]
    DegreeTooLargeForBfs(usize),
    #[error("degree {0} exceeds the Hamiltonian search limit of {MAX_HAMILTON_DEGREE}")]
    DegreeTooLargeForHamilton(usize),
    #[error("no cycle of length <= {cap}")]
    BudgetExceeded { cap: usize },
    #[error("word {0} is not cyclically reduced")]
    NotCyclicallyReduced(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubicPancakeGraph {
    triple: Triple,
}

impl CubicPancakeGraph {
    pub fn new(triple: Triple) -> Self {
        CubicPancakeGraph { triple }
    }

    pub fn triple(&self) -> Triple {
        self.triple
    }

    pub fn degree(&self) -> usize {
        self.triple.n
    }

    /// Reversal indices in the order `n, m, k`.
    pub fn indices(&self) -> [usize; 3] {
        [self.triple.n, self.triple.m, self.triple.k]
    }

    /// `n!`, or `None` if it does not fit in `u64`.
    pub fn vertex_count(&self) -> Option<u64> {
        (self.triple.n <= crate::perm::MAX_RANK_DEGREE).then(|| factorial(self.triple.n))
    }

    pub fn is_connected(&self) -> Result<bool, CayleyError> {
        Ok(generates_sym(&self.triple.generators())?)
    }

    fn require_connected(&self) -> Result<(), CayleyError> {
        if self.is_connected()? {
            Ok(())
        } else {
            Err(CayleyError::Disconnected(self.triple))
        }
    }

    /// Whether `b = a∘r_i` for one of the three reversals.
    pub fn adjacent(&self, a: &Permutation, b: &Permutation) -> bool {
        self.indices().iter().any(|&i| {
            let mut img = a.raw().to_vec();
            img[..i].reverse();
            img == b.raw()
        })
    }
}

/// Distance distribution from one vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BfsMetrics {
    /// Eccentricity of the start vertex.
    pub diameter: usize,
    /// Number of vertices at each distance.
    pub levels: Vec<u64>,
}

impl BfsMetrics {
    pub fn reached(&self) -> u64 {
        self.levels.iter().sum()
    }
}

/// Diameter and distance distribution from the identity; by
/// vertex-transitivity the eccentricity of the identity is the diameter.
pub fn bfs_metrics(g: &CubicPancakeGraph) -> Result<BfsMetrics, CayleyError> {
    if g.degree() > MAX_BFS_DEGREE {
        return Err(CayleyError::DegreeTooLargeForBfs(g.degree()));
    }
    g.require_connected()?;
    eccentricity_from(g, &Permutation::identity(g.degree()))
}

/// BFS from an arbitrary vertex over its connected component.
pub fn eccentricity_from(
    g: &CubicPancakeGraph,
    start: &Permutation,
) -> Result<BfsMetrics, CayleyError> {
    let n = g.degree();
    if n > MAX_BFS_DEGREE {
        return Err(CayleyError::DegreeTooLargeForBfs(n));
    }
    let idx = g.indices();
    let mut dist = vec![UNSEEN; factorial(n) as usize];
    let root = lehmer_rank(start.raw());
    dist[root as usize] = 0;
    let mut frontier = vec![root as u32];
    let mut levels = vec![1u64];
    let mut buf = vec![0u8; n];
    let mut depth: u8 = 0;
    while !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::with_capacity(frontier.len() * 2);
        for &v in &frontier {
            lehmer_unrank(v as u64, &mut buf);
            for &i in &idx {
                buf[..i].reverse();
                let w = lehmer_rank(&buf) as usize;
                if dist[w] == UNSEEN {
                    dist[w] = depth;
                    next.push(w as u32);
                }
                buf[..i].reverse();
            }
        }
        if !next.is_empty() {
            levels.push(next.len() as u64);
        }
        frontier = next;
    }
    Ok(BfsMetrics {
        diameter: levels.len() - 1,
        levels,
    })
}

/// A shortest-cycle class, stored in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CycleClass {
    word: ReversalWord,
}

impl CycleClass {
    pub fn word(&self) -> &ReversalWord {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }
}

impl fmt::Display for CycleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.word.fmt(f)
    }
}

/// Lexicographic maximum over all rotations of `w` and of its reversal.
pub fn canonicalize_cycle_word(w: &ReversalWord) -> Result<ReversalWord, CayleyError> {
    if !w.is_cyclically_reduced() {
        return Err(CayleyError::NotCyclicallyReduced(w.to_string()));
    }
    let fwd = w.indices();
    let rev: Vec<usize> = fwd.iter().rev().copied().collect();
    let len = fwd.len();
    let mut best: Vec<usize> = fwd.to_vec();
    for seq in [fwd, &rev[..]] {
        for s in 0..len {
            let cand: Vec<usize> = seq[s..].iter().chain(&seq[..s]).copied().collect();
            if cand > best {
                best = cand;
            }
        }
    }
    Ok(ReversalWord::new(w.degree(), best).expect("same letters"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GirthResult {
    pub girth: usize,
    pub classes: Vec<CycleClass>,
}

/// Girth and canonical shortest-cycle classes, found by enumerating
/// non-backtracking words of increasing length that evaluate to the
/// identity.
pub fn girth_and_cycles(g: &CubicPancakeGraph, cap: usize) -> Result<GirthResult, CayleyError> {
    let n = g.degree();
    let idx = g.indices();
    let mut images: Vec<u8> = (0..n as u8).collect();
    let mut word = Vec::with_capacity(cap);
    for len in 3..=cap {
        let mut found = BTreeSet::new();
        enumerate(&idx, len, &mut images, &mut word, &mut found);
        if !found.is_empty() {
            let classes = found
                .into_iter()
                .map(|w: Vec<usize>| {
                    let word = ReversalWord::new(n, w).expect("valid letters");
                    CycleClass {
                        word: canonicalize_cycle_word(&word).expect("cyclically reduced"),
                    }
                })
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            return Ok(GirthResult {
                girth: len,
                classes,
            });
        }
    }
    Err(CayleyError::BudgetExceeded { cap })
}

fn enumerate(
    idx: &[usize; 3],
    len: usize,
    images: &mut [u8],
    word: &mut Vec<usize>,
    found: &mut BTreeSet<Vec<usize>>,
) {
    if word.len() == len {
        if word[0] != word[len - 1] && images.iter().enumerate().all(|(p, &v)| p == v as usize) {
            found.insert(word.clone());
        }
        return;
    }
    for &i in idx {
        if word.last() == Some(&i) {
            continue;
        }
        images[..i].reverse();
        word.push(i);
        enumerate(idx, len, images, word, found);
        word.pop();
        images[..i].reverse();
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HamiltonicityResult {
    /// Vertex ranks in cycle order, starting at the identity.
    Hamiltonian { cycle: Vec<u32> },
    /// Search budget exhausted after this many node expansions.
    Unknown { expanded: u64 },
}

impl HamiltonicityResult {
    pub fn is_hamiltonian(&self) -> bool {
        matches!(self, HamiltonicityResult::Hamiltonian { .. })
    }
}

/// A 2-factor of a cubic graph, stored as the excluded neighbor slot of each
/// vertex (the excluded edges form a perfect matching). A Hamiltonian cycle
/// is a 2-factor with one component.
struct TwoFactor<'a> {
    adj: &'a [[u32; 3]],
    excluded: Vec<u8>,
    component: Vec<u32>,
    components: usize,
    next_id: u32,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> TwoFactor<'a> {
    /// Starts from the 2-factor avoiding the first generator: the cosets of
    /// the dihedral group generated by the other two.
    fn new(adj: &'a [[u32; 3]]) -> Self {
        let total = adj.len();
        let mut f = TwoFactor {
            adj,
            excluded: vec![0; total],
            component: vec![u32::MAX; total],
            components: 0,
            next_id: 0,
            stamp: vec![0; total],
            epoch: 0,
        };
        for v in 0..total as u32 {
            if f.component[v as usize] == u32::MAX {
                let id = f.fresh_id();
                for x in f.cycle_through(v) {
                    f.component[x as usize] = id;
                }
                f.components += 1;
            }
        }
        f
    }

    fn fresh_id(&mut self) -> u32 {
        self.next_id += 1;
        self.next_id
    }

    fn matched(&self, v: u32) -> u32 {
        self.adj[v as usize][self.excluded[v as usize] as usize]
    }

    fn kept(&self, v: u32) -> impl Iterator<Item = u32> + '_ {
        let skip = self.excluded[v as usize] as usize;
        self.adj[v as usize]
            .iter()
            .enumerate()
            .filter(move |&(s, _)| s != skip)
            .map(|(_, &w)| w)
    }

    fn cycle_through(&self, start: u32) -> Vec<u32> {
        let mut cycle = vec![start];
        let (mut prev, mut cur) = (start, self.kept(start).next().expect("two kept edges"));
        while cur != start {
            cycle.push(cur);
            let next = self.kept(cur).find(|&w| w != prev).expect("two kept edges");
            (prev, cur) = (cur, next);
        }
        cycle
    }

    /// Simple cycles through `v0` alternating matched and kept edges,
    /// starting with the matched edge, of length at most `max_len`.
    fn alternating_cycles(&self, v0: u32, max_len: usize) -> Vec<Vec<u32>> {
        let mut found = Vec::new();
        let mut path = vec![v0];
        self.extend_alternating(&mut path, max_len, &mut found);
        found
    }

    fn extend_alternating(&self, path: &mut Vec<u32>, max_len: usize, found: &mut Vec<Vec<u32>>) {
        let v = *path.last().expect("nonempty path");
        if path.len() % 2 == 1 {
            let w = self.matched(v);
            if !path.contains(&w) {
                path.push(w);
                self.extend_alternating(path, max_len, found);
                path.pop();
            }
            return;
        }
        for w in self.kept(v) {
            if w == path[0] && path.len() >= 4 {
                found.push(path.clone());
            } else if path.len() < max_len && !path.contains(&w) {
                path.push(w);
                self.extend_alternating(path, max_len, found);
                path.pop();
            }
        }
    }

    fn slot(&self, v: u32, w: u32) -> u8 {
        self.adj[v as usize]
            .iter()
            .position(|&x| x == w)
            .expect("adjacent") as u8
    }

    /// Swaps matched and kept edges along `cycle`; keeps the result if
    /// `accept` approves the change in component count, else reverts.
    fn try_switch(&mut self, cycle: &[u32], accept: impl FnOnce(usize, usize) -> bool) {
        let len = cycle.len();
        let saved: Vec<u8> = cycle.iter().map(|&v| self.excluded[v as usize]).collect();
        for (i, &v) in cycle.iter().enumerate() {
            let partner = if i % 2 == 0 {
                cycle[(i + len - 1) % len]
            } else {
                cycle[(i + 1) % len]
            };
            self.excluded[v as usize] = self.slot(v, partner);
        }
        let mut old_ids: Vec<u32> = cycle.iter().map(|&v| self.component[v as usize]).collect();
        old_ids.sort_unstable();
        old_ids.dedup();
        self.epoch += 1;
        let mut rebuilt = Vec::new();
        for &v in cycle {
            if self.stamp[v as usize] != self.epoch {
                let c = self.cycle_through(v);
                for &x in &c {
                    self.stamp[x as usize] = self.epoch;
                }
                rebuilt.push(c);
            }
        }
        let proposed = self.components - old_ids.len() + rebuilt.len();
        if accept(self.components, proposed) {
            for c in rebuilt {
                let id = self.fresh_id();
                for x in c {
                    self.component[x as usize] = id;
                }
            }
            self.components = proposed;
        } else {
            for (&v, &s) in cycle.iter().zip(&saved) {
                self.excluded[v as usize] = s;
            }
        }
    }
}

/// Longest alternating cycle tried by the Hamiltonian search.
const MAX_SWITCH_LEN: usize = 16;

fn materialize(g: &CubicPancakeGraph) -> Vec<[u32; 3]> {
    let n = g.degree();
    let idx = g.indices();
    let total = factorial(n) as usize;
    let mut buf = vec![0u8; n];
    (0..total)
        .map(|v| {
            lehmer_unrank(v as u64, &mut buf);
            idx.map(|i| {
                buf[..i].reverse();
                let w = lehmer_rank(&buf) as u32;
                buf[..i].reverse();
                w
            })
        })
        .collect()
}

/// Budgeted randomized search for a Hamiltonian cycle. Starting from a
/// 2-factor, each step switches a short alternating cycle and keeps the
/// switch when it merges components (sideways and slightly worse moves are
/// kept with small probability). Deterministic for a given budget; `budget`
/// counts switch attempts. Never reports non-Hamiltonicity.
pub fn hamiltonian_cycle(
    g: &CubicPancakeGraph,
    budget: u64,
) -> Result<HamiltonicityResult, CayleyError> {
    if g.degree() > MAX_HAMILTON_DEGREE {
        return Err(CayleyError::DegreeTooLargeForHamilton(g.degree()));
    }
    g.require_connected()?;
    let adj = materialize(g);
    let mut factor = TwoFactor::new(&adj);
    let mut rng = ChaCha8Rng::seed_from_u64(HAMILTON_SEED);
    let mut expanded = 0u64;
    while factor.components > 1 {
        if expanded == budget {
            return Ok(HamiltonicityResult::Unknown { expanded });
        }
        expanded += 1;
        let v0 = rng.gen_range(0..adj.len() as u32);
        let cycles = factor.alternating_cycles(v0, MAX_SWITCH_LEN);
        let Some(cycle) = cycles.choose(&mut rng) else {
            continue;
        };
        let roll: f64 = rng.gen();
        factor.try_switch(cycle, |old, new| {
            new < old || (new == old && roll < 0.5) || (new == old + 1 && roll < 0.02)
        });
    }
    Ok(HamiltonicityResult::Hamiltonian {
        cycle: factor.cycle_through(0),
    })
}

/// Independent check of a Hamiltonian cycle: a permutation of all vertex
/// ranks with consecutive and closing adjacency.
pub fn verify_hamiltonian_cycle(g: &CubicPancakeGraph, cycle: &[u32]) -> bool {
    let n = g.degree();
    let Some(total) = g.vertex_count() else {
        return false;
    };
    if cycle.len() as u64 != total {
        return false;
    }
    let mut seen = vec![false; total as usize];
    for &v in cycle {
        if v as u64 >= total || std::mem::replace(&mut seen[v as usize], true) {
            return false;
        }
    }
    let perm = |r: u32| Permutation::unrank(n, r as u64).expect("rank in range");
    (0..cycle.len()).all(|i| g.adjacent(&perm(cycle[i]), &perm(cycle[(i + 1) % cycle.len()])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HamiltonianStatus {
    Yes,
    Unknown,
    Skipped,
}

impl HamiltonianStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            HamiltonianStatus::Yes => "yes",
            HamiltonianStatus::Unknown => "unknown",
            HamiltonianStatus::Skipped => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphMetrics {
    pub triple: Triple,
    pub vertices: u64,
    pub diameter: usize,
    pub levels: Vec<u64>,
    pub girth: usize,
    pub shortest_cycles: Vec<CycleClass>,
    pub hamiltonian: HamiltonianStatus,
}

impl GraphMetrics {
    pub const CSV_HEADER: [&'static str; 8] = [
        "n",
        "m",
        "k",
        "vertices",
        "diameter",
        "girth",
        "shortest_cycle_classes",
        "hamiltonian",
    ];

    pub fn csv_record(&self) -> Vec<String> {
        let classes: Vec<String> = self.shortest_cycles.iter().map(|c| c.to_string()).collect();
        vec![
            self.triple.n.to_string(),
            self.triple.m.to_string(),
            self.triple.k.to_string(),
            self.vertices.to_string(),
            self.diameter.to_string(),
            self.girth.to_string(),
            classes.join(";"),
            self.hamiltonian.as_str().to_string(),
        ]
    }
}

/// Diameter, girth, shortest cycles and, if `hamilton_budget` is given, a
/// budgeted Hamiltonicity check.
pub fn graph_metrics(t: Triple, hamilton_budget: Option<u64>) -> Result<GraphMetrics, CayleyError> {
    let g = CubicPancakeGraph::new(t);
    let bfs = bfs_metrics(&g)?;
    let girth = girth_and_cycles(&g, DEFAULT_GIRTH_CAP)?;
    let hamiltonian = match hamilton_budget {
        None => HamiltonianStatus::Skipped,
        Some(budget) => match hamiltonian_cycle(&g, budget)? {
            HamiltonicityResult::Hamiltonian { cycle } if verify_hamiltonian_cycle(&g, &cycle) => {
                HamiltonianStatus::Yes
            }
            _ => HamiltonianStatus::Unknown,
        },
    };
    Ok(GraphMetrics {
        triple: t,
        vertices: bfs.reached(),
        diameter: bfs.diameter,
        levels: bfs.levels,
        girth: girth.girth,
        shortest_cycles: girth.classes,
        hamiltonian,
    })
}

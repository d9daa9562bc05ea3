use std::collections::{BTreeSet, HashMap, VecDeque};

use pancake_core::cayley::{
    bfs_metrics, eccentricity_from, girth_and_cycles, graph_metrics, CayleyError,
    CubicPancakeGraph, DEFAULT_GIRTH_CAP,
};
use pancake_core::classifier::Triple;
use pancake_core::grouptest::generates_sym;
use pancake_core::perm::{factorial, Permutation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn generating(n: usize) -> Vec<Triple> {
    Triple::all_of_degree(n)
        .filter(|t| generates_sym(&t.generators()).unwrap())
        .collect()
}

/// Explicit graph on arrangements, built without the library.
fn materialize(t: Triple) -> (Vec<Vec<usize>>, HashMap<Vec<usize>, usize>) {
    let start: Vec<usize> = (1..=t.n).collect();
    let mut index = HashMap::from([(start.clone(), 0)]);
    let mut verts = vec![start];
    let mut i = 0;
    while i < verts.len() {
        for r in [t.n, t.m, t.k] {
            let mut w = verts[i].clone();
            w[..r].reverse();
            if !index.contains_key(&w) {
                index.insert(w.clone(), verts.len());
                verts.push(w);
            }
        }
        i += 1;
    }
    (verts, index)
}

/// Girth from one BFS tree: the shortest closed walk closed by a non-tree
/// edge. Every vertex lies on a shortest cycle, so one root suffices.
fn girth_by_bfs(t: Triple) -> usize {
    let (verts, index) = materialize(t);
    let nbrs = |v: usize| -> Vec<usize> {
        [t.n, t.m, t.k]
            .iter()
            .map(|&r| {
                let mut w = verts[v].clone();
                w[..r].reverse();
                index[&w]
            })
            .collect()
    };
    let mut best = usize::MAX;
    let root = 0;
    let mut dist = vec![usize::MAX; verts.len()];
    let mut parent = vec![usize::MAX; verts.len()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for w in nbrs(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                parent[w] = v;
                queue.push_back(w);
            } else if parent[v] != w {
                best = best.min(dist[v] + dist[w] + 1);
            }
        }
    }
    best
}

#[test]
fn girth_matches_explicit_bfs_up_to_6() {
    for n in 4..=6 {
        for t in generating(n) {
            let g = CubicPancakeGraph::new(t);
            let found = girth_and_cycles(&g, DEFAULT_GIRTH_CAP).unwrap();
            assert_eq!(found.girth, girth_by_bfs(t), "{t}");
        }
    }
}

#[test]
fn diameter_matches_explicit_bfs_up_to_7() {
    for n in 4..=7 {
        for t in generating(n) {
            let (verts, index) = materialize(t);
            assert_eq!(verts.len() as u64, factorial(n));
            let mut dist = vec![usize::MAX; verts.len()];
            dist[0] = 0;
            let mut queue = VecDeque::from([0]);
            while let Some(v) = queue.pop_front() {
                for r in [t.n, t.m, t.k] {
                    let mut w = verts[v].clone();
                    w[..r].reverse();
                    let j = index[&w];
                    if dist[j] == usize::MAX {
                        dist[j] = dist[v] + 1;
                        queue.push_back(j);
                    }
                }
            }
            let g = CubicPancakeGraph::new(t);
            assert_eq!(
                bfs_metrics(&g).unwrap().diameter,
                *dist.iter().max().unwrap(),
                "{t}"
            );
        }
    }
}

#[test]
fn eccentricity_is_the_same_from_random_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 4..=7 {
        for t in generating(n) {
            let g = CubicPancakeGraph::new(t);
            let base = bfs_metrics(&g).unwrap();
            for _ in 0..5 {
                let start = Permutation::unrank(n, rng.gen_range(0..factorial(n))).unwrap();
                assert_eq!(eccentricity_from(&g, &start).unwrap(), base, "{t}");
            }
        }
    }
}

#[test]
fn bfs_levels_cover_every_vertex_up_to_9() {
    for n in 4..=9 {
        for t in generating(n) {
            let m = bfs_metrics(&CubicPancakeGraph::new(t)).unwrap();
            assert_eq!(m.levels.iter().sum::<u64>(), factorial(n), "{t}");
            assert_eq!(m.levels[0], 1);
            assert_eq!(m.levels[1], 3);
        }
    }
}

#[test]
fn shortest_cycle_classes_are_canonical_identity_words() {
    for n in 4..=7 {
        for t in generating(n) {
            let found = girth_and_cycles(&CubicPancakeGraph::new(t), DEFAULT_GIRTH_CAP).unwrap();
            let words: BTreeSet<String> = found.classes.iter().map(|c| c.to_string()).collect();
            assert_eq!(words.len(), found.classes.len());
            for c in &found.classes {
                assert_eq!(c.len(), found.girth);
                assert!(c.word().eval().is_identity(), "{t}: {c}");
                assert!(c.word().is_cyclically_reduced());
            }
        }
    }
}

#[test]
fn disconnected_graph_is_reported() {
    let g = CubicPancakeGraph::new(Triple::new(8, 6, 4).unwrap());
    assert!(!g.is_connected().unwrap());
    assert!(matches!(bfs_metrics(&g), Err(CayleyError::Disconnected(_))));
}

#[test]
fn resource_guard_rejects_large_bfs() {
    let t = Triple::new(12, 11, 10).unwrap();
    assert!(matches!(
        graph_metrics(t, None),
        Err(CayleyError::DegreeTooLargeForBfs(12))
    ));
}

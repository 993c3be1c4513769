//! Canonical codes against a brute-force isomorphism oracle on every tree with
//! at most 7 nodes, plus random relabelling invariance on generated trees.

use std::collections::HashMap;

use bcmrt::canonical::{
    canonical_edge_rooted, canonical_edge_rooted_shape, canonical_rooted, canonical_unrooted,
    canonical_unrooted_shape,
};
use bcmrt::generator::sample_tree;
use bcmrt::{project, Setting, Shape};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prufer_decode(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::new();
    for &s in seq {
        let leaf = (0..n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&v| degree[v] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

fn all_labelled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n == 1 {
        return vec![vec![]];
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    (0..total)
        .map(|mut code| {
            let seq: Vec<usize> = (0..len)
                .map(|_| {
                    let d = code % n;
                    code /= n;
                    d
                })
                .collect();
            prufer_decode(&seq, n)
        })
        .collect()
}

fn adjacency(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    adj
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                rec(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn pair_bit(n: usize, a: usize, b: usize) -> u64 {
    let (i, j) = (a.min(b), a.max(b));
    1u64 << (i * n + j)
}

/// Minimum adjacency bitmask over permutations satisfying `keep`.
fn brute_canon(n: usize, edges: &[(usize, usize)], perms: &[Vec<usize>], keep: impl Fn(&[usize]) -> bool) -> u64 {
    perms
        .iter()
        .filter(|p| keep(p))
        .map(|p| edges.iter().map(|&(a, b)| pair_bit(n, p[a], p[b])).sum::<u64>())
        .min()
        .unwrap()
}

/// Equal codes iff equal oracle keys; returns the number of classes.
fn check_consistent<C: std::hash::Hash + Eq + Clone + std::fmt::Debug>(pairs: &[(C, u64)]) -> usize {
    let mut by_code: HashMap<C, u64> = HashMap::new();
    let mut by_canon: HashMap<u64, C> = HashMap::new();
    for (code, canon) in pairs {
        let c = *by_code.entry(code.clone()).or_insert(*canon);
        assert_eq!(c, *canon, "one code for two isomorphism classes");
        let k = by_canon.entry(*canon).or_insert_with(|| code.clone());
        assert_eq!(k, code, "two codes for one isomorphism class");
    }
    by_code.len()
}

#[test]
fn unrooted_codes_match_isomorphism_classes() {
    // free trees on 1..=7 nodes
    let expected = [1usize, 1, 1, 2, 3, 6, 11];
    for n in 1..=7 {
        let perms = permutations(n);
        let pairs: Vec<_> = all_labelled_trees(n)
            .into_iter()
            .map(|edges| {
                let form = canonical_unrooted(&adjacency(n, &edges)).unwrap();
                // decoding and re-encoding is the identity on codes
                assert_eq!(canonical_unrooted_shape(&form.decode()).unwrap(), form);
                (form, brute_canon(n, &edges, &perms, |_| true))
            })
            .collect();
        assert_eq!(check_consistent(&pairs), expected[n - 1], "n = {n}");
    }
}

#[test]
fn rooted_codes_match_isomorphism_classes() {
    // rooted trees on 1..=6 nodes
    let expected = [1usize, 1, 2, 4, 9, 20];
    for n in 1..=6 {
        let perms = permutations(n);
        let mut pairs = Vec::new();
        for edges in all_labelled_trees(n) {
            let adj = adjacency(n, &edges);
            for root in 0..n {
                let form = canonical_rooted(&adj, root).unwrap();
                pairs.push((form, brute_canon(n, &edges, &perms, |p| p[root] == 0)));
            }
        }
        assert_eq!(check_consistent(&pairs), expected[n - 1], "n = {n}");
    }
}

#[test]
fn edge_rooted_codes_match_isomorphism_classes() {
    for n in 2..=6 {
        let perms = permutations(n);
        let mut pairs = Vec::new();
        for edges in all_labelled_trees(n) {
            let adj = adjacency(n, &edges);
            for &(a, b) in &edges {
                let form = canonical_edge_rooted(&adj, (a, b)).unwrap();
                assert_eq!(canonical_edge_rooted_shape(&form.decode()).unwrap(), form);
                let canon = brute_canon(n, &edges, &perms, |p| p[a].max(p[b]) == 1);
                pairs.push((form, canon));
            }
        }
        check_consistent(&pairs);
    }
}

fn relabel(adj: &[Vec<usize>], perm: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); adj.len()];
    for (v, list) in adj.iter().enumerate() {
        out[perm[v]] = list.iter().map(|&w| perm[w]).collect();
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn codes_survive_random_relabelling(n in 1usize..=32, q in 0.0f64..=1.0, seed: u64, perm_seed: u64) {
        let tree = sample_tree(n, q, seed).unwrap();
        let adj = bcmrt::tree::adjacency_of(&tree);
        let mut perm: Vec<usize> = (0..adj.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
        let moved = relabel(&adj, &perm);

        let unrooted = project(&tree, Setting::UnrootedUnlabelled).key();
        prop_assert_eq!(&canonical_unrooted(&moved).unwrap(), &unrooted);

        let rooted = project(&tree, Setting::RootedUnlabelled).key();
        prop_assert_eq!(&canonical_edge_rooted(&moved, (perm[0], perm[1])).unwrap(), &rooted);

        // the unrooted representative is isomorphic to the original
        let shape = project(&tree, Setting::UnrootedUnlabelled);
        prop_assert_eq!(shape.as_shape().node_count(), 2 * n);
    }

    #[test]
    fn labelled_key_ignores_pair_order(n in 1usize..=24, q in 0.0f64..=1.0, seed: u64, flips: u32) {
        // swapping the members of chosen pairs relabels nodes without
        // changing time labels
        let tree = sample_tree(n, q, seed).unwrap();
        let swap = |v: u32| if (flips >> ((v / 2) % 32)) & 1 == 1 { v ^ 1 } else { v };
        let mut parent = vec![bcmrt::tree::NO_PARENT; 2 * n];
        for (v, &p) in tree.parents().iter().enumerate().skip(2) {
            parent[swap(v as u32) as usize] = swap(p);
        }
        let moved = bcmrt::TimeLabelledTree::from_parents(n, parent).unwrap();
        let key = project(&tree, Setting::Labelled).key();
        prop_assert_eq!(project(&tree, Setting::Labelled), project(&moved, Setting::Labelled));
        // the canonical representative is a tree of the same class, and the
        // same for both pair orders
        let rep = key.labelled_representative().unwrap();
        prop_assert_eq!(&project(&rep, Setting::Labelled).key(), &key);
        prop_assert_eq!(&rep, &project(&moved, Setting::Labelled).key().labelled_representative().unwrap());
    }
}

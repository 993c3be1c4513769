//! Observables of a single tree.
//!
//! Functions are generic over [`Shape`] where the statistic is defined in
//! every setting, and over [`TimeLabelled`] where it needs time labels. The
//! `ObservedTree` wrappers at the bottom check the setting at runtime.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::clustering::Coloring;
use crate::error::{Error, Result};
use crate::observe::ObservedTree;
use crate::tree::{forest_sizes, NodeType, Shape, TimeLabelled, TimeLabelledTree, NO_PARENT};

/// Degree histogram `k ↦ N_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DegreeProfile {
    pub counts: BTreeMap<u32, u64>,
}

impl DegreeProfile {
    pub fn get(&self, k: u32) -> u64 {
        self.counts.get(&k).copied().unwrap_or(0)
    }
}

/// Root-edge split. `r` is absent unless node types are observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitStatistics {
    pub size_plus: u64,
    pub product: u64,
    pub r: Option<u64>,
}

pub fn degrees<S: Shape + ?Sized>(tree: &S) -> Vec<u32> {
    let parent = tree.parents();
    let mut deg = vec![0u32; parent.len()];
    for (v, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            deg[v] += 1;
            deg[p as usize] += 1;
        }
    }
    if let Some((a, b)) = tree.root_edge() {
        deg[a as usize] += 1;
        deg[b as usize] += 1;
    }
    deg
}

pub fn degree_counts<S: Shape + ?Sized>(tree: &S) -> DegreeProfile {
    let mut counts = BTreeMap::new();
    for d in degrees(tree) {
        *counts.entry(d).or_insert(0) += 1;
    }
    DegreeProfile { counts }
}

/// Number of leaves, `N_1`, without building the histogram.
pub fn leaf_count<S: Shape + ?Sized>(tree: &S) -> u64 {
    degrees(tree).iter().filter(|&&d| d == 1).count() as u64
}

/// `Z_n`: number of time labels `k ≥ 2` whose two nodes share a parent.
pub fn collision_count<T: TimeLabelled + ?Sized>(tree: &T) -> u64 {
    tree.parents()
        .chunks_exact(2)
        .skip(1)
        .filter(|pair| pair[0] == pair[1])
        .count() as u64
}

/// `M_T^σ`: edges whose endpoints get the same colour under `σ`.
///
/// Node `v` at time `t` gets colour `bit(v) ⊕ ¬σ_t`, so an edge `(v, p)` is
/// monochromatic iff `σ_{t(v)} ⊕ σ_{t(p)} = bit(v) ⊕ bit(p)`. The root edge
/// joins a pair and is never monochromatic.
pub fn monochromatic_count<T: TimeLabelled + ?Sized>(tree: &T, sigma: &Coloring) -> Result<u64> {
    let n = tree.steps();
    if sigma.len() != n {
        return Err(Error::Length {
            expected: n,
            found: sigma.len(),
        });
    }
    let bits = sigma.bits();
    let parent = tree.parents();
    let mut m = 0u64;
    for (v, &p) in parent.iter().enumerate().skip(2) {
        let lhs = bits[v / 2] ^ bits[p as usize / 2];
        let rhs = (v as u32 ^ p) & 1 == 1;
        m += (lhs == rhs) as u64;
    }
    Ok(m)
}

/// Sizes of the two components left when the root edge is removed, plus the
/// cross-type sum `R` when types are known.
pub fn root_split<S: Shape + ?Sized>(tree: &S) -> Result<SplitStatistics> {
    let (a, b) = tree
        .root_edge()
        .ok_or_else(|| Error::Structure("root_split needs a root edge".into()))?;
    let size = forest_sizes(tree);
    let total = tree.node_count() as u64;
    let size_plus = size[a as usize] as u64;
    debug_assert_eq!(size_plus + size[b as usize] as u64, total);
    let r = tree.node_type(0).map(|_| {
        // A-counts per side; every side has size = A + B
        let side = component_of(tree, a as usize);
        let mut a_plus = 0u64;
        let mut a_total = 0u64;
        for (v, &on_side) in side.iter().enumerate().take(tree.node_count()) {
            if tree.node_type(v) == Some(NodeType::A) {
                a_total += 1;
                a_plus += on_side as u64;
            }
        }
        let b_plus = size_plus - a_plus;
        let a_minus = a_total - a_plus;
        let b_minus = (total - size_plus) - a_minus;
        a_plus * b_minus + b_plus * a_minus
    });
    Ok(SplitStatistics {
        size_plus,
        product: size_plus * (total - size_plus),
        r,
    })
}

/// Indicator of the forest component containing `root`.
fn component_of<S: Shape + ?Sized>(tree: &S, root: usize) -> Vec<bool> {
    let parent = tree.parents();
    let mut inside = vec![false; parent.len()];
    inside[root] = true;
    for v in 0..parent.len() {
        let p = parent[v];
        if p != NO_PARENT && inside[p as usize] {
            inside[v] = true;
        }
    }
    inside
}

/// `S_n = Σ_e |T^{e+}||T^{e−}|`, the sum of all pairwise distances.
pub fn sum_distance<S: Shape + ?Sized>(tree: &S) -> u128 {
    let size = forest_sizes(tree);
    let parent = tree.parents();
    let total = parent.len() as u128;
    let mut s: u128 = 0;
    for (v, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            let k = size[v] as u128;
            s += k * (total - k);
        }
    }
    if let Some((a, b)) = tree.root_edge() {
        s += size[a as usize] as u128 * size[b as usize] as u128;
    }
    s
}

/// `K_n = Σ_e Σ_Λ |T^{e+}_Λ||T^{e−}_Λ̄|`, summed over every edge.
pub fn cross_type_k(tree: &TimeLabelledTree) -> u128 {
    let parent = tree.parents();
    let n = tree.n() as u128;
    // (A, B) counts below every node in the forest
    let mut cnt = vec![[0u32; 2]; parent.len()];
    for (v, c) in cnt.iter_mut().enumerate() {
        c[v & 1] = 1;
    }
    for v in (0..parent.len()).rev() {
        let p = parent[v];
        if p != NO_PARENT {
            let [a, b] = cnt[v];
            cnt[p as usize][0] += a;
            cnt[p as usize][1] += b;
        }
    }
    let edge = |[a, b]: [u32; 2]| -> u128 {
        let (a, b) = (a as u128, b as u128);
        a * (n - b) + b * (n - a)
    };
    edge(cnt[0]) + cnt[2..parent.len()].iter().map(|&c| edge(c)).sum::<u128>()
}

/// Distance from `v` to the nearer time-1 node (its forest root).
pub fn node_level<S: Shape + ?Sized>(tree: &S, v: usize) -> u32 {
    let parent = tree.parents();
    let mut level = 0;
    let mut cur = parent[v];
    while cur != NO_PARENT {
        level += 1;
        cur = parent[cur as usize];
    }
    level
}

/// Number of descendants of `v` (itself included), not crossing the root edge.
pub fn descendant_count<S: Shape + ?Sized>(tree: &S, v: usize) -> u64 {
    forest_sizes(tree)[v] as u64
}

/// `m(σ) = #{i : σ_i = π_i}`.
pub fn overlap(sigma: &Coloring, pi: &Coloring) -> Result<usize> {
    if sigma.len() != pi.len() {
        return Err(Error::Length {
            expected: pi.len(),
            found: sigma.len(),
        });
    }
    Ok(sigma
        .bits()
        .iter()
        .zip(pi.bits())
        .filter(|(a, b)| a == b)
        .count())
}

// ---------------------------------------------------------------------------
// setting-checked wrappers

impl ObservedTree {
    pub fn degree_counts(&self) -> DegreeProfile {
        degree_counts(self.as_shape())
    }

    pub fn collision_count(&self) -> Result<u64> {
        Ok(collision_count(self.labelled()?))
    }

    pub fn root_split(&self) -> Result<SplitStatistics> {
        root_split(self.rooted()?)
    }

    pub fn sum_distance(&self) -> u128 {
        sum_distance(self.as_shape())
    }
}

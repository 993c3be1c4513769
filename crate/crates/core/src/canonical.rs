//! Canonical codes for unlabelled (and time-labelled) trees.
//!
//! Codes follow the AHU scheme with integer class ids assigned level by level
//! (by height), so encoding is `O(N log N)` even for path-like trees. The byte
//! code of a rooted tree is `'(' [label] child-codes ')'` with children in
//! increasing class order, where the class order is: height, then label, then
//! the sorted list of child classes. That order only depends on isomorphism
//! classes, so two trees get equal codes iff they are isomorphic.
//!
//! * unrooted trees: minimum code over the (at most two) centroids;
//! * trees with a distinguished edge: rooted at a virtual node subdividing it;
//! * labelled trees: as the previous case, with each node carrying its time
//!   label (the virtual node carries label 0).

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::tree::{LabelledTree, Shape, ShapeTree, TimeLabelledTree, NO_PARENT};

const OPEN: u8 = b'(';
const CLOSE: u8 = b')';

/// Which kind of tree a code describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormKind {
    Rooted,
    Unrooted,
    EdgeRooted,
    Labelled,
}

/// Canonical code of a tree up to isomorphism in its setting.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm {
    kind: FormKind,
    code: Vec<u8>,
}

impl CanonicalForm {
    pub fn kind(&self) -> FormKind {
        self.kind
    }

    pub fn code(&self) -> &[u8] {
        &self.code
    }

    /// Lowercase hex of the code bytes.
    pub fn hex(&self) -> String {
        hex::encode(&self.code)
    }

    /// Number of tree nodes described (the virtual root excluded).
    pub fn node_count(&self) -> usize {
        let opens = self.code.iter().filter(|&&b| b == OPEN).count();
        match self.kind {
            FormKind::EdgeRooted => opens - 1,
            // labels may contain the byte value of '(', so count by parsing
            FormKind::Labelled => self.decode().node_count(),
            _ => opens,
        }
    }

    /// Pre-order parent array of a representative tree. Edge-rooted and
    /// labelled codes drop the virtual root and report the subdivided edge
    /// as the root edge.
    pub fn decode(&self) -> ShapeTree {
        let labelled = self.kind == FormKind::Labelled;
        let virtual_root = matches!(self.kind, FormKind::EdgeRooted | FormKind::Labelled);
        let mut parent: Vec<u32> = Vec::with_capacity(self.code.len() / 2);
        let mut stack: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < self.code.len() {
            match self.code[i] {
                OPEN => {
                    let id = parent.len() as u32;
                    parent.push(stack.last().copied().unwrap_or(NO_PARENT));
                    stack.push(id);
                    i += if labelled { 5 } else { 1 };
                }
                _ => {
                    stack.pop();
                    i += 1;
                }
            }
        }
        if !virtual_root {
            return ShapeTree::new(parent, None);
        }
        // drop node 0 (virtual); its two children become roots
        let mut shifted: Vec<u32> = parent[1..]
            .iter()
            .map(|&p| if p == 0 { NO_PARENT } else { p - 1 })
            .collect();
        let roots: Vec<u32> = shifted
            .iter()
            .enumerate()
            .filter(|(_, &p)| p == NO_PARENT)
            .map(|(v, _)| v as u32)
            .collect();
        debug_assert_eq!(roots.len(), 2);
        shifted.shrink_to_fit();
        ShapeTree::new(shifted, Some((roots[0], roots[1])))
    }

    /// Time-labelled representative of a labelled code. Within each pair the
    /// member met first in pre-order takes the lower slot, so the pair order
    /// depends only on the isomorphism class and carries no type information.
    pub fn labelled_representative(&self) -> Result<TimeLabelledTree> {
        if self.kind != FormKind::Labelled {
            return Err(Error::Structure(format!("{:?} code has no time labels", self.kind)));
        }
        // (label, pre-order parent) per node, virtual root first
        let mut nodes: Vec<(u32, u32)> = Vec::new();
        let mut stack: Vec<u32> = Vec::new();
        let mut i = 0;
        while i < self.code.len() {
            if self.code[i] == OPEN {
                let label = u32::from_be_bytes(self.code[i + 1..i + 5].try_into().expect("4-byte label"));
                nodes.push((label, stack.last().copied().unwrap_or(NO_PARENT)));
                stack.push(nodes.len() as u32 - 1);
                i += 5;
            } else {
                stack.pop();
                i += 1;
            }
        }
        let n = (nodes.len() - 1) / 2;
        let mut filled = vec![0u32; n + 1];
        let mut slot = vec![NO_PARENT; nodes.len()];
        for (v, &(t, _)) in nodes.iter().enumerate().skip(1) {
            if t == 0 || t as usize > n || filled[t as usize] == 2 {
                return Err(Error::Structure(format!("label {t} does not fit {n} pairs")));
            }
            slot[v] = 2 * (t - 1) + filled[t as usize];
            filled[t as usize] += 1;
        }
        let mut parent = vec![NO_PARENT; 2 * n];
        for (v, &(_, p)) in nodes.iter().enumerate().skip(1) {
            if p != 0 {
                parent[slot[v] as usize] = slot[p as usize];
            }
        }
        TimeLabelledTree::from_parents(n, parent)
    }
}

// ---------------------------------------------------------------------------
// compact adjacency

struct Graph {
    offsets: Vec<u32>,
    targets: Vec<u32>,
}

impl Graph {
    fn from_edges(n: usize, edges: &[(u32, u32)]) -> Self {
        let mut deg = vec![0u32; n + 1];
        for &(a, b) in edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        let mut offsets = vec![0u32; n + 1];
        for v in 0..n {
            offsets[v + 1] = offsets[v] + deg[v];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0u32; 2 * edges.len()];
        for &(a, b) in edges {
            targets[fill[a as usize] as usize] = b;
            fill[a as usize] += 1;
            targets[fill[b as usize] as usize] = a;
            fill[b as usize] += 1;
        }
        Graph { offsets, targets }
    }

    fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    fn neighbours(&self, v: usize) -> &[u32] {
        &self.targets[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    /// BFS order and parents from `root`; errors unless the graph is a tree.
    fn bfs(&self, root: usize, edge_count: usize) -> Result<(Vec<u32>, Vec<u32>)> {
        let n = self.len();
        if n == 0 {
            return Err(Error::Structure("empty tree".into()));
        }
        if edge_count + 1 != n {
            return Err(Error::Structure(format!(
                "{n} nodes but {edge_count} edges; not a tree"
            )));
        }
        let mut parent = vec![NO_PARENT; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut queue = VecDeque::with_capacity(n);
        seen[root] = true;
        queue.push_back(root as u32);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in self.neighbours(v as usize) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    parent[w as usize] = v;
                    queue.push_back(w);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Structure("graph is not connected".into()));
        }
        Ok((order, parent))
    }
}

fn edges_of_adjacency(adj: &[Vec<usize>]) -> Result<Vec<(u32, u32)>> {
    let n = adj.len();
    let mut edges = Vec::new();
    let mut half = 0usize;
    for (v, list) in adj.iter().enumerate() {
        for &w in list {
            if w >= n {
                return Err(Error::Structure(format!("neighbour {w} out of range")));
            }
            if w == v {
                return Err(Error::Structure(format!("self-loop at {v}")));
            }
            half += 1;
            if v < w {
                edges.push((v as u32, w as u32));
            }
        }
    }
    if half != 2 * edges.len() {
        return Err(Error::Structure("adjacency is not symmetric".into()));
    }
    Ok(edges)
}

fn edges_of_shape<S: Shape + ?Sized>(tree: &S) -> Vec<(u32, u32)> {
    let mut edges: Vec<(u32, u32)> = tree
        .parents()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != NO_PARENT)
        .map(|(v, &p)| (p, v as u32))
        .collect();
    if let Some(e) = tree.root_edge() {
        edges.push(e);
    }
    edges
}

// ---------------------------------------------------------------------------
// AHU encoding

/// Encodes the tree hanging from `root` given BFS order and parents.
fn encode(order: &[u32], parent: &[u32], labels: Option<&[u32]>) -> Vec<u8> {
    let n = order.len();
    // children in CSR, grouped by parent
    let mut count = vec![0u32; n + 1];
    for &p in parent {
        if p != NO_PARENT {
            count[p as usize] += 1;
        }
    }
    let mut start = vec![0u32; n + 1];
    for v in 0..n {
        start[v + 1] = start[v] + count[v];
    }
    let mut fill = start.clone();
    let mut kids = vec![0u32; n.saturating_sub(1)];
    for &v in order {
        let p = parent[v as usize];
        if p != NO_PARENT {
            kids[fill[p as usize] as usize] = v;
            fill[p as usize] += 1;
        }
    }

    let mut height = vec![0u32; n];
    for &v in order.iter().rev() {
        let p = parent[v as usize];
        if p != NO_PARENT {
            height[p as usize] = height[p as usize].max(height[v as usize] + 1);
        }
    }
    let max_h = height.iter().copied().max().unwrap_or(0) as usize;
    let mut by_height: Vec<Vec<u32>> = vec![Vec::new(); max_h + 1];
    for v in 0..n {
        by_height[height[v] as usize].push(v as u32);
    }

    let label = |v: u32| labels.map_or(0, |l| l[v as usize]);
    let mut class = vec![0u32; n];
    let mut next = 0u32;
    let mut child_classes: Vec<u32> = Vec::new();
    for level in &by_height {
        // sort each node's children by class and remember their class lists
        child_classes.clear();
        let mut spans = Vec::with_capacity(level.len());
        for &v in level {
            let (a, b) = (start[v as usize] as usize, start[v as usize + 1] as usize);
            kids[a..b].sort_unstable_by_key(|&c| class[c as usize]);
            let from = child_classes.len();
            child_classes.extend(kids[a..b].iter().map(|&c| class[c as usize]));
            spans.push((from, child_classes.len()));
        }
        let mut idx: Vec<usize> = (0..level.len()).collect();
        let key = |i: usize| {
            let (a, b) = spans[i];
            (label(level[i]), &child_classes[a..b])
        };
        idx.sort_unstable_by(|&i, &j| key(i).cmp(&key(j)));
        let mut prev: Option<usize> = None;
        for &i in &idx {
            if let Some(pi) = prev {
                if key(pi) != key(i) {
                    next += 1;
                }
            }
            class[level[i] as usize] = next;
            prev = Some(i);
        }
        next += 1;
    }

    let per_node = if labels.is_some() { 6 } else { 2 };
    let mut code = Vec::with_capacity(per_node * n);
    // iterative pre-order walk: (node, next child offset)
    let mut stack: Vec<(u32, u32)> = vec![(order[0], start[order[0] as usize])];
    code.push(OPEN);
    if labels.is_some() {
        code.extend_from_slice(&label(order[0]).to_be_bytes());
    }
    while let Some(top) = stack.last_mut() {
        let (v, pos) = *top;
        if pos < start[v as usize + 1] {
            top.1 += 1;
            let c = kids[pos as usize];
            code.push(OPEN);
            if labels.is_some() {
                code.extend_from_slice(&label(c).to_be_bytes());
            }
            stack.push((c, start[c as usize]));
        } else {
            code.push(CLOSE);
            stack.pop();
        }
    }
    code
}

fn rooted_code(g: &Graph, edge_count: usize, root: usize, labels: Option<&[u32]>) -> Result<Vec<u8>> {
    let (order, parent) = g.bfs(root, edge_count)?;
    Ok(encode(&order, &parent, labels))
}

/// Centroids (one or two) of a tree.
fn centroids(g: &Graph, edge_count: usize) -> Result<Vec<usize>> {
    let (order, parent) = g.bfs(0, edge_count)?;
    let n = g.len();
    let mut size = vec![1u32; n];
    let mut heaviest = vec![0u32; n];
    for &v in order.iter().rev() {
        let p = parent[v as usize];
        if p != NO_PARENT {
            size[p as usize] += size[v as usize];
            heaviest[p as usize] = heaviest[p as usize].max(size[v as usize]);
        }
    }
    let found: Vec<usize> = (0..n)
        .filter(|&v| {
            let up = n as u32 - size[v];
            2 * heaviest[v].max(up) <= n as u32
        })
        .collect();
    debug_assert!(!found.is_empty() && found.len() <= 2);
    Ok(found)
}

fn unrooted_from_graph(g: &Graph, edge_count: usize) -> Result<CanonicalForm> {
    let mut best: Option<Vec<u8>> = None;
    for c in centroids(g, edge_count)? {
        let code = rooted_code(g, edge_count, c, None)?;
        if best.as_ref().is_none_or(|b| code < *b) {
            best = Some(code);
        }
    }
    Ok(CanonicalForm {
        kind: FormKind::Unrooted,
        code: best.expect("a tree has a centroid"),
    })
}

/// Subdivides `edge` by a new node `n` and encodes from it.
fn edge_rooted_from_edges(
    n: usize,
    edges: &[(u32, u32)],
    edge: (u32, u32),
    labels: Option<&[u32]>,
) -> Result<Vec<u8>> {
    let norm = |(a, b): (u32, u32)| (a.min(b), a.max(b));
    let target = norm(edge);
    let mut sub: Vec<(u32, u32)> = Vec::with_capacity(edges.len() + 1);
    let mut found = false;
    for &e in edges {
        if !found && norm(e) == target {
            found = true;
        } else {
            sub.push(e);
        }
    }
    if !found {
        return Err(Error::Structure(format!(
            "root edge ({}, {}) is not an edge of the tree",
            edge.0, edge.1
        )));
    }
    let v = n as u32;
    sub.push((v, edge.0));
    sub.push((v, edge.1));
    let g = Graph::from_edges(n + 1, &sub);
    let ext_labels: Option<Vec<u32>> = labels.map(|l| {
        let mut x = l.to_vec();
        x.push(0);
        x
    });
    rooted_code(&g, sub.len(), n, ext_labels.as_deref())
}

// ---------------------------------------------------------------------------
// public entry points

/// Canonical code of the tree given by `adj` rooted at `root`.
pub fn canonical_rooted(adj: &[Vec<usize>], root: usize) -> Result<CanonicalForm> {
    let edges = edges_of_adjacency(adj)?;
    if root >= adj.len() {
        return Err(Error::Structure(format!("root {root} out of range")));
    }
    let g = Graph::from_edges(adj.len(), &edges);
    Ok(CanonicalForm {
        kind: FormKind::Rooted,
        code: rooted_code(&g, edges.len(), root, None)?,
    })
}

/// Canonical code of the unrooted tree given by `adj`.
pub fn canonical_unrooted(adj: &[Vec<usize>]) -> Result<CanonicalForm> {
    let edges = edges_of_adjacency(adj)?;
    let g = Graph::from_edges(adj.len(), &edges);
    unrooted_from_graph(&g, edges.len())
}

/// Canonical code of the tree `adj` with the distinguished edge `edge`.
pub fn canonical_edge_rooted(adj: &[Vec<usize>], edge: (usize, usize)) -> Result<CanonicalForm> {
    let edges = edges_of_adjacency(adj)?;
    Ok(CanonicalForm {
        kind: FormKind::EdgeRooted,
        code: edge_rooted_from_edges(adj.len(), &edges, (edge.0 as u32, edge.1 as u32), None)?,
    })
}

/// Unrooted canonical code of any shape (the root edge counts as an edge).
pub fn canonical_unrooted_shape<S: Shape + ?Sized>(tree: &S) -> Result<CanonicalForm> {
    let edges = edges_of_shape(tree);
    let g = Graph::from_edges(tree.node_count(), &edges);
    unrooted_from_graph(&g, edges.len())
}

/// Edge-rooted canonical code of a shape that carries a root edge.
pub fn canonical_edge_rooted_shape<S: Shape + ?Sized>(tree: &S) -> Result<CanonicalForm> {
    let edge = tree
        .root_edge()
        .ok_or_else(|| Error::Structure("shape has no root edge".into()))?;
    let edges = edges_of_shape(tree);
    Ok(CanonicalForm {
        kind: FormKind::EdgeRooted,
        code: edge_rooted_from_edges(tree.node_count(), &edges, edge, None)?,
    })
}

/// Canonical code of a labelled tree: invariant under swapping the two
/// members of any time-label pair, and under nothing else.
pub fn canonical_labelled(tree: &LabelledTree) -> CanonicalForm {
    let labels: Vec<u32> = (0..tree.node_count()).map(|v| tree.time_of(v)).collect();
    let edges = edges_of_shape(tree);
    let code = edge_rooted_from_edges(tree.node_count(), &edges, (0, 1), Some(&labels))
        .expect("labelled trees are valid by construction");
    CanonicalForm {
        kind: FormKind::Labelled,
        code,
    }
}

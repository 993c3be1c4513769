//! Tree representations.
//!
//! All trees here are stored as flat parent arrays in which every parent index
//! is smaller than its child's index. For time-labelled trees this follows
//! from recursiveness and the node encoding; for decoded canonical shapes it
//! follows from pre-order numbering. Subtree sizes, edge splits and depths are
//! therefore single passes over the array.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Sentinel parent for root nodes.
pub const NO_PARENT: u32 = u32::MAX;

/// Community of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeType {
    A,
    B,
}

impl NodeType {
    #[inline]
    pub fn bit(self) -> u32 {
        match self {
            NodeType::A => 0,
            NodeType::B => 1,
        }
    }

    #[inline]
    pub fn from_bit(bit: u32) -> Self {
        if bit & 1 == 0 {
            NodeType::A
        } else {
            NodeType::B
        }
    }

    #[inline]
    pub fn other(self) -> Self {
        match self {
            NodeType::A => NodeType::B,
            NodeType::B => NodeType::A,
        }
    }
}

/// Node `(t, type)` encoded as `2(t - 1) + bit(type)`.
///
/// The encoding also fixes the internal order of every same-time pair: the
/// `A` node comes first. Colorings are expressed against this order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn new(time: u32, ty: NodeType) -> Self {
        debug_assert!(time >= 1);
        NodeId(2 * (time - 1) + ty.bit())
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn time(self) -> u32 {
        self.0 / 2 + 1
    }

    #[inline]
    pub fn node_type(self) -> NodeType {
        NodeType::from_bit(self.0)
    }

    /// The other node carrying the same time label.
    #[inline]
    pub fn twin(self) -> NodeId {
        NodeId(self.0 ^ 1)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{:?})", self.time(), self.node_type())
    }
}

/// Read-only view shared by every tree representation.
pub trait Shape {
    /// Parent array; roots carry [`NO_PARENT`] and parents precede children.
    fn parents(&self) -> &[u32];

    /// Distinguished edge joining the two roots, when it is observable.
    fn root_edge(&self) -> Option<(u32, u32)>;

    /// Node types, when they are observable.
    fn node_type(&self, _v: usize) -> Option<NodeType> {
        None
    }

    fn node_count(&self) -> usize {
        self.parents().len()
    }
}

/// Shapes that also carry time labels in the fixed pair order.
pub trait TimeLabelled: Shape {
    /// Number of time steps `n`; the tree has `2n` nodes.
    fn steps(&self) -> usize {
        self.node_count() / 2
    }
}

/// A BCMRT realisation with time labels and types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TimeLabelledTree {
    n: usize,
    parent: Vec<u32>,
}

impl TimeLabelledTree {
    /// Validates the structural invariants before building the tree.
    pub fn from_parents(n: usize, parent: Vec<u32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooSmall("a tree needs n >= 1".into()));
        }
        if parent.len() != 2 * n {
            return Err(Error::Length {
                expected: 2 * n,
                found: parent.len(),
            });
        }
        if parent[0] != NO_PARENT || parent[1] != NO_PARENT {
            return Err(Error::Structure("time-1 nodes must be parentless".into()));
        }
        for (id, &p) in parent.iter().enumerate().skip(2) {
            if p == NO_PARENT {
                return Err(Error::Structure(format!(
                    "node {} has no parent",
                    NodeId(id as u32)
                )));
            }
            let (child, par) = (NodeId(id as u32), NodeId(p));
            if par.index() >= parent.len() || par.time() >= child.time() {
                return Err(Error::Structure(format!(
                    "parent {par} of {child} does not arrive earlier"
                )));
            }
        }
        Ok(TimeLabelledTree { n, parent })
    }

    /// Caller guarantees the invariants (used by the generator).
    pub(crate) fn from_parents_unchecked(n: usize, parent: Vec<u32>) -> Self {
        debug_assert!(Self::from_parents(n, parent.clone()).is_ok());
        TimeLabelledTree { n, parent }
    }

    /// Number of time steps.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        match self.parent[id.index()] {
            NO_PARENT => None,
            p => Some(NodeId(p)),
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.parent.len() as u32).map(NodeId)
    }

    /// Swap the A/B role of every pair.
    pub fn swap_types(&self) -> TimeLabelledTree {
        let mut parent = vec![NO_PARENT; self.parent.len()];
        for id in 2..self.parent.len() {
            parent[id ^ 1] = self.parent[id] ^ 1;
        }
        TimeLabelledTree {
            n: self.n,
            parent,
        }
    }
}

impl Shape for TimeLabelledTree {
    fn parents(&self) -> &[u32] {
        &self.parent
    }

    fn root_edge(&self) -> Option<(u32, u32)> {
        Some((0, 1))
    }

    fn node_type(&self, v: usize) -> Option<NodeType> {
        Some(NodeType::from_bit(v as u32))
    }
}

impl TimeLabelled for TimeLabelledTree {
    fn steps(&self) -> usize {
        self.n
    }
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    n: usize,
    parent: Vec<Option<u32>>,
}

impl Serialize for TimeLabelledTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TreeJson {
            n: self.n,
            parent: self
                .parent
                .iter()
                .map(|&p| (p != NO_PARENT).then_some(p))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for TimeLabelledTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TreeJson::deserialize(d)?;
        let parent = raw
            .parent
            .into_iter()
            .map(|p| p.unwrap_or(NO_PARENT))
            .collect();
        TimeLabelledTree::from_parents(raw.n, parent).map_err(serde::de::Error::custom)
    }
}

/// Time-labelled tree with types erased. Pairs keep the fixed internal order
/// of the node encoding, but no accessor reveals which member is `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledTree {
    inner: TimeLabelledTree,
}

impl LabelledTree {
    pub(crate) fn erase(tree: &TimeLabelledTree) -> Self {
        LabelledTree {
            inner: tree.clone(),
        }
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    /// Time label of node `v`.
    pub fn time_of(&self, v: usize) -> u32 {
        NodeId(v as u32).time()
    }

    /// Same data, as JSON-able parent array.
    pub fn as_parent_tree(&self) -> &TimeLabelledTree {
        &self.inner
    }
}

impl Shape for LabelledTree {
    fn parents(&self) -> &[u32] {
        &self.inner.parent
    }

    fn root_edge(&self) -> Option<(u32, u32)> {
        Some((0, 1))
    }
}

impl TimeLabelled for LabelledTree {
    fn steps(&self) -> usize {
        self.inner.n
    }
}

/// Plain tree structure: pre-order parent array plus, for edge-rooted trees,
/// the root edge joining the two roots.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShapeTree {
    parent: Vec<u32>,
    root_edge: Option<(u32, u32)>,
}

impl ShapeTree {
    pub(crate) fn new(parent: Vec<u32>, root_edge: Option<(u32, u32)>) -> Self {
        debug_assert!(parent
            .iter()
            .enumerate()
            .all(|(v, &p)| p == NO_PARENT || (p as usize) < v));
        ShapeTree { parent, root_edge }
    }

    /// Undirected adjacency lists, the root edge included.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        adjacency_of(self)
    }
}

impl Shape for ShapeTree {
    fn parents(&self) -> &[u32] {
        &self.parent
    }

    fn root_edge(&self) -> Option<(u32, u32)> {
        self.root_edge
    }
}

/// Undirected adjacency of any shape, including the root edge.
pub fn adjacency_of<S: Shape + ?Sized>(tree: &S) -> Vec<Vec<usize>> {
    let parent = tree.parents();
    let mut adj = vec![Vec::new(); parent.len()];
    for (v, &p) in parent.iter().enumerate() {
        if p != NO_PARENT {
            adj[v].push(p as usize);
            adj[p as usize].push(v);
        }
    }
    if let Some((a, b)) = tree.root_edge() {
        adj[a as usize].push(b as usize);
        adj[b as usize].push(a as usize);
    }
    adj
}

/// Number of descendants (self included) of every node in the parent forest,
/// i.e. with the root edge cut.
pub fn forest_sizes<S: Shape + ?Sized>(tree: &S) -> Vec<u32> {
    let parent = tree.parents();
    let mut size = vec![1u32; parent.len()];
    for v in (0..parent.len()).rev() {
        let p = parent[v];
        if p != NO_PARENT {
            size[p as usize] += size[v];
        }
    }
    size
}

/// Subtree sizes with the tree hung from `root`, one of the two time-1 nodes:
/// the other time-1 node becomes a child of `root` through the root edge.
pub fn subtree_sizes(tree: &TimeLabelledTree, root: NodeType) -> Vec<u32> {
    let mut size = forest_sizes(tree);
    let r = NodeId::new(1, root).index();
    size[r] = 2 * tree.n as u32;
    size
}

/// Depth of every node below its forest root (the nearer time-1 node for
/// time-labelled trees).
pub fn depths<S: Shape + ?Sized>(tree: &S) -> Vec<u32> {
    let parent = tree.parents();
    let mut depth = vec![0u32; parent.len()];
    for v in 0..parent.len() {
        let p = parent[v];
        if p != NO_PARENT {
            depth[v] = depth[p as usize] + 1;
        }
    }
    depth
}

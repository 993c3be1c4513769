//! Sampling BCMRT(q) histories and trees.
//!
//! A history holds one `(cross, u)` record per arriving node, in the order
//! `(2,A), (2,B), (3,A), …, (n,B)`. The record of `(t, Λ)` sits at index
//! `2(t − 2) + bit(Λ)`, i.e. at `NodeId(t, Λ) − 2`. Draws happen in that order
//! and, per node, `cross` before `u`; [`sample_tree`] consumes the stream
//! identically so that it reproduces `history_to_tree(sample_history(..))`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::rng::{bernoulli, bounded_u32, seeded};
use crate::tree::{NodeId, NodeType, TimeLabelledTree, NO_PARENT};

/// Random source of one arriving node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttachmentRecord {
    /// Attach to the other type.
    pub cross: bool,
    /// Time label of the parent, in `1..t`.
    pub u: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationHistory {
    pub n: usize,
    pub q: f64,
    pub records: Vec<AttachmentRecord>,
    pub seed: u64,
}

impl GenerationHistory {
    /// Builds a history from explicit records, checking `u < t`.
    pub fn from_records(n: usize, q: f64, records: Vec<AttachmentRecord>, seed: u64) -> Result<Self> {
        check_probability("q", q)?;
        if n == 0 {
            return Err(Error::TooSmall("a history needs n >= 1".into()));
        }
        if records.len() != 2 * (n - 1) {
            return Err(Error::Length {
                expected: 2 * (n - 1),
                found: records.len(),
            });
        }
        for (i, r) in records.iter().enumerate() {
            let t = (i / 2 + 2) as u32;
            if r.u == 0 || r.u >= t {
                return Err(Error::Structure(format!(
                    "record of time-{t} node has u = {}",
                    r.u
                )));
            }
        }
        Ok(GenerationHistory { n, q, records, seed })
    }

    /// Record of node `(t, ty)`, `t >= 2`.
    pub fn record(&self, t: u32, ty: NodeType) -> &AttachmentRecord {
        &self.records[NodeId::new(t, ty).index() - 2]
    }

    pub fn cross_count(&self) -> usize {
        self.records.iter().filter(|r| r.cross).count()
    }
}

#[inline]
fn parent_of(child: usize, rec: AttachmentRecord) -> u32 {
    2 * (rec.u - 1) + ((child as u32 & 1) ^ rec.cross as u32)
}

#[inline]
fn draw_record<R: RngCore + ?Sized>(rng: &mut R, t: u32, q: f64) -> AttachmentRecord {
    let cross = bernoulli(rng, q);
    let u = 1 + bounded_u32(rng, t - 1);
    AttachmentRecord { cross, u }
}

fn check_args(n: usize, q: f64) -> Result<()> {
    check_probability("q", q)?;
    if n == 0 {
        return Err(Error::TooSmall("n must be at least 1".into()));
    }
    if n > (u32::MAX / 2) as usize {
        return Err(Error::param("n", format!("{n} exceeds the 32-bit node index range")));
    }
    Ok(())
}

/// Draws a full history; deterministic in `seed`.
pub fn sample_history(n: usize, q: f64, seed: u64) -> Result<GenerationHistory> {
    check_args(n, q)?;
    let mut rng = seeded(seed);
    let mut records = Vec::with_capacity(2 * (n - 1));
    for t in 2..=n as u32 {
        for _ in 0..2 {
            records.push(draw_record(&mut rng, t, q));
        }
    }
    Ok(GenerationHistory { n, q, records, seed })
}

/// The tree induced by a history.
pub fn history_to_tree(h: &GenerationHistory) -> TimeLabelledTree {
    let mut parent = vec![NO_PARENT; 2 * h.n];
    for (i, &rec) in h.records.iter().enumerate() {
        parent[i + 2] = parent_of(i + 2, rec);
    }
    TimeLabelledTree::from_parents_unchecked(h.n, parent)
}

/// Samples a tree directly from an RNG, without keeping the records.
pub fn sample_tree_with<R: RngCore + ?Sized>(n: usize, q: f64, rng: &mut R) -> Result<TimeLabelledTree> {
    check_args(n, q)?;
    let mut parent = vec![NO_PARENT; 2 * n];
    for t in 2..=n as u32 {
        for bit in 0..2 {
            let child = NodeId::new(t, NodeType::from_bit(bit)).index();
            parent[child] = parent_of(child, draw_record(rng, t, q));
        }
    }
    Ok(TimeLabelledTree::from_parents_unchecked(n, parent))
}

/// Same tree as `history_to_tree(&sample_history(n, q, seed)?)`.
pub fn sample_tree(n: usize, q: f64, seed: u64) -> Result<TimeLabelledTree> {
    sample_tree_with(n, q, &mut seeded(seed))
}

/// Copy of `h` with the record of `(t, ty)` redrawn from `seed2`.
pub fn resample_coordinate(h: &GenerationHistory, t: usize, ty: NodeType, seed2: u64) -> Result<GenerationHistory> {
    if t < 2 || t > h.n {
        return Err(Error::param("t", format!("{t} not in [2, {}]", h.n)));
    }
    let mut out = h.clone();
    let mut rng = seeded(seed2);
    out.records[NodeId::new(t as u32, ty).index() - 2] = draw_record(&mut rng, t as u32, h.q);
    Ok(out)
}

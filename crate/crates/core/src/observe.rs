//! Observation settings and projections of a realised tree.

use std::fmt;
use std::str::FromStr;

use crate::canonical::{
    canonical_edge_rooted_shape, canonical_labelled, canonical_unrooted_shape, CanonicalForm,
};
use crate::error::{Error, Result};
use crate::tree::{LabelledTree, Shape, ShapeTree, TimeLabelledTree};

/// What the statistician gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Setting {
    /// Time labels kept, types dropped.
    Labelled,
    /// Only the root edge is distinguished.
    RootedUnlabelled,
    /// Bare tree structure.
    UnrootedUnlabelled,
}

impl Setting {
    pub const ALL: [Setting; 3] = [
        Setting::Labelled,
        Setting::RootedUnlabelled,
        Setting::UnrootedUnlabelled,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Setting::Labelled => "labelled",
            Setting::RootedUnlabelled => "rooted",
            Setting::UnrootedUnlabelled => "unrooted",
        }
    }
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Setting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "labelled" | "labeled" => Ok(Setting::Labelled),
            "rooted" => Ok(Setting::RootedUnlabelled),
            "unrooted" => Ok(Setting::UnrootedUnlabelled),
            other => Err(Error::param(
                "setting",
                format!("unknown setting `{other}` (labelled|rooted|unrooted)"),
            )),
        }
    }
}

/// A tree as seen in one observation setting.
///
/// Unlabelled payloads hold a canonical representative (decoded from the
/// canonical code), so isomorphic trees produce identical payloads.
#[derive(Debug, Clone)]
pub enum ObservedTree {
    Labelled(LabelledTree),
    RootedUnlabelled { shape: ShapeTree, form: CanonicalForm },
    UnrootedUnlabelled { shape: ShapeTree, form: CanonicalForm },
}

/// Deterministic projection of a realised tree onto a setting.
pub fn project(tree: &TimeLabelledTree, setting: Setting) -> ObservedTree {
    match setting {
        Setting::Labelled => ObservedTree::Labelled(LabelledTree::erase(tree)),
        Setting::RootedUnlabelled => {
            let form = canonical_edge_rooted_shape(tree).expect("valid trees have a root edge");
            ObservedTree::RootedUnlabelled {
                shape: form.decode(),
                form,
            }
        }
        Setting::UnrootedUnlabelled => {
            let form = canonical_unrooted_shape(tree).expect("valid trees are trees");
            ObservedTree::UnrootedUnlabelled {
                shape: form.decode(),
                form,
            }
        }
    }
}

impl ObservedTree {
    pub fn setting(&self) -> Setting {
        match self {
            ObservedTree::Labelled(_) => Setting::Labelled,
            ObservedTree::RootedUnlabelled { .. } => Setting::RootedUnlabelled,
            ObservedTree::UnrootedUnlabelled { .. } => Setting::UnrootedUnlabelled,
        }
    }

    /// Isomorphism-class key within the setting.
    pub fn key(&self) -> CanonicalForm {
        match self {
            ObservedTree::Labelled(t) => canonical_labelled(t),
            ObservedTree::RootedUnlabelled { form, .. }
            | ObservedTree::UnrootedUnlabelled { form, .. } => form.clone(),
        }
    }

    pub fn as_shape(&self) -> &dyn Shape {
        match self {
            ObservedTree::Labelled(t) => t,
            ObservedTree::RootedUnlabelled { shape, .. }
            | ObservedTree::UnrootedUnlabelled { shape, .. } => shape,
        }
    }

    /// Number of time steps `n` (half the node count).
    pub fn steps(&self) -> usize {
        self.as_shape().node_count() / 2
    }

    /// The labelled payload, or a setting error.
    pub fn labelled(&self) -> Result<&LabelledTree> {
        match self {
            ObservedTree::Labelled(t) => Ok(t),
            _ => Err(Error::Setting {
                needed: "labelled",
                found: self.setting(),
            }),
        }
    }

    /// A shape carrying the root edge, or a setting error.
    pub fn rooted(&self) -> Result<&dyn Shape> {
        match self {
            ObservedTree::Labelled(t) => Ok(t),
            ObservedTree::RootedUnlabelled { shape, .. } => Ok(shape),
            ObservedTree::UnrootedUnlabelled { .. } => Err(Error::Setting {
                needed: "rooted",
                found: self.setting(),
            }),
        }
    }
}

impl PartialEq for ObservedTree {
    fn eq(&self, other: &Self) -> bool {
        self.setting() == other.setting() && self.key() == other.key()
    }
}

impl Eq for ObservedTree {}

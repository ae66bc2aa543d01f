//! Conversation cascades: rooted reply trees in canonical replay order.
//!
//! Nodes are stored so that index order is the replay order: repeatedly admit
//! the smallest `(timestamp, post_id)` among nodes whose parent is already
//! admitted. Every prefix of the node list is therefore a valid tree, and a
//! child is never admitted before its parent even when its timestamp is earlier.

mod build;
pub mod cache;
mod classify;
mod enumerate;
mod metrics;
mod synth;

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};

pub use build::{build_cascades, BuildOutput, OrphanReport, QuarantineReason};
pub use classify::{
    classify, classify_prefix, CascadeType, IncrementalClassifier, Shape, Transition,
    ALLOWED_TRANSITIONS,
};
pub use enumerate::{enumerate_rooted_trees, RootedTrees, MAX_ENUMERATION_SIZE};
pub use metrics::{
    cascade_stats, wiener_index, wiener_index_oracle, TypeStats, TypeStatsSummary,
};
pub use synth::{generate_synthetic_cascade, InterArrival, SyntheticCascadeParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CascadeNode {
    pub post_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub parent: Option<usize>,
    /// Ordered by `(timestamp, post_id)`.
    pub children: Vec<usize>,
    pub depth: usize,
    pub hashtags: Vec<String>,
}

/// Input to [`Cascade::from_nodes`]: one node with its parent given as an
/// index into the same input list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub post_id: String,
    pub user_id: String,
    pub timestamp: i64,
    pub parent: Option<usize>,
    pub hashtags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cascade {
    nodes: Vec<CascadeNode>,
    max_depth: usize,
    unique_users: usize,
    late_edges: usize,
    orphan_rooted: bool,
}

/// Canonical replay order of the tree rooted at `root`.
///
/// `children(i)` lists the children of node `i` in any order; `key(i)` gives
/// its `(timestamp, post_id)`. Nodes unreachable from `root` are not visited.
pub(crate) fn replay_order<'a, C, K>(root: usize, mut children: C, key: K) -> Vec<usize>
where
    C: FnMut(usize) -> &'a [usize],
    K: Fn(usize) -> (i64, &'a str),
{
    let mut order = Vec::new();
    let mut frontier = BinaryHeap::new();
    let (ts, id) = key(root);
    frontier.push(Reverse((ts, id, root)));
    while let Some(Reverse((_, _, node))) = frontier.pop() {
        order.push(node);
        for &child in children(node) {
            let (ts, id) = key(child);
            frontier.push(Reverse((ts, id, child)));
        }
    }
    order
}

impl Cascade {
    /// Builds a cascade from nodes given in any order. Exactly one node must
    /// be parentless and every other node must reach it.
    pub fn from_nodes(specs: Vec<NodeSpec>, orphan_rooted: bool) -> Result<Cascade> {
        let invalid = |detail: String| Error::InvalidParameter(format!("cascade: {detail}"));
        if specs.is_empty() {
            return Err(invalid("no nodes".into()));
        }
        let n = specs.len();
        let mut children = vec![Vec::new(); n];
        let mut root = None;
        for (i, spec) in specs.iter().enumerate() {
            match spec.parent {
                None if root.is_some() => return Err(invalid("more than one root".into())),
                None => root = Some(i),
                Some(p) if p >= n || p == i => {
                    return Err(invalid(format!("node {i} has invalid parent {p}")))
                }
                Some(p) => children[p].push(i),
            }
        }
        let root = root.ok_or_else(|| invalid("no root".into()))?;
        let order = replay_order(
            root,
            |i| children[i].as_slice(),
            |i| (specs[i].timestamp, specs[i].post_id.as_str()),
        );
        if order.len() != n {
            return Err(invalid(format!(
                "{} of {n} nodes are not connected to the root",
                n - order.len()
            )));
        }
        let mut position = vec![0usize; n];
        for (pos, &i) in order.iter().enumerate() {
            position[i] = pos;
        }
        let parents: Vec<Option<usize>> = order
            .iter()
            .map(|&i| specs[i].parent.map(|p| position[p]))
            .collect();
        let mut slots: Vec<Option<NodeSpec>> = specs.into_iter().map(Some).collect();
        let ordered = order
            .iter()
            .zip(parents)
            .map(|(&i, parent)| {
                let mut spec = slots[i].take().expect("each node visited once");
                spec.parent = parent;
                spec
            })
            .collect();
        Ok(Cascade::from_canonical(ordered, orphan_rooted))
    }

    /// `specs` must already be in replay order with every parent index
    /// smaller than its child's.
    pub(crate) fn from_canonical(specs: Vec<NodeSpec>, orphan_rooted: bool) -> Cascade {
        let mut nodes: Vec<CascadeNode> = Vec::with_capacity(specs.len());
        let mut max_depth = 0;
        let mut late_edges = 0;
        for (i, spec) in specs.into_iter().enumerate() {
            let depth = match spec.parent {
                Some(p) => {
                    debug_assert!(p < i, "parent must precede child in replay order");
                    let parent = &mut nodes[p];
                    parent.children.push(i);
                    if spec.timestamp < parent.timestamp {
                        late_edges += 1;
                    }
                    parent.depth + 1
                }
                None => {
                    debug_assert_eq!(i, 0, "root must come first");
                    0
                }
            };
            max_depth = max_depth.max(depth);
            nodes.push(CascadeNode {
                post_id: spec.post_id,
                user_id: spec.user_id,
                timestamp: spec.timestamp,
                parent: spec.parent,
                children: Vec::new(),
                depth,
                hashtags: spec.hashtags,
            });
        }
        let unique_users = nodes
            .iter()
            .map(|n| n.user_id.as_str())
            .collect::<HashSet<_>>()
            .len();
        Cascade {
            nodes,
            max_depth,
            unique_users,
            late_edges,
            orphan_rooted,
        }
    }

    /// Identifier of the cascade: its root post id.
    pub fn id(&self) -> &str {
        &self.nodes[0].post_id
    }

    pub fn root(&self) -> &CascadeNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[CascadeNode] {
        &self.nodes
    }

    pub fn volume(&self) -> usize {
        self.nodes.len()
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn unique_users(&self) -> usize {
        self.unique_users
    }

    /// Edges whose child is timestamped before its parent.
    pub fn late_edges(&self) -> usize {
        self.late_edges
    }

    /// True when the root is a reply whose parent was absent from the corpus.
    pub fn orphan_rooted(&self) -> bool {
        self.orphan_rooted
    }

    /// Parent index per node, `None` for the root.
    pub fn parents(&self) -> impl Iterator<Item = Option<usize>> + '_ {
        self.nodes.iter().map(|n| n.parent)
    }

    pub fn to_specs(&self) -> Vec<NodeSpec> {
        self.nodes
            .iter()
            .map(|n| NodeSpec {
                post_id: n.post_id.clone(),
                user_id: n.user_id.clone(),
                timestamp: n.timestamp,
                parent: n.parent,
                hashtags: n.hashtags.clone(),
            })
            .collect()
    }
}

//! Cascade cache: one JSON cascade per line, the interchange format between
//! pipeline stages.
//!
//! ```json
//! {"root_id":"p1","nodes":[{"id":"p1","user":"u1","ts":100,"parent_idx":null}],
//!  "type":"S","depth":0,"volume":1,"users":1,"wiener":null,"orphan_rooted":false}
//! ```
//!
//! Nodes may carry an optional `tags` array with the post's hashtags.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{classify, wiener_index, Cascade, CascadeType, NodeSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub id: String,
    pub user: String,
    pub ts: i64,
    pub parent_idx: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CascadeRecord {
    pub root_id: String,
    pub nodes: Vec<NodeRecord>,
    #[serde(rename = "type")]
    pub cascade_type: CascadeType,
    pub depth: usize,
    pub volume: usize,
    pub users: usize,
    pub wiener: Option<f64>,
    pub orphan_rooted: bool,
}

impl CascadeRecord {
    pub fn from_cascade(c: &Cascade) -> Self {
        CascadeRecord {
            root_id: c.id().to_string(),
            nodes: c
                .nodes()
                .iter()
                .map(|n| NodeRecord {
                    id: n.post_id.clone(),
                    user: n.user_id.clone(),
                    ts: n.timestamp,
                    parent_idx: n.parent,
                    tags: n.hashtags.clone(),
                })
                .collect(),
            cascade_type: classify(c),
            depth: c.max_depth(),
            volume: c.volume(),
            users: c.unique_users(),
            wiener: wiener_index(c),
            orphan_rooted: c.orphan_rooted(),
        }
    }

    /// Rebuilds the cascade from its nodes and checks the stored summary
    /// fields against the recomputed ones.
    pub fn into_cascade(self) -> std::result::Result<Cascade, String> {
        let specs = self
            .nodes
            .into_iter()
            .map(|n| NodeSpec {
                post_id: n.id,
                user_id: n.user,
                timestamp: n.ts,
                parent: n.parent_idx,
                hashtags: n.tags,
            })
            .collect();
        let c = Cascade::from_nodes(specs, self.orphan_rooted).map_err(|e| e.to_string())?;
        let recomputed = (c.id(), classify(&c), c.max_depth(), c.volume(), c.unique_users());
        let stored = (
            self.root_id.as_str(),
            self.cascade_type,
            self.depth,
            self.volume,
            self.users,
        );
        if recomputed != stored {
            return Err(format!(
                "summary fields {stored:?} disagree with nodes {recomputed:?}"
            ));
        }
        Ok(c)
    }
}

pub fn write_cascades<'a, W: Write>(
    mut out: W,
    cascades: impl IntoIterator<Item = &'a Cascade>,
) -> Result<usize> {
    let mut count = 0;
    for c in cascades {
        serde_json::to_writer(&mut out, &CascadeRecord::from_cascade(c))
            .map_err(|e| Error::Stream(e.into()))?;
        out.write_all(b"\n")?;
        count += 1;
    }
    out.flush()?;
    Ok(count)
}

pub fn read_cascades<R: BufRead>(input: R) -> Result<Vec<Cascade>> {
    let mut cascades = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::CascadeRecord {
            line: i + 1,
            reason,
        };
        let record: CascadeRecord =
            serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        cascades.push(record.into_cascade().map_err(bad)?);
    }
    Ok(cascades)
}

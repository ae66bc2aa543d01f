use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{replay_order, Cascade, NodeSpec};
use crate::ingest::Post;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarantineReason {
    /// The post lies on a cycle of parent references.
    Cycle,
    /// The post's parent chain leads into a cycle.
    CycleDescendant,
    /// A post with the same id appeared earlier; the first occurrence wins.
    DuplicateId,
}

/// Posts that did not resolve to a proper root.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrphanReport {
    /// `(post_id, missing parent_id)` for each reply whose parent is absent.
    /// Each such post roots its own orphan-rooted cascade.
    pub missing_parent: Vec<(String, String)>,
    /// Posts excluded from every cascade.
    pub quarantined: Vec<(String, QuarantineReason)>,
}

impl OrphanReport {
    pub fn quarantined_count(&self) -> usize {
        self.quarantined.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct BuildOutput {
    /// Sorted by root `(timestamp, post_id)`.
    pub cascades: Vec<Cascade>,
    pub orphans: OrphanReport,
}

impl BuildOutput {
    /// Posts placed in some cascade.
    pub fn placed_posts(&self) -> usize {
        self.cascades.iter().map(Cascade::volume).sum()
    }
}

enum Link {
    Root,
    MissingParent,
    Parent(u32),
    Duplicate,
}

/// Assembles posts into cascades.
///
/// Every post ends up either in exactly one cascade or in the quarantine list,
/// so `placed_posts() + orphans.quarantined_count() == posts.len()`.
pub fn build_cascades(posts: Vec<Post>) -> BuildOutput {
    let n = posts.len();
    assert!(n < u32::MAX as usize, "corpus too large for u32 node indices");

    let links: Vec<Link> = {
        let mut index: HashMap<&str, u32> = HashMap::with_capacity(n);
        let mut duplicate = vec![false; n];
        for (i, post) in posts.iter().enumerate() {
            match index.entry(post.id.as_str()) {
                Entry::Vacant(slot) => {
                    slot.insert(i as u32);
                }
                Entry::Occupied(_) => duplicate[i] = true,
            }
        }
        posts
            .par_iter()
            .zip(duplicate.par_iter())
            .map(|(post, &dup)| {
                if dup {
                    return Link::Duplicate;
                }
                match &post.parent_id {
                    None => Link::Root,
                    Some(parent) => match index.get(parent.as_str()) {
                        Some(&p) => Link::Parent(p),
                        None => Link::MissingParent,
                    },
                }
            })
            .collect()
    };

    // children in CSR form
    let mut offsets = vec![0usize; n + 1];
    for link in &links {
        if let Link::Parent(p) = link {
            offsets[*p as usize + 1] += 1;
        }
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut child_list = vec![0usize; offsets[n]];
    for (i, link) in links.iter().enumerate() {
        if let Link::Parent(p) = link {
            let slot = &mut fill[*p as usize];
            child_list[*slot] = i;
            *slot += 1;
        }
    }

    let mut roots: Vec<usize> = links
        .iter()
        .enumerate()
        .filter(|(_, l)| matches!(l, Link::Root | Link::MissingParent))
        .map(|(i, _)| i)
        .collect();
    roots.sort_unstable_by(|&a, &b| {
        (posts[a].timestamp, &posts[a].id).cmp(&(posts[b].timestamp, &posts[b].id))
    });

    let orders: Vec<Vec<usize>> = roots
        .par_iter()
        .map(|&root| {
            replay_order(
                root,
                |i| &child_list[offsets[i]..offsets[i + 1]],
                |i| (posts[i].timestamp, posts[i].id.as_str()),
            )
        })
        .collect();

    let mut report = OrphanReport::default();
    let mut placed = vec![false; n];
    for order in &orders {
        for &i in order {
            placed[i] = true;
        }
    }
    for &root in &roots {
        if let Link::MissingParent = links[root] {
            let post = &posts[root];
            report.missing_parent.push((
                post.id.clone(),
                post.parent_id.clone().unwrap_or_default(),
            ));
        }
    }
    let on_cycle = find_cycle_members(&links, &placed);
    for (i, link) in links.iter().enumerate() {
        if placed[i] {
            continue;
        }
        let reason = match link {
            Link::Duplicate => QuarantineReason::DuplicateId,
            _ if on_cycle[i] => QuarantineReason::Cycle,
            _ => QuarantineReason::CycleDescendant,
        };
        report.quarantined.push((posts[i].id.clone(), reason));
    }

    let orphan_root: Vec<bool> = roots
        .iter()
        .map(|&r| matches!(links[r], Link::MissingParent))
        .collect();
    let parent_of: Vec<Option<u32>> = links
        .iter()
        .map(|l| match l {
            Link::Parent(p) => Some(*p),
            _ => None,
        })
        .collect();
    drop(links);

    let mut slots: Vec<Option<Post>> = posts.into_iter().map(Some).collect();
    let mut position = vec![0usize; n];
    let grouped: Vec<Vec<NodeSpec>> = orders
        .iter()
        .map(|order| {
            for (pos, &i) in order.iter().enumerate() {
                position[i] = pos;
            }
            order
                .iter()
                .enumerate()
                .map(|(pos, &i)| {
                    let post = slots[i].take().expect("post placed once");
                    NodeSpec {
                        post_id: post.id,
                        user_id: post.user_id,
                        timestamp: post.timestamp,
                        // an orphan root keeps its dangling parent_id only in the report
                        parent: if pos == 0 {
                            None
                        } else {
                            parent_of[i].map(|p| position[p as usize])
                        },
                        hashtags: post.hashtags,
                    }
                })
                .collect()
        })
        .collect();

    let cascades = grouped
        .into_par_iter()
        .zip(orphan_root.into_par_iter())
        .map(|(specs, orphan)| Cascade::from_canonical(specs, orphan))
        .collect();

    BuildOutput {
        cascades,
        orphans: report,
    }
}

/// Marks unplaced posts that sit on a parent-reference cycle.
fn find_cycle_members(links: &[Link], placed: &[bool]) -> Vec<bool> {
    const UNSEEN: u8 = 0;
    const ACTIVE: u8 = 1;
    const DONE: u8 = 2;
    let n = links.len();
    let mut on_cycle = vec![false; n];
    let mut state = vec![UNSEEN; n];
    let mut path = Vec::new();
    for start in 0..n {
        if placed[start] || state[start] != UNSEEN {
            continue;
        }
        let mut cur = start;
        loop {
            if state[cur] == ACTIVE {
                // everything on the path from `cur` onward closes the loop
                let from = path.iter().position(|&x| x == cur).expect("active node on path");
                for &x in &path[from..] {
                    on_cycle[x] = true;
                }
                break;
            }
            if state[cur] == DONE {
                break;
            }
            state[cur] = ACTIVE;
            path.push(cur);
            match links[cur] {
                Link::Parent(p) if !placed[p as usize] => cur = p as usize,
                _ => break,
            }
        }
        for &x in &path {
            state[x] = DONE;
        }
        path.clear();
    }
    on_cycle
}

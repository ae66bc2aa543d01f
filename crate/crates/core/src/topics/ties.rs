use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cascade::Cascade;

/// Reply interaction counts between unordered user pairs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TieStrengthTable {
    /// Keyed by `(lower, higher)` user id.
    pub pairs: BTreeMap<(String, String), u64>,
    pub per_topic_mean: BTreeMap<String, f64>,
}

impl TieStrengthTable {
    pub fn get(&self, a: &str, b: &str) -> u64 {
        self.pairs.get(&pair_key(a, b)).copied().unwrap_or(0)
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

fn reply_pairs(c: &Cascade) -> impl Iterator<Item = (&str, &str)> + '_ {
    let nodes = c.nodes();
    nodes.iter().filter_map(move |n| {
        let parent = &nodes[n.parent?];
        (parent.user_id != n.user_id).then(|| {
            let (a, b) = (parent.user_id.as_str(), n.user_id.as_str());
            if a <= b {
                (a, b)
            } else {
                (b, a)
            }
        })
    })
}

/// Counts parent-child replies between distinct users over the whole forest.
pub fn tie_strength(forest: &[Cascade]) -> TieStrengthTable {
    let mut pairs: BTreeMap<(String, String), u64> = BTreeMap::new();
    for c in forest {
        for (a, b) in reply_pairs(c) {
            *pairs.entry((a.to_string(), b.to_string())).or_insert(0) += 1;
        }
    }
    TieStrengthTable {
        pairs,
        per_topic_mean: BTreeMap::new(),
    }
}

/// Mean global tie strength over the distinct user pairs that interact
/// inside cascades of each topic. Topics without any pair are omitted.
pub fn topic_tie_strength(
    tie: &TieStrengthTable,
    cascade_topics: &BTreeMap<String, BTreeSet<String>>,
    forest: &[Cascade],
) -> BTreeMap<String, f64> {
    let mut members: BTreeMap<&str, BTreeSet<(&str, &str)>> = BTreeMap::new();
    for c in forest {
        let Some(topics) = cascade_topics.get(c.id()) else {
            continue;
        };
        for t in topics {
            members.entry(t).or_default().extend(reply_pairs(c));
        }
    }
    members
        .into_iter()
        .filter(|(_, ps)| !ps.is_empty())
        .map(|(t, ps)| {
            let total: u64 = ps.iter().map(|(a, b)| tie.get(a, b)).sum();
            (t.to_string(), total as f64 / ps.len() as f64)
        })
        .collect()
}

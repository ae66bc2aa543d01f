use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{Cascade, CascadeType, IncrementalClassifier, Transition};
use crate::stats::Summary;

/// One change of cascade type during replay.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvolutionEvent {
    pub cascade_id: String,
    pub from: CascadeType,
    pub to: CascadeType,
    pub at_timestamp: i64,
    /// 1-based position of the triggering post in replay order.
    pub node_index: usize,
    /// Replies in the window from the previous trigger through this one,
    /// both inclusive. For `S->A` the window starts at the root, which is
    /// not a reply.
    pub replies_since_last_transition: usize,
    /// Seconds since the previous trigger (the root for `S->A`), clamped at 0.
    pub elapsed_since_last_transition: i64,
}

impl EvolutionEvent {
    pub fn transition(&self) -> Transition {
        Transition::new(self.from, self.to)
    }

    pub fn elapsed_hours(&self) -> f64 {
        self.elapsed_since_last_transition as f64 / 3600.0
    }
}

/// Replays the cascade one node at a time and records each type change.
pub fn detect_evolutions(c: &Cascade) -> Vec<EvolutionEvent> {
    let nodes = c.nodes();
    let mut classifier = IncrementalClassifier::with_capacity(nodes.len());
    let mut current = classifier.push(None);
    let mut last_index = 1;
    let mut last_ts = nodes[0].timestamp;
    let mut events = Vec::new();
    for (k, node) in nodes.iter().enumerate().skip(1) {
        let next = classifier.push(node.parent);
        if next == current {
            continue;
        }
        let node_index = k + 1;
        let replies = if current == CascadeType::S {
            node_index - 1
        } else {
            node_index - last_index + 1
        };
        events.push(EvolutionEvent {
            cascade_id: c.id().to_string(),
            from: current,
            to: next,
            at_timestamp: node.timestamp,
            node_index,
            replies_since_last_transition: replies,
            elapsed_since_last_transition: (node.timestamp - last_ts).max(0),
        });
        current = next;
        last_index = node_index;
        last_ts = node.timestamp;
    }
    events
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TransitionStats {
    pub replies: Summary,
    pub hours: Summary,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvolutionStats {
    pub per_transition: BTreeMap<Transition, TransitionStats>,
}

/// Aggregates replies and elapsed hours per transition. `S->A` is left out
/// unless `include_bootstrap` is set.
pub fn evolution_stats(events: &[EvolutionEvent], include_bootstrap: bool) -> EvolutionStats {
    let mut per_transition: BTreeMap<Transition, TransitionStats> = BTreeMap::new();
    for e in events {
        let t = e.transition();
        if t.is_bootstrap() && !include_bootstrap {
            continue;
        }
        let cell = per_transition.entry(t).or_default();
        cell.replies.push(e.replies_since_last_transition as f64);
        cell.hours.push(e.elapsed_hours());
    }
    EvolutionStats { per_transition }
}

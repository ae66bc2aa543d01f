use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cascade::{classify, Cascade, CascadeType};

/// Replies faster than this are counted as taking this long.
pub const MIN_RESPONSE_SECS: i64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResponseRate {
    pub mean_delta_hours: f64,
    pub rate_per_hour: f64,
    pub samples: u64,
}

/// Mean reply delay and its reciprocal per (final cascade type, depth).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResponseRateTable {
    pub entries: BTreeMap<(CascadeType, usize), ResponseRate>,
}

impl ResponseRateTable {
    pub fn get(&self, t: CascadeType, level: usize) -> Option<&ResponseRate> {
        self.entries.get(&(t, level))
    }
}

pub fn response_rate_table(forest: &[Cascade]) -> ResponseRateTable {
    // integer sums keep the aggregation exact and order-independent
    let mut sums: BTreeMap<(CascadeType, usize), (i128, u64)> = BTreeMap::new();
    for c in forest {
        let t = classify(c);
        let nodes = c.nodes();
        for node in &nodes[1..] {
            let parent = &nodes[node.parent.expect("non-root")];
            let delay = (node.timestamp - parent.timestamp).max(MIN_RESPONSE_SECS);
            let cell = sums.entry((t, node.depth)).or_insert((0, 0));
            cell.0 += i128::from(delay);
            cell.1 += 1;
        }
    }
    let entries = sums
        .into_iter()
        .map(|(key, (total_secs, samples))| {
            let mean_delta_hours = total_secs as f64 / samples as f64 / 3600.0;
            (
                key,
                ResponseRate {
                    mean_delta_hours,
                    rate_per_hour: 1.0 / mean_delta_hours,
                    samples,
                },
            )
        })
        .collect();
    ResponseRateTable { entries }
}

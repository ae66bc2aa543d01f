use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::TopicAssignment;
use crate::cascade::Cascade;
use crate::error::{Error, Result};

pub const DEFAULT_MIN_COUNT: u64 = 1;

/// Assigns each cascade every topic whose labeled hashtags occur more than
/// `min_count` times across its posts. Repeated hashtags count each time.
/// Cascades with no topic are absent from the result.
pub fn assign_cascade_topics(
    forest: &[Cascade],
    assignment: &TopicAssignment,
    min_count: u64,
) -> Result<BTreeMap<String, BTreeSet<String>>> {
    if min_count < 1 {
        return Err(Error::InvalidParameter("min count must be >= 1".into()));
    }
    let mut out = BTreeMap::new();
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for c in forest {
        counts.clear();
        for node in c.nodes() {
            for tag in &node.hashtags {
                if let Some(topics) = assignment.labels.get(tag) {
                    for t in topics {
                        *counts.entry(t.as_str()).or_insert(0) += 1;
                    }
                }
            }
        }
        let topics: BTreeSet<String> = counts
            .iter()
            .filter(|(_, &n)| n > min_count)
            .map(|(t, _)| t.to_string())
            .collect();
        if !topics.is_empty() {
            out.insert(c.id().to_string(), topics);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::NodeSpec;

    fn cascade(id: &str, tags: &[&[&str]]) -> Cascade {
        let specs = tags
            .iter()
            .enumerate()
            .map(|(i, t)| NodeSpec {
                post_id: format!("{id}{i}"),
                user_id: format!("u{i}"),
                timestamp: i as i64,
                parent: i.checked_sub(1),
                hashtags: t.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        Cascade::from_nodes(specs, false).unwrap()
    }

    fn assignment(labels: &[(&str, &[&str])]) -> TopicAssignment {
        TopicAssignment {
            labels: labels
                .iter()
                .map(|(h, ts)| (h.to_string(), ts.iter().map(|s| s.to_string()).collect()))
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn strict_threshold() {
        let forest = [cascade("c", &[&["qanon", "qanon"]])];
        let a = assignment(&[("qanon", &["ConspiracyTheories"])]);
        let one = assign_cascade_topics(&forest, &a, 1).unwrap();
        assert!(one["c0"].contains("ConspiracyTheories"));
        assert!(assign_cascade_topics(&forest, &a, 2).unwrap().is_empty());
        assert!(assign_cascade_topics(&forest, &a, 0).is_err());
    }

    #[test]
    fn mixed_topics() {
        let forest = [
            cascade("x", &[&["vax", "maga"], &["covid"], &["maga", "other"]]),
            cascade("y", &[&["both"], &["both"], &["vax"]]),
        ];
        let a = assignment(&[
            ("vax", &["health"]),
            ("covid", &["health"]),
            ("maga", &["politics"]),
            ("both", &["health", "politics"]),
        ]);
        let out = assign_cascade_topics(&forest, &a, 1).unwrap();
        // x: health 2, politics 2; y: health 3, politics 2
        assert_eq!(out["x0"].len(), 2);
        assert_eq!(out["y0"].len(), 2);
        let out = assign_cascade_topics(&forest, &a, 2).unwrap();
        assert!(!out.contains_key("x0"));
        assert_eq!(out["y0"].iter().collect::<Vec<_>>(), vec!["health"]);
    }
}

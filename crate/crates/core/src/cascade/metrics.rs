use std::collections::{BTreeMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{classify, Cascade, CascadeType};
use crate::stats::Summary;

/// Structural virality: mean shortest-path distance over ordered node pairs
/// of the undirected tree. `None` when the cascade has fewer than two nodes.
///
/// Each edge whose child subtree holds `s` nodes lies on `2 s (n - s)`
/// ordered shortest paths, so one bottom-up pass over subtree sizes suffices.
pub fn wiener_index(c: &Cascade) -> Option<f64> {
    let n = c.volume();
    if n < 2 {
        return None;
    }
    let mut size = vec![1u64; n];
    let mut total: u128 = 0;
    // parents precede children, so reverse index order is bottom-up
    for (i, node) in c.nodes().iter().enumerate().skip(1).rev() {
        let s = size[i];
        total += 2 * u128::from(s) * u128::from(n as u64 - s);
        let parent = node.parent.expect("non-root node has a parent");
        size[parent] += s;
    }
    Some(total as f64 / (n as f64 * (n as f64 - 1.0)))
}

/// All-pairs breadth-first reference for [`wiener_index`]. O(n^2).
pub fn wiener_index_oracle(c: &Cascade) -> Option<f64> {
    let n = c.volume();
    if n < 2 {
        return None;
    }
    let mut adjacency = vec![Vec::new(); n];
    for (i, node) in c.nodes().iter().enumerate() {
        if let Some(p) = node.parent {
            adjacency[i].push(p);
            adjacency[p].push(i);
        }
    }
    let mut total: u64 = 0;
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    for source in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            total += dist[u] as u64;
            for &v in &adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
    }
    Some(total as f64 / (n as f64 * (n as f64 - 1.0)))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeStats {
    pub count: u64,
    pub depth: Summary,
    pub volume: Summary,
    pub users: Summary,
    /// Excludes cascades whose index is not applicable.
    pub wiener: Summary,
}

impl TypeStats {
    fn push(&mut self, c: &Cascade) {
        self.count += 1;
        self.depth.push(c.max_depth() as f64);
        self.volume.push(c.volume() as f64);
        self.users.push(c.unique_users() as f64);
        if let Some(w) = wiener_index(c) {
            self.wiener.push(w);
        }
    }

    fn merge(&mut self, other: &TypeStats) {
        self.count += other.count;
        self.depth.merge(&other.depth);
        self.volume.merge(&other.volume);
        self.users.merge(&other.users);
        self.wiener.merge(&other.wiener);
    }
}

/// Per-type depth/volume/users/Wiener aggregates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TypeStatsSummary {
    pub per_type: BTreeMap<CascadeType, TypeStats>,
}

impl TypeStatsSummary {
    pub fn total(&self) -> u64 {
        self.per_type.values().map(|s| s.count).sum()
    }

    pub fn count(&self, t: CascadeType) -> u64 {
        self.per_type.get(&t).map_or(0, |s| s.count)
    }

    pub fn merge(&mut self, other: &TypeStatsSummary) {
        for (t, s) in &other.per_type {
            self.per_type.entry(*t).or_default().merge(s);
        }
    }
}

pub fn cascade_stats(forest: &[Cascade]) -> TypeStatsSummary {
    // chunk partials are merged in input order so float sums are reproducible
    let partials: Vec<TypeStatsSummary> = forest
        .par_chunks(4096)
        .map(|chunk| {
            let mut summary = TypeStatsSummary::default();
            for c in chunk {
                summary.per_type.entry(classify(c)).or_default().push(c);
            }
            summary
        })
        .collect();
    partials
        .iter()
        .fold(TypeStatsSummary::default(), |mut acc, part| {
            acc.merge(part);
            acc
        })
}

#[cfg(test)]
mod tests {
    use super::super::testing::from_parents;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed_values() {
        // path of 3: ordered distances 1,1,1,1,2,2
        let path3 = from_parents(&[None, Some(0), Some(1)]);
        assert!((wiener_index(&path3).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let star3 = from_parents(&[None, Some(0), Some(0)]);
        assert!((wiener_index(&star3).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        let path2 = from_parents(&[None, Some(0)]);
        assert_eq!(wiener_index(&path2), Some(1.0));
        for c in [&path3, &star3, &path2] {
            assert!((wiener_index(c).unwrap() - wiener_index_oracle(c).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn singleton_is_not_applicable() {
        let single = from_parents(&[None]);
        assert_eq!(wiener_index(&single), None);
        assert_eq!(wiener_index_oracle(&single), None);
    }

    #[test]
    fn stats_for_small_forests() {
        let chain = from_parents(&[None, Some(0), Some(1)]);
        let star = from_parents(&[None, Some(0), Some(0)]);
        let s = cascade_stats(std::slice::from_ref(&chain));
        assert_eq!(s.count(CascadeType::A), 1);
        assert_eq!(s.per_type[&CascadeType::A].depth.mean(), Some(2.0));
        assert_eq!(s.per_type[&CascadeType::A].volume.mean(), Some(3.0));

        let s = cascade_stats(&[chain, star, from_parents(&[None])]);
        assert_eq!(s.count(CascadeType::A), 1);
        assert_eq!(s.count(CascadeType::B), 1);
        assert_eq!(s.count(CascadeType::S), 1);
        assert_eq!(s.total(), 3);
        // singleton contributes no Wiener sample
        assert_eq!(s.per_type[&CascadeType::S].wiener.count, 0);

        assert_eq!(cascade_stats(&[]).total(), 0);
    }

    fn arb_parents(max_n: usize) -> impl Strategy<Value = Vec<Option<usize>>> {
        (1..=max_n).prop_flat_map(|n| {
            (1..n)
                .map(|i| (0..i).prop_map(Some).boxed())
                .collect::<Vec<_>>()
                .prop_map(|tail| std::iter::once(None).chain(tail).collect())
        })
    }

    proptest! {
        #[test]
        fn linear_pass_matches_all_pairs(parents in arb_parents(60)) {
            let c = from_parents(&parents);
            match (wiener_index(&c), wiener_index_oracle(&c)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (None, None) => prop_assert_eq!(c.volume(), 1),
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }
    }
}

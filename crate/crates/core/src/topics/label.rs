use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::HashtagGraph;
use crate::error::{Error, Result};

pub const DEFAULT_TAU: f64 = 2.0;

/// Expert-labeled hashtags per topic. A hashtag may seed several topics.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TopicSeedSet {
    topics: Vec<String>,
    seeds: BTreeMap<String, BTreeSet<String>>,
}

#[derive(Serialize, Deserialize)]
struct SeedFile {
    topics: Vec<SeedTopic>,
}

#[derive(Serialize, Deserialize)]
struct SeedTopic {
    name: String,
    hashtags: Vec<String>,
}

fn normalize_tag(tag: &str) -> String {
    tag.trim().trim_start_matches('#').to_ascii_lowercase()
}

impl TopicSeedSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a topic (if new) and seeds it with `hashtags`.
    pub fn add_topic<S: AsRef<str>>(&mut self, name: &str, hashtags: &[S]) -> &mut Self {
        if !self.topics.iter().any(|t| t == name) {
            self.topics.push(name.to_string());
        }
        let set = self.seeds.entry(name.to_string()).or_default();
        set.extend(hashtags.iter().map(|h| normalize_tag(h.as_ref())));
        self
    }

    pub fn topics(&self) -> &[String] {
        &self.topics
    }

    pub fn seeds_of(&self, topic: &str) -> Option<&BTreeSet<String>> {
        self.seeds.get(topic)
    }

    /// Hashtag -> topics it seeds.
    pub fn labels(&self) -> BTreeMap<String, BTreeSet<String>> {
        let mut labels: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        for (topic, tags) in &self.seeds {
            for tag in tags {
                labels.entry(tag.clone()).or_default().insert(topic.clone());
            }
        }
        labels
    }

    pub fn hashtag_count(&self) -> usize {
        self.labels().len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.values().all(BTreeSet::is_empty)
    }

    pub fn from_json(text: &str) -> Result<TopicSeedSet> {
        let file: SeedFile = serde_json::from_str(text)
            .map_err(|e| Error::InvalidParameter(format!("seed file: {e}")))?;
        let mut set = TopicSeedSet::new();
        for topic in file.topics {
            set.add_topic(&topic.name, &topic.hashtags);
        }
        Ok(set)
    }

    pub fn to_json(&self) -> String {
        let file = SeedFile {
            topics: self
                .topics
                .iter()
                .map(|name| SeedTopic {
                    name: name.clone(),
                    hashtags: self.seeds[name].iter().cloned().collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("seed serialization cannot fail")
    }
}

/// Result of label propagation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TopicAssignment {
    pub topics: Vec<String>,
    /// Accumulated edge weight per topic for every non-seed hashtag that
    /// received any. Labeled hashtags keep the scores of the round that
    /// labeled them; the rest keep those of the last round.
    pub scores: BTreeMap<String, BTreeMap<String, u64>>,
    pub labels: BTreeMap<String, BTreeSet<String>>,
    pub seed_labels: BTreeMap<String, BTreeSet<String>>,
    pub tau: f64,
    pub rounds: usize,
}

impl TopicAssignment {
    pub fn labels_of(&self, tag: &str) -> Option<&BTreeSet<String>> {
        self.labels.get(tag)
    }

    /// Hashtags carrying `topic`.
    pub fn hashtags_with<'a>(&'a self, topic: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.labels
            .iter()
            .filter(move |(_, ts)| ts.contains(topic))
            .map(|(h, _)| h.as_str())
    }
}

/// Propagates seed topics across the co-occurrence graph.
///
/// Per round, every edge with exactly one labeled endpoint adds its weight
/// to the unlabeled endpoint's score for each of the labeled endpoint's
/// topics; edges with both or neither endpoint labeled contribute nothing.
/// Then each unlabeled vertex takes every topic whose score exceeds `tau`.
/// Labels are frozen at the start of a round, so the result does not depend
/// on edge order. Already-labeled vertices never gain topics.
pub fn label_hashtags(
    g: &HashtagGraph,
    seeds: &TopicSeedSet,
    tau: f64,
    rounds: usize,
) -> Result<TopicAssignment> {
    if !(tau >= 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be >= 0, got {tau}")));
    }
    if rounds == 0 {
        return Err(Error::InvalidParameter("rounds must be >= 1".into()));
    }
    let topics: Vec<String> = seeds.topics().to_vec();
    let topic_index: HashMap<&str, usize> =
        topics.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let seed_labels = seeds.labels();

    let n = g.vertex_count();
    let mut labels: Vec<Option<BTreeSet<usize>>> = vec![None; n];
    for (tag, ts) in &seed_labels {
        if let Some(id) = g.id(tag) {
            labels[id as usize] = Some(ts.iter().map(|t| topic_index[t.as_str()]).collect());
        }
    }
    let mut scores: Vec<BTreeMap<usize, u64>> = vec![BTreeMap::new(); n];

    for _ in 0..rounds {
        for (v, s) in scores.iter_mut().enumerate() {
            if labels[v].is_none() {
                s.clear();
            }
        }
        for (a, b, w) in g.raw_edges() {
            let (source, target) = match (&labels[a as usize], &labels[b as usize]) {
                (Some(_), None) => (a, b),
                (None, Some(_)) => (b, a),
                _ => continue,
            };
            let source_topics = labels[source as usize].as_ref().expect("labeled");
            let target_scores = &mut scores[target as usize];
            for &t in source_topics {
                *target_scores.entry(t).or_insert(0) += w;
            }
        }
        let mut newly_labeled = 0;
        for v in 0..n {
            if labels[v].is_some() {
                continue;
            }
            let passing: BTreeSet<usize> = scores[v]
                .iter()
                .filter(|(_, &p)| p as f64 > tau)
                .map(|(&t, _)| t)
                .collect();
            if !passing.is_empty() {
                labels[v] = Some(passing);
                newly_labeled += 1;
            }
        }
        if newly_labeled == 0 {
            // later rounds would repeat this one exactly
            break;
        }
    }

    let mut out_labels: BTreeMap<String, BTreeSet<String>> = seed_labels.clone();
    let mut out_scores: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for v in 0..n {
        let name = g.name(v as u32);
        if seed_labels.contains_key(name) {
            continue;
        }
        if let Some(ts) = &labels[v] {
            out_labels.insert(name.to_string(), ts.iter().map(|&t| topics[t].clone()).collect());
        }
        if !scores[v].is_empty() {
            out_scores.insert(
                name.to_string(),
                scores[v].iter().map(|(&t, &p)| (topics[t].clone(), p)).collect(),
            );
        }
    }
    Ok(TopicAssignment {
        topics,
        scores: out_scores,
        labels: out_labels,
        seed_labels,
        tau,
        rounds,
    })
}

/// Randomly withholds `holdout_count` seed hashtags (with their true labels)
/// for evaluation; the rest stay as training seeds.
pub fn holdout_split(
    seeds: &TopicSeedSet,
    holdout_count: usize,
    rng_seed: u64,
) -> Result<(TopicSeedSet, BTreeMap<String, BTreeSet<String>>)> {
    let labels = seeds.labels();
    if holdout_count >= labels.len() && holdout_count > 0 {
        return Err(Error::OutOfRange {
            what: "holdout count",
            detail: format!("{holdout_count} >= {} seed hashtags", labels.len()),
        });
    }
    let mut tags: Vec<&String> = labels.keys().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    tags.shuffle(&mut rng);
    let held: BTreeSet<&String> = tags.into_iter().take(holdout_count).collect();

    let mut train = TopicSeedSet::new();
    for topic in seeds.topics() {
        let kept: Vec<&String> = seeds.seeds[topic]
            .iter()
            .filter(|h| !held.contains(h))
            .collect();
        train.add_topic(topic, &kept);
    }
    let test = labels
        .iter()
        .filter(|(h, _)| held.contains(h))
        .map(|(h, ts)| (h.clone(), ts.clone()))
        .collect();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(edges: &[(&str, &str, u64)]) -> HashtagGraph {
        let mut g = HashtagGraph::new();
        for &(a, b, w) in edges {
            g.add_edge(a, b, w);
        }
        g
    }

    fn seeds(topics: &[(&str, &[&str])]) -> TopicSeedSet {
        let mut s = TopicSeedSet::new();
        for (name, tags) in topics {
            s.add_topic(name, tags);
        }
        s
    }

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn single_propagation() {
        let g = graph(&[("a", "b", 5)]);
        let s = seeds(&[("t1", &["a"])]);
        let out = label_hashtags(&g, &s, 3.0, 1).unwrap();
        assert_eq!(out.labels_of("b"), Some(&set(&["t1"])));
        assert_eq!(out.scores["b"]["t1"], 5);

        let out = label_hashtags(&g, &s, 5.0, 1).unwrap();
        assert_eq!(out.labels_of("b"), None);
        assert_eq!(out.scores["b"]["t1"], 5);
    }

    #[test]
    fn multiple_topics_accumulate_separately() {
        let g = graph(&[("a", "b", 2), ("c", "b", 4)]);
        let s = seeds(&[("t1", &["a"]), ("t2", &["c"])]);
        let out = label_hashtags(&g, &s, 1.0, 1).unwrap();
        assert_eq!(out.labels_of("b"), Some(&set(&["t1", "t2"])));
    }

    #[test]
    fn both_labeled_edge_contributes_nothing() {
        let g = graph(&[("a", "c", 10)]);
        let s = seeds(&[("t1", &["a"]), ("t2", &["c"])]);
        let out = label_hashtags(&g, &s, 0.0, 1).unwrap();
        assert_eq!(out.labels_of("a"), Some(&set(&["t1"])));
        assert_eq!(out.labels_of("c"), Some(&set(&["t2"])));
        assert!(out.scores.is_empty());
    }

    #[test]
    fn one_round_does_not_chain() {
        let g = graph(&[("a", "b", 5), ("b", "c", 5)]);
        let s = seeds(&[("t", &["a"])]);
        let one = label_hashtags(&g, &s, 1.0, 1).unwrap();
        assert_eq!(one.labels_of("c"), None);
        let two = label_hashtags(&g, &s, 1.0, 2).unwrap();
        assert_eq!(two.labels_of("c"), Some(&set(&["t"])));
        assert_eq!(two.scores["b"]["t"], 5);
    }

    #[test]
    fn seeds_absent_from_graph_are_kept() {
        let g = graph(&[("x", "y", 1)]);
        let s = seeds(&[("t", &["#Missing"])]);
        let out = label_hashtags(&g, &s, 0.0, 1).unwrap();
        assert_eq!(out.labels_of("missing"), Some(&set(&["t"])));
        assert_eq!(out.labels_of("x"), None);
    }

    #[test]
    fn empty_seed_set_labels_nothing() {
        let g = graph(&[("x", "y", 9)]);
        let out = label_hashtags(&g, &TopicSeedSet::new(), 0.0, 3).unwrap();
        assert!(out.labels.is_empty());
    }

    #[test]
    fn invalid_parameters() {
        let g = HashtagGraph::new();
        assert!(label_hashtags(&g, &TopicSeedSet::new(), -1.0, 1).is_err());
        assert!(label_hashtags(&g, &TopicSeedSet::new(), f64::NAN, 1).is_err());
        assert!(label_hashtags(&g, &TopicSeedSet::new(), 1.0, 0).is_err());
    }

    #[test]
    fn rerun_is_identical() {
        let g = graph(&[("a", "b", 3), ("b", "c", 4), ("c", "d", 1), ("a", "d", 7)]);
        let s = seeds(&[("t", &["a"]), ("u", &["c"])]);
        assert_eq!(
            label_hashtags(&g, &s, 2.0, 1).unwrap(),
            label_hashtags(&g, &s, 2.0, 1).unwrap()
        );
    }

    #[test]
    fn seed_file_round_trip() {
        let text = r##"{"topics":[{"name":"Conspiracy","hashtags":["QAnon","#pizzagate"]},{"name":"Politics","hashtags":["maga","qanon"]}]}"##;
        let s = TopicSeedSet::from_json(text).unwrap();
        assert_eq!(s.topics(), &["Conspiracy".to_string(), "Politics".to_string()]);
        assert_eq!(s.labels()["qanon"], set(&["Conspiracy", "Politics"]));
        assert_eq!(TopicSeedSet::from_json(&s.to_json()).unwrap(), s);
        assert!(TopicSeedSet::from_json("{}").is_err());
    }

    #[test]
    fn holdout_protocol() {
        let tags: Vec<String> = (0..126).map(|i| format!("h{i}")).collect();
        let mut s = TopicSeedSet::new();
        for (k, chunk) in tags.chunks(21).enumerate() {
            s.add_topic(&format!("topic{k}"), chunk);
        }
        let (train, test) = holdout_split(&s, 42, 7).unwrap();
        assert_eq!(test.len(), 42);
        assert_eq!(train.hashtag_count(), 84);
        assert_eq!(holdout_split(&s, 42, 7).unwrap(), (train.clone(), test.clone()));
        for (h, ts) in &test {
            assert_eq!(ts, &s.labels()[h]);
            assert!(!train.labels().contains_key(h));
        }

        let (train, test) = holdout_split(&s, 0, 1).unwrap();
        assert!(test.is_empty());
        assert_eq!(train, s);
        assert!(holdout_split(&s, 126, 1).is_err());
    }
}

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Post;

/// Weighted, undirected hashtag co-occurrence graph. The weight of `{a, b}`
/// is the number of posts whose deduplicated hashtag set contains both.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HashtagGraph {
    names: Vec<String>,
    index: HashMap<String, u32>,
    /// Keyed by `(low, high)` vertex ids.
    edges: HashMap<(u32, u32), u64>,
}

impl HashtagGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, tag: &str) -> u32 {
        if let Some(&id) = self.index.get(tag) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(tag.to_string());
        self.index.insert(tag.to_string(), id);
        id
    }

    /// Adds `weight` to edge `{a, b}`. Self-pairs and zero weights are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: u64) {
        let (a, b) = (self.add_vertex(a), self.add_vertex(b));
        if a == b || weight == 0 {
            return;
        }
        *self.edges.entry((a.min(b), a.max(b))).or_insert(0) += weight;
    }

    /// Folds one post's hashtags into the graph.
    pub fn add_post_tags<S: AsRef<str>>(&mut self, tags: &[S]) {
        let mut ids: Vec<u32> = tags.iter().map(|t| self.add_vertex(t.as_ref())).collect();
        ids.sort_unstable();
        ids.dedup();
        for (i, &a) in ids.iter().enumerate() {
            for &b in &ids[i + 1..] {
                *self.edges.entry((a, b)).or_insert(0) += 1;
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }

    pub fn weight(&self, a: &str, b: &str) -> u64 {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&a), Some(&b)) if a != b => {
                self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0)
            }
            _ => 0,
        }
    }

    /// Vertex names, sorted.
    pub fn vertices(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.names.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }

    /// Edges as `(a, b, w)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(&str, &str, u64)> {
        let mut e: Vec<(&str, &str, u64)> = self
            .edges
            .iter()
            .map(|(&(a, b), &w)| {
                let (a, b) = (self.names[a as usize].as_str(), self.names[b as usize].as_str());
                if a < b {
                    (a, b, w)
                } else {
                    (b, a, w)
                }
            })
            .collect();
        e.sort_unstable();
        e
    }

    pub(crate) fn name(&self, id: u32) -> &str {
        &self.names[id as usize]
    }

    pub(crate) fn id(&self, tag: &str) -> Option<u32> {
        self.index.get(tag).copied()
    }

    pub(crate) fn raw_edges(&self) -> impl Iterator<Item = (u32, u32, u64)> + '_ {
        self.edges.iter().map(|(&(a, b), &w)| (a, b, w))
    }

    /// Writes vertex lines then edge lines, each sorted.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for v in self.vertices() {
            serde_json::to_writer(&mut out, &GraphLine::Vertex { vertex: v.to_string() })
                .map_err(|e| Error::Stream(e.into()))?;
            out.write_all(b"\n")?;
        }
        for (u, v, w) in self.edges() {
            serde_json::to_writer(
                &mut out,
                &GraphLine::Edge {
                    u: u.to_string(),
                    v: v.to_string(),
                    w,
                },
            )
            .map_err(|e| Error::Stream(e.into()))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<HashtagGraph> {
        let mut g = HashtagGraph::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: GraphLine = serde_json::from_str(&line).map_err(|e| {
                Error::InvalidParameter(format!("hashtag graph line {}: {e}", i + 1))
            })?;
            match parsed {
                GraphLine::Vertex { vertex } => {
                    g.add_vertex(&vertex);
                }
                GraphLine::Edge { u, v, w } => g.add_edge(&u, &v, w),
            }
        }
        Ok(g)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum GraphLine {
    Vertex { vertex: String },
    Edge { u: String, v: String, w: u64 },
}

pub fn build_hashtag_graph<'a>(posts: impl IntoIterator<Item = &'a Post>) -> HashtagGraph {
    let mut g = HashtagGraph::new();
    for post in posts {
        g.add_post_tags(&post.hashtags);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::PostKind;
    use proptest::prelude::*;

    fn post(tags: &[&str]) -> Post {
        Post {
            id: "p".into(),
            parent_id: None,
            user_id: "u".into(),
            timestamp: 0,
            kind: PostKind::Post,
            body: String::new(),
            hashtags: tags.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn pair_and_duplicates() {
        let g = build_hashtag_graph(&[post(&["a", "b"])]);
        assert_eq!(g.weight("a", "b"), 1);
        let g = build_hashtag_graph(&[post(&["a", "a", "b"])]);
        assert_eq!(g.weight("a", "b"), 1);
        assert_eq!(g.weight("a", "a"), 0);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn hand_counted_fixture() {
        let posts = [post(&["a", "b", "c"]), post(&["b", "c"]), post(&["c", "d", "c"]), post(&["e"])];
        let g = build_hashtag_graph(&posts);
        assert_eq!(
            g.edges(),
            vec![("a", "b", 1), ("a", "c", 1), ("b", "c", 2), ("c", "d", 1)]
        );
        assert_eq!(g.vertices(), vec!["a", "b", "c", "d", "e"]);
    }

    #[test]
    fn jsonl_round_trip() {
        let posts = [post(&["x", "y"]), post(&["y", "z"]), post(&["solo"])];
        let g = build_hashtag_graph(&posts);
        let mut buf = Vec::new();
        g.write_jsonl(&mut buf).unwrap();
        let back = HashtagGraph::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back.vertices(), g.vertices());
        assert_eq!(back.edges(), g.edges());
    }

    proptest! {
        #[test]
        fn weight_counts_posts_containing_both(
            posts in proptest::collection::vec(proptest::collection::vec(0u8..6, 0..5), 0..30)
        ) {
            let posts: Vec<Post> = posts
                .iter()
                .map(|tags| {
                    let names: Vec<String> = tags.iter().map(|t| format!("t{}", t)).collect();
                    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
                    post(&refs)
                })
                .collect();
            let g = build_hashtag_graph(&posts);
            let vertices = g.vertices();
            for &a in &vertices {
                for &b in &vertices {
                    if a == b {
                        continue;
                    }
                    let brute = posts
                        .iter()
                        .filter(|p| p.hashtags.iter().any(|t| t == a) && p.hashtags.iter().any(|t| t == b))
                        .count() as u64;
                    prop_assert_eq!(g.weight(a, b), brute);
                }
            }
            prop_assert!(g.edges().iter().all(|&(a, b, w)| a < b && w >= 1));
        }
    }
}

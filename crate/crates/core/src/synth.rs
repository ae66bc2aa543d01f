//! Seeded synthetic corpora for tests, benchmarks and fixtures.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cascade::{generate_synthetic_cascade, InterArrival, SyntheticCascadeParams};
use crate::ingest::{Post, PostKind};
use crate::topics::TopicSeedSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusParams {
    pub posts: usize,
    pub users: usize,
    pub topics: usize,
    pub hashtags_per_topic: usize,
    /// Leading hashtags of every topic vocabulary that go into the seed set.
    pub seeds_per_topic: usize,
    /// Up to this many hashtags per post, drawn uniformly from `0..=max`.
    pub max_tags_per_post: usize,
    /// Probability that a hashtag comes from a topic other than the cascade's.
    pub off_topic_rate: f64,
    /// Tail exponent of the discrete power-law cascade volume.
    pub volume_exponent: f64,
    pub max_volume: usize,
    pub branching_bias: f64,
    pub mean_reply_gap_secs: f64,
    pub start_ts: i64,
    /// Cascade roots are spread uniformly over this many seconds.
    pub span_secs: i64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            posts: 1_000,
            users: 200,
            topics: 3,
            hashtags_per_topic: 12,
            seeds_per_topic: 4,
            max_tags_per_post: 2,
            off_topic_rate: 0.05,
            volume_exponent: 1.6,
            max_volume: 200,
            branching_bias: 1.0,
            mean_reply_gap_secs: 3_600.0,
            start_ts: 1_500_000_000,
            span_secs: 30 * 86_400,
        }
    }
}

pub struct SyntheticCorpus {
    /// Sorted by `(timestamp, id)`.
    pub posts: Vec<Post>,
    pub seeds: TopicSeedSet,
    /// Root post id -> planted topic.
    pub cascade_topics: BTreeMap<String, String>,
}

pub fn topic_hashtag(topic: usize, k: usize) -> String {
    format!("topic{topic}tag{k}")
}

/// Generates cascades until `params.posts` posts exist. Deterministic in `seed`.
pub fn generate_corpus(params: &CorpusParams, seed: u64) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topics = params.topics.max(1);
    let vocab = params.hashtags_per_topic.max(1);
    let mut seeds = TopicSeedSet::new();
    for t in 0..topics {
        let tags: Vec<String> = (0..params.seeds_per_topic.min(vocab))
            .map(|k| topic_hashtag(t, k))
            .collect();
        seeds.add_topic(&format!("topic{t}"), &tags);
    }

    let mut posts = Vec::with_capacity(params.posts);
    let mut cascade_topics = BTreeMap::new();
    let mut index: u64 = 0;
    while posts.len() < params.posts {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let volume = (u.powf(-1.0 / params.volume_exponent) as usize)
            .clamp(1, params.max_volume.max(1))
            .min(params.posts - posts.len());
        let topic = rng.gen_range(0..topics);
        let cascade = generate_synthetic_cascade(
            &SyntheticCascadeParams {
                volume,
                branching_bias: params.branching_bias,
                inter_arrival: InterArrival::Exponential {
                    mean_secs: params.mean_reply_gap_secs,
                },
                start_ts: params.start_ts + rng.gen_range(0..params.span_secs.max(1)),
                user_pool: params.users.max(1),
                id_prefix: "p".into(),
            },
            (seed << 32) ^ index,
        );
        index += 1;
        cascade_topics.insert(cascade.id().to_string(), format!("topic{topic}"));
        let nodes = cascade.nodes();
        for node in nodes {
            let tag_count = rng.gen_range(0..=params.max_tags_per_post);
            let hashtags: Vec<String> = (0..tag_count)
                .map(|_| {
                    let t = if topics > 1 && rng.gen::<f64>() < params.off_topic_rate {
                        (topic + rng.gen_range(1..topics)) % topics
                    } else {
                        topic
                    };
                    topic_hashtag(t, rng.gen_range(0..vocab))
                })
                .collect();
            let mut body = String::from("synthetic post");
            for tag in &hashtags {
                body.push_str(" #");
                body.push_str(tag);
            }
            let kind = match node.parent {
                None => PostKind::Post,
                Some(_) if rng.gen::<f64>() < 0.1 => PostKind::Quote,
                Some(_) => PostKind::Reply,
            };
            posts.push(Post {
                id: node.post_id.clone(),
                parent_id: node.parent.map(|p| nodes[p].post_id.clone()),
                user_id: node.user_id.clone(),
                timestamp: node.timestamp,
                kind,
                body,
                hashtags,
            });
        }
    }
    posts.sort_unstable_by(|a, b| (a.timestamp, &a.id).cmp(&(b.timestamp, &b.id)));
    SyntheticCorpus {
        posts,
        seeds,
        cascade_topics,
    }
}

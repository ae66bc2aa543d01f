//! Hashtag topics: co-occurrence graph, seed-label propagation, cascade topic
//! assignment, user tie strength and multi-label evaluation.

mod assign;
mod eval;
mod graph;
mod label;
mod ties;

pub use assign::{assign_cascade_topics, DEFAULT_MIN_COUNT};
pub use eval::{evaluate_multilabel, MultiLabelReport};
pub use graph::{build_hashtag_graph, HashtagGraph};
pub use label::{holdout_split, label_hashtags, TopicAssignment, TopicSeedSet, DEFAULT_TAU};
pub use ties::{tie_strength, topic_tie_strength, TieStrengthTable};

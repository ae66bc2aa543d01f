use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::{Deserialize, Serialize};

use super::{Cascade, NodeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InterArrival {
    /// Every reply arrives this many seconds after the previous node.
    Fixed(i64),
    /// Exponential gaps with the given mean, rounded up to at least one second.
    Exponential { mean_secs: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCascadeParams {
    pub volume: usize,
    /// Attachment weight of an existing node is `1 + bias * out_degree`.
    pub branching_bias: f64,
    pub inter_arrival: InterArrival,
    pub start_ts: i64,
    /// Size of the user pool replies are drawn from; 0 gives every node its own user.
    pub user_pool: usize,
    pub id_prefix: String,
}

impl Default for SyntheticCascadeParams {
    fn default() -> Self {
        SyntheticCascadeParams {
            volume: 10,
            branching_bias: 0.0,
            inter_arrival: InterArrival::Exponential { mean_secs: 600.0 },
            start_ts: 1_500_000_000,
            user_pool: 0,
            id_prefix: "s".into(),
        }
    }
}

/// Grows a random tree by preferential attachment. Deterministic in `seed`;
/// timestamps strictly increase with node index.
pub fn generate_synthetic_cascade(params: &SyntheticCascadeParams, seed: u64) -> Cascade {
    let n = params.volume.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut parents: Vec<Option<usize>> = Vec::with_capacity(n);
    parents.push(None);
    let bias = params.branching_bias.max(0.0);
    for k in 1..n {
        // Weight mass: k nodes of base weight 1 plus bias per existing edge (k - 1 edges).
        // Sampling an edge uniformly and taking its parent end picks a node
        // proportionally to its out-degree.
        let edges = k - 1;
        let base = k as f64;
        let extra = bias * edges as f64;
        let parent = if edges > 0 && rng.gen::<f64>() * (base + extra) >= base {
            let edge_child = rng.gen_range(1..k);
            parents[edge_child].expect("non-root")
        } else {
            rng.gen_range(0..k)
        };
        parents.push(Some(parent));
    }

    let mut ts = params.start_ts;
    let exp = match params.inter_arrival {
        InterArrival::Exponential { mean_secs } if mean_secs > 0.0 => {
            Some(Exp::new(1.0 / mean_secs).expect("positive rate"))
        }
        _ => None,
    };
    let specs = parents
        .into_iter()
        .enumerate()
        .map(|(i, parent)| {
            if i > 0 {
                let gap = match (params.inter_arrival, &exp) {
                    (InterArrival::Fixed(secs), _) => secs.max(1),
                    (_, Some(exp)) => (exp.sample(&mut rng).ceil() as i64).max(1),
                    _ => 1,
                };
                ts += gap;
            }
            let user = if params.user_pool == 0 {
                i
            } else {
                rng.gen_range(0..params.user_pool)
            };
            NodeSpec {
                post_id: format!("{}{seed}-{i}", params.id_prefix),
                user_id: format!("user{user}"),
                timestamp: ts,
                parent,
                hashtags: Vec::new(),
            }
        })
        .collect();
    // increasing timestamps with parent < child make index order the replay order
    Cascade::from_canonical(specs, false)
}

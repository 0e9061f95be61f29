//! Farthest-first traversal for turning a target cluster count into a lambda
//! value, parameterized by the per-point cost of the algorithm being tuned.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::baselines::InitMode;
use crate::error::{CraftError, Result};
use crate::model::{global_categorical_means, Dataset, FeatureSlot};

/// Per-point cost against a reference treated as a singleton center.
pub trait CostProbe {
    fn cost(&self, data: &Dataset, point: usize, reference: usize) -> f64;
    /// Cost against the global mean, used when the traversal starts from it.
    fn cost_to_global_mean(&self, data: &Dataset, point: usize) -> f64;
}

/// Squared Euclidean distance over the numeric features; matches the
/// DP-means per-point objective.
pub struct SquaredEuclideanProbe;

impl CostProbe for SquaredEuclideanProbe {
    fn cost(&self, data: &Dataset, point: usize, reference: usize) -> f64 {
        (0..data.n_num())
            .map(|s| {
                let d = data.num_value(s, point) - data.num_value(s, reference);
                d * d
            })
            .sum()
    }

    fn cost_to_global_mean(&self, data: &Dataset, point: usize) -> f64 {
        (0..data.n_num())
            .map(|s| {
                let col = data.num_column(s);
                let mean = col.iter().sum::<f64>() / col.len() as f64;
                let d = data.num_value(s, point) - mean;
                d * d
            })
            .sum()
    }
}

/// Singleton-center cost mirroring the mixed-data objective: categorical
/// cross-entropy against a smoothed one-hot distribution at the reference
/// value, plus (x - zeta)^2 / 2 on numeric features with sigma = 1 and every
/// feature treated as selected.
pub struct CraftProbe {
    pub smoothing: f64,
}

impl CostProbe for CraftProbe {
    fn cost(&self, data: &Dataset, point: usize, reference: usize) -> f64 {
        let s = self.smoothing;
        let mut c = 0.0;
        for feat in data.features() {
            match feat.slot {
                FeatureSlot::Cat(slot) => {
                    let card = data.cat_cardinality(slot) as f64;
                    let denom = 1.0 + s * card;
                    let hit = data.cat_value(slot, point) == data.cat_value(slot, reference);
                    let p = if hit { (1.0 + s) / denom } else { s / denom };
                    c -= p.ln();
                }
                FeatureSlot::Num(slot) => {
                    let d = data.num_value(slot, point) - data.num_value(slot, reference);
                    c += d * d / 2.0;
                }
            }
        }
        c
    }

    fn cost_to_global_mean(&self, data: &Dataset, point: usize) -> f64 {
        let eta0 = global_categorical_means(data, self.smoothing);
        let mut c = 0.0;
        for feat in data.features() {
            match feat.slot {
                FeatureSlot::Cat(slot) => {
                    c -= eta0[slot][data.cat_value(slot, point) as usize].ln();
                }
                FeatureSlot::Num(slot) => {
                    let col = data.num_column(slot);
                    let mean = col.iter().sum::<f64>() / col.len() as f64;
                    let d = data.num_value(slot, point) - mean;
                    c += d * d / 2.0;
                }
            }
        }
        c
    }
}

/// Run a farthest-first traversal to pick lambda for a target of k clusters:
/// starting from the init reference, add the point with the largest
/// min-distance to the traversal set k-1 times, and return the min-distance
/// of the last point added. Ties go to the lowest row index.
pub fn farthest_first_lambda<P: CostProbe>(
    data: &Dataset,
    k: usize,
    probe: &P,
    init: InitMode,
    seed: u64,
) -> Result<f64> {
    let n = data.n();
    if k > n {
        return Err(CraftError::KTooLarge { k, n });
    }
    if k < 2 {
        return Err(CraftError::ConfigInvalid("target k must be at least 2".into()));
    }
    let mut in_set = vec![false; n];
    let mut min_dist: Vec<f64> = match init {
        InitMode::GlobalMean => (0..n).map(|p| probe.cost_to_global_mean(data, p)).collect(),
        InitMode::RandomPoint => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let first = rng.random_range(0..n);
            in_set[first] = true;
            (0..n).map(|p| probe.cost(data, p, first)).collect()
        }
    };
    let mut lambda = 0.0;
    for _ in 0..k - 1 {
        let farthest = (0..n)
            .filter(|&p| !in_set[p])
            .max_by(|&a, &b| {
                min_dist[a]
                    .partial_cmp(&min_dist[b])
                    .unwrap()
                    .then(b.cmp(&a)) // prefer the lower index on ties
            })
            .expect("k <= n guarantees a candidate");
        lambda = min_dist[farthest];
        in_set[farthest] = true;
        for p in 0..n {
            if !in_set[p] {
                min_dist[p] = min_dist[p].min(probe.cost(data, p, farthest));
            }
        }
    }
    Ok(lambda)
}

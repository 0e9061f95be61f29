//! Planted-subspace synthetic data generators. Each cluster owns a feature
//! subset drawn from a signal distribution; every other feature is noise.
//! The generated dataset carries a label column so downstream metrics can
//! score recovery.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{CraftError, Result};
use crate::model::{ingest, Column, ColumnKind, Dataset, Schema};

fn default_signal_p() -> f64 {
    0.9
}

fn default_noise_p() -> f64 {
    0.1
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoricalCluster {
    pub rows: usize,
    pub features: Vec<usize>,
    /// Bernoulli parameter for the planted features.
    #[serde(default = "default_signal_p")]
    pub signal_p: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CategoricalSubspaceSpec {
    pub d: usize,
    pub clusters: Vec<CategoricalCluster>,
    /// Bernoulli parameter for the unplanted features.
    #[serde(default = "default_noise_p")]
    pub noise_p: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericCluster {
    pub rows: usize,
    pub features: Vec<usize>,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NumericSubspaceSpec {
    pub d: usize,
    pub clusters: Vec<NumericCluster>,
    pub noise_mean: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

fn validate_clusters(d: usize, clusters: &[(usize, &[usize])]) -> Result<()> {
    if clusters.is_empty() {
        return Err(CraftError::SpecInvalid("at least one cluster required".into()));
    }
    for (i, (rows, features)) in clusters.iter().enumerate() {
        if *rows == 0 {
            return Err(CraftError::SpecInvalid(format!("cluster {i} has zero rows")));
        }
        if let Some(&f) = features.iter().find(|&&f| f >= d) {
            return Err(CraftError::SpecInvalid(format!(
                "cluster {i} feature index {f} out of range for d = {d}"
            )));
        }
    }
    Ok(())
}

fn masks_of(d: usize, feature_sets: &[&[usize]]) -> Vec<Vec<bool>> {
    feature_sets
        .iter()
        .map(|features| {
            let mut m = vec![false; d];
            for &f in *features {
                m[f] = true;
            }
            m
        })
        .collect()
}

fn schema_with_labels(d: usize, k: usize, kind: impl Fn(usize) -> ColumnKind) -> Schema {
    let mut columns: Vec<Column> = (0..d)
        .map(|i| Column {
            name: format!("f{i}"),
            kind: kind(i),
        })
        .collect();
    columns.push(Column {
        name: "label".into(),
        kind: ColumnKind::Categorical {
            categories: (0..k).map(|c| format!("c{c}")).collect(),
        },
    });
    Schema {
        columns,
        label_column: Some("label".into()),
    }
}

/// Binary data with per-cluster planted Bernoulli signal features. Draw
/// order is cluster-major, then row, then feature, so outputs are
/// reproducible under the spec's seed.
pub fn gen_categorical(
    spec: &CategoricalSubspaceSpec,
) -> Result<(Dataset, Vec<u32>, Vec<Vec<bool>>)> {
    let refs: Vec<(usize, &[usize])> = spec
        .clusters
        .iter()
        .map(|c| (c.rows, c.features.as_slice()))
        .collect();
    validate_clusters(spec.d, &refs)?;
    for c in &spec.clusters {
        if !(0.0..=1.0).contains(&c.signal_p) {
            return Err(CraftError::SpecInvalid("signal_p must lie in [0, 1]".into()));
        }
    }
    if !(0.0..=1.0).contains(&spec.noise_p) {
        return Err(CraftError::SpecInvalid("noise_p must lie in [0, 1]".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, cluster) in spec.clusters.iter().enumerate() {
        let planted: Vec<bool> = {
            let mut m = vec![false; spec.d];
            for &f in &cluster.features {
                m[f] = true;
            }
            m
        };
        for _ in 0..cluster.rows {
            let mut row: Vec<String> = (0..spec.d)
                .map(|d| {
                    let p = if planted[d] { cluster.signal_p } else { spec.noise_p };
                    if rng.random_bool(p) { "1" } else { "0" }.to_string()
                })
                .collect();
            row.push(format!("c{k}"));
            rows.push(row);
            labels.push(k as u32);
        }
    }
    let schema = schema_with_labels(spec.d, spec.clusters.len(), |_| ColumnKind::Categorical {
        categories: vec!["0".into(), "1".into()],
    });
    let data = ingest(&schema, &rows)?;
    let feature_sets: Vec<&[usize]> = spec.clusters.iter().map(|c| c.features.as_slice()).collect();
    Ok((data, labels, masks_of(spec.d, &feature_sets)))
}

/// Numeric data with per-cluster planted Gaussian signal features and
/// isotropic Gaussian noise elsewhere. Same draw order as gen_categorical.
pub fn gen_numeric(spec: &NumericSubspaceSpec) -> Result<(Dataset, Vec<u32>, Vec<Vec<bool>>)> {
    let refs: Vec<(usize, &[usize])> = spec
        .clusters
        .iter()
        .map(|c| (c.rows, c.features.as_slice()))
        .collect();
    validate_clusters(spec.d, &refs)?;
    for c in &spec.clusters {
        if c.sd < 0.0 || !c.sd.is_finite() || !c.mean.is_finite() {
            return Err(CraftError::SpecInvalid("cluster mean/sd must be finite, sd >= 0".into()));
        }
    }
    if spec.noise_sd < 0.0 || !spec.noise_sd.is_finite() || !spec.noise_mean.is_finite() {
        return Err(CraftError::SpecInvalid("noise mean/sd must be finite, sd >= 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(spec.noise_mean, spec.noise_sd)
        .map_err(|e| CraftError::SpecInvalid(e.to_string()))?;
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (k, cluster) in spec.clusters.iter().enumerate() {
        let signal = Normal::new(cluster.mean, cluster.sd)
            .map_err(|e| CraftError::SpecInvalid(e.to_string()))?;
        let planted: Vec<bool> = {
            let mut m = vec![false; spec.d];
            for &f in &cluster.features {
                m[f] = true;
            }
            m
        };
        for _ in 0..cluster.rows {
            let mut row: Vec<String> = (0..spec.d)
                .map(|d| {
                    let v: f64 = if planted[d] {
                        signal.sample(&mut rng)
                    } else {
                        noise.sample(&mut rng)
                    };
                    format!("{v}")
                })
                .collect();
            row.push(format!("c{k}"));
            rows.push(row);
            labels.push(k as u32);
        }
    }
    let schema = schema_with_labels(spec.d, spec.clusters.len(), |_| ColumnKind::Numeric);
    let data = ingest(&schema, &rows)?;
    let feature_sets: Vec<&[usize]> = spec.clusters.iter().map(|c| c.features.as_slice()).collect();
    Ok((data, labels, masks_of(spec.d, &feature_sets)))
}

/// 300 x 24 binary dataset: three 100-row clusters with disjoint 8-feature
/// blocks, signal Bernoulli(0.9), noise Bernoulli(0.1).
pub fn config_a(seed: u64) -> CategoricalSubspaceSpec {
    CategoricalSubspaceSpec {
        d: 24,
        clusters: (0..3)
            .map(|k| CategoricalCluster {
                rows: 100,
                features: (8 * k..8 * (k + 1)).collect(),
                signal_p: 0.9,
            })
            .collect(),
        noise_p: 0.1,
        seed,
    }
}

/// 300 x 36 numeric dataset: three 100-row clusters over feature blocks
/// 0-11, 12-23, and 21-32 (the last overlapping the second), with unit-sd
/// signals at means 1, 5, 10 and N(0, 3^2) noise elsewhere.
pub fn numeric_config(seed: u64) -> NumericSubspaceSpec {
    NumericSubspaceSpec {
        d: 36,
        clusters: vec![
            NumericCluster { rows: 100, features: (0..12).collect(), mean: 1.0, sd: 1.0 },
            NumericCluster { rows: 100, features: (12..24).collect(), mean: 5.0, sd: 1.0 },
            NumericCluster { rows: 100, features: (21..33).collect(), mean: 10.0, sd: 1.0 },
        ],
        noise_mean: 0.0,
        noise_sd: 3.0,
        seed,
    }
}

/// Non-uniform overlapping binary configuration for the approximate-budget
/// setting: cluster sizes 9, 16, and 8 features, with the third cluster
/// split between an overlap with the first and a block inside the second.
/// Signal is deterministic (Bernoulli(1)) so the per-feature gain ratio
/// stays above the high end of the epsilon_c range, and noise is
/// Bernoulli(0.2) so features planted by two other clusters keep a gain
/// ratio well below its low end for the cluster that did not plant them.
pub fn subspace3_categorical(seed: u64) -> CategoricalSubspaceSpec {
    CategoricalSubspaceSpec {
        d: 24,
        clusters: vec![
            CategoricalCluster { rows: 100, features: (0..9).collect(), signal_p: 1.0 },
            CategoricalCluster { rows: 100, features: (8..24).collect(), signal_p: 1.0 },
            CategoricalCluster {
                rows: 100,
                features: (0..4).chain(12..16).collect(),
                signal_p: 1.0,
            },
        ],
        noise_p: 0.2,
        seed,
    }
}

/// Numeric analog of subspace3_categorical: unit-sd signals against
/// variance-9 noise so an epsilon_v threshold between the two separates
/// planted from unplanted features.
pub fn subspace3_numeric(seed: u64) -> NumericSubspaceSpec {
    NumericSubspaceSpec {
        d: 36,
        clusters: vec![
            NumericCluster { rows: 100, features: (0..9).collect(), mean: 1.0, sd: 1.0 },
            NumericCluster { rows: 100, features: (8..24).collect(), mean: 5.0, sd: 1.0 },
            NumericCluster {
                rows: 100,
                features: (0..4).chain(12..16).collect(),
                mean: 10.0,
                sd: 1.0,
            },
        ],
        noise_mean: 0.0,
        noise_sd: 3.0,
        seed,
    }
}

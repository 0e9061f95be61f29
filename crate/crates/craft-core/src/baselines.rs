//! Degenerate and comparison algorithms: DP-means with either init, the
//! feature-selecting DP-RF variant, and binary-entropy clustering.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::engine::{compute_f_constants, ClusteringResult, FConstants};
use crate::error::{CraftError, Result};
use crate::model::{
    ingest, ClusterState, Column, ColumnKind, Dataset, FeatureSlot, Rho, Schema,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    GlobalMean,
    RandomPoint,
}

fn require_numeric(data: &Dataset) -> Result<()> {
    for feat in data.features() {
        if matches!(feat.slot, FeatureSlot::Cat(_)) {
            return Err(CraftError::NonNumericFeature(feat.name.clone()));
        }
    }
    Ok(())
}

fn numeric_rows(data: &Dataset) -> Vec<Vec<f64>> {
    (0..data.n())
        .map(|n| (0..data.n_num()).map(|s| data.num_value(s, n)).collect())
        .collect()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn column_means(rows: &[Vec<f64>], members: &[usize]) -> Vec<f64> {
    let d = rows[0].len();
    let mut mean = vec![0.0; d];
    for &n in members {
        for (m, v) in mean.iter_mut().zip(&rows[n]) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= members.len() as f64;
    }
    mean
}

fn members_of(z: &[usize], k: usize) -> Vec<usize> {
    (0..z.len()).filter(|&n| z[n] == k).collect()
}

/// Drop empty clusters out of parallel per-cluster vectors and renumber z.
fn compact<T>(z: &mut [usize], per_cluster: &mut Vec<T>) -> usize {
    let k = per_cluster.len();
    let mut counts = vec![0usize; k];
    for &c in z.iter() {
        counts[c] += 1;
    }
    let mut remap = vec![usize::MAX; k];
    let mut next = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > 0 {
            remap[i] = next;
            next += 1;
        }
    }
    let mut idx = 0;
    per_cluster.retain(|_| {
        let keep = counts[idx] > 0;
        idx += 1;
        keep
    });
    for c in z.iter_mut() {
        *c = remap[*c];
    }
    next
}

#[allow(clippy::too_many_arguments)] // internal plumbing shared by the baselines
fn result_from_centers(
    z: Vec<usize>,
    centers: Vec<Vec<f64>>,
    d: usize,
    objective: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    masks: Vec<Vec<bool>>,
) -> ClusteringResult {
    let k = centers.len();
    let n_num = centers.first().map_or(0, Vec::len);
    ClusteringResult {
        state: ClusterState {
            k_plus: k,
            z,
            eta: vec![Vec::new(); k],
            zeta: centers,
            sigma: vec![vec![1.0; n_num]; k],
            masks: if masks.is_empty() {
                vec![vec![true; d]; k]
            } else {
                masks
            },
            eta0: Vec::new(),
        },
        objective,
        iterations,
        converged,
        objective_trace: trace,
    }
}

/// DP-means: assign to the nearest center by squared Euclidean distance,
/// opening a new cluster when the minimum exceeds lambda. Objective is
/// sum of squared distances plus lambda * K+.
pub fn dpmeans_fit(
    data: &Dataset,
    lambda: f64,
    init: InitMode,
    seed: u64,
    max_iters: usize,
) -> Result<ClusteringResult> {
    require_numeric(data)?;
    let rows = numeric_rows(data);
    let n = rows.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init_center = match init {
        InitMode::GlobalMean => column_means(&rows, &(0..n).collect::<Vec<_>>()),
        InitMode::RandomPoint => rows[rng.random_range(0..n)].clone(),
    };
    let mut centers = vec![init_center];
    let mut z = vec![0usize; n];
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for pass in 1..=max_iters {
        let mut changed = false;
        for point in 0..n {
            let (best_k, best_d) = centers
                .iter()
                .enumerate()
                .map(|(k, c)| (k, sq_dist(&rows[point], c)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            let target = if best_d > lambda {
                centers.push(rows[point].clone());
                centers.len() - 1
            } else {
                best_k
            };
            if z[point] != target {
                changed = true;
            }
            z[point] = target;
        }
        compact(&mut z, &mut centers);
        for (k, center) in centers.iter_mut().enumerate() {
            *center = column_means(&rows, &members_of(&z, k));
        }
        trace.push(dpmeans_objective(&rows, &z, &centers, lambda));
        iterations = pass;
        if pass >= 2 && !changed {
            converged = true;
            break;
        }
    }
    let objective = dpmeans_objective(&rows, &z, &centers, lambda);
    let d = data.d();
    Ok(result_from_centers(
        z, centers, d, objective, iterations, converged, trace, Vec::new(),
    ))
}

fn dpmeans_objective(rows: &[Vec<f64>], z: &[usize], centers: &[Vec<f64>], lambda: f64) -> f64 {
    rows.iter()
        .zip(z)
        .map(|(row, &k)| sq_dist(row, &centers[k]))
        .sum::<f64>()
        + lambda * centers.len() as f64
}

/// DP-means(R) extended with the feature-selection term: per-point cost
/// sum_d v_kd (x - zeta)^2 + |v_k| * f_delta, new-cluster threshold
/// lambda + D * f0, masks refreshed per pass to the round(m*D) features
/// with lowest within-cluster variance.
///
/// m = 1 is accepted as the no-selection degenerate case (full masks,
/// zero F constants), which reduces to DP-means(R).
pub fn dprf_fit(
    data: &Dataset,
    lambda: f64,
    m: f64,
    rho: Rho,
    seed: u64,
    max_iters: usize,
) -> Result<ClusteringResult> {
    require_numeric(data)?;
    if !(m > 0.0 && m <= 1.0) {
        return Err(CraftError::ConfigInvalid("m must lie in (0, 1]".into()));
    }
    let full_budget = m >= 1.0;
    let fc = if full_budget {
        FConstants {
            a0: 0.0,
            b0: 0.0,
            a1: 1.0,
            b1: -1.0,
            f0: 0.0,
            f1: 0.0,
            f_delta: 0.0,
        }
    } else {
        compute_f_constants(m, rho.resolve(m)?)?
    };
    let rows = numeric_rows(data);
    let n = rows.len();
    let d = data.d();
    let threshold = lambda + d as f64 * fc.f0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = vec![rows[rng.random_range(0..n)].clone()];
    let mut masks: Vec<Vec<bool>> = vec![if full_budget {
        vec![true; d]
    } else {
        (0..d).map(|_| rng.random_bool(m)).collect()
    }];
    let mut z = vec![0usize; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut trace = Vec::new();

    let cost = |row: &[f64], center: &[f64], mask: &[bool]| -> f64 {
        let mut c = 0.0;
        let mut selected = 0usize;
        for ((x, zc), &on) in row.iter().zip(center).zip(mask) {
            if on {
                c += (x - zc) * (x - zc);
                selected += 1;
            }
        }
        c + selected as f64 * fc.f_delta
    };

    for pass in 1..=max_iters {
        let mut changed = false;
        for point in 0..n {
            let (best_k, best_c) = centers
                .iter()
                .zip(&masks)
                .enumerate()
                .map(|(k, (c, mask))| (k, cost(&rows[point], c, mask)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            let target = if best_c > threshold {
                let mask = if full_budget {
                    vec![true; d]
                } else {
                    let k = centers.len() as f64;
                    (0..d)
                        .map(|feat| {
                            let numer: f64 = masks
                                .iter()
                                .map(|mk| fc.a0 + if mk[feat] { 1.0 } else { 0.0 })
                                .sum();
                            rng.random_bool((numer / (k * (fc.a0 + fc.b0))).clamp(0.0, 1.0))
                        })
                        .collect()
                };
                centers.push(rows[point].clone());
                masks.push(mask);
                centers.len() - 1
            } else {
                best_k
            };
            if z[point] != target {
                changed = true;
            }
            z[point] = target;
        }
        // keep centers and masks aligned through compaction
        let mut paired: Vec<(Vec<f64>, Vec<bool>)> =
            centers.into_iter().zip(masks).collect();
        compact(&mut z, &mut paired);
        centers = paired.iter().map(|(c, _)| c.clone()).collect();
        masks = paired.into_iter().map(|(_, m)| m).collect();
        for (k, center) in centers.iter_mut().enumerate() {
            *center = column_means(&rows, &members_of(&z, k));
        }
        if !full_budget {
            for (k, mask) in masks.iter_mut().enumerate() {
                *mask = lowest_variance_mask(&rows, &members_of(&z, k), &centers[k], m);
            }
        }
        let objective: f64 = rows
            .iter()
            .zip(&z)
            .map(|(row, &k)| cost(row, &centers[k], &masks[k]))
            .sum::<f64>()
            + threshold * centers.len() as f64;
        trace.push(objective);
        iterations = pass;
        if pass >= 2 && !changed {
            converged = true;
            break;
        }
    }
    let objective = rows
        .iter()
        .zip(&z)
        .map(|(row, &k)| cost(row, &centers[k], &masks[k]))
        .sum::<f64>()
        + threshold * centers.len() as f64;
    Ok(result_from_centers(
        z, centers, d, objective, iterations, converged, trace, masks,
    ))
}

fn lowest_variance_mask(rows: &[Vec<f64>], members: &[usize], center: &[f64], m: f64) -> Vec<bool> {
    let d = center.len();
    let budget = ((m * d as f64).round() as usize).min(d);
    let mut variances: Vec<(usize, f64)> = (0..d)
        .map(|feat| {
            let var = members
                .iter()
                .map(|&n| (rows[n][feat] - center[feat]).powi(2))
                .sum::<f64>()
                / members.len() as f64;
            (feat, var)
        })
        .collect();
    variances.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    let mut mask = vec![false; d];
    for &(feat, _) in variances.iter().take(budget) {
        mask[feat] = true;
    }
    mask
}

/// H(mu) + (mu - x) log(mu / (1 - mu)): the per-feature cost of a binary
/// observation against a cluster mean mu in (0, 1).
pub fn binary_discrepancy(x: f64, mu: f64) -> f64 {
    let h = -mu * mu.ln() - (1.0 - mu) * (1.0 - mu).ln();
    h + (mu - x) * (mu / (1.0 - mu)).ln()
}

fn require_binary(data: &Dataset) -> Result<()> {
    for feat in data.features() {
        match feat.slot {
            FeatureSlot::Cat(slot) if data.cat_cardinality(slot) == 2 => {}
            _ => return Err(CraftError::NonBinaryFeature(feat.name.clone())),
        }
    }
    Ok(())
}

/// Entropy-based clustering of all-binary data: per-point cost is the sum
/// of binary discrepancies against the cluster means, a new cluster opens
/// when the minimum exceeds lambda, and means are refreshed each pass
/// (clamped into [smoothing, 1 - smoothing] to keep log-odds finite).
pub fn binary_entropy_fit(
    data: &Dataset,
    lambda: f64,
    seed: u64,
    max_iters: usize,
    smoothing: f64,
) -> Result<ClusteringResult> {
    require_binary(data)?;
    let n = data.n();
    let d = data.d();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..d).map(|slot| f64::from(data.cat_value(slot, r))).collect())
        .collect();
    let clamp = |v: f64| v.clamp(smoothing, 1.0 - smoothing);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut means: Vec<Vec<f64>> =
        vec![rows[rng.random_range(0..n)].iter().map(|&v| clamp(v)).collect()];
    let mut z = vec![0usize; n];
    let mut iterations = 0;
    let mut converged = false;
    let mut trace = Vec::new();

    let cost = |row: &[f64], mu: &[f64]| -> f64 {
        row.iter().zip(mu).map(|(&x, &m)| binary_discrepancy(x, m)).sum()
    };

    for pass in 1..=max_iters {
        let mut changed = false;
        for point in 0..n {
            let (best_k, best_c) = means
                .iter()
                .enumerate()
                .map(|(k, mu)| (k, cost(&rows[point], mu)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            let target = if best_c > lambda {
                means.push(rows[point].iter().map(|&v| clamp(v)).collect());
                means.len() - 1
            } else {
                best_k
            };
            if z[point] != target {
                changed = true;
            }
            z[point] = target;
        }
        compact(&mut z, &mut means);
        for (k, mu) in means.iter_mut().enumerate() {
            let members = members_of(&z, k);
            *mu = column_means(&rows, &members).into_iter().map(clamp).collect();
        }
        trace.push(binary_objective(&rows, &z, &means, lambda));
        iterations = pass;
        if pass >= 2 && !changed {
            converged = true;
            break;
        }
    }
    let objective = binary_objective(&rows, &z, &means, lambda);
    let k = means.len();
    Ok(ClusteringResult {
        state: ClusterState {
            k_plus: k,
            z,
            eta: means
                .iter()
                .map(|mu| mu.iter().map(|&m| vec![1.0 - m, m]).collect())
                .collect(),
            zeta: vec![Vec::new(); k],
            sigma: vec![Vec::new(); k],
            masks: vec![vec![true; d]; k],
            eta0: Vec::new(),
        },
        objective,
        iterations,
        converged,
        objective_trace: trace,
    })
}

fn binary_objective(rows: &[Vec<f64>], z: &[usize], means: &[Vec<f64>], lambda: f64) -> f64 {
    rows.iter()
        .zip(z)
        .map(|(row, &k)| {
            row.iter()
                .zip(&means[k])
                .map(|(&x, &mu)| binary_discrepancy(x, mu))
                .sum::<f64>()
        })
        .sum::<f64>()
        + lambda * means.len() as f64
}

/// One-hot encode every categorical feature into 0/1 numeric columns named
/// `<column>=<category>`; numeric columns and the label column pass through.
pub fn one_hot(data: &Dataset) -> Result<Dataset> {
    let schema = data.schema();
    let mut columns = Vec::new();
    for col in &schema.columns {
        if Some(&col.name) == schema.label_column.as_ref() {
            columns.push(col.clone());
            continue;
        }
        match &col.kind {
            ColumnKind::Numeric => columns.push(col.clone()),
            ColumnKind::Categorical { categories } => {
                for cat in categories {
                    columns.push(Column {
                        name: format!("{}={}", col.name, cat),
                        kind: ColumnKind::Numeric,
                    });
                }
            }
        }
    }
    let encoded = Schema {
        columns,
        label_column: schema.label_column.clone(),
    };
    let mut rows = Vec::with_capacity(data.n());
    for r in 0..data.n() {
        let mut row = Vec::new();
        for col in &schema.columns {
            if Some(&col.name) == schema.label_column.as_ref() {
                let code = data.labels().unwrap()[r] as usize;
                row.push(data.label_names()[code].clone());
                continue;
            }
            let feat = data
                .features()
                .iter()
                .find(|f| f.name == col.name)
                .expect("schema/feature mismatch");
            match feat.slot {
                FeatureSlot::Num(slot) => row.push(data.num_value(slot, r).to_string()),
                FeatureSlot::Cat(slot) => {
                    let code = data.cat_value(slot, r) as usize;
                    let card = data.cat_cardinality(slot);
                    for t in 0..card {
                        row.push(if t == code { "1" } else { "0" }.to_string());
                    }
                }
            }
        }
        rows.push(row);
    }
    ingest(&encoded, &rows)
}

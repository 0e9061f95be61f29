//! The CRAFT objective, its derived constants, per-point costs, feature
//! selection rules, and the alternating-minimization fitting loop.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CraftError, Result};
use crate::model::{BudgetMode, ClusterState, Dataset, FeatureSlot, Hyperparams};

/// Constants derived from the (m, rho) pair of the Beta-Bernoulli feature
/// prior. `f_delta` prices selecting a feature; `d * f0` enters the
/// new-cluster threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FConstants {
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    pub b1: f64,
    pub f0: f64,
    pub f1: f64,
    pub f_delta: f64,
}

fn xlogx_form(a: f64, b: f64) -> f64 {
    (a + b) * (a + b).ln() - a * a.ln() - b * b.ln()
}

pub fn compute_f_constants(m: f64, rho: f64) -> Result<FConstants> {
    let limit = m * (1.0 - m);
    if !(rho > 0.0 && rho < limit) {
        return Err(CraftError::RhoOutOfRange { rho, m, limit });
    }
    let a0 = m * m * (1.0 - m) / rho - m;
    let b0 = m * (1.0 - m) * (1.0 - m) / rho + m;
    let a1 = a0 + 1.0;
    let b1 = b0 - 1.0;
    let f0 = xlogx_form(a0, b0);
    let f1 = xlogx_form(a1, b1);
    Ok(FConstants {
        a0,
        b0,
        a1,
        b1,
        f0,
        f1,
        f_delta: f1 - f0,
    })
}

/// Posterior point estimate of the feature-selection probability:
/// m + (v - m) * rho / (m(1-m)). Interpolates between global selection
/// (rho -> 0) and fully cluster-specific selection (rho -> m(1-m)).
pub fn nu_point_estimate(m: f64, rho: f64, v: u8) -> Result<f64> {
    let limit = m * (1.0 - m);
    if !(rho > 0.0 && rho < limit) {
        return Err(CraftError::RhoOutOfRange { rho, m, limit });
    }
    Ok(m + (f64::from(v) - m) * rho / limit)
}

/// Cost d_nk of point `n` against cluster `k` under the current state.
/// Selected numeric features pay (x - zeta)^2 / (2 sigma^2); unselected
/// numeric features pay nothing. Selected categorical features pay the
/// cluster cross-entropy term, unselected ones the global term. Each
/// selected feature additionally pays f_delta.
pub fn point_cost(data: &Dataset, n: usize, k: usize, state: &ClusterState, fc: &FConstants) -> f64 {
    let mask = &state.masks[k];
    let mut cost = 0.0;
    let mut selected = 0usize;
    for (d, feat) in data.features().iter().enumerate() {
        let on = mask[d];
        if on {
            selected += 1;
        }
        match feat.slot {
            FeatureSlot::Num(slot) => {
                if on {
                    let x = data.num_value(slot, n);
                    let diff = x - state.zeta[k][slot];
                    let sigma = state.sigma[k][slot];
                    cost += diff * diff / (2.0 * sigma * sigma);
                }
            }
            FeatureSlot::Cat(slot) => {
                let t = data.cat_value(slot, n) as usize;
                let p = if on {
                    state.eta[k][slot][t]
                } else {
                    state.eta0[slot][t]
                };
                cost -= p.ln();
            }
        }
    }
    cost + selected as f64 * fc.f_delta
}

/// Bernoulli parameter for feature `d` of a prospective new cluster, pooled
/// over the masks of the existing clusters.
pub fn new_cluster_feature_prob(d: usize, state: &ClusterState, fc: &FConstants) -> f64 {
    let k = state.k_plus as f64;
    let numer: f64 = state
        .masks
        .iter()
        .map(|mask| fc.a0 + if mask[d] { 1.0 } else { 0.0 })
        .sum();
    numer / (k * (fc.a0 + fc.b0))
}

/// Cross-entropy sums over cluster-k members for categorical feature `d`
/// (a global feature index): G_d under the global means, G_kd under the
/// cluster means.
pub fn g_values(
    data: &Dataset,
    z: &[usize],
    k: usize,
    d: usize,
    state: &ClusterState,
) -> Result<(f64, f64)> {
    let FeatureSlot::Cat(slot) = data.features()[d].slot else {
        return Err(CraftError::ConfigInvalid(format!(
            "feature {d} is not categorical"
        )));
    };
    let mut g_d = 0.0;
    let mut g_kd = 0.0;
    let mut any = false;
    for (n, _) in z.iter().enumerate().filter(|&(_, &zn)| zn == k) {
        any = true;
        let t = data.cat_value(slot, n) as usize;
        g_d -= state.eta0[slot][t].ln();
        g_kd -= state.eta[k][slot][t].ln();
    }
    if !any {
        return Err(CraftError::EmptyCluster(k));
    }
    Ok((g_d, g_kd))
}

/// round(m * count) to nearest, half-up, clamped to [0, count].
fn budget(m: f64, count: usize) -> usize {
    ((m * count as f64).round() as usize).min(count)
}

/// Fixed-budget mask for cluster `k`: the round(m|Num|) numeric features
/// with smallest sigma and the round(m|Cat|) categorical features with
/// largest G_d - G_kd. Ties go to the lower feature index.
pub fn select_features_fixed(
    state: &ClusterState,
    data: &Dataset,
    k: usize,
    m: f64,
) -> Result<Vec<bool>> {
    let mut mask = vec![false; data.d()];

    let num_ids: Vec<(usize, usize)> = data.num_feature_ids().collect();
    let mut by_sigma: Vec<(usize, f64)> = num_ids
        .iter()
        .map(|&(d, slot)| (d, state.sigma[k][slot]))
        .collect();
    by_sigma.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    for &(d, _) in by_sigma.iter().take(budget(m, num_ids.len())) {
        mask[d] = true;
    }

    let cat_ids: Vec<usize> = data.cat_feature_ids().map(|(d, _)| d).collect();
    let mut by_gain: Vec<(usize, f64)> = Vec::with_capacity(cat_ids.len());
    for &d in &cat_ids {
        let (g_d, g_kd) = g_values(data, &state.z, k, d, state)?;
        by_gain.push((d, g_d - g_kd));
    }
    by_gain.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for &(d, _) in by_gain.iter().take(budget(m, cat_ids.len())) {
        mask[d] = true;
    }
    Ok(mask)
}

/// Approximate-budget mask for cluster `k`: categorical feature selected iff
/// G_d - G_kd > eps_c * G_d, numeric iff sigma^2 < eps_v.
pub fn select_features_approx(
    state: &ClusterState,
    data: &Dataset,
    k: usize,
    eps_c: f64,
    eps_v: f64,
) -> Result<Vec<bool>> {
    let mut mask = vec![false; data.d()];
    for (d, feat) in data.features().iter().enumerate() {
        match feat.slot {
            FeatureSlot::Num(slot) => {
                let sigma = state.sigma[k][slot];
                mask[d] = sigma * sigma < eps_v;
            }
            FeatureSlot::Cat(_) => {
                let (g_d, g_kd) = g_values(data, &state.z, k, d, state)?;
                mask[d] = g_d - g_kd > eps_c * g_d;
            }
        }
    }
    Ok(mask)
}

/// Full objective for a state: data discrepancies plus (lambda + D F0) K+
/// plus f_delta times the number of selected feature slots.
pub fn objective_value(data: &Dataset, state: &ClusterState, lambda: f64, fc: &FConstants) -> f64 {
    let d_total = data.d() as f64;
    let mut obj = (lambda + d_total * fc.f0) * state.k_plus as f64;
    for mask in &state.masks {
        obj += mask.iter().filter(|&&v| v).count() as f64 * fc.f_delta;
    }
    for n in 0..data.n() {
        let k = state.z[n];
        let mask = &state.masks[k];
        for (d, feat) in data.features().iter().enumerate() {
            match feat.slot {
                FeatureSlot::Num(slot) => {
                    if mask[d] {
                        let diff = data.num_value(slot, n) - state.zeta[k][slot];
                        let sigma = state.sigma[k][slot];
                        obj += diff * diff / (2.0 * sigma * sigma);
                    }
                }
                FeatureSlot::Cat(slot) => {
                    let t = data.cat_value(slot, n) as usize;
                    let p = if mask[d] {
                        state.eta[k][slot][t]
                    } else {
                        state.eta0[slot][t]
                    };
                    obj -= p.ln();
                }
            }
        }
    }
    obj
}

/// Final state of a fit plus its objective and convergence record.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub state: ClusterState,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
}

/// Pseudo-count for the categorical distribution of a cluster that contains
/// a single point. It is the categorical analog of the sigma = 1 rule for
/// fresh numeric features: a brand-new cluster should price a disagreeing
/// value like ordinary within-cluster noise (-ln 0.1/1.2 ~ 2.5) rather than
/// at the near-infinite cost the estimation smoothing (1e-6) would imply.
pub const SINGLETON_SMOOTHING: f64 = 0.1;

/// Overrides used by the degenerate-case checks: pin every mask to all-ones
/// and/or every sigma to a constant. `singleton_smoothing` overrides the
/// pseudo-count used for one-point clusters. Defaults leave the algorithm
/// untouched.
#[derive(Debug, Clone, Copy, Default)]
pub struct Forcings {
    pub all_on_masks: bool,
    pub fixed_sigma: Option<f64>,
    pub singleton_smoothing: Option<f64>,
}

/// Smoothed one-hot categorical distributions for a single row.
fn one_hot_eta(data: &Dataset, n: usize, smoothing: f64) -> Vec<Vec<f64>> {
    (0..data.n_cat())
        .map(|slot| {
            let card = data.cat_cardinality(slot);
            let denom = 1.0 + smoothing * card as f64;
            let x = data.cat_value(slot, n) as usize;
            (0..card)
                .map(|t| (if t == x { 1.0 } else { 0.0 } + smoothing) / denom)
                .collect()
        })
        .collect()
}

fn row_numerics(data: &Dataset, n: usize) -> Vec<f64> {
    (0..data.n_num()).map(|slot| data.num_value(slot, n)).collect()
}

pub fn craft_fit(data: &Dataset, hp: &Hyperparams) -> Result<ClusteringResult> {
    craft_fit_with(data, hp, Forcings::default())
}

/// Algorithm: start from one cluster seeded at a random point; sweep points
/// in dataset order, opening a new cluster whenever the cheapest assignment
/// exceeds lambda + D*F0; at the end of each pass drop empty clusters,
/// refresh the statistics, and reselect features. Stops when a full pass
/// (after the first) changes no assignment, or after `max_iters` passes.
///
/// Newborn clusters (the initial one and any opened mid-pass) start with
/// every feature selected: a single point does not define a subspace, and
/// distances to it are far better separated over all D features than over a
/// random m-fraction. Proper masks are selected from the data at the end of
/// the pass in which the cluster is born.
///
/// RNG draw order: the init center index only, so fits are reproducible
/// under the seed.
pub fn craft_fit_with(data: &Dataset, hp: &Hyperparams, forcings: Forcings) -> Result<ClusteringResult> {
    hp.validate()?;
    let rho = hp.rho.resolve(hp.m)?;
    let fc = compute_f_constants(hp.m, rho)?;
    let n = data.n();
    let d_total = data.d();
    let threshold = hp.lambda + d_total as f64 * fc.f0;
    let singleton = forcings.singleton_smoothing.unwrap_or(SINGLETON_SMOOTHING);
    let mut rng = ChaCha8Rng::seed_from_u64(hp.seed);

    let init = rng.random_range(0..n);
    let sigma_init = forcings.fixed_sigma.unwrap_or(1.0);
    let mut state = ClusterState {
        k_plus: 1,
        z: vec![0; n],
        eta: vec![one_hot_eta(data, init, singleton)],
        zeta: vec![row_numerics(data, init)],
        sigma: vec![vec![sigma_init; data.n_num()]],
        masks: vec![vec![true; d_total]],
        eta0: crate::model::global_categorical_means(data, hp.smoothing),
    };

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    for pass in 1..=hp.max_iters {
        let mut changed = false;
        for point in 0..n {
            let (best_k, best_cost) = (0..state.k_plus)
                .map(|k| (k, point_cost(data, point, k, &state, &fc)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                .unwrap();
            if best_cost > threshold {
                state.eta.push(one_hot_eta(data, point, singleton));
                state.zeta.push(row_numerics(data, point));
                state.sigma.push(vec![sigma_init; data.n_num()]);
                state.masks.push(vec![true; d_total]);
                state.k_plus += 1;
                if state.z[point] != state.k_plus - 1 {
                    changed = true;
                }
                state.z[point] = state.k_plus - 1;
            } else {
                if state.z[point] != best_k {
                    changed = true;
                }
                state.z[point] = best_k;
            }
        }

        compact_clusters(&mut state);
        refresh_stats(data, &mut state, hp, forcings)?;
        if !forcings.all_on_masks {
            for k in 0..state.k_plus {
                state.masks[k] = match hp.budget {
                    BudgetMode::Fixed => select_features_fixed(&state, data, k, hp.m)?,
                    BudgetMode::Approx { eps_c, eps_v } => {
                        select_features_approx(&state, data, k, eps_c, eps_v)?
                    }
                };
            }
        }
        trace.push(objective_value(data, &state, hp.lambda, &fc));
        iterations = pass;
        // The first pass replaces the arbitrary all-in-one init, so
        // convergence can only be declared from the second pass on.
        if pass >= 2 && !changed {
            converged = true;
            break;
        }
    }

    let objective = objective_value(data, &state, hp.lambda, &fc);
    Ok(ClusteringResult {
        state,
        objective,
        iterations,
        converged,
        objective_trace: trace,
    })
}

/// Drop empty clusters and renumber assignments.
pub(crate) fn compact_clusters(state: &mut ClusterState) {
    let mut counts = vec![0usize; state.k_plus];
    for &k in &state.z {
        counts[k] += 1;
    }
    if counts.iter().all(|&c| c > 0) {
        return;
    }
    let mut remap = vec![usize::MAX; state.k_plus];
    let mut next = 0;
    for k in 0..state.k_plus {
        if counts[k] > 0 {
            remap[k] = next;
            next += 1;
        }
    }
    let keep = |k: usize| counts[k] > 0;
    retain_indexed(&mut state.eta, keep);
    retain_indexed(&mut state.zeta, keep);
    retain_indexed(&mut state.sigma, keep);
    retain_indexed(&mut state.masks, keep);
    for z in &mut state.z {
        *z = remap[*z];
    }
    state.k_plus = next;
}

fn retain_indexed<T>(items: &mut Vec<T>, keep: impl Fn(usize) -> bool) {
    let mut idx = 0;
    items.retain(|_| {
        let k = keep(idx);
        idx += 1;
        k
    });
}

fn refresh_stats(
    data: &Dataset,
    state: &mut ClusterState,
    hp: &Hyperparams,
    forcings: Forcings,
) -> Result<()> {
    let singleton = forcings.singleton_smoothing.unwrap_or(SINGLETON_SMOOTHING);
    let mut sizes = vec![0usize; state.k_plus];
    for &k in &state.z {
        sizes[k] += 1;
    }
    for (k, &size) in sizes.iter().enumerate() {
        // one-point clusters keep the weak uniform prior they were born with
        let smoothing = if size == 1 { singleton } else { hp.smoothing };
        let (eta_k, zeta_k, sigma_k) =
            crate::model::cluster_stats(data, &state.z, k, smoothing, hp.sigma_min)?;
        state.eta[k] = eta_k;
        state.zeta[k] = zeta_k;
        state.sigma[k] = match forcings.fixed_sigma {
            Some(s) => vec![s; data.n_num()],
            None => sigma_k,
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ingest, Column, ColumnKind, Schema};

    fn numeric_schema(d: usize) -> Schema {
        Schema {
            columns: (0..d)
                .map(|i| Column {
                    name: format!("x{i}"),
                    kind: ColumnKind::Numeric,
                })
                .collect(),
            label_column: None,
        }
    }

    fn numeric_dataset(rows: &[&[f64]]) -> Dataset {
        let schema = numeric_schema(rows[0].len());
        let raw: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        ingest(&schema, &raw).unwrap()
    }

    fn binary_dataset(rows: &[&[u8]]) -> Dataset {
        let schema = Schema {
            columns: (0..rows[0].len())
                .map(|i| Column {
                    name: format!("c{i}"),
                    kind: ColumnKind::Categorical {
                        categories: vec!["0".into(), "1".into()],
                    },
                })
                .collect(),
            label_column: None,
        };
        let raw: Vec<Vec<String>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v.to_string()).collect())
            .collect();
        ingest(&schema, &raw).unwrap()
    }

    #[test]
    fn f_constants_reference_values() {
        let fc = compute_f_constants(0.5, 0.24).unwrap();
        assert!((fc.a0 - 0.0208333333).abs() < 1e-9);
        assert!((fc.b0 - 1.0208333333).abs() < 1e-9);
        assert!((fc.f0 - 0.102124).abs() < 1e-5);
        assert!(fc.f_delta.abs() < 1e-12); // symmetry at m = 0.5
        assert!((fc.a1 + fc.b1 - (fc.a0 + fc.b0)).abs() < 1e-12);
    }

    #[test]
    fn f_constants_rho_boundary() {
        assert!(matches!(
            compute_f_constants(0.5, 0.25),
            Err(CraftError::RhoOutOfRange { .. })
        ));
    }

    #[test]
    fn nu_interpolation() {
        assert!((nu_point_estimate(0.5, 0.24, 1).unwrap() - 0.98).abs() < 1e-12);
        // limits: rho -> 0+ gives m, rho -> m(1-m)- gives v
        assert!((nu_point_estimate(0.5, 1e-12, 1).unwrap() - 0.5).abs() < 1e-10);
        assert!((nu_point_estimate(0.5, 0.25 - 1e-12, 1).unwrap() - 1.0).abs() < 1e-10);
        assert!((nu_point_estimate(0.5, 0.25 - 1e-12, 0).unwrap() - 0.0).abs() < 1e-10);
    }

    #[test]
    fn point_cost_at_center_is_zero() {
        let data = numeric_dataset(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let fc = compute_f_constants(0.5, 0.24).unwrap();
        let state = ClusterState {
            k_plus: 1,
            z: vec![0, 0],
            eta: vec![vec![]],
            zeta: vec![vec![1.0, 2.0]],
            sigma: vec![vec![1.0, 1.0]],
            masks: vec![vec![true, true]],
            eta0: vec![],
        };
        assert!(point_cost(&data, 0, 0, &state, &fc).abs() < 1e-12);
        // general point: sum (x - zeta)^2 / 2 + D * f_delta (zero at m = 0.5)
        let c = point_cost(&data, 1, 0, &state, &fc);
        assert!((c - (4.0 + 4.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn point_cost_categorical_ln2() {
        let data = binary_dataset(&[&[0], &[1]]);
        let fc = compute_f_constants(0.5, 0.24).unwrap();
        let state = ClusterState {
            k_plus: 1,
            z: vec![0, 0],
            eta: vec![vec![vec![0.5, 0.5]]],
            zeta: vec![vec![]],
            sigma: vec![vec![]],
            masks: vec![vec![true]],
            eta0: vec![vec![0.5, 0.5]],
        };
        let c = point_cost(&data, 0, 0, &state, &fc);
        assert!((c - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn new_cluster_prob_consistency() {
        let fc = compute_f_constants(0.5, 0.24).unwrap();
        let base = ClusterState {
            k_plus: 2,
            z: vec![],
            eta: vec![],
            zeta: vec![],
            sigma: vec![],
            masks: vec![vec![false], vec![true]],
            eta0: vec![],
        };
        // mixed masks at m = 0.5: midpoint by symmetry
        assert!((new_cluster_feature_prob(0, &base, &fc) - 0.5).abs() < 1e-12);
        // all-zero masks agree with nu(v = 0), all-one with nu(v = 1)
        let all0 = ClusterState {
            masks: vec![vec![false], vec![false]],
            ..base.clone()
        };
        let nu0 = nu_point_estimate(0.5, 0.24, 0).unwrap();
        assert!((new_cluster_feature_prob(0, &all0, &fc) - nu0).abs() < 1e-12);
        let all1 = ClusterState {
            masks: vec![vec![true], vec![true]],
            ..base
        };
        let nu1 = nu_point_estimate(0.5, 0.24, 1).unwrap();
        assert!((new_cluster_feature_prob(0, &all1, &fc) - nu1).abs() < 1e-12);
    }

    #[test]
    fn g_values_identical_distributions() {
        let data = binary_dataset(&[&[0], &[1], &[0]]);
        let state = ClusterState {
            k_plus: 1,
            z: vec![0, 0, 0],
            eta: vec![vec![vec![0.5, 0.5]]],
            zeta: vec![vec![]],
            sigma: vec![vec![]],
            masks: vec![vec![true]],
            eta0: vec![vec![0.5, 0.5]],
        };
        let (g_d, g_kd) = g_values(&data, &state.z, 0, 0, &state).unwrap();
        assert!((g_d - g_kd).abs() < 1e-12);
    }

    #[test]
    fn g_values_pure_cluster_gain() {
        // cluster pure in one value, global uniform: gain -> N_k ln 2
        let data = binary_dataset(&[&[1], &[1], &[1], &[0], &[0], &[0]]);
        let z = vec![0, 0, 0, 1, 1, 1];
        let s = 1e-9;
        let state = ClusterState {
            k_plus: 2,
            z: z.clone(),
            eta: vec![
                crate::model::cluster_stats(&data, &z, 0, s, 1e-6).unwrap().0,
                crate::model::cluster_stats(&data, &z, 1, s, 1e-6).unwrap().0,
            ],
            zeta: vec![vec![], vec![]],
            sigma: vec![vec![], vec![]],
            masks: vec![vec![true], vec![true]],
            eta0: crate::model::global_categorical_means(&data, s),
        };
        let (g_d, g_kd) = g_values(&data, &state.z, 0, 0, &state).unwrap();
        assert!((g_d - g_kd - 3.0 * std::f64::consts::LN_2).abs() < 1e-6);
        assert!(g_d - g_kd >= 0.0);
    }

    #[test]
    fn fixed_selection_budget_and_ties() {
        let data = numeric_dataset(&[&[0.0, 0.0, 0.0], &[0.2, 10.0, 4.0]]);
        let state = ClusterState {
            k_plus: 1,
            z: vec![0, 0],
            eta: vec![vec![]],
            zeta: vec![vec![0.1, 5.0, 2.0]],
            sigma: vec![vec![0.1, 5.0, 2.0]],
            masks: vec![vec![false; 3]],
            eta0: vec![],
        };
        let mask = select_features_fixed(&state, &data, 0, 1.0 / 3.0).unwrap();
        assert_eq!(mask, vec![true, false, false]);
        let all = select_features_fixed(&state, &data, 0, 0.9999).unwrap();
        assert_eq!(all, vec![true, true, true]);
    }

    #[test]
    fn categorical_tie_break_lower_index() {
        // two identical categorical features, budget 1: lower index wins
        let data = binary_dataset(&[&[1, 1], &[1, 1], &[0, 0], &[0, 0]]);
        let z = vec![0, 0, 1, 1];
        let state = ClusterState {
            k_plus: 2,
            z: z.clone(),
            eta: vec![
                crate::model::cluster_stats(&data, &z, 0, 1e-6, 1e-6).unwrap().0,
                crate::model::cluster_stats(&data, &z, 1, 1e-6, 1e-6).unwrap().0,
            ],
            zeta: vec![vec![], vec![]],
            sigma: vec![vec![], vec![]],
            masks: vec![vec![false; 2], vec![false; 2]],
            eta0: crate::model::global_categorical_means(&data, 1e-6),
        };
        let mask = select_features_fixed(&state, &data, 0, 0.5).unwrap();
        assert_eq!(mask, vec![true, false]);
    }

    #[test]
    fn approx_selection_thresholds() {
        let data = numeric_dataset(&[&[0.0, 0.0], &[2.0, 6.0]]);
        let state = ClusterState {
            k_plus: 1,
            z: vec![0, 0],
            eta: vec![vec![]],
            zeta: vec![vec![1.0, 3.0]],
            sigma: vec![vec![1.0, 3.0]],
            masks: vec![vec![false; 2]],
            eta0: vec![],
        };
        // sigma^2 = (1, 9), eps_v = 4 -> only the first feature
        let mask = select_features_approx(&state, &data, 0, 0.5, 4.0).unwrap();
        assert_eq!(mask, vec![true, false]);
    }

    #[test]
    fn approx_selection_eps_c_near_one_selects_nothing() {
        let data = binary_dataset(&[&[1], &[1], &[0], &[0]]);
        let z = vec![0, 0, 1, 1];
        let state = ClusterState {
            k_plus: 2,
            z: z.clone(),
            eta: vec![
                crate::model::cluster_stats(&data, &z, 0, 1e-2, 1e-6).unwrap().0,
                crate::model::cluster_stats(&data, &z, 1, 1e-2, 1e-6).unwrap().0,
            ],
            zeta: vec![vec![], vec![]],
            sigma: vec![vec![], vec![]],
            masks: vec![vec![false], vec![false]],
            eta0: crate::model::global_categorical_means(&data, 1e-2),
        };
        let mask = select_features_approx(&state, &data, 0, 0.999999, 1.0).unwrap();
        assert_eq!(mask, vec![false]);
    }

    #[test]
    fn fit_large_lambda_single_cluster() {
        let data = numeric_dataset(&[&[0.0], &[1.0], &[10.0], &[11.0]]);
        let mut hp = Hyperparams::new(1e12, 0.5);
        hp.seed = 7;
        let res = craft_fit(&data, &hp).unwrap();
        assert_eq!(res.state.k_plus, 1);
        assert!(res.converged);
        assert_eq!(res.iterations, 2);
    }

    #[test]
    fn fit_zero_lambda_singletons() {
        // strictly positive costs at every center: with lambda = 0 and m = 0.5
        // (f_delta = 0 < cost), every point opens its own cluster on pass 1
        let data = numeric_dataset(&[&[0.0], &[5.0], &[10.0], &[15.0]]);
        let mut hp = Hyperparams::new(0.0, 0.5);
        hp.max_iters = 1;
        // the initial mask is Bernoulli(m); pick a seed whose draw selects
        // the lone feature so distances are nonzero
        hp.seed = (0..)
            .find(|&s| {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
                let _ = rng.random_range(0..data.n());
                rng.random_bool(0.5)
            })
            .unwrap();
        let res = craft_fit(&data, &hp).unwrap();
        assert_eq!(res.state.k_plus, 4);
    }

    #[test]
    fn fit_deterministic() {
        let data = numeric_dataset(&[&[0.0, 1.0], &[0.5, 1.5], &[9.0, 9.5], &[10.0, 8.5]]);
        let mut hp = Hyperparams::new(5.0, 0.5);
        hp.seed = 42;
        let a = craft_fit(&data, &hp).unwrap();
        let b = craft_fit(&data, &hp).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compaction_renumbers() {
        let mut state = ClusterState {
            k_plus: 3,
            z: vec![0, 2, 2],
            eta: vec![vec![], vec![], vec![]],
            zeta: vec![vec![0.0], vec![1.0], vec![2.0]],
            sigma: vec![vec![1.0], vec![1.0], vec![1.0]],
            masks: vec![vec![true], vec![false], vec![true]],
            eta0: vec![],
        };
        compact_clusters(&mut state);
        assert_eq!(state.k_plus, 2);
        assert_eq!(state.z, vec![0, 1, 1]);
        assert_eq!(state.zeta, vec![vec![0.0], vec![2.0]]);
    }
}

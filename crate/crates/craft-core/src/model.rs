//! Typed dataset representation, sufficient statistics, and the cluster-state
//! container shared by all fitting algorithms.

use serde::{Deserialize, Serialize};

use crate::error::{CraftError, Result};

pub const DEFAULT_SMOOTHING: f64 = 1e-6;
pub const DEFAULT_SIGMA_MIN: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnKind {
    Categorical { categories: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    #[serde(flatten)]
    pub kind: ColumnKind,
}

/// Column layout of a dataset. The optional label column is held out from
/// clustering and only consulted by the evaluation metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<Column>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_column: Option<String>,
}

impl Schema {
    pub fn validate(&self) -> Result<()> {
        let mut names = std::collections::HashSet::new();
        for col in &self.columns {
            if !names.insert(col.name.as_str()) {
                return Err(CraftError::SchemaInvalid(format!(
                    "duplicate column name '{}'",
                    col.name
                )));
            }
            if let ColumnKind::Categorical { categories } = &col.kind {
                if categories.len() < 2 {
                    return Err(CraftError::SchemaInvalid(format!(
                        "categorical column '{}' needs at least 2 categories",
                        col.name
                    )));
                }
                let distinct: std::collections::HashSet<_> =
                    categories.iter().map(String::as_str).collect();
                if distinct.len() != categories.len() {
                    return Err(CraftError::SchemaInvalid(format!(
                        "categorical column '{}' has duplicate categories",
                        col.name
                    )));
                }
            }
        }
        if let Some(label) = &self.label_column {
            if !self.columns.iter().any(|c| &c.name == label) {
                return Err(CraftError::SchemaInvalid(format!(
                    "label column '{label}' not present in columns"
                )));
            }
        }
        let d = self
            .columns
            .iter()
            .filter(|c| Some(&c.name) != self.label_column.as_ref())
            .count();
        if d == 0 {
            return Err(CraftError::SchemaInvalid(
                "schema has no feature columns".into(),
            ));
        }
        Ok(())
    }
}

/// Where a feature's values live in the column store.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSlot {
    Cat(usize),
    Num(usize),
}

#[derive(Debug, Clone)]
pub struct Feature {
    pub name: String,
    pub slot: FeatureSlot,
}

/// Immutable typed column store of N rows. Categorical values are integer
/// codes into the schema's category lists; numeric values are finite reals.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Schema,
    n: usize,
    features: Vec<Feature>,
    cat: Vec<Vec<u32>>,
    cat_card: Vec<usize>,
    num: Vec<Vec<f64>>,
    labels: Option<Vec<u32>>,
    label_names: Vec<String>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Total feature count D = |Cat| + |Num|.
    pub fn d(&self) -> usize {
        self.features.len()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    pub fn n_cat(&self) -> usize {
        self.cat.len()
    }

    pub fn n_num(&self) -> usize {
        self.num.len()
    }

    /// Cardinality |T_d| of categorical slot `slot`.
    pub fn cat_cardinality(&self, slot: usize) -> usize {
        self.cat_card[slot]
    }

    pub fn cat_value(&self, slot: usize, row: usize) -> u32 {
        self.cat[slot][row]
    }

    pub fn num_value(&self, slot: usize, row: usize) -> f64 {
        self.num[slot][row]
    }

    pub fn cat_column(&self, slot: usize) -> &[u32] {
        &self.cat[slot]
    }

    pub fn num_column(&self, slot: usize) -> &[f64] {
        &self.num[slot]
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn label_names(&self) -> &[String] {
        &self.label_names
    }

    /// Global feature indices of the categorical features, in feature order.
    pub fn cat_feature_ids(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.features.iter().enumerate().filter_map(|(d, f)| match f.slot {
            FeatureSlot::Cat(slot) => Some((d, slot)),
            FeatureSlot::Num(_) => None,
        })
    }

    pub fn num_feature_ids(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.features.iter().enumerate().filter_map(|(d, f)| match f.slot {
            FeatureSlot::Num(slot) => Some((d, slot)),
            FeatureSlot::Cat(_) => None,
        })
    }
}

/// Map raw tabular records onto the schema, producing a typed dataset.
/// Categorical labels become integer codes; the label column, if any, is
/// split out of the feature set.
pub fn ingest(schema: &Schema, rows: &[Vec<String>]) -> Result<Dataset> {
    schema.validate()?;
    let expected = schema.columns.len();
    let mut features = Vec::new();
    let mut cat: Vec<Vec<u32>> = Vec::new();
    let mut cat_card = Vec::new();
    let mut num: Vec<Vec<f64>> = Vec::new();
    let mut labels: Option<Vec<u32>> = None;
    let mut label_names = Vec::new();

    // Column-local plan: (column index, destination).
    enum Dest {
        Cat(usize),
        Num(usize),
        Label,
    }
    let mut plan = Vec::with_capacity(expected);
    for col in &schema.columns {
        if Some(&col.name) == schema.label_column.as_ref() {
            match &col.kind {
                ColumnKind::Categorical { categories } => {
                    label_names = categories.clone();
                    labels = Some(Vec::with_capacity(rows.len()));
                }
                ColumnKind::Numeric => {
                    return Err(CraftError::SchemaInvalid(format!(
                        "label column '{}' must be categorical",
                        col.name
                    )))
                }
            }
            plan.push(Dest::Label);
        } else {
            match &col.kind {
                ColumnKind::Categorical { categories } => {
                    plan.push(Dest::Cat(cat.len()));
                    features.push(Feature {
                        name: col.name.clone(),
                        slot: FeatureSlot::Cat(cat.len()),
                    });
                    cat.push(Vec::with_capacity(rows.len()));
                    cat_card.push(categories.len());
                }
                ColumnKind::Numeric => {
                    plan.push(Dest::Num(num.len()));
                    features.push(Feature {
                        name: col.name.clone(),
                        slot: FeatureSlot::Num(num.len()),
                    });
                    num.push(Vec::with_capacity(rows.len()));
                }
            }
        }
    }

    for (r, row) in rows.iter().enumerate() {
        if row.len() != expected {
            return Err(CraftError::RowArity {
                row: r,
                expected,
                got: row.len(),
            });
        }
        for (c, (value, dest)) in row.iter().zip(&plan).enumerate() {
            let col = &schema.columns[c];
            match dest {
                Dest::Cat(slot) => {
                    let code = lookup_category(col, value, r)?;
                    cat[*slot].push(code);
                }
                Dest::Num(slot) => {
                    let v: f64 = value.trim().parse().map_err(|_| CraftError::NonFiniteNumeric {
                        row: r,
                        column: col.name.clone(),
                    })?;
                    if !v.is_finite() {
                        return Err(CraftError::NonFiniteNumeric {
                            row: r,
                            column: col.name.clone(),
                        });
                    }
                    num[*slot].push(v);
                }
                Dest::Label => {
                    let code = lookup_category(col, value, r)?;
                    labels.as_mut().unwrap().push(code);
                }
            }
        }
    }

    Ok(Dataset {
        schema: schema.clone(),
        n: rows.len(),
        features,
        cat,
        cat_card,
        num,
        labels,
        label_names,
    })
}

fn lookup_category(col: &Column, value: &str, row: usize) -> Result<u32> {
    let ColumnKind::Categorical { categories } = &col.kind else {
        unreachable!("destination plan only routes categorical columns here");
    };
    categories
        .iter()
        .position(|c| c == value)
        .map(|p| p as u32)
        .ok_or_else(|| CraftError::UnknownCategory {
            row,
            column: col.name.clone(),
            value: value.to_string(),
        })
}

/// Per-cluster parameters plus assignments, mutated in place by the fitters.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub k_plus: usize,
    /// 0-based cluster id per row.
    pub z: Vec<usize>,
    /// eta[k][cat_slot][t]: smoothed categorical frequency.
    pub eta: Vec<Vec<Vec<f64>>>,
    /// zeta[k][num_slot]: numeric mean.
    pub zeta: Vec<Vec<f64>>,
    /// sigma[k][num_slot]: numeric spread, >= sigma_min.
    pub sigma: Vec<Vec<f64>>,
    /// masks[k][d]: selected features, indexed by global feature id.
    pub masks: Vec<Vec<bool>>,
    /// eta0[cat_slot][t]: global smoothed categorical frequency.
    pub eta0: Vec<Vec<f64>>,
}

/// Smoothed frequency vector over `card` values for the rows selected by
/// `members`.
fn smoothed_frequencies(codes: &[u32], members: &[usize], card: usize, smoothing: f64) -> Vec<f64> {
    let mut counts = vec![0usize; card];
    for &n in members {
        counts[codes[n] as usize] += 1;
    }
    let denom = members.len() as f64 + smoothing * card as f64;
    counts
        .iter()
        .map(|&c| (c as f64 + smoothing) / denom)
        .collect()
}

/// Per-cluster sufficient statistics: categorical frequencies (per slot,
/// per category), numeric means, and numeric standard deviations.
pub type ClusterSufficientStats = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>);

/// Sufficient statistics for cluster `k` under assignments `z`.
///
/// Categorical: additive-smoothed frequencies. Numeric: arithmetic mean and
/// population standard deviation floored at `sigma_min`; singleton clusters
/// get sigma = 1.
pub fn cluster_stats(
    data: &Dataset,
    z: &[usize],
    k: usize,
    smoothing: f64,
    sigma_min: f64,
) -> Result<ClusterSufficientStats> {
    let members: Vec<usize> = (0..data.n()).filter(|&n| z[n] == k).collect();
    if members.is_empty() {
        return Err(CraftError::EmptyCluster(k));
    }
    let eta_k = (0..data.n_cat())
        .map(|slot| {
            smoothed_frequencies(
                data.cat_column(slot),
                &members,
                data.cat_cardinality(slot),
                smoothing,
            )
        })
        .collect();
    let nk = members.len() as f64;
    let mut zeta_k = Vec::with_capacity(data.n_num());
    let mut sigma_k = Vec::with_capacity(data.n_num());
    for slot in 0..data.n_num() {
        let col = data.num_column(slot);
        let mean = members.iter().map(|&n| col[n]).sum::<f64>() / nk;
        zeta_k.push(mean);
        if members.len() == 1 {
            sigma_k.push(1.0);
        } else {
            let var = members.iter().map(|&n| (col[n] - mean).powi(2)).sum::<f64>() / nk;
            sigma_k.push(var.sqrt().max(sigma_min));
        }
    }
    Ok((eta_k, zeta_k, sigma_k))
}

/// Smoothed categorical frequencies over all N points.
pub fn global_categorical_means(data: &Dataset, smoothing: f64) -> Vec<Vec<f64>> {
    let members: Vec<usize> = (0..data.n()).collect();
    (0..data.n_cat())
        .map(|slot| {
            smoothed_frequencies(
                data.cat_column(slot),
                &members,
                data.cat_cardinality(slot),
                smoothing,
            )
        })
        .collect()
}

/// How rho is supplied: explicit, or derived from m as in the fitting loop's
/// initialization rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Rho {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AutoTag {
    #[serde(rename = "auto")]
    Auto,
}

impl Rho {
    pub const AUTO: Rho = Rho::Auto(AutoTag::Auto);

    /// Resolve to a concrete value; auto becomes max{0.01, m(1-m) - 0.01}.
    pub fn resolve(self, m: f64) -> Result<f64> {
        let limit = m * (1.0 - m);
        let rho = match self {
            Rho::Value(v) => v,
            Rho::Auto(_) => (limit - 0.01).max(0.01),
        };
        if rho <= 0.0 || rho >= limit {
            return Err(CraftError::RhoOutOfRange { rho, m, limit });
        }
        Ok(rho)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BudgetMode {
    Fixed,
    Approx { eps_c: f64, eps_v: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub lambda: f64,
    pub m: f64,
    pub rho: Rho,
    pub budget: BudgetMode,
    pub smoothing: f64,
    pub sigma_min: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Hyperparams {
    pub fn new(lambda: f64, m: f64) -> Self {
        Hyperparams {
            lambda,
            m,
            rho: Rho::AUTO,
            budget: BudgetMode::Fixed,
            smoothing: DEFAULT_SMOOTHING,
            sigma_min: DEFAULT_SIGMA_MIN,
            max_iters: DEFAULT_MAX_ITERS,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || !self.lambda.is_finite() {
            return Err(CraftError::ConfigInvalid("lambda must be nonnegative".into()));
        }
        if !(self.m > 0.0 && self.m < 1.0) {
            return Err(CraftError::ConfigInvalid("m must lie in (0, 1)".into()));
        }
        if self.smoothing <= 0.0 {
            return Err(CraftError::ConfigInvalid("smoothing must be positive".into()));
        }
        if self.sigma_min <= 0.0 {
            return Err(CraftError::ConfigInvalid("sigma_min must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(CraftError::ConfigInvalid("max_iters must be positive".into()));
        }
        if let BudgetMode::Approx { eps_c, eps_v } = self.budget {
            if !(eps_c > 0.0 && eps_c < 1.0) {
                return Err(CraftError::ConfigInvalid("eps_c must lie in (0, 1)".into()));
            }
            if eps_v <= 0.0 {
                return Err(CraftError::ConfigInvalid("eps_v must be positive".into()));
            }
        }
        self.rho.resolve(self.m)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cat_schema() -> Schema {
        Schema {
            columns: vec![Column {
                name: "d1".into(),
                kind: ColumnKind::Categorical {
                    categories: vec!["a".into(), "b".into()],
                },
            }],
            label_column: None,
        }
    }

    fn rows(vals: &[&str]) -> Vec<Vec<String>> {
        vals.iter().map(|v| vec![v.to_string()]).collect()
    }

    #[test]
    fn ingest_maps_codes() {
        let ds = ingest(&cat_schema(), &rows(&["a", "b", "a"])).unwrap();
        assert_eq!(ds.n(), 3);
        assert_eq!(ds.cat_column(0), &[0, 1, 0]);
    }

    #[test]
    fn ingest_rejects_unknown_category() {
        let err = ingest(&cat_schema(), &rows(&["c"])).unwrap_err();
        assert!(matches!(err, CraftError::UnknownCategory { row: 0, .. }));
    }

    #[test]
    fn ingest_rejects_non_finite() {
        let schema = Schema {
            columns: vec![Column {
                name: "d1".into(),
                kind: ColumnKind::Numeric,
            }],
            label_column: None,
        };
        let err = ingest(&schema, &rows(&["NaN"])).unwrap_err();
        assert!(matches!(err, CraftError::NonFiniteNumeric { row: 0, .. }));
    }

    #[test]
    fn ingest_rejects_arity_mismatch() {
        let err = ingest(&cat_schema(), &[vec!["a".into(), "b".into()]]).unwrap_err();
        assert!(matches!(
            err,
            CraftError::RowArity {
                row: 0,
                expected: 1,
                got: 2
            }
        ));
    }

    #[test]
    fn cluster_stats_frequencies() {
        let ds = ingest(&cat_schema(), &rows(&["a", "a", "b"])).unwrap();
        let z = vec![0, 0, 0];
        // smoothing -> 0 limit approaches empirical frequencies monotonically
        let mut prev_gap = f64::INFINITY;
        for s in [1e-2, 1e-4, 1e-6] {
            let (eta, _, _) = cluster_stats(&ds, &z, 0, s, 1e-6).unwrap();
            let gap = (eta[0][0] - 2.0 / 3.0).abs();
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-6);
    }

    #[test]
    fn cluster_stats_numeric() {
        let schema = Schema {
            columns: vec![Column {
                name: "x".into(),
                kind: ColumnKind::Numeric,
            }],
            label_column: None,
        };
        let ds = ingest(&schema, &rows(&["1.0", "3.0", "5.0"])).unwrap();
        let z = vec![0, 0, 1];
        let (_, zeta, sigma) = cluster_stats(&ds, &z, 0, 1e-6, 1e-6).unwrap();
        assert_eq!(zeta[0], 2.0);
        assert_eq!(sigma[0], 1.0); // population sd of {1, 3}
        let (_, zeta1, sigma1) = cluster_stats(&ds, &z, 1, 1e-6, 1e-6).unwrap();
        assert_eq!(zeta1[0], 5.0);
        assert_eq!(sigma1[0], 1.0); // singleton rule
    }

    #[test]
    fn cluster_stats_empty_cluster() {
        let ds = ingest(&cat_schema(), &rows(&["a"])).unwrap();
        assert!(matches!(
            cluster_stats(&ds, &[0], 1, 1e-6, 1e-6),
            Err(CraftError::EmptyCluster(1))
        ));
    }

    #[test]
    fn global_means_sum_to_one() {
        let ds = ingest(&cat_schema(), &rows(&["a", "a", "a"])).unwrap();
        let eta0 = global_categorical_means(&ds, 1e-6);
        let sum: f64 = eta0[0].iter().sum();
        assert!((sum - 1.0).abs() < 1e-9);
        assert!(eta0[0][1] > 0.0); // empty category never exactly zero
        assert!((eta0[0][1] - 1e-6 / (3.0 + 2e-6)).abs() < 1e-12);
    }

    #[test]
    fn rho_auto_resolution() {
        let rho = Rho::AUTO.resolve(0.5).unwrap();
        assert!((rho - 0.24).abs() < 1e-12);
        // boundary excluded
        assert!(Rho::Value(0.25).resolve(0.5).is_err());
        assert!(Rho::Value(0.0).resolve(0.5).is_err());
    }

    #[test]
    fn stats_idempotent_bitwise() {
        let schema = Schema {
            columns: vec![
                Column {
                    name: "c".into(),
                    kind: ColumnKind::Categorical {
                        categories: vec!["a".into(), "b".into(), "c".into()],
                    },
                },
                Column {
                    name: "x".into(),
                    kind: ColumnKind::Numeric,
                },
            ],
            label_column: None,
        };
        let rows: Vec<Vec<String>> = vec![
            vec!["a".into(), "0.25".into()],
            vec!["b".into(), "1.5".into()],
            vec!["c".into(), "-3.75".into()],
            vec!["a".into(), "2.125".into()],
        ];
        let ds = ingest(&schema, &rows).unwrap();
        let z = vec![0, 1, 0, 1];
        let first = cluster_stats(&ds, &z, 0, 1e-6, 1e-6).unwrap();
        let second = cluster_stats(&ds, &z, 0, 1e-6, 1e-6).unwrap();
        assert_eq!(first, second);
    }
}

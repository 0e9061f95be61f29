//! Property tests for the structural invariants of the fitting loop, the
//! feature-selection rules, and the hyperparameter plumbing.

use proptest::prelude::*;

use craft_core::engine::{compute_f_constants, select_features_fixed};
use craft_core::lambda::{farthest_first_lambda, CraftProbe, SquaredEuclideanProbe};
use craft_core::metrics::{nmi, purity};
use craft_core::model::{
    cluster_stats, ingest, Column, ColumnKind, Dataset, FeatureSlot, Schema, DEFAULT_SIGMA_MIN,
    DEFAULT_SMOOTHING,
};
use craft_core::{craft_fit, BudgetMode, Hyperparams, Rho};

fn numeric_dataset(rows: &[Vec<f64>]) -> Dataset {
    let d = rows[0].len();
    let schema = Schema {
        columns: (0..d)
            .map(|i| Column { name: format!("x{i}"), kind: ColumnKind::Numeric })
            .collect(),
        label_column: None,
    };
    let text: Vec<Vec<String>> = rows
        .iter()
        .map(|r| r.iter().map(|v| format!("{v}")).collect())
        .collect();
    ingest(&schema, &text).unwrap()
}

fn mixed_dataset(cat_codes: &[Vec<u8>], num_rows: &[Vec<f64>]) -> Dataset {
    let n_cat = cat_codes[0].len();
    let n_num = num_rows[0].len();
    let mut columns: Vec<Column> = (0..n_cat)
        .map(|i| Column {
            name: format!("c{i}"),
            kind: ColumnKind::Categorical { categories: vec!["0".into(), "1".into(), "2".into()] },
        })
        .collect();
    columns.extend((0..n_num).map(|i| Column { name: format!("x{i}"), kind: ColumnKind::Numeric }));
    let schema = Schema { columns, label_column: None };
    let text: Vec<Vec<String>> = cat_codes
        .iter()
        .zip(num_rows)
        .map(|(cats, nums)| {
            cats.iter()
                .map(|c| c.to_string())
                .chain(nums.iter().map(|v| format!("{v}")))
                .collect()
        })
        .collect();
    ingest(&schema, &text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Resolved auto-rho always lands strictly inside (0, m(1-m)).
    #[test]
    fn auto_rho_in_range(m in 0.02f64..0.98) {
        let rho = Rho::AUTO.resolve(m).unwrap();
        prop_assert!(rho > 0.0 && rho < m * (1.0 - m));
    }

    /// The F constants keep their pair identities for every valid (m, rho).
    #[test]
    fn f_constant_identities(m in 0.05f64..0.95, frac in 0.01f64..0.99) {
        let rho = m * (1.0 - m) * frac;
        let fc = compute_f_constants(m, rho).unwrap();
        let expected = m * (1.0 - m) / rho;
        prop_assert!(((fc.a0 + fc.b0) - expected).abs() / expected < 1e-12);
        prop_assert!(((fc.a1 + fc.b1) - expected).abs() / expected < 1e-12);
        prop_assert!((fc.a1 - (fc.a0 + 1.0)).abs() < 1e-12);
        prop_assert!((fc.b1 - (fc.b0 - 1.0)).abs() < 1e-12);
    }

    /// A finished fit is structurally sound: cluster ids are dense, every
    /// cluster is nonempty, and masks/stats cover exactly K+ clusters.
    #[test]
    fn fit_state_well_formed(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 4..20),
        lambda in 0.5f64..50.0,
        seed in 0u64..50,
    ) {
        let data = numeric_dataset(&rows);
        let mut hp = Hyperparams::new(lambda, 0.5);
        hp.seed = seed;
        let res = craft_fit(&data, &hp).unwrap();
        let k = res.state.k_plus;
        prop_assert!(k >= 1);
        prop_assert_eq!(res.state.masks.len(), k);
        prop_assert_eq!(res.state.zeta.len(), k);
        prop_assert_eq!(res.state.sigma.len(), k);
        prop_assert_eq!(res.state.z.len(), rows.len());
        for c in 0..k {
            prop_assert!(res.state.z.contains(&c), "cluster {} empty", c);
        }
        prop_assert!(res.state.z.iter().all(|&z| z < k));
        prop_assert_eq!(res.objective_trace.len(), res.iterations);
        prop_assert!(res.objective.is_finite());
    }

    /// Fixed-budget selection picks exactly round(m*|Num|) numeric and
    /// round(m*|Cat|) categorical features.
    #[test]
    fn fixed_budget_sizes(
        cat_codes in prop::collection::vec(prop::collection::vec(0u8..3, 3), 6..12),
        num_rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 6..12),
        m in 0.1f64..0.9,
        seed in 0u64..20,
    ) {
        prop_assume!(cat_codes.len() == num_rows.len());
        let data = mixed_dataset(&cat_codes, &num_rows);
        let mut hp = Hyperparams::new(1.0e6, m);
        hp.seed = seed;
        let res = craft_fit(&data, &hp).unwrap();
        let state = &res.state;
        for k in 0..state.k_plus {
            let mask = select_features_fixed(state, &data, k, m).unwrap();
            let (mut nums, mut cats) = (0usize, 0usize);
            for (d, feat) in data.features().iter().enumerate() {
                if mask[d] {
                    match feat.slot {
                        FeatureSlot::Num(_) => nums += 1,
                        FeatureSlot::Cat(_) => cats += 1,
                    }
                }
            }
            prop_assert_eq!(nums, (m * 4.0).round() as usize);
            prop_assert_eq!(cats, (m * 3.0).round() as usize);
        }
    }

    /// Cluster statistics are proper distributions and respected floors.
    #[test]
    fn cluster_stats_are_proper(
        cat_codes in prop::collection::vec(prop::collection::vec(0u8..3, 2), 3..10),
        num_rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 3..10),
    ) {
        prop_assume!(cat_codes.len() == num_rows.len());
        let data = mixed_dataset(&cat_codes, &num_rows);
        let z = vec![0usize; data.n()];
        let (eta, _, sigma) =
            cluster_stats(&data, &z, 0, DEFAULT_SMOOTHING, DEFAULT_SIGMA_MIN).unwrap();
        for dist in &eta {
            let total: f64 = dist.iter().sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            prop_assert!(dist.iter().all(|&p| p > 0.0));
        }
        prop_assert!(sigma.iter().all(|&s| s >= DEFAULT_SIGMA_MIN));
    }

    /// farthest_first_lambda is non-increasing in k under either probe.
    #[test]
    fn farthest_first_monotone(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), 6..15),
        seed in 0u64..20,
    ) {
        let data = numeric_dataset(&rows);
        for probe_id in 0..2 {
            let lambda_at = |k: usize| -> f64 {
                if probe_id == 0 {
                    farthest_first_lambda(&data, k, &SquaredEuclideanProbe,
                        craft_core::baselines::InitMode::RandomPoint, seed).unwrap()
                } else {
                    let probe = CraftProbe { smoothing: 0.1 };
                    farthest_first_lambda(&data, k, &probe,
                        craft_core::baselines::InitMode::RandomPoint, seed).unwrap()
                }
            };
            let mut prev = f64::INFINITY;
            for k in 2..=rows.len().min(5) {
                let cur = lambda_at(k);
                prop_assert!(cur <= prev + 1e-12);
                prev = cur;
            }
        }
    }

    /// Approximate-budget masks stay within the fit and never index out of
    /// range, for arbitrary thresholds.
    #[test]
    fn approx_budget_fit_runs(
        rows in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 5..15),
        eps_v in 0.1f64..20.0,
        lambda in 1.0f64..100.0,
    ) {
        let data = numeric_dataset(&rows);
        let mut hp = Hyperparams::new(lambda, 0.5);
        hp.budget = BudgetMode::Approx { eps_c: 0.85, eps_v };
        let res = craft_fit(&data, &hp).unwrap();
        prop_assert!(res.state.masks.iter().all(|m| m.len() == 3));
    }

    /// Metric invariants: bounds, nmi symmetry, purity >= 1/n.
    #[test]
    fn metric_invariants(
        pred in prop::collection::vec(0usize..5, 1..30),
        truth_seed in 0u64..1000,
    ) {
        let truth: Vec<u32> = pred
            .iter()
            .enumerate()
            .map(|(i, _)| ((truth_seed as usize + i * 7) % 4) as u32)
            .collect();
        let p = purity(&pred, &truth).unwrap();
        let v = nmi(&pred, &truth).unwrap();
        prop_assert!((0.0..=1.0).contains(&p));
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!(p >= 1.0 / pred.len() as f64 - 1e-12);
        let swapped = nmi(
            &truth.iter().map(|&t| t as usize).collect::<Vec<_>>(),
            &pred.iter().map(|&x| x as u32).collect::<Vec<_>>(),
        ).unwrap();
        prop_assert!((v - swapped).abs() < 1e-12);
    }
}

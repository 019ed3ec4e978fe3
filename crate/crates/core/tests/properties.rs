use elicit_core::analysis::{fit_replicate, ProtocolConfig, Source};
use elicit_core::diagnostics::{report, summarize_case, CaseSummary, EntropyMode};
use elicit_core::elicit::PredictiveSamples;
use elicit_core::ingest::{EncodedDataset, Encoder, Label, SplitPlan, INTERCEPT};
use elicit_core::model::{inverse_link, log_likelihood, LogisticModel, PriorSpec};
use elicit_core::sampler::{run_chains, DensityFn, SamplerConfig};
use elicit_core::synthbench::{
    generate, generate_dataset, predictive_fidelity, ColumnRecipe, Scenario,
};
use proptest::prelude::*;

fn intercept_only(y: &[u8]) -> EncodedDataset {
    EncodedDataset::from_parts(vec![INTERCEPT.into()], vec![1.0; y.len()], y.to_vec()).unwrap()
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    while b - a > 1e-10 {
        let c = b - r * (b - a);
        let d = a + r * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

fn case_sets() -> impl Strategy<Value = Vec<(Vec<f64>, bool)>> {
    prop::collection::vec(
        (prop::collection::vec(0.0f64..=1.0, 5..40), any::<bool>()),
        2..30,
    )
    .prop_filter("both classes", |cases| {
        cases.iter().any(|c| c.1) && cases.iter().any(|c| !c.1)
    })
}

fn summaries(cases: &[(Vec<f64>, bool)]) -> Vec<CaseSummary> {
    cases
        .iter()
        .enumerate()
        .map(|(i, (xs, pos))| {
            let label = if *pos {
                Label::Positive
            } else {
                Label::Negative
            };
            summarize_case(
                &PredictiveSamples::new(i.to_string(), xs.clone()),
                label,
                EntropyMode::Both,
            )
        })
        .collect()
}

proptest! {
    #[test]
    fn link_is_antisymmetric(eta in -60.0f64..60.0) {
        prop_assert!((inverse_link(eta) + inverse_link(-eta) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn intercept_mle_is_logit_of_mean(y in prop::collection::vec(0u8..=1, 4..200)) {
        let k = y.iter().filter(|&&v| v == 1).count();
        prop_assume!(k > 0 && k < y.len());
        let data = intercept_only(&y);
        let best = golden_max(|t| log_likelihood(&[t], &data).unwrap(), -20.0, 20.0);
        let ybar = k as f64 / y.len() as f64;
        prop_assert!((best - (ybar / (1.0 - ybar)).ln()).abs() < 1e-6);
    }

    #[test]
    fn log_posterior_ignores_row_order(
        rows in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0, 0u8..=1), 2..60)
            .prop_flat_map(|r| (Just(r.clone()), Just(r).prop_shuffle())),
        theta in prop::collection::vec(-2.0f64..2.0, 3),
    ) {
        let build = |rs: &[(f64, f64, u8)]| {
            let design = rs.iter().flat_map(|&(a, b, _)| [1.0, a, b]).collect();
            let y = rs.iter().map(|r| r.2).collect();
            EncodedDataset::from_parts(vec![INTERCEPT.into(), "a".into(), "b".into()], design, y).unwrap()
        };
        let (d1, d2) = (build(&rows.0), build(&rows.1));
        let prior = PriorSpec::default();
        let l1 = LogisticModel::new(&d1, prior).unwrap().log_posterior(&theta).unwrap();
        let l2 = LogisticModel::new(&d2, prior).unwrap().log_posterior(&theta).unwrap();
        prop_assert!((l1 - l2).abs() <= 1e-9 * l1.abs().max(1.0));
    }

    #[test]
    fn diagnostics_are_bounded_and_consistent(cases in case_sets()) {
        let s = summaries(&cases);
        let r = report(&s, 10).unwrap();
        for acc in [r.mean_accuracy, r.median_accuracy, r.mode_accuracy, r.auc_accuracy, r.ci_accuracy] {
            prop_assert!((0.0..=100.0).contains(&acc));
        }
        let c = r.confusion;
        prop_assert!((c.true_positive + c.true_negative - r.mean_accuracy).abs() <= 1e-9);
        prop_assert!((c.true_positive + c.true_negative + c.false_positive + c.false_negative - 100.0).abs() <= 1e-9);
        if r.ci_accuracy > 0.0 {
            prop_assert!((r.ci_contains_half + r.ci_one_sided - 100.0).abs() <= 1e-9);
        }
        prop_assert_eq!(r.calibration.bins.iter().map(|b| b.count).sum::<usize>(), cases.len());
        prop_assert_eq!(r.entropy_histograms.all.iter().sum::<usize>(), cases.len());
        for x in &s {
            prop_assert!((0.0..=1.0).contains(&x.entropy));
            prop_assert!(x.histogram_entropy.is_some_and(|h| (0.0..=1.0).contains(&h)));
            prop_assert!(x.ci_low <= x.median && x.median <= x.ci_high);
        }
        prop_assert_eq!(report(&s, 10).unwrap(), r);
    }

    #[test]
    fn design_width_counts_dummies(levels in prop::collection::vec(2usize..6, 0..4), numeric in 1usize..4) {
        let mut recipe: Vec<ColumnRecipe> =
            (0..numeric).map(|j| ColumnRecipe::Normal { name: format!("n{j}") }).collect();
        for (c, &k) in levels.iter().enumerate() {
            recipe.push(ColumnRecipe::Categorical {
                name: format!("c{c}"),
                levels: (0..k).map(|i| format!("l{i}")).collect(),
                probabilities: vec![1.0 / k as f64; k],
            });
        }
        let width = 1 + numeric + levels.iter().map(|k| k - 1).sum::<usize>();
        let scenario = Scenario { true_theta: vec![0.1; width], recipe, n: 400, seed: 3 };
        prop_assert_eq!(generate_dataset(&scenario).unwrap().cols(), width);
        let records = generate(&scenario).unwrap();
        let encoder = Encoder::fit(&records, &scenario.column_table(), &scenario.variables()).unwrap();
        prop_assert_eq!(encoder.width(), width);
    }
}

#[test]
fn adapted_acceptance_rate_is_near_target() {
    for dim in 1..=5 {
        let target = DensityFn::new(dim, |x: &[f64]| -0.5 * x.iter().map(|v| v * v).sum::<f64>());
        let config = SamplerConfig {
            chains: 2,
            iterations: 12_000,
            burn_in: 4000,
            seed: dim as u64,
            ..SamplerConfig::default()
        };
        for chain in run_chains(&target, &config).unwrap() {
            assert!(
                (chain.acceptance_rate - 0.234).abs() <= 0.1,
                "dim {dim}: acceptance {}",
                chain.acceptance_rate
            );
        }
    }
}

#[test]
fn training_columns_are_standardized_in_every_replicate() {
    let scenario = Scenario {
        true_theta: vec![0.2, 0.5, -0.3, 0.4, 0.1],
        recipe: vec![
            ColumnRecipe::Normal { name: "u".into() },
            ColumnRecipe::Categorical {
                name: "g".into(),
                levels: vec!["a".into(), "b".into(), "c".into()],
                probabilities: vec![0.3, 0.3, 0.4],
            },
            ColumnRecipe::Normal { name: "v".into() },
        ],
        n: 250,
        seed: 12,
    };
    let records = generate(&scenario).unwrap();
    let source = Source::records(&records, &scenario.column_table(), &scenario.variables());
    let plan = SplitPlan {
        replicate_count: 5,
        base_seed: 4,
        ..SplitPlan::default()
    };
    for rep in 0..plan.replicate_count {
        let partition = elicit_core::ingest::split(source.rows(), &plan, rep).unwrap();
        let (train, _) = source.partition_data(&partition, &[]).unwrap();
        for name in ["u", "v"] {
            let j = train.names.iter().position(|n| n == name).unwrap();
            let col: Vec<f64> = (0..train.rows()).map(|i| train.get(i, j)).collect();
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            assert!(mean.abs() < 1e-9, "replicate {rep} {name}: mean {mean}");
            assert!(
                (var - 1.0).abs() < 1e-9,
                "replicate {rep} {name}: variance {var}"
            );
        }
    }
}

#[test]
fn fitted_beta_tracks_unimodal_oracle() {
    let data = generate_dataset(&Scenario::numeric(vec![0.4, -0.8], 300, 6)).unwrap();
    let sampler = SamplerConfig {
        chains: 4,
        iterations: 2500,
        burn_in: 500,
        seed: 40,
        ..SamplerConfig::default()
    };
    let study = predictive_fidelity(
        &data,
        PriorSpec::default(),
        &[1.0, 0.7],
        100,
        5,
        40_000,
        &sampler,
    )
    .unwrap();
    for (t, d) in study.trial_beta_ks.iter().enumerate() {
        assert!(*d < 0.1, "trial {t}: KS of fitted Beta against oracle {d}");
    }
}

#[test]
fn replicate_fit_runs_on_its_own_stream() {
    let scenario = Scenario::numeric(vec![0.1, 0.6, -0.4], 200, 2);
    let source = Source::Encoded(generate_dataset(&scenario).unwrap());
    let config = ProtocolConfig {
        sampler: SamplerConfig {
            chains: 2,
            iterations: 600,
            burn_in: 200,
            ..SamplerConfig::default()
        },
        plan: SplitPlan {
            replicate_count: 2,
            ..SplitPlan::default()
        },
        ..ProtocolConfig::default()
    };
    let a = fit_replicate(&source, &config, 0, &[]).unwrap();
    let b = fit_replicate(&source, &config, 1, &[]).unwrap();
    assert_eq!(a.chains[0].stream, 0);
    assert_eq!(b.chains[0].stream, 1);
    assert_ne!(a.chains[0].draws, b.chains[0].draws);
    assert_eq!(
        fit_replicate(&source, &config, 0, &[]).unwrap().chains,
        a.chains
    );
}

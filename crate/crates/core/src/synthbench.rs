//! Synthetic logistic decision-makers with known coefficients, and the
//! simulation checks built on them: posterior recovery, interval coverage,
//! predictive fidelity against a long-run oracle, and ablation of a
//! zero-effect variable.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    ablate, coefficient_relevance, AblationSpec, ProtocolConfig, Source, FULL_MODEL,
};
use crate::elicit::{
    fit_beta_moments, ks_statistic, ks_two_sample, predictive_samples, ElicitedPrior, EmpiricalCdf,
    Family, FitMethod,
};
use crate::error::{Error, Result};
use crate::ingest::{
    CaseRecord, ColumnKind, ColumnSpec, ColumnTable, EncodedDataset, Label, SplitPlan, Value,
    INTERCEPT,
};
use crate::model::{dot, inverse_link, LogisticModel, PriorSpec};
use crate::rng::{stream_rng, Stream};
use crate::sampler::{convergence, run_chains, PosteriorChain, SamplerConfig};

/// Sampler stream offset reserved for oracle fits, so oracle and subject
/// chains never share draws.
pub const ORACLE_STREAM: u64 = 1 << 31;

/// 95% two-sided KS band coefficient.
pub const KS_BAND: f64 = 1.36;

/// How one design column is drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ColumnRecipe {
    /// Standard normal numeric.
    Normal { name: String },
    /// Categorical with the first level as reference.
    Categorical {
        name: String,
        levels: Vec<String>,
        probabilities: Vec<f64>,
    },
}

impl ColumnRecipe {
    pub fn name(&self) -> &str {
        match self {
            ColumnRecipe::Normal { name } | ColumnRecipe::Categorical { name, .. } => name,
        }
    }

    fn width(&self) -> usize {
        match self {
            ColumnRecipe::Normal { .. } => 1,
            ColumnRecipe::Categorical { levels, .. } => levels.len() - 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    /// Intercept first, then one coefficient per design column.
    pub true_theta: Vec<f64>,
    #[serde(rename = "column")]
    pub recipe: Vec<ColumnRecipe>,
    pub n: usize,
    pub seed: u64,
}

impl Scenario {
    /// Standard-normal columns `x1 .. x{d-1}` under `theta`.
    pub fn numeric(theta: Vec<f64>, n: usize, seed: u64) -> Self {
        let recipe = (1..theta.len())
            .map(|j| ColumnRecipe::Normal {
                name: format!("x{j}"),
            })
            .collect();
        Scenario {
            true_theta: theta,
            recipe,
            n,
            seed,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let s: Scenario =
            toml::from_str(text).map_err(|e| Error::Config(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Config("scenario needs n >= 1".into()));
        }
        for c in &self.recipe {
            if let ColumnRecipe::Categorical {
                name,
                levels,
                probabilities,
            } = c
            {
                if levels.len() < 2 || levels.len() != probabilities.len() {
                    return Err(Error::Config(format!(
                        "categorical `{name}` needs at least two levels with one probability each"
                    )));
                }
                let total: f64 = probabilities.iter().sum();
                if probabilities.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "probabilities of `{name}` must sum to 1"
                    )));
                }
            }
        }
        let width = 1 + self.recipe.iter().map(ColumnRecipe::width).sum::<usize>();
        if self.true_theta.len() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                got: self.true_theta.len(),
            });
        }
        Ok(())
    }

    pub fn names(&self) -> Vec<String> {
        let mut names = vec![INTERCEPT.to_string()];
        for c in &self.recipe {
            match c {
                ColumnRecipe::Normal { name } => names.push(name.clone()),
                ColumnRecipe::Categorical { name, levels, .. } => {
                    names.extend(levels[1..].iter().map(|l| format!("{name}_{l}")));
                }
            }
        }
        names
    }

    fn groups(&self) -> Vec<String> {
        let mut groups = vec![INTERCEPT.to_string()];
        for c in &self.recipe {
            groups.extend(std::iter::repeat_n(c.name().to_string(), c.width()));
        }
        groups
    }

    /// Column table describing the ingest CSV written by [`write_ingest_csv`].
    pub fn column_table(&self) -> ColumnTable {
        let mut columns = vec![ColumnSpec {
            name: "decision".into(),
            kind: Some(ColumnKind::Decision),
            ..ColumnSpec::default()
        }];
        for c in &self.recipe {
            columns.push(match c {
                ColumnRecipe::Normal { name } => ColumnSpec {
                    name: name.clone(),
                    kind: Some(ColumnKind::Numeric),
                    ..ColumnSpec::default()
                },
                ColumnRecipe::Categorical { name, levels, .. } => ColumnSpec {
                    name: name.clone(),
                    kind: Some(ColumnKind::Categorical),
                    reference: Some(levels[0].clone()),
                    levels: Some(levels.clone()),
                    ..ColumnSpec::default()
                },
            });
        }
        ColumnTable {
            id: Some("id".into()),
            date_format: "%Y-%m-%d".into(),
            columns,
            derived: vec![],
        }
    }

    /// Model variable names, in recipe order.
    pub fn variables(&self) -> Vec<String> {
        self.recipe.iter().map(|c| c.name().to_string()).collect()
    }
}

fn draw(scenario: &Scenario) -> Result<(Vec<CaseRecord>, EncodedDataset)> {
    scenario.validate()?;
    let mut rng = stream_rng(scenario.seed, Stream::Synthetic { scenario: 0 });
    let d = scenario.true_theta.len();
    let mut records = Vec::with_capacity(scenario.n);
    let mut design = Vec::with_capacity(scenario.n * d);
    let mut response = Vec::with_capacity(scenario.n);
    for i in 0..scenario.n {
        let mut record = CaseRecord::new((i + 1).to_string());
        let mut x = vec![1.0];
        for c in &scenario.recipe {
            match c {
                ColumnRecipe::Normal { name } => {
                    let v: f64 = rng.sample(StandardNormal);
                    x.push(v);
                    record = record.with(name, Value::Number(v));
                }
                ColumnRecipe::Categorical {
                    name,
                    levels,
                    probabilities,
                } => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = levels.len() - 1;
                    for (k, p) in probabilities.iter().enumerate() {
                        acc += p;
                        if u < acc {
                            pick = k;
                            break;
                        }
                    }
                    x.extend((1..levels.len()).map(|k| if k == pick { 1.0 } else { 0.0 }));
                    record = record.with(name, Value::Level(levels[pick].clone()));
                }
            }
        }
        let p = inverse_link(dot(&scenario.true_theta, &x));
        let label = if rng.random::<f64>() < p {
            Label::Positive
        } else {
            Label::Negative
        };
        response.push(label.code());
        design.extend(x);
        records.push(record.with_decision(label));
    }
    let mut data = EncodedDataset::from_parts(scenario.names(), design, response)?;
    data.groups = scenario.groups();
    Ok((records, data))
}

/// Case records with decisions drawn from the scenario's logistic model.
pub fn generate(scenario: &Scenario) -> Result<Vec<CaseRecord>> {
    Ok(draw(scenario)?.0)
}

/// The same draws as [`generate`], as a raw (unstandardized) design.
pub fn generate_dataset(scenario: &Scenario) -> Result<EncodedDataset> {
    Ok(draw(scenario)?.1)
}

/// Write records as an ingest CSV matching [`Scenario::column_table`].
pub fn write_ingest_csv<W: Write>(
    out: W,
    scenario: &Scenario,
    records: &[CaseRecord],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["id".to_string(), "decision".to_string()];
    header.extend(scenario.variables());
    w.write_record(&header)?;
    for r in records {
        let decision = match r.decision {
            Some(Label::Positive) => "Denied",
            Some(Label::Negative) => "Granted",
            None => "",
        };
        let mut rec = vec![r.id.clone(), decision.to_string()];
        for v in scenario.variables() {
            rec.push(match r.get(&v) {
                Value::Number(x) => x.to_string(),
                Value::Level(l) => l.clone(),
                _ => String::new(),
            });
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<ingest>", e))?;
    Ok(())
}

/// Chains giving at least `n_draws` kept draws, on the reserved oracle stream.
pub fn oracle_chains(
    data: &EncodedDataset,
    prior: PriorSpec,
    n_draws: usize,
    base: &SamplerConfig,
) -> Result<Vec<PosteriorChain>> {
    let per_chain = n_draws.div_ceil(base.chains);
    let config = SamplerConfig {
        iterations: base.burn_in + per_chain,
        stream: ORACLE_STREAM | base.stream,
        ..base.clone()
    };
    let model = LogisticModel::new(data, prior)?;
    run_chains(&model, &config)
}

/// Empirical predictive cdf of `p* = sigmoid(theta . case)` over every oracle draw.
pub fn predictive_oracle(
    data: &EncodedDataset,
    prior: PriorSpec,
    case: &[f64],
    n_draws: usize,
    base: &SamplerConfig,
) -> Result<EmpiricalCdf> {
    let chains = oracle_chains(data, prior, n_draws, base)?;
    let ps: Vec<f64> = chains
        .iter()
        .flat_map(|c| (0..c.len()).map(move |k| inverse_link(dot(c.draw(k), case))))
        .collect();
    Ok(EmpiricalCdf::new(&ps))
}

/// Outcome of one posterior-recovery replication.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryReplicate {
    pub seed: u64,
    pub posterior_mean: Vec<f64>,
    pub posterior_sd: Vec<f64>,
    /// Every coefficient within three posterior sd of the truth.
    pub within_three_sd: bool,
    pub covered: Vec<bool>,
    pub contains_zero: Vec<bool>,
    pub max_rhat: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecoveryStudy {
    pub true_theta: Vec<f64>,
    pub replicates: Vec<RecoveryReplicate>,
}

impl RecoveryStudy {
    pub fn within_count(&self) -> usize {
        self.replicates.iter().filter(|r| r.within_three_sd).count()
    }

    /// Share of (replicate, coefficient) intervals covering the truth.
    pub fn coverage(&self) -> f64 {
        let (hit, total) = self.replicates.iter().fold((0, 0), |(h, t), r| {
            (
                h + r.covered.iter().filter(|&&c| c).count(),
                t + r.covered.len(),
            )
        });
        hit as f64 / total as f64
    }

    /// Per-coefficient share of replicates whose interval covers the truth.
    pub fn coverage_by_coefficient(&self) -> Vec<f64> {
        self.share(|r, j| r.covered[j])
    }

    /// Per-coefficient share of replicates whose interval contains zero.
    pub fn zero_share(&self) -> Vec<f64> {
        self.share(|r, j| r.contains_zero[j])
    }

    fn share(&self, f: impl Fn(&RecoveryReplicate, usize) -> bool) -> Vec<f64> {
        let k = self.replicates.len() as f64;
        (0..self.true_theta.len())
            .map(|j| self.replicates.iter().filter(|r| f(r, j)).count() as f64 / k)
            .collect()
    }
}

/// Fit `replications` datasets of `n` rows drawn under `theta` (seeds
/// `base_seed + r`) and compare each posterior with the truth.
pub fn posterior_recovery(
    theta: &[f64],
    n: usize,
    replications: usize,
    base_seed: u64,
    prior: PriorSpec,
    sampler: &SamplerConfig,
) -> Result<RecoveryStudy> {
    let replicates = (0..replications as u64)
        .into_par_iter()
        .map(|r| {
            let seed = base_seed + r;
            let scenario = Scenario::numeric(theta.to_vec(), n, seed);
            let data = generate_dataset(&scenario)?;
            let model = LogisticModel::new(&data, prior)?;
            let config = SamplerConfig {
                seed,
                ..sampler.clone()
            };
            let chains = run_chains(&model, &config)?;
            let conv = convergence(&chains, &data.names)?;
            let relevance = coefficient_relevance(&chains, &data.names)?;
            let sd: Vec<f64> = (0..theta.len())
                .map(|j| {
                    let xs: Vec<f64> = chains.iter().flat_map(|c| c.coordinate(j)).collect();
                    let m = xs.iter().sum::<f64>() / xs.len() as f64;
                    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
                })
                .collect();
            let mean: Vec<f64> = relevance.iter().map(|c| c.mean).collect();
            Ok(RecoveryReplicate {
                seed,
                within_three_sd: (0..theta.len())
                    .all(|j| (mean[j] - theta[j]).abs() <= 3.0 * sd[j]),
                covered: relevance
                    .iter()
                    .zip(theta)
                    .map(|(c, t)| c.ci_low <= *t && *t <= c.ci_high)
                    .collect(),
                contains_zero: relevance.iter().map(|c| c.contains_zero).collect(),
                posterior_mean: mean,
                posterior_sd: sd,
                max_rhat: conv.rhat.iter().copied().fold(0.0, f64::max),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RecoveryStudy {
        true_theta: theta.to_vec(),
        replicates,
    })
}

/// Comparison of many short elicitation runs with one long oracle run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FidelityStudy {
    pub m: usize,
    pub oracle_draws: usize,
    pub oracle_mean: f64,
    /// KS distance of each trial's `m` samples from the oracle cdf.
    pub trial_ks: Vec<f64>,
    /// KS distance of each trial's method-of-moments Beta from the oracle cdf.
    pub trial_beta_ks: Vec<f64>,
    pub trial_beta_mean: Vec<f64>,
}

impl FidelityStudy {
    pub fn band(&self) -> f64 {
        KS_BAND / (self.m as f64).sqrt()
    }

    pub fn within_band(&self) -> usize {
        let band = self.band();
        self.trial_ks.iter().filter(|&&d| d < band).count()
    }
}

/// `trials` independent fits (sampler seeds `sampler.seed + t`) of the same
/// dataset, each thinned to `m` predictive samples for `case` and compared
/// with an oracle of `oracle_draws` draws.
pub fn predictive_fidelity(
    data: &EncodedDataset,
    prior: PriorSpec,
    case: &[f64],
    m: usize,
    trials: usize,
    oracle_draws: usize,
    sampler: &SamplerConfig,
) -> Result<FidelityStudy> {
    let oracle = predictive_oracle(data, prior, case, oracle_draws, sampler)?;
    let model = LogisticModel::new(data, prior)?;
    let per_trial: Vec<(f64, f64, f64)> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let config = SamplerConfig {
                seed: sampler.seed + t,
                ..sampler.clone()
            };
            let chains = run_chains(&model, &config)?;
            let samples = predictive_samples(&chains, case, m, "trial")?;
            let d = ks_two_sample(&samples.samples, oracle.samples());
            let params = fit_beta_moments(&samples.samples)?;
            let beta = ElicitedPrior {
                family: Family::Beta,
                params,
                fit_method: FitMethod::Moments,
                ks_statistic: 0.0,
            };
            Ok((d, oracle_vs_cdf(&oracle, |x| beta.cdf(x)), beta.mean()))
        })
        .collect::<Result<_>>()?;
    Ok(FidelityStudy {
        m,
        oracle_draws: oracle.len(),
        oracle_mean: oracle.mean(),
        trial_ks: per_trial.iter().map(|t| t.0).collect(),
        trial_beta_ks: per_trial.iter().map(|t| t.1).collect(),
        trial_beta_mean: per_trial.iter().map(|t| t.2).collect(),
    })
}

/// Sup distance between an oracle empirical cdf and a continuous cdf.
fn oracle_vs_cdf(oracle: &EmpiricalCdf, cdf: impl Fn(f64) -> f64) -> f64 {
    ks_statistic(oracle.samples(), cdf)
}

/// Mean-accuracy change from dropping a variable whose true coefficient is zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NullAblation {
    pub full_mean_accuracy: f64,
    pub ablated_mean_accuracy: f64,
}

impl NullAblation {
    pub fn difference(&self) -> f64 {
        self.full_mean_accuracy - self.ablated_mean_accuracy
    }
}

/// Run the protocol on `scenario` with and without the `null_variable` group.
pub fn null_ablation(
    scenario: &Scenario,
    null_variable: &str,
    config: &ProtocolConfig,
) -> Result<NullAblation> {
    let source = Source::Encoded(generate_dataset(scenario)?);
    let report = ablate(
        &source,
        config,
        &[AblationSpec::without(null_variable)],
        &[],
    )?;
    let full = report.model(FULL_MODEL).expect("full model present");
    let ablated = &report.models[1].run;
    Ok(NullAblation {
        full_mean_accuracy: full.average.mean_accuracy,
        ablated_mean_accuracy: ablated.average.mean_accuracy,
    })
}

/// Pass/fail line of one bench property.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub results: Vec<PropertyResult>,
}

impl BenchSummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn lines(&self) -> Vec<String> {
        self.results
            .iter()
            .map(|r| {
                format!(
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )
            })
            .collect()
    }
}

/// Sizes for the bench suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchSuite {
    pub seed: u64,
    pub recovery_n: usize,
    pub recovery_replications: usize,
    pub fidelity_n: usize,
    pub fidelity_trials: usize,
    pub oracle_draws: usize,
    pub samples: usize,
    pub sampler: SamplerConfig,
}

impl Default for BenchSuite {
    fn default() -> Self {
        BenchSuite {
            seed: 1,
            recovery_n: 2000,
            recovery_replications: 10,
            fidelity_n: 400,
            fidelity_trials: 30,
            oracle_draws: 100_000,
            samples: crate::elicit::DEFAULT_SAMPLES,
            sampler: SamplerConfig {
                chains: 4,
                iterations: 3000,
                burn_in: 1000,
                ..SamplerConfig::default()
            },
        }
    }
}

/// Coefficients used by the recovery properties: a null effect and a strong one.
pub const BENCH_THETA: [f64; 6] = [-0.4, 0.8, 0.0, -0.6, 0.3, 1.2];

pub fn run_bench(suite: &BenchSuite) -> Result<BenchSummary> {
    let prior = PriorSpec::default();
    let sampler = SamplerConfig {
        seed: suite.seed,
        ..suite.sampler.clone()
    };
    let mut results = Vec::new();

    let rate = |theta: Vec<f64>| -> Result<f64> {
        let data = generate_dataset(&Scenario::numeric(theta, 10_000, suite.seed))?;
        Ok(data.response.iter().map(|&y| y as f64).sum::<f64>() / data.rows() as f64)
    };
    let r0 = rate(vec![0.0, 0.0])?;
    results.push(PropertyResult {
        name: "null decision-maker rate".into(),
        passed: (r0 - 0.5).abs() <= 0.02,
        detail: format!("positive rate {r0:.4}, expected 0.5 +- 0.02"),
    });
    let r1 = rate(vec![3f64.ln()])?;
    results.push(PropertyResult {
        name: "intercept-only rate".into(),
        passed: (r1 - 0.75).abs() <= 0.02,
        detail: format!("positive rate {r1:.4}, expected 0.75 +- 0.02"),
    });

    let study = posterior_recovery(
        &BENCH_THETA,
        suite.recovery_n,
        suite.recovery_replications,
        suite.seed,
        prior,
        &sampler,
    )?;
    let k = suite.recovery_replications;
    let need = (0.9 * k as f64).ceil() as usize;
    results.push(PropertyResult {
        name: "posterior recovery".into(),
        passed: study.within_count() >= need,
        detail: format!(
            "{}/{k} replications within 3 sd, need {need}",
            study.within_count()
        ),
    });
    let cov = study.coverage();
    results.push(PropertyResult {
        name: "credible interval coverage".into(),
        passed: (0.85..=1.0).contains(&cov),
        detail: format!("coverage {:.1}%, expected 85-100%", 100.0 * cov),
    });
    let zero = study.zero_share()[2];
    results.push(PropertyResult {
        name: "null coefficient interval contains zero".into(),
        passed: zero >= 0.9,
        detail: format!("{:.0}% of replications", 100.0 * zero),
    });

    let scenario = Scenario::numeric(vec![-0.3, 0.9, -0.5], suite.fidelity_n, suite.seed);
    let data = generate_dataset(&scenario)?;
    let case = [1.0, 0.5, -0.2];
    let fid = predictive_fidelity(
        &data,
        prior,
        &case,
        suite.samples,
        suite.fidelity_trials,
        suite.oracle_draws,
        &sampler,
    )?;
    let need = (0.9 * suite.fidelity_trials as f64).ceil() as usize;
    results.push(PropertyResult {
        name: "predictive samples match oracle".into(),
        passed: fid.within_band() >= need,
        detail: format!(
            "{}/{} trials with KS < {:.3}, need {need}",
            fid.within_band(),
            suite.fidelity_trials,
            fid.band()
        ),
    });
    let worst = fid.trial_beta_ks.iter().copied().fold(0.0, f64::max);
    results.push(PropertyResult {
        name: "fitted Beta matches oracle".into(),
        passed: worst < 0.1,
        detail: format!("largest KS(Beta, oracle) {worst:.4}, limit 0.1"),
    });

    let null = null_ablation(
        &Scenario::numeric(vec![0.2, 1.0, 0.0], suite.recovery_n, suite.seed),
        "x2",
        &ProtocolConfig {
            plan: SplitPlan {
                base_seed: suite.seed,
                ..SplitPlan::default()
            },
            sampler: sampler.clone(),
            ..ProtocolConfig::default()
        },
    )?;
    results.push(PropertyResult {
        name: "null-variable ablation".into(),
        passed: null.difference().abs() <= 1.0,
        detail: format!(
            "mean accuracy change {:+.3} points, limit 1",
            null.difference()
        ),
    });
    Ok(BenchSummary { results })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_and_intercept_rates() {
        let rate = |theta: Vec<f64>| {
            let d = generate_dataset(&Scenario::numeric(theta, 10_000, 5)).unwrap();
            d.response.iter().map(|&y| y as f64).sum::<f64>() / d.rows() as f64
        };
        assert!((rate(vec![0.0, 0.0, 0.0]) - 0.5).abs() <= 0.02);
        assert!((rate(vec![3f64.ln()]) - 0.75).abs() <= 0.02);
    }

    #[test]
    fn same_seed_same_data() {
        let s = Scenario::numeric(vec![0.1, 0.5], 50, 9);
        assert_eq!(generate(&s).unwrap(), generate(&s).unwrap());
        assert_eq!(generate_dataset(&s).unwrap(), generate_dataset(&s).unwrap());
        let other = Scenario { seed: 10, ..s };
        assert_ne!(
            generate(&other).unwrap(),
            generate(&Scenario::numeric(vec![0.1, 0.5], 50, 9)).unwrap()
        );
    }

    #[test]
    fn categorical_recipe_and_validation() {
        let s = Scenario {
            true_theta: vec![0.0, 1.0, -1.0, 0.5],
            recipe: vec![
                ColumnRecipe::Normal { name: "age".into() },
                ColumnRecipe::Categorical {
                    name: "group".into(),
                    levels: vec!["a".into(), "b".into(), "c".into()],
                    probabilities: vec![0.5, 0.3, 0.2],
                },
            ],
            n: 2000,
            seed: 1,
        };
        let d = generate_dataset(&s).unwrap();
        assert_eq!(d.names, vec![INTERCEPT, "age", "group_b", "group_c"]);
        assert_eq!(d.groups, vec![INTERCEPT, "age", "group", "group"]);
        let share_b =
            (0..d.rows()).filter(|&i| d.get(i, 2) == 1.0).count() as f64 / d.rows() as f64;
        assert!((share_b - 0.3).abs() < 0.04);

        let bad = Scenario {
            true_theta: vec![0.0],
            ..s.clone()
        };
        assert!(matches!(
            generate(&bad),
            Err(Error::DimensionMismatch { .. })
        ));
        let text = toml::to_string(&s).unwrap();
        assert_eq!(Scenario::from_toml(&text).unwrap(), s);
    }

    #[test]
    fn ingest_round_trip_matches_direct_design() {
        let s = Scenario {
            true_theta: vec![0.0, 1.0, -1.0],
            recipe: vec![
                ColumnRecipe::Normal { name: "age".into() },
                ColumnRecipe::Categorical {
                    name: "group".into(),
                    levels: vec!["a".into(), "b".into()],
                    probabilities: vec![0.6, 0.4],
                },
            ],
            n: 30,
            seed: 2,
        };
        let records = generate(&s).unwrap();
        let mut buf = Vec::new();
        write_ingest_csv(&mut buf, &s, &records).unwrap();
        let table = s.column_table();
        let loaded = crate::ingest::load_table_from_reader(buf.as_slice(), &table, true).unwrap();
        assert_eq!(loaded.dropped, 0);
        assert_eq!(loaded.records.len(), 30);
        let direct = generate_dataset(&s).unwrap();
        for (i, r) in loaded.records.iter().enumerate() {
            assert_eq!(r.decision.unwrap().code(), direct.response[i]);
            assert_eq!(
                *r.get("group") == Value::Level("b".into()),
                direct.get(i, 2) == 1.0
            );
        }
    }

    #[test]
    fn oracle_against_itself_is_zero() {
        let data = generate_dataset(&Scenario::numeric(vec![0.2, 0.7], 200, 3)).unwrap();
        let sampler = SamplerConfig {
            chains: 2,
            iterations: 1500,
            burn_in: 500,
            ..SamplerConfig::default()
        };
        let oracle =
            predictive_oracle(&data, PriorSpec::default(), &[1.0, 0.3], 2000, &sampler).unwrap();
        assert_eq!(oracle.len(), 2000);
        assert_eq!(ks_two_sample(oracle.samples(), oracle.samples()), 0.0);
    }
}

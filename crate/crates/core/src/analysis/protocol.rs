use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::diagnostics::{self, CaseSummary, DiagnosticsReport, EntropyMode};
use crate::elicit::{PredictiveSamples, DEFAULT_SAMPLES};
use crate::error::{Error, Result};
use crate::ingest::{
    complete_cases, split, CaseRecord, ColumnTable, EncodedDataset, Encoder, Label, Partition,
    SplitPlan, INTERCEPT,
};
use crate::model::{dot, inverse_link, LogisticModel, PriorSpec};
use crate::sampler::{
    convergence, run_chains, thin_draws, ConvergenceReport, PosteriorChain, SamplerConfig,
};

/// Settings of a repeated train/test fit-and-diagnose run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProtocolConfig {
    pub plan: SplitPlan,
    pub sampler: SamplerConfig,
    pub prior: PriorSpec,
    /// Predictive samples per test case.
    pub samples: usize,
    pub calibration_bins: usize,
    pub entropy_mode: EntropyMode,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            plan: SplitPlan::default(),
            sampler: SamplerConfig::default(),
            prior: PriorSpec::default(),
            samples: DEFAULT_SAMPLES,
            calibration_bins: diagnostics::DEFAULT_CALIBRATION_BINS,
            entropy_mode: EntropyMode::default(),
        }
    }
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        self.plan.validate()?;
        self.sampler.validate()?;
        self.prior.validate()?;
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    /// Sampler settings for one replicate: same seed, replicate-specific stream.
    pub fn sampler_for(&self, replicate: usize) -> SamplerConfig {
        SamplerConfig {
            stream: replicate as u64,
            ..self.sampler.clone()
        }
    }
}

/// Where the rows come from: raw records encoded per partition, or an
/// already encoded design.
#[derive(Debug, Clone)]
pub enum Source {
    Records {
        records: Vec<CaseRecord>,
        table: ColumnTable,
        variables: Vec<String>,
        dropped: usize,
    },
    Encoded(EncodedDataset),
}

impl Source {
    /// Records restricted to complete cases for `variables`.
    pub fn records(records: &[CaseRecord], table: &ColumnTable, variables: &[String]) -> Self {
        let (records, dropped) = complete_cases(records, variables);
        Source::Records {
            records,
            table: table.clone(),
            variables: variables.to_vec(),
            dropped,
        }
    }

    pub fn rows(&self) -> usize {
        match self {
            Source::Records { records, .. } => records.len(),
            Source::Encoded(d) => d.rows(),
        }
    }

    /// Model groups available for removal.
    pub fn groups(&self) -> Vec<String> {
        match self {
            Source::Records { variables, .. } => variables.clone(),
            Source::Encoded(d) => {
                let mut out: Vec<String> = Vec::new();
                for g in &d.groups {
                    if g != INTERCEPT && !out.contains(g) {
                        out.push(g.clone());
                    }
                }
                out
            }
        }
    }

    /// Train and test designs for `partition`, with `removed` groups dropped.
    pub fn partition_data(
        &self,
        partition: &Partition,
        removed: &[String],
    ) -> Result<(EncodedDataset, EncodedDataset)> {
        let (train, test) = match self {
            Source::Records {
                records,
                table,
                variables,
                ..
            } => {
                let pick =
                    |idx: &[usize]| idx.iter().map(|&i| records[i].clone()).collect::<Vec<_>>();
                let encoder = Encoder::fit(&pick(&partition.train), table, variables)?;
                (
                    encoder.transform(&pick(&partition.train))?,
                    encoder.transform(&pick(&partition.test))?,
                )
            }
            Source::Encoded(d) => (d.subset(&partition.train), d.subset(&partition.test)),
        };
        if removed.is_empty() {
            return Ok((train, test));
        }
        let (train, test) = (
            train.without_groups(removed)?,
            test.without_groups(removed)?,
        );
        if train.cols() <= 1 {
            return Err(Error::Config(
                "removing every predictor leaves an intercept-only model".into(),
            ));
        }
        Ok((train, test))
    }
}

/// Stable digest of a partition, used to check that compared runs share splits.
pub fn fingerprint(partition: &Partition) -> String {
    let mut h = Sha256::new();
    for i in &partition.train {
        h.update((*i as u64).to_le_bytes());
    }
    h.update(u64::MAX.to_le_bytes());
    for i in &partition.test {
        h.update((*i as u64).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// One replicate's posterior fit.
#[derive(Debug, Clone)]
pub struct ReplicateFit {
    pub replicate: usize,
    pub partition: Partition,
    pub train: EncodedDataset,
    pub test: EncodedDataset,
    pub chains: Vec<PosteriorChain>,
    pub convergence: ConvergenceReport,
}

pub fn fit_replicate(
    source: &Source,
    config: &ProtocolConfig,
    replicate: usize,
    removed: &[String],
) -> Result<ReplicateFit> {
    let partition = split(source.rows(), &config.plan, replicate)?;
    let (mut train, mut test) = source.partition_data(&partition, removed)?;
    train.provenance.replicate = Some(replicate);
    train.provenance.seed = Some(config.plan.base_seed);
    test.provenance = train.provenance;
    let model = LogisticModel::new(&train, config.prior)?;
    let chains = run_chains(&model, &config.sampler_for(replicate))?;
    let convergence = convergence(&chains, &train.names)?;
    Ok(ReplicateFit {
        replicate,
        partition,
        train,
        test,
        chains,
        convergence,
    })
}

/// Sampler stream of the fit on every complete row (replicates use their index).
pub const FULL_FIT_STREAM: u64 = 1 << 30;

/// Posterior fit on every row of the source.
#[derive(Debug, Clone)]
pub struct FullFit {
    pub data: EncodedDataset,
    pub chains: Vec<PosteriorChain>,
    pub convergence: ConvergenceReport,
}

pub fn fit_full(source: &Source, config: &ProtocolConfig) -> Result<FullFit> {
    config.validate()?;
    let data = match source {
        Source::Records {
            records,
            table,
            variables,
            ..
        } => Encoder::fit(records, table, variables)?.transform(records)?,
        Source::Encoded(d) => d.clone(),
    };
    let model = LogisticModel::new(&data, config.prior)?;
    let sampler = SamplerConfig {
        stream: FULL_FIT_STREAM,
        ..config.sampler.clone()
    };
    let chains = run_chains(&model, &sampler)?;
    let convergence = convergence(&chains, &data.names)?;
    Ok(FullFit {
        data,
        chains,
        convergence,
    })
}

/// Predictive samples for every row of `test`.
pub fn test_samples(
    chains: &[PosteriorChain],
    test: &EncodedDataset,
    m: usize,
) -> Result<Vec<PredictiveSamples>> {
    let dim = chains.first().map(|c| c.dim).unwrap_or(0);
    if test.cols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: test.cols(),
        });
    }
    let draws = thin_draws(chains, m)?;
    let pooled = chains.iter().map(PosteriorChain::len).sum();
    Ok((0..test.rows())
        .map(|i| {
            let x = test.row(i);
            PredictiveSamples {
                case_id: test.ids[i].clone(),
                samples: draws.iter().map(|t| inverse_link(dot(t, x))).collect(),
                pooled_draws: pooled,
                chains: chains.len(),
                seed: chains[0].seed,
            }
        })
        .collect())
}

/// Summaries and diagnostics of fitted chains on a labelled test set.
pub fn evaluate(
    chains: &[PosteriorChain],
    test: &EncodedDataset,
    config: &ProtocolConfig,
) -> Result<(Vec<CaseSummary>, DiagnosticsReport)> {
    if test.rows() == 0 {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let samples = test_samples(chains, test, config.samples)?;
    let summaries: Vec<CaseSummary> = samples
        .iter()
        .zip(&test.response)
        .map(|(s, &y)| diagnostics::summarize_case(s, Label::from_code(y), config.entropy_mode))
        .collect();
    let report = diagnostics::report(&summaries, config.calibration_bins)?;
    Ok((summaries, report))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReplicateResult {
    pub replicate: usize,
    pub fingerprint: String,
    pub train_rows: usize,
    pub test_rows: usize,
    pub convergence: ConvergenceReport,
    pub report: DiagnosticsReport,
    #[serde(skip)]
    pub summaries: Vec<CaseSummary>,
    #[serde(skip)]
    pub fit: Option<Box<ReplicateFit>>,
}

/// All replicates of one model plus their average.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProtocolRun {
    pub removed_groups: Vec<String>,
    pub replicates: Vec<ReplicateResult>,
    pub average: DiagnosticsReport,
}

impl ProtocolRun {
    pub fn convergence_flagged(&self) -> bool {
        self.replicates.iter().any(|r| r.convergence.flagged())
    }

    pub fn fingerprints(&self) -> Vec<&str> {
        self.replicates
            .iter()
            .map(|r| r.fingerprint.as_str())
            .collect()
    }
}

/// Fit and diagnose every replicate of the plan, then average.
///
/// With `keep_fits` the per-replicate chains and designs are retained.
pub fn run_protocol(
    source: &Source,
    config: &ProtocolConfig,
    removed: &[String],
    keep_fits: bool,
) -> Result<ProtocolRun> {
    config.validate()?;
    let replicates: Vec<ReplicateResult> = (0..config.plan.replicate_count)
        .into_par_iter()
        .map(|r| {
            let fit = fit_replicate(source, config, r, removed)?;
            let (summaries, report) = evaluate(&fit.chains, &fit.test, config)?;
            Ok(ReplicateResult {
                replicate: r,
                fingerprint: fingerprint(&fit.partition),
                train_rows: fit.train.rows(),
                test_rows: fit.test.rows(),
                convergence: fit.convergence.clone(),
                report,
                summaries,
                fit: keep_fits.then(|| Box::new(fit)),
            })
        })
        .collect::<Result<_>>()?;
    let reports: Vec<DiagnosticsReport> = replicates.iter().map(|r| r.report.clone()).collect();
    Ok(ProtocolRun {
        removed_groups: removed.to_vec(),
        average: diagnostics::five_split_average(&reports)?,
        replicates,
    })
}

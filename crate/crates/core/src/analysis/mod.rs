//! Variable-influence tooling: repeated fit-and-diagnose runs, ablations
//! that drop variable groups, single-attribute counterfactual sweeps and
//! coefficient credible intervals.

mod protocol;

pub use protocol::{
    evaluate, fingerprint, fit_full, fit_replicate, run_protocol, test_samples, FullFit,
    ProtocolConfig, ProtocolRun, ReplicateFit, ReplicateResult, Source, FULL_FIT_STREAM,
};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{quantile, write_comparison_csv, DiagnosticsReport};
use crate::elicit::{elicit_prior, Family, FitReport, PredictiveSamples};
use crate::error::{Error, Result};
use crate::ingest::{CaseRecord, Encoder, Value, VariableEncoding, INTERCEPT};
use crate::sampler::PosteriorChain;

/// A model variant with some variable groups removed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationSpec {
    pub name: String,
    pub removed_groups: Vec<String>,
}

impl AblationSpec {
    pub fn without(group: &str) -> Self {
        AblationSpec {
            name: format!("No {group}"),
            removed_groups: vec![group.to_string()],
        }
    }
}

/// Elicited prior for a designated case under one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProbeResult {
    pub model: String,
    pub case_id: String,
    pub prior: FitReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelResult {
    pub name: String,
    pub run: ProtocolRun,
}

/// Averaged diagnostics of the full model and each ablation, on shared splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparativeReport {
    pub models: Vec<ModelResult>,
    pub probes: Vec<ProbeResult>,
}

impl ComparativeReport {
    pub fn model(&self, name: &str) -> Option<&ProtocolRun> {
        self.models.iter().find(|m| m.name == name).map(|m| &m.run)
    }

    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        let columns: Vec<(String, &DiagnosticsReport)> = self
            .models
            .iter()
            .map(|m| (m.name.clone(), &m.run.average))
            .collect();
        write_comparison_csv(out, &columns)
    }
}

pub const FULL_MODEL: &str = "Full model";

/// Run the protocol for the full model and every ablation with the same
/// splits and seeds. Probe cases are elicited from each model's first
/// replicate fit.
pub fn ablate(
    source: &Source,
    config: &ProtocolConfig,
    ablations: &[AblationSpec],
    probes: &[CaseRecord],
) -> Result<ComparativeReport> {
    let groups = source.groups();
    for a in ablations {
        for g in &a.removed_groups {
            if g == INTERCEPT {
                return Err(Error::Config("the intercept cannot be removed".into()));
            }
            if !groups.contains(g) {
                return Err(Error::UnknownVariable(g.clone()));
            }
        }
        if groups.iter().all(|g| a.removed_groups.contains(g)) {
            return Err(Error::Config(format!(
                "ablation `{}` removes every predictor",
                a.name
            )));
        }
    }
    let mut variants = vec![AblationSpec {
        name: FULL_MODEL.into(),
        removed_groups: Vec::new(),
    }];
    variants.extend(ablations.iter().cloned());

    let keep = !probes.is_empty();
    let mut models = Vec::with_capacity(variants.len());
    let mut probe_results = Vec::new();
    for v in &variants {
        let mut run = run_protocol(source, config, &v.removed_groups, keep)?;
        if let Some(fit) = run.replicates.first_mut().and_then(|r| r.fit.take()) {
            for case in probes {
                let row = encode_probe(source, &fit, case, &v.removed_groups)?;
                let (_, prior) =
                    elicit_prior(&fit.chains, &row, config.samples, &Family::all(), &case.id)?;
                probe_results.push(ProbeResult {
                    model: v.name.clone(),
                    case_id: case.id.clone(),
                    prior,
                });
            }
        }
        for r in &mut run.replicates {
            r.fit = None;
        }
        models.push(ModelResult {
            name: v.name.clone(),
            run,
        });
    }
    Ok(ComparativeReport {
        models,
        probes: probe_results,
    })
}

fn encode_probe(
    source: &Source,
    fit: &ReplicateFit,
    case: &CaseRecord,
    removed: &[String],
) -> Result<Vec<f64>> {
    match source {
        Source::Records { .. } => {
            // dropping groups discards the encoder, so rebuild the full one
            let (train, _) = source.partition_data(&fit.partition, &[])?;
            let encoder = train
                .encoder
                .as_ref()
                .ok_or_else(|| Error::Invalid("fit has no encoder".into()))?;
            let full = encoder.encode_record(case, &mut Vec::new())?;
            let groups = encoder.column_groups();
            Ok(full
                .into_iter()
                .zip(&groups)
                .filter(|(_, g)| !removed.contains(g))
                .map(|(x, _)| x)
                .collect())
        }
        Source::Encoded(_) => Err(Error::Config(
            "probe cases need record-based data with an encoder".into(),
        )),
    }
}

/// One value of a counterfactual sweep.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounterfactualPrior {
    pub value: String,
    pub samples: PredictiveSamples,
    pub prior: FitReport,
}

/// Re-elicit the prior for `case` with `attribute` set to each of `values`,
/// everything else held fixed and encoded with the frozen `encoder`.
pub fn counterfactual(
    chains: &[PosteriorChain],
    encoder: &Encoder,
    case: &CaseRecord,
    attribute: &str,
    values: &[String],
    m: usize,
    families: &[Family],
) -> Result<Vec<CounterfactualPrior>> {
    let var = encoder
        .variables
        .iter()
        .find(|v| v.name() == attribute)
        .ok_or_else(|| Error::UnknownVariable(attribute.to_string()))?;
    let mut out = Vec::with_capacity(values.len());
    for raw in values {
        let value = match var {
            VariableEncoding::Numeric { .. } => {
                Value::Number(raw.trim().parse().map_err(|_| {
                    Error::Config(format!("`{raw}` is not a number for `{attribute}`"))
                })?)
            }
            VariableEncoding::Categorical {
                reference, dummies, ..
            } => {
                if raw != reference && !dummies.contains(raw) {
                    return Err(Error::UnknownLevel {
                        attribute: attribute.to_string(),
                        level: raw.clone(),
                    });
                }
                Value::Level(raw.clone())
            }
        };
        let modified = case.clone().with(attribute, value);
        let row = encoder.encode_record(&modified, &mut Vec::new())?;
        let (samples, prior) = elicit_prior(chains, &row, m, families, &case.id)?;
        out.push(CounterfactualPrior {
            value: raw.clone(),
            samples,
            prior,
        });
    }
    Ok(out)
}

/// Multi-series density CSV: `x` then the selected fitted pdf per swept value.
pub fn write_counterfactual_csv<W: Write>(
    out: W,
    sweep: &[CounterfactualPrior],
    points: usize,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["x".to_string()];
    header.extend(sweep.iter().map(|c| c.value.clone()));
    w.write_record(&header)?;
    for k in 1..=points {
        let x = k as f64 / (points + 1) as f64;
        let mut rec = vec![x.to_string()];
        rec.extend(
            sweep
                .iter()
                .map(|c| c.prior.selected_prior().pdf(x).to_string()),
        );
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<counterfactual>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSummary {
    pub name: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub contains_zero: bool,
}

/// Posterior mean and equal-tailed 95% interval of each coefficient over the pooled chains.
pub fn coefficient_relevance(
    chains: &[PosteriorChain],
    names: &[String],
) -> Result<Vec<CoefficientSummary>> {
    let dim = chains
        .first()
        .ok_or_else(|| Error::Invalid("no chains".into()))?
        .dim;
    if names.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: names.len(),
        });
    }
    let total: usize = chains.iter().map(PosteriorChain::len).sum();
    if total == 0 {
        return Err(Error::TooFewDraws { needed: 1, got: 0 });
    }
    Ok((0..dim)
        .map(|j| {
            let mut xs: Vec<f64> = chains.iter().flat_map(|c| c.coordinate(j)).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            xs.sort_by(f64::total_cmp);
            let (lo, hi) = (quantile(&xs, 0.025), quantile(&xs, 0.975));
            CoefficientSummary {
                name: names[j].clone(),
                mean,
                ci_low: lo,
                ci_high: hi,
                contains_zero: lo <= 0.0 && 0.0 <= hi,
            }
        })
        .collect())
}

pub fn write_relevance_csv<W: Write>(out: W, rows: &[CoefficientSummary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["coefficient", "mean", "ci_low", "ci_high", "contains_zero"])?;
    for r in rows {
        w.write_record([
            r.name.clone(),
            r.mean.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            r.contains_zero.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<relevance>", e))?;
    Ok(())
}

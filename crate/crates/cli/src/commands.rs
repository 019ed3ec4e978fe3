use std::path::{Path, PathBuf};

use elicit_core::analysis::{
    ablate, counterfactual, evaluate, fingerprint, fit_full, fit_replicate,
    write_counterfactual_csv, ReplicateResult, Source,
};
use elicit_core::diagnostics::{five_split_average, CaseSummary, DiagnosticsReport};
use elicit_core::elicit::{
    density_curve, fit_families, predictive_samples, write_density_csv, FitReport,
};
use elicit_core::ingest::{load_table, load_table_from_reader, split, CaseRecord, ColumnTable};
use elicit_core::plot::{calibration_svg, density_svg, entropy_svg, Series};
use elicit_core::synthbench::run_bench;
use elicit_core::{Error, Result};
use log::info;
use serde::Serialize;

use crate::bundle::{
    self, fit_files, read_fit, replicate_dir, sha256_hex, write_file, write_fit, write_json,
    write_manifest, Bundle, FitArtifacts, Manifest, SplitRecord,
};
use crate::config::RunConfig;

const DENSITY_POINTS: usize = 199;

/// What a finished command reports back to `main`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    ConvergenceFlagged,
}

fn source(config: &RunConfig) -> Result<(Source, ColumnTable)> {
    let table = config.column_table()?;
    let loaded = load_table(&config.data_path()?, &table)?;
    let source = Source::records(&loaded.records, &table, &config.variables);
    if let Source::Records {
        dropped, records, ..
    } = &source
    {
        info!(
            "{} usable rows ({} unrecognised decisions, {dropped} incomplete)",
            records.len(),
            loaded.dropped
        );
    }
    Ok((source, table))
}

pub fn fit(config: &RunConfig) -> Result<Outcome> {
    config.validate_for_fit()?;
    let seed = config.seed()?;
    let out = config.out()?.to_path_buf();
    let protocol = config.protocol();
    let (source, _) = source(config)?;

    // the bundle location is not part of the model
    let config_text = RunConfig {
        out: None,
        ..config.clone()
    }
    .to_toml();
    write_file(&out.join(bundle::CONFIG), config_text.as_bytes())?;
    let mut files = vec![bundle::CONFIG.to_string(), bundle::SPLITS.to_string()];

    let replicates: Vec<_> = {
        use rayon::prelude::*;
        (0..protocol.plan.replicate_count)
            .into_par_iter()
            .map(|r| fit_replicate(&source, &protocol, r, &[]))
            .collect::<Result<_>>()?
    };
    let mut flagged = false;
    let mut splits = Vec::new();
    for fit in &replicates {
        let sub = replicate_dir(fit.replicate);
        write_fit(
            &out.join(&sub),
            &FitArtifacts {
                encoder: fit.train.encoder.as_ref(),
                names: &fit.train.names,
                chains: &fit.chains,
                convergence: &fit.convergence,
            },
        )?;
        files.extend(fit_files(&sub, fit.train.encoder.is_some()));
        flagged |= fit.convergence.flagged();
        splits.push(SplitRecord {
            replicate: fit.replicate,
            fingerprint: fingerprint(&fit.partition),
            partition: fit.partition.clone(),
        });
    }
    write_json(&out.join(bundle::SPLITS), &splits)?;

    if config.full_model {
        let full = fit_full(&source, &protocol)?;
        write_fit(
            &out.join(bundle::FULL_DIR),
            &FitArtifacts {
                encoder: full.data.encoder.as_ref(),
                names: &full.data.names,
                chains: &full.chains,
                convergence: &full.convergence,
            },
        )?;
        files.extend(fit_files(bundle::FULL_DIR, full.data.encoder.is_some()));
        flagged |= full.convergence.flagged();
    }

    write_manifest(
        &out,
        Manifest {
            tool: "elicit".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: "fit".into(),
            seed,
            config_sha256: sha256_hex(config_text.as_bytes()),
            replicates: protocol.plan.replicate_count,
            full_model: config.full_model,
            convergence_flagged: flagged,
            files: Default::default(),
        },
        &files,
    )?;
    Ok(if flagged {
        Outcome::ConvergenceFlagged
    } else {
        Outcome::Ok
    })
}

#[derive(Serialize)]
struct DiagnoseOutput<'a> {
    average: &'a DiagnosticsReport,
    replicates: &'a [ReplicateResult],
}

fn write_report_files(dir: &Path, report: &DiagnosticsReport) -> Result<()> {
    let mut buf = Vec::new();
    report.write_table_csv(&mut buf)?;
    write_file(&dir.join("table.csv"), &buf)?;
    let mut buf = Vec::new();
    report.calibration.write_csv(&mut buf)?;
    write_file(&dir.join("calibration.csv"), &buf)?;
    let mut buf = Vec::new();
    report.entropy_histograms.write_csv(&mut buf)?;
    write_file(&dir.join("entropy.csv"), &buf)?;
    write_file(
        &dir.join("calibration.svg"),
        calibration_svg(&report.calibration).as_bytes(),
    )?;
    write_file(
        &dir.join("entropy.svg"),
        entropy_svg(&report.entropy_histograms).as_bytes(),
    )
}

fn write_case_summaries(path: &Path, summaries: &[CaseSummary]) -> Result<()> {
    let mut w = csv_writer();
    for s in summaries {
        w.serialize(s)?;
    }
    write_file(
        path,
        &w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?,
    )
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

pub fn diagnose(
    bundle_dir: &Path,
    samples: Option<usize>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let bundle = Bundle::open(bundle_dir)?;
    let mut config = bundle.config.clone();
    if let Some(m) = samples {
        config.samples = m;
    }
    let protocol = config.protocol();
    protocol.validate()?;
    let out = out.unwrap_or_else(|| bundle.dir.join("diagnostics"));
    let (source, _) = source(&config)?;
    let recorded = bundle.splits()?;

    let mut results = Vec::new();
    for rec in &recorded {
        let partition = split(source.rows(), &protocol.plan, rec.replicate)?;
        if fingerprint(&partition) != rec.fingerprint || partition != rec.partition {
            return Err(Error::Data(format!(
                "replicate {} no longer reproduces its recorded split; has the data changed?",
                rec.replicate
            )));
        }
        let fit = read_fit(
            &bundle.dir.join(replicate_dir(rec.replicate)),
            bundle.manifest.seed,
        )?;
        let (_, test) = source.partition_data(&partition, &[])?;
        if test.encoder.as_ref() != Some(&fit.encoder) || test.names != fit.names {
            return Err(Error::Data(format!(
                "replicate {} encoder differs from the bundle",
                rec.replicate
            )));
        }
        if test.rows() == 0 {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        let (summaries, report) = evaluate(&fit.chains, &test, &protocol)?;
        let sub = out.join(replicate_dir(rec.replicate));
        write_json(&sub.join("report.json"), &report)?;
        write_report_files(&sub, &report)?;
        write_case_summaries(&sub.join("cases.csv"), &summaries)?;
        let convergence = bundle::read_json(
            &bundle
                .dir
                .join(replicate_dir(rec.replicate))
                .join("convergence.json"),
        )?;
        results.push(ReplicateResult {
            replicate: rec.replicate,
            fingerprint: rec.fingerprint.clone(),
            train_rows: partition.train.len(),
            test_rows: test.rows(),
            convergence,
            report,
            summaries,
            fit: None,
        });
    }
    let reports: Vec<DiagnosticsReport> = results.iter().map(|r| r.report.clone()).collect();
    let average = five_split_average(&reports)?;
    write_json(
        &out.join("report.json"),
        &DiagnoseOutput {
            average: &average,
            replicates: &results,
        },
    )?;
    write_report_files(&out, &average)?;
    for line in average.table_rows() {
        println!("{:<36} {}", line.0, line.1);
    }
    Ok(Outcome::Ok)
}

fn load_cases(table: &ColumnTable, path: &Path) -> Result<Vec<CaseRecord>> {
    let file = std::fs::File::open(path)
        .map_err(|e| Error::Config(format!("case file {}: {e}", path.display())))?;
    let loaded = load_table_from_reader(file, table, false)?;
    if loaded.records.is_empty() {
        return Err(Error::Data(format!(
            "case file {} has no rows",
            path.display()
        )));
    }
    Ok(loaded.records)
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn write_prior_json(path: &Path, report: &FitReport) -> Result<()> {
    write_json(path, &report.to_json())
}

pub fn elicit(
    bundle_dir: &Path,
    cases: &Path,
    samples: Option<usize>,
    out: Option<PathBuf>,
) -> Result<Outcome> {
    let bundle = Bundle::open(bundle_dir)?;
    let m = samples.unwrap_or(bundle.config.samples);
    let out = out.unwrap_or_else(|| bundle.dir.join("elicit"));
    let table = bundle.config.column_table()?;
    let records = load_cases(&table, cases)?;
    let fit = bundle.elicitation_fit()?;

    // schema problems are reported for the whole file at once
    let mut problems = Vec::new();
    for r in &records {
        let missing = fit.encoder.missing_fields(r);
        if !missing.is_empty() {
            problems.push(format!("case {}: {}", r.id, missing.join(", ")));
        }
    }
    if !problems.is_empty() {
        return Err(Error::SchemaMismatch(problems));
    }

    let mut all = Vec::new();
    for r in &records {
        let mut warnings = Vec::new();
        let row = fit.encoder.encode_record(r, &mut warnings)?;
        let ps = predictive_samples(&fit.chains, &row, m, &r.id)?;
        let report = fit_families(&ps, &bundle.config.families)?;
        let stem = format!("case-{}", file_stem(&r.id));
        write_prior_json(&out.join(format!("{stem}.json")), &report)?;
        let mut buf = Vec::new();
        ps.write_csv(&mut buf)?;
        write_file(&out.join(format!("{stem}-samples.csv")), &buf)?;
        let curve = density_curve(&report, &ps.samples, DENSITY_POINTS);
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &curve)?;
        write_file(&out.join(format!("{stem}-density.csv")), &buf)?;
        let svg = density_svg(
            &format!("Elicited prior for case {}", r.id),
            &[
                Series::new(
                    format!("{:?} fit", report.selected),
                    curve.iter().map(|p| (p.0, p.1)).collect(),
                ),
                Series::new(
                    "kernel estimate",
                    curve.iter().map(|p| (p.0, p.2)).collect(),
                ),
            ],
        );
        write_file(&out.join(format!("{stem}.svg")), svg.as_bytes())?;
        let selected = report.selected_prior();
        println!(
            "{}: {:?}({:.3}, {:.3}) mean {:.4}",
            r.id, selected.family, selected.params.0, selected.params.1, report.mean
        );
        all.push(report.to_json());
    }
    write_json(&out.join("priors.json"), &all)?;
    Ok(Outcome::Ok)
}

pub fn ablate_cmd(config: &RunConfig) -> Result<Outcome> {
    config.validate_for_fit()?;
    let out = config.out()?.to_path_buf();
    let (source, _) = source(config)?;
    let probes: Vec<CaseRecord> = match &source {
        Source::Records { records, .. } => config
            .probes
            .iter()
            .map(|id| {
                records
                    .iter()
                    .find(|r| &r.id == id)
                    .cloned()
                    .ok_or_else(|| {
                        Error::Config(format!("probe case `{id}` not found among complete rows"))
                    })
            })
            .collect::<Result<_>>()?,
        Source::Encoded(_) => Vec::new(),
    };
    let report = ablate(&source, &config.protocol(), &config.ablations, &probes)?;
    write_json(&out.join("comparative.json"), &report)?;
    let mut buf = Vec::new();
    report.write_table_csv(&mut buf)?;
    write_file(&out.join("table.csv"), &buf)?;

    let mut w = csv_writer();
    w.write_record([
        "model",
        "replicate",
        "fingerprint",
        "mean_accuracy",
        "f_score",
    ])?;
    for m in &report.models {
        for r in &m.run.replicates {
            w.write_record([
                m.name.clone(),
                r.replicate.to_string(),
                r.fingerprint.clone(),
                r.report.mean_accuracy.to_string(),
                r.report.f_score.to_string(),
            ])?;
        }
    }
    write_file(
        &out.join("replicates.csv"),
        &w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?,
    )?;
    for p in &report.probes {
        let name = format!(
            "probe-{}-{}.json",
            file_stem(&p.case_id),
            file_stem(&p.model)
        );
        write_prior_json(&out.join("probes").join(name), &p.prior)?;
    }
    print!("{}", String::from_utf8_lossy(&buf));
    let flagged = report.models.iter().any(|m| m.run.convergence_flagged());
    Ok(if flagged {
        Outcome::ConvergenceFlagged
    } else {
        Outcome::Ok
    })
}

pub struct SweepRequest {
    pub cases: PathBuf,
    pub attribute: Option<String>,
    pub values: Vec<String>,
    pub case_id: Option<String>,
    pub samples: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn counterfactual_cmd(bundle_dir: &Path, req: SweepRequest) -> Result<Outcome> {
    let bundle = Bundle::open(bundle_dir)?;
    let settings = bundle.config.counterfactual.clone();
    let attribute = req
        .attribute
        .or_else(|| settings.as_ref().map(|s| s.attribute.clone()))
        .ok_or_else(|| Error::Config("no attribute to sweep (pass --attribute)".into()))?;
    let values = if req.values.is_empty() {
        settings
            .as_ref()
            .map(|s| s.values.clone())
            .unwrap_or_default()
    } else {
        req.values
    };
    if values.is_empty() {
        return Err(Error::Config("no values to sweep (pass --values)".into()));
    }
    let case_id = req.case_id.or_else(|| settings.and_then(|s| s.case_id));
    let m = req.samples.unwrap_or(bundle.config.samples);
    let table = bundle.config.column_table()?;
    let records = load_cases(&table, &req.cases)?;
    let case = match &case_id {
        Some(id) => records
            .iter()
            .find(|r| &r.id == id)
            .ok_or_else(|| Error::Config(format!("case `{id}` not in {}", req.cases.display())))?,
        None => &records[0],
    };
    let fit = bundle.elicitation_fit()?;
    let sweep = counterfactual(
        &fit.chains,
        &fit.encoder,
        case,
        &attribute,
        &values,
        m,
        &bundle.config.families,
    )?;
    let out = req.out.unwrap_or_else(|| {
        bundle
            .dir
            .join(format!("counterfactual-{}", file_stem(&attribute)))
    });
    let stem = format!("case-{}", file_stem(&case.id));
    for c in &sweep {
        write_prior_json(
            &out.join(format!(
                "{stem}-{}-{}.json",
                file_stem(&attribute),
                file_stem(&c.value)
            )),
            &c.prior,
        )?;
    }
    let mut buf = Vec::new();
    write_counterfactual_csv(&mut buf, &sweep, DENSITY_POINTS)?;
    write_file(&out.join(format!("{stem}-overlay.csv")), &buf)?;
    let series: Vec<Series> = sweep
        .iter()
        .map(|c| {
            let prior = c.prior.selected_prior();
            Series::new(
                format!("{attribute} = {}", c.value),
                (1..=DENSITY_POINTS)
                    .map(|k| {
                        let x = k as f64 / (DENSITY_POINTS + 1) as f64;
                        (x, prior.pdf(x))
                    })
                    .collect(),
            )
        })
        .collect();
    let svg = density_svg(
        &format!("Case {} with {attribute} varied", case.id),
        &series,
    );
    write_file(&out.join(format!("{stem}-overlay.svg")), svg.as_bytes())?;
    let summary: Vec<_> = sweep
        .iter()
        .map(|c| serde_json::json!({ "value": c.value, "prior": c.prior.to_json() }))
        .collect();
    write_json(&out.join(format!("{stem}-sweep.json")), &summary)?;
    for c in &sweep {
        println!("{attribute} = {}: mean {:.4}", c.value, c.prior.mean);
    }
    Ok(Outcome::Ok)
}

pub fn bench(config: &RunConfig) -> Result<Outcome> {
    config.seed()?;
    let summary = run_bench(&config.bench)?;
    for line in summary.lines() {
        println!("{line}");
    }
    if let Some(out) = &config.out {
        write_json(&out.join("bench.json"), &summary)?;
    }
    println!(
        "{}",
        if summary.passed() {
            "bench: all properties passed"
        } else {
            "bench: some properties failed"
        }
    );
    Ok(Outcome::Ok)
}

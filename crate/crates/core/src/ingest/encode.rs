use std::collections::BTreeSet;
use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use super::{CaseRecord, ColumnKind, ColumnTable, Value, INTERCEPT};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VariableEncoding {
    Numeric {
        name: String,
        mean: f64,
        sd: f64,
    },
    Categorical {
        name: String,
        reference: String,
        /// Non-reference levels, in dummy column order.
        dummies: Vec<String>,
    },
}

impl VariableEncoding {
    pub fn name(&self) -> &str {
        match self {
            VariableEncoding::Numeric { name, .. } | VariableEncoding::Categorical { name, .. } => {
                name
            }
        }
    }

    fn width(&self) -> usize {
        match self {
            VariableEncoding::Numeric { .. } => 1,
            VariableEncoding::Categorical { dummies, .. } => dummies.len(),
        }
    }
}

/// Training-set statistics that map case records onto design rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub variables: Vec<VariableEncoding>,
}

impl Encoder {
    /// Fit standardization and dummy layout on `train` for the given model
    /// variables.
    pub fn fit(train: &[CaseRecord], table: &ColumnTable, variables: &[String]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        let mut out = Vec::with_capacity(variables.len());
        for name in variables {
            let kind = table
                .variable_kind(name)
                .ok_or_else(|| Error::UnknownVariable(name.clone()))?;
            match kind {
                ColumnKind::Numeric => {
                    let values = train
                        .iter()
                        .map(|r| match r.get(name) {
                            Value::Number(v) => Ok(*v),
                            _ => Err(Error::Invalid(format!(
                                "record {} has no value for `{name}`",
                                r.id
                            ))),
                        })
                        .collect::<Result<Vec<f64>>>()?;
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
                    if sd.is_nan() || sd <= 0.0 {
                        return Err(Error::ZeroVariance(name.clone()));
                    }
                    out.push(VariableEncoding::Numeric {
                        name: name.clone(),
                        mean,
                        sd,
                    });
                }
                ColumnKind::Categorical => {
                    let spec = table.column(name).expect("kind came from this column");
                    let observed: BTreeSet<&str> = train
                        .iter()
                        .map(|r| match r.get(name) {
                            Value::Level(l) => Ok(l.as_str()),
                            _ => Err(Error::Invalid(format!(
                                "record {} has no level for `{name}`",
                                r.id
                            ))),
                        })
                        .collect::<Result<_>>()?;
                    let mut ordered: Vec<String> = Vec::new();
                    if let Some(levels) = &spec.levels {
                        ordered.extend(
                            levels
                                .iter()
                                .filter(|l| observed.contains(l.as_str()))
                                .cloned(),
                        );
                    }
                    for level in &observed {
                        if !ordered.iter().any(|l| l == level) {
                            ordered.push(level.to_string());
                        }
                    }
                    let reference = spec.reference.clone().unwrap_or_else(|| ordered[0].clone());
                    let dummies = ordered.into_iter().filter(|l| *l != reference).collect();
                    out.push(VariableEncoding::Categorical {
                        name: name.clone(),
                        reference,
                        dummies,
                    });
                }
                _ => unreachable!("variable_kind only yields numeric or categorical"),
            }
        }
        Ok(Encoder { variables: out })
    }

    pub fn width(&self) -> usize {
        1 + self
            .variables
            .iter()
            .map(VariableEncoding::width)
            .sum::<usize>()
    }

    pub fn column_names(&self) -> Vec<String> {
        let mut names = vec![INTERCEPT.to_string()];
        for v in &self.variables {
            match v {
                VariableEncoding::Numeric { name, .. } => names.push(name.clone()),
                VariableEncoding::Categorical { name, dummies, .. } => {
                    names.extend(dummies.iter().map(|l| format!("{name}_{l}")))
                }
            }
        }
        names
    }

    /// Variable group owning each design column.
    pub fn column_groups(&self) -> Vec<String> {
        let mut groups = vec![INTERCEPT.to_string()];
        for v in &self.variables {
            groups.extend(std::iter::repeat_n(v.name().to_string(), v.width()));
        }
        groups
    }

    /// Model variables absent (or of the wrong type) in `record`.
    pub fn missing_fields(&self, record: &CaseRecord) -> Vec<String> {
        self.variables
            .iter()
            .filter(|v| {
                !matches!(
                    (v, record.get(v.name())),
                    (VariableEncoding::Numeric { .. }, Value::Number(_))
                        | (VariableEncoding::Categorical { .. }, Value::Level(_))
                )
            })
            .map(|v| v.name().to_string())
            .collect()
    }

    /// Design row for one record. Unknown levels fall back to the reference
    /// encoding and are reported in `warnings`.
    pub fn encode_record(
        &self,
        record: &CaseRecord,
        warnings: &mut Vec<String>,
    ) -> Result<Vec<f64>> {
        let missing = self.missing_fields(record);
        if !missing.is_empty() {
            return Err(Error::SchemaMismatch(missing));
        }
        let mut row = Vec::with_capacity(self.width());
        row.push(1.0);
        for v in &self.variables {
            match (v, record.get(v.name())) {
                (VariableEncoding::Numeric { mean, sd, .. }, Value::Number(x)) => {
                    row.push((x - mean) / sd)
                }
                (
                    VariableEncoding::Categorical {
                        name,
                        reference,
                        dummies,
                    },
                    Value::Level(level),
                ) => {
                    if level != reference && !dummies.contains(level) {
                        let msg = format!(
                            "case {}: level `{level}` of `{name}` unseen in training, encoded as `{reference}`",
                            record.id
                        );
                        warn!("{msg}");
                        warnings.push(msg);
                    }
                    row.extend(dummies.iter().map(|d| if d == level { 1.0 } else { 0.0 }));
                }
                _ => unreachable!("missing_fields checked types"),
            }
        }
        Ok(row)
    }

    /// Natural-unit value of a standardized numeric variable.
    pub fn decode_numeric(&self, name: &str, z: f64) -> Option<f64> {
        self.variables.iter().find_map(|v| match v {
            VariableEncoding::Numeric { name: n, mean, sd } if n == name => Some(z * sd + mean),
            _ => None,
        })
    }

    /// Encode every record; records must carry a decision.
    pub fn transform(&self, records: &[CaseRecord]) -> Result<EncodedDataset> {
        let mut warnings = Vec::new();
        let mut design = Vec::with_capacity(records.len() * self.width());
        let mut response = Vec::with_capacity(records.len());
        for r in records {
            design.extend(self.encode_record(r, &mut warnings)?);
            let label = r
                .decision
                .ok_or_else(|| Error::Invalid(format!("record {} has no decision", r.id)))?;
            response.push(label.code());
        }
        Ok(EncodedDataset {
            names: self.column_names(),
            groups: self.column_groups(),
            design,
            response,
            ids: records.iter().map(|r| r.id.clone()).collect(),
            encoder: Some(self.clone()),
            provenance: Provenance::default(),
            warnings,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub replicate: Option<usize>,
    pub seed: Option<u64>,
}

/// Design matrix (row-major, intercept first) with binary responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedDataset {
    pub names: Vec<String>,
    pub groups: Vec<String>,
    pub design: Vec<f64>,
    pub response: Vec<u8>,
    pub ids: Vec<String>,
    pub encoder: Option<Encoder>,
    pub provenance: Provenance,
    pub warnings: Vec<String>,
}

impl EncodedDataset {
    /// Build directly from a design matrix; each column is its own group.
    pub fn from_parts(names: Vec<String>, design: Vec<f64>, response: Vec<u8>) -> Result<Self> {
        let d = names.len();
        if d == 0 || design.len() != d * response.len() {
            return Err(Error::DimensionMismatch {
                expected: d * response.len(),
                got: design.len(),
            });
        }
        if response.iter().any(|&y| y > 1) {
            return Err(Error::Invalid("responses must be 0 or 1".into()));
        }
        Ok(EncodedDataset {
            groups: names.clone(),
            names,
            design,
            ids: (0..response.len()).map(|i| (i + 1).to_string()).collect(),
            response,
            encoder: None,
            provenance: Provenance::default(),
            warnings: Vec::new(),
        })
    }

    pub fn rows(&self) -> usize {
        self.response.len()
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.cols();
        &self.design[i * d..(i + 1) * d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.design[i * self.cols() + j]
    }

    /// Copy holding only the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        EncodedDataset {
            names: self.names.clone(),
            groups: self.groups.clone(),
            design: rows
                .iter()
                .flat_map(|&i| self.row(i).iter().copied())
                .collect(),
            response: rows.iter().map(|&i| self.response[i]).collect(),
            ids: rows.iter().map(|&i| self.ids[i].clone()).collect(),
            encoder: self.encoder.clone(),
            provenance: self.provenance,
            warnings: Vec::new(),
        }
    }

    /// Copy with the design columns of the named groups removed.
    pub fn without_groups(&self, groups: &[String]) -> Result<Self> {
        if groups.iter().any(|g| g == INTERCEPT) {
            return Err(Error::Config("the intercept cannot be removed".into()));
        }
        for g in groups {
            if !self.groups.contains(g) {
                return Err(Error::UnknownVariable(g.clone()));
            }
        }
        let keep: Vec<usize> = (0..self.cols())
            .filter(|&j| !groups.contains(&self.groups[j]))
            .collect();
        let design = (0..self.rows())
            .flat_map(|i| keep.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        Ok(EncodedDataset {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            groups: keep.iter().map(|&j| self.groups[j].clone()).collect(),
            design,
            response: self.response.clone(),
            ids: self.ids.clone(),
            encoder: None,
            provenance: self.provenance,
            warnings: self.warnings.clone(),
        })
    }

    /// Audit export: `id,response,<columns...>`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string(), "response".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header)?;
        for i in 0..self.rows() {
            let mut rec = vec![self.ids[i].clone(), self.response[i].to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<dataset>", e))?;
        Ok(())
    }
}

/// Keep records with a decision and every listed variable present; returns the
/// kept records and the number dropped.
pub fn complete_cases(records: &[CaseRecord], variables: &[String]) -> (Vec<CaseRecord>, usize) {
    let kept: Vec<CaseRecord> = records
        .iter()
        .filter(|r| r.decision.is_some() && variables.iter().all(|v| !r.get(v).is_missing()))
        .cloned()
        .collect();
    let dropped = records.len() - kept.len();
    (kept, dropped)
}

/// Fit the encoder on `train` and apply it to both sets.
pub fn encode(
    train: &[CaseRecord],
    test: &[CaseRecord],
    table: &ColumnTable,
    variables: &[String],
) -> Result<(EncodedDataset, EncodedDataset)> {
    let encoder = Encoder::fit(train, table, variables)?;
    Ok((encoder.transform(train)?, encoder.transform(test)?))
}

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use log::warn;

use super::{CaseRecord, ColumnKind, ColumnSpec, ColumnTable, Label, Value};
use crate::error::{Error, Result};

const DEFAULT_POSITIVE: [&str; 2] = ["Denied", "Not Granted"];
const DEFAULT_NEGATIVE: [&str; 3] = ["Open Date", "Granted", "Paroled"];

const DAYS_PER_YEAR: f64 = 365.25;

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded {
    pub records: Vec<CaseRecord>,
    /// Rows dropped because the decision label was not recognised.
    pub dropped: usize,
}

/// Map a raw decision string to a label using the column's positive/negative
/// lists (case-insensitive, trimmed). Defaults to the parole-board wording.
pub fn binarize_decision(raw: &str, spec: &ColumnSpec) -> Option<Label> {
    let raw = raw.trim();
    let matches = |list: &Option<Vec<String>>, default: &[&str]| match list {
        Some(values) => values.iter().any(|v| v.trim().eq_ignore_ascii_case(raw)),
        None => default.iter().any(|v| v.eq_ignore_ascii_case(raw)),
    };
    if matches(&spec.positive, &DEFAULT_POSITIVE) {
        Some(Label::Positive)
    } else if matches(&spec.negative, &DEFAULT_NEGATIVE) {
        Some(Label::Negative)
    } else {
        None
    }
}

/// Read a decision-history CSV, applying category maps and derived features.
/// Every declared column must be present; rows
/// whose decision is not recognised are dropped and counted.
pub fn load_table(path: &Path, table: &ColumnTable) -> Result<Loaded> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_table_from_reader(file, table, true)
}

/// As [`load_table`], over any reader. With `require_decision = false` the
/// decision and any other declared column may be absent (new cases); absent
/// columns load as missing values.
pub fn load_table_from_reader<R: Read>(
    input: R,
    table: &ColumnTable,
    require_decision: bool,
) -> Result<Loaded> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.clone();
    let position = |name: &str| header.iter().position(|h| h == name);

    let mut layout = Vec::with_capacity(table.columns.len());
    for spec in &table.columns {
        match position(&spec.name) {
            Some(i) => layout.push((spec, Some(i))),
            None if require_decision => return Err(Error::MissingColumn(spec.name.clone())),
            None => layout.push((spec, None)),
        }
    }
    let id_column = match &table.id {
        Some(name) => match position(name) {
            Some(i) => Some(i),
            None if require_decision => return Err(Error::MissingColumn(name.clone())),
            None => None,
        },
        None => None,
    };

    let mut records = Vec::new();
    let mut dropped = 0;
    for (row, result) in reader.records().enumerate() {
        let raw = result?;
        let id = match id_column {
            Some(i) => raw.get(i).unwrap_or_default().to_string(),
            None => (row + 1).to_string(),
        };
        let mut record = CaseRecord::new(id);
        let mut keep = true;
        for (spec, index) in &layout {
            let cell = index.and_then(|i| raw.get(i));
            match spec.kind() {
                ColumnKind::Decision => {
                    if let Some(text) = cell {
                        match binarize_decision(text, spec) {
                            Some(label) => record.decision = Some(label),
                            None if require_decision => {
                                keep = false;
                                break;
                            }
                            None => record.flags.push(format!("unrecognised decision `{text}`")),
                        }
                    }
                }
                kind => {
                    let value = parse_cell(cell, kind, spec, table, &mut record.flags);
                    record.features.insert(spec.name.clone(), value);
                }
            }
        }
        if keep {
            records.push(derive_features(record, table));
        } else {
            dropped += 1;
        }
    }
    if dropped > 0 {
        warn!("dropped {dropped} rows with an unrecognised decision");
    }
    Ok(Loaded { records, dropped })
}

fn parse_cell(
    cell: Option<&str>,
    kind: ColumnKind,
    spec: &ColumnSpec,
    table: &ColumnTable,
    flags: &mut Vec<String>,
) -> Value {
    let text = match cell {
        Some(t) if !t.is_empty() => t,
        _ => return Value::Missing,
    };
    match kind {
        ColumnKind::Numeric => match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Value::Number(v),
            _ => {
                flags.push(format!("{}: unparseable number `{text}`", spec.name));
                Value::Missing
            }
        },
        ColumnKind::Categorical => Value::Level(text.to_string()),
        ColumnKind::Date => {
            let format = spec.format.as_deref().unwrap_or(&table.date_format);
            match NaiveDate::parse_from_str(text, format) {
                Ok(d) => Value::Date(d),
                Err(_) => {
                    flags.push(format!("{}: unparseable date `{text}`", spec.name));
                    Value::Missing
                }
            }
        }
        ColumnKind::Decision => unreachable!("decision handled by caller"),
    }
}

/// Simplify a raw categorical value through the column's map.
pub(crate) fn simplify_level(raw: &str, spec: &ColumnSpec) -> Option<String> {
    let Some(map) = &spec.category_map else {
        return Some(raw.to_string());
    };
    let lowered = raw.to_lowercase();
    if let Some((_, level)) = map.iter().find(|(k, _)| k.to_lowercase() == lowered) {
        return Some(level.clone());
    }
    // Levels already in simplified form pass through unchanged.
    if let Some(level) = map.values().find(|v| v.to_lowercase() == lowered) {
        return Some(level.clone());
    }
    if let Some(level) = spec
        .fallback
        .as_ref()
        .filter(|f| f.to_lowercase() == lowered)
    {
        return Some(level.clone());
    }
    let best = map
        .iter()
        .filter(|(k, _)| !k.is_empty() && lowered.contains(&k.to_lowercase()))
        .max_by_key(|(k, _)| k.len());
    match best {
        Some((_, level)) => Some(level.clone()),
        None => spec.fallback.clone(),
    }
}

/// Apply category simplification maps and compute the derived year spans.
pub fn derive_features(mut record: CaseRecord, table: &ColumnTable) -> CaseRecord {
    for spec in table
        .columns
        .iter()
        .filter(|c| c.kind() == ColumnKind::Categorical)
    {
        if let Some(Value::Level(raw)) = record.features.get(&spec.name) {
            let simplified = simplify_level(raw, spec);
            let value = match simplified {
                Some(level) => Value::Level(level),
                None => {
                    record
                        .flags
                        .push(format!("{}: unmapped level `{raw}`", spec.name));
                    Value::Missing
                }
            };
            record.features.insert(spec.name.clone(), value);
        }
    }
    for d in &table.derived {
        let value = match (record.get(&d.from), record.get(&d.to)) {
            (Value::Date(from), Value::Date(to)) => {
                let years = (*to - *from).num_days() as f64 / DAYS_PER_YEAR;
                if years < 0.0 && d.clamp_negative {
                    record
                        .flags
                        .push(format!("{}: negative span clamped to 0", d.name));
                    Value::Number(0.0)
                } else {
                    Value::Number(years)
                }
            }
            _ => Value::Missing,
        };
        record.features.insert(d.name.clone(), value);
    }
    record
}

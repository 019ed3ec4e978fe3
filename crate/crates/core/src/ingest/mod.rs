//! Decision-history tables: column specs, loading, derived features,
//! standardized/dummy encoding and reproducible train/test splits.

mod encode;
mod load;
mod split;

pub use encode::{complete_cases, encode, EncodedDataset, Encoder, Provenance, VariableEncoding};
pub use load::{binarize_decision, derive_features, load_table, load_table_from_reader, Loaded};
pub use split::{split, Partition, SplitPlan};

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const INTERCEPT: &str = "(intercept)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Date,
    Decision,
}

/// One raw CSV column and how to read it.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: Option<ColumnKind>,
    /// Raw value -> simplified level. Keys match case-insensitively, first
    /// exactly, then as the longest substring of the raw value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category_map: Option<BTreeMap<String, String>>,
    /// Level for raw values no key matches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
    /// Dummy reference level.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Preferred level order for dummy columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
    /// chrono format string for date columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// Raw decision strings coded 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positive: Option<Vec<String>>,
    /// Raw decision strings coded 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub negative: Option<Vec<String>>,
}

impl ColumnSpec {
    pub fn kind(&self) -> ColumnKind {
        self.kind.unwrap_or(ColumnKind::Numeric)
    }
}

/// A numeric feature computed as the span in years between two date columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivedSpec {
    pub name: String,
    pub from: String,
    pub to: String,
    /// Negative spans become 0 and the record is flagged.
    #[serde(default)]
    pub clamp_negative: bool,
}

/// Everything needed to turn a raw CSV into case records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnTable {
    /// Column holding the case id; row numbers are used when absent.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default = "default_date_format")]
    pub date_format: String,
    #[serde(rename = "column", default)]
    pub columns: Vec<ColumnSpec>,
    #[serde(rename = "derived", default)]
    pub derived: Vec<DerivedSpec>,
}

fn default_date_format() -> String {
    "%Y-%m-%d".to_string()
}

impl ColumnTable {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: ColumnTable =
            toml::from_str(text).map_err(|e| Error::Config(format!("column spec: {e}")))?;
        table.validate()?;
        Ok(table)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("column table serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let decisions = self
            .columns
            .iter()
            .filter(|c| c.kind() == ColumnKind::Decision)
            .count();
        if decisions != 1 {
            return Err(Error::Config(format!(
                "exactly one decision column required, found {decisions}"
            )));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in self
            .columns
            .iter()
            .map(|c| &c.name)
            .chain(self.derived.iter().map(|d| &d.name))
        {
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!("duplicate column `{name}`")));
            }
        }
        for d in &self.derived {
            for src in [&d.from, &d.to] {
                match self.column(src) {
                    Some(c) if c.kind() == ColumnKind::Date => {}
                    _ => {
                        return Err(Error::Config(format!(
                            "derived `{}` needs date column `{src}`",
                            d.name
                        )))
                    }
                }
            }
        }
        for c in &self.columns {
            if let Some(map) = &c.category_map {
                let mut lowered = std::collections::BTreeSet::new();
                for key in map.keys() {
                    if !lowered.insert(key.to_lowercase()) {
                        return Err(Error::Config(format!(
                            "column `{}`: duplicate category key `{key}`",
                            c.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn decision_column(&self) -> &ColumnSpec {
        self.columns
            .iter()
            .find(|c| c.kind() == ColumnKind::Decision)
            .expect("validated table has a decision column")
    }

    /// Kind of a model variable: numeric or categorical column, or a derived
    /// numeric feature.
    pub fn variable_kind(&self, name: &str) -> Option<ColumnKind> {
        if self.derived.iter().any(|d| d.name == name) {
            return Some(ColumnKind::Numeric);
        }
        match self.column(name)?.kind() {
            k @ (ColumnKind::Numeric | ColumnKind::Categorical) => Some(k),
            _ => None,
        }
    }
}

/// Binary decision; `Positive` is coded 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn code(self) -> u8 {
        match self {
            Label::Positive => 1,
            Label::Negative => 0,
        }
    }

    pub fn from_code(y: u8) -> Self {
        if y == 1 {
            Label::Positive
        } else {
            Label::Negative
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Value {
    Number(f64),
    Level(String),
    Date(NaiveDate),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

/// One historical (or new) case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseRecord {
    pub id: String,
    pub features: BTreeMap<String, Value>,
    pub decision: Option<Label>,
    /// Data-quality notes attached during loading or derivation.
    pub flags: Vec<String>,
}

impl CaseRecord {
    pub fn new(id: impl Into<String>) -> Self {
        CaseRecord {
            id: id.into(),
            features: BTreeMap::new(),
            decision: None,
            flags: Vec::new(),
        }
    }

    pub fn with(mut self, name: &str, value: Value) -> Self {
        self.features.insert(name.to_string(), value);
        self
    }

    pub fn with_decision(mut self, label: Label) -> Self {
        self.decision = Some(label);
        self
    }

    pub fn get(&self, name: &str) -> &Value {
        self.features.get(name).unwrap_or(&Value::Missing)
    }
}

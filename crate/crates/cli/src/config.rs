use std::path::{Path, PathBuf};

use elicit_core::analysis::{AblationSpec, ProtocolConfig};
use elicit_core::diagnostics::{EntropyMode, DEFAULT_CALIBRATION_BINS};
use elicit_core::elicit::{Family, DEFAULT_SAMPLES};
use elicit_core::ingest::{ColumnTable, SplitPlan};
use elicit_core::model::PriorSpec;
use elicit_core::sampler::SamplerConfig;
use elicit_core::synthbench::BenchSuite;
use elicit_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterfactualSettings {
    pub attribute: String,
    pub values: Vec<String>,
    /// Case to sweep; defaults to the first row of the case file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_id: Option<String>,
}

/// Everything a command needs, read from a TOML file. Relative paths are
/// resolved against the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Drives every random stream (splits, chains, bench data).
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<PathBuf>,
    #[serde(default)]
    pub variables: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "Family::all")]
    pub families: Vec<Family>,
    /// Also fit every complete row; `elicit` and `counterfactual` use this fit.
    #[serde(default = "default_true")]
    pub full_model: bool,
    #[serde(default = "default_bins")]
    pub calibration_bins: usize,
    #[serde(default)]
    pub entropy_mode: EntropyMode,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub split: SplitPlan,
    #[serde(default, rename = "ablation")]
    pub ablations: Vec<AblationSpec>,
    /// Case ids whose priors are reported per ablation model.
    #[serde(default)]
    pub probes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterfactual: Option<CounterfactualSettings>,
    #[serde(default)]
    pub bench: BenchSuite,
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

fn default_true() -> bool {
    true
}

fn default_bins() -> usize {
    DEFAULT_CALIBRATION_BINS
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config parses")
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub replicates: Option<usize>,
    pub samples: Option<usize>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("run config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut config = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut config.data, &mut config.columns, &mut config.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.seed = Some(seed);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(r) = o.replicates {
            self.split.replicate_count = r;
        }
        if let Some(m) = o.samples {
            self.samples = m;
        }
        // one seed drives everything
        if let Some(seed) = self.seed {
            self.sampler.seed = seed;
            self.sampler.stream = 0;
            self.split.base_seed = seed;
            self.bench.seed = seed;
        }
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (set `seed` or pass --seed)".into()))
    }

    pub fn out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| {
            Error::Config("an output directory is required (set `out` or pass --out)".into())
        })
    }

    fn existing(path: &Option<PathBuf>, what: &str) -> Result<PathBuf> {
        let p = path
            .as_ref()
            .ok_or_else(|| Error::Config(format!("`{what}` is not set")))?;
        if !p.is_file() {
            return Err(Error::Config(format!(
                "{what} file {} does not exist",
                p.display()
            )));
        }
        Ok(p.clone())
    }

    pub fn data_path(&self) -> Result<PathBuf> {
        Self::existing(&self.data, "data")
    }

    pub fn column_table(&self) -> Result<ColumnTable> {
        ColumnTable::from_path(&Self::existing(&self.columns, "columns")?)
    }

    /// Checks for commands that fit models on the configured data.
    pub fn validate_for_fit(&self) -> Result<()> {
        self.seed()?;
        self.out()?;
        self.data_path()?;
        self.column_table()?;
        if self.variables.is_empty() {
            return Err(Error::Config("`variables` lists no model variables".into()));
        }
        if self.families.is_empty() {
            return Err(Error::Config("`families` is empty".into()));
        }
        self.protocol().validate()
    }

    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            plan: self.split,
            sampler: self.sampler.clone(),
            prior: self.prior,
            samples: self.samples,
            calibration_bins: self.calibration_bins,
            entropy_mode: self.entropy_mode,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let mut c =
            RunConfig::parse("seed = 5\nvariables = [\"age\"]\n[split]\nreplicate_count = 3\n")
                .unwrap();
        assert_eq!(c.samples, 100);
        assert_eq!(c.families, Family::all());
        assert!(c.full_model);
        c.apply(&Overrides {
            replicates: Some(2),
            ..Overrides::default()
        });
        assert_eq!(c.split.replicate_count, 2);
        assert_eq!((c.sampler.seed, c.split.base_seed), (5, 5));
        let again = RunConfig::parse(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn seed_is_mandatory_and_unknown_keys_rejected() {
        assert!(RunConfig::parse("").unwrap().seed().is_err());
        assert!(RunConfig::parse("sed = 1").is_err());
    }
}

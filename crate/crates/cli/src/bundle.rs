//! Model bundle directory: the persisted output of `fit`.
//!
//! ```text
//! manifest.json      config hash, seed, versions, file digests
//! config.toml        resolved run config
//! split.json         partition of every replicate
//! replicate-<k>/     encoder.json, draws.csv, convergence.json, coefficients.csv
//! full/              same, fitted on every complete row (optional)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use elicit_core::analysis::coefficient_relevance;
use elicit_core::analysis::write_relevance_csv;
use elicit_core::ingest::{Encoder, Partition};
use elicit_core::sampler::{read_trace, write_trace, ConvergenceReport, PosteriorChain};
use elicit_core::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;

pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";
pub const SPLITS: &str = "split.json";
pub const FULL_DIR: &str = "full";

pub fn replicate_dir(k: usize) -> String {
    format!("replicate-{k}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub replicate: usize,
    pub fingerprint: String,
    pub partition: Partition,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub replicates: usize,
    pub full_model: bool,
    pub convergence_flagged: bool,
    /// Relative path to sha256 of every other bundle file.
    pub files: BTreeMap<String, String>,
}

/// One fitted model inside a bundle.
pub struct FitArtifacts<'a> {
    pub encoder: Option<&'a Encoder>,
    pub names: &'a [String],
    pub chains: &'a [PosteriorChain],
    pub convergence: &'a ConvergenceReport,
}

pub fn write_fit(dir: &Path, fit: &FitArtifacts) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    if let Some(enc) = fit.encoder {
        write_json(&dir.join("encoder.json"), enc)?;
    }
    let mut trace = Vec::new();
    write_trace(&mut trace, fit.chains, fit.names)?;
    write_file(&dir.join("draws.csv"), &trace)?;
    write_json(&dir.join("convergence.json"), fit.convergence)?;
    let mut rel = Vec::new();
    write_relevance_csv(&mut rel, &coefficient_relevance(fit.chains, fit.names)?)?;
    write_file(&dir.join("coefficients.csv"), &rel)
}

/// A model loaded back from a bundle.
pub struct LoadedFit {
    pub encoder: Encoder,
    pub names: Vec<String>,
    pub chains: Vec<PosteriorChain>,
}

pub fn read_fit(dir: &Path, seed: u64) -> Result<LoadedFit> {
    let encoder: Encoder = read_json(&dir.join("encoder.json"))?;
    let path = dir.join("draws.csv");
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let (names, mut chains) = read_trace(file)?;
    for c in &mut chains {
        c.seed = seed;
    }
    Ok(LoadedFit {
        encoder,
        names,
        chains,
    })
}

pub struct Bundle {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub manifest: Manifest,
}

impl Bundle {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST))
            .map_err(|e| Error::Config(format!("{} is not a model bundle: {e}", dir.display())))?;
        let path = dir.join(CONFIG);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        if sha256_hex(text.as_bytes()) != manifest.config_sha256 {
            return Err(Error::Config(format!(
                "{} does not match the manifest hash",
                path.display()
            )));
        }
        Ok(Bundle {
            dir: dir.to_path_buf(),
            config: RunConfig::parse(&text)?,
            manifest,
        })
    }

    pub fn splits(&self) -> Result<Vec<SplitRecord>> {
        read_json(&self.dir.join(SPLITS))
    }

    /// Fit used for new cases: the full-data fit when present, else replicate 0.
    pub fn elicitation_fit(&self) -> Result<LoadedFit> {
        let dir = if self.manifest.full_model {
            self.dir.join(FULL_DIR)
        } else {
            self.dir.join(replicate_dir(0))
        };
        read_fit(&dir, self.manifest.seed)
    }
}

/// Write the manifest last, hashing the listed bundle files.
pub fn write_manifest(dir: &Path, mut manifest: Manifest, files: &[String]) -> Result<()> {
    manifest.files = files
        .iter()
        .map(|rel| {
            let path = dir.join(rel);
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            Ok((rel.clone(), sha256_hex(&bytes)))
        })
        .collect::<Result<_>>()?;
    write_json(&dir.join(MANIFEST), &manifest)
}

/// Relative paths of the files [`write_fit`] produces under `sub`.
pub fn fit_files(sub: &str, with_encoder: bool) -> Vec<String> {
    let mut names = vec!["draws.csv", "convergence.json", "coefficients.csv"];
    if with_encoder {
        names.insert(0, "encoder.json");
    }
    names.into_iter().map(|n| format!("{sub}/{n}")).collect()
}

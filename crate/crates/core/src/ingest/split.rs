use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPlan {
    pub train_fraction: f64,
    pub replicate_count: usize,
    pub base_seed: u64,
}

impl Default for SplitPlan {
    fn default() -> Self {
        SplitPlan {
            train_fraction: 0.8,
            replicate_count: 5,
            base_seed: 0,
        }
    }
}

impl SplitPlan {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if self.replicate_count == 0 {
            return Err(Error::Config("replicate_count must be at least 1".into()));
        }
        Ok(())
    }

    /// `ceil(train_fraction * n)`, kept within `[1, n - 1]`.
    pub fn train_size(&self, n: usize) -> usize {
        // absorb representation error such as 0.8 * 9580 = 7664.000000000001
        let raw = (self.train_fraction * n as f64 - 1e-9).ceil() as usize;
        raw.clamp(1, n - 1)
    }
}

/// Row indices of one train/test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Partition `n` rows for `replicate` of `plan`.
pub fn split(n: usize, plan: &SplitPlan, replicate: usize) -> Result<Partition> {
    plan.validate()?;
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, got: n });
    }
    if replicate >= plan.replicate_count {
        return Err(Error::Config(format!(
            "replicate {replicate} outside plan of {}",
            plan.replicate_count
        )));
    }
    let mut rng = stream_rng(
        plan.base_seed,
        Stream::Split {
            replicate: replicate as u64,
        },
    );
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let k = plan.train_size(n);
    let mut train = order[..k].to_vec();
    let mut test = order[k..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Partition { train, test })
}

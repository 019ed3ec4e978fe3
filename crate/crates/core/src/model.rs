//! Bayesian logistic regression: the posterior density the sampler explores.
//!
//! `P(y = 1 | x, theta) = 1 / (1 + exp(-theta . x))`, independent Normal priors
//! on every coefficient including the intercept.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::EncodedDataset;
use crate::sampler::Target;

/// How `PriorSpec::scale_value` is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScaleParameterization {
    Variance,
    Precision,
}

/// Independent Normal prior shared by all coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "default_parameterization")]
    pub scale_parameterization: ScaleParameterization,
    #[serde(default = "default_scale_value")]
    pub scale_value: f64,
}

fn default_parameterization() -> ScaleParameterization {
    ScaleParameterization::Precision
}

fn default_scale_value() -> f64 {
    0.001
}

impl Default for PriorSpec {
    /// Normal(0, 0.001) read as a precision, i.e. variance 1000.
    fn default() -> Self {
        PriorSpec {
            mean: 0.0,
            scale_parameterization: ScaleParameterization::Precision,
            scale_value: 0.001,
        }
    }
}

impl PriorSpec {
    pub fn with_variance(mean: f64, variance: f64) -> Self {
        PriorSpec {
            mean,
            scale_parameterization: ScaleParameterization::Variance,
            scale_value: variance,
        }
    }

    pub fn with_precision(mean: f64, precision: f64) -> Self {
        PriorSpec {
            mean,
            scale_parameterization: ScaleParameterization::Precision,
            scale_value: precision,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_value > 0.0 && self.scale_value.is_finite()) || !self.mean.is_finite() {
            return Err(Error::Config(format!(
                "prior scale must be positive and finite, got {}",
                self.scale_value
            )));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match self.scale_parameterization {
            ScaleParameterization::Variance => self.scale_value,
            ScaleParameterization::Precision => 1.0 / self.scale_value,
        }
    }

    /// Log density of one coordinate, constants included.
    pub fn log_density_1d(&self, value: f64) -> f64 {
        let var = self.variance();
        let z = value - self.mean;
        -0.5 * (2.0 * PI * var).ln() - z * z / (2.0 * var)
    }
}

pub fn linear_predictor(theta: &[f64], x: &[f64]) -> Result<f64> {
    if theta.len() != x.len() {
        return Err(Error::DimensionMismatch {
            expected: theta.len(),
            got: x.len(),
        });
    }
    Ok(dot(theta, x))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// Logistic sigmoid, evaluated on whichever side avoids overflow.
#[inline]
pub fn inverse_link(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Bernoulli log mass of label `y` at linear predictor `eta`.
#[inline]
pub fn log_bernoulli(y: u8, eta: f64) -> f64 {
    if y == 1 {
        -softplus(-eta)
    } else {
        -softplus(eta)
    }
}

pub fn log_likelihood(theta: &[f64], data: &EncodedDataset) -> Result<f64> {
    if theta.len() != data.cols() {
        return Err(Error::DimensionMismatch {
            expected: data.cols(),
            got: theta.len(),
        });
    }
    Ok((0..data.rows())
        .map(|i| log_bernoulli(data.response[i], dot(theta, data.row(i))))
        .sum())
}

pub fn log_prior(theta: &[f64], prior: &PriorSpec) -> f64 {
    theta.iter().map(|&t| prior.log_density_1d(t)).sum()
}

enum Column {
    Dense(Vec<f64>),
    Sparse { rows: Vec<u32>, values: Vec<f64> },
}

impl Column {
    fn nnz(&self) -> usize {
        match self {
            Column::Dense(v) => v.len(),
            Column::Sparse { rows, .. } => rows.len(),
        }
    }

    fn sum_sq(&self) -> f64 {
        match self {
            Column::Dense(v) => v.iter().map(|x| x * x).sum(),
            Column::Sparse { values, .. } => values.iter().map(|x| x * x).sum(),
        }
    }
}

/// Logistic regression posterior bound to one encoded dataset.
///
/// Columns are stored column-major, and dummy columns that are mostly zero are
/// kept sparse, so a single-coordinate move touches only the rows it changes.
pub struct LogisticModel<'a> {
    data: &'a EncodedDataset,
    prior: PriorSpec,
    columns: Vec<Column>,
}

impl<'a> LogisticModel<'a> {
    pub fn new(data: &'a EncodedDataset, prior: PriorSpec) -> Result<Self> {
        prior.validate()?;
        if data.rows() == 0 {
            return Err(Error::TooFewRows { needed: 1, got: 0 });
        }
        let n = data.rows();
        let columns = (0..data.cols())
            .map(|j| {
                let dense: Vec<f64> = (0..n).map(|i| data.get(i, j)).collect();
                let nnz = dense.iter().filter(|v| **v != 0.0).count();
                if nnz * 2 <= n {
                    let (rows, values) = dense
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(i, v)| (i as u32, *v))
                        .unzip();
                    Column::Sparse { rows, values }
                } else {
                    Column::Dense(dense)
                }
            })
            .collect();
        let model = LogisticModel {
            data,
            prior,
            columns,
        };
        let at_zero = model.log_posterior(&vec![0.0; data.cols()])?;
        if !at_zero.is_finite() {
            return Err(Error::NonFiniteInit);
        }
        Ok(model)
    }

    pub fn data(&self) -> &EncodedDataset {
        self.data
    }

    pub fn prior(&self) -> &PriorSpec {
        &self.prior
    }

    pub fn log_posterior(&self, theta: &[f64]) -> Result<f64> {
        Ok(log_likelihood(theta, self.data)? + log_prior(theta, &self.prior))
    }
}

/// Incremental evaluation state for [`LogisticModel`] under the sampler.
#[derive(Clone)]
pub struct LogisticState {
    eta: Vec<f64>,
    row_ll: Vec<f64>,
    proposed_ll: Vec<f64>,
    log_density: f64,
}

impl Target for LogisticModel<'_> {
    type State = LogisticState;

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn initial_scales(&self) -> Vec<f64> {
        // 2.4 times the conditional sd of each coordinate at theta = 0
        let precision = 1.0 / self.prior.variance();
        self.columns
            .iter()
            .map(|c| 2.4 / (0.25 * c.sum_sq() + precision).sqrt())
            .collect()
    }

    fn init(&self, theta: &[f64]) -> LogisticState {
        let n = self.data.rows();
        let eta: Vec<f64> = (0..n).map(|i| dot(theta, self.data.row(i))).collect();
        let row_ll: Vec<f64> = eta
            .iter()
            .zip(&self.data.response)
            .map(|(&e, &y)| log_bernoulli(y, e))
            .collect();
        let max_nnz = self.columns.iter().map(Column::nnz).max().unwrap_or(0);
        let log_density = row_ll.iter().sum::<f64>() + log_prior(theta, &self.prior);
        LogisticState {
            eta,
            row_ll,
            proposed_ll: vec![0.0; max_nnz],
            log_density,
        }
    }

    fn log_density(&self, state: &LogisticState) -> f64 {
        state.log_density
    }

    fn propose(&self, state: &mut LogisticState, theta: &[f64], j: usize, delta: f64) -> f64 {
        let y = &self.data.response;
        let mut change = 0.0;
        match &self.columns[j] {
            Column::Dense(values) => {
                for (i, &x) in values.iter().enumerate() {
                    let ll = log_bernoulli(y[i], state.eta[i] + delta * x);
                    change += ll - state.row_ll[i];
                    state.proposed_ll[i] = ll;
                }
            }
            Column::Sparse { rows, values } => {
                for (k, (&i, &x)) in rows.iter().zip(values).enumerate() {
                    let i = i as usize;
                    let ll = log_bernoulli(y[i], state.eta[i] + delta * x);
                    change += ll - state.row_ll[i];
                    state.proposed_ll[k] = ll;
                }
            }
        }
        let old = theta[j];
        change += self.prior.log_density_1d(old + delta) - self.prior.log_density_1d(old);
        state.log_density + change
    }

    fn accept(
        &self,
        state: &mut LogisticState,
        theta: &mut [f64],
        j: usize,
        delta: f64,
        log_density: f64,
    ) {
        match &self.columns[j] {
            Column::Dense(values) => {
                for (i, &x) in values.iter().enumerate() {
                    state.eta[i] += delta * x;
                    state.row_ll[i] = state.proposed_ll[i];
                }
            }
            Column::Sparse { rows, values } => {
                for (k, (&i, &x)) in rows.iter().zip(values).enumerate() {
                    let i = i as usize;
                    state.eta[i] += delta * x;
                    state.row_ll[i] = state.proposed_ll[k];
                }
            }
        }
        theta[j] += delta;
        state.log_density = log_density;
    }

    fn refresh(&self, state: &mut LogisticState, theta: &[f64]) {
        state.log_density = state.row_ll.iter().sum::<f64>() + log_prior(theta, &self.prior);
    }
}

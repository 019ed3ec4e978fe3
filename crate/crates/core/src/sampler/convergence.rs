use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::PosteriorChain;
use crate::error::{Error, Result};

pub const RHAT_THRESHOLD: f64 = 1.05;
pub const ESS_THRESHOLD: f64 = 400.0;
const MIN_DRAWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub names: Vec<String>,
    pub chains: usize,
    pub draws_per_chain: usize,
    pub ess: Vec<f64>,
    pub rhat: Vec<f64>,
    pub acceptance_rates: Vec<f64>,
    /// Human-readable reasons the fit should not be trusted; empty when clean.
    pub flags: Vec<String>,
}

impl ConvergenceReport {
    pub fn flagged(&self) -> bool {
        !self.flags.is_empty()
    }
}

/// Split-R-hat and ESS for every coordinate. `names` may be empty, in which
/// case coordinates are called `theta_j`.
pub fn convergence(chains: &[PosteriorChain], names: &[String]) -> Result<ConvergenceReport> {
    let first = chains
        .first()
        .ok_or_else(|| Error::Invalid("no chains to diagnose".into()))?;
    let dim = first.dim;
    let len = chains.iter().map(PosteriorChain::len).min().unwrap_or(0);
    if len < MIN_DRAWS {
        return Err(Error::TooFewDraws {
            needed: MIN_DRAWS,
            got: len,
        });
    }
    if chains.iter().any(|c| c.dim != dim) {
        return Err(Error::Invalid("chains disagree on dimension".into()));
    }
    let names: Vec<String> = if names.len() == dim {
        names.to_vec()
    } else {
        (0..dim).map(|j| format!("theta_{j}")).collect()
    };

    let mut ess = Vec::with_capacity(dim);
    let mut rhat = Vec::with_capacity(dim);
    let mut flags = Vec::new();
    for (j, name) in names.iter().enumerate() {
        let per_chain: Vec<Vec<f64>> = chains
            .iter()
            .map(|c| {
                let mut v = c.coordinate(j);
                v.truncate(len);
                v
            })
            .collect();
        let r = split_rhat(&per_chain);
        let e = effective_sample_size(&per_chain);
        if r.is_nan() || r > RHAT_THRESHOLD {
            flags.push(format!(
                "{name}: split R-hat {r:.4} exceeds {RHAT_THRESHOLD}"
            ));
        }
        if e.is_nan() || e < ESS_THRESHOLD {
            flags.push(format!("{name}: ESS {e:.1} below {ESS_THRESHOLD}"));
        }
        rhat.push(r);
        ess.push(e);
    }
    Ok(ConvergenceReport {
        names,
        chains: chains.len(),
        draws_per_chain: len,
        ess,
        rhat,
        acceptance_rates: chains.iter().map(|c| c.acceptance_rate).collect(),
        flags,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn sample_var(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Between/within variance pieces of equal-length chains: (W, B/n).
fn variance_components(chains: &[&[f64]]) -> (f64, f64) {
    let within = chains.iter().map(|c| sample_var(c)).sum::<f64>() / chains.len() as f64;
    let between_over_n = if chains.len() > 1 {
        let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
        sample_var(&means)
    } else {
        0.0
    };
    (within, between_over_n)
}

/// Potential scale reduction on chains split in half (middle draw dropped when
/// the length is odd). Chains must share a length.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let n = chains[0].len() / 2;
    let halves: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..n], &c[c.len() - n..]])
        .collect();
    let (w, b_over_n) = variance_components(&halves);
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    if w == 0.0 {
        return if var_plus == 0.0 { 1.0 } else { f64::INFINITY };
    }
    (var_plus / w).sqrt()
}

/// Biased autocovariance at every lag, via zero-padded FFT.
fn autocovariance(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let m = mean(xs);
    let size = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = xs
        .iter()
        .map(|x| Complex::new(x - m, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(size).process(&mut buf);
    for c in buf.iter_mut() {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(size).process(&mut buf);
    buf.iter()
        .take(n)
        .map(|c| c.re / (size as f64 * n as f64))
        .collect()
}

/// Multi-chain effective sample size with Geyer's initial monotone sequence.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    let m = chains.len();
    let n = chains[0].len();
    let total = (m * n) as f64;
    let refs: Vec<&[f64]> = chains.iter().map(Vec::as_slice).collect();
    let (w, b_over_n) = variance_components(&refs);
    if w == 0.0 {
        return if b_over_n == 0.0 { total } else { m as f64 };
    }
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * w + b_over_n;
    let acov: Vec<Vec<f64>> = chains.iter().map(|c| autocovariance(c)).collect();
    let rho = |t: usize| -> f64 {
        let mean_acov = acov.iter().map(|a| a[t]).sum::<f64>() / m as f64;
        1.0 - (w - mean_acov) / var_plus
    };

    let mut sum_pairs = 0.0;
    let mut prev_pair = f64::INFINITY;
    let mut t = 0;
    while t + 1 < n {
        let pair = rho(t) + rho(t + 1);
        if pair < 0.0 {
            break;
        }
        let pair = pair.min(prev_pair);
        sum_pairs += pair;
        prev_pair = pair;
        t += 2;
    }
    let tau = (-1.0 + 2.0 * sum_pairs).max(1.0 / total.log10());
    total / tau
}

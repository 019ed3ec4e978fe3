//! Adaptive component-wise random-walk Metropolis.
//!
//! Each iteration is one sweep over the coordinates. During burn-in the
//! per-coordinate proposal scales follow a Robbins-Monro recursion on the log
//! scale, driven by the acceptance rate of each `adapt_window`-iteration
//! batch. Scales are frozen once burn-in ends and only post-burn-in sweeps are
//! kept.

mod convergence;
mod trace;

pub use convergence::{convergence, effective_sample_size, split_rhat, ConvergenceReport};
pub use trace::{read_trace, write_trace};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// A log density the sampler can update one coordinate at a time.
///
/// `State` caches whatever makes a single-coordinate move cheap. `propose`
/// may stash intermediate work in the state for a following `accept`.
pub trait Target: Sync {
    type State: Clone + Send;

    fn dim(&self) -> usize;

    /// Starting proposal scale per coordinate.
    fn initial_scales(&self) -> Vec<f64> {
        vec![1.0; self.dim()]
    }

    fn init(&self, theta: &[f64]) -> Self::State;

    fn log_density(&self, state: &Self::State) -> f64;

    /// Log density after moving coordinate `j` by `delta`.
    fn propose(&self, state: &mut Self::State, theta: &[f64], j: usize, delta: f64) -> f64;

    /// Commit the move last passed to `propose`.
    fn accept(
        &self,
        state: &mut Self::State,
        theta: &mut [f64],
        j: usize,
        delta: f64,
        log_density: f64,
    );

    /// Re-derive accumulated quantities once per sweep.
    fn refresh(&self, _state: &mut Self::State, _theta: &[f64]) {}
}

/// Adapter turning a plain log-density closure into a [`Target`].
pub struct DensityFn<F> {
    dim: usize,
    f: F,
}

impl<F> DensityFn<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        DensityFn { dim, f }
    }
}

#[derive(Clone)]
pub struct DensityState {
    log_density: f64,
    scratch: Vec<f64>,
}

impl<F> Target for DensityFn<F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    type State = DensityState;

    fn dim(&self) -> usize {
        self.dim
    }

    fn init(&self, theta: &[f64]) -> DensityState {
        DensityState {
            log_density: (self.f)(theta),
            scratch: theta.to_vec(),
        }
    }

    fn log_density(&self, state: &DensityState) -> f64 {
        state.log_density
    }

    fn propose(&self, state: &mut DensityState, theta: &[f64], j: usize, delta: f64) -> f64 {
        state.scratch.copy_from_slice(theta);
        state.scratch[j] += delta;
        (self.f)(&state.scratch)
    }

    fn accept(
        &self,
        state: &mut DensityState,
        theta: &mut [f64],
        j: usize,
        delta: f64,
        log_density: f64,
    ) {
        theta[j] += delta;
        state.log_density = log_density;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    pub chains: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub adapt_window: usize,
    pub target_acceptance: f64,
    pub seed: u64,
    /// Distinguishes independent fits that share a seed (e.g. split replicates).
    pub stream: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            chains: 4,
            iterations: 20_000,
            burn_in: 5_000,
            adapt_window: 50,
            target_acceptance: 0.234,
            seed: 0,
            stream: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains == 0 {
            return Err(Error::Config("sampler needs at least one chain".into()));
        }
        if self.burn_in >= self.iterations {
            return Err(Error::Config(format!(
                "burn_in ({}) must be below iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.adapt_window == 0 {
            return Err(Error::Config("adapt_window must be positive".into()));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Config(format!(
                "target_acceptance must lie in (0, 1), got {}",
                self.target_acceptance
            )));
        }
        Ok(())
    }

    pub fn kept(&self) -> usize {
        self.iterations - self.burn_in
    }
}

/// Post-burn-in draws of one chain, stored row-major (`kept x dim`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorChain {
    pub chain_index: usize,
    pub seed: u64,
    pub stream: u64,
    pub dim: usize,
    pub burn_in: usize,
    pub draws: Vec<f64>,
    /// Fraction of accepted coordinate moves after burn-in.
    pub acceptance_rate: f64,
    pub proposal_scales: Vec<f64>,
}

impl PosteriorChain {
    /// Wrap externally produced draws (e.g. read back from a trace file).
    pub fn from_draws(chain_index: usize, dim: usize, draws: Vec<f64>) -> Result<Self> {
        if dim == 0 || !draws.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: draws.len(),
            });
        }
        Ok(PosteriorChain {
            chain_index,
            seed: 0,
            stream: 0,
            dim,
            burn_in: 0,
            draws,
            acceptance_rate: f64::NAN,
            proposal_scales: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.draws.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn draw(&self, k: usize) -> &[f64] {
        &self.draws[k * self.dim..(k + 1) * self.dim]
    }

    pub fn coordinate(&self, j: usize) -> Vec<f64> {
        self.draws
            .iter()
            .skip(j)
            .step_by(self.dim)
            .copied()
            .collect()
    }
}

// Initial Robbins-Monro gain on the log proposal scale.
const ADAPT_GAIN: f64 = 2.0;

/// Run one chain from `theta = 0`.
pub fn run_chain<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_index: usize,
) -> Result<PosteriorChain> {
    run_chain_from(target, config, chain_index, &vec![0.0; target.dim()])
}

pub fn run_chain_from<T: Target>(
    target: &T,
    config: &SamplerConfig,
    chain_index: usize,
    start: &[f64],
) -> Result<PosteriorChain> {
    config.validate()?;
    let dim = target.dim();
    if start.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: start.len(),
        });
    }
    let mut rng = stream_rng(
        config.seed,
        Stream::Chain {
            fit: config.stream,
            chain: chain_index as u64,
        },
    );
    let mut theta = start.to_vec();
    let mut state = target.init(&theta);
    if !target.log_density(&state).is_finite() {
        return Err(Error::NonFiniteInit);
    }

    let mut log_scales: Vec<f64> = target.initial_scales().iter().map(|s| s.ln()).collect();
    let mut window_accepts = vec![0usize; dim];
    let mut windows_done = 0usize;
    let mut kept_accepts = 0usize;
    let mut draws = Vec::with_capacity(config.kept() * dim);

    for iter in 0..config.iterations {
        let adapting = iter < config.burn_in;
        for j in 0..dim {
            let z: f64 = rng.sample(StandardNormal);
            let delta = z * log_scales[j].exp();
            let current = target.log_density(&state);
            let proposed = target.propose(&mut state, &theta, j, delta);
            let log_u = rng.random::<f64>().ln();
            if proposed.is_finite() && log_u < proposed - current {
                target.accept(&mut state, &mut theta, j, delta, proposed);
                if adapting {
                    window_accepts[j] += 1;
                } else {
                    kept_accepts += 1;
                }
            }
        }
        target.refresh(&mut state, &theta);

        if adapting && (iter + 1) % config.adapt_window == 0 {
            windows_done += 1;
            let gain = ADAPT_GAIN / (windows_done as f64).sqrt();
            for j in 0..dim {
                let rate = window_accepts[j] as f64 / config.adapt_window as f64;
                log_scales[j] += gain * (rate - config.target_acceptance);
                window_accepts[j] = 0;
            }
        }
        if !adapting {
            draws.extend_from_slice(&theta);
        }
    }

    Ok(PosteriorChain {
        chain_index,
        seed: config.seed,
        stream: config.stream,
        dim,
        burn_in: config.burn_in,
        draws,
        acceptance_rate: kept_accepts as f64 / (config.kept() * dim) as f64,
        proposal_scales: log_scales.iter().map(|l| l.exp()).collect(),
    })
}

/// Run `config.chains` independent chains in parallel on the current rayon
/// pool. Output order follows chain index.
pub fn run_chains<T: Target>(target: &T, config: &SamplerConfig) -> Result<Vec<PosteriorChain>> {
    config.validate()?;
    (0..config.chains)
        .into_par_iter()
        .map(|c| run_chain(target, config, c))
        .collect()
}

/// Pick `count` draws spread evenly over the pooled chains.
///
/// Each chain contributes `count / chains` draws (the first `count % chains`
/// chains one more), taken at indices `floor(k * len / share)` within it.
pub fn thin_draws(chains: &[PosteriorChain], count: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::Invalid("thinning count must be positive".into()));
    }
    if chains.is_empty() {
        return Err(Error::Invalid("no chains to thin".into()));
    }
    let total: usize = chains.iter().map(PosteriorChain::len).sum();
    if count > total {
        return Err(Error::TooFewDraws {
            needed: count,
            got: total,
        });
    }
    let c = chains.len();
    let mut out = Vec::with_capacity(count);
    for (idx, chain) in chains.iter().enumerate() {
        let share = count / c + usize::from(idx < count % c);
        let len = chain.len();
        if share > len {
            return Err(Error::TooFewDraws {
                needed: share,
                got: len,
            });
        }
        for k in 0..share {
            out.push(chain.draw(k * len / share).to_vec());
        }
    }
    Ok(out)
}

/// All kept draws of all chains, in chain order.
pub fn pooled_draws(chains: &[PosteriorChain]) -> Vec<Vec<f64>> {
    chains
        .iter()
        .flat_map(|c| (0..c.len()).map(move |k| c.draw(k).to_vec()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn std_normal() -> DensityFn<impl Fn(&[f64]) -> f64 + Sync> {
        DensityFn::new(1, |x: &[f64]| -0.5 * x[0] * x[0])
    }

    fn cfg(iterations: usize, burn_in: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            chains: 1,
            iterations,
            burn_in,
            seed,
            ..SamplerConfig::default()
        }
    }

    #[test]
    fn standard_normal_moments() {
        let chain = run_chain(&std_normal(), &cfg(55_000, 5_000, 11), 0).unwrap();
        let xs = chain.coordinate(0);
        assert_eq!(xs.len(), 50_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!(var > 0.9 && var < 1.1, "var {var}");
        assert!((chain.acceptance_rate - 0.234).abs() < 0.1);
    }

    #[test]
    fn correlated_normal_recovers_correlation() {
        let rho: f64 = 0.8;
        let det = 1.0 - rho * rho;
        let target = DensityFn::new(2, move |x: &[f64]| {
            -0.5 * (x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / det
        });
        let chain = run_chain(&target, &cfg(105_000, 5_000, 3), 0).unwrap();
        let a = chain.coordinate(0);
        let b = chain.coordinate(1);
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x - ma) * (y - mb))
            .sum::<f64>()
            / n;
        let va = a.iter().map(|x| (x - ma).powi(2)).sum::<f64>() / n;
        let vb = b.iter().map(|y| (y - mb).powi(2)).sum::<f64>() / n;
        let r = cov / (va * vb).sqrt();
        assert!((r - rho).abs() < 0.05, "corr {r}");
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let a = run_chain(&std_normal(), &cfg(2_000, 500, 5), 0).unwrap();
        let b = run_chain(&std_normal(), &cfg(2_000, 500, 5), 0).unwrap();
        assert_eq!(a.draws, b.draws);
        let c = run_chain(&std_normal(), &cfg(2_000, 500, 6), 0).unwrap();
        assert_ne!(a.draws, c.draws);
    }

    #[test]
    fn non_finite_start_is_fatal() {
        let target = DensityFn::new(
            1,
            |x: &[f64]| if x[0] == 0.0 { f64::NEG_INFINITY } else { 0.0 },
        );
        assert!(matches!(
            run_chain(&target, &cfg(100, 10, 0), 0),
            Err(Error::NonFiniteInit)
        ));
    }

    #[test]
    fn config_validation() {
        let mut c = SamplerConfig::default();
        assert!(c.validate().is_ok());
        c.burn_in = c.iterations;
        assert!(c.validate().is_err());
        let c = SamplerConfig {
            target_acceptance: 1.0,
            ..SamplerConfig::default()
        };
        assert!(c.validate().is_err());
    }

    fn counting_chain(index: usize, len: usize) -> PosteriorChain {
        let draws = (0..len).map(|k| (index * len + k) as f64).collect();
        PosteriorChain::from_draws(index, 1, draws).unwrap()
    }

    #[test]
    fn thinning_single_chain() {
        let chains = [counting_chain(0, 10_000)];
        let picked: Vec<f64> = thin_draws(&chains, 100)
            .unwrap()
            .iter()
            .map(|d| d[0])
            .collect();
        let expected: Vec<f64> = (0..100).map(|k| (k * 100) as f64).collect();
        assert_eq!(picked, expected);

        let all = thin_draws(&chains[..], 10_000).unwrap();
        assert!(all.iter().enumerate().all(|(k, d)| d[0] == k as f64));
    }

    #[test]
    fn thinning_across_chains() {
        let chains: Vec<_> = (0..4).map(|c| counting_chain(c, 2_500)).collect();
        let picked = thin_draws(&chains, 100).unwrap();
        assert_eq!(picked.len(), 100);
        for c in 0..4 {
            let share: Vec<f64> = picked[c * 25..(c + 1) * 25].iter().map(|d| d[0]).collect();
            let expected: Vec<f64> = (0..25).map(|k| (c * 2_500 + k * 100) as f64).collect();
            assert_eq!(share, expected);
        }
    }

    #[test]
    fn thinning_errors() {
        let chains = [counting_chain(0, 10)];
        assert!(thin_draws(&chains, 0).is_err());
        assert!(thin_draws(&chains, 11).is_err());
    }
}

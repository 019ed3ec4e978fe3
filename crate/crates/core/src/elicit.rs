//! From posterior draws and a new case to an elicited prior.
//!
//! Each thinned draw `theta_k` gives `p_k = sigmoid(theta_k . x*)`, a sample
//! from the posterior predictive of the decision probability. A Beta fitted
//! to those samples by the method of moments is the elicited prior for the
//! event the decision guards against; a logit-normal fitted by maximum
//! likelihood is offered as an alternative, and the family with the smaller
//! Kolmogorov-Smirnov distance is selected.

use std::io::Write;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::model::{dot, inverse_link};
use crate::sampler::{thin_draws, PosteriorChain};

pub const DEFAULT_SAMPLES: usize = 100;

/// Samples at exactly 0 or 1 are moved this far inside before logit fits.
pub const SATURATION_NUDGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveSamples {
    pub case_id: String,
    pub samples: Vec<f64>,
    /// Total kept draws the samples were thinned from.
    pub pooled_draws: usize,
    pub chains: usize,
    pub seed: u64,
}

impl PredictiveSamples {
    pub fn new(case_id: impl Into<String>, samples: Vec<f64>) -> Self {
        let n = samples.len();
        PredictiveSamples {
            case_id: case_id.into(),
            samples,
            pooled_draws: n,
            chains: 0,
            seed: 0,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["case_id", "index", "p"])?;
        for (k, p) in self.samples.iter().enumerate() {
            w.write_record([self.case_id.as_str(), &k.to_string(), &p.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("<samples>", e))?;
        Ok(())
    }
}

/// `m` posterior-predictive probabilities for one encoded case.
pub fn predictive_samples(
    chains: &[PosteriorChain],
    case: &[f64],
    m: usize,
    case_id: &str,
) -> Result<PredictiveSamples> {
    let dim = chains.first().map(|c| c.dim).unwrap_or(0);
    if case.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: case.len(),
        });
    }
    let draws = thin_draws(chains, m)?;
    Ok(PredictiveSamples {
        case_id: case_id.to_string(),
        samples: draws.iter().map(|t| inverse_link(dot(t, case))).collect(),
        pooled_draws: chains.iter().map(PosteriorChain::len).sum(),
        chains: chains.len(),
        seed: chains[0].seed,
    })
}

/// Population mean and variance.
pub fn sample_moments(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Beta parameters with the given mean and variance.
pub fn beta_from_moments(mean: f64, variance: f64) -> Result<(f64, f64)> {
    let spread = mean * (1.0 - mean);
    // relative floor absorbs rounding noise in the variance of constant samples
    if !(variance > spread * 1e-14 && variance < spread) {
        return Err(Error::DegenerateBeta { mean, variance });
    }
    let common = spread / variance - 1.0;
    Ok((mean * common, (1.0 - mean) * common))
}

/// Method-of-moments Beta fit using the population variance of the samples.
pub fn fit_beta_moments(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    let (mean, variance) = sample_moments(samples);
    beta_from_moments(mean, variance)
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Closed-form logit-normal MLE: mean and population sd of the logits.
pub fn fit_logitnormal_mle(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::Invalid("need at least two samples".into()));
    }
    if let Some(&bad) = samples.iter().find(|&&p| !(p > 0.0 && p < 1.0)) {
        return Err(Error::SampleOutOfRange(bad));
    }
    let logits: Vec<f64> = samples.iter().map(|&p| logit(p)).collect();
    let (mu, var) = sample_moments(&logits);
    let sigma = var.sqrt();
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(Error::DegenerateLogitNormal { mu, sigma });
    }
    Ok((mu, sigma))
}

/// Two-sided KS distance between the samples' empirical cdf and a continuous `cdf`.
///
/// Tied samples form a single jump of the empirical cdf.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let f = cdf(x);
        d = d
            .max((j as f64 / m - f).abs())
            .max((f - i as f64 / m).abs());
        i = j;
    }
    d
}

/// Exact sup distance between the empirical cdfs of two sample sets.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (fa, fb) = (EmpiricalCdf::new(a), EmpiricalCdf::new(b));
    fa.sorted
        .iter()
        .chain(&fb.sorted)
        .map(|&x| (fa.eval(x) - fb.eval(x)).abs())
        .fold(0.0, f64::max)
}

/// Empirical cdf of a sample set, as a closure-friendly value.
#[derive(Debug, Clone)]
pub struct EmpiricalCdf {
    sorted: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(samples: &[f64]) -> Self {
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        EmpiricalCdf { sorted }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&s| s <= x) as f64 / self.sorted.len() as f64
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    /// The samples, sorted ascending.
    pub fn samples(&self) -> &[f64] {
        &self.sorted
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.sorted.iter().sum::<f64>() / self.sorted.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Beta,
    LogitNormal,
}

impl Family {
    pub fn all() -> Vec<Family> {
        vec![Family::Beta, Family::LogitNormal]
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "beta" => Ok(Family::Beta),
            "logitnormal" => Ok(Family::LogitNormal),
            _ => Err(Error::Config(format!("unknown family `{name}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Moments,
    Mle,
}

/// A fitted distribution on (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElicitedPrior {
    pub family: Family,
    /// `(alpha, beta)` for Beta, `(mu, sigma)` for logit-normal.
    pub params: (f64, f64),
    pub fit_method: FitMethod,
    pub ks_statistic: f64,
}

impl ElicitedPrior {
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        match self.family {
            Family::Beta => beta_dist(self.params).cdf(x),
            Family::LogitNormal => {
                standard_normal().cdf((logit(x) - self.params.0) / self.params.1)
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= 1.0 {
            return 0.0;
        }
        match self.family {
            Family::Beta => beta_dist(self.params).pdf(x),
            Family::LogitNormal => {
                let z = (logit(x) - self.params.0) / self.params.1;
                standard_normal().pdf(z) / (self.params.1 * x * (1.0 - x))
            }
        }
    }

    /// Analytic mean; logit-normal has no closed form and is integrated.
    pub fn mean(&self) -> f64 {
        match self.family {
            Family::Beta => self.params.0 / (self.params.0 + self.params.1),
            Family::LogitNormal => {
                // midpoint rule over the standard normal, +-8 sd
                let steps = 4000;
                let h = 16.0 / steps as f64;
                let normal = standard_normal();
                (0..steps)
                    .map(|k| {
                        let z = -8.0 + (k as f64 + 0.5) * h;
                        normal.pdf(z) * inverse_link(self.params.0 + self.params.1 * z) * h
                    })
                    .sum()
            }
        }
    }

    pub fn variance(&self) -> Option<f64> {
        match self.family {
            Family::Beta => {
                let (a, b) = self.params;
                Some(a * b / ((a + b).powi(2) * (a + b + 1.0)))
            }
            Family::LogitNormal => None,
        }
    }
}

fn beta_dist((a, b): (f64, f64)) -> Beta {
    Beta::new(a, b).expect("fitted beta parameters are positive")
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// All fits for one case, with the KS-selected family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub case_id: String,
    pub m: usize,
    pub seed: u64,
    pub mean: f64,
    pub variance: f64,
    pub fits: Vec<ElicitedPrior>,
    pub failures: Vec<(Family, String)>,
    pub selected: Family,
    /// Samples moved off 0 or 1 before logit-based fitting.
    pub nudged: usize,
}

impl FitReport {
    pub fn fit(&self, family: Family) -> Option<&ElicitedPrior> {
        self.fits.iter().find(|f| f.family == family)
    }

    pub fn selected_prior(&self) -> &ElicitedPrior {
        self.fit(self.selected).expect("selected family was fitted")
    }

    pub fn beta(&self) -> Option<&ElicitedPrior> {
        self.fit(Family::Beta)
    }

    /// JSON document `{case_id, family, params, ks, moments, m, seed, ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        let describe = |p: &ElicitedPrior| {
            let params = match p.family {
                Family::Beta => serde_json::json!({ "alpha": p.params.0, "beta": p.params.1 }),
                Family::LogitNormal => serde_json::json!({ "mu": p.params.0, "sigma": p.params.1 }),
            };
            serde_json::json!({
                "family": p.family,
                "params": params,
                "fit_method": p.fit_method,
                "ks": p.ks_statistic,
            })
        };
        let selected = self.selected_prior();
        let mut doc = describe(selected);
        let obj = doc.as_object_mut().expect("object");
        obj.insert("case_id".into(), self.case_id.clone().into());
        obj.insert(
            "moments".into(),
            serde_json::json!({ "mean": self.mean, "variance": self.variance }),
        );
        obj.insert("m".into(), self.m.into());
        obj.insert("seed".into(), self.seed.into());
        obj.insert("nudged".into(), self.nudged.into());
        obj.insert(
            "fits".into(),
            self.fits.iter().map(describe).collect::<Vec<_>>().into(),
        );
        obj.insert(
            "failures".into(),
            self.failures
                .iter()
                .map(|(f, msg)| serde_json::json!({ "family": f, "error": msg }))
                .collect::<Vec<_>>()
                .into(),
        );
        doc
    }
}

/// Fit the requested families to a sample set. Beta is always tried first.
pub fn fit_families(samples: &PredictiveSamples, families: &[Family]) -> Result<FitReport> {
    if families.is_empty() {
        return Err(Error::Config("no distribution families requested".into()));
    }
    let raw = &samples.samples;
    if raw.len() < 2 {
        return Err(Error::Invalid(
            "need at least two predictive samples".into(),
        ));
    }
    let (mean, variance) = sample_moments(raw);
    let nudged = raw.iter().filter(|&&p| p <= 0.0 || p >= 1.0).count();
    let clamped: Vec<f64> = raw
        .iter()
        .map(|p| p.clamp(SATURATION_NUDGE, 1.0 - SATURATION_NUDGE))
        .collect();

    let mut order = vec![Family::Beta];
    order.extend(families.iter().copied().filter(|f| *f != Family::Beta));
    let beta_requested = families.contains(&Family::Beta);

    let mut fits = Vec::new();
    let mut failures = Vec::new();
    let mut beta_error = None;
    for family in order {
        let attempt = match family {
            Family::Beta => fit_beta_moments(raw).map(|p| (p, FitMethod::Moments)),
            Family::LogitNormal => fit_logitnormal_mle(&clamped).map(|p| (p, FitMethod::Mle)),
        };
        match attempt {
            Ok((params, fit_method)) => {
                let mut prior = ElicitedPrior {
                    family,
                    params,
                    fit_method,
                    ks_statistic: 0.0,
                };
                prior.ks_statistic = ks_statistic(raw, |x| prior.cdf(x));
                fits.push(prior);
            }
            Err(e) => {
                failures.push((family, e.to_string()));
                if family == Family::Beta {
                    beta_error = Some(e);
                }
            }
        }
    }
    if fits.is_empty() {
        return Err(match (beta_error, families) {
            (Some(e), [Family::Beta]) => e,
            _ => Error::AllFitsDegenerate { mean, variance },
        });
    }
    // ties keep the earlier family, so Beta wins a tie
    let selected = fits
        .iter()
        .filter(|f| beta_requested || f.family != Family::Beta)
        .fold(None::<&ElicitedPrior>, |best, f| match best {
            Some(b) if b.ks_statistic <= f.ks_statistic => Some(b),
            _ => Some(f),
        })
        .map(|f| f.family)
        .unwrap_or(Family::Beta);
    Ok(FitReport {
        case_id: samples.case_id.clone(),
        m: raw.len(),
        seed: samples.seed,
        mean,
        variance,
        fits,
        failures,
        selected,
        nudged,
    })
}

/// Predictive sampling followed by family fitting.
pub fn elicit_prior(
    chains: &[PosteriorChain],
    case: &[f64],
    m: usize,
    families: &[Family],
    case_id: &str,
) -> Result<(PredictiveSamples, FitReport)> {
    let samples = predictive_samples(chains, case, m, case_id)?;
    let report = fit_families(&samples, families)?;
    Ok((samples, report))
}

/// Gaussian kernel density estimate with Silverman's bandwidth.
pub fn kernel_density(samples: &[f64], x: f64) -> f64 {
    let n = samples.len() as f64;
    let (_, var) = sample_moments(samples);
    let sd = var.sqrt();
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr =
        crate::diagnostics::quantile(&sorted, 0.75) - crate::diagnostics::quantile(&sorted, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let h = (0.9 * spread * n.powf(-0.2)).max(1e-6);
    let normal = standard_normal();
    samples.iter().map(|s| normal.pdf((x - s) / h)).sum::<f64>() / (n * h)
}

/// `(x, fitted pdf, kernel estimate)` on an interior grid of `points` values.
pub fn density_curve(report: &FitReport, samples: &[f64], points: usize) -> Vec<(f64, f64, f64)> {
    let prior = report.selected_prior();
    (1..=points)
        .map(|k| {
            let x = k as f64 / (points + 1) as f64;
            (x, prior.pdf(x), kernel_density(samples, x))
        })
        .collect()
}

pub fn write_density_csv<W: Write>(out: W, curve: &[(f64, f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "fitted_pdf", "kde"])?;
    for (x, f, k) in curve {
        w.write_record([x.to_string(), f.to_string(), k.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<density>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn beta_moments_of_uniform() {
        let (a, b) = beta_from_moments(0.5, 1.0 / 12.0).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn beta_moment_round_trip_reported_prior() {
        let (a, b) = (74.111, 266.202);
        let s = a + b;
        let mean = a / s;
        let var = a * b / (s * s * (s + 1.0));
        let (fa, fb) = beta_from_moments(mean, var).unwrap();
        assert!(rel(fa, a) < 1e-9 && rel(fb, b) < 1e-9);
    }

    #[test]
    fn constant_samples_are_degenerate() {
        let err = fit_beta_moments(&[0.3; 10]).unwrap_err();
        assert!(matches!(err, Error::DegenerateBeta { variance, .. } if variance < 1e-30));
        // variance at the Bernoulli bound
        assert!(fit_beta_moments(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn logitnormal_two_points() {
        let (mu, sigma) = fit_logitnormal_mle(&[0.5, 0.75]).unwrap();
        let l3 = 3f64.ln();
        assert!((mu - l3 / 2.0).abs() < 1e-14);
        assert!((sigma - l3 / 2.0).abs() < 1e-14);
        assert!(matches!(
            fit_logitnormal_mle(&[0.5, 0.5]),
            Err(Error::DegenerateLogitNormal { .. })
        ));
        assert!(matches!(
            fit_logitnormal_mle(&[0.5, 1.0]),
            Err(Error::SampleOutOfRange(_))
        ));
    }

    #[test]
    fn logitnormal_recovers_simulated_parameters() {
        let mut rng = stream_rng(17, Stream::Aux { tag: 10, index: 0 });
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                inverse_link(1.0 + 0.5 * z)
            })
            .collect();
        let (mu, sigma) = fit_logitnormal_mle(&samples).unwrap();
        assert!(
            rel(mu, 1.0) < 0.02 && rel(sigma, 0.5) < 0.02,
            "{mu} {sigma}"
        );
    }

    #[test]
    fn ks_at_quantile_midpoints() {
        // uniform cdf; samples at (i - 0.5)/m
        let m = 40;
        let samples: Vec<f64> = (1..=m).map(|i| (i as f64 - 0.5) / m as f64).collect();
        let d = ks_statistic(&samples, |x| x);
        assert!((d - 0.5 / m as f64).abs() < 1e-12);
        assert!((ks_statistic(&[0.5], |x| x) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ks_band_for_true_beta() {
        let dist = rand_distr::Beta::new(2.0, 5.0).unwrap();
        let reference = ElicitedPrior {
            family: Family::Beta,
            params: (2.0, 5.0),
            fit_method: FitMethod::Moments,
            ks_statistic: 0.0,
        };
        let band = 1.36 / 1000f64.sqrt();
        let passes = (0..100)
            .filter(|&t| {
                let mut rng = stream_rng(5, Stream::Aux { tag: 11, index: t });
                let xs: Vec<f64> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
                ks_statistic(&xs, |x| reference.cdf(x)) < band
            })
            .count();
        assert!(passes >= 90, "{passes}/100");
    }

    #[test]
    fn predictive_samples_closed_form() {
        let chain = PosteriorChain::from_draws(0, 1, vec![0.0, 3f64.ln()]).unwrap();
        let s = predictive_samples(&[chain], &[1.0], 2, "c").unwrap();
        assert_eq!(s.samples[0], 0.5);
        assert!((s.samples[1] - 0.75).abs() < 1e-15);

        let zero = PosteriorChain::from_draws(0, 2, vec![0.0; 20]).unwrap();
        let s = predictive_samples(std::slice::from_ref(&zero), &[1.0, -3.0], 10, "z").unwrap();
        assert!(s.samples.iter().all(|&p| p == 0.5));
        assert!(predictive_samples(std::slice::from_ref(&zero), &[1.0], 5, "z").is_err());

        let err = elicit_prior(
            std::slice::from_ref(&zero),
            &[1.0, 2.0],
            10,
            &[Family::Beta],
            "z",
        )
        .unwrap_err();
        assert!(matches!(err, Error::DegenerateBeta { .. }));
        let err = elicit_prior(&[zero], &[1.0, 2.0], 10, &Family::all(), "z").unwrap_err();
        assert!(matches!(err, Error::AllFitsDegenerate { .. }));
    }

    #[test]
    fn beta_is_selected_for_beta_samples() {
        let dist = rand_distr::Beta::new(2.0, 5.0).unwrap();
        let wins = (0..100)
            .filter(|&t| {
                let mut rng = stream_rng(8, Stream::Aux { tag: 12, index: t });
                let xs: Vec<f64> = (0..1000).map(|_| dist.sample(&mut rng)).collect();
                let report =
                    fit_families(&PredictiveSamples::new("b", xs), &Family::all()).unwrap();
                report.selected == Family::Beta
            })
            .count();
        assert!(wins >= 90, "{wins}/100");
    }

    #[test]
    fn saturated_samples_are_nudged() {
        let samples = PredictiveSamples::new("s", vec![1.0, 0.9, 0.8, 0.95]);
        let report = fit_families(&samples, &Family::all()).unwrap();
        assert_eq!(report.nudged, 1);
        assert!(report.fit(Family::LogitNormal).is_some());
    }

    #[test]
    fn logitnormal_mean_matches_simulation() {
        let prior = ElicitedPrior {
            family: Family::LogitNormal,
            params: (1.0, 0.5),
            fit_method: FitMethod::Mle,
            ks_statistic: 0.0,
        };
        let mut rng = stream_rng(2, Stream::Aux { tag: 13, index: 0 });
        let n = 200_000;
        let sim = (0..n)
            .map(|_| inverse_link(1.0 + 0.5 * rng.sample::<f64, _>(StandardNormal)))
            .sum::<f64>()
            / n as f64;
        assert!((prior.mean() - sim).abs() < 1e-3);
    }

    #[test]
    fn density_integrates_to_one() {
        let prior = ElicitedPrior {
            family: Family::LogitNormal,
            params: (-0.3, 0.7),
            fit_method: FitMethod::Mle,
            ks_statistic: 0.0,
        };
        let steps = 20_000;
        let h = 1.0 / steps as f64;
        let area: f64 = (0..steps)
            .map(|k| prior.pdf((k as f64 + 0.5) * h) * h)
            .sum();
        assert!((area - 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn beta_fit_reproduces_sample_moments(raw in prop::collection::vec(0.001f64..0.999, 2..200)) {
            let (mean, var) = sample_moments(&raw);
            prop_assume!(var > 1e-12 && var < mean * (1.0 - mean));
            let (a, b) = fit_beta_moments(&raw).unwrap();
            let s = a + b;
            prop_assert!((a / s - mean).abs() < 1e-9);
            prop_assert!((a * b / (s * s * (s + 1.0)) - var).abs() < 1e-9);
        }

        #[test]
        fn fits_are_permutation_invariant(
            raw in prop::collection::vec(0.01f64..0.99, 3..60),
            rotate in 0usize..60,
        ) {
            let mut shuffled = raw.clone();
            let k = rotate % shuffled.len();
            shuffled.rotate_left(k);
            shuffled.reverse();
            let a = fit_families(&PredictiveSamples::new("p", raw), &Family::all());
            let b = fit_families(&PredictiveSamples::new("p", shuffled), &Family::all());
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.selected, b.selected);
                    for (fa, fb) in a.fits.iter().zip(&b.fits) {
                        prop_assert!((fa.params.0 - fb.params.0).abs() <= 1e-9 * fa.params.0.abs().max(1.0));
                        prop_assert!((fa.params.1 - fb.params.1).abs() <= 1e-9 * fa.params.1.abs().max(1.0));
                        prop_assert!((fa.ks_statistic - fb.ks_statistic).abs() < 1e-12);
                    }
                }
                (Err(_), Err(_)) => {}
                _ => prop_assert!(false, "fits disagree on success"),
            }
        }

        #[test]
        fn ks_bounds(raw in prop::collection::vec(0.0f64..1.0, 1..100)) {
            let ecdf = EmpiricalCdf::new(&raw);
            let d_self = ks_statistic(&raw, |x| ecdf.eval(x));
            prop_assert!(d_self <= 1.0 / raw.len() as f64 + 1e-12);
            let d = ks_statistic(&raw, |x| x);
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}

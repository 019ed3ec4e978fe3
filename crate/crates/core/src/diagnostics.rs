//! Model-selection diagnostics over a labelled test set.
//!
//! Every case contributes a sample set of predicted decision probabilities.
//! Point statistics (mean, median, mode) label a case positive when they are
//! at least 0.5; the posterior-mass ("AUC") rule labels it positive when at
//! least half of the samples lie above 0.5. The credible-interval rule counts
//! any interval containing 0.5 as correct.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::elicit::PredictiveSamples;
use crate::error::{Error, Result};
use crate::ingest::Label;

pub const MODE_BINS: usize = 50;
pub const ENTROPY_HIST_BINS: usize = 20;
pub const DEFAULT_CALIBRATION_BINS: usize = 10;
const DECISION_THRESHOLD: f64 = 0.5;

/// Linear-interpolation quantile of sorted data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Binary entropy in bits, `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    (term(p) + term(1.0 - p)).clamp(0.0, 1.0)
}

/// Entropy of the mean probability of a sample set.
pub fn entropy(samples: &[f64]) -> f64 {
    binary_entropy(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// Shannon entropy of a 20-bin histogram on [0, 1], normalized to [0, 1].
pub fn histogram_entropy(samples: &[f64]) -> f64 {
    let counts = histogram(samples, ENTROPY_HIST_BINS);
    let n = samples.len() as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let q = c as f64 / n;
            -q * q.ln()
        })
        .sum();
    h / (ENTROPY_HIST_BINS as f64).ln()
}

/// Equal-width bin of `x` on [0, 1]; 1.0 falls in the last bin.
pub fn bin_index(x: f64, bins: usize) -> usize {
    ((x * bins as f64).floor().max(0.0) as usize).min(bins - 1)
}

pub fn histogram(values: &[f64], bins: usize) -> Vec<usize> {
    let mut counts = vec![0; bins];
    for &v in values {
        counts[bin_index(v, bins)] += 1;
    }
    counts
}

/// Which entropy estimates to attach to case summaries.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyMode {
    /// Binary entropy of the mean probability only.
    #[default]
    Mean,
    /// Also the normalized histogram entropy.
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub label: Label,
    pub mean: f64,
    pub median: f64,
    pub mode: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Fraction of samples strictly above 0.5.
    pub above_mass: f64,
    pub entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram_entropy: Option<f64>,
}

pub fn summarize_case(samples: &PredictiveSamples, label: Label, mode: EntropyMode) -> CaseSummary {
    let xs = &samples.samples;
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let counts = histogram(xs, MODE_BINS);
    // first maximal bin wins ties
    let (best, _) = counts.iter().enumerate().fold(
        (0, 0),
        |(bi, bc), (i, &c)| if c > bc { (i, c) } else { (bi, bc) },
    );
    CaseSummary {
        case_id: samples.case_id.clone(),
        label,
        mean: xs.iter().sum::<f64>() / n,
        median: quantile(&sorted, 0.5),
        mode: (best as f64 + 0.5) / MODE_BINS as f64,
        ci_low: quantile(&sorted, 0.025),
        ci_high: quantile(&sorted, 0.975),
        above_mass: xs.iter().filter(|&&p| p > DECISION_THRESHOLD).count() as f64 / n,
        entropy: entropy(xs),
        histogram_entropy: match mode {
            EntropyMode::Mean => None,
            EntropyMode::Both => Some(histogram_entropy(xs)),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    Mean,
    Median,
    Mode,
}

impl CaseSummary {
    pub fn statistic(&self, s: Statistic) -> f64 {
        match s {
            Statistic::Mean => self.mean,
            Statistic::Median => self.median,
            Statistic::Mode => self.mode,
        }
    }

    fn predicted_by_mean(&self) -> Label {
        label_for(self.mean)
    }

    fn truth(&self) -> bool {
        self.label == Label::Positive
    }
}

fn label_for(value: f64) -> Label {
    if value >= DECISION_THRESHOLD {
        Label::Positive
    } else {
        Label::Negative
    }
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * count as f64 / total as f64
    }
}

pub fn point_accuracy(summaries: &[CaseSummary], statistic: Statistic) -> f64 {
    let correct = summaries
        .iter()
        .filter(|s| label_for(s.statistic(statistic)) == s.label)
        .count();
    percent(correct, summaries.len())
}

pub fn auc_accuracy(summaries: &[CaseSummary]) -> f64 {
    let correct = summaries
        .iter()
        .filter(|s| label_for(s.above_mass) == s.label)
        .count();
    percent(correct, summaries.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiAccuracy {
    pub accuracy: f64,
    /// Share of correct cases whose interval contains 0.5.
    pub contains_half: f64,
    /// Share of correct cases whose interval lies on one side of 0.5.
    pub one_sided: f64,
}

pub fn ci_accuracy(summaries: &[CaseSummary]) -> CiAccuracy {
    let mut straddle = 0;
    let mut one_sided = 0;
    for s in summaries {
        if s.ci_low <= DECISION_THRESHOLD && s.ci_high >= DECISION_THRESHOLD {
            straddle += 1;
        } else if (s.ci_low > DECISION_THRESHOLD && s.truth())
            || (s.ci_high < DECISION_THRESHOLD && !s.truth())
        {
            one_sided += 1;
        }
    }
    let correct = straddle + one_sided;
    CiAccuracy {
        accuracy: percent(correct, summaries.len()),
        contains_half: percent(straddle, correct),
        one_sided: percent(one_sided, correct),
    }
}

/// Cell counts of the mean-labelled confusion matrix.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    tp: usize,
    fp: usize,
    tn: usize,
    fn_: usize,
}

fn counts(summaries: &[CaseSummary]) -> Counts {
    let mut c = Counts::default();
    for s in summaries {
        match (s.predicted_by_mean(), s.label) {
            (Label::Positive, Label::Positive) => c.tp += 1,
            (Label::Positive, Label::Negative) => c.fp += 1,
            (Label::Negative, Label::Negative) => c.tn += 1,
            (Label::Negative, Label::Positive) => c.fn_ += 1,
        }
    }
    c
}

/// Cells as percentages of the test set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub true_positive: f64,
    pub false_positive: f64,
    pub true_negative: f64,
    pub false_negative: f64,
}

pub fn confusion_matrix(summaries: &[CaseSummary]) -> ConfusionMatrix {
    let c = counts(summaries);
    let n = summaries.len();
    ConfusionMatrix {
        true_positive: percent(c.tp, n),
        false_positive: percent(c.fp, n),
        true_negative: percent(c.tn, n),
        false_negative: percent(c.fn_, n),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rates {
    pub sensitivity: f64,
    pub specificity: f64,
    pub precision: f64,
}

pub fn rates(summaries: &[CaseSummary]) -> Result<Rates> {
    let c = counts(summaries);
    if c.tp + c.fn_ == 0 {
        return Err(Error::MissingClass("positive"));
    }
    if c.tn + c.fp == 0 {
        return Err(Error::MissingClass("negative"));
    }
    let precision = if c.tp + c.fp == 0 {
        0.0
    } else {
        c.tp as f64 / (c.tp + c.fp) as f64
    };
    Ok(Rates {
        sensitivity: c.tp as f64 / (c.tp + c.fn_) as f64,
        specificity: c.tn as f64 / (c.tn + c.fp) as f64,
        precision,
    })
}

/// Harmonic mean of two rates; 0 when both are 0.
pub fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

/// Harmonic mean of specificity and sensitivity of the mean-labelled predictions.
pub fn f_score(summaries: &[CaseSummary]) -> Result<f64> {
    let r = rates(summaries)?;
    Ok(harmonic(r.specificity, r.sensitivity))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
    pub positives: usize,
    pub sum_predicted: f64,
    /// `None` for empty bins.
    pub mean_predicted: Option<f64>,
    pub observed_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub bins: Vec<CalibrationBin>,
}

impl CalibrationTable {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "bin_low",
            "bin_high",
            "count",
            "mean_predicted",
            "observed_fraction",
        ])?;
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for b in &self.bins {
            w.write_record([
                b.low.to_string(),
                b.high.to_string(),
                b.count.to_string(),
                opt(b.mean_predicted),
                opt(b.observed_fraction),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<calibration>", e))?;
        Ok(())
    }

    fn from_sums(sum_pred: &[f64], positives: &[usize], counts: &[usize]) -> Self {
        let k = counts.len();
        let bins = (0..k)
            .map(|b| CalibrationBin {
                low: b as f64 / k as f64,
                high: (b + 1) as f64 / k as f64,
                count: counts[b],
                positives: positives[b],
                sum_predicted: sum_pred[b],
                mean_predicted: (counts[b] > 0).then(|| sum_pred[b] / counts[b] as f64),
                observed_fraction: (counts[b] > 0).then(|| positives[b] as f64 / counts[b] as f64),
            })
            .collect();
        CalibrationTable { bins }
    }

    fn sums(&self) -> (Vec<f64>, Vec<usize>, Vec<usize>) {
        (
            self.bins.iter().map(|b| b.sum_predicted).collect(),
            self.bins.iter().map(|b| b.positives).collect(),
            self.bins.iter().map(|b| b.count).collect(),
        )
    }
}

/// Equal-width bins over the mean predicted probability.
pub fn calibration(summaries: &[CaseSummary], bins: usize) -> Result<CalibrationTable> {
    if bins < 2 {
        return Err(Error::Config(format!(
            "calibration needs at least 2 bins, got {bins}"
        )));
    }
    let mut sum_pred = vec![0.0; bins];
    let mut positives = vec![0; bins];
    let mut counts = vec![0; bins];
    for s in summaries {
        let b = bin_index(s.mean, bins);
        sum_pred[b] += s.mean;
        counts[b] += 1;
        if s.truth() {
            positives[b] += 1;
        }
    }
    Ok(CalibrationTable::from_sums(&sum_pred, &positives, &counts))
}

/// Entropy histograms over all, correctly and incorrectly (mean-labelled) predicted cases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyHistograms {
    pub all: Vec<usize>,
    pub correct: Vec<usize>,
    pub incorrect: Vec<usize>,
}

pub fn entropy_histograms(summaries: &[CaseSummary]) -> EntropyHistograms {
    let pick = |keep: &dyn Fn(&CaseSummary) -> bool| {
        let values: Vec<f64> = summaries
            .iter()
            .filter(|s| keep(s))
            .map(|s| s.entropy)
            .collect();
        histogram(&values, ENTROPY_HIST_BINS)
    };
    EntropyHistograms {
        all: pick(&|_| true),
        correct: pick(&|s| s.predicted_by_mean() == s.label),
        incorrect: pick(&|s| s.predicted_by_mean() != s.label),
    }
}

impl EntropyHistograms {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_low", "bin_high", "all", "correct", "incorrect"])?;
        let k = self.all.len();
        for b in 0..k {
            w.write_record([
                (b as f64 / k as f64).to_string(),
                ((b + 1) as f64 / k as f64).to_string(),
                self.all[b].to_string(),
                self.correct[b].to_string(),
                self.incorrect[b].to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<entropy>", e))?;
        Ok(())
    }
}

/// Every diagnostic for one fitted model on one test set, or an average of several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub cases: usize,
    pub replicates: usize,
    pub mean_accuracy: f64,
    pub mode_accuracy: f64,
    pub median_accuracy: f64,
    pub auc_accuracy: f64,
    pub ci_accuracy: f64,
    pub ci_contains_half: f64,
    pub ci_one_sided: f64,
    pub f_score: f64,
    pub sensitivity: f64,
    pub specificity: f64,
    /// Precision/recall F1, reported alongside for comparison.
    pub f1_precision_recall: f64,
    pub mean_entropy: f64,
    pub confusion: ConfusionMatrix,
    pub calibration: CalibrationTable,
    pub entropy_histograms: EntropyHistograms,
}

pub fn report(summaries: &[CaseSummary], calibration_bins: usize) -> Result<DiagnosticsReport> {
    if summaries.is_empty() {
        return Err(Error::TooFewRows { needed: 1, got: 0 });
    }
    let r = rates(summaries)?;
    let ci = ci_accuracy(summaries);
    Ok(DiagnosticsReport {
        cases: summaries.len(),
        replicates: 1,
        mean_accuracy: point_accuracy(summaries, Statistic::Mean),
        mode_accuracy: point_accuracy(summaries, Statistic::Mode),
        median_accuracy: point_accuracy(summaries, Statistic::Median),
        auc_accuracy: auc_accuracy(summaries),
        ci_accuracy: ci.accuracy,
        ci_contains_half: ci.contains_half,
        ci_one_sided: ci.one_sided,
        f_score: harmonic(r.specificity, r.sensitivity),
        sensitivity: r.sensitivity,
        specificity: r.specificity,
        f1_precision_recall: harmonic(r.precision, r.sensitivity),
        mean_entropy: summaries.iter().map(|s| s.entropy).sum::<f64>() / summaries.len() as f64,
        confusion: confusion_matrix(summaries),
        calibration: calibration(summaries, calibration_bins)?,
        entropy_histograms: entropy_histograms(summaries),
    })
}

/// Mean of every scalar metric; calibration bins and entropy histograms pooled.
pub fn five_split_average(reports: &[DiagnosticsReport]) -> Result<DiagnosticsReport> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Invalid("no reports to average".into()))?;
    let k = reports.len() as f64;
    let avg = |f: &dyn Fn(&DiagnosticsReport) -> f64| reports.iter().map(f).sum::<f64>() / k;

    let bins = first.calibration.bins.len();
    let mut sum_pred = vec![0.0; bins];
    let mut positives = vec![0; bins];
    let mut counts = vec![0; bins];
    let hist_len = first.entropy_histograms.all.len();
    let mut hist = EntropyHistograms {
        all: vec![0; hist_len],
        correct: vec![0; hist_len],
        incorrect: vec![0; hist_len],
    };
    for r in reports {
        if r.calibration.bins.len() != bins || r.entropy_histograms.all.len() != hist_len {
            return Err(Error::Invalid("reports use different binning".into()));
        }
        let (sp, pos, cnt) = r.calibration.sums();
        for b in 0..bins {
            sum_pred[b] += sp[b];
            positives[b] += pos[b];
            counts[b] += cnt[b];
        }
        for b in 0..hist_len {
            hist.all[b] += r.entropy_histograms.all[b];
            hist.correct[b] += r.entropy_histograms.correct[b];
            hist.incorrect[b] += r.entropy_histograms.incorrect[b];
        }
    }
    Ok(DiagnosticsReport {
        cases: reports.iter().map(|r| r.cases).sum(),
        replicates: reports.iter().map(|r| r.replicates).sum(),
        mean_accuracy: avg(&|r| r.mean_accuracy),
        mode_accuracy: avg(&|r| r.mode_accuracy),
        median_accuracy: avg(&|r| r.median_accuracy),
        auc_accuracy: avg(&|r| r.auc_accuracy),
        ci_accuracy: avg(&|r| r.ci_accuracy),
        ci_contains_half: avg(&|r| r.ci_contains_half),
        ci_one_sided: avg(&|r| r.ci_one_sided),
        f_score: avg(&|r| r.f_score),
        sensitivity: avg(&|r| r.sensitivity),
        specificity: avg(&|r| r.specificity),
        f1_precision_recall: avg(&|r| r.f1_precision_recall),
        mean_entropy: avg(&|r| r.mean_entropy),
        confusion: ConfusionMatrix {
            true_positive: avg(&|r| r.confusion.true_positive),
            false_positive: avg(&|r| r.confusion.false_positive),
            true_negative: avg(&|r| r.confusion.true_negative),
            false_negative: avg(&|r| r.confusion.false_negative),
        },
        calibration: CalibrationTable::from_sums(&sum_pred, &positives, &counts),
        entropy_histograms: hist,
    })
}

impl DiagnosticsReport {
    /// `(measure, formatted value)` rows in the usual accuracy-table order.
    pub fn table_rows(&self) -> Vec<(&'static str, String)> {
        let pct = |v: f64| format!("{v:.3}%");
        vec![
            ("Mean Accuracy", pct(self.mean_accuracy)),
            ("Mode Accuracy", pct(self.mode_accuracy)),
            ("Median Accuracy", pct(self.median_accuracy)),
            ("AUC Accuracy", pct(self.auc_accuracy)),
            ("95% CI Accuracy", pct(self.ci_accuracy)),
            ("95% CI correct containing 0.5", pct(self.ci_contains_half)),
            ("95% CI correct either side of 0.5", pct(self.ci_one_sided)),
            ("F-Score", format!("{:.5}", self.f_score)),
        ]
    }

    pub fn write_table_csv<W: Write>(&self, out: W) -> Result<()> {
        write_comparison_csv(out, &[("value".to_string(), self)])
    }
}

/// Side-by-side accuracy table, one column per named report.
pub fn write_comparison_csv<W: Write>(
    out: W,
    columns: &[(String, &DiagnosticsReport)],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["measure".to_string()];
    header.extend(columns.iter().map(|(name, _)| name.clone()));
    w.write_record(&header)?;
    let tables: Vec<_> = columns.iter().map(|(_, r)| r.table_rows()).collect();
    for (row, (label, _)) in tables[0].iter().enumerate() {
        let mut rec = vec![label.to_string()];
        rec.extend(tables.iter().map(|t| t[row].1.clone()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<table>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn case(id: &str, samples: Vec<f64>, label: Label) -> CaseSummary {
        summarize_case(
            &PredictiveSamples::new(id, samples),
            label,
            EntropyMode::Mean,
        )
    }

    #[test]
    fn constant_samples() {
        let s = case("c", vec![0.2; 100], Label::Negative);
        assert!((s.mean - 0.2).abs() < 1e-15);
        assert_eq!(s.median, 0.2);
        assert!((s.mode - 0.21).abs() < 1e-12); // midpoint of bin [0.2, 0.22)
        assert_eq!((s.ci_low, s.ci_high), (0.2, 0.2));
    }

    #[test]
    fn symmetric_two_point_samples() {
        let mut xs = vec![0.1; 50];
        xs.extend(vec![0.9; 50]);
        let s = case("s", xs, Label::Positive);
        assert!((s.mean - 0.5).abs() < 1e-12);
        assert_eq!(s.above_mass, 0.5);
        assert_eq!(auc_accuracy(&[s]), 100.0);
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5), 1.0);
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        let p: f64 = 0.89;
        let h = -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((binary_entropy(0.89) - h).abs() < 1e-15);
        assert!((h - 0.4999).abs() < 1e-4);
    }

    #[test]
    fn histogram_entropy_range() {
        assert_eq!(histogram_entropy(&[0.3; 10]), 0.0);
        let spread: Vec<f64> = (0..20).map(|b| (b as f64 + 0.5) / 20.0).collect();
        assert!((histogram_entropy(&spread) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_accuracy_examples() {
        let all_high: Vec<_> = (0..4)
            .map(|i| case(&i.to_string(), vec![0.9; 5], Label::Positive))
            .collect();
        assert_eq!(point_accuracy(&all_high, Statistic::Mean), 100.0);
        // exactly 0.5 counts as positive
        let tie = vec![case("t", vec![0.5; 5], Label::Positive)];
        assert_eq!(point_accuracy(&tie, Statistic::Mean), 100.0);
        assert_eq!(point_accuracy(&tie, Statistic::Median), 100.0);
    }

    #[test]
    fn auc_tie_is_positive() {
        let s = case("t", vec![0.4, 0.6], Label::Positive);
        assert_eq!(s.above_mass, 0.5);
        assert_eq!(auc_accuracy(&[s]), 100.0);
        let s = case("m", vec![0.4, 0.6, 0.7, 0.8, 0.3], Label::Positive);
        assert_eq!(auc_accuracy(&[s]), 100.0);
    }

    #[test]
    fn ci_rules() {
        let straddle = case(
            "a",
            (0..=40).map(|k| 0.4 + k as f64 * 0.005).collect(),
            Label::Negative,
        );
        assert!(straddle.ci_low < 0.5 && straddle.ci_high > 0.5);
        let above = case(
            "b",
            (0..=40).map(|k| 0.6 + k as f64 * 0.005).collect(),
            Label::Positive,
        );
        let wrong = case(
            "c",
            (0..=40).map(|k| 0.6 + k as f64 * 0.005).collect(),
            Label::Negative,
        );
        let ci = ci_accuracy(&[straddle, above, wrong]);
        assert!((ci.accuracy - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(ci.contains_half, 50.0);
        assert_eq!(ci.one_sided, 50.0);
    }

    #[test]
    fn f_score_examples() {
        assert!((harmonic(0.8, 0.9) - 2.0 * 0.72 / 1.7).abs() < 1e-15);
        assert!((harmonic(0.8, 0.9) - 0.8471).abs() < 1e-4);
        let perfect = vec![
            case("p", vec![0.9; 3], Label::Positive),
            case("n", vec![0.1; 3], Label::Negative),
        ];
        assert_eq!(f_score(&perfect).unwrap(), 1.0);
        let only_pos = vec![case("p", vec![0.9; 3], Label::Positive)];
        assert!(matches!(
            f_score(&only_pos),
            Err(Error::MissingClass("negative"))
        ));
        assert_eq!(harmonic(0.0, 0.0), 0.0);
    }

    #[test]
    fn confusion_examples() {
        let perfect = vec![
            case("p", vec![0.9; 3], Label::Positive),
            case("n", vec![0.1; 3], Label::Negative),
        ];
        let c = confusion_matrix(&perfect);
        assert_eq!(
            (
                c.true_positive,
                c.true_negative,
                c.false_positive,
                c.false_negative
            ),
            (50.0, 50.0, 0.0, 0.0)
        );

        let mut skewed: Vec<_> = (0..7)
            .map(|i| case(&i.to_string(), vec![0.8; 3], Label::Positive))
            .collect();
        skewed.extend((0..3).map(|i| case(&format!("n{i}"), vec![0.8; 3], Label::Negative)));
        let c = confusion_matrix(&skewed);
        assert_eq!((c.true_positive, c.false_positive), (70.0, 30.0));
    }

    #[test]
    fn calibration_examples() {
        let all = vec![case("a", vec![0.999; 3], Label::Positive); 4];
        let t = calibration(&all, 10).unwrap();
        let occupied: Vec<_> = t.bins.iter().filter(|b| b.count > 0).collect();
        assert_eq!(occupied.len(), 1);
        assert_eq!(occupied[0].observed_fraction, Some(1.0));
        assert_eq!(t.bins.iter().map(|b| b.count).sum::<usize>(), 4);
        assert!(calibration(&all, 1).is_err());
    }

    #[test]
    fn averaging() {
        let cases = vec![
            case("p", vec![0.9, 0.8, 0.7], Label::Positive),
            case("n", vec![0.1, 0.6, 0.2], Label::Negative),
            case("m", vec![0.4, 0.45, 0.3], Label::Positive),
        ];
        let r = report(&cases, 10).unwrap();
        let avg = five_split_average(&vec![r.clone(); 5]).unwrap();
        assert!((avg.mean_accuracy - r.mean_accuracy).abs() < 1e-12);
        assert!((avg.f_score - r.f_score).abs() < 1e-12);
        assert_eq!(
            avg.calibration.bins.iter().map(|b| b.count).sum::<usize>(),
            15
        );
        for (a, b) in avg.calibration.bins.iter().zip(&r.calibration.bins) {
            assert_eq!(a.observed_fraction.is_some(), b.observed_fraction.is_some());
            if let (Some(x), Some(y)) = (a.mean_predicted, b.mean_predicted) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let mut other = r.clone();
        other.mean_accuracy = 80.0;
        let mut base = r;
        base.mean_accuracy = 78.0;
        assert_eq!(
            five_split_average(&[base, other]).unwrap().mean_accuracy,
            79.0
        );
    }
}

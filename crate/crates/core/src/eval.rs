//! Evaluation: confusion tallies, macro-averaged metrics, stratified 70/30
//! splits, k-fold cross validation, Monte Carlo repetition and token-count
//! statistics.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::Result;
use crate::ink::InkSample;
use crate::pipeline::{PipelineConfig, SampleAnalysis};
use crate::recognizer::{analyze_all, derive_seed, Recognizer};

/// Fraction of each class used for training in a holdout split.
pub const TRAIN_FRACTION: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("class {label:?} has {count} sample(s); at least {required} needed")]
    ClassTooSmall {
        label: String,
        count: usize,
        required: usize,
    },
    #[error("k must be at least 2 and at most the dataset size, got {0}")]
    BadK(usize),
    #[error("iterations must be at least 1")]
    NoIterations,
    #[error("inconsistent tally for class {0}")]
    InconsistentTally(String),
}

/// One-vs-rest counts for a single class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ClassCounts {
    fn sum(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionTally {
    pub classes: Vec<String>,
    pub counts: Vec<ClassCounts>,
    pub total: u64,
}

impl ConfusionTally {
    /// Tallies `(gold, predicted)` pairs. A `None` prediction (no model
    /// could answer) is a miss for the gold class and a false positive for
    /// nobody.
    pub fn from_pairs(pairs: &[(String, Option<String>)]) -> Self {
        let classes: Vec<String> = pairs
            .iter()
            .flat_map(|(g, p)| std::iter::once(g).chain(p.as_ref()))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut matrix = ConfusionTally {
            counts: vec![ClassCounts::default(); classes.len()],
            classes,
            total: pairs.len() as u64,
        };
        let idx = |label: &str, classes: &[String]| classes.binary_search_by(|c| c.as_str().cmp(label)).ok();
        for (gold, pred) in pairs {
            let g = idx(gold, &matrix.classes).expect("collected");
            let p = pred.as_deref().and_then(|p| idx(p, &matrix.classes));
            if p == Some(g) {
                matrix.counts[g].tp += 1;
            } else {
                matrix.counts[g].fn_ += 1;
                if let Some(p) = p {
                    matrix.counts[p].fp += 1;
                }
            }
        }
        for c in &mut matrix.counts {
            c.tn = matrix.total - c.tp - c.fp - c.fn_;
        }
        matrix
    }

    /// Builds a tally from explicit per-class counts.
    pub fn from_counts(classes: Vec<String>, counts: Vec<ClassCounts>) -> Result<Self, EvalError> {
        let total = counts.first().map(ClassCounts::sum).unwrap_or(0);
        for (c, k) in classes.iter().zip(&counts) {
            if k.sum() != total {
                return Err(EvalError::InconsistentTally(c.clone()));
            }
        }
        Ok(Self {
            classes,
            counts,
            total,
        })
    }

    /// Fraction of samples whose prediction equals the gold label.
    pub fn hit_rate(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.counts.iter().map(|c| c.tp).sum::<u64>() as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Macro average of per-class `(TP + TN) / total`.
    pub accuracy: f64,
    /// Macro average of per-class `TP / (TP + FN)` over classes where it is defined.
    pub recall: f64,
    /// Macro average of per-class `TP / (TP + FP)` over classes where it is defined.
    pub precision: f64,
    /// Always `1 - recall`.
    pub fnr: f64,
    /// Fraction of samples classified correctly.
    pub hit_rate: f64,
    /// Classes with no gold samples, excluded from `recall`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined_recall: Vec<String>,
    /// Classes never predicted, excluded from `precision`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined_precision: Vec<String>,
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

pub fn metrics(tally: &ConfusionTally) -> Metrics {
    let mut acc = Vec::new();
    let mut rec = Vec::new();
    let mut prec = Vec::new();
    let mut undefined_recall = Vec::new();
    let mut undefined_precision = Vec::new();
    for (label, c) in tally.classes.iter().zip(&tally.counts) {
        if tally.total > 0 {
            acc.push((c.tp + c.tn) as f64 / tally.total as f64);
        }
        if c.tp + c.fn_ > 0 {
            rec.push(c.tp as f64 / (c.tp + c.fn_) as f64);
        } else {
            undefined_recall.push(label.clone());
        }
        if c.tp + c.fp > 0 {
            prec.push(c.tp as f64 / (c.tp + c.fp) as f64);
        } else {
            undefined_precision.push(label.clone());
        }
    }
    let recall = mean(&rec);
    Metrics {
        accuracy: mean(&acc),
        recall,
        precision: mean(&prec),
        fnr: 1.0 - recall,
        hit_rate: tally.hit_rate(),
        undefined_recall,
        undefined_precision,
    }
}

fn by_class<L: Ord + Clone>(labels: &[L]) -> BTreeMap<L, Vec<usize>> {
    let mut groups: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        groups.entry(l.clone()).or_default().push(i);
    }
    groups
}

fn require_min<L: Ord + Clone + ToString>(
    groups: &BTreeMap<L, Vec<usize>>,
    required: usize,
) -> Result<(), EvalError> {
    for (label, members) in groups {
        if members.len() < required {
            return Err(EvalError::ClassTooSmall {
                label: label.to_string(),
                count: members.len(),
                required,
            });
        }
    }
    Ok(())
}

/// Stratified holdout split: `round(0.7 n)` of every class goes to training.
/// Returns sorted `(train, test)` index lists.
pub fn split_70_30<L: Ord + Clone + ToString>(
    labels: &[L],
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let groups = by_class(labels);
    require_min(&groups, 2)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut members) in groups {
        members.shuffle(&mut rng);
        let n_train = (TRAIN_FRACTION * members.len() as f64).round() as usize;
        train.extend_from_slice(&members[..n_train]);
        test.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Stratified k-fold assignment. Each class is shuffled and dealt round
/// robin, continuing the deal across classes so fold sizes stay balanced.
pub fn stratified_folds<L: Ord + Clone + ToString>(
    labels: &[L],
    k: usize,
    seed: u64,
) -> Result<Vec<Vec<usize>>, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    if k < 2 || k > labels.len() {
        return Err(EvalError::BadK(k));
    }
    let groups = by_class(labels);
    require_min(&groups, k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (_, mut members) in groups {
        members.shuffle(&mut rng);
        for i in members {
            folds[next].push(i);
            next = (next + 1) % k;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Protocol {
    Split7030,
    KFold { k: usize },
    MonteCarlo { iterations: usize },
}

impl std::fmt::Display for Protocol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Protocol::Split7030 => write!(f, "70/30 split"),
            Protocol::KFold { k } => write!(f, "{k}-fold cross validation"),
            Protocol::MonteCarlo { iterations } => write!(f, "Monte Carlo, {iterations} iterations"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub seed: u64,
    pub samples: usize,
    /// Metrics over the tally aggregated across all folds / iterations.
    pub metrics: Metrics,
    /// Per fold (k-fold) or per iteration (Monte Carlo); one entry for a split.
    pub per_fold: Vec<Metrics>,
    pub tally: ConfusionTally,
}

impl EvalReport {
    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "protocol   {}", self.protocol);
        let _ = writeln!(out, "seed       {}", self.seed);
        let _ = writeln!(out, "samples    {}", self.samples);
        let _ = writeln!(
            out,
            "{:<8} {:>9} {:>9} {:>9} {:>9} {:>9}",
            "part", "accuracy", "recall", "precision", "fnr", "hit_rate"
        );
        let row = |out: &mut String, name: &str, m: &Metrics| {
            let _ = writeln!(
                out,
                "{:<8} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
                name, m.accuracy, m.recall, m.precision, m.fnr, m.hit_rate
            );
        };
        if self.per_fold.len() > 1 {
            for (i, m) in self.per_fold.iter().enumerate() {
                row(&mut out, &format!("#{}", i + 1), m);
            }
        }
        row(&mut out, "overall", &self.metrics);
        if !self.metrics.undefined_recall.is_empty() {
            let _ = writeln!(out, "recall undefined for: {}", self.metrics.undefined_recall.join(", "));
        }
        if !self.metrics.undefined_precision.is_empty() {
            let _ = writeln!(
                out,
                "precision undefined for: {}",
                self.metrics.undefined_precision.join(", ")
            );
        }
        out
    }
}

/// Trains on `train` and predicts every sample of `test`.
fn train_and_predict(
    analyses: &[SampleAnalysis],
    train: &[usize],
    test: &[usize],
    config: &PipelineConfig,
) -> Result<Vec<(String, Option<String>)>> {
    let train_set: Vec<SampleAnalysis> = train.iter().map(|&i| analyses[i].clone()).collect();
    let recognizer = Recognizer::train(&train_set, config)?;
    Ok(test
        .iter()
        .map(|&i| {
            let a = &analyses[i];
            let pred = recognizer.classify(a).ok().map(|p| p.label);
            (a.sample.label.clone(), pred)
        })
        .collect())
}

fn with_seed(config: &PipelineConfig, seed: u64) -> PipelineConfig {
    let mut c = *config;
    c.train.seed = seed;
    c
}

fn labels_of(analyses: &[SampleAnalysis]) -> Vec<String> {
    analyses.iter().map(|a| a.sample.label.clone()).collect()
}

/// Single stratified 70/30 split on pre-analyzed samples.
pub fn holdout_analyzed(analyses: &[SampleAnalysis], seed: u64, config: &PipelineConfig) -> Result<EvalReport> {
    let (train, test) = split_70_30(&labels_of(analyses), seed)?;
    let pairs = train_and_predict(analyses, &train, &test, &with_seed(config, derive_seed(seed, 1)))?;
    let tally = ConfusionTally::from_pairs(&pairs);
    let m = metrics(&tally);
    Ok(EvalReport {
        protocol: Protocol::Split7030,
        seed,
        samples: analyses.len(),
        per_fold: vec![m.clone()],
        metrics: m,
        tally,
    })
}

pub fn holdout(dataset: &[InkSample], seed: u64, config: &PipelineConfig) -> Result<EvalReport> {
    holdout_analyzed(&analyze_all(dataset, config)?, seed, config)
}

/// Stratified k-fold cross validation on pre-analyzed samples. Each fold
/// trains fresh models seeded from `(seed, fold)`; predictions from all
/// folds are tallied together.
pub fn kfold_analyzed(
    analyses: &[SampleAnalysis],
    k: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<EvalReport> {
    let folds = stratified_folds(&labels_of(analyses), k, seed)?;
    let per_fold_pairs = (0..k)
        .into_par_iter()
        .map(|f| {
            let test = &folds[f];
            let train: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            train_and_predict(
                analyses,
                &train,
                test,
                &with_seed(config, derive_seed(seed, f as u64 + 1)),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let per_fold = per_fold_pairs
        .iter()
        .map(|p| metrics(&ConfusionTally::from_pairs(p)))
        .collect();
    let all: Vec<_> = per_fold_pairs.into_iter().flatten().collect();
    let tally = ConfusionTally::from_pairs(&all);
    Ok(EvalReport {
        protocol: Protocol::KFold { k },
        seed,
        samples: analyses.len(),
        metrics: metrics(&tally),
        per_fold,
        tally,
    })
}

pub fn kfold(dataset: &[InkSample], k: usize, seed: u64, config: &PipelineConfig) -> Result<EvalReport> {
    kfold_analyzed(&analyze_all(dataset, config)?, k, seed, config)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub iterations: usize,
    pub seed: u64,
    /// Accuracy of every iteration, in order.
    pub accuracies: Vec<f64>,
    pub min: f64,
    pub avg: f64,
    pub max: f64,
    /// Hit rate (fraction correct) of every iteration.
    pub hit_rates: Vec<f64>,
    pub report: EvalReport,
}

impl MonteCarloSummary {
    pub fn to_text(&self) -> String {
        let (hmin, havg, hmax) = min_avg_max(&self.hit_rates);
        let mut out = self.report.to_text();
        let _ = writeln!(out, "{:<8} {:>9} {:>9} {:>9}", "", "min", "avg", "max");
        let _ = writeln!(out, "{:<8} {:>9.4} {:>9.4} {:>9.4}", "accuracy", self.min, self.avg, self.max);
        let _ = writeln!(out, "{:<8} {:>9.4} {:>9.4} {:>9.4}", "hit_rate", hmin, havg, hmax);
        out
    }
}

pub fn min_avg_max(values: &[f64]) -> (f64, f64, f64) {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // The mean can land an ulp outside [min, max] when all values are equal.
    let avg = mean(values).clamp(min, max);
    (min, avg, max)
}

/// Repeats split-train-test `iterations` times with seeds derived from
/// `seed`, on pre-analyzed samples.
pub fn monte_carlo_analyzed(
    analyses: &[SampleAnalysis],
    iterations: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<MonteCarloSummary> {
    if iterations == 0 {
        return Err(EvalError::NoIterations.into());
    }
    let runs = (0..iterations)
        .into_par_iter()
        .map(|i| holdout_analyzed(analyses, derive_seed(seed, i as u64), config))
        .collect::<Result<Vec<_>>>()?;
    let accuracies: Vec<f64> = runs.iter().map(|r| r.metrics.accuracy).collect();
    let hit_rates: Vec<f64> = runs.iter().map(|r| r.metrics.hit_rate).collect();
    let (min, avg, max) = min_avg_max(&accuracies);
    let tally = merge_tallies(runs.iter().map(|r| &r.tally));
    Ok(MonteCarloSummary {
        iterations,
        seed,
        accuracies,
        min,
        avg,
        max,
        hit_rates,
        report: EvalReport {
            protocol: Protocol::MonteCarlo { iterations },
            seed,
            samples: analyses.len(),
            metrics: metrics(&tally),
            per_fold: runs.into_iter().map(|r| r.metrics).collect(),
            tally,
        },
    })
}

pub fn monte_carlo(
    dataset: &[InkSample],
    iterations: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<MonteCarloSummary> {
    monte_carlo_analyzed(&analyze_all(dataset, config)?, iterations, seed, config)
}

/// Sums per-class counts over tallies that may cover different class sets.
pub fn merge_tallies<'a>(tallies: impl IntoIterator<Item = &'a ConfusionTally>) -> ConfusionTally {
    let mut counts: BTreeMap<String, ClassCounts> = BTreeMap::new();
    let mut total = 0;
    let tallies: Vec<_> = tallies.into_iter().collect();
    for t in &tallies {
        total += t.total;
        for (label, _) in t.classes.iter().zip(&t.counts) {
            counts.entry(label.clone()).or_default();
        }
    }
    for t in &tallies {
        for (label, c) in t.classes.iter().zip(&t.counts) {
            let e = counts.get_mut(label).expect("inserted above");
            e.tp += c.tp;
            e.fp += c.fp;
            e.fn_ += c.fn_;
        }
    }
    for c in counts.values_mut() {
        c.tn = total - c.tp - c.fp - c.fn_;
    }
    let (classes, counts) = counts.into_iter().unzip();
    ConfusionTally {
        classes,
        counts,
        total,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTokenStats {
    pub label: String,
    pub samples: usize,
    pub min_tokens: usize,
    /// Most frequent token count; the smallest one on ties.
    pub mode_tokens: usize,
    pub max_tokens: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenStats {
    pub per_class: Vec<ClassTokenStats>,
    /// Fraction of samples whose token count equals their class minimum.
    pub at_min: f64,
    pub at_mode: f64,
    pub at_max: f64,
}

/// Per-class min / mode / max token counts over analyzed samples.
pub fn token_stats(analyses: &[SampleAnalysis]) -> TokenStats {
    let mut counts: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for a in analyses {
        counts.entry(&a.sample.label).or_default().push(a.token_count());
    }
    let mut per_class = Vec::new();
    let (mut at_min, mut at_mode, mut at_max) = (0usize, 0usize, 0usize);
    for (label, tokens) in counts {
        let mut freq: BTreeMap<usize, usize> = BTreeMap::new();
        for &t in &tokens {
            *freq.entry(t).or_default() += 1;
        }
        let min_tokens = *freq.keys().next().expect("class has samples");
        let max_tokens = *freq.keys().next_back().expect("class has samples");
        // BTreeMap iterates ascending, so the first maximum is the smallest count.
        let mode_tokens = freq
            .iter()
            .fold((0, 0), |(best, n), (&t, &c)| if c > n { (t, c) } else { (best, n) })
            .0;
        at_min += freq[&min_tokens];
        at_mode += freq[&mode_tokens];
        at_max += freq[&max_tokens];
        per_class.push(ClassTokenStats {
            label: label.to_string(),
            samples: tokens.len(),
            min_tokens,
            mode_tokens,
            max_tokens,
        });
    }
    let n = analyses.len().max(1) as f64;
    TokenStats {
        per_class,
        at_min: at_min as f64 / n,
        at_mode: at_mode as f64 / n,
        at_max: at_max as f64 / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, Option<String>)> {
        v.iter().map(|(g, p)| (g.to_string(), Some(p.to_string()))).collect()
    }

    #[test]
    fn binary_counts() {
        let t = ConfusionTally::from_counts(
            vec!["a".into()],
            vec![ClassCounts { tp: 50, fp: 5, fn_: 5, tn: 40 }],
        )
        .unwrap();
        let m = metrics(&t);
        assert!((m.accuracy - 0.9).abs() < 1e-12);
        assert!((m.recall - 50.0 / 55.0).abs() < 1e-12);
        assert!((m.precision - 50.0 / 55.0).abs() < 1e-12);
        assert_eq!(m.fnr, 1.0 - m.recall);
    }

    #[test]
    fn inconsistent_counts_rejected() {
        let r = ConfusionTally::from_counts(
            vec!["a".into(), "b".into()],
            vec![ClassCounts { tp: 1, fp: 0, fn_: 0, tn: 1 }, ClassCounts { tp: 1, fp: 0, fn_: 0, tn: 0 }],
        );
        assert_eq!(r, Err(EvalError::InconsistentTally("b".into())));
    }

    #[test]
    fn perfect_predictions() {
        let m = metrics(&ConfusionTally::from_pairs(&pairs(&[("a", "a"), ("b", "b"), ("c", "c")])));
        assert_eq!((m.accuracy, m.recall, m.precision, m.fnr, m.hit_rate), (1.0, 1.0, 1.0, 0.0, 1.0));
    }

    #[test]
    fn three_class_by_hand() {
        // gold a: a a b ; gold b: b c ; gold c: c
        let t = ConfusionTally::from_pairs(&pairs(&[
            ("a", "a"),
            ("a", "a"),
            ("a", "b"),
            ("b", "b"),
            ("b", "c"),
            ("c", "c"),
        ]));
        let want = [
            ClassCounts { tp: 2, fp: 0, fn_: 1, tn: 3 },
            ClassCounts { tp: 1, fp: 1, fn_: 1, tn: 3 },
            ClassCounts { tp: 1, fp: 1, fn_: 0, tn: 4 },
        ];
        assert_eq!(t.counts, want);
        let m = metrics(&t);
        let acc = (5.0 / 6.0 + 4.0 / 6.0 + 5.0 / 6.0) / 3.0;
        let rec = (2.0 / 3.0 + 0.5 + 1.0) / 3.0;
        let prec = (1.0 + 0.5 + 0.5) / 3.0;
        assert!((m.accuracy - acc).abs() < 1e-12);
        assert!((m.recall - rec).abs() < 1e-12);
        assert!((m.precision - prec).abs() < 1e-12);
        assert!((m.hit_rate - 4.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn undefined_precision_is_excluded_and_flagged() {
        let t = ConfusionTally::from_pairs(&pairs(&[("a", "b"), ("b", "b")]));
        let m = metrics(&t);
        assert_eq!(m.undefined_precision, vec!["a".to_string()]);
        assert!((m.precision - 0.5).abs() < 1e-12);
        let missing = ConfusionTally::from_pairs(&[("a".to_string(), None)]);
        assert_eq!(missing.counts[0], ClassCounts { tp: 0, fp: 0, fn_: 1, tn: 0 });
    }

    fn labels(per_class: &[(&str, usize)]) -> Vec<String> {
        per_class
            .iter()
            .flat_map(|(l, n)| std::iter::repeat(l.to_string()).take(*n))
            .collect()
    }

    #[test]
    fn split_is_stratified_and_seeded() {
        let l = labels(&[("a", 10), ("b", 10), ("c", 10)]);
        let (train, test) = split_70_30(&l, 5).unwrap();
        assert_eq!((train.len(), test.len()), (21, 9));
        for class in ["a", "b", "c"] {
            assert_eq!(train.iter().filter(|&&i| l[i] == class).count(), 7);
        }
        assert_eq!(split_70_30(&l, 5).unwrap(), (train.clone(), test));
        assert_ne!(split_70_30(&l, 6).unwrap().0, train);
    }

    #[test]
    fn small_classes_are_errors() {
        let l = labels(&[("a", 10), ("b", 1)]);
        assert!(matches!(split_70_30(&l, 0), Err(EvalError::ClassTooSmall { count: 1, .. })));
        let l = labels(&[("a", 10), ("b", 3)]);
        assert!(matches!(stratified_folds(&l, 5, 0), Err(EvalError::ClassTooSmall { required: 5, .. })));
        assert_eq!(stratified_folds(&l, 1, 0), Err(EvalError::BadK(1)));
        assert_eq!(split_70_30::<String>(&[], 0), Err(EvalError::EmptyDataset));
    }

    #[test]
    fn folds_partition_and_balance() {
        let l = labels(&[("a", 13), ("b", 7), ("c", 11)]);
        let folds = stratified_folds(&l, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..l.len()).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1, "{sizes:?}");
        for class in ["a", "b", "c"] {
            let per: Vec<usize> = folds.iter().map(|f| f.iter().filter(|&&i| l[i] == class).count()).collect();
            assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1, "{class}: {per:?}");
        }
    }

    #[test]
    fn min_avg_max_of_one() {
        assert_eq!(min_avg_max(&[0.3]), (0.3, 0.3, 0.3));
        let (lo, avg, hi) = min_avg_max(&[0.1, 0.2, 0.6]);
        assert_eq!((lo, hi), (0.1, 0.6));
        assert!((avg - 0.3).abs() < 1e-12);
    }

    #[test]
    fn merged_tallies_add_up() {
        let a = ConfusionTally::from_pairs(&pairs(&[("a", "a"), ("b", "a")]));
        let b = ConfusionTally::from_pairs(&pairs(&[("c", "c")]));
        let m = merge_tallies([&a, &b]);
        assert_eq!(m.total, 3);
        assert_eq!(m.classes, vec!["a", "b", "c"]);
        assert_eq!(m.counts[0], ClassCounts { tp: 1, fp: 1, fn_: 0, tn: 1 });
        assert_eq!(m.counts[2], ClassCounts { tp: 1, fp: 0, fn_: 0, tn: 2 });
        assert!(m.counts.iter().all(|c| c.sum() == 3));
    }

    #[test]
    fn text_report_has_header_and_overall() {
        let t = ConfusionTally::from_pairs(&pairs(&[("a", "a"), ("b", "a")]));
        let r = EvalReport {
            protocol: Protocol::KFold { k: 5 },
            seed: 1,
            samples: 2,
            metrics: metrics(&t),
            per_fold: vec![metrics(&t)],
            tally: t,
        };
        let text = r.to_text();
        assert!(text.contains("5-fold cross validation"));
        assert!(text.contains("overall"));
        assert!(text.contains("precision undefined for: b"));
    }
}

//! Splits and metrics: mean class accuracy, the harmonic mean, and the
//! conventional / generalized evaluation protocols.
//!
//! Metrics are fractions in [0, 1] throughout; percentages belong to the
//! presentation layer.

use crate::align::{classify, AlignModel, LabeledBatch, ScoreKind};
use crate::anchors::AnchorSet;
use crate::error::{Error, Result};

/// Disjoint seen/unseen class partition, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitSpec {
    seen: Vec<usize>,
    unseen: Vec<usize>,
}

impl SplitSpec {
    pub fn new(mut seen: Vec<usize>, mut unseen: Vec<usize>) -> Result<SplitSpec> {
        seen.sort_unstable();
        seen.dedup();
        unseen.sort_unstable();
        unseen.dedup();
        if let Some(&class) = seen.iter().find(|c| unseen.binary_search(c).is_ok()) {
            return Err(Error::SplitOverlap { class });
        }
        if seen.is_empty() || unseen.is_empty() {
            return Err(Error::InvalidArgument(
                "split needs at least one seen and one unseen class".to_string(),
            ));
        }
        Ok(SplitSpec { seen, unseen })
    }

    pub fn seen(&self) -> &[usize] {
        &self.seen
    }

    pub fn unseen(&self) -> &[usize] {
        &self.unseen
    }

    pub fn is_seen(&self, class: usize) -> bool {
        self.seen.binary_search(&class).is_ok()
    }

    pub fn is_unseen(&self, class: usize) -> bool {
        self.unseen.binary_search(&class).is_ok()
    }

    /// Sorted union of both halves.
    pub fn all_classes(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.seen.iter().chain(&self.unseen).copied().collect();
        all.sort_unstable();
        all
    }

    pub fn max_class(&self) -> usize {
        *self
            .seen
            .iter()
            .chain(&self.unseen)
            .max()
            .expect("split is non-empty")
    }
}

/// Mean class accuracy: per-class top-1 accuracies averaged with equal class
/// weight, regardless of per-class sample counts.
pub fn mca(predictions: &[usize], labels: &[usize], class_set: &[usize]) -> Result<f64> {
    mca_opts(predictions, labels, class_set, false)
}

/// Like [`mca`], but `drop_empty` silently excludes classes with no samples
/// instead of treating them as an error.
pub fn mca_opts(
    predictions: &[usize],
    labels: &[usize],
    class_set: &[usize],
    drop_empty: bool,
) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} predictions but {} labels",
            predictions.len(),
            labels.len()
        )));
    }
    let per_class = per_class_accuracy(predictions, labels, class_set, drop_empty)?;
    if per_class.is_empty() {
        return Err(Error::InvalidArgument("no classes left to average".to_string()));
    }
    Ok(per_class.iter().map(|c| c.accuracy).sum::<f64>() / per_class.len() as f64)
}

/// Accuracy of one class in an evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassAccuracy {
    pub class: usize,
    pub count: usize,
    pub correct: usize,
    pub accuracy: f64,
}

fn per_class_accuracy(
    predictions: &[usize],
    labels: &[usize],
    class_set: &[usize],
    drop_empty: bool,
) -> Result<Vec<ClassAccuracy>> {
    let mut classes: Vec<usize> = class_set.to_vec();
    classes.sort_unstable();
    classes.dedup();
    for &label in labels {
        if classes.binary_search(&label).is_err() {
            return Err(Error::Protocol(format!(
                "label {label} is outside the evaluation class set"
            )));
        }
    }
    let mut stats: Vec<ClassAccuracy> = classes
        .iter()
        .map(|&class| ClassAccuracy {
            class,
            count: 0,
            correct: 0,
            accuracy: 0.0,
        })
        .collect();
    for (&pred, &label) in predictions.iter().zip(labels) {
        let idx = classes.binary_search(&label).expect("checked above");
        stats[idx].count += 1;
        if pred == label {
            stats[idx].correct += 1;
        }
    }
    if drop_empty {
        stats.retain(|c| c.count > 0);
    } else if let Some(empty) = stats.iter().find(|c| c.count == 0) {
        return Err(Error::MetricUndefined { class: empty.class });
    }
    for c in &mut stats {
        c.accuracy = c.correct as f64 / c.count as f64;
    }
    Ok(stats)
}

/// 2ab / (a + b), defined as 0 when both inputs are 0.
pub fn harmonic_mean(mca_seen: f64, mca_unseen: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&mca_seen) && (0.0..=1.0).contains(&mca_unseen));
    if mca_seen + mca_unseen == 0.0 {
        0.0
    } else {
        2.0 * mca_seen * mca_unseen / (mca_seen + mca_unseen)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Conventional,
    Generalized,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Conventional => "conventional",
            Protocol::Generalized => "generalized",
        }
    }
}

/// Per-class accuracies plus the protocol's summary metrics.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub protocol: Protocol,
    pub per_class: Vec<ClassAccuracy>,
    /// Class-balanced mean over every evaluated class.
    pub mca: f64,
    pub mca_seen: Option<f64>,
    pub mca_unseen: Option<f64>,
    pub harmonic: Option<f64>,
}

impl EvalReport {
    /// Flat key=value block, one entry per line.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("protocol={}\n", self.protocol.name()));
        out.push_str(&format!("classes={}\n", self.per_class.len()));
        let samples: usize = self.per_class.iter().map(|c| c.count).sum();
        out.push_str(&format!("samples={samples}\n"));
        out.push_str(&format!("mca={:.17e}\n", self.mca));
        if let Some(v) = self.mca_seen {
            out.push_str(&format!("mca_seen={v:.17e}\n"));
        }
        if let Some(v) = self.mca_unseen {
            out.push_str(&format!("mca_unseen={v:.17e}\n"));
        }
        if let Some(v) = self.harmonic {
            out.push_str(&format!("harmonic_mean={v:.17e}\n"));
        }
        out
    }

    /// Machine-readable CSV: one row per class, then summary rows.
    pub fn to_table(&self) -> String {
        let mut out = String::from("class_id,n,acc\n");
        for c in &self.per_class {
            out.push_str(&format!("{},{},{:.17e}\n", c.class, c.count, c.accuracy));
        }
        out.push_str(&format!("MCA,,{:.17e}\n", self.mca));
        if let Some(v) = self.mca_seen {
            out.push_str(&format!("MCA_s,,{v:.17e}\n"));
        }
        if let Some(v) = self.mca_unseen {
            out.push_str(&format!("MCA_u,,{v:.17e}\n"));
        }
        if let Some(v) = self.harmonic {
            out.push_str(&format!("H,,{v:.17e}\n"));
        }
        out
    }
}

/// Conventional protocol: search space is the unseen classes only.
pub fn evaluate_conventional(
    model: &AlignModel,
    anchors: &AnchorSet,
    test: &LabeledBatch,
    split: &SplitSpec,
    score: ScoreKind,
) -> Result<EvalReport> {
    for (i, &label) in test.labels().iter().enumerate() {
        if !split.is_unseen(label) {
            return Err(Error::Protocol(format!(
                "conventional evaluation expects unseen-class labels only, sample {i} has class {label}"
            )));
        }
    }
    let predictions = classify(model, test.features(), anchors, split.unseen(), score)?;
    let per_class = per_class_accuracy(&predictions, test.labels(), split.unseen(), false)?;
    let mca = per_class.iter().map(|c| c.accuracy).sum::<f64>() / per_class.len() as f64;
    Ok(EvalReport {
        protocol: Protocol::Conventional,
        per_class,
        mca,
        mca_seen: None,
        mca_unseen: Some(mca),
        harmonic: None,
    })
}

/// Generalized protocol: both batches are classified against the full class
/// set; reports MCA_s, MCA_u, and their harmonic mean.
pub fn evaluate_generalized(
    model: &AlignModel,
    anchors: &AnchorSet,
    seen_test: &LabeledBatch,
    unseen_test: &LabeledBatch,
    split: &SplitSpec,
    score: ScoreKind,
) -> Result<EvalReport> {
    for (i, &label) in seen_test.labels().iter().enumerate() {
        if !split.is_seen(label) {
            return Err(Error::Protocol(format!(
                "seen-test sample {i} has non-seen class {label}"
            )));
        }
    }
    for (i, &label) in unseen_test.labels().iter().enumerate() {
        if !split.is_unseen(label) {
            return Err(Error::Protocol(format!(
                "unseen-test sample {i} has non-unseen class {label}"
            )));
        }
    }

    let all_classes = split.all_classes();
    let preds_seen = classify(model, seen_test.features(), anchors, &all_classes, score)?;
    let preds_unseen = classify(model, unseen_test.features(), anchors, &all_classes, score)?;

    let seen_stats = per_class_accuracy(&preds_seen, seen_test.labels(), split.seen(), false)?;
    let unseen_stats = per_class_accuracy(&preds_unseen, unseen_test.labels(), split.unseen(), false)?;
    let mca_seen = seen_stats.iter().map(|c| c.accuracy).sum::<f64>() / seen_stats.len() as f64;
    let mca_unseen = unseen_stats.iter().map(|c| c.accuracy).sum::<f64>() / unseen_stats.len() as f64;

    let mut per_class = seen_stats;
    per_class.extend(unseen_stats);
    per_class.sort_by_key(|c| c.class);
    let mca = per_class.iter().map(|c| c.accuracy).sum::<f64>() / per_class.len() as f64;

    Ok(EvalReport {
        protocol: Protocol::Generalized,
        per_class,
        mca,
        mca_seen: Some(mca_seen),
        mca_unseen: Some(mca_unseen),
        harmonic: Some(harmonic_mean(mca_seen, mca_unseen)),
    })
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn from_pairs(predictions: &[usize], labels: &[usize], num_classes: usize) -> Result<Self> {
        if predictions.len() != labels.len() {
            return Err(Error::invalid(format!(
                "{} predictions but {} labels",
                predictions.len(),
                labels.len()
            )));
        }
        let mut cm = ConfusionMatrix::new(num_classes);
        for (&p, &t) in predictions.iter().zip(labels) {
            if p >= num_classes || t >= num_classes {
                return Err(Error::invalid(format!("class index out of range for {num_classes} classes")));
            }
            cm.counts[t][p] += 1;
        }
        Ok(cm)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn true_count(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    fn predicted_count(&self, c: usize) -> u64 {
        self.counts.iter().map(|row| row[c]).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Whether the class occurs among the labels or the predictions.
    pub present: bool,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub samples: u64,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    /// Mean squared error of normalized return predictions.
    pub regression_mse: f64,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
}

impl MetricsReport {
    /// Derives every classification metric from `confusion` alone.
    ///
    /// Macro averages run over the classes that occur among the labels or the
    /// predictions; a class absent from both has no defined precision or
    /// recall and would otherwise drag a perfect run below 1.
    pub fn from_confusion(confusion: ConfusionMatrix, regression_mse: f64) -> Result<Self> {
        let total = confusion.total();
        if total == 0 {
            return Err(Error::data("cannot compute metrics over zero samples"));
        }
        let k = confusion.num_classes();
        let correct: u64 = (0..k).map(|c| confusion.counts[c][c]).sum();
        let per_class: Vec<ClassMetrics> = (0..k)
            .map(|c| {
                let tp = confusion.counts[c][c];
                let (actual, predicted) = (confusion.true_count(c), confusion.predicted_count(c));
                let precision = ratio(tp, predicted);
                let recall = ratio(tp, actual);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                ClassMetrics {
                    precision,
                    recall,
                    f1,
                    present: actual + predicted > 0,
                }
            })
            .collect();
        let present: Vec<&ClassMetrics> = per_class.iter().filter(|m| m.present).collect();
        let avg = |f: fn(&ClassMetrics) -> f64| present.iter().map(|m| f(m)).sum::<f64>() / present.len() as f64;
        Ok(MetricsReport {
            samples: total,
            accuracy: ratio(correct, total),
            macro_precision: avg(|m| m.precision),
            macro_recall: avg(|m| m.recall),
            macro_f1: avg(|m| m.f1),
            regression_mse,
            per_class,
            confusion,
        })
    }

    pub fn from_predictions(predictions: &[usize], labels: &[usize], num_classes: usize, regression_mse: f64) -> Result<Self> {
        MetricsReport::from_confusion(ConfusionMatrix::from_pairs(predictions, labels, num_classes)?, regression_mse)
    }
}

/// Tab-separated table in the layout `Model  Ac  Rec  F1`, accuracy and recall
/// as percentages with two decimals and F1 as a two-decimal fraction.
pub fn render_table(rows: &[(&str, &MetricsReport)]) -> String {
    let mut out = String::from("Model\tAc\tRec\tF1\n");
    for (label, m) in rows {
        out.push_str(&format!(
            "{label}\t{:.2}%\t{:.2}%\t{:.2}\n",
            m.accuracy * 100.0,
            m.macro_recall * 100.0,
            m.macro_f1
        ));
    }
    out
}

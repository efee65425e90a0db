use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use crate::data::{NormStats, Sentiment, WindowSample};
use crate::error::{Error, Result};
use crate::model::Model;

/// The model's output for one window, keyed by the target date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyPrediction {
    pub date: NaiveDate,
    pub predicted_class: Sentiment,
    /// Class probabilities ordered (negative, neutral, positive).
    pub probs: [f64; 3],
    /// Normalized next-day return.
    pub predicted_return: f64,
}

pub fn predict(model: &Model, samples: &[WindowSample]) -> Result<Vec<DailyPrediction>> {
    if model.config.num_classes != 3 {
        return Err(Error::invalid("daily predictions need the three sentiment classes"));
    }
    samples
        .iter()
        .map(|s| {
            let out = model.forward(s)?;
            let p = out.probabilities();
            Ok(DailyPrediction {
                date: s.target_date,
                predicted_class: Sentiment::from_index(out.predicted_class())?,
                probs: [p.get(0, 0), p.get(1, 0), p.get(2, 0)],
                predicted_return: out.return_pred,
            })
        })
        .collect()
}

pub fn evaluate(model: &Model, samples: &[WindowSample]) -> Result<MetricsReport> {
    if samples.is_empty() {
        return Err(Error::data("cannot evaluate on an empty split"));
    }
    let mut preds = Vec::with_capacity(samples.len());
    let mut labels = Vec::with_capacity(samples.len());
    let mut sq = 0.0;
    for s in samples {
        let out = model.forward(s)?;
        preds.push(out.predicted_class());
        labels.push(s.target_class.index());
        sq += (out.return_pred - s.target_return).powi(2);
    }
    MetricsReport::from_predictions(&preds, &labels, model.config.num_classes, sq / samples.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceRow {
    pub date: NaiveDate,
    pub true_close: f64,
    pub pred_close: f64,
}

/// Converts normalized return predictions back to prices using each sample's
/// prior close.
pub fn price_rows(samples: &[WindowSample], predicted_returns: &[f64], stats: Option<&NormStats>) -> Result<Vec<PriceRow>> {
    let stats = stats.ok_or_else(|| Error::data("normalization statistics are required to recover prices"))?;
    stats.validate()?;
    if samples.len() != predicted_returns.len() {
        return Err(Error::invalid("one predicted return is needed per sample"));
    }
    Ok(samples
        .iter()
        .zip(predicted_returns)
        .map(|(s, &z)| PriceRow {
            date: s.target_date,
            true_close: s.target_close,
            pred_close: stats.predicted_close(s.prev_close, z),
        })
        .collect())
}

pub const PREDICTIONS_CSV_HEADER: &str = "date,true_close,pred_close";

pub fn price_rows_to_csv(rows: &[PriceRow]) -> String {
    let mut out = format!("{PREDICTIONS_CSV_HEADER}\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.date, r.true_close, r.pred_close));
    }
    out
}

/// Writes `date,true_close,pred_close` for every sample in `samples`.
pub fn export_predictions(model: &Model, samples: &[WindowSample], stats: Option<&NormStats>, path: &Path) -> Result<usize> {
    let returns = samples
        .iter()
        .map(|s| model.forward(s).map(|o| o.return_pred))
        .collect::<Result<Vec<_>>>()?;
    let rows = price_rows(samples, &returns, stats)?;
    std::fs::write(path, price_rows_to_csv(&rows)).map_err(|e| Error::io(path, e))?;
    Ok(rows.len())
}

/// Mean squared error of predicting each sample's prior close as its next close.
pub fn persistence_mse(samples: &[WindowSample]) -> f64 {
    samples.iter().map(|s| (s.target_close - s.prev_close).powi(2)).sum::<f64>() / samples.len() as f64
}

pub fn price_mse(rows: &[PriceRow]) -> f64 {
    rows.iter().map(|r| (r.pred_close - r.true_close).powi(2)).sum::<f64>() / rows.len() as f64
}

pub fn daily_predictions_to_jsonl(preds: &[DailyPrediction]) -> Result<String> {
    let mut out = String::new();
    for p in preds {
        out.push_str(&serde_json::to_string(p)?);
        out.push('\n');
    }
    Ok(out)
}

/// Parses daily prediction JSONL, checking each probability vector.
pub fn parse_daily_predictions(input: &str) -> Result<Vec<DailyPrediction>> {
    let mut out = Vec::new();
    for (n, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let at = |msg: String| Error::data(format!("predictions line {}: {msg}", n + 1));
        let p: DailyPrediction = serde_json::from_str(line).map_err(|e| at(e.to_string()))?;
        if p.probs.iter().any(|v| !(v.is_finite() && (0.0..=1.0).contains(v))) || (p.probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(at("probs must be in [0, 1] and sum to 1".into()));
        }
        if !p.predicted_return.is_finite() {
            return Err(at("predicted_return must be finite".into()));
        }
        out.push(p);
    }
    Ok(out)
}

//! Attaches documents to trading days and derives per-day market features.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{MarketBar, Sentiment};
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Per-day market feature layout. The first [`NORMALIZED_FEATURES`] entries
/// are z-scored with training statistics; `has_text` stays 0/1.
pub const MARKET_FEATURE_NAMES: [&str; 5] = ["log_return", "range", "body", "log_volume", "has_text"];
pub const MARKET_FEATURES: usize = MARKET_FEATURE_NAMES.len();
pub const NORMALIZED_FEATURES: usize = 4;

/// A document after cleaning, labeling and encoding.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDoc {
    pub timestamp: DateTime<Utc>,
    pub tokens: Vec<u32>,
    pub label: Sentiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignedDay {
    pub date: NaiveDate,
    /// Raw closing price, kept for turning predicted returns back into prices.
    pub close: f64,
    #[serde(with = "column_vec")]
    pub market: Matrix,
    pub docs: Vec<Vec<u32>>,
    pub label: Sentiment,
    pub has_text: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DroppedDoc {
    pub index: usize,
    pub timestamp: DateTime<Utc>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub days: Vec<AlignedDay>,
    pub dropped: Vec<DroppedDoc>,
}

/// Majority label; any tie for the top count is neutral, as is an empty day.
pub fn majority_label(labels: &[Sentiment]) -> Sentiment {
    let mut counts = [0usize; 3];
    for l in labels {
        counts[l.index()] += 1;
    }
    let top = *counts.iter().max().unwrap_or(&0);
    if top == 0 || counts.iter().filter(|&&c| c == top).count() > 1 {
        return Sentiment::Neutral;
    }
    Sentiment::ALL[counts.iter().position(|&c| c == top).expect("max exists")]
}

/// Raw (unnormalized) features for `bar`, given the previous close if any.
pub fn market_features(bar: &MarketBar, prev_close: Option<f64>, has_text: bool) -> [f64; MARKET_FEATURES] {
    let log_return = prev_close.map_or(0.0, |p| (bar.close / p).ln());
    [
        log_return,
        (bar.high - bar.low) / bar.close,
        (bar.close - bar.open) / bar.open,
        bar.volume.ln_1p(),
        if has_text { 1.0 } else { 0.0 },
    ]
}

/// Assigns each document to the first trading date on or after its UTC date,
/// so weekend and holiday text rolls forward. Documents dated after the last
/// bar are dropped and reported.
pub fn align_days(bars: &[MarketBar], docs: &[LabeledDoc]) -> Result<Alignment> {
    if bars.is_empty() {
        return Err(Error::data("no market bars to align against"));
    }
    for pair in bars.windows(2) {
        if pair[1].date <= pair[0].date {
            return Err(Error::data(format!(
                "bar dates must be strictly increasing: {} then {}",
                pair[0].date, pair[1].date
            )));
        }
    }
    let mut per_day: Vec<Vec<&LabeledDoc>> = vec![Vec::new(); bars.len()];
    let mut dropped = Vec::new();
    for (index, doc) in docs.iter().enumerate() {
        let date = doc.timestamp.date_naive();
        let slot = bars.partition_point(|b| b.date < date);
        if slot == bars.len() {
            let reason = format!("dated {date}, after the last bar {}", bars[bars.len() - 1].date);
            log::warn!("dropping document {index}: {reason}");
            dropped.push(DroppedDoc {
                index,
                timestamp: doc.timestamp,
                reason,
            });
        } else {
            per_day[slot].push(doc);
        }
    }
    let mut days = Vec::with_capacity(bars.len());
    let mut prev_close = None;
    for (bar, attached) in bars.iter().zip(per_day) {
        let has_text = !attached.is_empty();
        let labels: Vec<Sentiment> = attached.iter().map(|d| d.label).collect();
        let features = market_features(bar, prev_close, has_text);
        days.push(AlignedDay {
            date: bar.date,
            close: bar.close,
            market: Matrix::column(&features)?,
            docs: attached.into_iter().map(|d| d.tokens.clone()).collect(),
            label: majority_label(&labels),
            has_text,
        });
        prev_close = Some(bar.close);
    }
    Ok(Alignment { days, dropped })
}

pub(crate) mod column_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::numeric::Matrix;

    pub fn serialize<S: Serializer>(m: &Matrix, s: S) -> Result<S::Ok, S::Error> {
        m.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Matrix, D::Error> {
        let v = Vec::<f64>::deserialize(d)?;
        Matrix::column(&v).map_err(serde::de::Error::custom)
    }
}

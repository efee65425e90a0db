//! Sliding windows, chronological splits and train-only normalization.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::align::{AlignedDay, NORMALIZED_FEATURES};
use super::Sentiment;
use crate::error::{Error, Result};

pub const DEFAULT_WINDOW: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSample {
    pub inputs: Vec<AlignedDay>,
    /// Log return of the target day; z-scored once [`NormStats::apply`] runs.
    pub target_return: f64,
    pub target_class: Sentiment,
    pub target_date: NaiveDate,
    /// Close of the last input day.
    pub prev_close: f64,
    pub target_close: f64,
}

impl WindowSample {
    pub fn window(&self) -> usize {
        self.inputs.len()
    }

    pub fn last_input_date(&self) -> NaiveDate {
        self.inputs.last().expect("windows are non-empty").date
    }
}

/// One sample per start position: inputs `days[t..t+window]`, target `days[t+window]`.
pub fn make_windows(days: &[AlignedDay], window: usize) -> Result<Vec<WindowSample>> {
    if window == 0 {
        return Err(Error::invalid("window must be at least 1"));
    }
    if days.len() <= window {
        return Err(Error::data(format!(
            "{} days is too short for a window of {window}; need at least {}",
            days.len(),
            window + 1
        )));
    }
    Ok((0..days.len() - window)
        .map(|t| {
            let target = &days[t + window];
            let last = &days[t + window - 1];
            WindowSample {
                inputs: days[t..t + window].to_vec(),
                target_return: (target.close / last.close).ln(),
                target_class: target.label,
                target_date: target.date,
                prev_close: last.close,
                target_close: target.close,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = SplitRatios { train, val, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invalid(format!("split ratios must all be positive, got {parts:?}")));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("split ratios must sum to 1, got {parts:?}")));
        }
        Ok(())
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.7,
            val: 0.15,
            test: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Splits<T> {
    pub train: Vec<T>,
    pub val: Vec<T>,
    pub test: Vec<T>,
}

/// Contiguous split in input order.
///
/// train = floor(n * train), val = floor(n * val), test gets the rest. A 1e-9
/// nudge keeps products like 10 * 0.7 from flooring to 6. So 10 samples at
/// (0.7, 0.15, 0.15) give 7 / 1 / 2.
pub fn split_chronological<T>(items: Vec<T>, ratios: SplitRatios) -> Result<Splits<T>> {
    ratios.validate()?;
    let n = items.len();
    let n_train = ((n as f64) * ratios.train + 1e-9).floor() as usize;
    let n_val = ((n as f64) * ratios.val + 1e-9).floor() as usize;
    let n_train = n_train.min(n);
    let n_val = n_val.min(n - n_train);
    let mut rest = items;
    let test = rest.split_off(n_train + n_val);
    let val = rest.split_off(n_train);
    Ok(Splits { train: rest, val, test })
}

/// Latest input date across `samples`; compared against the next split's
/// earliest target date to prove there is no target leakage.
pub fn max_input_date(samples: &[WindowSample]) -> Option<NaiveDate> {
    samples.iter().map(WindowSample::last_input_date).max()
}

pub fn min_target_date(samples: &[WindowSample]) -> Option<NaiveDate> {
    samples.iter().map(|s| s.target_date).min()
}

/// Z-score statistics for the continuous market features and the target return.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub feature_mean: Vec<f64>,
    pub feature_std: Vec<f64>,
    pub return_mean: f64,
    pub return_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    // a constant column would divide by zero; leave it centred but unscaled
    (mean, if std > 1e-12 { std } else { 1.0 })
}

impl NormStats {
    /// Fits on raw training samples. Each distinct input day counts once even
    /// though overlapping windows repeat it.
    pub fn fit(train: &[WindowSample]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::data("cannot fit normalization on an empty training split"));
        }
        let mut days: BTreeMap<NaiveDate, &AlignedDay> = BTreeMap::new();
        for s in train {
            for d in &s.inputs {
                days.entry(d.date).or_insert(d);
            }
        }
        let mut feature_mean = Vec::with_capacity(NORMALIZED_FEATURES);
        let mut feature_std = Vec::with_capacity(NORMALIZED_FEATURES);
        for f in 0..NORMALIZED_FEATURES {
            let column: Vec<f64> = days.values().map(|d| d.market.get(f, 0)).collect();
            let (m, s) = mean_std(&column);
            feature_mean.push(m);
            feature_std.push(s);
        }
        let returns: Vec<f64> = train.iter().map(|s| s.target_return).collect();
        let (return_mean, return_std) = mean_std(&returns);
        Ok(NormStats {
            feature_mean,
            feature_std,
            return_mean,
            return_std,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let ok_len = self.feature_mean.len() == NORMALIZED_FEATURES && self.feature_std.len() == NORMALIZED_FEATURES;
        let finite = self
            .feature_mean
            .iter()
            .chain(&self.feature_std)
            .chain([&self.return_mean, &self.return_std])
            .all(|v| v.is_finite());
        let positive = self.feature_std.iter().chain([&self.return_std]).all(|s| *s > 0.0);
        if ok_len && finite && positive {
            Ok(())
        } else {
            Err(Error::data("normalization statistics are malformed"))
        }
    }

    pub fn normalize_day(&self, day: &AlignedDay) -> AlignedDay {
        let mut out = day.clone();
        for f in 0..NORMALIZED_FEATURES {
            let v = (day.market.get(f, 0) - self.feature_mean[f]) / self.feature_std[f];
            out.market.set(f, 0, v);
        }
        out
    }

    pub fn normalize_return(&self, r: f64) -> f64 {
        (r - self.return_mean) / self.return_std
    }

    pub fn denormalize_return(&self, z: f64) -> f64 {
        z * self.return_std + self.return_mean
    }

    /// Price implied by a normalized return prediction and the prior close.
    pub fn predicted_close(&self, prev_close: f64, z: f64) -> f64 {
        prev_close * self.denormalize_return(z).exp()
    }

    pub fn apply(&self, sample: &WindowSample) -> WindowSample {
        WindowSample {
            inputs: sample.inputs.iter().map(|d| self.normalize_day(d)).collect(),
            target_return: self.normalize_return(sample.target_return),
            ..sample.clone()
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let stats: NormStats = serde_json::from_str(text).map_err(|e| Error::data(format!("norm stats: {e}")))?;
        stats.validate()?;
        Ok(stats)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        NormStats::parse(&text)
    }
}

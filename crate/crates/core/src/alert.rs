//! Risk scores and sentiment-inflection alerts.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::data::Sentiment;
use crate::error::{Error, Result};
use crate::train::DailyPrediction;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlertRuleConfig {
    /// A `risk_threshold` alert fires when the risk score reaches this value.
    pub risk_threshold: f64,
}

impl AlertRuleConfig {
    pub fn new(risk_threshold: f64) -> Result<Self> {
        if !(risk_threshold > 0.0 && risk_threshold < 1.0) {
            return Err(Error::invalid(format!("risk threshold {risk_threshold} must be in (0, 1)")));
        }
        Ok(AlertRuleConfig { risk_threshold })
    }
}

impl Default for AlertRuleConfig {
    fn default() -> Self {
        AlertRuleConfig { risk_threshold: 0.7 }
    }
}

/// Probability of the negative class, raised by half of any predicted loss
/// (capped at 1 unit) and clipped to 1.
///
/// `probs` is ordered (negative, neutral, positive) and must sum to 1.
pub fn risk_score(probs: &[f64], predicted_return: f64) -> Result<f64> {
    if probs.len() != 3 || probs.iter().any(|p| !(p.is_finite() && (0.0..=1.0).contains(p))) {
        return Err(Error::invalid("risk score needs three probabilities in [0, 1]"));
    }
    if (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("class probabilities must sum to 1"));
    }
    if predicted_return.is_nan() {
        return Err(Error::invalid("predicted return is NaN"));
    }
    let p_neg = probs[Sentiment::Negative.index()];
    if predicted_return >= 0.0 {
        Ok(p_neg)
    } else {
        Ok((p_neg + 0.5 * (-predicted_return).clamp(0.0, 1.0)).min(1.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    BearishFlip,
    BullishFlip,
    RiskThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub date: NaiveDate,
    pub kind: AlertKind,
    /// Probability of the predicted class.
    pub confidence: f64,
    pub predicted_class: Sentiment,
    pub predicted_return: f64,
    pub risk_score: f64,
}

/// Flip alerts compare each day's predicted class with the previous day's;
/// risk alerts fire on any day whose score reaches the threshold. At most one
/// alert per day and kind, in date order, flips before risk on the same day.
pub fn detect_inflections(preds: &[DailyPrediction], rules: &AlertRuleConfig) -> Result<Vec<Alert>> {
    AlertRuleConfig::new(rules.risk_threshold)?;
    for pair in preds.windows(2) {
        if pair[1].date <= pair[0].date {
            return Err(Error::data(format!(
                "predictions must be in strictly increasing date order: {} then {}",
                pair[0].date, pair[1].date
            )));
        }
    }
    let mut alerts = Vec::new();
    for (i, p) in preds.iter().enumerate() {
        let risk = risk_score(&p.probs, p.predicted_return)?;
        let alert = |kind| Alert {
            date: p.date,
            kind,
            confidence: p.probs[p.predicted_class.index()],
            predicted_class: p.predicted_class,
            predicted_return: p.predicted_return,
            risk_score: risk,
        };
        if i > 0 {
            match (preds[i - 1].predicted_class, p.predicted_class) {
                (Sentiment::Positive, Sentiment::Negative) => alerts.push(alert(AlertKind::BearishFlip)),
                (Sentiment::Negative, Sentiment::Positive) => alerts.push(alert(AlertKind::BullishFlip)),
                _ => {}
            }
        }
        if risk >= rules.risk_threshold {
            alerts.push(alert(AlertKind::RiskThreshold));
        }
    }
    Ok(alerts)
}

pub fn alerts_to_jsonl(alerts: &[Alert]) -> Result<String> {
    let mut out = String::new();
    for a in alerts {
        out.push_str(&serde_json::to_string(a)?);
        out.push('\n');
    }
    Ok(out)
}

//! Flat JSON run configuration shared by every CLI subcommand.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::alert::AlertRuleConfig;
use crate::data::{PrepareConfig, SplitRatios};
use crate::error::{Error, Result};
use crate::model::{ArchKind, ModelConfig};
use crate::optim::OptimizerKind;
use crate::train::TrainConfig;

/// Every key is optional; missing keys take the defaults below. Unknown keys
/// are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub arch: ArchKind,
    pub seed: u64,
    // data preparation
    pub window: usize,
    pub max_doc_len: usize,
    pub min_freq: usize,
    pub max_vocab: usize,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,
    // model
    pub embed_dim: usize,
    pub num_filters: usize,
    pub kernel_width: usize,
    pub conv_stride: usize,
    pub gru_hidden: usize,
    pub attention: bool,
    pub attention_dim: usize,
    pub lambda: f64,
    // training
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub patience: usize,
    pub optimizer: OptimizerKind,
    pub weight_decay: f64,
    // alerts
    pub risk_threshold: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PrepareConfig::default();
        let m = ModelConfig::default();
        let t = TrainConfig::default();
        RunConfig {
            arch: ArchKind::CnnGru,
            seed: 42,
            window: p.window,
            max_doc_len: p.max_doc_len,
            min_freq: p.min_freq,
            max_vocab: p.max_vocab,
            train_ratio: p.ratios.train,
            val_ratio: p.ratios.val,
            test_ratio: p.ratios.test,
            embed_dim: m.embed_dim,
            num_filters: m.num_filters,
            kernel_width: m.kernel_width,
            conv_stride: m.conv_stride,
            gru_hidden: m.gru_hidden,
            attention: m.attention_enabled,
            attention_dim: m.attention_dim,
            lambda: m.lambda,
            lr: t.lr,
            batch_size: t.batch_size,
            epochs: t.epochs,
            patience: t.patience,
            optimizer: t.optimizer,
            weight_decay: t.weight_decay,
            risk_threshold: AlertRuleConfig::default().risk_threshold,
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::data(format!("config: {e}")))?;
        if !value.is_object() {
            return Err(Error::data("config must be a JSON object"));
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| Error::data(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text)
    }

    /// Checks every derived config so bad values surface before any work.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| Error::data(format!("config: {e}"));
        self.prepare_config().map_err(wrap)?;
        self.train_config().validate().map_err(wrap)?;
        AlertRuleConfig::new(self.risk_threshold).map_err(wrap)?;
        self.model_config(2).validate().map_err(wrap)
    }

    pub fn prepare_config(&self) -> Result<PrepareConfig> {
        Ok(PrepareConfig {
            window: self.window,
            max_doc_len: self.max_doc_len,
            min_freq: self.min_freq,
            max_vocab: self.max_vocab,
            ratios: SplitRatios::new(self.train_ratio, self.val_ratio, self.test_ratio)?,
        })
    }

    pub fn model_config(&self, vocab_size: usize) -> ModelConfig {
        ModelConfig {
            vocab_size,
            embed_dim: self.embed_dim,
            num_filters: self.num_filters,
            kernel_width: self.kernel_width,
            conv_stride: self.conv_stride,
            gru_hidden: self.gru_hidden,
            window: self.window,
            max_doc_len: self.max_doc_len,
            attention_enabled: self.attention,
            attention_dim: self.attention_dim,
            lambda: self.lambda,
            seed: self.seed,
            ..ModelConfig::default()
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            lr: self.lr,
            batch_size: self.batch_size,
            epochs: self.epochs,
            patience: self.patience,
            optimizer: self.optimizer,
            weight_decay: self.weight_decay,
            seed: self.seed,
        }
    }

    pub fn alert_rules(&self) -> AlertRuleConfig {
        AlertRuleConfig {
            risk_threshold: self.risk_threshold,
        }
    }
}

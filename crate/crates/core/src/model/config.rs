use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::MARKET_FEATURES;
use crate::error::{Error, Result};
use crate::layers::conv_output_len;

/// Which parts of the network are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ArchKind {
    /// Text CNN per day, GRU over the window.
    #[serde(rename = "cnn-gru")]
    CnnGru,
    /// Text CNN per day, window averaged without recurrence.
    #[serde(rename = "cnn")]
    CnnOnly,
    /// Mean token embedding per day, GRU over the window.
    #[serde(rename = "gru")]
    GruOnly,
}

impl ArchKind {
    pub const ALL: [ArchKind; 3] = [ArchKind::CnnOnly, ArchKind::GruOnly, ArchKind::CnnGru];

    pub fn has_conv(self) -> bool {
        matches!(self, ArchKind::CnnGru | ArchKind::CnnOnly)
    }

    pub fn has_gru(self) -> bool {
        matches!(self, ArchKind::CnnGru | ArchKind::GruOnly)
    }

    /// Short name used on the command line and in checkpoints.
    pub fn as_str(self) -> &'static str {
        match self {
            ArchKind::CnnGru => "cnn-gru",
            ArchKind::CnnOnly => "cnn",
            ArchKind::GruOnly => "gru",
        }
    }

    /// Row label in the comparison table.
    pub fn table_label(self) -> &'static str {
        match self {
            ArchKind::CnnGru => "CNN+GRU",
            ArchKind::CnnOnly => "CNN",
            ArchKind::GruOnly => "GRU",
        }
    }
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cnn-gru" => Ok(ArchKind::CnnGru),
            "cnn" => Ok(ArchKind::CnnOnly),
            "gru" => Ok(ArchKind::GruOnly),
            other => Err(Error::invalid(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub vocab_size: usize,
    pub embed_dim: usize,
    pub num_filters: usize,
    pub kernel_width: usize,
    pub conv_stride: usize,
    pub gru_hidden: usize,
    pub window: usize,
    pub max_doc_len: usize,
    pub market_dim: usize,
    pub attention_enabled: bool,
    pub attention_dim: usize,
    pub num_classes: usize,
    /// MSE weight in the joint loss.
    pub lambda: f64,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            vocab_size: 2,
            embed_dim: 64,
            num_filters: 64,
            kernel_width: 3,
            conv_stride: 3,
            gru_hidden: 32,
            window: 20,
            max_doc_len: 32,
            market_dim: MARKET_FEATURES,
            attention_enabled: true,
            attention_dim: 32,
            num_classes: 3,
            lambda: 0.5,
            seed: 42,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("vocab_size", self.vocab_size),
            ("embed_dim", self.embed_dim),
            ("num_filters", self.num_filters),
            ("kernel_width", self.kernel_width),
            ("conv_stride", self.conv_stride),
            ("gru_hidden", self.gru_hidden),
            ("window", self.window),
            ("max_doc_len", self.max_doc_len),
            ("market_dim", self.market_dim),
            ("attention_dim", self.attention_dim),
            ("num_classes", self.num_classes),
        ];
        if let Some((name, _)) = counts.iter().find(|(_, v)| *v == 0) {
            return Err(Error::invalid(format!("{name} must be positive")));
        }
        if self.vocab_size < 2 {
            return Err(Error::invalid("vocab_size must cover the pad and unknown ids"));
        }
        if conv_output_len(self.max_doc_len, self.kernel_width, self.conv_stride).is_none() {
            return Err(Error::invalid(format!(
                "max_doc_len {} is shorter than kernel_width {}",
                self.max_doc_len, self.kernel_width
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::invalid(format!("lambda {} is outside [0, 1]", self.lambda)));
        }
        Ok(())
    }

    /// Width of the per-day text vector for `arch`.
    pub fn text_dim(&self, arch: ArchKind) -> usize {
        if arch.has_conv() {
            self.num_filters
        } else {
            self.embed_dim
        }
    }

    /// Width of the per-day vector fed to the sequence stage.
    pub fn day_dim(&self, arch: ArchKind) -> usize {
        self.text_dim(arch) + self.market_dim
    }

    /// Width of the vector the heads read.
    pub fn head_input_dim(&self, arch: ArchKind) -> usize {
        if arch.has_gru() {
            self.gru_hidden
        } else {
            self.day_dim(arch)
        }
    }
}

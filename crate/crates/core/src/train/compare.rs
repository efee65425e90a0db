use serde::{Deserialize, Serialize};

use super::eval::evaluate;
use super::metrics::{render_table, MetricsReport};
use super::trainer::{train, EpochRecord, TrainConfig};
use crate::data::{Splits, WindowSample};
use crate::error::Result;
use crate::model::{build_model, ArchKind, ModelConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub train: MetricsReport,
    pub val: MetricsReport,
    pub test: Option<MetricsReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub arch: ArchKind,
    pub best_epoch: usize,
    pub metrics: SplitMetrics,
    #[serde(skip)]
    pub history: Vec<EpochRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    /// CNN, GRU, CNN+GRU order.
    pub entries: Vec<AblationEntry>,
}

impl AblationReport {
    pub fn get(&self, arch: ArchKind) -> Option<&AblationEntry> {
        self.entries.iter().find(|e| e.arch == arch)
    }

    /// One table per split, test first when present.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut section = |name: &str, pick: &dyn Fn(&SplitMetrics) -> Option<&MetricsReport>| {
            let rows: Vec<(&str, &MetricsReport)> = self
                .entries
                .iter()
                .filter_map(|e| pick(&e.metrics).map(|m| (e.arch.table_label(), m)))
                .collect();
            if rows.len() == self.entries.len() {
                out.push_str(&format!("[{name}]\n"));
                out.push_str(&render_table(&rows));
            }
        };
        section("test", &|m| m.test.as_ref());
        section("val", &|m| Some(&m.val));
        section("train", &|m| Some(&m.train));
        out
    }
}

/// Trains all three architectures from the same config, seeds and splits.
pub fn compare_ablations(splits: &Splits<WindowSample>, model_cfg: &ModelConfig, train_cfg: &TrainConfig) -> Result<AblationReport> {
    let mut entries = Vec::new();
    for arch in ArchKind::ALL {
        let model = build_model(model_cfg, arch)?;
        let outcome = train(&model, &splits.train, &splits.val, train_cfg)?;
        let m = &outcome.model;
        let metrics = SplitMetrics {
            train: evaluate(m, &splits.train)?,
            val: evaluate(m, &splits.val)?,
            test: if splits.test.is_empty() { None } else { Some(evaluate(m, &splits.test)?) },
        };
        log::info!("{arch}: best epoch {}, val accuracy {:.4}", outcome.best_epoch, metrics.val.accuracy);
        entries.push(AblationEntry {
            arch,
            best_epoch: outcome.best_epoch,
            metrics,
            history: outcome.history,
        });
    }
    Ok(AblationReport { entries })
}

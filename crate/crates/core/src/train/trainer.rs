use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::{LossParts, Model, ModelParams};
use crate::optim::{adam_update, sgd_update, AdamConfig, AdamState, OptimizerKind, SgdConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Epochs without validation improvement tolerated before stopping.
    pub patience: usize,
    pub optimizer: OptimizerKind,
    pub weight_decay: f64,
    /// Seeds the per-epoch shuffle.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-4,
            batch_size: 50,
            epochs: 100,
            patience: 10,
            optimizer: OptimizerKind::Adam,
            weight_decay: 0.0,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::invalid(format!("learning rate {} must be positive", self.lr)));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::invalid("weight_decay must be >= 0"));
        }
        Ok(())
    }
}

enum Optimizer {
    Sgd(SgdConfig),
    Adam(AdamConfig, Vec<AdamState>),
}

impl Optimizer {
    fn new(cfg: &TrainConfig, params: &ModelParams) -> Result<Self> {
        Ok(match cfg.optimizer {
            OptimizerKind::Sgd => Optimizer::Sgd(SgdConfig::new(cfg.lr, cfg.weight_decay)?),
            OptimizerKind::Adam => {
                let adam = AdamConfig {
                    weight_decay: cfg.weight_decay,
                    ..AdamConfig::with_lr(cfg.lr)?
                };
                let states = params.tensors().iter().map(|(_, m)| AdamState::for_param(m)).collect();
                Optimizer::Adam(adam, states)
            }
        })
    }

    fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) -> Result<()> {
        let grads = grads.tensors();
        match self {
            Optimizer::Sgd(cfg) => {
                for (p, (_, g)) in params.tensors_mut().into_iter().zip(grads) {
                    sgd_update(p, g, cfg)?;
                }
            }
            Optimizer::Adam(cfg, states) => {
                for ((p, (_, g)), st) in params.tensors_mut().into_iter().zip(grads).zip(states.iter_mut()) {
                    adam_update(p, g, st, cfg)?;
                }
            }
        }
        params.embedding.table.row_mut(0).fill(0.0);
        Ok(())
    }
}

/// Mean loss terms over a set of samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSummary {
    pub joint: f64,
    pub mse: f64,
    pub ce: f64,
}

impl LossSummary {
    fn mean(parts: &[LossParts]) -> Self {
        let n = parts.len() as f64;
        LossSummary {
            joint: parts.iter().map(|p| p.joint).sum::<f64>() / n,
            mse: parts.iter().map(|p| p.mse).sum::<f64>() / n,
            ce: parts.iter().map(|p| p.ce).sum::<f64>() / n,
        }
    }
}

pub fn mean_loss(model: &Model, samples: &[WindowSample]) -> Result<LossSummary> {
    if samples.is_empty() {
        return Err(Error::data("cannot compute loss over an empty split"));
    }
    let parts = samples
        .iter()
        .map(|s| {
            let out = model.forward(s)?;
            model.loss(&out, s.target_return, s.target_class)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LossSummary::mean(&parts))
}

/// One line of the history file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Mean over the epoch's mini-batches, measured before each update.
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_mse: f64,
    pub train_ce: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the lowest validation loss.
    pub model: Model,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_val_loss: f64,
}

/// Gradients are averaged over each batch. Work is split into a fixed number of
/// contiguous chunks that are summed in order, so results do not depend on
/// scheduling.
fn batch_gradient(model: &Model, batch: &[&WindowSample]) -> Result<(Vec<LossParts>, ModelParams)> {
    const CHUNKS: usize = 8;
    let chunk_len = batch.len().div_ceil(CHUNKS).max(1);
    let run = |chunk: &[&WindowSample]| -> Result<(Vec<LossParts>, ModelParams)> {
        let mut grads = model.params.zeros_like();
        let mut parts = Vec::with_capacity(chunk.len());
        for s in chunk {
            let out = model.forward(s)?;
            parts.push(model.backward(&out.cache, s.target_return, s.target_class, &mut grads)?);
        }
        Ok((parts, grads))
    };
    let results: Vec<Result<(Vec<LossParts>, ModelParams)>> = if batch.len() < 2 * CHUNKS {
        batch.chunks(chunk_len).map(run).collect()
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch.chunks(chunk_len).map(|c| scope.spawn(move || run(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numeric("gradient worker panicked".into()))))
                .collect()
        })
    };
    let mut total = model.params.zeros_like();
    let mut all_parts = Vec::with_capacity(batch.len());
    for r in results {
        let (parts, grads) = r?;
        total.axpy(1.0, &grads)?;
        all_parts.extend(parts);
    }
    total.scale(1.0 / batch.len() as f64);
    Ok((all_parts, total))
}

/// Mini-batch training with per-epoch seeded shuffling and early stopping on
/// validation joint loss.
pub fn train(model: &Model, train: &[WindowSample], val: &[WindowSample], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::data("training and validation splits must be non-empty"));
    }
    let mut current = model.clone();
    let mut optimizer = Optimizer::new(cfg, &current.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::new();
    let mut best = (current.clone(), f64::INFINITY, 0usize);
    let mut stale = 0;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_parts = Vec::with_capacity(train.len());
        for (b, idx) in order.chunks(cfg.batch_size).enumerate() {
            let batch: Vec<&WindowSample> = idx.iter().map(|&i| &train[i]).collect();
            let (parts, grads) = batch_gradient(&current, &batch)?;
            if parts.iter().any(|p| !p.joint.is_finite()) || !grads.is_finite() {
                return Err(Error::Numeric(format!(
                    "non-finite loss or gradient at epoch {epoch}, batch {}; try a lower learning rate",
                    b + 1
                )));
            }
            optimizer.step(&mut current.params, &grads)?;
            epoch_parts.extend(parts);
        }
        let summary = LossSummary::mean(&epoch_parts);
        let val_loss = mean_loss(&current, val)?.joint;
        if !val_loss.is_finite() {
            return Err(Error::Numeric(format!("validation loss is not finite at epoch {epoch}")));
        }
        log::info!("epoch {epoch}: train {:.6} val {val_loss:.6}", summary.joint);
        history.push(EpochRecord {
            epoch,
            train_loss: summary.joint,
            val_loss,
            train_mse: summary.mse,
            train_ce: summary.ce,
        });
        if val_loss < best.1 {
            best = (current.clone(), val_loss, epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale > cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        model: best.0,
        history,
        best_epoch: best.2,
        best_val_loss: best.1,
    })
}

pub fn history_to_jsonl(history: &[EpochRecord]) -> Result<String> {
    let mut out = String::new();
    for rec in history {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_history(path: &Path, history: &[EpochRecord]) -> Result<()> {
    std::fs::write(path, history_to_jsonl(history)?).map_err(|e| Error::io(path, e))
}

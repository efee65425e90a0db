use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::trainer::{train, TrainConfig};
use crate::data::WindowSample;
use crate::error::{Error, Result};
use crate::model::{build_model, ArchKind, ModelConfig};

/// Forward-chaining plan over `k` contiguous folds: round `i` trains on folds
/// `0..i` and validates on fold `i`, for `i` in `1..k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CvPlan {
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvRound {
    pub train: Range<usize>,
    pub val: Range<usize>,
}

impl CvPlan {
    /// Fold `j` covers `[j*n/k, (j+1)*n/k)`.
    pub fn rounds(&self, n: usize) -> Result<Vec<CvRound>> {
        if self.k < 2 {
            return Err(Error::invalid("cross-validation needs at least 2 folds"));
        }
        if n < self.k {
            return Err(Error::data(format!("{n} samples cannot fill {} folds", self.k)));
        }
        let bound = |j: usize| j * n / self.k;
        Ok((1..self.k)
            .map(|i| CvRound {
                train: 0..bound(i),
                val: bound(i)..bound(i + 1),
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCandidate {
    pub model: ModelConfig,
    pub arch: ArchKind,
    pub train: TrainConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub best_index: usize,
    pub mean_val_losses: Vec<f64>,
}

/// Picks the candidate with the lowest mean best-epoch validation loss; ties
/// go to the earlier candidate.
pub fn cross_validate(grid: &[CvCandidate], samples: &[WindowSample], plan: CvPlan) -> Result<CvResult> {
    if grid.is_empty() {
        return Err(Error::invalid("empty hyperparameter grid"));
    }
    let rounds = plan.rounds(samples.len())?;
    let mut means = Vec::with_capacity(grid.len());
    for cand in grid {
        let mut total = 0.0;
        for r in &rounds {
            let model = build_model(&cand.model, cand.arch)?;
            let outcome = train(&model, &samples[r.train.clone()], &samples[r.val.clone()], &cand.train)?;
            total += outcome.best_val_loss;
        }
        means.push(total / rounds.len() as f64);
    }
    let mut best_index = 0;
    for (i, m) in means.iter().enumerate() {
        if *m < means[best_index] {
            best_index = i;
        }
    }
    Ok(CvResult {
        best_index,
        mean_val_losses: means,
    })
}

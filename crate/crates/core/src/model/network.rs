use super::config::{ArchKind, ModelConfig};
use super::params::ModelParams;
use crate::data::{Sentiment, WindowSample};
use crate::error::{Error, Result};
use crate::layers::{global_max_pool, global_max_pool_backward, relu_backward, AttentionCache, Conv1dCache, GruStepCache};
use crate::loss::{cross_entropy, cross_entropy_grad, joint_loss, JointLossConfig};
use crate::numeric::{softmax, Matrix};

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub arch: ArchKind,
    pub params: ModelParams,
}

/// Builds a freshly initialized model; the same config and seed always give
/// bitwise-identical parameters.
pub fn build_model(cfg: &ModelConfig, arch: ArchKind) -> Result<Model> {
    Ok(Model {
        config: cfg.clone(),
        arch,
        params: ModelParams::init(cfg, arch)?,
    })
}

pub fn count_params(model: &Model) -> usize {
    model.params.count()
}

struct DocConvCache {
    ids: Vec<u32>,
    conv: Conv1dCache,
    relu_out: Matrix,
    memo: Vec<usize>,
}

enum DayTextCache {
    Empty,
    Conv(Vec<DocConvCache>),
    /// Token ids per doc for the mean-embedding path.
    Mean(Vec<Vec<u32>>),
}

enum SequenceCache {
    /// Day vectors were averaged; nothing to keep beyond the count.
    Mean,
    Gru {
        steps: Vec<GruStepCache>,
        attention: Option<AttentionCache>,
    },
}

/// Everything the backward pass needs from one forward pass.
pub struct ForwardCache {
    days: Vec<DayTextCache>,
    sequence: SequenceCache,
    context: Matrix,
    return_pred: f64,
    logits: Matrix,
}

pub struct ForwardOutput {
    /// Predicted normalized next-day return.
    pub return_pred: f64,
    pub logits: Matrix,
    /// Attention weights over the window, when attention is on.
    pub attention: Option<Vec<f64>>,
    pub cache: ForwardCache,
}

impl ForwardOutput {
    pub fn probabilities(&self) -> Matrix {
        softmax(&self.logits)
    }

    /// Arg-max class, ties to the lower index.
    pub fn predicted_class(&self) -> usize {
        argmax(self.logits.as_slice())
    }
}

pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Per-sample loss terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossParts {
    pub joint: f64,
    pub mse: f64,
    pub ce: f64,
}

impl Model {
    fn check_sample(&self, sample: &WindowSample) -> Result<()> {
        let cfg = &self.config;
        if sample.inputs.len() != cfg.window {
            return Err(Error::invalid(format!(
                "sample has {} days but the model window is {}",
                sample.inputs.len(),
                cfg.window
            )));
        }
        for day in &sample.inputs {
            if day.market.shape() != (cfg.market_dim, 1) {
                return Err(Error::shape("market features", day.market.shape(), (cfg.market_dim, 1)));
            }
        }
        Ok(())
    }

    fn conv_text(&self, docs: &[Vec<u32>]) -> Result<(Matrix, DayTextCache)> {
        let conv = self.params.conv.as_ref().expect("conv arch has conv params");
        let mut sum = Matrix::zeros(self.config.num_filters, 1);
        let mut caches = Vec::with_capacity(docs.len());
        for ids in docs {
            let embedded = self.params.embedding.lookup(ids, self.config.max_doc_len)?;
            let (featmap, conv_cache) = conv.forward(&embedded)?;
            let relu_out = featmap.map(|v| v.max(0.0));
            let (pooled, memo) = global_max_pool(&relu_out)?;
            sum.add_assign(&pooled)?;
            caches.push(DocConvCache {
                ids: ids.clone(),
                conv: conv_cache,
                relu_out,
                memo,
            });
        }
        Ok((sum.scale(1.0 / docs.len() as f64), DayTextCache::Conv(caches)))
    }

    fn mean_text(&self, docs: &[Vec<u32>]) -> Result<(Matrix, DayTextCache)> {
        let dim = self.config.embed_dim;
        let vocab = self.params.embedding.vocab_size();
        let mut sum = Matrix::zeros(dim, 1);
        for ids in docs {
            let ids = &ids[..ids.len().min(self.config.max_doc_len)];
            let live = ids.iter().filter(|&&id| id != 0).count();
            for &id in ids {
                if id as usize >= vocab {
                    return Err(Error::TokenOutOfRange {
                        id: id as usize,
                        vocab_size: vocab,
                    });
                }
                if id == 0 {
                    continue;
                }
                let row = self.params.embedding.table.row(id as usize);
                for (s, v) in sum.as_mut_slice().iter_mut().zip(row) {
                    *s += v / live as f64;
                }
            }
        }
        Ok((sum.scale(1.0 / docs.len() as f64), DayTextCache::Mean(docs.to_vec())))
    }

    /// Runs the network on one window.
    pub fn forward(&self, sample: &WindowSample) -> Result<ForwardOutput> {
        self.check_sample(sample)?;
        let text_dim = self.config.text_dim(self.arch);
        let mut day_vecs = Vec::with_capacity(sample.inputs.len());
        let mut day_caches = Vec::with_capacity(sample.inputs.len());
        for day in &sample.inputs {
            let (text, cache) = if !day.has_text || day.docs.is_empty() {
                (Matrix::zeros(text_dim, 1), DayTextCache::Empty)
            } else if self.arch.has_conv() {
                self.conv_text(&day.docs)?
            } else {
                self.mean_text(&day.docs)?
            };
            day_vecs.push(Matrix::vstack(&text, &day.market)?);
            day_caches.push(cache);
        }

        let (context, sequence, attention) = match &self.params.gru {
            None => {
                let mut sum = Matrix::zeros(day_vecs[0].rows(), 1);
                for v in &day_vecs {
                    sum.add_assign(v)?;
                }
                (sum.scale(1.0 / day_vecs.len() as f64), SequenceCache::Mean, None)
            }
            Some(gru) => {
                let trace = gru.forward(&day_vecs, None)?;
                match &self.params.attention {
                    Some(att) => {
                        let (ctx, weights, cache) = att.pool(&trace.hiddens)?;
                        let seq = SequenceCache::Gru {
                            steps: trace.caches,
                            attention: Some(cache),
                        };
                        (ctx, seq, Some(weights))
                    }
                    None => {
                        let last = trace.hiddens.last().expect("window is non-empty").clone();
                        let seq = SequenceCache::Gru {
                            steps: trace.caches,
                            attention: None,
                        };
                        (last, seq, None)
                    }
                }
            }
        };

        let return_pred = self.params.reg_head.forward(&context)?.get(0, 0);
        let logits = self.params.cls_head.forward(&context)?;
        Ok(ForwardOutput {
            return_pred,
            logits: logits.clone(),
            attention,
            cache: ForwardCache {
                days: day_caches,
                sequence,
                context,
                return_pred,
                logits,
            },
        })
    }

    /// Loss terms for a forward pass against the given targets.
    pub fn loss(&self, out: &ForwardOutput, target_return: f64, target_class: Sentiment) -> Result<LossParts> {
        let mse = (out.return_pred - target_return).powi(2);
        let ce = cross_entropy(&out.logits, target_class.index())?;
        let cfg = JointLossConfig::new(self.config.lambda)?;
        Ok(LossParts {
            joint: joint_loss(mse, ce, cfg),
            mse,
            ce,
        })
    }

    /// Accumulates exact joint-loss gradients for one sample into `grads` and
    /// returns the loss terms. The pad embedding row never receives gradient.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        target_return: f64,
        target_class: Sentiment,
        grads: &mut ModelParams,
    ) -> Result<LossParts> {
        let lambda = self.config.lambda;
        let mse = (cache.return_pred - target_return).powi(2);
        let ce = cross_entropy(&cache.logits, target_class.index())?;
        let parts = LossParts {
            joint: joint_loss(mse, ce, JointLossConfig::new(lambda)?),
            mse,
            ce,
        };

        let d_return = Matrix::column(&[lambda * 2.0 * (cache.return_pred - target_return)])?;
        let d_logits = cross_entropy_grad(&cache.logits, target_class.index())?.scale(1.0 - lambda);
        let mut d_context = self.params.reg_head.backward(&cache.context, &d_return, &mut grads.reg_head)?;
        d_context.add_assign(&self.params.cls_head.backward(&cache.context, &d_logits, &mut grads.cls_head)?)?;

        let d_days: Vec<Matrix> = match &cache.sequence {
            SequenceCache::Mean => {
                let n = cache.days.len();
                vec![d_context.scale(1.0 / n as f64); n]
            }
            SequenceCache::Gru { steps, attention } => {
                let gru = self.params.gru.as_ref().ok_or_else(|| Error::invalid("cache has GRU steps but model has no GRU"))?;
                let g_gru = grads.gru.as_mut().ok_or_else(|| Error::invalid("gradient buffer lacks GRU tensors"))?;
                let d_hiddens = match (attention, &self.params.attention, grads.attention.as_mut()) {
                    (Some(att_cache), Some(att), Some(g_att)) => att.backward(att_cache, &d_context, g_att)?,
                    (None, None, None) => {
                        let mut d = vec![Matrix::zeros(gru.hidden_size(), 1); steps.len()];
                        d[steps.len() - 1] = d_context;
                        d
                    }
                    _ => return Err(Error::invalid("attention cache does not match the model")),
                };
                gru.backward(steps, &d_hiddens, g_gru)?.0
            }
        };
        if d_days.len() != cache.days.len() {
            return Err(Error::invalid("cache does not match the model window"));
        }

        let text_dim = self.config.text_dim(self.arch);
        for (d_day, day) in d_days.iter().zip(&cache.days) {
            let (d_text, _) = d_day.split_column(text_dim)?;
            match day {
                DayTextCache::Empty => {}
                DayTextCache::Conv(docs) => {
                    let conv = self.params.conv.as_ref().ok_or_else(|| Error::invalid("cache has conv docs but model has no conv"))?;
                    let g_conv = grads.conv.as_mut().ok_or_else(|| Error::invalid("gradient buffer lacks conv tensors"))?;
                    let d_pooled = d_text.scale(1.0 / docs.len() as f64);
                    for doc in docs {
                        let d_relu = global_max_pool_backward(&doc.memo, doc.relu_out.rows(), &d_pooled)?;
                        let d_featmap = relu_backward(&doc.relu_out, &d_relu)?;
                        let d_embedded = conv.backward(&doc.conv, &d_featmap, g_conv)?;
                        self.params.embedding.backward(&doc.ids, self.config.max_doc_len, &d_embedded, &mut grads.embedding.table)?;
                    }
                }
                DayTextCache::Mean(docs) => {
                    let n_docs = docs.len() as f64;
                    for ids in docs {
                        let ids = &ids[..ids.len().min(self.config.max_doc_len)];
                        let live = ids.iter().filter(|&&id| id != 0).count() as f64;
                        for &id in ids.iter().filter(|&&id| id != 0) {
                            let row = grads.embedding.table.row_mut(id as usize);
                            for (g, d) in row.iter_mut().zip(d_text.as_slice()) {
                                *g += d / (n_docs * live);
                            }
                        }
                    }
                }
            }
        }
        grads.embedding.table.row_mut(0).fill(0.0);
        Ok(parts)
    }

    /// Forward plus backward for one sample into a fresh gradient set.
    pub fn loss_and_grad(&self, sample: &WindowSample) -> Result<(LossParts, ModelParams)> {
        let out = self.forward(sample)?;
        let mut grads = self.params.zeros_like();
        let parts = self.backward(&out.cache, sample.target_return, sample.target_class, &mut grads)?;
        Ok((parts, grads))
    }
}

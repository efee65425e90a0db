use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ArchKind, ModelConfig};
use crate::error::{Error, Result};
use crate::layers::{AttentionParams, Conv1dParams, DenseParams, EmbeddingTable, GruParams};
use crate::numeric::Matrix;

/// Every trainable tensor of a model. Gradient buffers use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub embedding: EmbeddingTable,
    pub conv: Option<Conv1dParams>,
    pub gru: Option<GruParams>,
    pub attention: Option<AttentionParams>,
    pub reg_head: DenseParams,
    pub cls_head: DenseParams,
}

impl ModelParams {
    /// Seeded Glorot initialization. Tensors are drawn in a fixed order from
    /// one stream: embedding, conv, gru, attention, regression head,
    /// classification head.
    pub fn init(cfg: &ModelConfig, arch: ArchKind) -> Result<Self> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let embedding = EmbeddingTable::init(cfg.vocab_size, cfg.embed_dim, &mut rng);
        let conv = if arch.has_conv() {
            Some(Conv1dParams::init(cfg.num_filters, cfg.kernel_width, cfg.embed_dim, cfg.conv_stride, &mut rng)?)
        } else {
            None
        };
        let gru = arch
            .has_gru()
            .then(|| GruParams::init(cfg.gru_hidden, cfg.day_dim(arch), &mut rng));
        let attention = (arch.has_gru() && cfg.attention_enabled)
            .then(|| AttentionParams::init(cfg.attention_dim, cfg.gru_hidden, &mut rng));
        let head_in = cfg.head_input_dim(arch);
        let reg_head = DenseParams::init(1, head_in, &mut rng);
        let cls_head = DenseParams::init(cfg.num_classes, head_in, &mut rng);
        Ok(ModelParams {
            embedding,
            conv,
            gru,
            attention,
            reg_head,
            cls_head,
        })
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            embedding: EmbeddingTable {
                table: Matrix::zeros(self.embedding.table.rows(), self.embedding.table.cols()),
            },
            conv: self.conv.as_ref().map(Conv1dParams::zeros_like),
            gru: self.gru.as_ref().map(GruParams::zeros_like),
            attention: self.attention.as_ref().map(AttentionParams::zeros_like),
            reg_head: self.reg_head.zeros_like(),
            cls_head: self.cls_head.zeros_like(),
        }
    }

    /// Named tensors in a fixed order. Names are the checkpoint keys.
    pub fn tensors(&self) -> Vec<(String, &Matrix)> {
        let mut out = vec![("embedding".to_string(), &self.embedding.table)];
        if let Some(conv) = &self.conv {
            for (f, k) in conv.kernels.iter().enumerate() {
                out.push((format!("conv.kernel.{f}"), k));
            }
        }
        if let Some(g) = &self.gru {
            out.push(("gru.w_z".into(), &g.w_z));
            out.push(("gru.w_r".into(), &g.w_r));
            out.push(("gru.w".into(), &g.w));
        }
        if let Some(a) = &self.attention {
            out.push(("attention.w_a".into(), &a.w_a));
            out.push(("attention.u".into(), &a.u));
        }
        out.push(("reg_head.w".into(), &self.reg_head.w));
        out.push(("reg_head.b".into(), &self.reg_head.b));
        out.push(("cls_head.w".into(), &self.cls_head.w));
        out.push(("cls_head.b".into(), &self.cls_head.b));
        out
    }

    /// Same order as [`ModelParams::tensors`].
    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = vec![&mut self.embedding.table];
        if let Some(conv) = &mut self.conv {
            out.extend(conv.kernels.iter_mut());
        }
        if let Some(g) = &mut self.gru {
            out.extend([&mut g.w_z, &mut g.w_r, &mut g.w]);
        }
        if let Some(a) = &mut self.attention {
            out.extend([&mut a.w_a, &mut a.u]);
        }
        out.extend([
            &mut self.reg_head.w,
            &mut self.reg_head.b,
            &mut self.cls_head.w,
            &mut self.cls_head.b,
        ]);
        out
    }

    pub fn count(&self) -> usize {
        self.tensors().iter().map(|(_, m)| m.len()).sum()
    }

    /// `self += scale * other`, tensor by tensor.
    pub fn axpy(&mut self, scale: f64, other: &ModelParams) -> Result<()> {
        let theirs = other.tensors();
        let mine = self.tensors_mut();
        if mine.len() != theirs.len() {
            return Err(Error::invalid("parameter sets have different layouts"));
        }
        for (m, (_, t)) in mine.into_iter().zip(theirs) {
            m.axpy(scale, t)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for m in self.tensors_mut() {
            for v in m.as_mut_slice() {
                *v *= factor;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, m)| m.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.tensors().iter().map(|(_, m)| m.max_abs()).fold(0.0, f64::max)
    }
}

use rand::Rng;

use super::init::glorot_uniform;
use crate::error::{Error, Result};
use crate::numeric::Matrix;

/// Token embedding table. Row 0 is the padding token: it is always zero and
/// never receives gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    pub table: Matrix,
}

impl EmbeddingTable {
    pub fn new(mut table: Matrix) -> Self {
        table.row_mut(0).fill(0.0);
        EmbeddingTable { table }
    }

    pub fn init<R: Rng + ?Sized>(vocab_size: usize, dim: usize, rng: &mut R) -> Self {
        EmbeddingTable::new(glorot_uniform(vocab_size, dim, vocab_size, dim, rng))
    }

    pub fn vocab_size(&self) -> usize {
        self.table.rows()
    }

    pub fn dim(&self) -> usize {
        self.table.cols()
    }

    /// Gathers `ids` into a `max_len x dim` matrix, truncating or padding with id 0.
    pub fn lookup(&self, ids: &[u32], max_len: usize) -> Result<Matrix> {
        embed_lookup(self, ids, max_len)
    }

    /// Scatters `upstream` (shaped like the lookup output) into `grad`, skipping
    /// padding positions.
    pub fn backward(
        &self,
        ids: &[u32],
        max_len: usize,
        upstream: &Matrix,
        grad: &mut Matrix,
    ) -> Result<()> {
        if upstream.shape() != (max_len, self.dim()) {
            return Err(Error::shape(
                "embedding backward",
                upstream.shape(),
                (max_len, self.dim()),
            ));
        }
        if grad.shape() != self.table.shape() {
            return Err(Error::shape(
                "embedding backward",
                grad.shape(),
                self.table.shape(),
            ));
        }
        for (pos, &id) in ids.iter().take(max_len).enumerate() {
            let id = id as usize;
            if id == 0 {
                continue;
            }
            let src = upstream.row(pos);
            for (dst, s) in grad.row_mut(id).iter_mut().zip(src) {
                *dst += s;
            }
        }
        Ok(())
    }
}

pub fn embed_lookup(table: &EmbeddingTable, ids: &[u32], max_len: usize) -> Result<Matrix> {
    if max_len == 0 {
        return Err(Error::invalid("max_len must be at least 1"));
    }
    let mut out = Matrix::zeros(max_len, table.dim());
    for (pos, &id) in ids.iter().take(max_len).enumerate() {
        let id = id as usize;
        if id >= table.vocab_size() {
            return Err(Error::TokenOutOfRange {
                id,
                vocab_size: table.vocab_size(),
            });
        }
        out.row_mut(pos).copy_from_slice(table.table.row(id));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table() -> EmbeddingTable {
        EmbeddingTable::new(
            Matrix::from_rows(&[vec![9.0, 9.0], vec![0.5, 0.5], vec![1.0, 5.0]]).unwrap(),
        )
    }

    #[test]
    fn pad_row_is_zeroed_and_looked_up_as_zero() {
        let t = table();
        assert_eq!(t.table.row(0), &[0.0, 0.0]);
        let out = t.lookup(&[0, 0], 2).unwrap();
        assert!(out.as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn direct_lookup_and_padding() {
        let out = table().lookup(&[2], 1).unwrap();
        assert_eq!(out.to_rows(), vec![vec![1.0, 5.0]]);
        let out = table().lookup(&[2], 3).unwrap();
        assert_eq!(out.row(1), &[0.0, 0.0]);
        let out = table().lookup(&[1, 2, 1], 2).unwrap();
        assert_eq!(out.rows(), 2);
    }

    #[test]
    fn out_of_range_names_the_id() {
        let err = table().lookup(&[1, 7], 4).unwrap_err();
        assert!(matches!(err, Error::TokenOutOfRange { id: 7, vocab_size: 3 }));
    }

    #[test]
    fn random_ids_match_gather_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = EmbeddingTable::init(11, 4, &mut rng);
        let ids: Vec<u32> = (0..9).map(|i| (i * 7 % 11) as u32).collect();
        let out = t.lookup(&ids, 12).unwrap();
        for r in 0..12 {
            for c in 0..4 {
                let want = if r < ids.len() {
                    t.table.get(ids[r] as usize, c)
                } else {
                    0.0
                };
                assert_eq!(out.get(r, c), want);
            }
        }
    }

    #[test]
    fn backward_skips_pad_and_accumulates_repeats() {
        let t = table();
        let up = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let mut g = Matrix::zeros(3, 2);
        t.backward(&[2, 0, 2], 3, &up, &mut g).unwrap();
        assert_eq!(g.row(0), &[0.0, 0.0]);
        assert_eq!(g.row(2), &[6.0, 8.0]);
    }
}

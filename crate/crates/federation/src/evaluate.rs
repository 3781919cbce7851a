use fednod_core::{argmax, softmax_cross_entropy, Model32, NUM_CLASSES};
use fednod_data::{batch_tensor, Example};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FederationError, Result};

/// Test samples per forward pass.
pub const EVAL_BATCH: usize = 64;

/// `confusion[i][j]` counts samples of true class `i` predicted as `j`.
pub type Confusion = [[u64; NUM_CLASSES]; NUM_CLASSES];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Exactly `trace(confusion) / sum(confusion)`.
    pub accuracy: f64,
    /// Mean categorical cross-entropy.
    pub loss: f64,
    pub confusion: Confusion,
}

impl Evaluation {
    pub fn total(&self) -> u64 {
        self.confusion.iter().flatten().sum()
    }

    pub fn correct(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.confusion[i][i]).sum()
    }
}

/// Dropout-free forward pass over the test set; ties in the logits go to
/// the lowest class index.
pub fn evaluate<E: Example>(model: &Model32, test: &[E]) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(FederationError::EmptyTestSet);
    }
    let per_batch: Vec<(f64, Confusion)> = test
        .par_chunks(EVAL_BATCH)
        .map(|chunk| {
            let items: Vec<&E> = chunk.iter().collect();
            let labels: Vec<usize> = chunk.iter().map(|e| e.label().index()).collect();
            let logits = model.forward(&batch_tensor(&items))?;
            let (loss, _) = softmax_cross_entropy(&logits, &labels)?;
            let mut confusion = Confusion::default();
            for (row, &l) in logits.data().chunks(NUM_CLASSES).zip(&labels) {
                confusion[l][argmax(row)] += 1;
            }
            Ok((loss * chunk.len() as f64, confusion))
        })
        .collect::<Result<_>>()?;

    let mut confusion = Confusion::default();
    let mut loss = 0.0;
    for (l, c) in per_batch {
        loss += l;
        for i in 0..NUM_CLASSES {
            for j in 0..NUM_CLASSES {
                confusion[i][j] += c[i][j];
            }
        }
    }
    let mut eval = Evaluation {
        accuracy: 0.0,
        loss: loss / test.len() as f64,
        confusion,
    };
    eval.accuracy = eval.correct() as f64 / eval.total() as f64;
    Ok(eval)
}

//! Seeded train/test partition of a corpus.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};
use crate::rng::CounterRng;

/// Page ids assigned to the training and test sets.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorpusSplit {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub seed: u64,
    pub ratio: f64,
}

impl CorpusSplit {
    pub fn is_train(&self, page_id: &str) -> bool {
        self.train.iter().any(|p| p == page_id)
    }
}

/// Number of training pages: `round_half_up(ratio * n)`.
pub fn train_count(n: usize, ratio: f64) -> usize {
    (libm::floor(ratio * n as f64 + 0.5) as usize).min(n)
}

/// Shuffles `page_ids` under `seed` and assigns the first
/// `round_half_up(ratio * n)` to training.
///
/// Input order matters: callers should pass ids in a canonical order (the
/// pipeline sorts them) so that the split is reproducible.
pub fn split_corpus(page_ids: &[String], ratio: f64, seed: u64) -> Result<CorpusSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(CoreError::InvalidParameter {
            name: "ratio",
            reason: alloc::format!("{ratio} is not in (0, 1)"),
        });
    }
    if page_ids.is_empty() {
        return Err(CoreError::Empty("cannot split an empty corpus"));
    }
    let mut order: Vec<String> = page_ids.to_vec();
    CounterRng::new(seed).shuffle(&mut order);
    let n_train = train_count(order.len(), ratio);
    let test = order.split_off(n_train);
    Ok(CorpusSplit {
        train: order,
        test,
        seed,
        ratio,
    })
}

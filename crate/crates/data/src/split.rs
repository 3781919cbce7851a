//! Per-class seeded splitting and client partitioning.

use fednod_core::{derive_seed, seeded_rng};
use rand::seq::SliceRandom;

use crate::error::{DataError, Result};
use crate::sample::{Example, Label};

const SPLIT_STREAM: u64 = 0x5350_4c49;
const PARTITION_STREAM: u64 = 0x5041_5254;

/// One client's local training data.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetShard<E> {
    pub shard_id: usize,
    pub samples: Vec<E>,
}

impl<E> DatasetShard<E> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Indices of each class in dataset order, shuffled with the class's own
/// stream of `seed`.
fn shuffled_by_class<E: Example>(data: &[E], seed: u64, stream: u64) -> [Vec<usize>; 3] {
    let mut groups: [Vec<usize>; 3] = Default::default();
    for (i, e) in data.iter().enumerate() {
        groups[e.label().index()].push(i);
    }
    for (c, g) in groups.iter_mut().enumerate() {
        g.shuffle(&mut seeded_rng(derive_seed(seed, &[stream, c as u64])));
    }
    groups
}

/// Per class, `floor(train_fraction * n_c)` samples go to train after a
/// seeded shuffle; the rest go to test. Output is grouped by class.
pub fn stratified_split<E: Example + Clone>(data: &[E], train_fraction: f64, seed: u64) -> Result<(Vec<E>, Vec<E>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::Config(format!("train fraction {train_fraction} outside (0, 1)")));
    }
    let groups = shuffled_by_class(data, seed, SPLIT_STREAM);
    for (c, g) in groups.iter().enumerate() {
        if g.len() < 2 {
            return Err(DataError::Stratification(format!(
                "class {} has {} samples, need at least 2",
                Label::ALL[c],
                g.len()
            )));
        }
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for g in &groups {
        // the epsilon absorbs products like 0.29 * 100 = 28.999...
        let n_train = ((train_fraction * g.len() as f64) + 1e-9).floor() as usize;
        train.extend(g[..n_train].iter().map(|&i| data[i].clone()));
        test.extend(g[n_train..].iter().map(|&i| data[i].clone()));
    }
    Ok((train, test))
}

/// Deals each class's (seeded-shuffled) samples round-robin over `k`
/// shards. The deal continues across classes, so per-class shard sizes
/// differ by at most one and total sizes by at most one as well.
pub fn partition_clients<E: Example + Clone>(train: &[E], k: usize, seed: u64) -> Result<Vec<DatasetShard<E>>> {
    if k == 0 {
        return Err(DataError::Partition("client count must be at least 1".into()));
    }
    if k > train.len() {
        return Err(DataError::Partition(format!(
            "{k} clients but only {} training samples",
            train.len()
        )));
    }
    let mut shards: Vec<DatasetShard<E>> = (0..k)
        .map(|shard_id| DatasetShard {
            shard_id,
            samples: Vec::with_capacity(train.len() / k + 3),
        })
        .collect();
    let mut next = 0;
    for g in shuffled_by_class(train, seed, PARTITION_STREAM) {
        for i in g {
            shards[next].samples.push(train[i].clone());
            next = (next + 1) % k;
        }
    }
    Ok(shards)
}

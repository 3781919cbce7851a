use fednod_core::{derive_seed, seeded_rng, AdamState32, Hyperparameters, Model32, ModelSpec, ModelWeights};
use fednod_data::{batch_tensor, DatasetShard, Example};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{FederationError, Result};

const INIT_STREAM: u64 = 0x494e_4954;
const CLIENT_STREAM: u64 = 0x434c_4e54;
const SHUFFLE_STREAM: u64 = 1;
const DROPOUT_STREAM: u64 = 2;

/// Seed of the initial global model for a run.
pub fn init_seed(run_seed: u64) -> u64 {
    derive_seed(run_seed, &[INIT_STREAM])
}

/// Seed owned by client `id` for a run.
pub fn client_seed(run_seed: u64, id: usize) -> u64 {
    derive_seed(run_seed, &[CLIENT_STREAM, id as u64])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FederationConfig {
    pub hyper: Hyperparameters,
    #[serde(default = "default_local_epochs")]
    pub local_epochs: usize,
}

fn default_local_epochs() -> usize {
    1
}

impl Default for FederationConfig {
    fn default() -> Self {
        FederationConfig {
            hyper: Hyperparameters::default(),
            local_epochs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub weights: ModelWeights,
    pub n_samples: usize,
    /// Mean loss over the last local epoch (0 when no epoch ran).
    pub train_loss: f32,
    pub train_accuracy: f32,
}

/// One participant: its shard, a working model and Adam moments that
/// persist across rounds.
pub struct Client<E> {
    id: usize,
    shard: DatasetShard<E>,
    seed: u64,
    model: Model32,
    optimizer: AdamState32,
    rounds_done: usize,
    epochs_done: u64,
}

impl<E: Example> Client<E> {
    pub fn new(id: usize, shard: DatasetShard<E>, spec: ModelSpec, seed: u64) -> Result<Self> {
        if shard.is_empty() {
            return Err(FederationError::EmptyShard(id));
        }
        let model = Model32::zeros(spec);
        let optimizer = model.new_optimizer();
        Ok(Client {
            id,
            shard,
            seed,
            model,
            optimizer,
            rounds_done: 0,
            epochs_done: 0,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn spec(&self) -> &ModelSpec {
        self.model.spec()
    }

    pub fn shard(&self) -> &DatasetShard<E> {
        &self.shard
    }

    /// Loads `global` and runs `local_epochs` shuffled mini-batch epochs.
    ///
    /// Epoch `e` overall (counted across rounds) shuffles with stream
    /// `(seed, 1, e)`; batch `b` of it draws dropout masks from
    /// `(seed, 2, e, b)`.
    pub fn local_train(&mut self, global: &ModelWeights, config: &FederationConfig) -> Result<ClientUpdate> {
        let round = self.rounds_done;
        self.model.load_weights(global)?;
        let n = self.shard.len();
        let batch = config.hyper.batch_size.max(1);
        let mut last = (0.0, 0usize);
        for _ in 0..config.local_epochs {
            let epoch = self.epochs_done;
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut seeded_rng(derive_seed(self.seed, &[SHUFFLE_STREAM, epoch])));
            let (mut loss_sum, mut correct) = (0.0, 0);
            for (b, idx) in order.chunks(batch).enumerate() {
                let items: Vec<&E> = idx.iter().map(|&i| &self.shard.samples[i]).collect();
                let labels: Vec<usize> = items.iter().map(|e| e.label().index()).collect();
                let mut rng = seeded_rng(derive_seed(self.seed, &[DROPOUT_STREAM, epoch, b as u64]));
                let stats = self
                    .model
                    .train_batch(batch_tensor(&items), &labels, &mut self.optimizer, &config.hyper, &mut rng)
                    .map_err(|e| FederationError::Diverged {
                        round,
                        client: self.id,
                        reason: e.to_string(),
                    })?;
                loss_sum += stats.loss * stats.count as f64;
                correct += stats.correct;
            }
            last = (loss_sum / n as f64, correct);
            self.epochs_done += 1;
        }
        self.rounds_done += 1;
        let trained = config.local_epochs > 0;
        Ok(ClientUpdate {
            client_id: self.id,
            weights: self.model.weights(),
            n_samples: n,
            train_loss: if trained { last.0 as f32 } else { 0.0 },
            train_accuracy: if trained { (last.1 as f64 / n as f64) as f32 } else { 0.0 },
        })
    }
}

/// Single local update from a fresh client state.
pub fn local_train<E: Example + Clone>(
    global: &ModelWeights,
    shard: &DatasetShard<E>,
    spec: &ModelSpec,
    config: &FederationConfig,
    seed: u64,
) -> Result<ClientUpdate> {
    Client::new(shard.shard_id, shard.clone(), spec.clone(), seed)?.local_train(global, config)
}

use std::time::Instant;

use fednod_core::{Model32, ModelSpec, ModelWeights};
use fednod_data::{DatasetShard, Example};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{fedavg_aggregate, fedavg_coefficients};
use crate::client::{client_seed, init_seed, Client, ClientUpdate, FederationConfig};
use crate::error::Result;
use crate::evaluate::{evaluate, Confusion, Evaluation};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    /// 1-based index of the completed round.
    pub round: usize,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub confusion: Confusion,
    /// Sample-weighted mean of the clients' last-epoch training loss.
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub wall_time_s: f64,
}

impl RoundReport {
    /// Equality on everything except wall time.
    pub fn same_outcome(&self, other: &RoundReport) -> bool {
        RoundReport {
            wall_time_s: 0.0,
            ..self.clone()
        } == RoundReport {
            wall_time_s: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct ServerState {
    pub round: usize,
    pub global_weights: ModelWeights,
    pub history: Vec<RoundReport>,
    model: Model32,
}

impl ServerState {
    pub fn new(spec: ModelSpec, run_seed: u64) -> Self {
        let model = Model32::init(spec, init_seed(run_seed));
        ServerState {
            round: 0,
            global_weights: model.weights(),
            history: Vec::new(),
            model,
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        self.model.spec()
    }

    /// Evaluates the current global weights.
    pub fn evaluate<E: Example>(&mut self, test: &[E]) -> Result<Evaluation> {
        self.model.load_weights(&self.global_weights)?;
        evaluate(&self.model, test)
    }

    /// Aggregates one round of updates, evaluates, and records the report.
    pub fn complete_round<E: Example>(&mut self, updates: &[ClientUpdate], test: &[E], started: Instant) -> Result<&RoundReport> {
        self.global_weights = fedavg_aggregate(updates)?;
        let eval = self.evaluate(test)?;
        let mut sorted: Vec<&ClientUpdate> = updates.iter().collect();
        sorted.sort_by_key(|u| u.client_id);
        let coef = fedavg_coefficients(&sorted.iter().map(|u| u.n_samples as u64).collect::<Vec<_>>());
        let weighted = |f: fn(&ClientUpdate) -> f32| sorted.iter().zip(&coef).map(|(u, c)| c * f(u) as f64).sum::<f64>();
        self.round += 1;
        self.history.push(RoundReport {
            round: self.round,
            test_accuracy: eval.accuracy,
            test_loss: eval.loss,
            confusion: eval.confusion,
            train_loss: weighted(|u| u.train_loss),
            train_accuracy: weighted(|u| u.train_accuracy),
            wall_time_s: started.elapsed().as_secs_f64(),
        });
        Ok(self.history.last().unwrap())
    }
}

/// Broadcast, local training on every client (in parallel), FedAvg,
/// evaluation.
pub fn run_round<E: Example>(
    state: &mut ServerState,
    clients: &mut [Client<E>],
    test: &[E],
    config: &FederationConfig,
) -> Result<RoundReport> {
    let started = Instant::now();
    let global = &state.global_weights;
    let updates = clients
        .par_iter_mut()
        .map(|c| c.local_train(global, config))
        .collect::<Result<Vec<_>>>()?;
    let report = state.complete_round(&updates, test, started)?.clone();
    log::info!(
        "round {}: accuracy {:.4}, loss {:.4} ({:.1}s)",
        report.round,
        report.test_accuracy,
        report.test_loss,
        report.wall_time_s
    );
    Ok(report)
}

/// In-process federation: the server state plus all clients.
pub struct Simulation<E> {
    pub state: ServerState,
    pub clients: Vec<Client<E>>,
    pub test: Vec<E>,
    pub config: FederationConfig,
}

impl<E: Example> Simulation<E> {
    /// Global model seeded by `init_seed(run_seed)`; client `k` owns
    /// `client_seed(run_seed, k)`.
    pub fn new(
        spec: ModelSpec,
        shards: Vec<DatasetShard<E>>,
        test: Vec<E>,
        config: FederationConfig,
        run_seed: u64,
    ) -> Result<Self> {
        let clients = shards
            .into_iter()
            .map(|s| {
                let id = s.shard_id;
                Client::new(id, s, spec.clone(), client_seed(run_seed, id))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Simulation {
            state: ServerState::new(spec, run_seed),
            clients,
            test,
            config,
        })
    }

    pub fn run_round(&mut self) -> Result<RoundReport> {
        run_round(&mut self.state, &mut self.clients, &self.test, &self.config)
    }

    pub fn run(&mut self, rounds: usize) -> Result<Vec<RoundReport>> {
        (0..rounds).map(|_| self.run_round()).collect()
    }

    pub fn evaluate_global(&mut self) -> Result<Evaluation> {
        self.state.evaluate(&self.test)
    }
}

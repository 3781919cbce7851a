use std::net::{TcpListener, TcpStream};
use std::time::Instant;

use anyhow::{Context, Result};
use fednod_federation::{client_seed, join, serve, Client, FederationError, JoinOutcome, ServerState};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::pipeline::{load_frames, prepare, run_seed, summarize, RunSummary};
use fednod_federation::RoundReport;

/// CONFIG payload: clients rebuild their shard from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub experiment: ExperimentConfig,
    pub run: usize,
}

/// Server side of one networked run of `config`.
pub fn serve_run(config: &ExperimentConfig, run: usize, listener: &TcpListener) -> Result<(RunSummary, Vec<RoundReport>)> {
    config.validate()?;
    let started = Instant::now();
    let seed = run_seed(config, run);
    let frames = load_frames(config, seed)?;
    let prepared = prepare(config, &frames, seed)?;
    let n_train = prepared.shards.iter().map(|s| s.len()).sum();
    let mut state = ServerState::new(prepared.spec, seed);
    let payload = serde_json::to_vec(&SessionConfig {
        experiment: config.clone(),
        run,
    })?;
    log::info!(
        "waiting for {} clients on {}",
        config.nbr_clients,
        listener.local_addr()?
    );
    serve(listener, &mut state, config.nbr_clients, &prepared.test, config.rounds, &payload)?;
    let initial = if config.rounds == 0 {
        let e = state.evaluate(&prepared.test)?;
        Some((e.accuracy, e.loss, e.confusion))
    } else {
        None
    };
    let summary = summarize(
        run,
        seed,
        (n_train, prepared.test.len()),
        &state.history,
        initial,
        started.elapsed().as_secs_f64(),
    );
    Ok((summary, state.history))
}

/// Client side: connects, receives the experiment, rebuilds shard
/// `client_id` locally and trains until the server shuts down.
pub fn join_run(addr: &str, client_id: usize) -> Result<JoinOutcome> {
    let stream = TcpStream::connect(addr).with_context(|| format!("connecting to {addr}"))?;
    let outcome = join(stream, client_id, |payload| {
        let session: SessionConfig = serde_json::from_slice(payload)?;
        let cfg = &session.experiment;
        let setup = || -> Result<_> {
            cfg.validate()?;
            let seed = run_seed(cfg, session.run);
            let frames = load_frames(cfg, seed)?;
            let mut prepared = prepare(cfg, &frames, seed)?;
            anyhow::ensure!(client_id < prepared.shards.len(), "client id {client_id} out of range");
            let shard = prepared.shards.swap_remove(client_id);
            Ok(Client::new(client_id, shard, prepared.spec, client_seed(seed, client_id))?)
        };
        let client = setup().map_err(|e| FederationError::Session(format!("{e:#}")))?;
        Ok((client, cfg.federation()))
    })?;
    Ok(outcome)
}

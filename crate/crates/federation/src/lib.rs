//! Federated averaging over a fixed fleet of clients.
//!
//! Every round the server broadcasts the global weights, each client runs
//! a few epochs of Adam on its own shard, and the server replaces the
//! global weights by the sample-weighted mean of the returned weights,
//! then evaluates on the held-out test set. Rounds run either in process
//! ([`Simulation`]) or across TCP connections ([`serve`] / [`join`]).

mod aggregate;
mod client;
mod error;
mod evaluate;
mod net;
mod server;

pub use aggregate::{fedavg_aggregate, fedavg_coefficients};
pub use client::{client_seed, init_seed, local_train, Client, ClientUpdate, FederationConfig};
pub use error::{FederationError, Result};
pub use evaluate::{evaluate, Confusion, Evaluation, EVAL_BATCH};
pub use net::{join, serve, JoinOutcome};
pub use server::{run_round, RoundReport, ServerState, Simulation};

use thiserror::Error;

pub type Result<T, E = FederationError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FederationError {
    #[error("nothing to aggregate")]
    EmptyAggregation,

    #[error("client {client} diverged in round {round}: {reason}")]
    Diverged { round: usize, client: usize, reason: String },

    #[error("client {0} has an empty shard")]
    EmptyShard(usize),

    #[error("test set is empty")]
    EmptyTestSet,

    #[error("session: {0}")]
    Session(String),

    #[error(transparent)]
    Core(#[from] fednod_core::Error),

    #[error(transparent)]
    Transport(#[from] fednod_transport::TransportError),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

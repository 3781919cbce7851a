//! Networked mode: one TCP connection per client, framed by the transport
//! protocol. Clients rebuild their own shard from the CONFIG payload, so
//! only parameters and metrics cross the wire.

use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, TcpStream};
use std::thread;
use std::time::Instant;

use fednod_core::ModelWeights;
use fednod_data::Example;
use fednod_transport::{
    decode_update, decode_weights, encode_update, encode_weights, Channel, MessageType, UpdatePayload,
};

use crate::client::{Client, ClientUpdate, FederationConfig};
use crate::error::{FederationError, Result};
use crate::server::{RoundReport, ServerState};

type Conn = Channel<BufReader<TcpStream>, BufWriter<TcpStream>>;

fn connect(stream: TcpStream) -> Result<Conn> {
    stream.set_nodelay(true)?;
    Ok(Channel::new(BufReader::new(stream.try_clone()?), BufWriter::new(stream)))
}

fn hello_id(payload: &[u8]) -> Result<usize> {
    let bytes: [u8; 4] = payload
        .try_into()
        .map_err(|_| FederationError::Session(format!("HELLO payload of {} bytes, expected 4", payload.len())))?;
    Ok(u32::from_le_bytes(bytes) as usize)
}

fn exchange(conn: &mut Conn, id: usize, global: &[u8], arch: fednod_core::Arch) -> Result<ClientUpdate> {
    conn.send(MessageType::GlobalWeights, global)?;
    let u = decode_update(&conn.expect(MessageType::ClientUpdate)?)?;
    Ok(ClientUpdate {
        client_id: id,
        weights: ModelWeights::from_named(arch, u.tensors)?,
        n_samples: u.n_samples as usize,
        train_loss: u.train_loss,
        train_accuracy: u.train_accuracy,
    })
}

/// Server side. Accepts `n_clients` connections, hands each the opaque
/// `config` payload, runs `rounds` rounds and shuts the clients down.
/// Clients must announce distinct ids in `0..n_clients`.
pub fn serve<E: Example>(
    listener: &TcpListener,
    state: &mut ServerState,
    n_clients: usize,
    test: &[E],
    rounds: usize,
    config: &[u8],
) -> Result<()> {
    let mut conns: Vec<(usize, Conn)> = Vec::with_capacity(n_clients);
    while conns.len() < n_clients {
        let (stream, peer) = listener.accept()?;
        let mut conn = connect(stream)?;
        let id = hello_id(&conn.expect(MessageType::Hello)?)?;
        if id >= n_clients || conns.iter().any(|(c, _)| *c == id) {
            conn.abort(&format!("client id {id} unavailable"));
            log::warn!("rejected {peer}: client id {id} unavailable");
            continue;
        }
        log::info!("client {id} joined from {peer}");
        conn.send(MessageType::Config, config)?;
        conns.push((id, conn));
    }
    conns.sort_by_key(|(id, _)| *id);

    let result = run_rounds(&mut conns, state, test, rounds);
    match &result {
        Ok(()) => {
            for (_, conn) in &mut conns {
                conn.send(MessageType::Shutdown, &[])?;
            }
        }
        Err(e) => {
            for (_, conn) in &mut conns {
                conn.abort(&e.to_string());
            }
        }
    }
    result
}

fn run_rounds<E: Example>(conns: &mut [(usize, Conn)], state: &mut ServerState, test: &[E], rounds: usize) -> Result<()> {
    let arch = state.spec().arch;
    for _ in 0..rounds {
        let started = Instant::now();
        let global = encode_weights(&state.global_weights)?;
        let updates = thread::scope(|s| {
            let handles: Vec<_> = conns
                .iter_mut()
                .map(|(id, conn)| {
                    let global = &global;
                    s.spawn(move || exchange(conn, *id, global, arch))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("connection handler panicked"))
                .collect::<Result<Vec<_>>>()
        })?;
        let report = serde_json::to_vec(state.complete_round(&updates, test, started)?)?;
        for (_, conn) in conns.iter_mut() {
            conn.send(MessageType::EvalReport, &report)?;
        }
        log::info!("round {} aggregated from {} clients", state.round, conns.len());
    }
    Ok(())
}

#[derive(Clone, Debug, Default)]
pub struct JoinOutcome {
    /// Reports broadcast by the server, one per round.
    pub reports: Vec<RoundReport>,
    pub rounds_trained: usize,
}

/// Client side. `setup` turns the server's CONFIG payload into this
/// client's runtime (rebuilding its shard locally).
pub fn join<E, F>(stream: TcpStream, client_id: usize, setup: F) -> Result<JoinOutcome>
where
    E: Example,
    F: FnOnce(&[u8]) -> Result<(Client<E>, FederationConfig)>,
{
    let mut conn = connect(stream)?;
    conn.send(MessageType::Hello, &(client_id as u32).to_le_bytes())?;
    let config = conn.expect(MessageType::Config)?;
    let (mut client, fed) = match setup(&config) {
        Ok(v) => v,
        Err(e) => {
            conn.abort(&e.to_string());
            return Err(e);
        }
    };
    let arch = client.spec().arch;
    let mut outcome = JoinOutcome::default();
    loop {
        let msg = conn.recv()?;
        match msg.msg_type {
            MessageType::GlobalWeights => {
                let step = decode_weights(&msg.payload, arch)
                    .map_err(FederationError::from)
                    .and_then(|g| client.local_train(&g, &fed));
                let update = match step {
                    Ok(u) => u,
                    Err(e) => {
                        conn.abort(&e.to_string());
                        return Err(e);
                    }
                };
                let payload = encode_update(&UpdatePayload {
                    n_samples: update.n_samples as u64,
                    train_loss: update.train_loss,
                    train_accuracy: update.train_accuracy,
                    tensors: update.weights.into_named(),
                })?;
                conn.send(MessageType::ClientUpdate, &payload)?;
                outcome.rounds_trained += 1;
            }
            MessageType::EvalReport => outcome.reports.push(serde_json::from_slice(&msg.payload)?),
            MessageType::Shutdown => return Ok(outcome),
            other => {
                let e = FederationError::Session(format!("unexpected {other:?} from server"));
                conn.abort(&e.to_string());
                return Err(e);
            }
        }
    }
}

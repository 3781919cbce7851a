use fednod_core::{ModelWeights, Tensor32};

use crate::client::ClientUpdate;
use crate::error::{FederationError, Result};

/// `n_k / sum(n)` for each client.
pub fn fedavg_coefficients(n_samples: &[u64]) -> Vec<f64> {
    let total: u64 = n_samples.iter().sum();
    n_samples.iter().map(|&n| n as f64 / total as f64).collect()
}

/// Sample-weighted mean of the client weights, accumulated in `f64` in
/// client-id order so the result does not depend on arrival order.
pub fn fedavg_aggregate(updates: &[ClientUpdate]) -> Result<ModelWeights> {
    let mut sorted: Vec<&ClientUpdate> = updates.iter().collect();
    sorted.sort_by_key(|u| u.client_id);
    let first = sorted.first().ok_or(FederationError::EmptyAggregation)?;
    for u in &sorted[1..] {
        first.weights.check_compatible(&u.weights)?;
    }
    if sorted.iter().any(|u| u.n_samples == 0) {
        return Err(FederationError::EmptyAggregation);
    }
    let coef = fedavg_coefficients(&sorted.iter().map(|u| u.n_samples as u64).collect::<Vec<_>>());

    let mut out = first.weights.clone();
    for (i, entry) in out.entries.iter_mut().enumerate() {
        let mut acc = vec![0f64; entry.tensor.len()];
        for (u, &c) in sorted.iter().zip(&coef) {
            for (a, &w) in acc.iter_mut().zip(u.weights.entries[i].tensor.data()) {
                *a += c * w as f64;
            }
        }
        entry.tensor = Tensor32::new(entry.tensor.shape().to_vec(), acc.into_iter().map(|v| v as f32).collect())?;
    }
    Ok(out)
}

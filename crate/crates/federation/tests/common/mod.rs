#![allow(dead_code)]

use fednod_core::{
    derive_seed, seeded_rng, Arch, Dropout, Hyperparameters, LayerSpec, MaxPool, Model32, ModelSpec, ModelWeights,
    Tensor32, WeightEntry,
};
use fednod_data::{batch_tensor, partition_clients, stratified_split, synth_generate, FrameSample, SynthSpec};
use fednod_federation::ClientUpdate;
use rand::seq::SliceRandom;
use rand::Rng;

/// Small conv net with dropout for fast federated tests.
pub fn tiny_spec(res: usize) -> ModelSpec {
    let q = res / 2;
    ModelSpec::new(
        Arch::Ddd2d,
        vec![1, res, res],
        vec![
            LayerSpec::conv2d(1, 4, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new2d(2)),
            LayerSpec::Flatten,
            LayerSpec::Dense {
                in_features: 4 * q * q,
                out_features: 16,
            },
            LayerSpec::Relu,
            LayerSpec::Dropout(Dropout::new(0.5).unwrap()),
            LayerSpec::Dense {
                in_features: 16,
                out_features: 3,
            },
        ],
        3,
    )
    .unwrap()
}

/// Synthetic frames split 90:10, training part dealt to `k` clients.
pub fn federated_data(
    n_per_class: usize,
    res: usize,
    k: usize,
    seed: u64,
) -> (Vec<fednod_data::DatasetShard<FrameSample>>, Vec<FrameSample>) {
    let data = synth_generate(&SynthSpec::new(n_per_class, res, 0.05), seed);
    let (train, test) = stratified_split(&data, 0.9, seed).unwrap();
    (partition_clients(&train, k, seed).unwrap(), test)
}

/// Plain mini-batch Adam over `samples` for `epochs` epochs: epoch `e`
/// shuffles with stream (seed, 1, e) and batch `b` draws dropout from
/// (seed, 2, e, b). No rounds, no aggregation, no weight exchange.
pub fn centralized_oracle(
    spec: ModelSpec,
    init: &ModelWeights,
    samples: &[FrameSample],
    hyper: &Hyperparameters,
    epochs: usize,
    seed: u64,
) -> ModelWeights {
    let mut model = Model32::zeros(spec);
    model.load_weights(init).unwrap();
    let mut adam = model.new_optimizer();
    for e in 0..epochs as u64 {
        let mut order: Vec<usize> = (0..samples.len()).collect();
        order.shuffle(&mut seeded_rng(derive_seed(seed, &[1, e])));
        for (b, idx) in order.chunks(hyper.batch_size).enumerate() {
            let items: Vec<&FrameSample> = idx.iter().map(|&i| &samples[i]).collect();
            let labels: Vec<usize> = items.iter().map(|s| s.label.index()).collect();
            let mut rng = seeded_rng(derive_seed(seed, &[2, e, b as u64]));
            model
                .train_batch(batch_tensor(&items), &labels, &mut adam, hyper, &mut rng)
                .unwrap();
        }
    }
    model.weights()
}

pub fn bits(w: &ModelWeights) -> Vec<u32> {
    w.entries
        .iter()
        .flat_map(|e| e.tensor.data().iter().map(|v| v.to_bits()))
        .collect()
}

/// Random weights of a fixed layout: `shapes` tensors, values in [-5, 5].
pub fn random_update(rng: &mut impl Rng, id: usize, shapes: &[Vec<usize>]) -> ClientUpdate {
    let entries = shapes
        .iter()
        .enumerate()
        .map(|(layer, s)| WeightEntry {
            layer,
            param: "weight".into(),
            tensor: Tensor32::new(s.clone(), (0..s.iter().product()).map(|_| rng.gen_range(-5.0..5.0)).collect())
                .unwrap(),
        })
        .collect();
    ClientUpdate {
        client_id: id,
        weights: ModelWeights {
            arch: Arch::Ddd2d,
            entries,
        },
        n_samples: rng.gen_range(1..2000),
        train_loss: 0.0,
        train_accuracy: 0.0,
    }
}

/// Closed form of the weighted mean, written as `sum(n_k w_k) / sum(n_k)`.
pub fn closed_form_mean(updates: &[ClientUpdate]) -> Vec<f64> {
    let total: f64 = updates.iter().map(|u| u.n_samples as f64).sum();
    let n = bits(&updates[0].weights).len();
    let mut acc = vec![0.0; n];
    for u in updates {
        let flat: Vec<f64> = u.weights.entries.iter().flat_map(|e| e.tensor.data().iter().map(|&v| v as f64)).collect();
        for (a, v) in acc.iter_mut().zip(flat) {
            *a += u.n_samples as f64 * v;
        }
    }
    acc.into_iter().map(|a| a / total).collect()
}

/// Largest relative deviation of `got` from the closed form, with an
/// absolute floor of 1 so near-zero means do not inflate the ratio.
pub fn max_relative_error(got: &ModelWeights, want: &[f64]) -> f64 {
    got.entries
        .iter()
        .flat_map(|e| e.tensor.data().iter().map(|&v| v as f64))
        .zip(want)
        .map(|(g, w)| (g - w).abs() / w.abs().max(1.0))
        .fold(0.0, f64::max)
}

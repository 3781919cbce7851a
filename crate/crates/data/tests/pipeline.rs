mod common;

use common::*;
use fednod_core::seeded_rng;
use fednod_data::{partition_clients, stratified_split, DataError};
use rand::Rng;

#[test]
fn split_oracle_over_random_datasets() {
    split_trials(100, 42).unwrap();
}

#[test]
fn split_small_classes() {
    for n in 2..30 {
        check_split(&labelled_dataset([n, n + 1, 2]), 0.9, n as u64).unwrap();
    }
}

#[test]
fn partition_oracle_for_client_grid() {
    let data = labelled_dataset([500, 500, 500]);
    let (train, test) = stratified_split(&data, 0.9, 7).unwrap();
    for k in [1, 2, 4, 8, 16, 20, 40] {
        check_partition(&train, k, 100 + k as u64).unwrap();
    }
    // the test split never leaks into shards
    let shards = partition_clients(&train, 8, 1).unwrap();
    let test_keys: std::collections::BTreeSet<_> = test.iter().map(key).collect();
    assert!(shards.iter().flat_map(|s| &s.samples).all(|s| !test_keys.contains(&key(s))));
}

#[test]
fn partition_random_sizes() {
    let mut rng = seeded_rng(9);
    for _ in 0..30 {
        let data = labelled_dataset(random_counts(&mut rng, 120));
        let k = rng.gen_range(1..=data.len().min(40));
        check_partition(&data, k, rng.gen()).unwrap();
    }
}

#[test]
fn partition_rejects_too_many_clients() {
    let data = labelled_dataset([3, 3, 3]);
    assert!(matches!(partition_clients(&data, 10, 0), Err(DataError::Partition(_))));
}

#![allow(dead_code)]

use std::collections::BTreeMap;

use fednod_core::seeded_rng;
use fednod_data::{partition_clients, stratified_split, FrameSample, GrayImage, Label};
use rand::Rng;

pub type Key = (String, u64);

pub fn key(s: &FrameSample) -> Key {
    (s.video_id.clone(), s.frame_index)
}

/// Dataset with the given class sizes; every sample has a unique key.
pub fn labelled_dataset(counts: [usize; 3]) -> Vec<FrameSample> {
    let img = GrayImage::new(1, 1, vec![7]).unwrap();
    let mut out = Vec::new();
    let mut next = 0u64;
    for (c, &n) in counts.iter().enumerate() {
        for _ in 0..n {
            out.push(FrameSample::new(img.clone(), Label::ALL[c], format!("v{}", next % 13), next));
            next += 1;
        }
    }
    out
}

fn class_counts<'a>(samples: impl IntoIterator<Item = &'a FrameSample>) -> [usize; 3] {
    let mut n = [0; 3];
    for s in samples {
        n[s.label.index()] += 1;
    }
    n
}

fn multiset(samples: &[FrameSample]) -> BTreeMap<Key, usize> {
    let mut m = BTreeMap::new();
    for s in samples {
        *m.entry(key(s)).or_insert(0) += 1;
    }
    m
}

/// Recount oracle for one stratified split.
pub fn check_split(data: &[FrameSample], fraction: f64, seed: u64) -> Result<(), String> {
    let (train, test) = stratified_split(data, fraction, seed).map_err(|e| e.to_string())?;
    let all = class_counts(data);
    let tr = class_counts(&train);
    let te = class_counts(&test);
    for c in 0..3 {
        let want = (fraction * all[c] as f64 + 1e-9).floor() as usize;
        if tr[c] != want || tr[c] + te[c] != all[c] {
            return Err(format!("class {c}: {} train / {} test of {}", tr[c], te[c], all[c]));
        }
        // the train part of each class is the class size scaled by the
        // fraction, off by less than one sample
        let exact = fraction * all[c] as f64;
        if (tr[c] as f64 - exact).abs() >= 1.0 {
            return Err(format!("class {c}: {} in train, exact share {exact:.3}", tr[c]));
        }
    }
    let mut joined = multiset(&train);
    for (k, n) in multiset(&test) {
        if joined.contains_key(&k) {
            return Err(format!("{k:?} in both train and test"));
        }
        joined.insert(k, n);
    }
    if joined != multiset(data) {
        return Err("train and test do not reconstruct the dataset".into());
    }
    let again = stratified_split(data, fraction, seed).map_err(|e| e.to_string())?;
    if again != (train, test) {
        return Err("split not deterministic".into());
    }
    Ok(())
}

/// Set-union oracle for one partition: shards are disjoint, cover the
/// training set and are balanced within one sample per class.
pub fn check_partition(train: &[FrameSample], k: usize, seed: u64) -> Result<(), String> {
    let shards = partition_clients(train, k, seed).map_err(|e| e.to_string())?;
    if shards.len() != k {
        return Err(format!("{} shards for k={k}", shards.len()));
    }
    let mut seen: BTreeMap<Key, usize> = BTreeMap::new();
    for (i, shard) in shards.iter().enumerate() {
        if shard.shard_id != i || shard.is_empty() {
            return Err(format!("shard {i} bad id or empty"));
        }
        for s in &shard.samples {
            if let Some(prev) = seen.insert(key(s), i) {
                return Err(format!("{:?} in shards {prev} and {i}", key(s)));
            }
        }
    }
    let want: BTreeMap<Key, usize> = train.iter().map(|s| (key(s), 0)).collect();
    if seen.keys().ne(want.keys()) {
        return Err("shards do not cover train".into());
    }
    for c in 0..3 {
        let sizes: Vec<usize> = shards.iter().map(|s| class_counts(&s.samples)[c]).collect();
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        if spread > 1 {
            return Err(format!("class {c} shard sizes {sizes:?}"));
        }
    }
    Ok(())
}

/// Random class sizes in `2..=max` per class.
pub fn random_counts(rng: &mut impl Rng, max: usize) -> [usize; 3] {
    [rng.gen_range(2..=max), rng.gen_range(2..=max), rng.gen_range(2..=max)]
}

/// Runs the split oracle over `n` random datasets.
pub fn split_trials(n: usize, seed: u64) -> Result<(), String> {
    let mut rng = seeded_rng(seed);
    for trial in 0..n {
        let data = labelled_dataset(random_counts(&mut rng, 400));
        let split_seed = rng.gen();
        check_split(&data, 0.9, split_seed).map_err(|e| format!("trial {trial}: {e}"))?;
    }
    Ok(())
}

/// Brute-force windows: every frame position is tested as a start.
pub fn enumerate_windows(n: usize, l: usize, s: usize) -> Vec<Vec<u64>> {
    let span = (l - 1) * s + 1;
    (0..n)
        .filter(|t| t % span == 0 && t + span <= n)
        .map(|t| (0..l).map(|i| (t + i * s) as u64).collect())
        .collect()
}

/// Mouth opening measured from a noiseless rendered frame: darkness mass
/// below the skin level in the lower half of the image, divided by the
/// area of a circle with the nominal mouth half-width. Background is
/// brighter than skin, so only the mouth contributes.
pub fn measured_mouth_ratio(img: &GrayImage, mouth_half_width: f64, mouth_level: f64) -> f64 {
    let res = img.width;
    let lower = &img.pixels[(res / 2) * res..];
    // a patch just below the face centre is skin whatever the jitter
    let mut patch: Vec<u8> = (res / 2..res * 6 / 10)
        .flat_map(|y| (res * 35 / 100..res * 65 / 100).map(move |x| img.get(x, y)))
        .collect();
    patch.sort_unstable();
    let skin = patch[patch.len() / 2] as f64 / 255.0;
    let depth = skin - mouth_level;
    let mass: f64 = lower
        .iter()
        .map(|&p| ((skin - p as f64 / 255.0) / depth).clamp(0.0, 1.0))
        .sum();
    let a = mouth_half_width * res as f64;
    mass / (std::f64::consts::PI * a * a)
}

pub fn classify_by_ratio(ratio: f64) -> Label {
    if ratio < 0.125 {
        Label::Normal
    } else if ratio < 0.45 {
        Label::Talking
    } else {
        Label::Yawning
    }
}

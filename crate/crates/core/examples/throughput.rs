use std::time::Instant;

use fednod_core::{build_ddd2d, build_ddd3d, seeded_rng, Hyperparameters, Model, Tensor};

fn main() {
    let h = Hyperparameters::default();
    let spec = build_ddd2d(64).unwrap();
    let mut model = Model::<f32>::init(spec, 1);
    let mut opt = model.new_optimizer();
    let x = Tensor::from_fn(&[32, 1, 64, 64], |i| (i % 13) as f32 / 13.0);
    let labels: Vec<usize> = (0..32).map(|i| i % 3).collect();
    let mut rng = seeded_rng(0);
    let t = Instant::now();
    for _ in 0..5 {
        model.train_batch(x.clone(), &labels, &mut opt, &h, &mut rng).unwrap();
    }
    println!("2d: {:.1} ms per sample", t.elapsed().as_secs_f64() * 1e3 / 160.0);

    let spec = build_ddd3d(64, 16).unwrap();
    let mut model = Model::<f32>::init(spec, 1);
    let mut opt = model.new_optimizer();
    let x = Tensor::from_fn(&[2, 1, 16, 64, 64], |i| (i % 13) as f32 / 13.0);
    let t = Instant::now();
    for _ in 0..5 {
        model.train_batch(x.clone(), &[0, 1], &mut opt, &h, &mut rng).unwrap();
    }
    println!("3d: {:.1} ms per sample", t.elapsed().as_secs_f64() * 1e3 / 10.0);
}

//! Test oracles shared by the core test targets (and the acceptance suite).
//! Nothing here calls the GEMM/im2col path it is used to check.
#![allow(dead_code)]

use fednod_core::gradcheck::check_gradient;
use fednod_core::layers::{Cache, Conv, Dense, Dropout, Layer, MaxPool, Mode};
use fednod_core::{seeded_rng, softmax_cross_entropy, Scalar, Tensor};
use rand::seq::SliceRandom;
use rand::Rng;

/// Direct nested-loop cross-correlation in f64.
pub fn naive_conv<S: Scalar>(x: &Tensor<S>, layer: &Conv<S>) -> (Vec<usize>, Vec<f64>) {
    let rank3 = layer.spatial_rank == 3;
    let s = x.shape();
    let (b, c, d, h, w) = if rank3 {
        (s[0], s[1], s[2], s[3], s[4])
    } else {
        (s[0], s[1], 1, s[2], s[3])
    };
    let [kd, kh, kw] = layer.kernel;
    let [sd, sh, sw] = layer.stride;
    let [pd, ph, pw] = layer.pad;
    let od = (d + 2 * pd - kd) / sd + 1;
    let oh = (h + 2 * ph - kh) / sh + 1;
    let ow = (w + 2 * pw - kw) / sw + 1;
    let o = layer.out_channels;
    let xv = |bi: usize, ci: usize, z: isize, y: isize, xx: isize| -> f64 {
        if z < 0 || y < 0 || xx < 0 || z as usize >= d || y as usize >= h || xx as usize >= w {
            0.0
        } else {
            x.data()[(((bi * c + ci) * d + z as usize) * h + y as usize) * w + xx as usize].to_f64_lossy()
        }
    };
    let wv = |oi: usize, ci: usize, a: usize, bb: usize, e: usize| -> f64 {
        layer.weight.data()[(((oi * c + ci) * kd + a) * kh + bb) * kw + e].to_f64_lossy()
    };
    let mut out = Vec::new();
    for bi in 0..b {
        for oi in 0..o {
            for z in 0..od {
                for y in 0..oh {
                    for xx in 0..ow {
                        let mut acc = layer.bias.data()[oi].to_f64_lossy();
                        for ci in 0..c {
                            for a in 0..kd {
                                for bb in 0..kh {
                                    for e in 0..kw {
                                        acc += wv(oi, ci, a, bb, e)
                                            * xv(
                                                bi,
                                                ci,
                                                (z * sd + a) as isize - pd as isize,
                                                (y * sh + bb) as isize - ph as isize,
                                                (xx * sw + e) as isize - pw as isize,
                                            );
                                    }
                                }
                            }
                        }
                        out.push(acc);
                    }
                }
            }
        }
    }
    let shape = if rank3 { vec![b, o, od, oh, ow] } else { vec![b, o, oh, ow] };
    (shape, out)
}

/// Window maxima by enumerating every window (stride = window).
pub fn brute_maxpool(x: &Tensor<f64>, window: [usize; 2]) -> Vec<f64> {
    let s = x.shape();
    let (b, c, h, w) = (s[0], s[1], s[2], s[3]);
    let mut out = Vec::new();
    for plane in 0..b * c {
        for oy in 0..h / window[0] {
            for ox in 0..w / window[1] {
                let mut vals = Vec::new();
                for dy in 0..window[0] {
                    for dx in 0..window[1] {
                        vals.push(x.data()[plane * h * w + (oy * window[0] + dy) * w + ox * window[1] + dx]);
                    }
                }
                out.push(vals.into_iter().fold(f64::NEG_INFINITY, f64::max));
            }
        }
    }
    out
}

/// Closed-form parameter counts: conv `in*out*k^n + out`, dense `in*out + out`.
pub fn ddd2d_param_count(resolution: usize) -> usize {
    let conv = |cin: usize, cout: usize| cin * cout * 9 + cout;
    let dense = |i: usize, o: usize| i * o + o;
    let flat = 64 * (resolution / 8).pow(2);
    conv(1, 16) + conv(16, 32) + conv(32, 64) + dense(flat, 128) + dense(128, 3)
}

pub fn ddd3d_param_count(resolution: usize, seq: usize) -> usize {
    let conv = |cin: usize, cout: usize| cin * cout * 27 + cout;
    let dense = |i: usize, o: usize| i * o + o;
    let flat = 16 * (seq / 2) * (resolution / 4).pow(2);
    conv(1, 8) + conv(8, 16) + dense(flat, 64) + dense(64, 3)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Conv2D,
    Conv3D,
    MaxPool2D,
    MaxPool3D,
    ReLU,
    Flatten,
    Dense,
    Dropout,
    SoftmaxCE,
}

pub const ALL_KINDS: [Kind; 9] = [
    Kind::Conv2D,
    Kind::Conv3D,
    Kind::MaxPool2D,
    Kind::MaxPool3D,
    Kind::ReLU,
    Kind::Flatten,
    Kind::Dense,
    Kind::Dropout,
    Kind::SoftmaxCE,
];

fn uniform(rng: &mut impl Rng, n: usize, lo: f32, hi: f32) -> Vec<f32> {
    (0..n).map(|_| rng.gen_range(lo..hi)).collect()
}

/// Values bounded away from zero, so ReLU kinks are never straddled.
fn off_zero(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    (0..n)
        .map(|_| {
            let v = rng.gen_range(0.05f32..1.0);
            if rng.gen() {
                v
            } else {
                -v
            }
        })
        .collect()
}

/// Distinct values with spacing 0.01, so no pooling window has a near tie.
fn distinct(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    let mut v: Vec<f32> = (0..n).map(|i| i as f32 * 0.01 - n as f32 * 0.005).collect();
    v.shuffle(rng);
    v
}

fn random_layer(kind: Kind, rng: &mut impl Rng) -> (Layer<f32>, Vec<usize>, Vec<f32>) {
    match kind {
        Kind::Conv2D => {
            let (cin, cout) = (rng.gen_range(1..=3), rng.gen_range(1..=3));
            let k = rng.gen_range(1..=3);
            let mut conv = Conv::new2d(cin, cout, k, rng.gen_range(1..=2), rng.gen_range(0..=1));
            conv.weight = Tensor::new(conv.weight.shape().to_vec(), uniform(rng, conv.weight.len(), -1.0, 1.0)).unwrap();
            conv.bias = Tensor::new(vec![cout], uniform(rng, cout, -1.0, 1.0)).unwrap();
            let shape = vec![rng.gen_range(1..=2), cin, rng.gen_range(k..=6), rng.gen_range(k..=6)];
            let n = shape.iter().product();
            (Layer::Conv(conv), shape, uniform(rng, n, -1.0, 1.0))
        }
        Kind::Conv3D => {
            let (cin, cout) = (rng.gen_range(1..=2), rng.gen_range(1..=3));
            let kernel = [rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3)];
            let mut conv = Conv::new3d(cin, cout, kernel, rng.gen_range(1..=2), rng.gen_range(0..=1));
            conv.weight = Tensor::new(conv.weight.shape().to_vec(), uniform(rng, conv.weight.len(), -1.0, 1.0)).unwrap();
            conv.bias = Tensor::new(vec![cout], uniform(rng, cout, -1.0, 1.0)).unwrap();
            let shape = vec![
                1,
                cin,
                rng.gen_range(kernel[0]..=4),
                rng.gen_range(kernel[1]..=5),
                rng.gen_range(kernel[2]..=5),
            ];
            let n = shape.iter().product();
            (Layer::Conv(conv), shape, uniform(rng, n, -1.0, 1.0))
        }
        Kind::MaxPool2D => {
            let shape = vec![rng.gen_range(1..=2), rng.gen_range(1..=3), rng.gen_range(2..=7), rng.gen_range(2..=7)];
            let n = shape.iter().product();
            (Layer::MaxPool(MaxPool::new2d(2)), shape, distinct(rng, n))
        }
        Kind::MaxPool3D => {
            let window = if rng.gen() { [2, 2, 2] } else { [1, 2, 2] };
            let shape = vec![1, rng.gen_range(1..=2), rng.gen_range(2..=4), rng.gen_range(2..=6), rng.gen_range(2..=6)];
            let n = shape.iter().product();
            (Layer::MaxPool(MaxPool::new3d(window)), shape, distinct(rng, n))
        }
        Kind::ReLU => {
            let shape = vec![rng.gen_range(1..=4), rng.gen_range(1..=30)];
            let n = shape.iter().product();
            (Layer::Relu, shape, off_zero(rng, n))
        }
        Kind::Flatten => {
            let shape = vec![rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=5), rng.gen_range(1..=5)];
            let n = shape.iter().product();
            (Layer::Flatten, shape, uniform(rng, n, -1.0, 1.0))
        }
        Kind::Dense => {
            let (i, o) = (rng.gen_range(1..=8), rng.gen_range(1..=5));
            let mut d = Dense::new(i, o);
            d.weight = Tensor::new(vec![o, i], uniform(rng, i * o, -1.0, 1.0)).unwrap();
            d.bias = Tensor::new(vec![o], uniform(rng, o, -1.0, 1.0)).unwrap();
            let shape = vec![rng.gen_range(1..=4), i];
            let n = shape.iter().product();
            (Layer::Dense(d), shape, uniform(rng, n, -1.0, 1.0))
        }
        Kind::Dropout => {
            let shape = vec![rng.gen_range(1..=4), rng.gen_range(1..=40)];
            let n = shape.iter().product();
            (Layer::Dropout(Dropout::new(0.5).unwrap()), shape, uniform(rng, n, -1.0, 1.0))
        }
        Kind::SoftmaxCE => unreachable!("handled separately"),
    }
}

/// Relative errors of the input gradient and each parameter gradient for
/// one random instance of `kind`, checked in f32 at perturbation `h`.
pub fn layer_gradient_errors(kind: Kind, seed: u64, h: f64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    if kind == Kind::SoftmaxCE {
        let batch = rng.gen_range(1..=8);
        let logits = uniform(&mut rng, batch * 3, -2.0, 2.0);
        let labels: Vec<usize> = (0..batch).map(|_| rng.gen_range(0..3)).collect();
        let t = Tensor::new(vec![batch, 3], logits.clone()).unwrap();
        let (_, grad) = softmax_cross_entropy(&t, &labels).unwrap();
        let f = |p: &[f32]| softmax_cross_entropy(&Tensor::new(vec![batch, 3], p.to_vec()).unwrap(), &labels).unwrap().0;
        return vec![check_gradient(f, &logits, grad.data(), h).relative_error];
    }

    let (layer, in_shape, x) = random_layer(kind, &mut rng);
    let dropout_seed = rng.gen::<u64>();
    let run = |layer: &Layer<f32>, x: &[f32]| -> (Tensor<f32>, Cache<f32>) {
        let mut drng = seeded_rng(dropout_seed);
        let mut mode = Mode::Train(&mut drng);
        layer.forward(Tensor::new(in_shape.clone(), x.to_vec()).unwrap(), &mut mode).unwrap()
    };
    let (out, cache) = run(&layer, &x);
    let proj = uniform(&mut rng, out.len(), -1.0, 1.0);
    let dot = |t: &Tensor<f32>| t.data().iter().zip(&proj).map(|(&a, &b)| a as f64 * b as f64).sum::<f64>();
    let (grad_in, grad_params) = layer
        .backward(cache, Tensor::new(out.shape().to_vec(), proj.clone()).unwrap())
        .unwrap();

    let mut errs = vec![check_gradient(|p: &[f32]| dot(&run(&layer, p).0), &x, grad_in.data(), h).relative_error];
    for (pi, g) in grad_params.iter().enumerate() {
        let base: Vec<f32> = layer.params()[pi].data().to_vec();
        let f = |p: &[f32]| {
            let mut l = layer.clone();
            l.params_mut()[pi].data_mut().copy_from_slice(p);
            dot(&run(&l, &x).0)
        };
        errs.push(check_gradient(f, &base, g.data(), h).relative_error);
    }
    errs
}

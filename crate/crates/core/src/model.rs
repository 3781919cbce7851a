//! The two fixed classifier architectures and their weight containers.
//!
//! Layer dimensions are our own instantiation: small stacks of 3x3(x3)
//! convolutions, ReLU and max pooling feeding a dense head with three logits.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adam::{adam_step, AdamState, Hyperparameters};
use crate::error::{Error, Result};
use crate::layers::{Cache, Dropout, Layer, LayerSpec, MaxPool, Mode};
use crate::loss::{argmax, softmax_cross_entropy};
use crate::scalar::Scalar;
use crate::seed::{derive_seed, seeded_rng, SeededRng};
use crate::tensor::Tensor;

pub const NUM_CLASSES: usize = 3;
pub const SUPPORTED_RESOLUTIONS: [usize; 4] = [64, 96, 160, 320];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Arch {
    #[serde(rename = "DDD-2D")]
    Ddd2d,
    #[serde(rename = "DDD-3D")]
    Ddd3d,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::Ddd2d => "DDD-2D",
            Arch::Ddd3d => "DDD-3D",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DDD-2D" | "2D" => Ok(Arch::Ddd2d),
            "DDD-3D" | "3D" => Ok(Arch::Ddd3d),
            _ => Err(Error::Config(format!("unknown architecture {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    pub arch: Arch,
    /// Item shape without the batch axis.
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    pub num_classes: usize,
}

impl ModelSpec {
    /// Validates that the layers compose and end in `num_classes` logits.
    pub fn new(arch: Arch, input_shape: Vec<usize>, layers: Vec<LayerSpec>, num_classes: usize) -> Result<Self> {
        let spec = ModelSpec {
            arch,
            input_shape,
            layers,
            num_classes,
        };
        let shapes = spec.shapes()?;
        let last = shapes.last().cloned().unwrap_or_else(|| spec.input_shape.clone());
        if last != [num_classes] {
            return Err(Error::Config(format!(
                "{arch} ends in shape {last:?}, expected [{num_classes}]"
            )));
        }
        Ok(spec)
    }

    /// Output item shape after every layer.
    pub fn shapes(&self) -> Result<Vec<Vec<usize>>> {
        let mut current = self.input_shape.clone();
        let mut out = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            current = layer.output_item_shape(&current)?;
            out.push(current.clone());
        }
        Ok(out)
    }

    /// (layer index, parameter name, shape) in storage order.
    pub fn param_layout(&self) -> Vec<(usize, &'static str, Vec<usize>)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.param_shapes().into_iter().map(move |(n, s)| (i, n, s)))
            .collect()
    }

    pub fn param_count(&self) -> usize {
        self.param_layout().iter().map(|(_, _, s)| s.iter().product::<usize>()).sum()
    }
}

fn check_resolution(resolution: usize) -> Result<()> {
    if !SUPPORTED_RESOLUTIONS.contains(&resolution) {
        return Err(Error::Config(format!(
            "resolution {resolution} unsupported; expected one of {SUPPORTED_RESOLUTIONS:?}"
        )));
    }
    Ok(())
}

/// Frame classifier over `1 x resolution x resolution` grayscale input.
pub fn build_ddd2d(resolution: usize) -> Result<ModelSpec> {
    check_resolution(resolution)?;
    let flat = 64 * (resolution / 8) * (resolution / 8);
    ModelSpec::new(
        Arch::Ddd2d,
        vec![1, resolution, resolution],
        vec![
            LayerSpec::conv2d(1, 16, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new2d(2)),
            LayerSpec::conv2d(16, 32, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new2d(2)),
            LayerSpec::conv2d(32, 64, 3, 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new2d(2)),
            LayerSpec::Flatten,
            LayerSpec::Dense {
                in_features: flat,
                out_features: 128,
            },
            LayerSpec::Relu,
            LayerSpec::Dropout(Dropout::new(0.5)?),
            LayerSpec::Dense {
                in_features: 128,
                out_features: NUM_CLASSES,
            },
        ],
        NUM_CLASSES,
    )
}

/// Clip classifier over `1 x sequence_length x resolution x resolution`.
pub fn build_ddd3d(resolution: usize, sequence_length: usize) -> Result<ModelSpec> {
    check_resolution(resolution)?;
    if sequence_length < 2 {
        return Err(Error::Config(format!(
            "sequence length {sequence_length} too short; temporal pooling needs at least 2 frames"
        )));
    }
    let flat = 16 * (sequence_length / 2) * (resolution / 4) * (resolution / 4);
    ModelSpec::new(
        Arch::Ddd3d,
        vec![1, sequence_length, resolution, resolution],
        vec![
            LayerSpec::conv3d(1, 8, [3, 3, 3], 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new3d([1, 2, 2])),
            LayerSpec::conv3d(8, 16, [3, 3, 3], 1, 1),
            LayerSpec::Relu,
            LayerSpec::MaxPool(MaxPool::new3d([2, 2, 2])),
            LayerSpec::Flatten,
            LayerSpec::Dense {
                in_features: flat,
                out_features: 64,
            },
            LayerSpec::Relu,
            LayerSpec::Dense {
                in_features: 64,
                out_features: NUM_CLASSES,
            },
        ],
        NUM_CLASSES,
    )
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightEntry<S> {
    pub layer: usize,
    pub param: String,
    pub tensor: Tensor<S>,
}

impl<S> WeightEntry<S> {
    /// Flat name, `"<layer>.<param>"`.
    pub fn name(&self) -> String {
        format!("{}.{}", self.layer, self.param)
    }
}

/// Ordered parameter tensors of one model; the unit exchanged between
/// server and clients.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelWeights<S = f32> {
    pub arch: Arch,
    pub entries: Vec<WeightEntry<S>>,
}

impl<S: Scalar> ModelWeights<S> {
    /// Rebuilds weights from flat `"<layer>.<param>"` names.
    pub fn from_named(arch: Arch, named: Vec<(String, Tensor<S>)>) -> Result<Self> {
        let entries = named
            .into_iter()
            .map(|(name, tensor)| {
                let (layer, param) = name
                    .split_once('.')
                    .and_then(|(l, p)| Some((l.parse().ok()?, p.to_string())))
                    .ok_or_else(|| Error::IncompatibleWeights(format!("malformed tensor name {name:?}")))?;
                Ok(WeightEntry { layer, param, tensor })
            })
            .collect::<Result<_>>()?;
        Ok(ModelWeights { arch, entries })
    }

    pub fn into_named(self) -> Vec<(String, Tensor<S>)> {
        self.entries.into_iter().map(|e| (e.name(), e.tensor)).collect()
    }

    pub fn param_count(&self) -> usize {
        self.entries.iter().map(|e| e.tensor.len()).sum()
    }

    /// Same architecture, names, order and shapes.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.arch != other.arch {
            return Err(Error::IncompatibleWeights(format!("architecture {} vs {}", self.arch, other.arch)));
        }
        if self.entries.len() != other.entries.len() {
            return Err(Error::IncompatibleWeights(format!(
                "{} tensors vs {}",
                self.entries.len(),
                other.entries.len()
            )));
        }
        for (a, b) in self.entries.iter().zip(&other.entries) {
            if a.layer != b.layer || a.param != b.param || a.tensor.shape() != b.tensor.shape() {
                return Err(Error::IncompatibleWeights(format!(
                    "{} {:?} vs {} {:?}",
                    a.name(),
                    a.tensor.shape(),
                    b.name(),
                    b.tensor.shape()
                )));
            }
        }
        Ok(())
    }

    pub fn map_tensors(&self, f: impl Fn(&Tensor<S>) -> Tensor<S>) -> Self {
        ModelWeights {
            arch: self.arch,
            entries: self
                .entries
                .iter()
                .map(|e| WeightEntry {
                    layer: e.layer,
                    param: e.param.clone(),
                    tensor: f(&e.tensor),
                })
                .collect(),
        }
    }
}

/// Loss and accuracy bookkeeping for one training batch.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BatchStats {
    pub loss: f64,
    pub correct: usize,
    pub count: usize,
}

/// Per-layer forward caches for one batch.
pub struct Trace<S> {
    caches: Vec<Cache<S>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Model<S = f32> {
    spec: ModelSpec,
    layers: Vec<Layer<S>>,
}

impl<S: Scalar> Model<S> {
    /// Each layer draws its initial parameters from its own generator,
    /// seeded by `(seed, layer index)`.
    pub fn init(spec: ModelSpec, seed: u64) -> Self {
        let layers = spec
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| l.init(&mut seeded_rng(derive_seed(seed, &[i as u64]))))
            .collect();
        Model { spec, layers }
    }

    pub fn zeros(spec: ModelSpec) -> Self {
        let layers = spec.layers.iter().map(|l| l.zeros()).collect();
        Model { spec, layers }
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn layers(&self) -> &[Layer<S>] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer<S>] {
        &mut self.layers
    }

    pub fn params(&self) -> Vec<&Tensor<S>> {
        self.layers.iter().flat_map(|l| l.params()).collect()
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        self.layers.iter_mut().flat_map(|l| l.params_mut()).collect()
    }

    pub fn new_optimizer(&self) -> AdamState<S> {
        AdamState::new(self.params())
    }

    fn check_input(&self, x: &Tensor<S>) -> Result<()> {
        let item = &x.shape()[1.min(x.rank())..];
        if x.rank() != self.spec.input_shape.len() + 1 {
            return Err(Error::Rank {
                op: "model input",
                expected: self.spec.input_shape.len() + 1,
                found: x.rank(),
            });
        }
        for (axis, (&want, &got)) in self.spec.input_shape.iter().zip(item).enumerate() {
            if want != got {
                return Err(Error::dim("model input", format!("axis {}", axis + 1), want, got));
            }
        }
        Ok(())
    }

    /// Evaluation-mode logits (dropout disabled).
    pub fn forward(&self, x: &Tensor<S>) -> Result<Tensor<S>> {
        self.check_input(x)?;
        let mut mode = Mode::Eval;
        let mut h = x.clone();
        for layer in &self.layers {
            h = layer.forward(h, &mut mode)?.0;
        }
        Ok(h)
    }

    pub fn forward_train(&self, x: Tensor<S>, rng: &mut SeededRng) -> Result<(Tensor<S>, Trace<S>)> {
        self.check_input(&x)?;
        let mut mode = Mode::Train(rng);
        let mut caches = Vec::with_capacity(self.layers.len());
        let mut h = x;
        for layer in &self.layers {
            let (out, cache) = layer.forward(h, &mut mode)?;
            caches.push(cache);
            h = out;
        }
        Ok((h, Trace { caches }))
    }

    /// Parameter gradients in `params()` order.
    pub fn backward(&self, trace: Trace<S>, grad_logits: Tensor<S>) -> Result<Vec<Tensor<S>>> {
        let mut per_layer = Vec::with_capacity(self.layers.len());
        let mut g = grad_logits;
        for (i, (layer, cache)) in self.layers.iter().zip(trace.caches).enumerate().rev() {
            let (gin, gp) = layer.backward_with(cache, g, i > 0)?;
            per_layer.push(gp);
            g = gin;
        }
        Ok(per_layer.into_iter().rev().flatten().collect())
    }

    /// Forward, loss, backward and one Adam step on a single batch.
    pub fn train_batch(
        &mut self,
        x: Tensor<S>,
        labels: &[usize],
        optimizer: &mut AdamState<S>,
        hyper: &Hyperparameters,
        rng: &mut SeededRng,
    ) -> Result<BatchStats> {
        let (logits, trace) = self.forward_train(x, rng)?;
        let (loss, grad) = softmax_cross_entropy(&logits, labels)?;
        if !loss.is_finite() {
            return Err(Error::Diverged(format!("non-finite loss {loss}")));
        }
        let correct = logits
            .data()
            .chunks(self.spec.num_classes)
            .zip(labels)
            .filter(|(row, &l)| argmax(row) == l)
            .count();
        let grads = self.backward(trace, grad)?;
        adam_step(&mut self.params_mut(), &grads, optimizer, hyper)?;
        Ok(BatchStats {
            loss,
            correct,
            count: labels.len(),
        })
    }

    pub fn weights(&self) -> ModelWeights<S> {
        let entries = self
            .spec
            .param_layout()
            .into_iter()
            .zip(self.params())
            .map(|((layer, name, _), t)| WeightEntry {
                layer,
                param: name.to_string(),
                tensor: t.clone(),
            })
            .collect();
        ModelWeights {
            arch: self.spec.arch,
            entries,
        }
    }

    pub fn load_weights(&mut self, weights: &ModelWeights<S>) -> Result<()> {
        self.weights().check_compatible(weights)?;
        for (p, e) in self.params_mut().into_iter().zip(&weights.entries) {
            p.data_mut().copy_from_slice(e.tensor.data());
        }
        Ok(())
    }
}

//! Layer kernels and the tagged layer type the models are built from.

pub mod activation;
pub mod conv;
pub mod dense;
pub mod pool;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use activation::{dropout, dropout_backward, relu, relu_backward, Dropout};
pub use conv::{conv_backward, conv_forward, Conv, ConvGrads};
pub use dense::{dense_backward, dense_forward, Dense, DenseGrads};
pub use pool::{maxpool_backward, maxpool_forward, MaxPool, PoolOutput};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::seed::SeededRng;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
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

/// Layer geometry without parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum LayerSpec {
    Conv {
        spatial_rank: usize,
        in_channels: usize,
        out_channels: usize,
        kernel: [usize; 3],
        stride: [usize; 3],
        pad: [usize; 3],
    },
    MaxPool(MaxPool),
    Relu,
    Flatten,
    Dense {
        in_features: usize,
        out_features: usize,
    },
    Dropout(Dropout),
}

impl LayerSpec {
    pub fn conv2d(cin: usize, cout: usize, kernel: usize, stride: usize, pad: usize) -> Self {
        LayerSpec::Conv {
            spatial_rank: 2,
            in_channels: cin,
            out_channels: cout,
            kernel: [1, kernel, kernel],
            stride: [1, stride, stride],
            pad: [0, pad, pad],
        }
    }

    pub fn conv3d(cin: usize, cout: usize, kernel: [usize; 3], stride: usize, pad: usize) -> Self {
        LayerSpec::Conv {
            spatial_rank: 3,
            in_channels: cin,
            out_channels: cout,
            kernel,
            stride: [stride; 3],
            pad: [pad; 3],
        }
    }

    pub fn kind(&self) -> LayerKind {
        match self {
            LayerSpec::Conv { spatial_rank: 3, .. } => LayerKind::Conv3D,
            LayerSpec::Conv { .. } => LayerKind::Conv2D,
            LayerSpec::MaxPool(p) if p.spatial_rank == 3 => LayerKind::MaxPool3D,
            LayerSpec::MaxPool(_) => LayerKind::MaxPool2D,
            LayerSpec::Relu => LayerKind::ReLU,
            LayerSpec::Flatten => LayerKind::Flatten,
            LayerSpec::Dense { .. } => LayerKind::Dense,
            LayerSpec::Dropout(_) => LayerKind::Dropout,
        }
    }

    /// Named parameter shapes in storage order.
    pub fn param_shapes(&self) -> Vec<(&'static str, Vec<usize>)> {
        match *self {
            LayerSpec::Conv {
                spatial_rank,
                in_channels,
                out_channels,
                kernel,
                ..
            } => vec![
                ("weight", Conv::<f32>::weight_shape_for(spatial_rank, in_channels, out_channels, kernel)),
                ("bias", vec![out_channels]),
            ],
            LayerSpec::Dense {
                in_features,
                out_features,
            } => vec![("weight", vec![out_features, in_features]), ("bias", vec![out_features])],
            _ => Vec::new(),
        }
    }

    fn fan_in(&self) -> usize {
        match *self {
            LayerSpec::Conv { in_channels, kernel, .. } => in_channels * kernel.iter().product::<usize>(),
            LayerSpec::Dense { in_features, .. } => in_features,
            _ => 0,
        }
    }

    /// Shape propagation for one batch item.
    pub fn output_item_shape(&self, item: &[usize]) -> Result<Vec<usize>> {
        match self {
            LayerSpec::Conv { .. } => self.zero_layer::<f32>().as_conv().unwrap().output_item_shape(item),
            LayerSpec::MaxPool(p) => p.output_item_shape(item),
            LayerSpec::Relu | LayerSpec::Dropout(_) => Ok(item.to_vec()),
            LayerSpec::Flatten => Ok(vec![item.iter().product()]),
            LayerSpec::Dense {
                in_features,
                out_features,
            } => {
                if item.len() != 1 {
                    return Err(Error::Rank {
                        op: "dense",
                        expected: 2,
                        found: item.len() + 1,
                    });
                }
                if item[0] != *in_features {
                    return Err(Error::dim("dense", "features", *in_features, item[0]));
                }
                Ok(vec![*out_features])
            }
        }
    }

    fn zero_layer<S: Scalar>(&self) -> Layer<S> {
        match *self {
            LayerSpec::Conv {
                spatial_rank,
                in_channels,
                out_channels,
                kernel,
                stride,
                pad,
            } => Layer::Conv(Conv::with_geometry(spatial_rank, in_channels, out_channels, kernel, stride, pad)),
            LayerSpec::MaxPool(p) => Layer::MaxPool(p),
            LayerSpec::Relu => Layer::Relu,
            LayerSpec::Flatten => Layer::Flatten,
            LayerSpec::Dense {
                in_features,
                out_features,
            } => Layer::Dense(Dense::new(in_features, out_features)),
            LayerSpec::Dropout(d) => Layer::Dropout(d),
        }
    }

    /// Builds the layer with parameters drawn uniformly from
    /// `±sqrt(1 / fan_in)`.
    pub fn init<S: Scalar>(&self, rng: &mut SeededRng) -> Layer<S> {
        let mut layer = self.zero_layer::<S>();
        let fan_in = self.fan_in();
        if fan_in > 0 {
            let bound = (1.0 / fan_in as f64).sqrt();
            for p in layer.params_mut() {
                for v in p.data_mut() {
                    *v = S::from_f64_lossy(rng.gen_range(-bound..bound));
                }
            }
        }
        layer
    }

    pub fn zeros<S: Scalar>(&self) -> Layer<S> {
        self.zero_layer()
    }
}

/// Forward-pass mode. Training mode carries the generator dropout draws from.
pub enum Mode<'a> {
    Eval,
    Train(&'a mut SeededRng),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer<S> {
    Conv(Conv<S>),
    MaxPool(MaxPool),
    Relu,
    Flatten,
    Dense(Dense<S>),
    Dropout(Dropout),
}

/// What a layer keeps from its forward pass for the backward pass.
#[derive(Debug)]
pub enum Cache<S> {
    Input(Tensor<S>),
    /// Positions where a ReLU input was positive.
    Active(Vec<bool>),
    Pool { argmax: Vec<usize>, input_shape: Vec<usize> },
    Shape(Vec<usize>),
    Mask(Option<Vec<S>>),
}

impl<S: Scalar> Layer<S> {
    pub fn as_conv(&self) -> Option<&Conv<S>> {
        match self {
            Layer::Conv(c) => Some(c),
            _ => None,
        }
    }

    pub fn params(&self) -> Vec<&Tensor<S>> {
        match self {
            Layer::Conv(c) => vec![&c.weight, &c.bias],
            Layer::Dense(d) => vec![&d.weight, &d.bias],
            _ => Vec::new(),
        }
    }

    pub fn params_mut(&mut self) -> Vec<&mut Tensor<S>> {
        match self {
            Layer::Conv(c) => vec![&mut c.weight, &mut c.bias],
            Layer::Dense(d) => vec![&mut d.weight, &mut d.bias],
            _ => Vec::new(),
        }
    }

    pub fn forward(&self, input: Tensor<S>, mode: &mut Mode<'_>) -> Result<(Tensor<S>, Cache<S>)> {
        Ok(match self {
            Layer::Conv(c) => (conv_forward(&input, c)?, Cache::Input(input)),
            Layer::Dense(d) => (dense_forward(&input, d)?, Cache::Input(input)),
            Layer::Relu => {
                let mut out = input;
                let mut mask = Vec::with_capacity(out.len());
                for v in out.data_mut() {
                    let on = *v > S::zero();
                    if !on {
                        *v = S::zero();
                    }
                    mask.push(on);
                }
                (out, Cache::Active(mask))
            }
            Layer::MaxPool(p) => {
                let out = maxpool_forward(&input, p)?;
                (
                    out.output,
                    Cache::Pool {
                        argmax: out.argmax,
                        input_shape: input.shape().to_vec(),
                    },
                )
            }
            Layer::Flatten => {
                let shape = input.shape().to_vec();
                let flat = [shape[0], input.item_len()];
                (input.reshape(&flat)?, Cache::Shape(shape))
            }
            Layer::Dropout(d) => match mode {
                Mode::Eval => (input, Cache::Mask(None)),
                Mode::Train(rng) => {
                    let (out, mask) = dropout(&input, d.p, &mut **rng, true);
                    (out, Cache::Mask(mask))
                }
            },
        })
    }

    /// Returns the input gradient and parameter gradients in `params()` order.
    pub fn backward(&self, cache: Cache<S>, grad_out: Tensor<S>) -> Result<(Tensor<S>, Vec<Tensor<S>>)> {
        self.backward_with(cache, grad_out, true)
    }

    /// Like [`Layer::backward`]; when `need_input` is false a convolution may
    /// skip its input gradient, which is then returned as zeros.
    pub fn backward_with(
        &self,
        cache: Cache<S>,
        grad_out: Tensor<S>,
        need_input: bool,
    ) -> Result<(Tensor<S>, Vec<Tensor<S>>)> {
        match (self, cache) {
            (Layer::Conv(c), Cache::Input(x)) => {
                let g = conv::conv_backward_impl(&x, c, &grad_out, need_input)?;
                Ok((g.input, vec![g.weight, g.bias]))
            }
            (Layer::Dense(d), Cache::Input(x)) => {
                let g = dense_backward(&x, d, &grad_out)?;
                Ok((g.input, vec![g.weight, g.bias]))
            }
            (Layer::Relu, Cache::Active(mask)) => {
                if mask.len() != grad_out.len() {
                    return Err(Error::dim("relu", "elements", mask.len(), grad_out.len()));
                }
                let mut g = grad_out;
                for (v, &on) in g.data_mut().iter_mut().zip(&mask) {
                    if !on {
                        *v = S::zero();
                    }
                }
                Ok((g, Vec::new()))
            }
            (Layer::MaxPool(_), Cache::Pool { argmax, input_shape }) => {
                Ok((maxpool_backward(&grad_out, &argmax, &input_shape)?, Vec::new()))
            }
            (Layer::Flatten, Cache::Shape(shape)) => Ok((grad_out.reshape(&shape)?, Vec::new())),
            (Layer::Dropout(_), Cache::Mask(mask)) => Ok((dropout_backward(&grad_out, mask.as_deref()), Vec::new())),
            _ => unreachable!("cache variant always matches the layer that produced it"),
        }
    }
}

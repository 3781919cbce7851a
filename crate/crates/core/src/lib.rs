//! Tensor and neural-network kernels for small convolutional classifiers.
//!
//! Everything numeric is generic over [`Scalar`] (implemented for `f32` and
//! `f64`). Training runs in `f32`; `f64` instantiations exist mostly so that
//! gradient checks can be run with tight tolerances. The aliases at the
//! bottom of this file name the concrete types used by the rest of the
//! workspace.

pub mod adam;
pub mod error;
pub mod gradcheck;
pub mod layers;
pub mod loss;
pub mod model;
pub mod scalar;
pub mod seed;
pub mod tensor;

pub use adam::{adam_step, AdamState, Hyperparameters};
pub use error::{Error, Result};
pub use layers::{Conv, Dense, Dropout, Layer, LayerKind, LayerSpec, MaxPool, Mode, PoolOutput};
pub use loss::{argmax, softmax, softmax_cross_entropy};
pub use model::{
    build_ddd2d, build_ddd3d, Arch, BatchStats, Model, ModelSpec, ModelWeights, WeightEntry,
    NUM_CLASSES, SUPPORTED_RESOLUTIONS,
};
pub use scalar::Scalar;
pub use seed::{derive_seed, seeded_rng, SeededRng};
pub use tensor::Tensor;

pub type Tensor32 = Tensor<f32>;
pub type Tensor64 = Tensor<f64>;
pub type Model32 = Model<f32>;
pub type Model64 = Model<f64>;
pub type Weights32 = ModelWeights<f32>;
pub type Weights64 = ModelWeights<f64>;
pub type AdamState32 = AdamState<f32>;

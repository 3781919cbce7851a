use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

pub fn relu<S: Scalar>(input: &Tensor<S>) -> Tensor<S> {
    input.map(|v| if v > S::zero() { v } else { S::zero() })
}

pub fn relu_backward<S: Scalar>(input: &Tensor<S>, grad_out: &Tensor<S>) -> Result<Tensor<S>> {
    grad_out.expect_shape("relu", input.shape())?;
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > S::zero() { g } else { S::zero() })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

/// Inverted dropout: survivors are scaled by `1 / (1 - p)` during training.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dropout {
    pub p: f64,
}

impl Dropout {
    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Config(format!("dropout probability {p} outside [0, 1)")));
        }
        Ok(Dropout { p })
    }
}

/// Returns the output and, in training mode, the per-element multiplier
/// needed by [`dropout_backward`].
pub fn dropout<S: Scalar, R: Rng + ?Sized>(
    input: &Tensor<S>,
    p: f64,
    rng: &mut R,
    training: bool,
) -> (Tensor<S>, Option<Vec<S>>) {
    if !training || p == 0.0 {
        return (input.clone(), None);
    }
    let keep = S::from_f64_lossy(1.0 / (1.0 - p));
    let mask: Vec<S> = (0..input.len())
        .map(|_| if rng.gen::<f64>() >= p { keep } else { S::zero() })
        .collect();
    let data = input.data().iter().zip(&mask).map(|(&x, &m)| x * m).collect();
    (Tensor::new(input.shape().to_vec(), data).expect("same shape"), Some(mask))
}

pub fn dropout_backward<S: Scalar>(grad_out: &Tensor<S>, mask: Option<&[S]>) -> Tensor<S> {
    match mask {
        None => grad_out.clone(),
        Some(mask) => {
            let data = grad_out.data().iter().zip(mask).map(|(&g, &m)| g * m).collect();
            Tensor::new(grad_out.shape().to_vec(), data).expect("same shape")
        }
    }
}

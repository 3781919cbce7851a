use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Fully connected layer, `y = x W^T + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense<S> {
    pub in_features: usize,
    pub out_features: usize,
    /// (out_features, in_features)
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
}

#[derive(Clone, Debug)]
pub struct DenseGrads<S> {
    pub input: Tensor<S>,
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
}

impl<S: Scalar> Dense<S> {
    pub fn new(in_features: usize, out_features: usize) -> Self {
        Dense {
            in_features,
            out_features,
            weight: Tensor::zeros(&[out_features, in_features]),
            bias: Tensor::zeros(&[out_features]),
        }
    }

    fn check(&self, input: &Tensor<S>) -> Result<usize> {
        self.weight.expect_shape("dense", &[self.out_features, self.in_features])?;
        self.bias.expect_shape("dense", &[self.out_features])?;
        input.expect_rank("dense", 2)?;
        if input.shape()[1] != self.in_features {
            return Err(Error::dim("dense", "features", self.in_features, input.shape()[1]));
        }
        Ok(input.shape()[0])
    }
}

pub fn dense_forward<S: Scalar>(input: &Tensor<S>, layer: &Dense<S>) -> Result<Tensor<S>> {
    let batch = layer.check(input)?;
    let mut out = Tensor::zeros(&[batch, layer.out_features]);
    for row in out.data_mut().chunks_mut(layer.out_features) {
        row.copy_from_slice(layer.bias.data());
    }
    S::gemm(
        false,
        true,
        batch,
        layer.out_features,
        layer.in_features,
        S::one(),
        input.data(),
        layer.weight.data(),
        S::one(),
        out.data_mut(),
    );
    Ok(out)
}

pub fn dense_backward<S: Scalar>(input: &Tensor<S>, layer: &Dense<S>, grad_out: &Tensor<S>) -> Result<DenseGrads<S>> {
    let batch = layer.check(input)?;
    grad_out.expect_shape("dense", &[batch, layer.out_features])?;
    let (n_in, n_out) = (layer.in_features, layer.out_features);

    let mut grad_input = Tensor::zeros(&[batch, n_in]);
    S::gemm(false, false, batch, n_in, n_out, S::one(), grad_out.data(), layer.weight.data(), S::zero(), grad_input.data_mut());
    let mut grad_weight = Tensor::zeros(&[n_out, n_in]);
    S::gemm(true, false, n_out, n_in, batch, S::one(), grad_out.data(), input.data(), S::zero(), grad_weight.data_mut());
    let mut bias = vec![0f64; n_out];
    for row in grad_out.data().chunks(n_out) {
        for (acc, g) in bias.iter_mut().zip(row) {
            *acc += g.to_f64_lossy();
        }
    }
    Ok(DenseGrads {
        input: grad_input,
        weight: grad_weight,
        bias: Tensor::new(vec![n_out], bias.into_iter().map(S::from_f64_lossy).collect())?,
    })
}

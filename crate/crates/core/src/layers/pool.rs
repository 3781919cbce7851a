use crate::error::{Error, Result};
use crate::layers::conv::{join_item_shape, split_item_shape};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const AXES: [&str; 3] = ["depth", "height", "width"];

/// Max pooling with stride equal to the window. 2D layers have window depth 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxPool {
    pub spatial_rank: usize,
    pub window: [usize; 3],
}

#[derive(Clone, Debug)]
pub struct PoolOutput<S> {
    pub output: Tensor<S>,
    /// Flat input index that produced each output element.
    pub argmax: Vec<usize>,
}

impl MaxPool {
    pub fn new2d(window: usize) -> Self {
        MaxPool {
            spatial_rank: 2,
            window: [1, window, window],
        }
    }

    pub fn new3d(window: [usize; 3]) -> Self {
        MaxPool { spatial_rank: 3, window }
    }

    fn op(&self) -> &'static str {
        if self.spatial_rank == 3 {
            "maxpool3d"
        } else {
            "maxpool2d"
        }
    }

    fn geometry(&self, item: &[usize]) -> Result<(usize, [usize; 3], [usize; 3])> {
        let (channels, dims) = split_item_shape(self.op(), self.spatial_rank, item)?;
        let mut out = [0; 3];
        for a in 0..3 {
            if self.window[a] == 0 || self.window[a] > dims[a] {
                return Err(Error::dim(self.op(), AXES[a], self.window[a], dims[a]));
            }
            out[a] = dims[a] / self.window[a];
        }
        Ok((channels, dims, out))
    }

    pub fn output_item_shape(&self, item: &[usize]) -> Result<Vec<usize>> {
        let (c, _, out) = self.geometry(item)?;
        Ok(join_item_shape(self.spatial_rank, c, out))
    }
}

pub fn maxpool_forward<S: Scalar>(input: &Tensor<S>, layer: &MaxPool) -> Result<PoolOutput<S>> {
    input.expect_rank(layer.op(), layer.spatial_rank + 2)?;
    let batch = input.shape()[0];
    let (channels, dims, out) = layer.geometry(&input.shape()[1..])?;
    let [wd, wh, ww] = layer.window;
    let plane = dims[0] * dims[1] * dims[2];
    let mut shape = vec![batch];
    shape.extend(join_item_shape(layer.spatial_rank, channels, out));
    let n_out: usize = shape.iter().product();
    let mut values = vec![S::zero(); n_out];
    let mut argmax = vec![0usize; n_out];
    let x = input.data();
    for pl in 0..batch * channels {
        let base = pl * plane;
        for z in 0..out[0] {
            for y in 0..out[1] {
                let o = ((pl * out[0] + z) * out[1] + y) * out[2];
                let vals = &mut values[o..o + out[2]];
                let idxs = &mut argmax[o..o + out[2]];
                let mut first = true;
                // candidates are visited in (depth, row, column) window order;
                // strict > keeps the first maximum
                for a in 0..wd {
                    for b in 0..wh {
                        let row = base + ((z * wd + a) * dims[1] + y * wh + b) * dims[2];
                        for e in 0..ww {
                            for (xo, (v, i)) in vals.iter_mut().zip(idxs.iter_mut()).enumerate() {
                                let idx = row + xo * ww + e;
                                let cand = x[idx];
                                if first || cand > *v {
                                    *v = cand;
                                    *i = idx;
                                }
                            }
                            first = false;
                        }
                    }
                }
            }
        }
    }
    Ok(PoolOutput {
        output: Tensor::new(shape, values)?,
        argmax,
    })
}

pub fn maxpool_backward<S: Scalar>(grad_out: &Tensor<S>, argmax: &[usize], input_shape: &[usize]) -> Result<Tensor<S>> {
    if grad_out.len() != argmax.len() {
        return Err(Error::dim("maxpool_backward", "elements", argmax.len(), grad_out.len()));
    }
    let mut grad = Tensor::zeros(input_shape);
    let gd = grad.data_mut();
    for (&idx, &g) in argmax.iter().zip(grad_out.data()) {
        gd[idx] = gd[idx] + g;
    }
    Ok(grad)
}

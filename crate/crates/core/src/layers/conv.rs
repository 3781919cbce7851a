//! 2D and 3D convolution (cross-correlation, no kernel flip).
//!
//! Both ranks share one implementation: a 2D layer is a 3D layer whose depth
//! axis has kernel 1, stride 1 and no padding, and whose tensors simply omit
//! that axis. The kernels lower each batch item to a column matrix and run a
//! single GEMM.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

const AXES: [&str; 3] = ["depth", "height", "width"];

#[derive(Clone, Debug, PartialEq)]
pub struct Conv<S> {
    pub spatial_rank: usize,
    pub in_channels: usize,
    pub out_channels: usize,
    /// (depth, height, width); depth is 1 for 2D layers.
    pub kernel: [usize; 3],
    pub stride: [usize; 3],
    pub pad: [usize; 3],
    /// (out_channels, in_channels, k...)
    pub weight: Tensor<S>,
    /// (out_channels)
    pub bias: Tensor<S>,
}

#[derive(Clone, Debug)]
pub struct ConvGrads<S> {
    pub input: Tensor<S>,
    pub weight: Tensor<S>,
    pub bias: Tensor<S>,
}

/// Output extent along one axis, or a dimension error naming the axis.
pub(crate) fn conv_extent(
    op: &'static str,
    axis: &str,
    input: usize,
    kernel: usize,
    stride: usize,
    pad: usize,
) -> Result<usize> {
    if input + 2 * pad < kernel {
        return Err(Error::dim(op, axis, kernel, input + 2 * pad));
    }
    Ok((input + 2 * pad - kernel) / stride + 1)
}

/// Splits an item shape (C, [D,] H, W) into (C, [D, H, W]).
pub(crate) fn split_item_shape(op: &'static str, spatial_rank: usize, item: &[usize]) -> Result<(usize, [usize; 3])> {
    if item.len() != spatial_rank + 1 {
        return Err(Error::Rank {
            op,
            expected: spatial_rank + 2,
            found: item.len() + 1,
        });
    }
    let dims = if spatial_rank == 3 {
        [item[1], item[2], item[3]]
    } else {
        [1, item[1], item[2]]
    };
    Ok((item[0], dims))
}

pub(crate) fn join_item_shape(spatial_rank: usize, channels: usize, dims: [usize; 3]) -> Vec<usize> {
    if spatial_rank == 3 {
        vec![channels, dims[0], dims[1], dims[2]]
    } else {
        vec![channels, dims[1], dims[2]]
    }
}

impl<S: Scalar> Conv<S> {
    pub fn new2d(in_channels: usize, out_channels: usize, kernel: usize, stride: usize, pad: usize) -> Self {
        Self::with_geometry(2, in_channels, out_channels, [1, kernel, kernel], [1, stride, stride], [0, pad, pad])
    }

    pub fn new3d(in_channels: usize, out_channels: usize, kernel: [usize; 3], stride: usize, pad: usize) -> Self {
        Self::with_geometry(3, in_channels, out_channels, kernel, [stride; 3], [pad; 3])
    }

    /// Zero-initialised layer with the given geometry.
    pub fn with_geometry(
        spatial_rank: usize,
        in_channels: usize,
        out_channels: usize,
        kernel: [usize; 3],
        stride: [usize; 3],
        pad: [usize; 3],
    ) -> Self {
        assert!(spatial_rank == 2 || spatial_rank == 3, "conv spatial rank must be 2 or 3");
        let weight = Tensor::zeros(&Self::weight_shape_for(spatial_rank, in_channels, out_channels, kernel));
        Conv {
            spatial_rank,
            in_channels,
            out_channels,
            kernel,
            stride,
            pad,
            weight,
            bias: Tensor::zeros(&[out_channels]),
        }
    }

    pub(crate) fn weight_shape_for(spatial_rank: usize, cin: usize, cout: usize, kernel: [usize; 3]) -> Vec<usize> {
        let mut shape = vec![cout, cin];
        shape.extend_from_slice(&kernel[3 - spatial_rank..]);
        shape
    }

    fn op(&self) -> &'static str {
        if self.spatial_rank == 3 {
            "conv3d"
        } else {
            "conv2d"
        }
    }

    fn patch_len(&self) -> usize {
        self.in_channels * self.kernel.iter().product::<usize>()
    }

    /// Output item shape for an input item shape (no batch axis).
    pub fn output_item_shape(&self, item: &[usize]) -> Result<Vec<usize>> {
        let (_, out) = self.geometry(item)?;
        Ok(join_item_shape(self.spatial_rank, self.out_channels, out))
    }

    fn geometry(&self, item: &[usize]) -> Result<([usize; 3], [usize; 3])> {
        let op = self.op();
        let (channels, dims) = split_item_shape(op, self.spatial_rank, item)?;
        if channels != self.in_channels {
            return Err(Error::dim(op, "channels", self.in_channels, channels));
        }
        let mut out = [0; 3];
        for a in 0..3 {
            out[a] = conv_extent(op, AXES[a], dims[a], self.kernel[a], self.stride[a], self.pad[a])?;
        }
        Ok((dims, out))
    }

    fn check_params(&self) -> Result<()> {
        let op = self.op();
        self.weight.expect_shape(
            op,
            &Self::weight_shape_for(self.spatial_rank, self.in_channels, self.out_channels, self.kernel),
        )?;
        self.bias.expect_shape(op, &[self.out_channels])
    }

    /// Output columns `lo..hi` along width read in-bounds input for kernel
    /// offset `e`.
    fn valid_cols(&self, e: usize, width: usize, out_w: usize) -> (usize, usize) {
        let (s, p) = (self.stride[2], self.pad[2]);
        // smallest xo with xo*s + e >= p
        let lo = if e >= p { 0 } else { (p - e).div_ceil(s) };
        // largest xo with xo*s + e - p < width
        let hi = if width + p > e { ((width + p - e - 1) / s + 1).min(out_w) } else { 0 };
        (lo.min(hi), hi)
    }

    /// Lowers one batch item into a (patch_len x out_positions) matrix.
    fn im2col(&self, x: &[S], dims: [usize; 3], out: [usize; 3], cols: &mut [S]) {
        let [kd, kh, kw] = self.kernel;
        let positions = out[0] * out[1] * out[2];
        let sw = self.stride[2];
        let mut row = 0;
        for c in 0..self.in_channels {
            let plane = &x[c * dims[0] * dims[1] * dims[2]..];
            for a in 0..kd {
                for b in 0..kh {
                    for e in 0..kw {
                        let dst = &mut cols[row * positions..(row + 1) * positions];
                        let (lo, hi) = self.valid_cols(e, dims[2], out[2]);
                        for z in 0..out[0] {
                            let iz = (z * self.stride[0] + a) as isize - self.pad[0] as isize;
                            for y in 0..out[1] {
                                let iy = (y * self.stride[1] + b) as isize - self.pad[1] as isize;
                                let line = &mut dst[(z * out[1] + y) * out[2]..(z * out[1] + y + 1) * out[2]];
                                if iz < 0 || iz as usize >= dims[0] || iy < 0 || iy as usize >= dims[1] {
                                    line.fill(S::zero());
                                    continue;
                                }
                                line[..lo].fill(S::zero());
                                line[hi..].fill(S::zero());
                                let src_row = (iz as usize * dims[1] + iy as usize) * dims[2];
                                let first = src_row + lo * sw + e - self.pad[2];
                                if sw == 1 {
                                    line[lo..hi].copy_from_slice(&plane[first..first + hi - lo]);
                                } else {
                                    for (i, v) in line[lo..hi].iter_mut().enumerate() {
                                        *v = plane[first + i * sw];
                                    }
                                }
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
    }

    /// Scatter-adds a column matrix back onto one batch item.
    fn col2im(&self, cols: &[S], dims: [usize; 3], out: [usize; 3], dx: &mut [S]) {
        let [kd, kh, kw] = self.kernel;
        let positions = out[0] * out[1] * out[2];
        let sw = self.stride[2];
        let mut row = 0;
        for c in 0..self.in_channels {
            let plane = &mut dx[c * dims[0] * dims[1] * dims[2]..];
            for a in 0..kd {
                for b in 0..kh {
                    for e in 0..kw {
                        let src = &cols[row * positions..(row + 1) * positions];
                        let (lo, hi) = self.valid_cols(e, dims[2], out[2]);
                        for z in 0..out[0] {
                            let iz = (z * self.stride[0] + a) as isize - self.pad[0] as isize;
                            if iz < 0 || iz as usize >= dims[0] {
                                continue;
                            }
                            for y in 0..out[1] {
                                let iy = (y * self.stride[1] + b) as isize - self.pad[1] as isize;
                                if iy < 0 || iy as usize >= dims[1] {
                                    continue;
                                }
                                let line = &src[(z * out[1] + y) * out[2]..(z * out[1] + y + 1) * out[2]];
                                let first = (iz as usize * dims[1] + iy as usize) * dims[2] + lo * sw + e - self.pad[2];
                                for (i, &v) in line[lo..hi].iter().enumerate() {
                                    let idx = first + i * sw;
                                    plane[idx] = plane[idx] + v;
                                }
                            }
                        }
                        row += 1;
                    }
                }
            }
        }
    }
}

pub fn conv_forward<S: Scalar>(input: &Tensor<S>, layer: &Conv<S>) -> Result<Tensor<S>> {
    layer.check_params()?;
    let op = layer.op();
    input.expect_rank(op, layer.spatial_rank + 2)?;
    let batch = input.shape()[0];
    let (dims, out) = layer.geometry(&input.shape()[1..])?;
    let in_len = input.item_len();
    let positions: usize = out.iter().product();
    let patch = layer.patch_len();
    let out_len = layer.out_channels * positions;

    let mut shape = vec![batch];
    shape.extend(join_item_shape(layer.spatial_rank, layer.out_channels, out));
    let mut output = Tensor::zeros(&shape);
    let mut cols = vec![S::zero(); patch * positions];
    for (x, y) in input.data().chunks(in_len).zip(output.data_mut().chunks_mut(out_len)) {
        layer.im2col(x, dims, out, &mut cols);
        for (o, row) in y.chunks_mut(positions).enumerate() {
            row.fill(layer.bias.data()[o]);
        }
        S::gemm(false, false, layer.out_channels, positions, patch, S::one(), layer.weight.data(), &cols, S::one(), y);
    }
    Ok(output)
}

pub fn conv_backward<S: Scalar>(input: &Tensor<S>, layer: &Conv<S>, grad_out: &Tensor<S>) -> Result<ConvGrads<S>> {
    conv_backward_impl(input, layer, grad_out, true)
}

/// With `need_input == false` the returned input gradient is all zeros and
/// the column scatter is skipped (first layer of a network).
pub(crate) fn conv_backward_impl<S: Scalar>(
    input: &Tensor<S>,
    layer: &Conv<S>,
    grad_out: &Tensor<S>,
    need_input: bool,
) -> Result<ConvGrads<S>> {
    layer.check_params()?;
    let op = layer.op();
    input.expect_rank(op, layer.spatial_rank + 2)?;
    let batch = input.shape()[0];
    let (dims, out) = layer.geometry(&input.shape()[1..])?;
    let mut out_shape = vec![batch];
    out_shape.extend(join_item_shape(layer.spatial_rank, layer.out_channels, out));
    grad_out.expect_shape(op, &out_shape)?;

    let in_len = input.item_len();
    let positions: usize = out.iter().product();
    let patch = layer.patch_len();
    let out_len = layer.out_channels * positions;

    let mut grad_input = Tensor::zeros(input.shape());
    let mut grad_weight = Tensor::zeros(layer.weight.shape());
    let mut bias_acc = vec![0f64; layer.out_channels];
    let mut cols = vec![S::zero(); patch * positions];
    let mut dcols = vec![S::zero(); patch * positions];

    for ((x, g), dx) in input
        .data()
        .chunks(in_len)
        .zip(grad_out.data().chunks(out_len))
        .zip(grad_input.data_mut().chunks_mut(in_len))
    {
        layer.im2col(x, dims, out, &mut cols);
        // dW += g (O x P) * cols^T (P x K)
        S::gemm(false, true, layer.out_channels, patch, positions, S::one(), g, &cols, S::one(), grad_weight.data_mut());
        if need_input {
            // dcols = W^T (K x O) * g (O x P)
            S::gemm(true, false, patch, positions, layer.out_channels, S::one(), layer.weight.data(), g, S::zero(), &mut dcols);
            layer.col2im(&dcols, dims, out, dx);
        }
        for (o, row) in g.chunks(positions).enumerate() {
            bias_acc[o] += row.iter().map(|v| v.to_f64_lossy()).sum::<f64>();
        }
    }
    let grad_bias = Tensor::new(vec![layer.out_channels], bias_acc.into_iter().map(S::from_f64_lossy).collect())?;
    Ok(ConvGrads {
        input: grad_input,
        weight: grad_weight,
        bias: grad_bias,
    })
}

//! Layer kinds with explicit forward and backward passes.
//!
//! Backward passes take the cached forward input (and output) explicitly, return
//! the gradient with respect to the input, and *accumulate* into the layer's
//! gradient buffers. Callers zero the buffers before each step.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::tensor::{gemm, Tensor};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Activation {
    Relu,
    LeakyRelu(f64),
    Tanh,
    Sigmoid,
}

pub const DEFAULT_LEAKY_SLOPE: f64 = 0.2;

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl Activation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Activation::LeakyRelu(a) if !(a > 0.0 && a < 1.0) => Err(Error::InvalidArgument(
                format!("leaky slope must lie in (0,1), got {a}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, x: f64) -> f64 {
        match *self {
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu(a) => {
                if x > 0.0 {
                    x
                } else {
                    a * x
                }
            }
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
        }
    }

    /// Derivative given the pre-activation `x` and the activation `y`.
    pub fn derivative(&self, x: f64, y: f64) -> f64 {
        match *self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::LeakyRelu(a) => {
                if x > 0.0 {
                    1.0
                } else {
                    a
                }
            }
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        input.ensure_finite("activation")?;
        Ok(input.map(|x| self.apply(x)))
    }

    pub fn backward(&self, input: &Tensor, output: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        check_same_shape("activation backward", input, grad_out)?;
        check_same_shape("activation backward", input, output)?;
        let data = input
            .data()
            .iter()
            .zip(output.data())
            .zip(grad_out.data())
            .map(|((&x, &y), &g)| g * self.derivative(x, y))
            .collect();
        Tensor::new(input.shape().to_vec(), data)
    }
}

fn check_same_shape(op: &'static str, a: &Tensor, b: &Tensor) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::shape(op, format!("{:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

fn gaussian_tensor(shape: &[usize], std: f64, rng: &mut impl Rng) -> Tensor {
    let normal = Normal::new(0.0, std).expect("std is finite and positive");
    let mut t = Tensor::zeros(shape);
    t.data_mut().iter_mut().for_each(|x| *x = normal.sample(rng));
    t
}

/// Affine layer `y = x W + b` on `[batch, in]` inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense {
    /// `[in, out]`
    pub weights: Tensor,
    pub bias: Tensor,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weights: Tensor::zeros(&[inputs, outputs]),
            bias: Tensor::zeros(&[outputs]),
            grad_weights: Tensor::zeros(&[inputs, outputs]),
            grad_bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn gaussian(inputs: usize, outputs: usize, std: f64, rng: &mut impl Rng) -> Self {
        let mut d = Self::zeros(inputs, outputs);
        d.weights = gaussian_tensor(&[inputs, outputs], std, rng);
        d
    }

    pub fn inputs(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn outputs(&self) -> usize {
        self.weights.shape()[1]
    }

    fn check_input(&self, input: &Tensor) -> Result<usize> {
        if input.shape().len() != 2 || input.shape()[1] != self.inputs() {
            return Err(Error::shape(
                "dense",
                format!(
                    "input {:?} does not match weights [{}, {}]",
                    input.shape(),
                    self.inputs(),
                    self.outputs()
                ),
            ));
        }
        Ok(input.shape()[0])
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let n = self.check_input(input)?;
        input.ensure_finite("dense")?;
        let (k, m) = (self.inputs(), self.outputs());
        let mut out = Vec::with_capacity(n * m);
        for _ in 0..n {
            out.extend_from_slice(self.bias.data());
        }
        gemm(n, k, m, input.data(), false, self.weights.data(), false, 1.0, &mut out);
        Tensor::new(vec![n, m], out)
    }

    pub fn backward(&mut self, input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        let n = self.check_input(input)?;
        let (k, m) = (self.inputs(), self.outputs());
        if grad_out.shape() != [n, m] {
            return Err(Error::shape(
                "dense backward",
                format!("upstream gradient {:?}, expected [{n}, {m}]", grad_out.shape()),
            ));
        }
        gemm(k, n, m, input.data(), true, grad_out.data(), false, 1.0, self.grad_weights.data_mut());
        let gb = self.grad_bias.data_mut();
        for row in grad_out.data().chunks_exact(m) {
            for (g, &d) in gb.iter_mut().zip(row) {
                *g += d;
            }
        }
        let mut grad_in = vec![0.0; n * k];
        gemm(n, m, k, grad_out.data(), false, self.weights.data(), true, 0.0, &mut grad_in);
        Tensor::new(vec![n, k], grad_in)
    }
}

/// Square-kernel strided geometry shared by convolution and its transpose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConvGeometry {
    pub kernel: usize,
    pub stride: usize,
}

impl ConvGeometry {
    /// Output size of a valid (unpadded) strided correlation, if any.
    pub fn output_size(&self, input: usize) -> Option<usize> {
        (input >= self.kernel).then(|| (input - self.kernel) / self.stride + 1)
    }
}

/// Gathers `kernel × kernel` patches into a `[channels·k·k, out_h·out_w]` matrix.
#[allow(clippy::too_many_arguments)]
fn im2col(
    img: &[f64],
    channels: usize,
    height: usize,
    width: usize,
    geo: ConvGeometry,
    out_h: usize,
    out_w: usize,
    col: &mut [f64],
) {
    let (k, s) = (geo.kernel, geo.stride);
    let l = out_h * out_w;
    for c in 0..channels {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let dst = &mut col[row * l..(row + 1) * l];
                for oh in 0..out_h {
                    let src = &img[(c * height + oh * s + ki) * width..];
                    for ow in 0..out_w {
                        dst[oh * out_w + ow] = src[ow * s + kj];
                    }
                }
            }
        }
    }
}

/// Scatter-adds a patch matrix back onto an image (adjoint of [`im2col`]).
#[allow(clippy::too_many_arguments)]
fn col2im(
    col: &[f64],
    channels: usize,
    height: usize,
    width: usize,
    geo: ConvGeometry,
    out_h: usize,
    out_w: usize,
    img: &mut [f64],
) {
    let (k, s) = (geo.kernel, geo.stride);
    let l = out_h * out_w;
    for c in 0..channels {
        for ki in 0..k {
            for kj in 0..k {
                let row = (c * k + ki) * k + kj;
                let src = &col[row * l..(row + 1) * l];
                for oh in 0..out_h {
                    let dst = &mut img[(c * height + oh * s + ki) * width..];
                    for ow in 0..out_w {
                        dst[ow * s + kj] += src[oh * out_w + ow];
                    }
                }
            }
        }
    }
}

/// Strided 2-D cross-correlation on NCHW inputs, no padding.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d {
    /// `[out_channels, in_channels, k, k]`
    pub weights: Tensor,
    pub bias: Tensor,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
    pub geometry: ConvGeometry,
}

impl Conv2d {
    pub fn zeros(in_channels: usize, out_channels: usize, kernel: usize, stride: usize) -> Result<Self> {
        if stride == 0 || kernel == 0 {
            return Err(Error::InvalidArgument(format!(
                "conv kernel and stride must be >= 1 (kernel {kernel}, stride {stride})"
            )));
        }
        let wshape = [out_channels, in_channels, kernel, kernel];
        Ok(Conv2d {
            weights: Tensor::zeros(&wshape),
            bias: Tensor::zeros(&[out_channels]),
            grad_weights: Tensor::zeros(&wshape),
            grad_bias: Tensor::zeros(&[out_channels]),
            geometry: ConvGeometry { kernel, stride },
        })
    }

    pub fn gaussian(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        std: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut c = Self::zeros(in_channels, out_channels, kernel, stride)?;
        c.weights = gaussian_tensor(c.weights.shape(), std, rng);
        Ok(c)
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    /// Output shape for an NCHW input shape.
    pub fn output_shape(&self, input: &[usize]) -> Result<[usize; 4]> {
        if input.len() != 4 || input[1] != self.in_channels() {
            return Err(Error::shape(
                "conv2d",
                format!("input {input:?} is not NCHW with {} channels", self.in_channels()),
            ));
        }
        let g = self.geometry;
        match (g.output_size(input[2]), g.output_size(input[3])) {
            (Some(oh), Some(ow)) => Ok([input[0], self.out_channels(), oh, ow]),
            _ => Err(Error::shape(
                "conv2d",
                format!(
                    "spatial size {}x{} smaller than kernel {} (output would be {}x{})",
                    input[2],
                    input[3],
                    g.kernel,
                    input[2] as isize - g.kernel as isize,
                    input[3] as isize - g.kernel as isize
                ),
            )),
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let [n, oc, oh, ow] = self.output_shape(input.shape())?;
        input.ensure_finite("conv2d")?;
        let (ic, h, w) = (input.shape()[1], input.shape()[2], input.shape()[3]);
        let k = self.geometry.kernel;
        let (rows, l) = (ic * k * k, oh * ow);
        let mut col = vec![0.0; rows * l];
        let mut out = vec![0.0; n * oc * l];
        for (img, dst) in input.data().chunks_exact(ic * h * w).zip(out.chunks_exact_mut(oc * l)) {
            im2col(img, ic, h, w, self.geometry, oh, ow, &mut col);
            for (c, plane) in dst.chunks_exact_mut(l).enumerate() {
                plane.fill(self.bias.data()[c]);
            }
            gemm(oc, rows, l, self.weights.data(), false, &col, false, 1.0, dst);
        }
        Tensor::new(vec![n, oc, oh, ow], out)
    }

    pub fn backward(&mut self, input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        let out_shape = self.output_shape(input.shape())?;
        if grad_out.shape() != out_shape {
            return Err(Error::shape(
                "conv2d backward",
                format!("upstream gradient {:?}, expected {out_shape:?}", grad_out.shape()),
            ));
        }
        let [_, oc, oh, ow] = out_shape;
        let (ic, h, w) = (input.shape()[1], input.shape()[2], input.shape()[3]);
        let k = self.geometry.kernel;
        let (rows, l) = (ic * k * k, oh * ow);
        let mut col = vec![0.0; rows * l];
        let mut grad_in = vec![0.0; input.len()];
        for ((img, dy), dimg) in input
            .data()
            .chunks_exact(ic * h * w)
            .zip(grad_out.data().chunks_exact(oc * l))
            .zip(grad_in.chunks_exact_mut(ic * h * w))
        {
            im2col(img, ic, h, w, self.geometry, oh, ow, &mut col);
            gemm(oc, l, rows, dy, false, &col, true, 1.0, self.grad_weights.data_mut());
            for (c, plane) in dy.chunks_exact(l).enumerate() {
                self.grad_bias.data_mut()[c] += plane.iter().sum::<f64>();
            }
            gemm(rows, oc, l, self.weights.data(), true, dy, false, 0.0, &mut col);
            col2im(&col, ic, h, w, self.geometry, oh, ow, dimg);
        }
        Tensor::new(input.shape().to_vec(), grad_in)
    }
}

/// Fractionally-strided convolution: the adjoint of [`Conv2d`] plus bias.
///
/// Output size per spatial dim is `(in - 1) * stride + kernel + output_padding`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvTranspose2d {
    /// `[in_channels, out_channels, k, k]`
    pub weights: Tensor,
    pub bias: Tensor,
    pub grad_weights: Tensor,
    pub grad_bias: Tensor,
    pub geometry: ConvGeometry,
    pub output_padding: usize,
}

impl ConvTranspose2d {
    pub fn zeros(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        output_padding: usize,
    ) -> Result<Self> {
        if stride == 0 || kernel == 0 || output_padding >= stride {
            return Err(Error::InvalidArgument(format!(
                "invalid transposed conv geometry: kernel {kernel}, stride {stride}, output padding {output_padding}"
            )));
        }
        let wshape = [in_channels, out_channels, kernel, kernel];
        Ok(ConvTranspose2d {
            weights: Tensor::zeros(&wshape),
            bias: Tensor::zeros(&[out_channels]),
            grad_weights: Tensor::zeros(&wshape),
            grad_bias: Tensor::zeros(&[out_channels]),
            geometry: ConvGeometry { kernel, stride },
            output_padding,
        })
    }

    pub fn gaussian(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        output_padding: usize,
        std: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut c = Self::zeros(in_channels, out_channels, kernel, stride, output_padding)?;
        c.weights = gaussian_tensor(c.weights.shape(), std, rng);
        Ok(c)
    }

    pub fn in_channels(&self) -> usize {
        self.weights.shape()[0]
    }

    pub fn out_channels(&self) -> usize {
        self.weights.shape()[1]
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<[usize; 4]> {
        if input.len() != 4 || input[1] != self.in_channels() {
            return Err(Error::shape(
                "conv_transpose2d",
                format!("input {input:?} is not NCHW with {} channels", self.in_channels()),
            ));
        }
        let g = self.geometry;
        let size = |x: usize| (x - 1) * g.stride + g.kernel + self.output_padding;
        Ok([input[0], self.out_channels(), size(input[2]), size(input[3])])
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        let [n, oc, oh, ow] = self.output_shape(input.shape())?;
        input.ensure_finite("conv_transpose2d")?;
        let (ic, h, w) = (input.shape()[1], input.shape()[2], input.shape()[3]);
        let k = self.geometry.kernel;
        let (rows, l) = (oc * k * k, h * w);
        let mut col = vec![0.0; rows * l];
        let mut out = vec![0.0; n * oc * oh * ow];
        for (x, dst) in input.data().chunks_exact(ic * l).zip(out.chunks_exact_mut(oc * oh * ow)) {
            gemm(rows, ic, l, self.weights.data(), true, x, false, 0.0, &mut col);
            for (c, plane) in dst.chunks_exact_mut(oh * ow).enumerate() {
                plane.fill(self.bias.data()[c]);
            }
            col2im(&col, oc, oh, ow, self.geometry, h, w, dst);
        }
        Tensor::new(vec![n, oc, oh, ow], out)
    }

    pub fn backward(&mut self, input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        let out_shape = self.output_shape(input.shape())?;
        if grad_out.shape() != out_shape {
            return Err(Error::shape(
                "conv_transpose2d backward",
                format!("upstream gradient {:?}, expected {out_shape:?}", grad_out.shape()),
            ));
        }
        let [_, oc, oh, ow] = out_shape;
        let (ic, h, w) = (input.shape()[1], input.shape()[2], input.shape()[3]);
        let k = self.geometry.kernel;
        let (rows, l) = (oc * k * k, h * w);
        let mut col = vec![0.0; rows * l];
        let mut grad_in = vec![0.0; input.len()];
        for ((x, dy), dx) in input
            .data()
            .chunks_exact(ic * l)
            .zip(grad_out.data().chunks_exact(oc * oh * ow))
            .zip(grad_in.chunks_exact_mut(ic * l))
        {
            im2col(dy, oc, oh, ow, self.geometry, h, w, &mut col);
            gemm(ic, l, rows, x, false, &col, true, 1.0, self.grad_weights.data_mut());
            gemm(ic, rows, l, self.weights.data(), false, &col, false, 0.0, dx);
            for (c, plane) in dy.chunks_exact(oh * ow).enumerate() {
                self.grad_bias.data_mut()[c] += plane.iter().sum::<f64>();
            }
        }
        Tensor::new(input.shape().to_vec(), grad_in)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Layer {
    Dense(Dense),
    Conv2d(Conv2d),
    ConvTranspose2d(ConvTranspose2d),
    Activation(Activation),
    /// Reinterprets each sample with a new per-sample shape.
    Reshape(Vec<usize>),
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Dense(_) => "dense",
            Layer::Conv2d(_) => "conv2d",
            Layer::ConvTranspose2d(_) => "conv_transpose2d",
            Layer::Activation(_) => "activation",
            Layer::Reshape(_) => "reshape",
        }
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(d) => d.forward(input),
            Layer::Conv2d(c) => c.forward(input),
            Layer::ConvTranspose2d(c) => c.forward(input),
            Layer::Activation(a) => a.forward(input),
            Layer::Reshape(shape) => {
                let mut full = vec![input.batch()];
                full.extend_from_slice(shape);
                input.reshape(&full)
            }
        }
    }

    /// Gradient with respect to `input`, accumulating parameter gradients.
    pub fn backward(&mut self, input: &Tensor, output: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
        match self {
            Layer::Dense(d) => d.backward(input, grad_out),
            Layer::Conv2d(c) => c.backward(input, grad_out),
            Layer::ConvTranspose2d(c) => c.backward(input, grad_out),
            Layer::Activation(a) => a.backward(input, output, grad_out),
            Layer::Reshape(_) => grad_out.reshape(input.shape()),
        }
    }

    /// `(parameter, gradient)` pairs, weights before bias.
    pub fn params_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        match self {
            Layer::Dense(d) => vec![(&mut d.weights, &mut d.grad_weights), (&mut d.bias, &mut d.grad_bias)],
            Layer::Conv2d(c) => vec![(&mut c.weights, &mut c.grad_weights), (&mut c.bias, &mut c.grad_bias)],
            Layer::ConvTranspose2d(c) => {
                vec![(&mut c.weights, &mut c.grad_weights), (&mut c.bias, &mut c.grad_bias)]
            }
            Layer::Activation(_) | Layer::Reshape(_) => Vec::new(),
        }
    }

    pub fn params(&self) -> Vec<(&Tensor, &Tensor)> {
        match self {
            Layer::Dense(d) => vec![(&d.weights, &d.grad_weights), (&d.bias, &d.grad_bias)],
            Layer::Conv2d(c) => vec![(&c.weights, &c.grad_weights), (&c.bias, &c.grad_bias)],
            Layer::ConvTranspose2d(c) => vec![(&c.weights, &c.grad_weights), (&c.bias, &c.grad_bias)],
            Layer::Activation(_) | Layer::Reshape(_) => Vec::new(),
        }
    }
}

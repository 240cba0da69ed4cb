//! Generator and discriminator networks.
//!
//! The discriminator is one [`Sequential`] with a split index: layers before it
//! form the feature map `F` (ending in tanh, so features lie in `(−1, 1)`),
//! layers from it on form the classifier head `C`, and `D(x) = C(F(x))`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::layers::{Activation, Conv2d, ConvTranspose2d, Dense, Layer};
use crate::nn::loss::{log_one_minus_sigmoid, log_sigmoid};
use crate::nn::network::{Sequential, Trace};
use crate::nn::layers::sigmoid;
use crate::rbm::model::{sample_spins, SpinBatch};
use crate::tensor::Tensor;

/// Named architecture families.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// 3-layer MLPs on 2-D points.
    Toy2d,
    /// Two strided 5×5 convolutions (16, 32 channels) on 1×28×28 images.
    MnistSmall,
    /// Four strided 5×5 convolutions (64, 128, 256, 512 channels) on 3×64×64
    /// images with a 500-500 classifier head.
    CelebaPaper,
}

impl Preset {
    pub fn sample_shape(&self) -> Vec<usize> {
        match self {
            Preset::Toy2d => vec![2],
            Preset::MnistSmall => vec![1, 28, 28],
            Preset::CelebaPaper => vec![3, 64, 64],
        }
    }

    fn conv_channels(&self) -> &'static [usize] {
        match self {
            Preset::Toy2d => &[],
            Preset::MnistSmall => &[16, 32],
            Preset::CelebaPaper => &[64, 128, 256, 512],
        }
    }

    fn head_widths(&self) -> &'static [usize] {
        match self {
            Preset::Toy2d => &[128],
            Preset::MnistSmall => &[64],
            Preset::CelebaPaper => &[500, 500],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Toy2d => "toy2d",
            Preset::MnistSmall => "mnist-small",
            Preset::CelebaPaper => "celeba-paper",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toy2d" => Ok(Preset::Toy2d),
            "mnist-small" => Ok(Preset::MnistSmall),
            "celeba-paper" => Ok(Preset::CelebaPaper),
            _ => Err(Error::Config(format!("unknown preset '{s}' (toy2d, mnist-small, celeba-paper)"))),
        }
    }
}

/// How the stride of the 5×5 discriminator convolutions is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrideRule {
    /// Stride 2.
    Dcgan,
    /// Stride equal to the filter width (non-overlapping windows).
    FilterWidth,
}

impl fmt::Display for StrideRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StrideRule::Dcgan => "dcgan",
            StrideRule::FilterWidth => "filter-width",
        })
    }
}

impl FromStr for StrideRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dcgan" => Ok(StrideRule::Dcgan),
            "filter-width" => Ok(StrideRule::FilterWidth),
            _ => Err(Error::Config(format!("unknown stride rule '{s}' (dcgan, filter-width)"))),
        }
    }
}

pub const CONV_KERNEL: usize = 5;
pub const DEFAULT_INIT_STD: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct ArchConfig {
    pub preset: Preset,
    pub feature_dim: usize,
    pub stride_rule: StrideRule,
    pub leaky_slope: f64,
    pub init_std: f64,
}

impl ArchConfig {
    pub fn new(preset: Preset, feature_dim: usize) -> Self {
        ArchConfig {
            preset,
            feature_dim,
            stride_rule: StrideRule::Dcgan,
            leaky_slope: crate::nn::layers::DEFAULT_LEAKY_SLOPE,
            init_std: DEFAULT_INIT_STD,
        }
    }

    fn stride(&self) -> usize {
        match self.stride_rule {
            StrideRule::Dcgan => 2,
            StrideRule::FilterWidth => CONV_KERNEL,
        }
    }

    /// Spatial sizes before each convolution, followed by the final size.
    fn spatial_sizes(&self) -> Result<Vec<usize>> {
        let shape = self.preset.sample_shape();
        let mut sizes = vec![shape[1]];
        let geo = crate::nn::layers::ConvGeometry {
            kernel: CONV_KERNEL,
            stride: self.stride(),
        };
        for _ in self.preset.conv_channels() {
            let last = *sizes.last().unwrap();
            let next = geo.output_size(last).ok_or_else(|| {
                Error::shape(
                    "architecture",
                    format!("{} with stride {}: spatial size {last} is below kernel {CONV_KERNEL}", self.preset, self.stride()),
                )
            })?;
            sizes.push(next);
        }
        Ok(sizes)
    }

    fn validate(&self) -> Result<()> {
        if self.feature_dim == 0 {
            return Err(Error::InvalidArgument("feature_dim must be >= 1".into()));
        }
        Activation::LeakyRelu(self.leaky_slope).validate()?;
        if !(self.init_std > 0.0 && self.init_std.is_finite()) {
            return Err(Error::InvalidArgument(format!("init std must be positive, got {}", self.init_std)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Discriminator {
    pub net: Sequential,
    /// Number of layers in `F`; `C` is `layers[split_index..]`.
    pub split_index: usize,
    pub feature_dim: usize,
    pub sample_shape: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DiscriminatorOutput {
    /// `F(x)`, shape `[batch, feature_dim]`.
    pub features: Tensor,
    /// `C(F(x))`, shape `[batch, 1]`.
    pub logits: Tensor,
}

impl Discriminator {
    pub fn build(arch: &ArchConfig, rng: &mut impl Rng) -> Result<Self> {
        arch.validate()?;
        let std = arch.init_std;
        let leaky = Layer::Activation(Activation::LeakyRelu(arch.leaky_slope));
        let shape = arch.preset.sample_shape();
        let mut layers = Vec::new();
        let flat = if arch.preset == Preset::Toy2d {
            let hidden = 128;
            layers.push(Layer::Dense(Dense::gaussian(shape[0], hidden, std, rng)));
            layers.push(leaky.clone());
            hidden
        } else {
            let sizes = arch.spatial_sizes()?;
            let mut in_ch = shape[0];
            for &out_ch in arch.preset.conv_channels() {
                layers.push(Layer::Conv2d(Conv2d::gaussian(in_ch, out_ch, CONV_KERNEL, arch.stride(), std, rng)?));
                layers.push(leaky.clone());
                in_ch = out_ch;
            }
            let s = *sizes.last().unwrap();
            let flat = in_ch * s * s;
            layers.push(Layer::Reshape(vec![flat]));
            flat
        };
        layers.push(Layer::Dense(Dense::gaussian(flat, arch.feature_dim, std, rng)));
        layers.push(Layer::Activation(Activation::Tanh));
        let split_index = layers.len();
        let mut width = arch.feature_dim;
        for &h in arch.preset.head_widths() {
            layers.push(Layer::Dense(Dense::gaussian(width, h, std, rng)));
            layers.push(leaky.clone());
            width = h;
        }
        layers.push(Layer::Dense(Dense::gaussian(width, 1, std, rng)));
        Ok(Discriminator {
            net: Sequential::new(layers),
            split_index,
            feature_dim: arch.feature_dim,
            sample_shape: shape,
        })
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.shape().len() < 2 || x.shape()[1..] != self.sample_shape[..] {
            return Err(Error::shape(
                "discriminator",
                format!("input {:?}, expected [batch, {:?}]", x.shape(), self.sample_shape),
            ));
        }
        Ok(())
    }

    /// Single pass capturing `f = F(x)` mid-flight and the final logit.
    pub fn forward(&self, x: &Tensor) -> Result<DiscriminatorOutput> {
        let trace = self.forward_trace(x)?;
        Ok(self.split_trace(&trace))
    }

    pub fn forward_trace(&self, x: &Tensor) -> Result<Trace> {
        self.check_input(x)?;
        self.net.forward_trace(x)
    }

    pub fn split_trace(&self, trace: &Trace) -> DiscriminatorOutput {
        DiscriminatorOutput {
            features: trace.activations[self.split_index].clone(),
            logits: trace.output().clone(),
        }
    }

    pub fn features(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        self.net.forward_range(x, 0, self.split_index)
    }

    /// The head `C` applied to features.
    pub fn classify_features(&self, f: &Tensor) -> Result<Tensor> {
        self.net.forward_range(f, self.split_index, self.net.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub net: Sequential,
    pub input_dim: usize,
    pub sample_shape: Vec<usize>,
}

impl Generator {
    /// Mirrors the discriminator: dense projection, then transposed
    /// convolutions undoing each strided convolution, ending in tanh.
    pub fn build(arch: &ArchConfig, rng: &mut impl Rng) -> Result<Self> {
        arch.validate()?;
        let std = arch.init_std;
        let shape = arch.preset.sample_shape();
        let mut layers = Vec::new();
        if arch.preset == Preset::Toy2d {
            let hidden = 128;
            layers.push(Layer::Dense(Dense::gaussian(arch.feature_dim, hidden, std, rng)));
            layers.push(Layer::Activation(Activation::Relu));
            layers.push(Layer::Dense(Dense::gaussian(hidden, hidden, std, rng)));
            layers.push(Layer::Activation(Activation::Relu));
            layers.push(Layer::Dense(Dense::gaussian(hidden, shape[0], std, rng)));
        } else {
            let sizes = arch.spatial_sizes()?;
            let channels = arch.preset.conv_channels();
            let s = *sizes.last().unwrap();
            let top = *channels.last().unwrap();
            layers.push(Layer::Dense(Dense::gaussian(arch.feature_dim, top * s * s, std, rng)));
            layers.push(Layer::Activation(Activation::Relu));
            layers.push(Layer::Reshape(vec![top, s, s]));
            let stride = arch.stride();
            for i in (0..channels.len()).rev() {
                let in_ch = channels[i];
                let out_ch = if i == 0 { shape[0] } else { channels[i - 1] };
                let (target, from) = (sizes[i], sizes[i + 1]);
                let output_padding = target - ((from - 1) * stride + CONV_KERNEL);
                layers.push(Layer::ConvTranspose2d(ConvTranspose2d::gaussian(
                    in_ch,
                    out_ch,
                    CONV_KERNEL,
                    stride,
                    output_padding,
                    std,
                    rng,
                )?));
                if i > 0 {
                    layers.push(Layer::Activation(Activation::Relu));
                }
            }
        }
        layers.push(Layer::Activation(Activation::Tanh));
        Ok(Generator {
            net: Sequential::new(layers),
            input_dim: arch.feature_dim,
            sample_shape: shape,
        })
    }

    fn check_input(&self, f: &Tensor) -> Result<()> {
        if f.shape().len() != 2 || f.shape()[1] != self.input_dim {
            return Err(Error::shape(
                "generator",
                format!("input {:?}, expected [batch, {}]", f.shape(), self.input_dim),
            ));
        }
        Ok(())
    }

    pub fn forward(&self, f: &Tensor) -> Result<Tensor> {
        self.check_input(f)?;
        self.net.forward(f)
    }

    pub fn forward_trace(&self, f: &Tensor) -> Result<Trace> {
        self.check_input(f)?;
        self.net.forward_trace(f)
    }
}

pub fn spins_to_tensor(spins: &SpinBatch) -> Tensor {
    Tensor::new(vec![spins.rows(), spins.dim()], spins.to_f64()).expect("spin batch dims are positive")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinarizeMode {
    /// `+1` with probability `(f + 1) / 2`, so the spin mean equals `f`.
    Stochastic,
    /// `+1` iff `f >= 0`.
    Sign,
}

impl fmt::Display for BinarizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BinarizeMode::Stochastic => "stochastic",
            BinarizeMode::Sign => "sign",
        })
    }
}

impl FromStr for BinarizeMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stochastic" => Ok(BinarizeMode::Stochastic),
            "sign" => Ok(BinarizeMode::Sign),
            _ => Err(Error::Config(format!("unknown binarize mode '{s}' (stochastic, sign)"))),
        }
    }
}

/// Maps tanh-range features to spins for clamping onto the RBM's visible layer.
pub fn binarize_features(f: &Tensor, mode: BinarizeMode, rng: &mut impl Rng) -> Result<SpinBatch> {
    if f.shape().len() != 2 {
        return Err(Error::shape("binarize_features", format!("expected [batch, dim], got {:?}", f.shape())));
    }
    if let Some(x) = f.data().iter().find(|x| !(x.abs() <= 1.0)) {
        return Err(Error::InvalidArgument(format!("feature {x} outside [-1, 1]")));
    }
    let spins = match mode {
        BinarizeMode::Stochastic => {
            let probs: Vec<f64> = f.data().iter().map(|x| (x + 1.0) / 2.0).collect();
            sample_spins(&probs, rng)
        }
        BinarizeMode::Sign => f.data().iter().map(|&x| if x >= 0.0 { 1 } else { -1 }).collect(),
    };
    SpinBatch::new(f.shape()[0], f.shape()[1], spins)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseKind {
    /// Uniform on `[−1, 1]`.
    Uniform,
    /// Uniform on `{−1, +1}`.
    Spins,
}

impl fmt::Display for NoiseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseKind::Uniform => "uniform",
            NoiseKind::Spins => "spins",
        })
    }
}

impl FromStr for NoiseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(NoiseKind::Uniform),
            "spins" => Ok(NoiseKind::Spins),
            _ => Err(Error::Config(format!("unknown noise kind '{s}' (uniform, spins)"))),
        }
    }
}

/// Generator input for the plain-GAN baseline.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoiseSource {
    pub dim: usize,
    pub kind: NoiseKind,
}

impl NoiseSource {
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Tensor {
        let data = (0..n * self.dim)
            .map(|_| match self.kind {
                NoiseKind::Uniform => rng.random_range(-1.0..=1.0),
                NoiseKind::Spins => {
                    if rng.random::<f64>() < 0.5 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            })
            .collect();
        Tensor::new(vec![n, self.dim], data).expect("noise dims are positive")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorObjective {
    /// Minimize `E[log(1 − D(G(f)))]`.
    Minimax,
    /// Minimize `−E[log D(G(f))]`.
    NonSaturating,
}

impl fmt::Display for GeneratorObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorObjective::Minimax => "minimax",
            GeneratorObjective::NonSaturating => "nonsaturating",
        })
    }
}

impl FromStr for GeneratorObjective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "minimax" => Ok(GeneratorObjective::Minimax),
            "nonsaturating" => Ok(GeneratorObjective::NonSaturating),
            _ => Err(Error::Config(format!("unknown generator objective '{s}' (minimax, nonsaturating)"))),
        }
    }
}

/// Monitored expectations of the game value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ValueTerms {
    /// `E[log D(x)]`
    pub log_d_real: f64,
    /// `E[log(1 − D(G(f)))]`
    pub log_1m_d_fake: f64,
    /// `E[log D(G(f))]`
    pub log_d_fake: f64,
}

impl ValueTerms {
    /// The two-term game value `E[log D(x)] + E[log(1 − D(G(f)))]`.
    pub fn game_value(&self) -> f64 {
        self.log_d_real + self.log_1m_d_fake
    }
}

#[derive(Clone, Debug)]
pub struct GanLosses {
    pub d_loss: f64,
    pub g_loss: f64,
    pub value: ValueTerms,
    /// `∂d_loss/∂real_logits`
    pub d_grad_real: Tensor,
    /// `∂d_loss/∂fake_logits`
    pub d_grad_fake: Tensor,
    /// `∂g_loss/∂fake_logits`
    pub g_grad_fake: Tensor,
}

fn mean(xs: impl Iterator<Item = f64>, n: usize) -> f64 {
    xs.sum::<f64>() / n as f64
}

pub fn gan_losses(real_logits: &Tensor, fake_logits: &Tensor, g_mode: GeneratorObjective) -> Result<GanLosses> {
    real_logits.ensure_finite("gan_losses")?;
    fake_logits.ensure_finite("gan_losses")?;
    let (nr, nf) = (real_logits.len(), fake_logits.len());
    let value = ValueTerms {
        log_d_real: mean(real_logits.data().iter().map(|&l| log_sigmoid(l)), nr),
        log_1m_d_fake: mean(fake_logits.data().iter().map(|&l| log_one_minus_sigmoid(l)), nf),
        log_d_fake: mean(fake_logits.data().iter().map(|&l| log_sigmoid(l)), nf),
    };
    let d_loss = -value.log_d_real - value.log_1m_d_fake;
    let d_grad_real = real_logits.map(|l| (sigmoid(l) - 1.0) / nr as f64);
    let d_grad_fake = fake_logits.map(|l| sigmoid(l) / nf as f64);
    let (g_loss, g_grad_fake) = match g_mode {
        GeneratorObjective::Minimax => (value.log_1m_d_fake, fake_logits.map(|l| -sigmoid(l) / nf as f64)),
        GeneratorObjective::NonSaturating => {
            (-value.log_d_fake, fake_logits.map(|l| (sigmoid(l) - 1.0) / nf as f64))
        }
    };
    Ok(GanLosses {
        d_loss,
        g_loss,
        value,
        d_grad_real,
        d_grad_fake,
        g_grad_fake,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn zero_params(net: &mut Sequential) {
        for (p, _) in net.params_mut() {
            p.fill(0.0);
        }
    }

    #[test]
    fn presets_build_and_split_at_tanh() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for preset in [Preset::Toy2d, Preset::MnistSmall] {
            let arch = ArchConfig::new(preset, 16);
            let d = Discriminator::build(&arch, &mut rng).unwrap();
            assert_eq!(d.net.layers[d.split_index - 1], Layer::Activation(Activation::Tanh));
            let g = Generator::build(&arch, &mut rng).unwrap();
            let z = Tensor::zeros(&[3, 16]);
            let x = g.forward(&z).unwrap();
            let mut want = vec![3];
            want.extend(preset.sample_shape());
            assert_eq!(x.shape(), &want[..]);
            let out = d.forward(&x).unwrap();
            assert_eq!(out.features.shape(), &[3, 16]);
            assert_eq!(out.logits.shape(), &[3, 1]);
        }
    }

    #[test]
    fn filter_width_stride_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut arch = ArchConfig::new(Preset::MnistSmall, 8);
        arch.stride_rule = StrideRule::FilterWidth;
        let d = Discriminator::build(&arch, &mut rng).unwrap();
        let g = Generator::build(&arch, &mut rng).unwrap();
        let x = g.forward(&Tensor::zeros(&[2, 8])).unwrap();
        assert_eq!(x.shape(), &[2, 1, 28, 28]);
        assert_eq!(d.forward(&x).unwrap().logits.shape(), &[2, 1]);
    }

    #[test]
    fn celeba_preset_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let arch = ArchConfig::new(Preset::CelebaPaper, 100);
        let d = Discriminator::build(&arch, &mut rng).unwrap();
        let g = Generator::build(&arch, &mut rng).unwrap();
        let x = g.forward(&Tensor::zeros(&[1, 100])).unwrap();
        assert_eq!(x.shape(), &[1, 3, 64, 64]);
        assert_eq!(d.forward(&x).unwrap().features.shape(), &[1, 100]);
        // Literal stride-5 windows shrink 64 → 12 → 2, too small for a third 5×5 layer.
        let mut literal = arch.clone();
        literal.stride_rule = StrideRule::FilterWidth;
        assert!(Discriminator::build(&literal, &mut rng).is_err());
    }

    #[test]
    fn zero_weight_discriminator() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = Discriminator::build(&ArchConfig::new(Preset::Toy2d, 4), &mut rng).unwrap();
        zero_params(&mut d.net);
        let Layer::Dense(feat) = &mut d.net.layers[d.split_index - 2] else { panic!() };
        feat.bias = Tensor::new(vec![4], vec![0.5, -0.5, 1.0, 0.0]).unwrap();
        let n = d.net.len();
        let Layer::Dense(last) = &mut d.net.layers[n - 1] else { panic!() };
        last.bias = Tensor::new(vec![1], vec![0.7]).unwrap();
        let out = d.forward(&Tensor::full(&[2, 2], 0.3)).unwrap();
        assert_eq!(&out.features.data()[..4], &[0.5f64.tanh(), (-0.5f64).tanh(), 1.0f64.tanh(), 0.0]);
        assert!(out.logits.data().iter().all(|&l| l == 0.7));
    }

    #[test]
    fn zero_weight_generator_is_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut g = Generator::build(&ArchConfig::new(Preset::Toy2d, 4), &mut rng).unwrap();
        zero_params(&mut g.net);
        let n = g.net.len();
        let Layer::Dense(last) = &mut g.net.layers[n - 2] else { panic!() };
        last.bias = Tensor::new(vec![2], vec![0.3, -2.0]).unwrap();
        let f = NoiseSource { dim: 4, kind: NoiseKind::Uniform }.sample(5, &mut rng);
        let x = g.forward(&f).unwrap();
        for row in x.data().chunks(2) {
            assert_eq!(row, &[0.3f64.tanh(), (-2.0f64).tanh()]);
        }
    }

    #[test]
    fn shape_mismatches_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let arch = ArchConfig::new(Preset::Toy2d, 4);
        let d = Discriminator::build(&arch, &mut rng).unwrap();
        let g = Generator::build(&arch, &mut rng).unwrap();
        assert!(d.forward(&Tensor::zeros(&[2, 3])).is_err());
        assert!(g.forward(&Tensor::zeros(&[2, 5])).is_err());
    }

    #[test]
    fn sign_binarization() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = Tensor::new(vec![1, 3], vec![-0.3, 0.0, 0.9]).unwrap();
        let s = binarize_features(&f, BinarizeMode::Sign, &mut rng).unwrap();
        assert_eq!(s.data(), &[-1, 1, 1]);
        let bad = Tensor::new(vec![1, 1], vec![1.5]).unwrap();
        assert!(binarize_features(&bad, BinarizeMode::Sign, &mut rng).is_err());
    }

    #[test]
    fn losses_at_half() {
        let z = Tensor::zeros(&[4, 1]);
        for mode in [GeneratorObjective::Minimax, GeneratorObjective::NonSaturating] {
            let l = gan_losses(&z, &z, mode).unwrap();
            assert!((l.d_loss - 2.0 * LN_2).abs() < 1e-15);
            assert!((l.g_loss.abs() - LN_2).abs() < 1e-15);
            assert!((l.value.log_d_real + LN_2).abs() < 1e-15);
            assert!((l.value.game_value() + 4f64.ln()).abs() < 1e-15);
        }
    }

    #[test]
    fn perfect_discrimination_has_near_zero_loss() {
        let real = Tensor::full(&[3, 1], 50.0);
        let fake = Tensor::full(&[3, 1], -50.0);
        let l = gan_losses(&real, &fake, GeneratorObjective::NonSaturating).unwrap();
        assert!(l.d_loss >= 0.0 && l.d_loss < 1e-20);
        assert!((l.g_loss - 50.0).abs() < 1e-12);
    }
}

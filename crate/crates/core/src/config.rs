//! Training configuration as flat `key = value` text.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::adversarial::{ArchConfig, BinarizeMode, GeneratorObjective, NoiseKind, Preset, StrideRule};
use crate::data::{DatasetKind, Toy2dConfig};
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, MomentumConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TrainMode {
    /// Generator fed by RBM negative samples.
    Aan,
    /// Generator fed by a [`crate::adversarial::NoiseSource`].
    Gan,
}

impl fmt::Display for TrainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrainMode::Aan => "aan",
            TrainMode::Gan => "gan",
        })
    }
}

impl FromStr for TrainMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aan" => Ok(TrainMode::Aan),
            "gan" | "gan-baseline" => Ok(TrainMode::Gan),
            _ => Err(Error::Config(format!("unknown mode '{s}' (aan, gan)"))),
        }
    }
}

/// What the generator receives from the RBM chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorInput {
    /// Sampled visible spins.
    Spins,
    /// `E[v | h] = tanh(visible field)` given the chain's last hidden state.
    Probabilities,
}

impl fmt::Display for GeneratorInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorInput::Spins => "spins",
            GeneratorInput::Probabilities => "probabilities",
        })
    }
}

impl FromStr for GeneratorInput {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spins" => Ok(GeneratorInput::Spins),
            "probabilities" => Ok(GeneratorInput::Probabilities),
            _ => Err(Error::Config(format!("unknown generator input '{s}' (spins, probabilities)"))),
        }
    }
}

/// Source of generator inputs in `aan` mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LatentSource {
    /// CD negative samples of the jointly trained RBM.
    Rbm,
    /// Uniform `±1` spins; the RBM is left untouched.
    UniformSpins,
}

impl fmt::Display for LatentSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LatentSource::Rbm => "rbm",
            LatentSource::UniformSpins => "uniform-spins",
        })
    }
}

impl FromStr for LatentSource {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rbm" => Ok(LatentSource::Rbm),
            "uniform-spins" => Ok(LatentSource::UniformSpins),
            _ => Err(Error::Config(format!("unknown latent source '{s}' (rbm, uniform-spins)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub mode: TrainMode,
    pub dataset: DatasetKind,
    pub preset: Preset,
    pub g_mode: GeneratorObjective,
    pub binarize: BinarizeMode,
    pub generator_input: GeneratorInput,
    pub latent: LatentSource,
    pub noise: NoiseKind,
    pub stride_rule: StrideRule,
    pub batch_size: usize,
    pub cd_steps: usize,
    pub feature_dim: usize,
    pub rbm_hidden: usize,
    pub steps: u64,
    pub seed: u64,
    pub rbm_lr: f64,
    pub rbm_momentum: f64,
    pub rbm_init_std: f64,
    pub adam_lr: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub leaky_slope: f64,
    pub init_std: f64,
    pub toy_n: usize,
    pub toy_centers: usize,
    pub toy_radius: f64,
    pub toy_noise_std: f64,
    pub data_seed: u64,
    pub mnist_dir: PathBuf,
    pub heldout_fraction: f64,
    pub eval_batch: usize,
    /// Save a checkpoint every this many steps; 0 saves only at the end.
    pub checkpoint_every: u64,
}

/// Every recognized key, in serialization order.
pub const CONFIG_KEYS: [&str; 33] = [
    "mode",
    "dataset",
    "preset",
    "g_mode",
    "binarize",
    "generator_input",
    "latent",
    "noise",
    "stride_rule",
    "batch_size",
    "cd_steps",
    "feature_dim",
    "rbm_hidden",
    "steps",
    "seed",
    "rbm_lr",
    "rbm_momentum",
    "rbm_init_std",
    "adam_lr",
    "adam_beta1",
    "adam_beta2",
    "adam_eps",
    "leaky_slope",
    "init_std",
    "toy_n",
    "toy_centers",
    "toy_radius",
    "toy_noise_std",
    "data_seed",
    "mnist_dir",
    "heldout_fraction",
    "eval_batch",
    "checkpoint_every",
];

/// Adam step size for the toy preset, whose small MLPs converge too slowly at
/// the image-network default within a few thousand steps.
pub const TOY_ADAM_LR: f64 = 1e-3;

/// Weight init std for the MNIST preset. At 0.02 the discriminator's tanh
/// features start out nearly identical across real images, the RBM fits that
/// single pattern and the generator collapses within a few hundred steps.
pub const MNIST_INIT_STD: f64 = 0.15;

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig::for_dataset(DatasetKind::Toy2d)
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value '{value}' for '{key}'")))
}

impl TrainConfig {
    /// Defaults, with preset and feature width chosen for `dataset`.
    pub fn for_dataset(dataset: DatasetKind) -> Self {
        let adam = AdamConfig::default();
        let rbm = MomentumConfig::default();
        let toy = Toy2dConfig::default();
        let (preset, feature_dim, adam_lr, init_std) = match dataset {
            DatasetKind::Toy2d => (Preset::Toy2d, 16, TOY_ADAM_LR, crate::adversarial::DEFAULT_INIT_STD),
            DatasetKind::Mnist => (Preset::MnistSmall, 64, adam.lr, MNIST_INIT_STD),
        };
        TrainConfig {
            mode: TrainMode::Aan,
            dataset,
            preset,
            g_mode: GeneratorObjective::NonSaturating,
            binarize: BinarizeMode::Stochastic,
            generator_input: GeneratorInput::Spins,
            latent: LatentSource::Rbm,
            noise: NoiseKind::Uniform,
            stride_rule: StrideRule::Dcgan,
            batch_size: 256,
            cd_steps: 2,
            feature_dim,
            rbm_hidden: feature_dim,
            steps: 1000,
            seed: 0,
            rbm_lr: rbm.lr,
            rbm_momentum: rbm.momentum,
            rbm_init_std: crate::rbm::model::DEFAULT_INIT_STD,
            adam_lr,
            adam_beta1: adam.beta1,
            adam_beta2: adam.beta2,
            adam_eps: adam.eps,
            leaky_slope: crate::nn::layers::DEFAULT_LEAKY_SLOPE,
            init_std,
            toy_n: toy.n,
            toy_centers: toy.centers,
            toy_radius: toy.radius,
            toy_noise_std: toy.noise_std,
            data_seed: toy.seed,
            mnist_dir: PathBuf::from("data/mnist5k"),
            heldout_fraction: 0.1,
            eval_batch: 256,
            checkpoint_every: 0,
        }
    }

    /// Builds a configuration from `key -> value` pairs over the defaults.
    ///
    /// `dataset` picks the base defaults, so `preset` and `feature_dim` follow
    /// it unless given; `rbm_hidden` follows `feature_dim` unless given.
    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        for key in pairs.keys() {
            if !CONFIG_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown key '{key}'")));
            }
        }
        let dataset = match pairs.get("dataset") {
            Some(v) => parse("dataset", v)?,
            None => DatasetKind::Toy2d,
        };
        let mut cfg = TrainConfig::for_dataset(dataset);
        for (k, v) in pairs {
            cfg.set(k, v)?;
        }
        if !pairs.contains_key("rbm_hidden") {
            cfg.rbm_hidden = cfg.feature_dim;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "mode" => self.mode = parse(key, v)?,
            "dataset" => self.dataset = parse(key, v)?,
            "preset" => self.preset = parse(key, v)?,
            "g_mode" => self.g_mode = parse(key, v)?,
            "binarize" => self.binarize = parse(key, v)?,
            "generator_input" => self.generator_input = parse(key, v)?,
            "latent" => self.latent = parse(key, v)?,
            "noise" => self.noise = parse(key, v)?,
            "stride_rule" => self.stride_rule = parse(key, v)?,
            "batch_size" => self.batch_size = parse(key, v)?,
            "cd_steps" => self.cd_steps = parse(key, v)?,
            "feature_dim" => self.feature_dim = parse(key, v)?,
            "rbm_hidden" => self.rbm_hidden = parse(key, v)?,
            "steps" => self.steps = parse(key, v)?,
            "seed" => self.seed = parse(key, v)?,
            "rbm_lr" => self.rbm_lr = parse(key, v)?,
            "rbm_momentum" => self.rbm_momentum = parse(key, v)?,
            "rbm_init_std" => self.rbm_init_std = parse(key, v)?,
            "adam_lr" => self.adam_lr = parse(key, v)?,
            "adam_beta1" => self.adam_beta1 = parse(key, v)?,
            "adam_beta2" => self.adam_beta2 = parse(key, v)?,
            "adam_eps" => self.adam_eps = parse(key, v)?,
            "leaky_slope" => self.leaky_slope = parse(key, v)?,
            "init_std" => self.init_std = parse(key, v)?,
            "toy_n" => self.toy_n = parse(key, v)?,
            "toy_centers" => self.toy_centers = parse(key, v)?,
            "toy_radius" => self.toy_radius = parse(key, v)?,
            "toy_noise_std" => self.toy_noise_std = parse(key, v)?,
            "data_seed" => self.data_seed = parse(key, v)?,
            "mnist_dir" => self.mnist_dir = PathBuf::from(v),
            "heldout_fraction" => self.heldout_fraction = parse(key, v)?,
            "eval_batch" => self.eval_batch = parse(key, v)?,
            "checkpoint_every" => self.checkpoint_every = parse(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "mode" => self.mode.to_string(),
            "dataset" => self.dataset.to_string(),
            "preset" => self.preset.to_string(),
            "g_mode" => self.g_mode.to_string(),
            "binarize" => self.binarize.to_string(),
            "generator_input" => self.generator_input.to_string(),
            "latent" => self.latent.to_string(),
            "noise" => self.noise.to_string(),
            "stride_rule" => self.stride_rule.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "cd_steps" => self.cd_steps.to_string(),
            "feature_dim" => self.feature_dim.to_string(),
            "rbm_hidden" => self.rbm_hidden.to_string(),
            "steps" => self.steps.to_string(),
            "seed" => self.seed.to_string(),
            "rbm_lr" => self.rbm_lr.to_string(),
            "rbm_momentum" => self.rbm_momentum.to_string(),
            "rbm_init_std" => self.rbm_init_std.to_string(),
            "adam_lr" => self.adam_lr.to_string(),
            "adam_beta1" => self.adam_beta1.to_string(),
            "adam_beta2" => self.adam_beta2.to_string(),
            "adam_eps" => self.adam_eps.to_string(),
            "leaky_slope" => self.leaky_slope.to_string(),
            "init_std" => self.init_std.to_string(),
            "toy_n" => self.toy_n.to_string(),
            "toy_centers" => self.toy_centers.to_string(),
            "toy_radius" => self.toy_radius.to_string(),
            "toy_noise_std" => self.toy_noise_std.to_string(),
            "data_seed" => self.data_seed.to_string(),
            "mnist_dir" => self.mnist_dir.display().to_string(),
            "heldout_fraction" => self.heldout_fraction.to_string(),
            "eval_batch" => self.eval_batch.to_string(),
            "checkpoint_every" => self.checkpoint_every.to_string(),
            _ => return None,
        })
    }

    /// Every key on its own line; `parse_text` of the result reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&self.get(key).expect("listed key"));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        TrainConfig::from_pairs(&parse_pairs(text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.batch_size < 2 {
            return bad(format!("batch_size must be >= 2, got {}", self.batch_size));
        }
        if self.cd_steps < 1 {
            return bad("cd_steps must be >= 1".into());
        }
        if self.feature_dim < 1 || self.rbm_hidden < 1 {
            return bad("feature_dim and rbm_hidden must be >= 1".into());
        }
        if self.eval_batch < 2 {
            return bad(format!("eval_batch must be >= 2, got {}", self.eval_batch));
        }
        let expected = match self.dataset {
            DatasetKind::Toy2d => vec![Preset::Toy2d],
            DatasetKind::Mnist => vec![Preset::MnistSmall],
        };
        if !expected.contains(&self.preset) {
            return bad(format!("preset {} does not fit dataset {}", self.preset, self.dataset));
        }
        let nonneg = [
            ("rbm_lr", self.rbm_lr),
            ("adam_lr", self.adam_lr),
            ("toy_noise_std", self.toy_noise_std),
        ];
        for (k, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{k} must be finite and >= 0, got {v}"));
            }
        }
        let unit = [
            ("rbm_momentum", self.rbm_momentum),
            ("adam_beta1", self.adam_beta1),
            ("adam_beta2", self.adam_beta2),
            ("heldout_fraction", self.heldout_fraction),
        ];
        for (k, v) in unit {
            if !(0.0..1.0).contains(&v) {
                return bad(format!("{k} must lie in [0, 1), got {v}"));
            }
        }
        let positive = [
            ("adam_eps", self.adam_eps),
            ("rbm_init_std", self.rbm_init_std),
            ("init_std", self.init_std),
            ("toy_radius", self.toy_radius),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{k} must be finite and > 0, got {v}"));
            }
        }
        if self.dataset == DatasetKind::Toy2d && self.toy_n < self.toy_centers.max(1) {
            return bad(format!("toy_n ({}) must be >= toy_centers ({})", self.toy_n, self.toy_centers));
        }
        Ok(())
    }

    pub fn arch(&self) -> ArchConfig {
        ArchConfig {
            preset: self.preset,
            feature_dim: self.feature_dim,
            stride_rule: self.stride_rule,
            leaky_slope: self.leaky_slope,
            init_std: self.init_std,
        }
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.adam_lr,
            beta1: self.adam_beta1,
            beta2: self.adam_beta2,
            eps: self.adam_eps,
        }
    }

    pub fn momentum(&self) -> MomentumConfig {
        MomentumConfig {
            lr: self.rbm_lr,
            momentum: self.rbm_momentum,
        }
    }

    pub fn toy2d(&self) -> Toy2dConfig {
        Toy2dConfig {
            n: self.toy_n,
            centers: self.toy_centers,
            radius: self.toy_radius,
            noise_std: self.toy_noise_std,
            seed: self.data_seed,
        }
    }
}

/// Parses `key = value` lines; blank lines and `#` comments are skipped and
/// later duplicates win.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value'", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        map.insert(k.to_string(), v.to_string());
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cfg = TrainConfig::for_dataset(DatasetKind::Mnist);
        cfg.adam_lr = 1.0 / 3.0;
        cfg.seed = 99;
        let back = TrainConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn dataset_drives_defaults() {
        let cfg = TrainConfig::from_text("dataset = mnist\n").unwrap();
        assert_eq!((cfg.preset, cfg.feature_dim, cfg.rbm_hidden), (Preset::MnistSmall, 64, 64));
        let cfg = TrainConfig::from_text("feature_dim = 8 # narrow\n").unwrap();
        assert_eq!((cfg.preset, cfg.feature_dim, cfg.rbm_hidden), (Preset::Toy2d, 8, 8));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(TrainConfig::from_text("batch_size = 1").is_err());
        assert!(TrainConfig::from_text("cd_steps = 0").is_err());
        assert!(TrainConfig::from_text("colour = blue").is_err());
        assert!(TrainConfig::from_text("mode aan").is_err());
        assert!(TrainConfig::from_text("dataset = mnist\npreset = toy2d").is_err());
        assert!(TrainConfig::from_text("adam_lr = nan").is_err());
    }

    #[test]
    fn defaults_match_training_settings() {
        let c = TrainConfig::default();
        assert_eq!((c.batch_size, c.cd_steps), (256, 2));
        assert_eq!((c.rbm_lr, c.rbm_momentum), (0.001, 0.8));
        assert_eq!(c.adam(), AdamConfig { lr: TOY_ADAM_LR, ..AdamConfig::default() });
        let m = TrainConfig::for_dataset(DatasetKind::Mnist);
        assert_eq!(m.adam(), AdamConfig::default());
        assert_eq!(m.init_std, MNIST_INIT_STD);
    }
}

use std::f64::consts::LN_2;
use std::path::PathBuf;

use aan_core::adversarial::{binarize_features, BinarizeMode, NoiseKind};
use aan_core::config::{LatentSource, TrainMode};
use aan_core::data::DatasetKind;
use aan_core::nn::log_sigmoid;
use aan_core::rbm::exact_log_likelihood;
use aan_core::trainer::TrainState;
use aan_core::{TrainConfig, Trainer};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn toy(steps: u64) -> TrainConfig {
    let mut cfg = TrainConfig::for_dataset(DatasetKind::Toy2d);
    cfg.toy_n = 1024;
    cfg.batch_size = 64;
    cfg.eval_batch = 64;
    cfg.steps = steps;
    cfg
}

fn mnist_dir() -> PathBuf {
    PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/mnist5k"))
}

fn run(cfg: &TrainConfig, steps: usize) -> Vec<aan_core::StepMetrics> {
    let mut t = Trainer::new(cfg.clone()).unwrap();
    (0..steps).map(|_| t.step().unwrap()).collect()
}

#[test]
fn runs_are_reproducible() {
    let cfg = toy(5);
    assert_eq!(run(&cfg, 5), run(&cfg, 5));
    let mut other = cfg.clone();
    other.seed = 1;
    assert_ne!(run(&cfg, 5), run(&other, 5));
}

#[test]
fn uniform_spin_latent_matches_gan_with_spin_noise() {
    let mut aan = toy(8);
    aan.latent = LatentSource::UniformSpins;
    let mut gan = toy(8);
    gan.mode = TrainMode::Gan;
    gan.noise = NoiseKind::Spins;
    let a = run(&aan, 8);
    let g = run(&gan, 8);
    for (x, y) in a.iter().zip(&g) {
        assert_eq!(x, y);
    }
}

#[test]
fn frozen_networks_still_train_the_rbm() {
    let mut cfg = toy(300);
    cfg.adam_lr = 0.0;
    cfg.feature_dim = 4;
    cfg.rbm_hidden = 3;
    cfg.init_std = 0.5;
    cfg.binarize = BinarizeMode::Sign;
    let mut t = Trainer::new(cfg.clone()).unwrap();
    let heldout = t.heldout.clone().unwrap();
    let (d0, g0) = (t.state.d.clone(), t.state.g.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let spins = binarize_features(&t.state.d.features(&heldout.samples).unwrap(), cfg.binarize, &mut rng).unwrap();
    let before = exact_log_likelihood(&t.state.rbm.params, &spins).unwrap();
    for _ in 0..300 {
        t.step().unwrap();
    }
    let after = exact_log_likelihood(&t.state.rbm.params, &spins).unwrap();
    assert_eq!(t.state.d, d0);
    assert_eq!(t.state.g, g0);
    // Uniform spins score -4 log 2; frozen features are far from uniform.
    assert!(after > before + 0.1, "held-out log-likelihood {before} -> {after}");
}

#[test]
fn discriminator_starts_near_the_half_fixed_point() {
    let mut mnist = TrainConfig::for_dataset(DatasetKind::Mnist);
    mnist.mnist_dir = mnist_dir();
    mnist.mode = TrainMode::Gan;
    let mut toy_gan = toy(1);
    toy_gan.mode = TrainMode::Gan;
    for cfg in [toy_gan, mnist] {
        let t = Trainer::new(cfg).unwrap();
        let state = TrainState::new(&t.config).unwrap();
        let logits = state.d.forward(&t.eval.real).unwrap().logits;
        let e = logits.data().iter().map(|&l| log_sigmoid(l)).sum::<f64>() / logits.len() as f64;
        assert!((e + LN_2).abs() < 0.2, "E[log D(x)] = {e}");
    }
}

#[test]
fn mnist_steps_are_finite() {
    let mut cfg = TrainConfig::for_dataset(DatasetKind::Mnist);
    cfg.mnist_dir = mnist_dir();
    cfg.batch_size = 32;
    cfg.eval_batch = 32;
    for m in run(&cfg, 3) {
        assert!(m.is_finite(), "{m:?}");
        assert!((0.0..=1.0).contains(&m.rbm_recon_error));
    }
}

#[test]
fn generated_toy_points_lie_in_box() {
    let mut t = Trainer::new(toy(3)).unwrap();
    for _ in 0..3 {
        t.step().unwrap();
    }
    let x = t.generate(50, 9).unwrap();
    assert_eq!(x.shape(), &[50, 2]);
    assert!(x.data().iter().all(|v| v.abs() <= 1.0));
    assert_eq!(x, t.generate(50, 9).unwrap());
}

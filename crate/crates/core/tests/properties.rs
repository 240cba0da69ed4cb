use aan_core::adversarial::{binarize_features, gan_losses, BinarizeMode, GeneratorObjective};
use aan_core::config::parse_pairs;
use aan_core::data::DatasetKind;
use aan_core::nn::{Conv2d, ConvTranspose2d};
use aan_core::nn::{bce_from_logit, log_one_minus_sigmoid, log_sigmoid};
use aan_core::rbm::{RbmParams, SpinBatch};
use aan_core::{TrainConfig, Tensor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conv_output_size(size in 1usize..20, k in 1usize..6, s in 1usize..4, ic in 1usize..3, oc in 1usize..3) {
        prop_assume!(size >= k);
        let conv = Conv2d::zeros(ic, oc, k, s).unwrap();
        let out = conv.forward(&Tensor::zeros(&[1, ic, size, size])).unwrap();
        // Count window starts 0, s, 2s, ... with start + k <= size.
        let starts = (0..size).step_by(s).filter(|&p| p + k <= size).count();
        prop_assert_eq!(out.shape(), &[1, oc, starts, starts][..]);
    }

    #[test]
    fn conv_transpose_inverts_size(size in 1usize..8, k in 1usize..6, s in 1usize..4, op_seed in 0usize..4) {
        let op = op_seed % s;
        let up = ConvTranspose2d::zeros(2, 3, k, s, op).unwrap();
        let out = up.forward(&Tensor::zeros(&[2, 2, size, size])).unwrap();
        let big = out.shape()[2];
        prop_assert_eq!(big, (size - 1) * s + k + op);
        // The strided convolution with the same geometry maps back.
        let down = Conv2d::zeros(3, 2, k, s).unwrap();
        prop_assert_eq!(down.forward(&out).unwrap().shape()[2], size);
    }

    #[test]
    fn tensor_reshape_round_trip(dims in proptest::collection::vec(1usize..5, 1..4), extra in 1usize..4) {
        let n: usize = dims.iter().product::<usize>() * extra;
        let data: Vec<f64> = (0..n).map(|i| i as f64 * 0.5 - 3.0).collect();
        let mut shape = vec![extra];
        shape.extend(&dims);
        let t = Tensor::new(shape.clone(), data.clone()).unwrap();
        let flat = t.reshape(&[n]).unwrap();
        prop_assert_eq!(flat.data(), &data[..]);
        prop_assert_eq!(flat.reshape(&shape).unwrap(), t.clone());
        prop_assert!(t.reshape(&[n + 1]).is_err());
        let rows: Vec<usize> = (0..extra).rev().collect();
        let back = t.select(&rows).select(&rows);
        prop_assert_eq!(back, t);
    }

    #[test]
    fn bce_finite_on_large_logits(logit in -1e3f64..1e3, target in prop_oneof![Just(0.0), Just(1.0)]) {
        let (loss, grad) = bce_from_logit(logit, target);
        prop_assert!(loss.is_finite() && loss >= 0.0);
        prop_assert!(grad.is_finite() && grad.abs() <= 1.0);
        prop_assert!(log_sigmoid(logit).is_finite() && log_sigmoid(logit) <= 0.0);
        prop_assert!(log_one_minus_sigmoid(logit).is_finite());
    }

    #[test]
    fn gan_losses_finite_and_g_modes_agree_in_sign(
        real in proptest::collection::vec(-1e3f64..1e3, 1..8),
        fake in proptest::collection::vec(-1e3f64..1e3, 1..8),
    ) {
        let r = Tensor::new(vec![real.len(), 1], real).unwrap();
        let f = Tensor::new(vec![fake.len(), 1], fake).unwrap();
        let mm = gan_losses(&r, &f, GeneratorObjective::Minimax).unwrap();
        let ns = gan_losses(&r, &f, GeneratorObjective::NonSaturating).unwrap();
        for l in [&mm, &ns] {
            prop_assert!(l.d_loss.is_finite() && l.g_loss.is_finite());
            prop_assert!(l.value.log_d_real.is_finite() && l.value.log_d_fake.is_finite());
        }
        // Both objectives push fake logits up: strictly negative gradients.
        for (a, b) in mm.g_grad_fake.data().iter().zip(ns.g_grad_fake.data()) {
            prop_assert!(*a <= 0.0 && *b <= 0.0);
            prop_assert!(*a < 0.0 || *b < 0.0);
        }
    }

    #[test]
    fn binarized_features_are_spins(values in proptest::collection::vec(-1.0f64..=1.0, 1..40), seed in any::<u64>()) {
        let n = values.len();
        let f = Tensor::new(vec![1, n], values.clone()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = binarize_features(&f, BinarizeMode::Stochastic, &mut rng).unwrap();
        prop_assert!(s.data().iter().all(|&x| x == 1 || x == -1));
        let sign = binarize_features(&f, BinarizeMode::Sign, &mut rng).unwrap();
        for (x, v) in sign.data().iter().zip(&values) {
            prop_assert_eq!(*x, if *v >= 0.0 { 1 } else { -1 });
        }
        // f = ±1 is deterministic in stochastic mode.
        let ends = Tensor::new(vec![1, 2], vec![1.0, -1.0]).unwrap();
        let fixed = binarize_features(&ends, BinarizeMode::Stochastic, &mut rng).unwrap();
        prop_assert_eq!(fixed.data(), &[1, -1][..]);
    }

    #[test]
    fn conditionals_are_probabilities(
        nv in 1usize..6,
        nh in 1usize..6,
        std in 0.0f64..5.0,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = if std == 0.0 { RbmParams::zeros(nv, nh).unwrap() } else { RbmParams::gaussian(nv, nh, std, &mut rng).unwrap() };
        let v = SpinBatch::filled(3, nv, -1);
        let h = SpinBatch::filled(3, nh, 1);
        for x in p.hidden_conditional(&v).unwrap().into_iter().chain(p.visible_conditional(&h).unwrap()) {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        // tanh expectations agree with the conditionals: E[s] = 2p − 1.
        for (e, q) in p.hidden_expectation(&v).unwrap().iter().zip(p.hidden_conditional(&v).unwrap()) {
            prop_assert!((e - (2.0 * q - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_batch_rejects_non_spins(bad in any::<i8>().prop_filter("not a spin", |x| *x != 1 && *x != -1)) {
        prop_assert!(SpinBatch::new(1, 2, vec![1, bad]).is_err());
    }

    #[test]
    fn config_text_round_trip(
        seed in any::<u64>(),
        steps in 1u64..100_000,
        fd in 1usize..200,
        lr in 1e-6f64..1e-1,
        cd in 1usize..10,
        toy in any::<bool>(),
        sign in any::<bool>(),
    ) {
        let mut cfg = TrainConfig::for_dataset(if toy { DatasetKind::Toy2d } else { DatasetKind::Mnist });
        cfg.seed = seed;
        cfg.steps = steps;
        cfg.feature_dim = fd;
        cfg.rbm_hidden = fd + 1;
        cfg.adam_lr = lr;
        cfg.cd_steps = cd;
        cfg.binarize = if sign { BinarizeMode::Sign } else { BinarizeMode::Stochastic };
        let text = cfg.to_text();
        prop_assert_eq!(TrainConfig::from_text(&text).unwrap(), cfg.clone());
        // Every line is a key the parser accepts back.
        prop_assert_eq!(parse_pairs(&text).unwrap().len(), text.lines().filter(|l| l.contains('=')).count());
    }
}

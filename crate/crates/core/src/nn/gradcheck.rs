//! Central finite-difference verification of analytic gradients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::nn::network::Sequential;
use crate::tensor::Tensor;

/// Gradient components smaller than this are compared on an absolute scale.
pub const RELATIVE_ERROR_FLOOR: f64 = 1e-4;

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(RELATIVE_ERROR_FLOOR)
}

/// Report from [`finite_difference_check`].
#[derive(Clone, Debug)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    /// Location of the worst component, e.g. `"layer 2 param 0 [5]"` or `"input [3]"`.
    pub worst: String,
    pub checked: usize,
}

/// Compares analytic gradients of `L = Σ r ⊙ net(input)` (with a fixed random
/// projection `r`) against central differences for every parameter and every
/// input element.
///
/// `corrupt` optionally perturbs one analytic parameter-gradient component
/// (flat index over all parameters), which is used as a negative control.
pub fn finite_difference_check_with(
    net: &Sequential,
    input: &Tensor,
    eps: f64,
    seed: u64,
    corrupt: Option<(usize, f64)>,
) -> Result<GradCheckReport> {
    if !(1e-7..=1e-3).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps must lie in [1e-7, 1e-3], got {eps}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = net.forward(input)?;
    let proj: Vec<f64> = (0..out.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let objective = |n: &Sequential, x: &Tensor| -> Result<f64> {
        let y = n.forward(x)?;
        Ok(y.data().iter().zip(&proj).map(|(a, b)| a * b).sum())
    };

    let mut work = net.clone();
    work.zero_grad();
    let trace = work.forward_trace(input)?;
    let grad_in = work.backward(&trace, &Tensor::new(out.shape().to_vec(), proj.clone())?)?;

    let mut analytic: Vec<(String, f64)> = Vec::new();
    for (li, layer) in work.layers.iter().enumerate() {
        for (pi, (_, g)) in layer.params().into_iter().enumerate() {
            for (k, &v) in g.data().iter().enumerate() {
                analytic.push((format!("layer {li} param {pi} [{k}]"), v));
            }
        }
    }
    if let Some((idx, delta)) = corrupt {
        if let Some(entry) = analytic.get_mut(idx) {
            entry.1 += delta;
        }
    }

    let mut report = GradCheckReport {
        max_relative_error: 0.0,
        worst: String::new(),
        checked: 0,
    };
    let mut record = |name: &str, a: f64, n: f64| {
        let e = relative_error(a, n);
        report.checked += 1;
        if e > report.max_relative_error || report.worst.is_empty() {
            report.max_relative_error = e;
            report.worst = name.to_string();
        }
    };

    let mut probe = net.clone();
    let mut flat = 0;
    for li in 0..probe.layers.len() {
        let nparams = probe.layers[li].params().len();
        for pi in 0..nparams {
            let len = probe.layers[li].params()[pi].0.len();
            for k in 0..len {
                let orig = probe.layers[li].params()[pi].0.data()[k];
                probe.layers[li].params_mut()[pi].0.data_mut()[k] = orig + eps;
                let plus = objective(&probe, input)?;
                probe.layers[li].params_mut()[pi].0.data_mut()[k] = orig - eps;
                let minus = objective(&probe, input)?;
                probe.layers[li].params_mut()[pi].0.data_mut()[k] = orig;
                let numeric = (plus - minus) / (2.0 * eps);
                let (name, a) = &analytic[flat];
                record(name, *a, numeric);
                flat += 1;
            }
        }
    }

    let mut x = input.clone();
    for k in 0..x.len() {
        let orig = x.data()[k];
        x.data_mut()[k] = orig + eps;
        let plus = objective(net, &x)?;
        x.data_mut()[k] = orig - eps;
        let minus = objective(net, &x)?;
        x.data_mut()[k] = orig;
        record(&format!("input [{k}]"), grad_in.data()[k], (plus - minus) / (2.0 * eps));
    }
    Ok(report)
}

pub fn finite_difference_check(net: &Sequential, input: &Tensor, eps: f64) -> Result<f64> {
    finite_difference_check_with(net, input, eps, 0x5eed, None).map(|r| r.max_relative_error)
}

/// One named network checked by [`gradient_suite`].
#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub name: String,
    pub report: GradCheckReport,
}

/// Step used by [`gradient_suite`].
pub const SUITE_EPS: f64 = 1e-5;

fn random_input(shape: Vec<usize>, rng: &mut impl Rng) -> Tensor {
    let n: usize = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    Tensor::new(shape, data).expect("positive dims")
}

/// Random small instances of every layer kind plus a three-layer MLP and a
/// conv/transposed-conv stack, each checked by [`finite_difference_check_with`].
/// Returns `instances` rounds of cases.
pub fn gradient_suite(instances: usize, seed: u64) -> Result<Vec<SuiteCase>> {
    use crate::nn::layers::{Activation, Conv2d, ConvTranspose2d, Dense, Layer};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = Vec::new();
    for i in 0..instances {
        let mut nets: Vec<(String, Sequential, Tensor)> = Vec::new();
        let batch = rng.random_range(1..=3);

        let (fi, fo) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let dense = Dense::gaussian(fi, fo, 0.7, &mut rng);
        let mut dense = dense;
        dense.bias = random_input(vec![fo], &mut rng);
        nets.push((format!("dense {fi}x{fo}"), Sequential::new(vec![Layer::Dense(dense)]), random_input(vec![batch, fi], &mut rng)));

        let (ic, oc) = (rng.random_range(1..=3), rng.random_range(1..=3));
        let k = rng.random_range(1..=3);
        let stride = rng.random_range(1..=3);
        let size = rng.random_range(k..=7);
        let mut conv = Conv2d::gaussian(ic, oc, k, stride, 0.7, &mut rng)?;
        conv.bias = random_input(vec![oc], &mut rng);
        nets.push((
            format!("conv2d {ic}->{oc} k{k} s{stride} on {size}x{size}"),
            Sequential::new(vec![Layer::Conv2d(conv)]),
            random_input(vec![batch, ic, size, size], &mut rng),
        ));

        let op = rng.random_range(0..stride);
        let size_t = rng.random_range(1..=4);
        let mut convt = ConvTranspose2d::gaussian(ic, oc, k, stride, op, 0.7, &mut rng)?;
        convt.bias = random_input(vec![oc], &mut rng);
        nets.push((
            format!("conv_transpose2d {ic}->{oc} k{k} s{stride} op{op} on {size_t}x{size_t}"),
            Sequential::new(vec![Layer::ConvTranspose2d(convt)]),
            random_input(vec![batch, ic, size_t, size_t], &mut rng),
        ));

        let slope = rng.random_range(0.05..0.95);
        for act in [Activation::Relu, Activation::LeakyRelu(slope), Activation::Tanh, Activation::Sigmoid] {
            nets.push((
                format!("{act:?}"),
                Sequential::new(vec![Layer::Activation(act)]),
                random_input(vec![batch, rng.random_range(1..=8)], &mut rng),
            ));
        }

        let (a, b, c) = (rng.random_range(2..=5), rng.random_range(2..=6), rng.random_range(2..=6));
        let mlp = Sequential::new(vec![
            Layer::Dense(Dense::gaussian(a, b, 0.8, &mut rng)),
            Layer::Activation(Activation::LeakyRelu(0.2)),
            Layer::Dense(Dense::gaussian(b, c, 0.8, &mut rng)),
            Layer::Activation(Activation::Tanh),
            Layer::Dense(Dense::gaussian(c, 1, 0.8, &mut rng)),
            Layer::Activation(Activation::Sigmoid),
        ]);
        nets.push((format!("mlp {a}-{b}-{c}-1"), mlp, random_input(vec![batch, a], &mut rng)));

        let stack = Sequential::new(vec![
            Layer::Conv2d(Conv2d::gaussian(1, 2, 3, 2, 0.6, &mut rng)?),
            Layer::Activation(Activation::LeakyRelu(0.2)),
            Layer::Reshape(vec![2 * 2 * 2]),
            Layer::Dense(Dense::gaussian(8, 8, 0.6, &mut rng)),
            Layer::Activation(Activation::Relu),
            Layer::Reshape(vec![2, 2, 2]),
            Layer::ConvTranspose2d(ConvTranspose2d::gaussian(2, 1, 3, 2, 0, 0.6, &mut rng)?),
            Layer::Activation(Activation::Tanh),
        ]);
        nets.push(("conv stack".into(), stack, random_input(vec![batch, 1, 5, 5], &mut rng)));

        for (name, net, input) in nets {
            let report = finite_difference_check_with(&net, &input, SUITE_EPS, seed ^ i as u64, None)?;
            cases.push(SuiteCase {
                name: format!("#{i} {name}"),
                report,
            });
        }
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_tight() {
        let cases = gradient_suite(5, 11).unwrap();
        let worst = cases
            .iter()
            .max_by(|a, b| a.report.max_relative_error.total_cmp(&b.report.max_relative_error))
            .unwrap();
        assert!(worst.report.max_relative_error < 1e-5, "{} {:?}", worst.name, worst.report);
    }

    #[test]
    fn eps_bounds() {
        let net = Sequential::new(vec![]);
        let x = Tensor::zeros(&[1, 1]);
        assert!(finite_difference_check(&net, &x, 1e-2).is_err());
        assert!(finite_difference_check(&net, &x, 1e-8).is_err());
    }
}

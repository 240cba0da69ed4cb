use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::nn::layers::sigmoid;

/// A batch of ±1 spin vectors stored row-major.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinBatch {
    rows: usize,
    dim: usize,
    data: Vec<i8>,
}

impl SpinBatch {
    pub fn new(rows: usize, dim: usize, data: Vec<i8>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::shape(
                "spins",
                format!("{rows}x{dim} batch needs {} entries, got {}", rows * dim, data.len()),
            ));
        }
        if let Some(i) = data.iter().position(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidArgument(format!(
                "spin entry {i} is {}, expected -1 or +1",
                data[i]
            )));
        }
        Ok(SpinBatch { rows, dim, data })
    }

    pub fn filled(rows: usize, dim: usize, value: i8) -> Self {
        assert!(value == 1 || value == -1);
        SpinBatch {
            rows,
            dim,
            data: vec![value; rows * dim],
        }
    }

    /// Spins from a `[rows, dim]` buffer of ±1 floats.
    pub fn from_f64(rows: usize, dim: usize, values: &[f64]) -> Result<Self> {
        let data = values
            .iter()
            .map(|&x| {
                if x == 1.0 {
                    Ok(1)
                } else if x == -1.0 {
                    Ok(-1)
                } else {
                    Err(Error::InvalidArgument(format!("{x} is not a spin")))
                }
            })
            .collect::<Result<Vec<i8>>>()?;
        SpinBatch::new(rows, dim, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[i8] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(|&s| s as f64).collect()
    }

    pub fn select(&self, indices: &[usize]) -> SpinBatch {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        SpinBatch {
            rows: indices.len(),
            dim: self.dim,
            data,
        }
    }
}

/// Draws `+1` with the given probability, else `-1`.
pub fn sample_spins(probabilities: &[f64], rng: &mut impl Rng) -> Vec<i8> {
    probabilities
        .iter()
        .map(|&p| if rng.random::<f64>() < p { 1 } else { -1 })
        .collect()
}

/// Ising-spin RBM parameters. `weights` is `n_visible × n_hidden` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RbmParams {
    pub n_visible: usize,
    pub n_hidden: usize,
    pub weights: Vec<f64>,
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
}

pub const DEFAULT_INIT_STD: f64 = 0.01;

impl RbmParams {
    pub fn zeros(n_visible: usize, n_hidden: usize) -> Result<Self> {
        if n_visible == 0 || n_hidden == 0 {
            return Err(Error::InvalidArgument(format!(
                "RBM needs at least one unit per layer, got {n_visible}x{n_hidden}"
            )));
        }
        Ok(RbmParams {
            n_visible,
            n_hidden,
            weights: vec![0.0; n_visible * n_hidden],
            visible_bias: vec![0.0; n_visible],
            hidden_bias: vec![0.0; n_hidden],
        })
    }

    /// Gaussian weights with the given std, zero biases.
    pub fn gaussian(n_visible: usize, n_hidden: usize, std: f64, rng: &mut impl Rng) -> Result<Self> {
        let mut p = Self::zeros(n_visible, n_hidden)?;
        let normal = Normal::new(0.0, std).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        p.weights.iter_mut().for_each(|w| *w = normal.sample(rng));
        Ok(p)
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n_hidden + j]
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.len() != self.n_visible * self.n_hidden
            || self.visible_bias.len() != self.n_visible
            || self.hidden_bias.len() != self.n_hidden
        {
            return Err(Error::shape(
                "rbm",
                format!(
                    "{}x{} RBM with buffers W={}, b={}, c={}",
                    self.n_visible,
                    self.n_hidden,
                    self.weights.len(),
                    self.visible_bias.len(),
                    self.hidden_bias.len()
                ),
            ));
        }
        let all = self.weights.iter().chain(&self.visible_bias).chain(&self.hidden_bias);
        if all.clone().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                op: "rbm",
                detail: "parameters contain NaN or infinity".into(),
            });
        }
        Ok(())
    }

    fn check_len(&self, what: &'static str, got: usize, want: usize) -> Result<()> {
        if got != want {
            return Err(Error::shape(
                "rbm",
                format!("{what} has length {got}, RBM expects {want}"),
            ));
        }
        Ok(())
    }

    /// `E(v,h) = ½Σv_i² − Σ v_i h_j w_ij − Σ v_i b_i − Σ h_j c_j`.
    pub fn energy(&self, v: &[i8], h: &[i8]) -> Result<f64> {
        self.check_len("visible state", v.len(), self.n_visible)?;
        self.check_len("hidden state", h.len(), self.n_hidden)?;
        Ok(self.energy_unchecked(v, h))
    }

    pub(crate) fn energy_unchecked(&self, v: &[i8], h: &[i8]) -> f64 {
        let mut e = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            let vi = vi as f64;
            e += 0.5 * vi * vi - vi * self.visible_bias[i];
            let row = &self.weights[i * self.n_hidden..(i + 1) * self.n_hidden];
            let mut coupling = 0.0;
            for (w, &hj) in row.iter().zip(h) {
                coupling += w * hj as f64;
            }
            e -= vi * coupling;
        }
        for (c, &hj) in self.hidden_bias.iter().zip(h) {
            e -= hj as f64 * c;
        }
        e
    }

    /// Local fields `c_j + Σ_i w_ij v_i` for a batch of visible states.
    pub fn hidden_fields(&self, v: &SpinBatch) -> Result<Vec<f64>> {
        self.check_len("visible state", v.dim(), self.n_visible)?;
        let mut out = Vec::with_capacity(v.rows() * self.n_hidden);
        for r in 0..v.rows() {
            let mut field = self.hidden_bias.clone();
            for (i, &vi) in v.row(r).iter().enumerate() {
                let row = &self.weights[i * self.n_hidden..(i + 1) * self.n_hidden];
                let s = vi as f64;
                for (f, w) in field.iter_mut().zip(row) {
                    *f += w * s;
                }
            }
            out.extend(field);
        }
        Ok(out)
    }

    /// Local fields `b_i + Σ_j w_ij h_j` for a batch of hidden states.
    pub fn visible_fields(&self, h: &SpinBatch) -> Result<Vec<f64>> {
        self.check_len("hidden state", h.dim(), self.n_hidden)?;
        let mut out = Vec::with_capacity(h.rows() * self.n_visible);
        for r in 0..h.rows() {
            let hr = h.row(r);
            for i in 0..self.n_visible {
                let row = &self.weights[i * self.n_hidden..(i + 1) * self.n_hidden];
                let dot: f64 = row.iter().zip(hr).map(|(w, &s)| w * s as f64).sum();
                out.push(self.visible_bias[i] + dot);
            }
        }
        Ok(out)
    }

    /// `P(h_j = +1 | v) = σ(2 · field_j)`.
    pub fn hidden_conditional(&self, v: &SpinBatch) -> Result<Vec<f64>> {
        Ok(self.hidden_fields(v)?.into_iter().map(spin_up_probability).collect())
    }

    /// `P(v_i = +1 | h) = σ(2 · field_i)`.
    pub fn visible_conditional(&self, h: &SpinBatch) -> Result<Vec<f64>> {
        Ok(self.visible_fields(h)?.into_iter().map(spin_up_probability).collect())
    }

    /// `E[h_j | v] = tanh(field_j) = 2 P(h_j = +1 | v) − 1`.
    pub fn hidden_expectation(&self, v: &SpinBatch) -> Result<Vec<f64>> {
        Ok(self.hidden_fields(v)?.into_iter().map(f64::tanh).collect())
    }

    pub fn visible_expectation(&self, h: &SpinBatch) -> Result<Vec<f64>> {
        Ok(self.visible_fields(h)?.into_iter().map(f64::tanh).collect())
    }

    /// Flat views of `(weights, visible bias, hidden bias)`, in that order.
    pub fn buffers_mut(&mut self) -> [&mut [f64]; 3] {
        [&mut self.weights, &mut self.visible_bias, &mut self.hidden_bias]
    }

    pub fn buffer_sizes(&self) -> [usize; 3] {
        [self.weights.len(), self.visible_bias.len(), self.hidden_bias.len()]
    }
}

/// Probability of a +1 spin in a local field: the ratio of Boltzmann factors
/// `e^{f} / (e^{f} + e^{-f})`.
pub fn spin_up_probability(field: f64) -> f64 {
    sigmoid(2.0 * field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_energy_is_half_nv() {
        let p = RbmParams::zeros(2, 3).unwrap();
        assert_eq!(p.energy(&[1, -1], &[1, 1, -1]).unwrap(), 1.0);
    }

    #[test]
    fn single_coupling_energy() {
        let mut p = RbmParams::zeros(1, 1).unwrap();
        p.weights[0] = 0.5;
        assert_eq!(p.energy(&[1], &[1]).unwrap(), 0.0);
    }

    #[test]
    fn global_flip_leaves_energy_unchanged_without_biases() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = RbmParams::gaussian(4, 3, 1.0, &mut rng).unwrap();
        let v = [1, -1, -1, 1];
        let h = [-1, 1, 1];
        let vf: Vec<i8> = v.iter().map(|s| -s).collect();
        let hf: Vec<i8> = h.iter().map(|s| -s).collect();
        assert_eq!(p.energy(&v, &h).unwrap(), p.energy(&vf, &hf).unwrap());
    }

    #[test]
    fn energy_rejects_wrong_length() {
        let p = RbmParams::zeros(2, 2).unwrap();
        assert!(p.energy(&[1], &[1, 1]).is_err());
    }

    #[test]
    fn conditional_closed_forms() {
        let p = RbmParams::zeros(3, 2).unwrap();
        let v = SpinBatch::filled(1, 3, 1);
        assert!(p.hidden_conditional(&v).unwrap().iter().all(|&x| x == 0.5));

        let mut p = RbmParams::zeros(1, 1).unwrap();
        p.weights[0] = 1.0;
        let up = SpinBatch::filled(1, 1, 1);
        let ph = p.hidden_conditional(&up).unwrap()[0];
        assert!((ph - 0.880_797_077_977_882_3).abs() < 1e-15);

        p.weights[0] = -1.0;
        let pv = p.visible_conditional(&up).unwrap()[0];
        assert!((pv - 0.119_202_922_022_117_58).abs() < 1e-15);
    }

    #[test]
    fn expectation_is_two_p_minus_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = RbmParams::gaussian(5, 4, 1.0, &mut rng).unwrap();
        let v = SpinBatch::new(1, 5, vec![1, -1, 1, 1, -1]).unwrap();
        let probs = p.hidden_conditional(&v).unwrap();
        let means = p.hidden_expectation(&v).unwrap();
        for (pr, m) in probs.iter().zip(&means) {
            assert!((2.0 * pr - 1.0 - m).abs() < 1e-15);
        }
    }

    #[test]
    fn spin_batch_validation() {
        assert!(SpinBatch::new(1, 2, vec![1, 0]).is_err());
        assert!(SpinBatch::new(1, 2, vec![1]).is_err());
        assert!(SpinBatch::from_f64(1, 2, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn degenerate_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_spins(&[1.0; 100], &mut rng).iter().all(|&s| s == 1));
        assert!(sample_spins(&[0.0; 100], &mut rng).iter().all(|&s| s == -1));
    }
}

use crate::error::{Error, Result};
use crate::nn::layers::Layer;
use crate::tensor::Tensor;

/// A feed-forward stack of layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequential {
    pub layers: Vec<Layer>,
}

/// Activations recorded by [`Sequential::forward_trace`]; `activations[0]` is the
/// input and `activations[i + 1]` the output of layer `i`.
#[derive(Clone, Debug)]
pub struct Trace {
    pub activations: Vec<Tensor>,
    start: usize,
}

impl Trace {
    pub fn output(&self) -> &Tensor {
        self.activations.last().expect("trace holds at least the input")
    }

    pub fn input(&self) -> &Tensor {
        &self.activations[0]
    }
}

impl Sequential {
    pub fn new(layers: Vec<Layer>) -> Self {
        Sequential { layers }
    }

    pub fn len(&self) -> usize {
        self.layers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layers.is_empty()
    }

    pub fn forward(&self, input: &Tensor) -> Result<Tensor> {
        self.forward_range(input, 0, self.layers.len())
    }

    /// Runs layers `start..end` only.
    pub fn forward_range(&self, input: &Tensor, start: usize, end: usize) -> Result<Tensor> {
        let mut x = input.clone();
        for layer in &self.layers[start..end] {
            x = layer.forward(&x)?;
        }
        Ok(x)
    }

    pub fn forward_trace(&self, input: &Tensor) -> Result<Trace> {
        self.forward_trace_range(input, 0, self.layers.len())
    }

    pub fn forward_trace_range(&self, input: &Tensor, start: usize, end: usize) -> Result<Trace> {
        let mut activations = Vec::with_capacity(end - start + 1);
        activations.push(input.clone());
        for layer in &self.layers[start..end] {
            let y = layer.forward(activations.last().unwrap())?;
            activations.push(y);
        }
        Ok(Trace { activations, start })
    }

    /// Backpropagates `grad_out` through the traced layers, accumulating
    /// parameter gradients, and returns the gradient at the trace input.
    pub fn backward(&mut self, trace: &Trace, grad_out: &Tensor) -> Result<Tensor> {
        let end = trace.start + trace.activations.len() - 1;
        if end > self.layers.len() {
            return Err(Error::InvalidArgument(format!(
                "trace covers layers {}..{end} but the network has {}",
                trace.start,
                self.layers.len()
            )));
        }
        if grad_out.shape() != trace.output().shape() {
            return Err(Error::shape(
                "backward",
                format!("upstream gradient {:?} vs output {:?}", grad_out.shape(), trace.output().shape()),
            ));
        }
        let mut g = grad_out.clone();
        for (offset, layer) in self.layers[trace.start..end].iter_mut().enumerate().rev() {
            g = layer.backward(&trace.activations[offset], &trace.activations[offset + 1], &g)?;
        }
        Ok(g)
    }

    pub fn zero_grad(&mut self) {
        for layer in &mut self.layers {
            for (_, g) in layer.params_mut() {
                g.fill(0.0);
            }
        }
    }

    /// `(parameter, gradient)` pairs in layer order.
    pub fn params_mut(&mut self) -> Vec<(&mut Tensor, &mut Tensor)> {
        self.layers.iter_mut().flat_map(Layer::params_mut).collect()
    }

    pub fn params(&self) -> Vec<(&Tensor, &Tensor)> {
        self.layers.iter().flat_map(Layer::params).collect()
    }

    pub fn param_count(&self) -> usize {
        self.params().iter().map(|(p, _)| p.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.params().iter().all(|(p, _)| p.is_finite())
    }
}

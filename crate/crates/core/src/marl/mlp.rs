//! Fully connected network with flat parameter storage and exact
//! reverse-mode gradients with respect to both parameters and inputs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::MarlError;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Identity,
    Relu,
    Tanh,
}

impl Activation {
    fn apply<T: Real>(self, x: T) -> T {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(T::zero()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output<T: Real>(self, y: T) -> T {
        match self {
            Activation::Identity => T::one(),
            Activation::Relu => {
                if y > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Activation::Tanh => T::one() - y * y,
        }
    }
}

/// Layer widths `sizes[0] -> sizes[1] -> ... -> sizes[L]`. Weights of layer
/// `l` are stored row-major (`out x in`) followed by its bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    sizes: Vec<usize>,
    hidden: Activation,
    output: Activation,
    params: Vec<T>,
    offsets: Vec<usize>,
}

/// Post-activation values of every layer from one forward pass, input
/// first.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    pub layers: Vec<Vec<T>>,
}

impl<T> Tape<T> {
    pub fn output(&self) -> &[T] {
        self.layers.last().expect("tape holds at least the input")
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(sizes.len());
    let mut acc = 0;
    out.push(0);
    for w in sizes.windows(2) {
        acc += w[0] * w[1] + w[1];
        out.push(acc);
    }
    out
}

impl<T: Real> Mlp<T> {
    /// Network with all parameters zero.
    pub fn zeros(sizes: &[usize], hidden: Activation, output: Activation) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|&s| s > 0), "need at least one layer of positive width");
        let offsets = offsets(sizes);
        Mlp {
            sizes: sizes.to_vec(),
            hidden,
            output,
            params: vec![T::zero(); *offsets.last().unwrap()],
            offsets,
        }
    }

    /// Uniform fan-in initialisation: hidden layers in `+-1/sqrt(fan_in)`,
    /// the output layer in `+-final_scale`.
    pub fn init<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden: Activation,
        output: Activation,
        final_scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut net = Self::zeros(sizes, hidden, output);
        let layers = net.num_layers();
        for l in 0..layers {
            let bound = if l + 1 == layers { final_scale } else { 1.0 / (sizes[l] as f64).sqrt() };
            for p in &mut net.params[net.offsets[l]..net.offsets[l + 1]] {
                *p = T::of(rng.random_range(-bound..=bound));
            }
        }
        net
    }

    pub fn from_params(sizes: &[usize], hidden: Activation, output: Activation, params: Vec<T>) -> Result<Self, MarlError> {
        let mut net = Self::zeros(sizes, hidden, output);
        if params.len() != net.params.len() {
            return Err(MarlError::Shape { what: "parameter vector", expected: net.params.len(), got: params.len() });
        }
        net.params = params;
        Ok(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn activations(&self) -> (Activation, Activation) {
        (self.hidden, self.output)
    }

    pub fn num_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [T] {
        &mut self.params
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn activation(&self, layer: usize) -> Activation {
        if layer + 1 == self.num_layers() {
            self.output
        } else {
            self.hidden
        }
    }

    fn check_input(&self, x: &[T]) -> Result<(), MarlError> {
        if x.len() != self.input_dim() {
            return Err(MarlError::Shape { what: "network input", expected: self.input_dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, MarlError> {
        Ok(self.forward_tape(x)?.layers.pop().unwrap())
    }

    pub fn forward_tape(&self, x: &[T]) -> Result<Tape<T>, MarlError> {
        self.check_input(x)?;
        let mut layers = Vec::with_capacity(self.sizes.len());
        layers.push(x.to_vec());
        for l in 0..self.num_layers() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[self.offsets[l]..self.offsets[l] + n_in * n_out];
            let b = &self.params[self.offsets[l] + n_in * n_out..self.offsets[l + 1]];
            let act = self.activation(l);
            let input = &layers[l];
            let out: Vec<T> = (0..n_out)
                .map(|o| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let z = row.iter().zip(input).fold(b[o], |acc, (&wi, &xi)| acc + wi * xi);
                    act.apply(z)
                })
                .collect();
            layers.push(out);
        }
        Ok(Tape { layers })
    }

    /// Back-propagates `upstream` (d objective / d output) through the pass
    /// recorded in `tape`. Parameter gradients are added into `param_grad`
    /// when given; the gradient with respect to the input is returned.
    pub fn backward(&self, tape: &Tape<T>, upstream: &[T], mut param_grad: Option<&mut [T]>) -> Result<Vec<T>, MarlError> {
        if upstream.len() != self.output_dim() {
            return Err(MarlError::Shape { what: "upstream gradient", expected: self.output_dim(), got: upstream.len() });
        }
        if let Some(g) = param_grad.as_deref() {
            if g.len() != self.params.len() {
                return Err(MarlError::Shape { what: "gradient buffer", expected: self.params.len(), got: g.len() });
            }
        }
        let mut delta: Vec<T> = upstream.to_vec();
        for l in (0..self.num_layers()).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let act = self.activation(l);
            let y = &tape.layers[l + 1];
            for (d, &yo) in delta.iter_mut().zip(y) {
                *d = *d * act.derivative_from_output(yo);
            }
            let x = &tape.layers[l];
            let w_off = self.offsets[l];
            if let Some(g) = param_grad.as_deref_mut() {
                for o in 0..n_out {
                    let d = delta[o];
                    if d != T::zero() {
                        let row = &mut g[w_off + o * n_in..w_off + (o + 1) * n_in];
                        for (gi, &xi) in row.iter_mut().zip(x) {
                            *gi = *gi + d * xi;
                        }
                    }
                    g[w_off + n_in * n_out + o] = g[w_off + n_in * n_out + o] + d;
                }
            }
            let w = &self.params[w_off..w_off + n_in * n_out];
            let mut next = vec![T::zero(); n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d != T::zero() {
                    for (ni, &wi) in next.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                        *ni = *ni + wi * d;
                    }
                }
            }
            delta = next;
        }
        Ok(delta)
    }

    /// `self <- self + tau (main - self)`; `tau = 1` copies exactly.
    pub fn soft_update_from(&mut self, main: &Mlp<T>, tau: T) {
        soft_update(&mut self.params, &main.params, tau);
    }
}

/// Elementwise `target <- target + tau * (main - target)`, which leaves
/// `target` bit-identical when it already equals `main`.
pub fn soft_update<T: Real>(target: &mut [T], main: &[T], tau: T) {
    assert_eq!(target.len(), main.len(), "soft update shape");
    if tau == T::one() {
        target.copy_from_slice(main);
        return;
    }
    for (t, &m) in target.iter_mut().zip(main) {
        *t = *t + tau * (m - *t);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn zero_net_gives_zero() {
        let net: Mlp<f64> = Mlp::zeros(&[3, 4, 2], Activation::Relu, Activation::Identity);
        assert_eq!(net.forward(&[1.0, -2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn identity_layer() {
        let mut net: Mlp<f64> = Mlp::zeros(&[3, 3], Activation::Relu, Activation::Identity);
        for i in 0..3 {
            net.params_mut()[i * 3 + i] = 1.0;
        }
        assert_eq!(net.forward(&[0.5, -1.0, 2.0]).unwrap(), vec![0.5, -1.0, 2.0]);
    }

    #[test]
    fn shape_errors() {
        let net: Mlp<f64> = Mlp::zeros(&[3, 2], Activation::Relu, Activation::Identity);
        assert!(net.forward(&[1.0]).is_err());
        let tape = net.forward_tape(&[0.0; 3]).unwrap();
        assert!(net.backward(&tape, &[1.0], None).is_err());
        assert!(Mlp::<f64>::from_params(&[3, 2], Activation::Relu, Activation::Identity, vec![0.0; 3]).is_err());
    }

    #[test]
    fn linear_input_gradient_is_transpose() {
        let mut rng = stream(3, Purpose::Init, 0);
        let net: Mlp<f64> = Mlp::init(&[3, 2], Activation::Relu, Activation::Identity, 1.0, &mut rng);
        let tape = net.forward_tape(&[0.1, 0.2, 0.3]).unwrap();
        let up = [0.7, -1.3];
        let g = net.backward(&tape, &up, None).unwrap();
        let w = net.params();
        for i in 0..3 {
            assert_eq!(g[i], w[i] * up[0] + w[3 + i] * up[1]);
        }
    }

    #[test]
    fn zero_upstream_zero_gradients() {
        let mut rng = stream(4, Purpose::Init, 0);
        let net: Mlp<f64> = Mlp::init(&[4, 5, 3], Activation::Relu, Activation::Tanh, 0.5, &mut rng);
        let tape = net.forward_tape(&[0.3, -0.1, 0.9, 0.0]).unwrap();
        let mut pg = vec![0.0; net.num_params()];
        let ig = net.backward(&tape, &[0.0; 3], Some(&mut pg)).unwrap();
        assert!(pg.iter().chain(&ig).all(|&g| g == 0.0));
    }

    #[test]
    fn tanh_output_is_bounded() {
        let mut rng = stream(5, Purpose::Init, 0);
        let net: Mlp<f32> = Mlp::init(&[2, 8, 3], Activation::Relu, Activation::Tanh, 10.0, &mut rng);
        let y = net.forward(&[100.0, -50.0]).unwrap();
        assert!(y.iter().all(|v| (-1.0..=1.0).contains(v)));
    }

    #[test]
    fn soft_update_examples() {
        let mut t = vec![0.0f64];
        soft_update(&mut t, &[1.0], 0.005);
        assert_eq!(t[0], 0.005);
        let mut t = vec![0.3f64, -2.0];
        soft_update(&mut t, &[1.5, 7.0], 1.0);
        assert_eq!(t, vec![1.5, 7.0]);
    }
}

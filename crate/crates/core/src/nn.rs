//! Dense ReLU networks over a flat parameter vector, softmax and Adam.
//!
//! Parameters are stored layer by layer; each layer holds its weight matrix
//! row-major (`out x in`) followed by its bias vector. The flat layout is what
//! personalization blends, so it must stay stable.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MlpArchitecture {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub output_dim: usize,
}

impl MlpArchitecture {
    pub fn new(input_dim: usize, hidden: Vec<usize>, output_dim: usize) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 || hidden.contains(&0) {
            return Err(Error::invalid("arch", "all layer widths must be >= 1"));
        }
        Ok(MlpArchitecture {
            input_dim,
            hidden,
            output_dim,
        })
    }

    /// Two hidden layers of 128 and 64 units.
    pub fn default_for(input_dim: usize, output_dim: usize) -> Self {
        MlpArchitecture {
            input_dim,
            hidden: vec![128, 64],
            output_dim,
        }
    }

    /// `(fan_in, fan_out)` per layer.
    pub fn layers(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden.len() + 2);
        dims.push(self.input_dim);
        dims.extend_from_slice(&self.hidden);
        dims.push(self.output_dim);
        dims.windows(2).map(|w| (w[0], w[1])).collect()
    }

    pub fn param_count(&self) -> usize {
        self.layers().iter().map(|(i, o)| (i + 1) * o).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    arch: MlpArchitecture,
    params: Vec<f64>,
}

/// Post-activation values of every layer for one input.
#[derive(Debug, Clone)]
pub struct Trace {
    activations: Vec<Vec<f64>>,
}

impl Trace {
    pub fn output(&self) -> &[f64] {
        self.activations.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

impl PolicyModel {
    pub fn zeros(arch: MlpArchitecture) -> Self {
        let n = arch.param_count();
        PolicyModel {
            arch,
            params: vec![0.0; n],
        }
    }

    /// Uniform `+-1/sqrt(fan_in)` initialization.
    pub fn init<R: Rng + ?Sized>(arch: MlpArchitecture, rng: &mut R) -> Self {
        let mut params = Vec::with_capacity(arch.param_count());
        for (fan_in, fan_out) in arch.layers() {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for _ in 0..(fan_in + 1) * fan_out {
                params.push(rng.random_range(-bound..bound));
            }
        }
        PolicyModel { arch, params }
    }

    pub fn from_params(arch: MlpArchitecture, params: Vec<f64>) -> Result<Self> {
        let m = PolicyModel::zeros(arch);
        m.import_params(params)
    }

    pub fn arch(&self) -> &MlpArchitecture {
        &self.arch
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn export_params(&self) -> Vec<f64> {
        self.params.clone()
    }

    pub fn import_params(mut self, params: Vec<f64>) -> Result<Self> {
        if params.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                actual: params.len(),
            });
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("params", "must be finite"));
        }
        self.params = params;
        Ok(self)
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        Ok(self.trace(input)?.activations.pop().unwrap_or_default())
    }

    /// Forward pass keeping intermediate activations for [`Self::accumulate_gradient`].
    pub fn trace(&self, input: &[f64]) -> Result<Trace> {
        if input.len() != self.arch.input_dim {
            return Err(Error::Dimension {
                expected: self.arch.input_dim,
                actual: input.len(),
            });
        }
        let layers = self.arch.layers();
        let last = layers.len() - 1;
        let mut activations = Vec::with_capacity(layers.len() + 1);
        activations.push(input.to_vec());
        let mut off = 0;
        for (l, &(fan_in, fan_out)) in layers.iter().enumerate() {
            let w = &self.params[off..off + fan_in * fan_out];
            let b = &self.params[off + fan_in * fan_out..off + (fan_in + 1) * fan_out];
            let x = &activations[l];
            let mut y: Vec<f64> = (0..fan_out)
                .map(|o| {
                    let row = &w[o * fan_in..(o + 1) * fan_in];
                    b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
                })
                .collect();
            if l != last {
                y.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(y);
            off += (fan_in + 1) * fan_out;
        }
        Ok(Trace { activations })
    }

    /// Add `scale * d(output . upstream)/d(params)` into `grad`.
    pub fn accumulate_gradient(
        &self,
        trace: &Trace,
        upstream: &[f64],
        scale: f64,
        grad: &mut [f64],
    ) -> Result<()> {
        if upstream.len() != self.arch.output_dim {
            return Err(Error::Dimension {
                expected: self.arch.output_dim,
                actual: upstream.len(),
            });
        }
        if grad.len() != self.params.len() {
            return Err(Error::Dimension {
                expected: self.params.len(),
                actual: grad.len(),
            });
        }
        let layers = self.arch.layers();
        let mut offsets = Vec::with_capacity(layers.len());
        let mut off = 0;
        for &(i, o) in &layers {
            offsets.push(off);
            off += (i + 1) * o;
        }
        let mut delta: Vec<f64> = upstream.iter().map(|g| g * scale).collect();
        for l in (0..layers.len()).rev() {
            let (fan_in, fan_out) = layers[l];
            let off = offsets[l];
            let x = &trace.activations[l];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                let row = &mut grad[off + o * fan_in..off + (o + 1) * fan_in];
                for (g, xi) in row.iter_mut().zip(x) {
                    *g += d * xi;
                }
                grad[off + fan_in * fan_out + o] += d;
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + fan_in * fan_out];
            let mut prev = vec![0.0; fan_in];
            for o in 0..fan_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * fan_in..(o + 1) * fan_in]) {
                    *p += d * wi;
                }
            }
            // ReLU derivative of the layer feeding this one.
            for (p, a) in prev.iter_mut().zip(x) {
                if *a <= 0.0 {
                    *p = 0.0;
                }
            }
            delta = prev;
        }
        Ok(())
    }

    /// Gradient of `output . upstream` with respect to the parameters.
    pub fn backward(&self, input: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        let trace = self.trace(input)?;
        let mut grad = vec![0.0; self.params.len()];
        self.accumulate_gradient(&trace, upstream, 1.0, &mut grad)?;
        Ok(grad)
    }

    /// Index of the largest output (first on ties).
    pub fn greedy(&self, input: &[f64]) -> Result<usize> {
        Ok(argmax(&self.forward(input)?))
    }
}

pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    logits.iter().map(|l| l - lse).collect()
}

/// Sample an index from the softmax of `logits`; returns it with its
/// log-probability.
pub fn softmax_sample<R: Rng + ?Sized>(logits: &[f64], rng: &mut R) -> (usize, f64) {
    let lp = log_softmax(logits);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, l) in lp.iter().enumerate() {
        acc += l.exp();
        if u < acc {
            return (i, *l);
        }
    }
    let i = lp.len() - 1;
    (i, lp[i])
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_stab: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step: u64,
}

impl AdamState {
    pub fn new(n_params: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps_stab: 1e-8,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
            step: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected descent step along `grads`.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dimension {
                expected: self.m.len(),
                actual: if params.len() != self.m.len() {
                    params.len()
                } else {
                    grads.len()
                },
            });
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            params[i] -= self.lr * mh / (vh.sqrt() + self.eps_stab);
        }
        Ok(())
    }
}

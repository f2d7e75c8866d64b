use ndarray::Array2;
use rand::Rng;

use crate::error::{Error, Result};

/// Glorot-uniform bound `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out).max(1) as f64).sqrt()
}

/// Index of a tensor inside [`Params`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

/// One trainable tensor together with its gradient and Adam moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Array2<f64>,
    pub grad: Array2<f64>,
    m: Array2<f64>,
    v: Array2<f64>,
}

impl Param {
    fn new(name: String, value: Array2<f64>) -> Self {
        let shape = value.raw_dim();
        Param {
            name,
            value,
            grad: Array2::zeros(shape),
            m: Array2::zeros(shape),
            v: Array2::zeros(shape),
        }
    }
}

/// Ordered collection of trainable tensors plus the Adam timestep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    tensors: Vec<Param>,
    step: u64,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Array2<f64>) -> ParamId {
        self.tensors.push(Param::new(name.into(), value));
        ParamId(self.tensors.len() - 1)
    }

    /// Adds a `rows x cols` tensor with entries drawn from `U(-limit, limit)`.
    pub fn add_uniform(
        &mut self,
        name: impl Into<String>,
        rows: usize,
        cols: usize,
        limit: f64,
        rng: &mut impl Rng,
    ) -> ParamId {
        let value = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-limit..limit));
        self.add(name, value)
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> ParamId {
        self.add(name, Array2::zeros((rows, cols)))
    }

    #[inline]
    pub fn value(&self, id: ParamId) -> &Array2<f64> {
        &self.tensors[id.0].value
    }

    #[inline]
    pub fn value_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.tensors[id.0].value
    }

    #[inline]
    pub fn grad(&self, id: ParamId) -> &Array2<f64> {
        &self.tensors[id.0].grad
    }

    #[inline]
    pub fn grad_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.tensors[id.0].grad
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.tensors[id.0].name
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.tensors.len()).map(ParamId)
    }

    pub fn tensors(&self) -> &[Param] {
        &self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|p| p.value.len()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.tensors {
            p.grad.fill(0.0);
        }
    }

    /// Name of the first tensor whose value or gradient is not finite.
    pub fn first_non_finite(&self) -> Option<&str> {
        self.tensors
            .iter()
            .find(|p| p.value.iter().chain(p.grad.iter()).any(|x| !x.is_finite()))
            .map(|p| p.name.as_str())
    }

    /// Copies values from `(name, tensor)` pairs, matching names and shapes.
    pub fn load_values(&mut self, values: &[(String, Array2<f64>)]) -> Result<()> {
        if values.len() != self.tensors.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} tensors, found {}",
                self.tensors.len(),
                values.len()
            )));
        }
        for (p, (name, value)) in self.tensors.iter_mut().zip(values) {
            if &p.name != name || p.value.dim() != value.dim() {
                return Err(Error::Checkpoint(format!(
                    "tensor {name} {:?} does not match {} {:?}",
                    value.dim(),
                    p.name,
                    p.value.dim()
                )));
            }
            p.value.assign(value);
        }
        Ok(())
    }

    pub fn named_values(&self) -> Vec<(String, Array2<f64>)> {
        self.tensors
            .iter()
            .map(|p| (p.name.clone(), p.value.clone()))
            .collect()
    }
}

/// Adam hyperparameters; the defaults are the usual `0.9 / 0.999 / 1e-8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl AdamConfig {
    pub fn new(lr: f64, weight_decay: f64) -> Self {
        AdamConfig {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay,
        }
    }
}

/// Gradient buffers shaped like a [`Params`], allocated on first touch.
///
/// Lets several workers accumulate gradients independently before the
/// results are summed into the parameters in a fixed order.
#[derive(Debug, Clone)]
pub struct Grads {
    shapes: Vec<(usize, usize)>,
    bufs: Vec<Option<Array2<f64>>>,
}

impl Grads {
    pub fn for_params(params: &Params) -> Self {
        Grads {
            shapes: params.tensors.iter().map(|p| p.value.dim()).collect(),
            bufs: vec![None; params.tensors.len()],
        }
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        let shape = self.shapes[id.0];
        self.bufs[id.0].get_or_insert_with(|| Array2::zeros(shape))
    }

    pub fn get(&self, id: ParamId) -> Option<&Array2<f64>> {
        self.bufs[id.0].as_ref()
    }

    /// Adds every touched buffer of `other` into `self`.
    pub fn merge(&mut self, other: Grads) {
        for (i, buf) in other.bufs.into_iter().enumerate() {
            if let Some(buf) = buf {
                match &mut self.bufs[i] {
                    Some(mine) => *mine += &buf,
                    slot => *slot = Some(buf),
                }
            }
        }
    }
}

impl Params {
    /// Adds accumulated buffers into the stored gradients.
    pub fn add_grads(&mut self, grads: &Grads) {
        for (p, buf) in self.tensors.iter_mut().zip(&grads.bufs) {
            if let Some(buf) = buf {
                p.grad += buf;
            }
        }
    }
}

/// One Adam step over every tensor using the gradients currently stored.
///
/// Weight decay is decoupled: `w <- w - lr * weight_decay * w` is applied
/// before the moment update and does not enter the moments.
pub fn adam_step(params: &mut Params, cfg: &AdamConfig) {
    params.step += 1;
    let t = params.step as i32;
    let bias1 = 1.0 - cfg.beta1.powi(t);
    let bias2 = 1.0 - cfg.beta2.powi(t);
    let decay = cfg.lr * cfg.weight_decay;
    for p in &mut params.tensors {
        ndarray::Zip::from(&mut p.value)
            .and(&p.grad)
            .and(&mut p.m)
            .and(&mut p.v)
            .for_each(|w, &g, m, v| {
                if decay != 0.0 {
                    *w -= decay * *w;
                }
                *m = cfg.beta1 * *m + (1.0 - cfg.beta1) * g;
                *v = cfg.beta2 * *v + (1.0 - cfg.beta2) * g * g;
                let m_hat = *m / bias1;
                let v_hat = *v / bias2;
                *w -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = Params::new();
        let id = p.add("w", array![[1.0, -2.0]]);
        for _ in 0..10 {
            adam_step(&mut p, &AdamConfig::new(1e-2, 0.0));
        }
        assert_eq!(p.value(id), &array![[1.0, -2.0]]);
        assert_eq!(p.step(), 10);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient() {
        let mut p = Params::new();
        let id = p.add("w", array![[0.0, 0.0]]);
        p.grad_mut(id).assign(&array![[3.0, -0.5]]);
        adam_step(&mut p, &AdamConfig::new(0.1, 0.0));
        let w = p.value(id);
        assert!((w[[0, 0]] + 0.1).abs() < 1e-8);
        assert!((w[[0, 1]] - 0.1).abs() < 1e-8);
    }

    #[test]
    fn constant_gradient_step_tends_to_lr() {
        let mut p = Params::new();
        let id = p.add("w", array![[0.0]]);
        let cfg = AdamConfig::new(1e-3, 0.0);
        let mut prev = 0.0;
        let mut last_step = 0.0;
        for _ in 0..2000 {
            p.grad_mut(id).fill(0.7);
            adam_step(&mut p, &cfg);
            let w = p.value(id)[[0, 0]];
            last_step = prev - w;
            prev = w;
        }
        assert!((last_step - 1e-3).abs() < 1e-8, "{last_step}");
    }

    #[test]
    fn decoupled_decay_shrinks_without_gradient() {
        let mut p = Params::new();
        let id = p.add("w", array![[2.0]]);
        adam_step(&mut p, &AdamConfig::new(0.1, 0.5));
        assert!((p.value(id)[[0, 0]] - 1.9).abs() < 1e-12);
    }

    #[test]
    fn load_values_checks_shape() {
        let mut p = Params::new();
        p.add("a", Array2::zeros((2, 2)));
        assert!(p.load_values(&[("a".into(), Array2::ones((2, 3)))]).is_err());
        assert!(p.load_values(&[("b".into(), Array2::ones((2, 2)))]).is_err());
        p.load_values(&[("a".into(), Array2::ones((2, 2)))]).unwrap();
        assert_eq!(p.tensors()[0].value.sum(), 4.0);
    }
}

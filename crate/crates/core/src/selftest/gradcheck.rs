//! Central finite-difference checks of every hand-written backward pass.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::synthetic::{random_connected_graph, random_features, random_labels};
use crate::error::Result;
use crate::features::DeVariant;
use crate::graph::Graph;
use crate::model::{build_samples, ModelConfig, Network, NodeClassification, Preset};
use crate::nn::{softmax_cross_entropy_row, Activation, DenseLayer, Grads, Objective, Params, SageLayer};

pub const FD_STEP: f64 = 1e-5;
pub const REL_TOL: f64 = 1e-4;
/// Denominator floor so that entries whose true gradient is ~0 are judged
/// by absolute error instead of a meaningless ratio.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub name: String,
    pub checked: usize,
    pub failed: usize,
    pub max_rel_err: f64,
    pub worst: String,
}

impl GradCheckReport {
    fn new(name: impl Into<String>) -> Self {
        GradCheckReport {
            name: name.into(),
            checked: 0,
            failed: 0,
            max_rel_err: 0.0,
            worst: String::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checked > 0
    }

    fn record(&mut self, what: &str, analytic: f64, numeric: f64) {
        let err = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR);
        self.checked += 1;
        if !(err <= REL_TOL) {
            self.failed += 1;
        }
        if !(err <= self.max_rel_err) {
            self.max_rel_err = err;
            self.worst = format!("{what}: analytic {analytic:e}, numeric {numeric:e}");
        }
    }

    fn absorb(&mut self, other: GradCheckReport) {
        self.checked += other.checked;
        self.failed += other.failed;
        if other.max_rel_err > self.max_rel_err {
            self.max_rel_err = other.max_rel_err;
            self.worst = format!("{}: {}", other.name, other.worst);
        }
    }
}

/// Compares `analytic` with central differences of `loss` while entry
/// `(r, c)` of some tensor is shifted through `shift`.
fn compare(
    report: &mut GradCheckReport,
    label: &str,
    analytic: &Array2<f64>,
    mut loss_with: impl FnMut(usize, usize, f64) -> Result<f64>,
) -> Result<()> {
    for ((r, c), &a) in analytic.indexed_iter() {
        let plus = loss_with(r, c, FD_STEP)?;
        let minus = loss_with(r, c, -FD_STEP)?;
        report.record(&format!("{label}[{r},{c}]"), a, (plus - minus) / (2.0 * FD_STEP));
    }
    Ok(())
}

fn random_matrix(rows: usize, cols: usize, rng: &mut impl Rng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-1.0..1.0))
}

/// Checks every parameter tensor of `params` against `loss`.
fn compare_params(
    report: &mut GradCheckReport,
    params: &mut Params,
    analytic: &Grads,
    mut loss: impl FnMut(&Params) -> Result<f64>,
) -> Result<()> {
    for id in params.ids().collect::<Vec<_>>() {
        let grad = analytic
            .get(id)
            .cloned()
            .unwrap_or_else(|| Array2::zeros(params.value(id).raw_dim()));
        let name = params.name(id).to_string();
        compare(report, &name, &grad, |r, c, d| {
            let orig = params.value(id)[[r, c]];
            params.value_mut(id)[[r, c]] = orig + d;
            let out = loss(params);
            params.value_mut(id)[[r, c]] = orig;
            out
        })?;
    }
    Ok(())
}

/// SAGE layer on a random 6-node graph with an extra pre-activation term.
/// Loss `sum(out * R)` for a fixed random `R`.
pub fn check_sage_layer(seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = random_connected_graph(6, 0.3, &mut rng);
    let mut params = Params::new();
    let layer = SageLayer::new(&mut params, "sage", 3, 4, 6, Activation::Relu, &mut rng);
    params.value_mut(layer.bias).assign(&random_matrix(1, 4, &mut rng));
    let input = random_matrix(6, 3, &mut rng);
    let extra = random_matrix(6, 4, &mut rng);
    let weights = random_matrix(6, 4, &mut rng);
    let loss = |p: &Params, x: &Array2<f64>, e: &Array2<f64>| -> Result<f64> {
        let (out, _) = layer.forward(p, &g, x.view(), 6, Some(e.view()))?;
        Ok((&out * &weights).sum())
    };
    let (_, cache) = layer.forward(&params, &g, input.view(), 6, Some(extra.view()))?;
    let mut grads = Grads::for_params(&params);
    let (d_pre, d_in) = layer.backward(&params, &mut grads, &g, input.view(), &cache, weights.view(), true);

    let mut report = GradCheckReport::new("sage layer");
    compare_params(&mut report, &mut params, &grads, |p| loss(p, &input, &extra))?;
    let d_in = d_in.expect("input gradient requested");
    compare(&mut report, "input", &d_in, |r, c, d| {
        let mut x = input.clone();
        x[[r, c]] += d;
        loss(&params, &x, &extra)
    })?;
    compare(&mut report, "extra", &d_pre, |r, c, d| {
        let mut e = extra.clone();
        e[[r, c]] += d;
        loss(&params, &input, &e)
    })?;
    Ok(report)
}

pub fn check_dense_layer(seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Params::new();
    let layer = DenseLayer::new(&mut params, "dense", 5, 3, 5, Activation::Relu, &mut rng);
    params.value_mut(layer.bias).assign(&random_matrix(1, 3, &mut rng));
    let x = random_matrix(4, 5, &mut rng);
    let weights = random_matrix(4, 3, &mut rng);
    let loss = |p: &Params, x: &Array2<f64>| -> Result<f64> { Ok((&layer.forward(p, x.view(), None)?.0 * &weights).sum()) };
    let (_, cache) = layer.forward(&params, x.view(), None)?;
    let mut grads = Grads::for_params(&params);
    let (_, d_x) = layer.backward(&params, &mut grads, x.view(), &cache, weights.view(), true);
    let mut report = GradCheckReport::new("dense layer");
    compare_params(&mut report, &mut params, &grads, |p| loss(p, &x))?;
    compare(&mut report, "input", &d_x.expect("input gradient requested"), |r, c, d| {
        let mut x2 = x.clone();
        x2[[r, c]] += d;
        loss(&params, &x2)
    })?;
    Ok(report)
}

pub fn check_softmax_cross_entropy(seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let logits = random_matrix(1, 5, &mut rng).row(0).mapv(|x| 3.0 * x);
    let (_, grad) = softmax_cross_entropy_row(logits.view(), 2)?;
    let mut report = GradCheckReport::new("softmax cross-entropy");
    compare(&mut report, "logits", &grad.insert_axis(ndarray::Axis(0)), |_, c, d| {
        let mut l = logits.clone();
        l[c] += d;
        Ok(softmax_cross_entropy_row(l.view(), 2)?.0)
    })?;
    Ok(report)
}

/// Full model on a random connected 6-node graph: every target's
/// ego-subgraph, two SAGE layers, dropout with fixed masks, raw features.
pub fn check_composite(preset: Preset, de: Option<DeVariant>, seed: u64) -> Result<GradCheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Graph = random_connected_graph(6, 0.3, &mut rng);
    let features = random_features(6, 5, 0.6, &mut rng);
    let labels = random_labels(6, 3, &mut rng);
    let mut cfg = ModelConfig::preset(preset, de)?;
    cfg.num_layers = 2;
    cfg.hidden_dim = 4;
    let (net, mut params) = Network::new(cfg, 5, 3, seed)?;
    // non-zero biases keep ReLU inputs away from exact zeros
    for id in params.ids().collect::<Vec<_>>() {
        if params.name(id).ends_with("bias") {
            let shape = params.value(id).dim();
            params.value_mut(id).assign(&random_matrix(shape.0, shape.1, &mut rng).mapv(|x| 0.1 * x));
        }
    }
    let samples = build_samples(&g, &cfg)?;
    let obj = NodeClassification::new(&net, &features, &labels, &samples, 0.3)?;
    let nodes: Vec<usize> = (0..6).collect();
    let (epoch, run_seed) = (3, seed);

    let mut with_grads = params.clone();
    with_grads.zero_grad();
    obj.accumulate_gradients(&mut with_grads, &nodes, epoch, run_seed)?;
    let mut analytic = Grads::for_params(&params);
    for id in params.ids() {
        analytic.get_mut(id).assign(with_grads.grad(id));
    }
    let mut report = GradCheckReport::new(format!("{} composite", preset.label(de)));
    compare_params(&mut report, &mut params, &analytic, |p| obj.loss(p, &nodes, epoch, run_seed))?;
    Ok(report)
}

/// Every layer kind plus every preset's composite.
pub fn check_all(seed: u64) -> Result<GradCheckReport> {
    let mut total = GradCheckReport::new("all");
    total.absorb(check_sage_layer(seed)?);
    total.absorb(check_dense_layer(seed)?);
    total.absorb(check_softmax_cross_entropy(seed)?);
    for p in Preset::ALL {
        let variants: &[Option<DeVariant>] = if p.uses_de() {
            &[Some(DeVariant::Spd), Some(DeVariant::Rw)]
        } else {
            &[None]
        };
        for &de in variants {
            total.absorb(check_composite(p, de, seed)?);
        }
    }
    Ok(total)
}

use ndarray::{s, Array2, ArrayView2, Axis};
use rand::Rng;

use super::params::{glorot_limit, Grads, ParamId, Params};
use crate::error::{Error, Result};
use crate::graph::{Graph, Subgraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Sage,
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Identity,
}

impl Activation {
    fn apply(self, pre: &Array2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => pre.mapv(|x| x.max(0.0)),
            Activation::Identity => pre.clone(),
        }
    }

    fn backward(self, pre: &Array2<f64>, d_out: ArrayView2<f64>) -> Array2<f64> {
        match self {
            Activation::Relu => {
                let mut d = d_out.to_owned();
                ndarray::Zip::from(&mut d).and(pre).for_each(|d, &p| {
                    if p <= 0.0 {
                        *d = 0.0;
                    }
                });
                d
            }
            Activation::Identity => d_out.to_owned(),
        }
    }
}

/// Shape of one layer. `in_dim` counts only the dense input columns; a layer
/// may additionally receive a pre-activation term computed elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerSpec {
    pub kind: LayerKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub activation: Activation,
}

fn check(context: &'static str, expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            actual,
        });
    }
    Ok(())
}

/// Mean of neighbour rows of `h` for the first `rows` nodes of `adj`.
///
/// A node without neighbours aggregates to the zero vector. Neighbours are
/// summed in ascending local index order.
pub fn mean_aggregate(adj: &Graph, h: ArrayView2<f64>, rows: usize) -> Result<Array2<f64>> {
    let mut agg = Array2::zeros((rows, h.ncols()));
    for v in 0..rows {
        let nbrs = adj.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let mut row = agg.row_mut(v);
        for &u in nbrs {
            if u >= h.nrows() {
                return Err(Error::DimensionMismatch {
                    context: "mean aggregation (neighbour outside input rows)",
                    expected: h.nrows(),
                    actual: u + 1,
                });
            }
            row += &h.row(u);
        }
        let deg = nbrs.len() as f64;
        row.mapv_inplace(|x| x / deg);
    }
    Ok(agg)
}

/// Adjoint of [`mean_aggregate`]: scatters `d_agg[v] / |N(v)|` to each neighbour.
pub fn mean_aggregate_backward(adj: &Graph, d_agg: ArrayView2<f64>, in_rows: usize) -> Array2<f64> {
    let mut d_h = Array2::zeros((in_rows, d_agg.ncols()));
    for v in 0..d_agg.nrows() {
        let nbrs = adj.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let scaled = d_agg.row(v).mapv(|x| x / nbrs.len() as f64);
        for &u in nbrs {
            let mut row = d_h.row_mut(u);
            row += &scaled;
        }
    }
    d_h
}

/// GraphSAGE-mean layer: `h_v' = act([h_v || mean_{u in N(v)} h_u] W + b)`.
///
/// The concatenated weight is stored as two blocks, `w_self` and `w_neigh`,
/// each `in_dim x out_dim`. When `in_dim == 0` both blocks are absent and the
/// layer only sees its extra pre-activation term.
#[derive(Debug, Clone)]
pub struct SageLayer {
    pub spec: LayerSpec,
    pub w_self: Option<ParamId>,
    pub w_neigh: Option<ParamId>,
    pub bias: ParamId,
}

#[derive(Debug, Clone)]
pub struct SageCache {
    pub agg: Array2<f64>,
    pub pre: Array2<f64>,
}

impl SageLayer {
    /// Allocates the layer's tensors. `fan_in` is the width of the full
    /// COMBINE input used for the initialisation bound.
    pub fn new(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        fan_in: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let limit = glorot_limit(fan_in, out_dim);
        let (w_self, w_neigh) = if in_dim > 0 {
            (
                Some(params.add_uniform(format!("{name}.w_self"), in_dim, out_dim, limit, rng)),
                Some(params.add_uniform(format!("{name}.w_neigh"), in_dim, out_dim, limit, rng)),
            )
        } else {
            (None, None)
        };
        let bias = params.add_zeros(format!("{name}.bias"), 1, out_dim);
        SageLayer {
            spec: LayerSpec {
                kind: LayerKind::Sage,
                in_dim,
                out_dim,
                activation,
            },
            w_self,
            w_neigh,
            bias,
        }
    }

    /// Computes outputs for the first `out_rows` nodes of `adj`.
    ///
    /// `input` must cover every neighbour of those nodes. `extra` is added to
    /// the pre-activation (one row per output row).
    pub fn forward(
        &self,
        params: &Params,
        adj: &Graph,
        input: ArrayView2<f64>,
        out_rows: usize,
        extra: Option<ArrayView2<f64>>,
    ) -> Result<(Array2<f64>, SageCache)> {
        check("sage layer input width", self.spec.in_dim, input.ncols())?;
        if out_rows > input.nrows() {
            return Err(Error::DimensionMismatch {
                context: "sage layer output rows exceed input rows",
                expected: input.nrows(),
                actual: out_rows,
            });
        }
        let agg = mean_aggregate(adj, input, out_rows)?;
        let mut pre = Array2::zeros((out_rows, self.spec.out_dim));
        if let (Some(ws), Some(wn)) = (self.w_self, self.w_neigh) {
            pre += &input.slice(s![0..out_rows, ..]).dot(params.value(ws));
            pre += &agg.dot(params.value(wn));
        }
        pre += &params.value(self.bias).row(0);
        if let Some(extra) = extra {
            check("sage layer extra rows", out_rows, extra.nrows())?;
            check("sage layer extra width", self.spec.out_dim, extra.ncols())?;
            pre += &extra;
        }
        let out = self.spec.activation.apply(&pre);
        Ok((out, SageCache { agg, pre }))
    }

    /// Accumulates parameter gradients and returns `(d_pre, d_input)`.
    pub fn backward(
        &self,
        params: &Params,
        grads: &mut Grads,
        adj: &Graph,
        input: ArrayView2<f64>,
        cache: &SageCache,
        d_out: ArrayView2<f64>,
        want_input_grad: bool,
    ) -> (Array2<f64>, Option<Array2<f64>>) {
        let out_rows = cache.pre.nrows();
        let d_pre = self.spec.activation.backward(&cache.pre, d_out);
        *grads.get_mut(self.bias) += &d_pre.sum_axis(Axis(0)).insert_axis(Axis(0));
        let mut d_input = None;
        if let (Some(ws), Some(wn)) = (self.w_self, self.w_neigh) {
            let own = input.slice(s![0..out_rows, ..]);
            *grads.get_mut(ws) += &own.t().dot(&d_pre);
            *grads.get_mut(wn) += &cache.agg.t().dot(&d_pre);
            if want_input_grad {
                let d_agg = d_pre.dot(&params.value(wn).t());
                let mut d_in = mean_aggregate_backward(adj, d_agg.view(), input.nrows());
                let d_own = d_pre.dot(&params.value(ws).t());
                let mut head = d_in.slice_mut(s![0..out_rows, ..]);
                head += &d_own;
                d_input = Some(d_in);
            }
        } else if want_input_grad {
            d_input = Some(Array2::zeros((input.nrows(), 0)));
        }
        (d_pre, d_input)
    }
}

/// Applies a SAGE layer to every node of a subgraph.
pub fn sage_forward(
    layer: &SageLayer,
    params: &Params,
    sub: &Subgraph,
    input: ArrayView2<f64>,
) -> Result<Array2<f64>> {
    check("sage input rows", sub.num_nodes(), input.nrows())?;
    let (out, _) = layer.forward(params, &sub.graph, input, sub.num_nodes(), None)?;
    Ok(out)
}

/// Affine map `x W + b` followed by an activation.
#[derive(Debug, Clone)]
pub struct DenseLayer {
    pub spec: LayerSpec,
    pub weight: Option<ParamId>,
    pub bias: ParamId,
}

#[derive(Debug, Clone)]
pub struct DenseCache {
    pub pre: Array2<f64>,
}

impl DenseLayer {
    pub fn new(
        params: &mut Params,
        name: &str,
        in_dim: usize,
        out_dim: usize,
        fan_in: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let limit = glorot_limit(fan_in, out_dim);
        let weight = (in_dim > 0)
            .then(|| params.add_uniform(format!("{name}.weight"), in_dim, out_dim, limit, rng));
        let bias = params.add_zeros(format!("{name}.bias"), 1, out_dim);
        DenseLayer {
            spec: LayerSpec {
                kind: LayerKind::Dense,
                in_dim,
                out_dim,
                activation,
            },
            weight,
            bias,
        }
    }

    pub fn forward(
        &self,
        params: &Params,
        x: ArrayView2<f64>,
        extra: Option<ArrayView2<f64>>,
    ) -> Result<(Array2<f64>, DenseCache)> {
        check("dense layer input width", self.spec.in_dim, x.ncols())?;
        let mut pre = match self.weight {
            Some(w) => x.dot(params.value(w)),
            None => Array2::zeros((x.nrows(), self.spec.out_dim)),
        };
        pre += &params.value(self.bias).row(0);
        if let Some(extra) = extra {
            check("dense layer extra rows", x.nrows(), extra.nrows())?;
            check("dense layer extra width", self.spec.out_dim, extra.ncols())?;
            pre += &extra;
        }
        let out = self.spec.activation.apply(&pre);
        Ok((out, DenseCache { pre }))
    }

    /// Accumulates parameter gradients and returns `(d_pre, d_x)`.
    pub fn backward(
        &self,
        params: &Params,
        grads: &mut Grads,
        x: ArrayView2<f64>,
        cache: &DenseCache,
        d_out: ArrayView2<f64>,
        want_input_grad: bool,
    ) -> (Array2<f64>, Option<Array2<f64>>) {
        let d_pre = self.spec.activation.backward(&cache.pre, d_out);
        *grads.get_mut(self.bias) += &d_pre.sum_axis(Axis(0)).insert_axis(Axis(0));
        let mut d_x = None;
        match self.weight {
            Some(w) => {
                *grads.get_mut(w) += &x.t().dot(&d_pre);
                if want_input_grad {
                    d_x = Some(d_pre.dot(&params.value(w).t()));
                }
            }
            None if want_input_grad => d_x = Some(Array2::zeros((x.nrows(), 0))),
            None => {}
        }
        (d_pre, d_x)
    }
}

pub fn dense_forward(layer: &DenseLayer, params: &Params, x: ArrayView2<f64>) -> Result<Array2<f64>> {
    Ok(layer.forward(params, x, None)?.0)
}

/// Inverted dropout. Returns the output and, in training mode with `p > 0`,
/// the per-entry scale mask (`0` or `1 / (1 - p)`) needed for the backward pass.
pub fn dropout_forward(
    x: &Array2<f64>,
    p: f64,
    rng: &mut impl Rng,
    training: bool,
) -> (Array2<f64>, Option<Array2<f64>>) {
    if !training || p <= 0.0 {
        return (x.clone(), None);
    }
    let keep = 1.0 - p;
    let scale = 1.0 / keep;
    let mask = Array2::from_shape_simple_fn(x.raw_dim(), || {
        if rng.random::<f64>() < keep {
            scale
        } else {
            0.0
        }
    });
    (x * &mask, Some(mask))
}

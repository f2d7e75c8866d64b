use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Dense `n x d` raw feature matrix.
///
/// Values are stored in single precision and widened to `f64` on use. A
/// row-wise index of the non-zero entries is kept alongside so products with
/// weight matrices only touch non-zeros (bag-of-words features are sparse).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    num_rows: usize,
    dim: usize,
    values: Vec<f32>,
    nz_offsets: Vec<usize>,
    nz_cols: Vec<u32>,
}

impl FeatureTable {
    pub fn new(num_rows: usize, dim: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != num_rows * dim {
            return Err(Error::LengthMismatch {
                what: "feature values",
                expected: num_rows * dim,
                actual: values.len(),
            });
        }
        if let Some(bad) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Config(format!(
                "feature ({}, {}) is not finite",
                bad / dim.max(1),
                bad % dim.max(1)
            )));
        }
        let mut nz_offsets = Vec::with_capacity(num_rows + 1);
        let mut nz_cols = Vec::new();
        nz_offsets.push(0);
        for r in 0..num_rows {
            let row = &values[r * dim..(r + 1) * dim];
            nz_cols.extend(
                row.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(c, _)| c as u32),
            );
            nz_offsets.push(nz_cols.len());
        }
        Ok(FeatureTable {
            num_rows,
            dim,
            values,
            nz_offsets,
            nz_cols,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Config(format!("feature row {i} has {} entries, expected {dim}", row.len())));
            }
            values.extend(row.iter().map(|&x| x as f32));
        }
        Self::new(rows.len(), dim, values)
    }

    pub fn from_array(a: ArrayView2<f64>) -> Result<Self> {
        Self::new(a.nrows(), a.ncols(), a.iter().map(|&x| x as f32).collect())
    }

    pub fn num_rows(&self) -> usize {
        self.num_rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.dim + col] as f64
    }

    pub fn row(&self, row: usize) -> &[f32] {
        &self.values[row * self.dim..(row + 1) * self.dim]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Non-zero `(column, value)` pairs of a row, ascending by column.
    pub fn nonzeros(&self, row: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nz_cols[self.nz_offsets[row]..self.nz_offsets[row + 1]]
            .iter()
            .map(move |&c| (c as usize, self.get(row, c as usize)))
    }

    pub fn nnz(&self) -> usize {
        self.nz_cols.len()
    }

    pub fn to_array(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.num_rows, self.dim), |(r, c)| self.get(r, c))
    }

    /// Rows `nodes` of `X W` where `weight` is `dim x k`.
    pub fn project_rows(&self, nodes: &[usize], weight: ArrayView2<f64>) -> Array2<f64> {
        let mut out = Array2::zeros((nodes.len(), weight.ncols()));
        for (i, &v) in nodes.iter().enumerate() {
            let mut row = out.row_mut(i);
            for (c, x) in self.nonzeros(v) {
                row.scaled_add(x, &weight.row(c));
            }
        }
        out
    }

    /// `X W` for every row.
    pub fn project(&self, weight: ArrayView2<f64>) -> Array2<f64> {
        let all: Vec<usize> = (0..self.num_rows).collect();
        self.project_rows(&all, weight)
    }

    /// Adds `X^T d_proj` into `grad` (`dim x k`), skipping all-zero rows of `d_proj`.
    pub fn accumulate_transpose_product(&self, d_proj: ArrayView2<f64>, grad: &mut Array2<f64>) {
        for (v, d_row) in d_proj.rows().into_iter().enumerate() {
            if d_row.iter().all(|&x| x == 0.0) {
                continue;
            }
            for (c, x) in self.nonzeros(v) {
                grad.row_mut(c).scaled_add(x, &d_row);
            }
        }
    }

    /// Rows reordered so that new row `perm[v]` is old row `v`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        crate::graph::check_permutation(perm, self.num_rows)?;
        let mut values = vec![0f32; self.values.len()];
        for (old, &new) in perm.iter().enumerate() {
            values[new * self.dim..(new + 1) * self.dim].copy_from_slice(self.row(old));
        }
        Self::new(self.num_rows, self.dim, values)
    }
}

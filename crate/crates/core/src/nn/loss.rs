use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

/// Numerically stable softmax of one logit row.
pub fn softmax(logits: ArrayView1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let exp = logits.mapv(|x| (x - max).exp());
    let total = exp.sum();
    exp / total
}

/// Cross-entropy of one logit row against `label`, with its gradient
/// `softmax(logits) - onehot(label)`.
pub fn softmax_cross_entropy_row(logits: ArrayView1<f64>, label: usize) -> Result<(f64, Array1<f64>)> {
    if label >= logits.len() {
        return Err(Error::LabelOutOfRange {
            label,
            num_classes: logits.len(),
        });
    }
    let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let shifted = logits.mapv(|x| x - max);
    let log_total = shifted.mapv(f64::exp).sum().ln();
    let loss = log_total - shifted[label];
    let mut grad = shifted.mapv(|x| (x - log_total).exp());
    grad[label] -= 1.0;
    Ok((loss, grad))
}

/// Mean cross-entropy over rows; the gradient is already divided by the row count.
pub fn softmax_cross_entropy(logits: ArrayView2<f64>, labels: &[usize]) -> Result<(f64, Array2<f64>)> {
    if labels.len() != logits.nrows() {
        return Err(Error::LengthMismatch {
            what: "labels",
            expected: logits.nrows(),
            actual: labels.len(),
        });
    }
    let n = labels.len().max(1) as f64;
    let mut grad = Array2::zeros(logits.raw_dim());
    let mut total = 0.0;
    for (i, &label) in labels.iter().enumerate() {
        let (loss, g) = softmax_cross_entropy_row(logits.row(i), label)?;
        total += loss;
        grad.row_mut(i).assign(&(g / n));
    }
    Ok((total / n, grad))
}

/// Index of the largest logit; ties go to the lowest index.
pub fn argmax(logits: ArrayView1<f64>) -> usize {
    let mut best = 0;
    for (i, &x) in logits.iter().enumerate() {
        if x > logits[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn uniform_logits_give_log_c() {
        let (loss, grad) = softmax_cross_entropy_row(array![0.3, 0.3, 0.3, 0.3].view(), 2).unwrap();
        assert!((loss - 4f64.ln()).abs() < 1e-15);
        assert!(grad.sum().abs() < 1e-15);
    }

    #[test]
    fn extreme_logits_do_not_overflow() {
        let (loss, grad) = softmax_cross_entropy_row(array![1000.0, -1000.0].view(), 0).unwrap();
        assert!(loss.abs() < 1e-300);
        assert!(grad.iter().all(|g| g.is_finite()));
        let (loss, _) = softmax_cross_entropy_row(array![1000.0, -1000.0].view(), 1).unwrap();
        assert!((loss - 2000.0).abs() < 1e-9);
    }

    #[test]
    fn gradient_rows_sum_to_zero() {
        let logits = array![[1.0, -2.0, 0.5], [30.0, 1e-3, -7.0]];
        let (_, grad) = softmax_cross_entropy(logits.view(), &[0, 2]).unwrap();
        for row in grad.rows() {
            assert!(row.sum().abs() < 1e-12);
        }
        let p = softmax(logits.row(1));
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn argmax_ties_go_low() {
        assert_eq!(argmax(array![0.2, 0.9, 0.9].view()), 1);
        assert_eq!(argmax(array![5.0].view()), 0);
    }

    #[test]
    fn label_out_of_range() {
        assert!(softmax_cross_entropy_row(array![0.0, 1.0].view(), 2).is_err());
        assert!(softmax_cross_entropy(array![[0.0, 1.0]].view(), &[0, 1]).is_err());
    }
}

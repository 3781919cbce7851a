use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Row-wise softmax, computed in f64 with max subtraction.
pub fn softmax<S: Scalar>(logits: &Tensor<S>) -> Result<Tensor<S>> {
    logits.expect_rank("softmax", 2)?;
    let classes = logits.shape()[1];
    let mut out = Vec::with_capacity(logits.len());
    for row in logits.data().chunks(classes) {
        out.extend(softmax_row(row).into_iter().map(S::from_f64_lossy));
    }
    Tensor::new(logits.shape().to_vec(), out)
}

fn softmax_row<S: Scalar>(row: &[S]) -> Vec<f64> {
    let max = row.iter().map(|v| v.to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = row.iter().map(|v| (v.to_f64_lossy() - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean categorical cross-entropy over the batch and its gradient with
/// respect to the logits, `(softmax - onehot) / batch`.
pub fn softmax_cross_entropy<S: Scalar>(logits: &Tensor<S>, labels: &[usize]) -> Result<(f64, Tensor<S>)> {
    logits.expect_rank("softmax_cross_entropy", 2)?;
    let (batch, classes) = (logits.shape()[0], logits.shape()[1]);
    if labels.len() != batch {
        return Err(Error::dim("softmax_cross_entropy", "batch", batch, labels.len()));
    }
    if let Some(&label) = labels.iter().find(|&&l| l >= classes) {
        return Err(Error::InvalidLabel { label, classes });
    }
    let mut loss = 0.0f64;
    let mut grad = Vec::with_capacity(logits.len());
    for (row, &label) in logits.data().chunks(classes).zip(labels) {
        let max = row.iter().map(|v| v.to_f64_lossy()).fold(f64::NEG_INFINITY, f64::max);
        let lse = max + row.iter().map(|v| (v.to_f64_lossy() - max).exp()).sum::<f64>().ln();
        loss += lse - row[label].to_f64_lossy();
        for (c, p) in softmax_row(row).into_iter().enumerate() {
            let target = if c == label { 1.0 } else { 0.0 };
            grad.push(S::from_f64_lossy((p - target) / batch as f64));
        }
    }
    Ok((loss / batch as f64, Tensor::new(logits.shape().to_vec(), grad)?))
}


/// Index of the largest value; ties go to the lowest index.
pub fn argmax<S: Scalar>(row: &[S]) -> usize {
    let mut best = 0;
    for (i, v) in row.iter().enumerate().skip(1) {
        if *v > row[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod argmax_tests {
    use super::argmax;

    #[test]
    fn ties_go_low() {
        assert_eq!(argmax(&[1.0f32, 1.0, 1.0]), 0);
        assert_eq!(argmax(&[0.0f32, 2.0, 2.0]), 1);
        assert_eq!(argmax(&[-1.0f64, -3.0, 5.0]), 2);
    }
}

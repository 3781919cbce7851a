//! Central finite-difference gradient checking.

use crate::scalar::Scalar;

#[derive(Clone, Debug)]
pub struct GradCheck {
    pub numeric: Vec<f64>,
    /// `||analytic - numeric|| / (||analytic|| + ||numeric||)`, 0 when both vanish.
    pub relative_error: f64,
    pub max_abs_error: f64,
}

/// Compares `analytic` with central differences of `f` around `x` using
/// perturbation `h`. `f` must be deterministic.
pub fn check_gradient<S: Scalar>(mut f: impl FnMut(&[S]) -> f64, x: &[S], analytic: &[S], h: f64) -> GradCheck {
    assert_eq!(x.len(), analytic.len(), "gradient length must match input length");
    let mut probe = x.to_vec();
    let mut numeric = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = S::from_f64_lossy(orig.to_f64_lossy() + h);
        let up = f(&probe);
        probe[i] = S::from_f64_lossy(orig.to_f64_lossy() - h);
        let down = f(&probe);
        probe[i] = orig;
        numeric.push((up - down) / (2.0 * h));
    }
    let mut diff = 0.0;
    let mut na = 0.0;
    let mut nn = 0.0;
    let mut max_abs: f64 = 0.0;
    for (a, n) in analytic.iter().map(|v| v.to_f64_lossy()).zip(&numeric) {
        diff += (a - n) * (a - n);
        na += a * a;
        nn += n * n;
        max_abs = max_abs.max((a - n).abs());
    }
    let denom = na.sqrt() + nn.sqrt();
    GradCheck {
        numeric,
        relative_error: if denom == 0.0 { 0.0 } else { diff.sqrt() / denom },
        max_abs_error: max_abs,
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::Tensor;

/// Optimiser settings. `momentum` is used as Adam's first-moment decay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyperparameters {
    pub learning_rate: f64,
    pub momentum: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    #[serde(default = "default_beta2")]
    pub beta2: f64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

fn default_beta2() -> f64 {
    0.999
}

fn default_epsilon() -> f64 {
    1e-8
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Hyperparameters {
            learning_rate: 0.001,
            momentum: 0.9,
            batch_size: 32,
            weight_decay: 0.0001,
            beta2: default_beta2(),
            epsilon: default_epsilon(),
        }
    }
}

impl Hyperparameters {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str, v: String| Err(Error::Config(format!("{what} = {v} out of range")));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate", self.learning_rate.to_string());
        }
        if !(self.momentum > 0.0 && self.momentum < 1.0) {
            return bad("momentum", self.momentum.to_string());
        }
        if self.batch_size == 0 {
            return bad("batch_size", "0".into());
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return bad("weight_decay", self.weight_decay.to_string());
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            return bad("beta2", self.beta2.to_string());
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon", self.epsilon.to_string());
        }
        Ok(())
    }
}

/// First and second moment estimates, one tensor per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<S> {
    pub step: u64,
    pub m: Vec<Tensor<S>>,
    pub v: Vec<Tensor<S>>,
}

impl<S: Scalar> AdamState<S> {
    pub fn new<'a>(params: impl IntoIterator<Item = &'a Tensor<S>>) -> Self {
        let m: Vec<_> = params.into_iter().map(|p| Tensor::zeros(p.shape())).collect();
        AdamState {
            step: 0,
            v: m.clone(),
            m,
        }
    }
}

/// One Adam update with bias correction. Weight decay is added to the
/// gradient (L2 coupling) before the moment updates.
pub fn adam_step<S: Scalar>(
    params: &mut [&mut Tensor<S>],
    grads: &[Tensor<S>],
    state: &mut AdamState<S>,
    hyper: &Hyperparameters,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() || params.len() != state.v.len() {
        return Err(Error::dim("adam_step", "parameter count", params.len(), grads.len()));
    }
    for (i, ((p, g), (m, v))) in params.iter().zip(grads).zip(state.m.iter().zip(&state.v)).enumerate() {
        for t in [g, m, v] {
            t.expect_shape("adam_step", p.shape())?;
        }
        if !g.is_finite() {
            return Err(Error::Diverged(format!("non-finite gradient in parameter {i}")));
        }
    }

    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (hyper.momentum, hyper.beta2);
    let bias1 = 1.0 - b1.powi(t);
    let bias2 = 1.0 - b2.powi(t);
    let (lr, eps, wd) = (hyper.learning_rate, hyper.epsilon, hyper.weight_decay);

    for ((p, g), (m, v)) in params.iter_mut().zip(grads).zip(state.m.iter_mut().zip(state.v.iter_mut())) {
        for (((w, &gi), mi), vi) in p
            .data_mut()
            .iter_mut()
            .zip(g.data())
            .zip(m.data_mut())
            .zip(v.data_mut())
        {
            let wf = w.to_f64_lossy();
            let gf = gi.to_f64_lossy() + wd * wf;
            let mf = b1 * mi.to_f64_lossy() + (1.0 - b1) * gf;
            let vf = b2 * vi.to_f64_lossy() + (1.0 - b2) * gf * gf;
            *mi = S::from_f64_lossy(mf);
            *vi = S::from_f64_lossy(vf);
            let m_hat = mf / bias1;
            let v_hat = vf / bias2;
            *w = S::from_f64_lossy(wf - lr * m_hat / (v_hat.sqrt() + eps));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hyper(lr: f64, wd: f64) -> Hyperparameters {
        Hyperparameters {
            learning_rate: lr,
            weight_decay: wd,
            ..Hyperparameters::default()
        }
    }

    #[test]
    fn zero_gradient_is_fixpoint() {
        let mut w = Tensor::from_fn(&[3], |i| i as f32 - 1.0);
        let before = w.clone();
        let mut state = AdamState::new([&w]);
        adam_step(&mut [&mut w], &[Tensor::zeros(&[3])], &mut state, &hyper(0.01, 0.0)).unwrap();
        assert_eq!(w, before);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        for g in [-3.0f64, 0.02, 7.5] {
            let mut w = Tensor::scalar(1.0f64);
            let mut state = AdamState::new([&w]);
            adam_step(&mut [&mut w], &[Tensor::scalar(g)], &mut state, &hyper(0.01, 0.0)).unwrap();
            let delta = w.data()[0] - 1.0;
            assert!((delta + 0.01 * g.signum()).abs() < 1e-8, "g={g} delta={delta}");
        }
    }

    #[test]
    fn non_finite_gradient_diverges() {
        let mut w = Tensor::scalar(1.0f32);
        let mut state = AdamState::new([&w]);
        let err = adam_step(&mut [&mut w], &[Tensor::scalar(f32::NAN)], &mut state, &hyper(0.01, 0.0)).unwrap_err();
        assert!(matches!(err, Error::Diverged(_)));
        assert_eq!(state.step, 0);
    }

    #[test]
    fn validates_ranges() {
        assert!(Hyperparameters::default().validate().is_ok());
        assert!(hyper(0.0, 0.0).validate().is_err());
        assert!(hyper(0.1, -1.0).validate().is_err());
        let h = Hyperparameters {
            momentum: 1.0,
            ..Hyperparameters::default()
        };
        assert!(h.validate().is_err());
    }
}

use serde::{Deserialize, Serialize};

use super::params::ParamGroup;
use super::tensor::Tensor;
use super::NumericsError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 0.001, beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

/// One bias-corrected Adam update of a single group at step `t` (1-based).
/// Frozen groups are left untouched.
pub fn adam_update(group: &mut ParamGroup, grad: &[f64], cfg: &AdamConfig, t: u64) -> Result<(), NumericsError> {
    if t == 0 {
        return Err(NumericsError::InvalidArgument("adam step index starts at 1".into()));
    }
    if grad.len() != group.tensor.len() {
        return Err(NumericsError::Shape(format!(
            "gradient of length {} for group {} of length {}",
            grad.len(),
            group.name,
            group.tensor.len()
        )));
    }
    if !group.trainable {
        return Ok(());
    }
    let bc1 = 1.0 - cfg.beta1.powi(t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(t as i32);
    let m = group.adam_m.data_mut();
    let v = group.adam_v.data_mut();
    let w = group.tensor.data_mut();
    for k in 0..grad.len() {
        let g = grad[k];
        m[k] = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * g;
        v[k] = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * g * g;
        let m_hat = m[k] / bc1;
        let v_hat = v[k] / bc2;
        w[k] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
    group.steps = t;
    group
        .tensor
        .check_finite()
        .map_err(|_| NumericsError::NonFinite(format!("group {} after Adam step {}", group.name, t)))
}

/// Applies Adam to every group with its matching gradient tensor.
pub fn adam_step(groups: &mut [ParamGroup], grads: &[Tensor], cfg: &AdamConfig, t: u64) -> Result<(), NumericsError> {
    if groups.len() != grads.len() {
        return Err(NumericsError::Shape(format!(
            "{} groups but {} gradients",
            groups.len(),
            grads.len()
        )));
    }
    for (group, grad) in groups.iter_mut().zip(grads) {
        if grad.shape() != group.tensor.shape() {
            return Err(NumericsError::Shape(format!(
                "gradient shape {:?} for group {} of shape {:?}",
                grad.shape(),
                group.name,
                group.tensor.shape()
            )));
        }
        adam_update(group, grad.data(), cfg, t)?;
    }
    Ok(())
}

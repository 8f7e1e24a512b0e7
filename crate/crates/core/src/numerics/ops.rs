use rand::Rng;

use super::init::rng_from_seed;
use super::NumericsError;

/// Probabilities below this are clamped before taking the log.
pub const LOG_CLAMP: f64 = 1e-12;

/// Max-shifted softmax.
pub fn softmax(v: &[f64]) -> Result<Vec<f64>, NumericsError> {
    if v.is_empty() {
        return Err(NumericsError::InvalidArgument("softmax of an empty vector".into()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(NumericsError::NonFinite("softmax input".into()));
    }
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = v.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    out.iter_mut().for_each(|x| *x /= sum);
    Ok(out)
}

/// Vector-Jacobian product of softmax: given `p = softmax(z)` and `dL/dp`,
/// returns `dL/dz`.
pub fn softmax_backward(p: &[f64], dp: &[f64]) -> Vec<f64> {
    let inner: f64 = p.iter().zip(dp).map(|(a, b)| a * b).sum();
    p.iter().zip(dp).map(|(&pi, &di)| pi * (di - inner)).collect()
}

/// `-log p[gold]` with the probability clamped at [`LOG_CLAMP`].
pub fn cross_entropy(pred: &[f64], gold: usize) -> Result<f64, NumericsError> {
    if gold >= pred.len() {
        return Err(NumericsError::InvalidArgument(format!(
            "gold index {} out of range for {} classes",
            gold,
            pred.len()
        )));
    }
    let total: f64 = pred.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(NumericsError::InvalidArgument(format!("distribution sums to {total}")));
    }
    Ok(-pred[gold].max(LOG_CLAMP).ln())
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 - rate)`. All ones outside training.
pub fn dropout_mask(len: usize, rate: f64, seed: u64, training: bool) -> Result<Vec<f64>, NumericsError> {
    let mut rng = rng_from_seed(seed);
    dropout_mask_with(len, rate, &mut rng, training)
}

pub fn dropout_mask_with<R: Rng>(
    len: usize,
    rate: f64,
    rng: &mut R,
    training: bool,
) -> Result<Vec<f64>, NumericsError> {
    if !(0.0..1.0).contains(&rate) {
        return Err(NumericsError::InvalidArgument(format!("dropout rate {rate} not in [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok(vec![1.0; len]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..len).map(|_| if rng.random::<f64>() < rate { 0.0 } else { keep }).collect())
}

//! Central-difference gradient checker.

use super::params::{GradStore, ParamStore};
use super::NumericsError;
use crate::parallel::Workers;

/// Default probe step.
pub const DEFAULT_STEP: f64 = 1e-5;

/// Denominator floor for the relative error, so components whose true
/// gradient is near zero are judged on an absolute scale.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GroupCheck {
    pub name: String,
    pub size: usize,
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GradCheckReport {
    pub groups: Vec<GroupCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.groups.iter().map(|g| g.max_rel_error).fold(0.0, f64::max)
    }

    pub fn failures(&self, tolerance: f64) -> Vec<&GroupCheck> {
        self.groups.iter().filter(|g| !(g.max_rel_error <= tolerance)).collect()
    }

    pub fn group(&self, name: &str) -> Option<&GroupCheck> {
        self.groups.iter().find(|g| g.name == name)
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(RELATIVE_FLOOR)
}

/// Compares `analytic` against `(f(θ+h) − f(θ−h)) / 2h` for every component
/// of every trainable group in `store`. Groups missing from `analytic` are
/// treated as having a zero gradient.
pub fn grad_check<F>(
    loss: F,
    store: &ParamStore,
    analytic: &GradStore,
    step: f64,
    workers: &Workers,
) -> Result<GradCheckReport, NumericsError>
where
    F: Fn(&ParamStore) -> f64 + Sync,
{
    let targets: Vec<usize> = (0..store.len()).filter(|&i| store.get(i).trainable).collect();
    let results = workers.map(&targets, |_, &gi| {
        let mut probe = store.clone();
        let name = store.get(gi).name.clone();
        let size = store.get(gi).tensor.len();
        let grad = analytic.slot(gi);
        let mut check = GroupCheck {
            name: name.clone(),
            size,
            max_rel_error: 0.0,
            worst_index: 0,
            analytic: 0.0,
            numeric: 0.0,
        };
        for k in 0..size {
            let orig = probe.get(gi).tensor.data()[k];
            probe.get_mut(gi).tensor.data_mut()[k] = orig + step;
            let plus = loss(&probe);
            probe.get_mut(gi).tensor.data_mut()[k] = orig - step;
            let minus = loss(&probe);
            probe.get_mut(gi).tensor.data_mut()[k] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(NumericsError::NonFinite(format!("loss while probing group {name}")));
            }
            let numeric = (plus - minus) / (2.0 * step);
            let a = grad.map_or(0.0, |g| g[k]);
            if !a.is_finite() {
                return Err(NumericsError::NonFinite(format!("analytic gradient of group {name}")));
            }
            let err = relative_error(a, numeric);
            if err > check.max_rel_error || k == 0 {
                check.max_rel_error = err;
                check.worst_index = k;
                check.analytic = a;
                check.numeric = numeric;
            }
        }
        Ok(check)
    });
    let groups = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(GradCheckReport { groups })
}

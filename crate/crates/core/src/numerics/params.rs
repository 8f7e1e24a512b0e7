use std::collections::HashMap;

use super::tensor::{add_assign, Tensor};
use super::NumericsError;

/// A named parameter tensor with its Adam moment estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamGroup {
    pub name: String,
    pub tensor: Tensor,
    pub trainable: bool,
    pub adam_m: Tensor,
    pub adam_v: Tensor,
    /// Number of optimizer steps applied to this group.
    pub steps: u64,
}

impl ParamGroup {
    pub fn new(name: impl Into<String>, tensor: Tensor, trainable: bool) -> Self {
        let adam_m = Tensor::zeros(tensor.shape());
        let adam_v = Tensor::zeros(tensor.shape());
        ParamGroup { name: name.into(), tensor, trainable, adam_m, adam_v, steps: 0 }
    }
}

/// Ordered collection of parameter groups addressable by name or index.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    groups: Vec<ParamGroup>,
    index: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, group: ParamGroup) -> Result<usize, NumericsError> {
        if self.index.contains_key(&group.name) {
            return Err(NumericsError::DuplicateGroup(group.name));
        }
        let idx = self.groups.len();
        self.index.insert(group.name.clone(), idx);
        self.groups.push(group);
        Ok(idx)
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn get(&self, idx: usize) -> &ParamGroup {
        &self.groups[idx]
    }

    pub fn get_mut(&mut self, idx: usize) -> &mut ParamGroup {
        &mut self.groups[idx]
    }

    pub fn tensor(&self, idx: usize) -> &Tensor {
        &self.groups[idx].tensor
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn groups(&self) -> &[ParamGroup] {
        &self.groups
    }

    pub fn groups_mut(&mut self) -> &mut [ParamGroup] {
        &mut self.groups
    }

    /// Total number of scalar parameters.
    pub fn num_values(&self) -> usize {
        self.groups.iter().map(|g| g.tensor.len()).sum()
    }

    /// Bitwise equality of all tensors (optimizer state ignored).
    pub fn bit_equal(&self, other: &ParamStore) -> bool {
        self.groups.len() == other.groups.len()
            && self.groups.iter().zip(&other.groups).all(|(a, b)| {
                a.name == b.name
                    && a.tensor.shape() == b.tensor.shape()
                    && a.tensor
                        .data()
                        .iter()
                        .zip(b.tensor.data())
                        .all(|(x, y)| x.to_bits() == y.to_bits())
            })
    }
}

/// Sparse gradient accumulator aligned with a [`ParamStore`]: a slot is
/// allocated only when some computation touches that group.
#[derive(Clone, Debug, Default)]
pub struct GradStore {
    slots: Vec<Option<Vec<f64>>>,
}

impl GradStore {
    pub fn for_store(store: &ParamStore) -> Self {
        GradStore { slots: vec![None; store.len()] }
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Zero-initialized buffer for group `idx`, allocated on first use.
    pub fn slot_mut(&mut self, idx: usize, size: usize) -> &mut [f64] {
        if idx >= self.slots.len() {
            self.slots.resize(idx + 1, None);
        }
        self.slots[idx].get_or_insert_with(|| vec![0.0; size])
    }

    pub fn slot(&self, idx: usize) -> Option<&[f64]> {
        self.slots.get(idx).and_then(|s| s.as_deref())
    }

    /// Element-wise `self += other`, in slot order.
    pub fn accumulate(&mut self, other: &GradStore) {
        if other.slots.len() > self.slots.len() {
            self.slots.resize(other.slots.len(), None);
        }
        for (mine, theirs) in self.slots.iter_mut().zip(&other.slots) {
            if let Some(src) = theirs {
                match mine {
                    Some(dst) => add_assign(dst, src),
                    None => *mine = Some(src.clone()),
                }
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.slots.iter_mut().flatten().flat_map(|s| s.iter_mut()) {
            *v *= factor;
        }
    }

    /// Indices of groups that received a gradient.
    pub fn touched(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().enumerate().filter_map(|(i, s)| s.as_ref().map(|_| i))
    }

    pub fn is_finite(&self) -> bool {
        self.slots.iter().flatten().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

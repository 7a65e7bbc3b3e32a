use std::collections::HashMap;

use super::Tensor;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Named, ordered collection of learnable tensors. Insertion order is the
/// canonical order for optimizer state and checkpoints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamStore {
    names: Vec<String>,
    tensors: Vec<Tensor>,
    by_name: HashMap<String, usize>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.by_name.contains_key(&name) {
            return Err(Error::Contract(format!("duplicate parameter `{name}`")));
        }
        self.by_name.insert(name.clone(), self.names.len());
        self.names.push(name);
        self.tensors.push(value);
        Ok(ParamId(self.tensors.len() - 1))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.by_name.get(name).copied().map(ParamId)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.tensors[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.tensors[id.0]
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.id(name).map(|id| self.get(id))
    }

    /// Replaces a tensor in place; the shape must not change.
    pub fn set(&mut self, id: ParamId, value: Tensor) -> Result<()> {
        let slot = &mut self.tensors[id.0];
        if slot.shape() != value.shape() {
            return Err(Error::Dimension(format!(
                "parameter `{}`: shape {:?} cannot take {:?}",
                self.names[id.0],
                slot.shape(),
                value.shape()
            )));
        }
        *slot = value;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &str, &Tensor)> {
        self.names
            .iter()
            .zip(&self.tensors)
            .enumerate()
            .map(|(i, (n, t))| (ParamId(i), n.as_str(), t))
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(Tensor::len).sum()
    }
}

//! Named, ordered parameter registry shared by the model, the optimizer,
//! checkpointing, and the gradient checker.

use crate::error::{Error, Result};
use crate::graph::{Gradients, Graph, NodeId};
use crate::tensor::Tensor;

/// Flat registry of named tensors with a stable insertion order. The order
/// defines the optimizer-state layout and the checkpoint manifest.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    entries: Vec<(String, Tensor)>,
}

impl ParamSet {
    pub fn new() -> Self {
        ParamSet::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor) -> Result<()> {
        let name = name.into();
        if self.index_of(&name).is_some() {
            return Err(Error::InvalidArg(format!("duplicate parameter {name}")));
        }
        self.entries.push((name, tensor));
        Ok(())
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.entries.iter().position(|(n, _)| n == name)
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&str, &mut Tensor)> {
        self.entries.iter_mut().map(|(n, t)| (n.as_str(), t))
    }

    pub fn total_elements(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.numel()).sum()
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for (name, t) in self.iter() {
            t.ensure_finite(name)?;
        }
        Ok(())
    }
}

/// Parameters registered as leaves on a graph, in registry order.
pub struct BoundParams {
    ids: Vec<NodeId>,
}

impl BoundParams {
    pub fn bind(params: &ParamSet, graph: &mut Graph) -> Self {
        let ids = params
            .entries
            .iter()
            .map(|(_, t)| graph.leaf(t.clone()))
            .collect();
        BoundParams { ids }
    }

    pub fn id(&self, params: &ParamSet, name: &str) -> Result<NodeId> {
        params
            .index_of(name)
            .map(|i| self.ids[i])
            .ok_or_else(|| Error::InvalidArg(format!("unknown parameter {name}")))
    }

    /// Collect one gradient buffer per parameter, zeros where the loss did
    /// not reach the parameter.
    pub fn grads(&self, params: &ParamSet, gradients: &mut Gradients) -> Vec<Vec<f64>> {
        self.ids
            .iter()
            .zip(&params.entries)
            .map(|(&id, (_, t))| {
                gradients
                    .take(id)
                    .unwrap_or_else(|| vec![0.0; t.numel()])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insertion_order_is_stable() {
        let mut p = ParamSet::new();
        p.insert("b", Tensor::zeros(vec![2])).unwrap();
        p.insert("a", Tensor::zeros(vec![3])).unwrap();
        let names: Vec<&str> = p.iter().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["b", "a"]);
        assert!(p.insert("a", Tensor::zeros(vec![1])).is_err());
    }

    #[test]
    fn bound_grads_align_with_entries() {
        let mut p = ParamSet::new();
        p.insert("x", Tensor::new(vec![2], vec![1.0, 2.0]).unwrap()).unwrap();
        p.insert("unused", Tensor::new(vec![1], vec![5.0]).unwrap()).unwrap();
        let mut g = Graph::new();
        let bound = BoundParams::bind(&p, &mut g);
        let x = bound.id(&p, "x").unwrap();
        let s = g.sum(x);
        let mut grads = g.backward(s).unwrap();
        let collected = bound.grads(&p, &mut grads);
        assert_eq!(collected[0], vec![1.0, 1.0]);
        assert_eq!(collected[1], vec![0.0]);
    }
}

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Gradients keyed by parameter name.
pub type GradMap = BTreeMap<String, Tensor>;

/// Named parameter tensors plus the set of names excluded from updates.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamSet {
    entries: BTreeMap<String, Tensor>,
    frozen: BTreeSet<String>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, t: Tensor) {
        self.entries.insert(name.into(), t);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor> {
        self.entries
            .get(name)
            .ok_or_else(|| Error::MissingPrerequisite(format!("parameter `{name}` not present")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Tensor> {
        self.frozen.remove(name);
        self.entries.remove(name)
    }

    pub(crate) fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.entries.get_mut(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_frozen(&self, name: &str) -> bool {
        self.frozen.contains(name)
    }

    pub fn freeze(&mut self, name: &str) -> Result<()> {
        if !self.entries.contains_key(name) {
            return Err(Error::Config(format!(
                "cannot freeze unknown parameter `{name}`"
            )));
        }
        self.frozen.insert(name.to_string());
        Ok(())
    }

    /// Freezes every parameter whose name starts with `prefix`.
    pub fn freeze_prefix(&mut self, prefix: &str) {
        let names: Vec<String> = self
            .entries
            .keys()
            .filter(|k| k.starts_with(prefix))
            .cloned()
            .collect();
        self.frozen.extend(names);
    }

    pub fn unfreeze(&mut self, name: &str) {
        self.frozen.remove(name);
    }

    pub fn frozen_names(&self) -> impl Iterator<Item = &str> {
        self.frozen.iter().map(String::as_str)
    }

    /// Total number of scalar parameters under `prefix`.
    pub fn count_prefix(&self, prefix: &str) -> usize {
        self.entries
            .iter()
            .filter(|(k, _)| k.starts_with(prefix))
            .map(|(_, v)| v.len())
            .sum()
    }

    /// Copies every entry of `other` (values and freeze flags) into `self`.
    pub fn merge_from(&mut self, other: &ParamSet) {
        for (k, v) in &other.entries {
            self.entries.insert(k.clone(), v.clone());
            if other.frozen.contains(k) {
                self.frozen.insert(k.clone());
            } else {
                self.frozen.remove(k);
            }
        }
    }

    /// Adds a dense layer `<prefix>.weight` `[n_out, n_in]` and `<prefix>.bias` `[n_out]`
    /// with fan-in uniform weights and zero biases.
    pub fn init_dense<R: Rng>(&mut self, prefix: &str, n_in: usize, n_out: usize, rng: &mut R) {
        let bound = 1.0 / (n_in as f32).sqrt();
        let w: Vec<f32> = (0..n_in * n_out)
            .map(|_| rng.gen_range(-bound..bound))
            .collect();
        self.insert(
            format!("{prefix}.weight"),
            Tensor::new(vec![n_out, n_in], w).expect("consistent dense shape"),
        );
        self.insert(format!("{prefix}.bias"), Tensor::zeros(&[n_out]));
    }

    /// Byte-level fingerprint of the named entries, used to check freeze contracts.
    pub fn snapshot_bytes<'a>(
        &self,
        names: impl IntoIterator<Item = &'a str>,
    ) -> Vec<(String, Vec<u32>)> {
        names
            .into_iter()
            .filter_map(|n| {
                self.entries.get(n).map(|t| {
                    (
                        n.to_string(),
                        t.data().iter().map(|v| v.to_bits()).collect(),
                    )
                })
            })
            .collect()
    }
}

//! Enumeration of admissible slice configurations: fixed-position VNFs stay
//! pinned while the flexible set permutes over the remaining chain slots.

use crate::error::{Error, Result};
use crate::model::{ConfigId, SliceConfiguration, SliceRequest, VnfId};

/// Eager enumeration is capped at this many flexible VNFs; larger slices
/// must go through the streaming [`config_iter`] to bound memory.
pub const MAX_EAGER_FLEXIBLE: usize = 8;

/// Materializes every admissible configuration of a slice, exactly
/// `|flexible|!` of them, in lexicographic order over flexible VNF ids.
/// Fails when a chain of some configuration needs a virtual-link demand the
/// slice does not declare.
pub fn enumerate_configs(slice: &SliceRequest) -> Result<Vec<SliceConfiguration>> {
    if slice.flexible().len() > MAX_EAGER_FLEXIBLE {
        return Err(Error::Parameter(format!(
            "slice {} has {} flexible VNFs; use config_iter to stream beyond {MAX_EAGER_FLEXIBLE}",
            slice.id,
            slice.flexible().len()
        )));
    }
    config_iter(slice).collect()
}

/// Streaming variant of [`enumerate_configs`] that holds one permutation in
/// memory at a time.
pub fn config_iter(slice: &SliceRequest) -> ConfigIter<'_> {
    let n = slice.len();
    let mut pinned: Vec<Option<VnfId>> = vec![None; n];
    for (&v, &p) in slice.fixed_positions() {
        pinned[p - 1] = Some(v);
    }
    let flexible = slice.flexible(); // ascending id = lexicographically first
    ConfigIter {
        slice,
        pinned,
        permutation: flexible,
        next_id: 0,
        done: false,
    }
}

pub struct ConfigIter<'a> {
    slice: &'a SliceRequest,
    pinned: Vec<Option<VnfId>>,
    permutation: Vec<VnfId>,
    next_id: u32,
    done: bool,
}

impl ConfigIter<'_> {
    fn build_current(&self) -> Result<SliceConfiguration> {
        let mut order: Vec<VnfId> = Vec::with_capacity(self.pinned.len());
        let mut free = self.permutation.iter();
        for slot in &self.pinned {
            match slot {
                Some(v) => order.push(*v),
                None => order.push(*free.next().expect("one flexible VNF per free slot")),
            }
        }
        let config = SliceConfiguration::from_order(self.slice, ConfigId(self.next_id), order)?;
        for (v, w) in config.chain() {
            if self.slice.link_demand(v, w).is_none() {
                return Err(Error::Specification(format!(
                    "slice {}: configuration {} chains {} -> {} but no demand is declared for that pair",
                    self.slice.id,
                    config.id,
                    self.slice.vnf(v).name,
                    self.slice.vnf(w).name,
                )));
            }
        }
        Ok(config)
    }

    /// Advances `permutation` to its lexicographic successor; false at the end.
    fn advance(&mut self) -> bool {
        let p = &mut self.permutation;
        if p.len() < 2 {
            return false;
        }
        let mut i = p.len() - 1;
        while i > 0 && p[i - 1] >= p[i] {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        let mut j = p.len() - 1;
        while p[j] <= p[i - 1] {
            j -= 1;
        }
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }
}

impl Iterator for ConfigIter<'_> {
    type Item = Result<SliceConfiguration>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let item = self.build_current();
        self.next_id += 1;
        if !self.advance() {
            self.done = true;
        }
        Some(item)
    }
}

/// The chain links of a configuration in position order, each with its
/// bandwidth demand looked up from the slice.
pub fn virtual_links(slice: &SliceRequest, config: &SliceConfiguration) -> Result<Vec<(VnfId, VnfId, u64)>> {
    config
        .chain()
        .map(|(v, w)| {
            slice
                .link_demand(v, w)
                .map(|d| (v, w, d))
                .ok_or_else(|| {
                    Error::Specification(format!(
                        "slice {}: no demand declared for pair {} -> {}",
                        slice.id,
                        slice.vnf(v).name,
                        slice.vnf(w).name
                    ))
                })
        })
        .collect()
}

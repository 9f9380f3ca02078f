//! Extensible coordinate stages with coset-partitioned allocation.

use std::collections::BTreeMap;

use num::{BigInt, BigRational};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::magnitude::{coset_of, Coset, GroupKind, Magnitude, ValueGroup};
use crate::scalar::FieldDescriptor;
use crate::space::{Vector, WeightedSpace};

/// Deterministic coset representatives in (r, 1] and the partition of
/// allocated coordinate indices by coset.
#[derive(Clone, Debug, Serialize)]
pub struct CosetRegistry {
    group: ValueGroup,
    r: Magnitude,
    entries: BTreeMap<Coset, RegistryEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RegistryEntry {
    pub representative: Magnitude,
    pub indices: Vec<usize>,
}

impl CosetRegistry {
    /// For a discrete group r must be exactly p^(-1): then (r, 1] holds one
    /// rung of every coset ladder. Dense groups accept any r in (0, 1).
    pub fn new(group: ValueGroup, r: Magnitude) -> Result<Self> {
        if r.is_zero() || r >= Magnitude::one() {
            return Err(Error::RadiusOutOfRange { r: r.to_string() });
        }
        if group.kind == GroupKind::Discrete {
            let step = Magnitude::prime_pow(
                group.prime,
                BigRational::from_integer(BigInt::from(-1)),
            )?;
            if r != step {
                return Err(Error::RadiusOutOfRange { r: r.to_string() });
            }
        }
        Ok(CosetRegistry { group, r, entries: BTreeMap::new() })
    }

    /// p^(-1) for discrete groups, 3/4 for dense ones.
    pub fn default_radius(group: &ValueGroup) -> Magnitude {
        match group.kind {
            GroupKind::Discrete => {
                Magnitude::prime_pow(group.prime, BigRational::from_integer(BigInt::from(-1)))
                    .expect("group prime is prime")
            }
            GroupKind::Dense => Magnitude::from_u64(3)
                .and_then(|t| t.div(&Magnitude::from_u64(4)?))
                .expect("3/4 factors"),
        }
    }

    pub fn group(&self) -> &ValueGroup {
        &self.group
    }

    pub fn radius(&self) -> &Magnitude {
        &self.r
    }

    pub fn entries(&self) -> &BTreeMap<Coset, RegistryEntry> {
        &self.entries
    }

    /// The representative of the coset in (r, 1], chosen once and reused.
    pub fn representative(&mut self, coset: &Coset) -> Result<Magnitude> {
        if let Some(e) = self.entries.get(coset) {
            return Ok(e.representative.clone());
        }
        let rep = coset.representative_in(&self.r, &Magnitude::one())?;
        self.entries.insert(
            coset.clone(),
            RegistryEntry { representative: rep.clone(), indices: Vec::new() },
        );
        Ok(rep)
    }

    fn record_index(&mut self, coset: &Coset, idx: usize) {
        self.entries
            .get_mut(coset)
            .expect("representative registered before allocation")
            .indices
            .push(idx);
    }
}

/// A growing stage of an ambient space: a weighted space plus an allocator
/// for fresh coordinates. Allocation never changes existing weights, so the
/// stages form a chain and vectors of earlier stages lift by zero-padding.
#[derive(Clone, Debug, Serialize)]
pub struct Ambient {
    field: FieldDescriptor,
    weights: Vec<Magnitude>,
    registry: CosetRegistry,
    declared_dense: bool,
    capacity: usize,
}

pub const DEFAULT_CAPACITY: usize = 4096;

impl Ambient {
    /// An ambient wrapping an existing finite stage. Density of the value
    /// set is whatever the weights and field give (see value_set_dense).
    pub fn over(field: FieldDescriptor, weights: Vec<Magnitude>) -> Result<Self> {
        let group = field.value_group();
        let r = CosetRegistry::default_radius(&group);
        Ambient::with_registry(field, weights, r, DEFAULT_CAPACITY, false)
    }

    /// A universal-space stage: starts empty and declares its value set
    /// dense by construction (the registry ranges over all cosets).
    pub fn universal(field: FieldDescriptor, r: Option<Magnitude>) -> Result<Self> {
        let group = field.value_group();
        let r = r.unwrap_or_else(|| CosetRegistry::default_radius(&group));
        Ambient::with_registry(field, Vec::new(), r, DEFAULT_CAPACITY, true)
    }

    pub fn with_registry(
        field: FieldDescriptor,
        weights: Vec<Magnitude>,
        r: Magnitude,
        capacity: usize,
        declared_dense: bool,
    ) -> Result<Self> {
        if weights.len() > capacity {
            return Err(Error::AllocatorExhausted);
        }
        if weights.iter().any(|w| w.is_zero()) {
            return Err(Error::ZeroMagnitude { context: "ambient weight" });
        }
        let registry = CosetRegistry::new(field.value_group(), r)?;
        Ok(Ambient { field, weights, registry, declared_dense, capacity })
    }

    pub fn field(&self) -> &FieldDescriptor {
        &self.field
    }

    pub fn registry(&self) -> &CosetRegistry {
        &self.registry
    }

    pub fn declared_dense(&self) -> bool {
        self.declared_dense
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn remaining_capacity(&self) -> usize {
        self.capacity - self.weights.len()
    }

    /// The current stage as a space. Allocations made later extend it; the
    /// snapshot itself stays valid.
    pub fn stage(&self) -> WeightedSpace {
        WeightedSpace::new(self.field.clone(), self.weights.clone())
            .expect("ambient weights are positive")
    }

    /// Appends a coordinate with the given weight, registering its coset.
    pub fn alloc_with_weight(&mut self, w: Magnitude) -> Result<usize> {
        if w.is_zero() {
            return Err(Error::ZeroMagnitude { context: "allocated weight" });
        }
        if self.weights.len() >= self.capacity {
            return Err(Error::AllocatorExhausted);
        }
        let coset = coset_of(&w, self.registry.group())?;
        // make sure the coset is registered so the index lands in its class
        let _ = self.registry.representative(&coset)?;
        let idx = self.weights.len();
        self.weights.push(w);
        self.registry.record_index(&coset, idx);
        Ok(idx)
    }

    /// Appends a coordinate carrying the registry representative of the
    /// coset; returns (index, representative).
    pub fn alloc_for_coset(&mut self, coset: &Coset) -> Result<(usize, Magnitude)> {
        let rep = self.registry.representative(coset)?;
        let idx = self.alloc_with_weight(rep.clone())?;
        Ok((idx, rep))
    }

    /// Zero-pads a vector of an earlier stage to the current dimension.
    pub fn lift(&self, v: &Vector) -> Result<Vector> {
        if v.coords.len() > self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.coords.len() });
        }
        let mut coords = v.coords.clone();
        coords.resize(self.dim(), self.field.zero());
        Ok(Vector::new(coords))
    }
}

//! Product-binned register state.
//!
//! When the coupling sees only `v = n·m`, every pair with the same product
//! picks up the same overlap, so a diagonal register can be stored as one
//! mass per distinct product. A pure register with uniform initial phases
//! gives the same masses and the same `Pr(E)` at every step; its coherences
//! within a bin are never needed because fidelity against the factor pair
//! only reads the target bin.

use rayon::prelude::*;

use super::{FactoringRanges, Occupation, TrialEnsemble, VANISHING_MASS};
use crate::error::{Error, Result};
use crate::numeric::{deterministic_sum, divide_all, scale_and_sum, CHUNK};

/// Largest product span the dense counting pass in
/// [`ProductBinTable::uniform_grid`] will allocate (2 bytes per slot).
pub const MAX_GRID_SPAN: u64 = 1_000_000_000;

/// One distinct product with its mass and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBin {
    pub key: u64,
    pub mass: f64,
    pub count: u32,
}

/// Masses aggregated by product, sorted ascending by key.
#[derive(Debug, Clone)]
pub struct ProductBinTable {
    keys: Vec<u64>,
    mass: Vec<f64>,
    counts: Vec<u32>,
    target: Option<u64>,
    target_members: Vec<Occupation>,
}

impl ProductBinTable {
    /// Bins of the uniform superposition over the trial pairs for `N`.
    pub fn uniform_grid(ranges: &FactoringRanges) -> Result<Self> {
        let lo = ranges.n_lo * ranges.m_lo;
        let hi = ranges
            .n_hi
            .checked_mul(ranges.m_hi)
            .ok_or_else(|| Error::Overflow(format!("{} · {}", ranges.n_hi, ranges.m_hi)))?;
        let span = hi - lo + 1;
        if span > MAX_GRID_SPAN || ranges.n_count() > u16::MAX as u64 {
            return Err(Error::DomainTooLarge(format!(
                "product span {span} for N = {}",
                ranges.target
            )));
        }
        let mut dense = vec![0u16; span as usize];
        for n in ranges.n_lo..=ranges.n_hi {
            let mut idx = (n * ranges.m_lo - lo) as usize;
            for _ in ranges.m_lo..=ranges.m_hi {
                dense[idx] += 1;
                idx += n as usize;
            }
        }
        let distinct = dense
            .par_chunks(CHUNK)
            .map(|c| c.iter().filter(|&&x| x > 0).count())
            .sum::<usize>();
        let total = ranges.pair_count() as f64;
        let mut keys = Vec::with_capacity(distinct);
        let mut counts = Vec::with_capacity(distinct);
        let mut mass = Vec::with_capacity(distinct);
        for (i, &c) in dense.iter().enumerate() {
            if c > 0 {
                keys.push(lo + i as u64);
                counts.push(c as u32);
                mass.push(c as f64 / total);
            }
        }
        drop(dense);
        Ok(Self {
            keys,
            mass,
            counts,
            target: Some(ranges.target),
            target_members: ranges.factor_pairs(),
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[u64] {
        &self.keys
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total_mass(&self) -> f64 {
        deterministic_sum(&self.mass)
    }

    pub fn max_count(&self) -> u32 {
        self.counts.iter().copied().max().unwrap_or(0)
    }

    pub fn bin(&self, key: u64) -> Option<ProductBin> {
        let i = self.keys.binary_search(&key).ok()?;
        Some(ProductBin {
            key,
            mass: self.mass[i],
            count: self.counts[i],
        })
    }

    pub fn target(&self) -> Option<u64> {
        self.target
    }

    /// Tuples of the target bin.
    pub fn target_members(&self) -> &[Occupation] {
        &self.target_members
    }

    pub fn into_state(self) -> BinnedState<u64> {
        BinnedState {
            keys: self.keys,
            mass: self.mass,
            total: 1.0,
        }
    }
}

/// Group a sparse ensemble's masses by the product of each tuple.
pub fn bin_by_product(state: &TrialEnsemble, target: Option<u64>) -> Result<ProductBinTable> {
    let mut rows: Vec<(u64, f64, &Occupation)> = Vec::with_capacity(state.len());
    for (tup, m) in state.iter() {
        let p = tup.product()?;
        let key = u64::try_from(p).map_err(|_| Error::Overflow(format!("product of {tup}")))?;
        rows.push((key, m, tup));
    }
    rows.sort_by_key(|r| r.0);
    let mut keys: Vec<u64> = Vec::new();
    let mut counts: Vec<u32> = Vec::new();
    let mut members: Vec<Vec<f64>> = Vec::new();
    let mut target_members = Vec::new();
    for (key, m, tup) in rows {
        if Some(key) == target {
            target_members.push(tup.clone());
        }
        if keys.last() == Some(&key) {
            *counts.last_mut().unwrap() += 1;
            members.last_mut().unwrap().push(m);
        } else {
            keys.push(key);
            counts.push(1);
            members.push(vec![m]);
        }
    }
    let mass = members.iter().map(|v| deterministic_sum(v)).collect();
    Ok(ProductBinTable {
        keys,
        mass,
        counts,
        target,
        target_members,
    })
}

/// Outcome of conditioning a [`BinnedState`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub probability: f64,
    /// Cumulative normalization after the step.
    pub normalization: f64,
}

/// Normalized masses over sorted keys, with the cumulative normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct BinnedState<K> {
    keys: Vec<K>,
    mass: Vec<f64>,
    total: f64,
}

impl<K: Ord + Sync> BinnedState<K> {
    /// Keys must be strictly ascending; masses must sum to one.
    pub fn new(keys: Vec<K>, mass: Vec<f64>) -> Result<Self> {
        if keys.len() != mass.len() || keys.is_empty() {
            return Err(Error::InvalidEnsemble(
                "keys and masses differ in length".into(),
            ));
        }
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidEnsemble("keys not strictly ascending".into()));
        }
        if mass.iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidEnsemble("negative or non-finite mass".into()));
        }
        let s = deterministic_sum(&mass);
        if (s - 1.0).abs() > super::NORM_TOLERANCE {
            return Err(Error::InvalidEnsemble(format!("masses sum to {s}")));
        }
        Ok(Self {
            keys,
            mass,
            total: 1.0,
        })
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn keys(&self) -> &[K] {
        &self.keys
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mass_of(&self, key: &K) -> f64 {
        self.keys.binary_search(key).map_or(0.0, |i| self.mass[i])
    }

    /// Multiply each mass by `weight(key)` and renormalize.
    ///
    /// On [`Error::ConditionedMassVanished`] the state is left scaled but
    /// unnormalized and should be discarded.
    pub fn condition<F>(&mut self, weight: F) -> Result<StepOutcome>
    where
        F: Fn(&K) -> f64 + Sync,
    {
        let probability = scale_and_sum(&mut self.mass, &self.keys, weight);
        if !(probability >= VANISHING_MASS) {
            return Err(Error::ConditionedMassVanished(probability));
        }
        divide_all(&mut self.mass, probability);
        self.total *= probability;
        Ok(StepOutcome {
            probability,
            normalization: self.total,
        })
    }

    /// Index whose cumulative mass first exceeds `u ∈ [0, 1)`.
    pub fn sample_index(&self, u: f64) -> usize {
        super::invert_cumulative(self.mass.iter().copied(), u).unwrap_or(0)
    }
}

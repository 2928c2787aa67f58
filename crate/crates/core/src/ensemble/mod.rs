//! Register state store.
//!
//! A [`TrialEnsemble`] is a sparse table over occupation tuples holding
//! either complex amplitudes (pure mode) or probabilities (diagonal mode).
//! Amplitudes are kept in the frame co-rotating with the free register
//! Hamiltonian, so conditioning only ever multiplies an entry by its
//! coherent-state overlap.
//!
//! Large factoring instances never materialize tuples; they go through the
//! product-binned representation in [`bins`].

pub mod bins;
mod dump;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::dynamics::{epsilon_overlap, MarkerAmplitude, OscillatorParams, PhaseKernel};
use crate::error::{Error, Result};
use crate::numeric::deterministic_sum;
use crate::rng;

pub use bins::{bin_by_product, BinnedState, ProductBin, ProductBinTable, StepOutcome};
pub use dump::write_dump;

/// Normalization tolerance for ensembles and targets.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Below this conditioned mass the measurement is treated as impossible.
pub const VANISHING_MASS: f64 = 1e-300;

/// Largest ensemble [`init_uniform_factoring`] will materialize.
pub const MAX_SPARSE_ENTRIES: u64 = 20_000_000;

/// Occupation numbers `(m_1, ..., m_A)` of the register oscillators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Occupation(SmallVec<[u64; 4]>);

impl Occupation {
    pub fn new(values: &[u64]) -> Self {
        Self(SmallVec::from_slice(values))
    }

    pub fn pair(n: u64, m: u64) -> Self {
        Self::new(&[n, m])
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.0
    }

    pub fn arity(&self) -> usize {
        self.0.len()
    }

    /// Product of all occupation numbers, e.g. `n·m` for a factoring pair.
    pub fn product(&self) -> Result<i128> {
        self.0.iter().try_fold(1i128, |acc, &v| {
            acc.checked_mul(v as i128)
                .ok_or_else(|| Error::Overflow(format!("product of {self}")))
        })
    }
}

impl From<Vec<u64>> for Occupation {
    fn from(v: Vec<u64>) -> Self {
        Self(SmallVec::from_vec(v))
    }
}

impl<const N: usize> From<[u64; N]> for Occupation {
    fn from(v: [u64; N]) -> Self {
        Self::new(&v)
    }
}

impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Pure,
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
enum Weights {
    Pure(Vec<Complex64>),
    Diagonal(Vec<f64>),
}

/// Sparse register state over unique occupation tuples, kept sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialEnsemble {
    tuples: Vec<Occupation>,
    weights: Weights,
    /// Cumulative normalization `C` of all conditionings applied so far.
    total: f64,
}

fn sort_unique<T>(mut entries: Vec<(Occupation, T)>) -> Result<(Vec<Occupation>, Vec<T>)> {
    if entries.is_empty() {
        return Err(Error::InvalidEnsemble("no entries".into()));
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let arity = entries[0].0.arity();
    for w in entries.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidEnsemble(format!(
                "duplicate tuple {}",
                w[0].0
            )));
        }
    }
    if entries.iter().any(|(t, _)| t.arity() != arity) {
        return Err(Error::InvalidEnsemble("tuples of mixed arity".into()));
    }
    Ok(entries.into_iter().unzip())
}

impl TrialEnsemble {
    /// Pure state from amplitudes; the result is normalized.
    pub fn pure(entries: impl IntoIterator<Item = (Occupation, Complex64)>) -> Result<Self> {
        let (tuples, mut amps) = sort_unique(entries.into_iter().collect())?;
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::InvalidEnsemble("non-finite amplitude".into()));
        }
        let norm = deterministic_sum(&amps.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>());
        if !(norm > 0.0) {
            return Err(Error::InvalidEnsemble("zero norm".into()));
        }
        let scale = norm.sqrt().recip();
        for a in &mut amps {
            *a *= scale;
        }
        Ok(Self {
            tuples,
            weights: Weights::Pure(amps),
            total: 1.0,
        })
    }

    /// Diagonal mixture from non-negative weights; the result is normalized.
    pub fn diagonal(entries: impl IntoIterator<Item = (Occupation, f64)>) -> Result<Self> {
        let (tuples, mut probs) = sort_unique(entries.into_iter().collect())?;
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidEnsemble(
                "negative or non-finite probability".into(),
            ));
        }
        let norm = deterministic_sum(&probs);
        if !(norm > 0.0) {
            return Err(Error::InvalidEnsemble("zero norm".into()));
        }
        for p in &mut probs {
            *p /= norm;
        }
        Ok(Self {
            tuples,
            weights: Weights::Diagonal(probs),
            total: 1.0,
        })
    }

    /// Equal-amplitude superposition of the given tuples.
    pub fn uniform(tuples: impl IntoIterator<Item = Occupation>) -> Result<Self> {
        Self::pure(tuples.into_iter().map(|t| (t, Complex64::new(1.0, 0.0))))
    }

    pub fn point(tuple: Occupation) -> Self {
        Self {
            tuples: vec![tuple],
            weights: Weights::Pure(vec![Complex64::new(1.0, 0.0)]),
            total: 1.0,
        }
    }

    pub fn mode(&self) -> Mode {
        match self.weights {
            Weights::Pure(_) => Mode::Pure,
            Weights::Diagonal(_) => Mode::Diagonal,
        }
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.tuples[0].arity()
    }

    pub fn tuples(&self) -> &[Occupation] {
        &self.tuples
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn mass(&self, index: usize) -> f64 {
        match &self.weights {
            Weights::Pure(a) => a[index].norm_sqr(),
            Weights::Diagonal(p) => p[index],
        }
    }

    /// Amplitude of entry `index`; `sqrt(p)` in diagonal mode.
    pub fn amplitude(&self, index: usize) -> Complex64 {
        match &self.weights {
            Weights::Pure(a) => a[index],
            Weights::Diagonal(p) => Complex64::new(p[index].sqrt(), 0.0),
        }
    }

    pub fn masses(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.mass(i)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Occupation, f64)> + '_ {
        self.tuples
            .iter()
            .enumerate()
            .map(|(i, t)| (t, self.mass(i)))
    }

    pub fn index_of(&self, tuple: &Occupation) -> Option<usize> {
        self.tuples.binary_search(tuple).ok()
    }

    pub fn mass_of(&self, tuple: &Occupation) -> f64 {
        self.index_of(tuple).map_or(0.0, |i| self.mass(i))
    }

    pub fn norm(&self) -> f64 {
        deterministic_sum(&self.masses())
    }

    /// Relabel every tuple; weights and the cumulative normalization carry over.
    pub fn map_tuples<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&Occupation) -> Result<Occupation>,
    {
        let tuples: Vec<Occupation> = self.tuples.iter().map(&mut f).collect::<Result<_>>()?;
        let mut out = match &self.weights {
            Weights::Pure(a) => Self::pure(tuples.into_iter().zip(a.iter().copied()))?,
            Weights::Diagonal(p) => Self::diagonal(tuples.into_iter().zip(p.iter().copied()))?,
        };
        out.total = self.total;
        Ok(out)
    }

    /// Multiply every entry by its overlap coefficient and renormalize.
    ///
    /// Pure entries are multiplied by `ε`, diagonal entries by `|ε|²`.
    pub fn condition<F>(&self, mut overlap: F) -> Result<MeasurementOutcome>
    where
        F: FnMut(&Occupation) -> Result<Complex64>,
    {
        let mut weights = self.weights.clone();
        let masses: Vec<f64> = match &mut weights {
            Weights::Pure(amps) => {
                for (a, t) in amps.iter_mut().zip(&self.tuples) {
                    *a *= overlap(t)?;
                }
                amps.iter().map(|a| a.norm_sqr()).collect()
            }
            Weights::Diagonal(probs) => {
                for (p, t) in probs.iter_mut().zip(&self.tuples) {
                    *p *= overlap(t)?.norm_sqr();
                }
                probs.clone()
            }
        };
        let probability = deterministic_sum(&masses);
        if !(probability >= VANISHING_MASS) {
            return Err(Error::ConditionedMassVanished(probability));
        }
        match &mut weights {
            Weights::Pure(amps) => {
                let s = probability.sqrt();
                for a in amps {
                    *a /= s;
                }
            }
            Weights::Diagonal(probs) => {
                for p in probs {
                    *p /= probability;
                }
            }
        }
        let normalization = self.total * probability;
        Ok(MeasurementOutcome {
            probability,
            post_state: Self {
                tuples: self.tuples.clone(),
                weights,
                total: normalization,
            },
            normalization,
        })
    }
}

/// Result of one conditional measurement.
#[derive(Debug, Clone)]
pub struct MeasurementOutcome {
    /// `Pr(E)`, relative to the state before this measurement.
    pub probability: f64,
    pub post_state: TrialEnsemble,
    /// Cumulative normalization `C_l` after this measurement.
    pub normalization: f64,
}

/// Trial ranges for factoring `N`: `n ∈ [3, ⌈√N⌉]`, `m ∈ [⌈√(N+1)⌉, ⌈N/3⌉]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactoringRanges {
    pub target: u64,
    pub n_lo: u64,
    pub n_hi: u64,
    pub m_lo: u64,
    pub m_hi: u64,
}

/// `⌈√x⌉` for `x ≥ 1`, via `isqrt(x − 1) + 1`.
pub fn ceil_sqrt(x: u64) -> u64 {
    if x == 0 {
        0
    } else {
        (x - 1).isqrt() + 1
    }
}

impl FactoringRanges {
    pub fn new(target: u64) -> Result<Self> {
        let r = Self {
            target,
            n_lo: 3,
            n_hi: ceil_sqrt(target),
            m_lo: ceil_sqrt(target.checked_add(1).ok_or(Error::EmptyRange(target))?),
            m_hi: target.div_ceil(3),
        };
        if r.n_hi < r.n_lo || r.m_hi < r.m_lo {
            return Err(Error::EmptyRange(target));
        }
        Ok(r)
    }

    pub fn n_count(&self) -> u64 {
        self.n_hi - self.n_lo + 1
    }

    pub fn m_count(&self) -> u64 {
        self.m_hi - self.m_lo + 1
    }

    pub fn pair_count(&self) -> u64 {
        self.n_count() * self.m_count()
    }

    /// Probability of each pair in the uniform superposition.
    pub fn uniform_probability(&self) -> f64 {
        1.0 / self.pair_count() as f64
    }

    pub fn contains(&self, n: u64, m: u64) -> bool {
        (self.n_lo..=self.n_hi).contains(&n) && (self.m_lo..=self.m_hi).contains(&m)
    }

    /// Pairs `(n, m)` in range with `n·m = value`, ascending in `n`.
    pub fn members_of(&self, value: u64) -> Vec<Occupation> {
        (self.n_lo..=self.n_hi)
            .filter(|&n| value.is_multiple_of(n) && self.contains(n, value / n))
            .map(|n| Occupation::pair(n, value / n))
            .collect()
    }

    /// Factor pairs of the target inside the ranges.
    pub fn factor_pairs(&self) -> Vec<Occupation> {
        self.members_of(self.target)
    }
}

/// Uniform superposition over all trial pairs for `N`.
pub fn init_uniform_factoring(target: u64) -> Result<TrialEnsemble> {
    let r = FactoringRanges::new(target)?;
    if r.pair_count() > MAX_SPARSE_ENTRIES {
        return Err(Error::DomainTooLarge(format!(
            "{} trial pairs; use the product-binned path",
            r.pair_count()
        )));
    }
    let mut tuples = Vec::with_capacity(r.pair_count() as usize);
    for n in r.n_lo..=r.n_hi {
        for m in r.m_lo..=r.m_hi {
            tuples.push(Occupation::pair(n, m));
        }
    }
    TrialEnsemble::uniform(tuples)
}

/// Condition the register on the marker state of `target_term`.
///
/// Each entry's coupling argument is the product of its occupation numbers.
pub fn conditional_update(
    state: &TrialEnsemble,
    params: &OscillatorParams,
    alpha: MarkerAmplitude,
    target_term: i128,
    t: f64,
) -> Result<MeasurementOutcome> {
    let mut bound = 0u128;
    for tup in state.tuples() {
        bound = bound.max(tup.product()?.unsigned_abs());
    }
    let kernel = PhaseKernel::new(params, target_term, t, bound)?;
    state.condition(|tup| Ok(epsilon_overlap(alpha, kernel.delta(tup.product()?))))
}

/// Reference state for fidelity: a pure superposition or a diagonal mixture.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetState {
    Pure(Vec<(Occupation, Complex64)>),
    Mixed(Vec<(Occupation, f64)>),
}

impl TargetState {
    pub fn single(tuple: Occupation) -> Self {
        Self::Pure(vec![(tuple, Complex64::new(1.0, 0.0))])
    }

    pub fn pure(members: Vec<(Occupation, Complex64)>) -> Result<Self> {
        let norm: f64 = members.iter().map(|(_, a)| a.norm_sqr()).sum();
        if members.is_empty() || !(norm > 0.0) {
            return Err(Error::InvalidEnsemble("empty target".into()));
        }
        let s = norm.sqrt();
        Ok(Self::Pure(
            members.into_iter().map(|(t, a)| (t, a / s)).collect(),
        ))
    }

    pub fn mixed(members: Vec<(Occupation, f64)>) -> Result<Self> {
        let norm: f64 = members.iter().map(|(_, p)| p).sum();
        if members.is_empty() || !(norm > 0.0) || members.iter().any(|(_, p)| *p < 0.0) {
            return Err(Error::InvalidEnsemble("empty or negative target".into()));
        }
        Ok(Self::Mixed(
            members.into_iter().map(|(t, p)| (t, p / norm)).collect(),
        ))
    }

    /// Projection of `state` onto `members`, renormalized: pure states give a
    /// pure target, diagonal states a mixed one.
    pub fn projected(state: &TrialEnsemble, members: &[Occupation]) -> Result<Self> {
        let found: Vec<usize> = members.iter().filter_map(|m| state.index_of(m)).collect();
        match state.mode() {
            Mode::Pure => Self::pure(
                found
                    .iter()
                    .map(|&i| (state.tuples[i].clone(), state.amplitude(i)))
                    .collect(),
            ),
            Mode::Diagonal => Self::mixed(
                found
                    .iter()
                    .map(|&i| (state.tuples[i].clone(), state.mass(i)))
                    .collect(),
            ),
        }
    }

    pub fn members(&self) -> Vec<&Occupation> {
        match self {
            Self::Pure(m) => m.iter().map(|(t, _)| t).collect(),
            Self::Mixed(m) => m.iter().map(|(t, _)| t).collect(),
        }
    }
}

/// Uhlmann fidelity between the register state and a target.
///
/// With a pure target `|φ>` this is `<φ|ρ|φ>`; for two diagonal states it is
/// the classical `(Σ √(p q))²`.
pub fn fidelity(state: &TrialEnsemble, target: &TargetState) -> f64 {
    let f = match (target, &state.weights) {
        (TargetState::Pure(members), Weights::Pure(_)) => members
            .iter()
            .filter_map(|(t, phi)| state.index_of(t).map(|i| phi.conj() * state.amplitude(i)))
            .sum::<Complex64>()
            .norm_sqr(),
        (TargetState::Pure(members), Weights::Diagonal(_)) => members
            .iter()
            .map(|(t, phi)| phi.norm_sqr() * state.mass_of(t))
            .sum(),
        (TargetState::Mixed(members), Weights::Pure(_)) => {
            members.iter().map(|(t, q)| q * state.mass_of(t)).sum()
        }
        (TargetState::Mixed(members), Weights::Diagonal(_)) => {
            let s: f64 = members
                .iter()
                .map(|(t, q)| (q * state.mass_of(t)).sqrt())
                .sum();
            s * s
        }
    };
    f.clamp(0.0, 1.0)
}

/// Index drawn by cumulative-sum inversion over `masses` in order.
pub(crate) fn invert_cumulative(masses: impl IntoIterator<Item = f64>, u: f64) -> Option<usize> {
    let mut acc = 0.0;
    let mut last_nonzero = None;
    for (i, m) in masses.into_iter().enumerate() {
        if m > 0.0 {
            last_nonzero = Some(i);
        }
        acc += m;
        if u < acc {
            return Some(i);
        }
    }
    last_nonzero
}

/// Draw a tuple from the state's distribution, deterministic in `seed`.
pub fn sample(state: &TrialEnsemble, seed: u64) -> Occupation {
    let mut r = rng::stream(seed);
    sample_with(state, &mut r)
}

pub(crate) fn sample_with(state: &TrialEnsemble, r: &mut rng::Stream) -> Occupation {
    let u = rng::unit(r) * state.norm();
    let i = invert_cumulative((0..state.len()).map(|i| state.mass(i)), u).unwrap_or(0);
    state.tuples[i].clone()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::overlap_weight;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn factoring_ranges_examples() {
        let r = FactoringRanges::new(35).unwrap();
        assert_eq!((r.n_lo, r.n_hi, r.m_lo, r.m_hi), (3, 6, 6, 12));
        assert_eq!(r.pair_count(), 28);
        let r = FactoringRanges::new(8).unwrap();
        assert_eq!((r.n_hi, r.m_lo, r.m_hi), (3, 3, 3));
        let r = FactoringRanges::new(1_030_189).unwrap();
        assert_eq!(r.n_count(), 1013);
        assert_eq!(r.m_count(), 342_383);
        assert_eq!(r.factor_pairs(), vec![Occupation::pair(1009, 1021)]);
        assert!((r.uniform_probability() - 2.883e-9).abs() < 5e-13);
    }

    #[test]
    fn empty_ranges_rejected() {
        for n in [0, 1, 4, 5, 6] {
            assert!(
                matches!(FactoringRanges::new(n), Err(Error::EmptyRange(_))),
                "{n}"
            );
        }
    }

    #[test]
    fn ceil_sqrt_is_exact() {
        for x in 1..5000u64 {
            let c = ceil_sqrt(x);
            assert!(c * c >= x && (c - 1) * (c - 1) < x);
        }
        assert_eq!(ceil_sqrt(u64::MAX), 1 << 32);
    }

    #[test]
    fn uniform_factoring_n35() {
        let s = init_uniform_factoring(35).unwrap();
        assert_eq!(s.len(), 28);
        assert!((s.mass_of(&Occupation::pair(5, 7)) - 1.0 / 28.0).abs() < 1e-15);
        let f = fidelity(&s, &TargetState::single(Occupation::pair(5, 7)));
        assert!((f - 0.035714).abs() < 1e-6);
    }

    #[test]
    fn uniform_factoring_n8_single_pair() {
        let s = init_uniform_factoring(8).unwrap();
        assert_eq!(s.tuples(), &[Occupation::pair(3, 3)]);
        assert_eq!(s.amplitude(0), c(1.0));
    }

    #[test]
    fn duplicate_tuples_rejected() {
        let e = TrialEnsemble::pure([
            (Occupation::pair(1, 2), c(1.0)),
            (Occupation::pair(1, 2), c(1.0)),
        ]);
        assert!(e.is_err());
    }

    #[test]
    fn conditional_update_n35_against_direct_sum() {
        let s = init_uniform_factoring(35).unwrap();
        let p = OscillatorParams::factoring_default();
        let a = MarkerAmplitude::real(2.0).unwrap();
        let out = conditional_update(&s, &p, a, 35, 1.0).unwrap();
        let expected: f64 = (3..=6u64)
            .flat_map(|n| (6..=12u64).map(move |m| n * m))
            .map(|v| (-8.0 * (1.0 - ((35.0 - v as f64) * 1.0).cos())).exp() / 28.0)
            .sum();
        assert!((out.probability - expected).abs() < 1e-14);
        assert!((out.post_state.norm() - 1.0).abs() < 1e-12);
        assert_eq!(out.normalization, out.probability);
    }

    #[test]
    fn zero_time_and_vacuum_are_identity() {
        let s = init_uniform_factoring(35).unwrap();
        let p = OscillatorParams::factoring_default();
        let out = conditional_update(&s, &p, MarkerAmplitude::real(2.0).unwrap(), 35, 0.0).unwrap();
        assert!((out.probability - 1.0).abs() < 1e-15);
        let out2 =
            conditional_update(&s, &p, MarkerAmplitude::real(0.0).unwrap(), 35, 1.3).unwrap();
        assert!((out2.probability - 1.0).abs() < 1e-15);
        for i in 0..s.len() {
            assert!((out.post_state.mass(i) - s.mass(i)).abs() < 1e-15);
            assert!((out2.post_state.mass(i) - s.mass(i)).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_mode_uses_squared_overlap() {
        let tuples: Vec<_> = (3..=6)
            .flat_map(|n| (6..=12).map(move |m| Occupation::pair(n, m)))
            .collect();
        let d = TrialEnsemble::diagonal(tuples.iter().cloned().map(|t| (t, 1.0))).unwrap();
        let p = OscillatorParams::factoring_default();
        let out = conditional_update(&d, &p, MarkerAmplitude::real(1.5).unwrap(), 35, 0.7).unwrap();
        let expected: f64 = tuples
            .iter()
            .map(|t| {
                overlap_weight(
                    1.5,
                    ((35 - t.product().unwrap()) as f64 * 0.7) % std::f64::consts::TAU,
                ) / 28.0
            })
            .sum();
        assert!((out.probability - expected).abs() < 1e-13);
        assert_eq!(out.post_state.mode(), Mode::Diagonal);
    }

    #[test]
    fn vanished_mass_is_an_error() {
        let s = TrialEnsemble::point(Occupation::pair(3, 3));
        let err = s.condition(|_| Ok(c(0.0))).unwrap_err();
        assert!(matches!(err, Error::ConditionedMassVanished(_)));
    }

    #[test]
    fn fidelity_variants() {
        let a = Occupation::pair(1, 1);
        let b = Occupation::pair(1, 2);
        let pure =
            TrialEnsemble::pure([(a.clone(), c(0.6)), (b.clone(), Complex64::new(0.0, 0.8))])
                .unwrap();
        assert!((fidelity(&pure, &TargetState::single(a.clone())) - 0.36).abs() < 1e-15);
        let phi = TargetState::pure(vec![
            (a.clone(), c(1.0)),
            (b.clone(), Complex64::new(0.0, 1.0)),
        ])
        .unwrap();
        // <φ|ψ> = (0.6 + 0.8)/√2
        assert!((fidelity(&pure, &phi) - 0.98).abs() < 1e-12);
        let diag = TrialEnsemble::diagonal([(a.clone(), 0.25), (b.clone(), 0.75)]).unwrap();
        let mix = TargetState::mixed(vec![(a.clone(), 0.5), (b.clone(), 0.5)]).unwrap();
        let expected = ((0.125f64).sqrt() + (0.375f64).sqrt()).powi(2);
        assert!((fidelity(&diag, &mix) - expected).abs() < 1e-12);
        assert_eq!(
            fidelity(&TrialEnsemble::point(a.clone()), &TargetState::single(a)),
            1.0
        );
    }

    #[test]
    fn sample_point_mass() {
        let s = TrialEnsemble::point(Occupation::pair(1009, 1021));
        for seed in [0, 1, 99, u64::MAX] {
            assert_eq!(sample(&s, seed), Occupation::pair(1009, 1021));
        }
    }

    #[test]
    fn sample_frequencies_within_three_sigma() {
        let a = Occupation::pair(0, 0);
        let b = Occupation::pair(0, 1);
        let uni = TrialEnsemble::uniform([a.clone(), b.clone()]).unwrap();
        let diag = TrialEnsemble::diagonal([(a.clone(), 0.9), (b.clone(), 0.1)]).unwrap();
        let draws = 100_000u64;
        let mut r = rng::stream(12345);
        let hits = (0..draws)
            .filter(|_| sample_with(&uni, &mut r) == a)
            .count() as f64;
        let sigma = (draws as f64 * 0.25).sqrt();
        assert!((hits - 50_000.0).abs() < 3.0 * sigma);
        let hits = (0..draws)
            .filter(|_| sample_with(&diag, &mut r) == a)
            .count() as f64;
        let sigma = (draws as f64 * 0.09).sqrt();
        assert!((hits - 90_000.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn sample_is_deterministic() {
        let s = init_uniform_factoring(35).unwrap();
        assert_eq!(sample(&s, 42), sample(&s, 42));
    }
}

//! Iterated conditional measurement for factoring.
//!
//! The register holds the uniform superposition over trial pairs `(n, m)`;
//! each iteration couples the marker to `n·m` for a time `t_l` and keeps the
//! branch where the marker is found in the coherent state belonging to `N`.
//! The state is carried product-binned (see [`crate::ensemble::bins`]).

mod reference;

use serde::{Deserialize, Serialize};

use crate::dynamics::{overlap_weight, OscillatorParams, PhaseKernel};
use crate::ensemble::{BinnedState, FactoringRanges, Occupation, ProductBinTable};
use crate::error::{Error, Result};
use crate::rng;
use crate::schedule::{sample_times, AlphaSchedule, TimePolicy};

pub use reference::{
    compare, dithered_times, reference_config, replay_table1, replay_with_times, Replay, ReplayRow,
    F_REL_TOLERANCE, PR_ABS_TOLERANCE, REFERENCE_ALPHA, REFERENCE_F, REFERENCE_INITIAL_FIDELITY,
    REFERENCE_N, REFERENCE_PR, REFERENCE_TIMES, UNCHECKED_F_ROWS,
};

/// An iteration whose `Pr(E)` exceeds this while below the stop fidelity is
/// flagged as resonant.
pub const RESONANCE_PR: f64 = 0.999;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactoringConfig {
    pub n: u64,
    pub params: OscillatorParams,
    pub alpha: AlphaSchedule,
    pub times: TimePolicy,
    pub l_max: usize,
    pub stop_fidelity: f64,
    pub seed: u64,
}

impl FactoringConfig {
    /// `g = 1`, `|α| = 2`, random times, `L_max = 30`, stop at `F ≥ 0.99`.
    pub fn new(n: u64, seed: u64) -> Self {
        Self {
            n,
            params: OscillatorParams::factoring_default(),
            alpha: AlphaSchedule::default(),
            times: TimePolicy::SeededRandom,
            l_max: 30,
            stop_fidelity: 0.99,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        self.times.validate()?;
        if self.l_max == 0 {
            return Err(Error::InvalidConfig("l_max must be at least 1".into()));
        }
        if !(self.stop_fidelity > 0.0 && self.stop_fidelity <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stop fidelity {} not in (0, 1]",
                self.stop_fidelity
            )));
        }
        Ok(())
    }

    /// Seeds for the time stream and for the final measurement.
    fn sub_seeds(&self) -> (u64, u64) {
        let s = rng::derive_seeds(self.seed, 2);
        (s[0], s[1])
    }
}

/// Telemetry of one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub l: usize,
    pub t_l: f64,
    #[serde(rename = "alpha")]
    pub alpha_mag: f64,
    #[serde(rename = "pr_E")]
    pub pr_e: f64,
    #[serde(rename = "C_l")]
    pub c_l: f64,
    pub lambda_l: f64,
    pub fidelity: f64,
    /// Near-identity step taken before the stop fidelity was reached.
    pub resonant: bool,
}

/// Register state for factoring `N`, binned by product.
#[derive(Debug, Clone)]
pub struct FactoringState {
    ranges: FactoringRanges,
    bins: BinnedState<u64>,
    target_index: usize,
    bound: u128,
    factor_pairs: Vec<Occupation>,
}

impl FactoringState {
    /// Uniform superposition over the trial ranges for `n`.
    pub fn new(n: u64) -> Result<Self> {
        let ranges = FactoringRanges::new(n)?;
        if ranges.factor_pairs().is_empty() {
            return Err(Error::NoFactorInRange(n));
        }
        let table = ProductBinTable::uniform_grid(&ranges)?;
        let factor_pairs = table.target_members().to_vec();
        let bins = table.into_state();
        let target_index = bins
            .keys()
            .binary_search(&n)
            .map_err(|_| Error::NoFactorInRange(n))?;
        let bound = *bins.keys().last().unwrap() as u128;
        Ok(Self {
            ranges,
            bins,
            target_index,
            bound,
            factor_pairs,
        })
    }

    pub fn ranges(&self) -> &FactoringRanges {
        &self.ranges
    }

    pub fn bins(&self) -> &BinnedState<u64> {
        &self.bins
    }

    pub fn factor_pairs(&self) -> &[Occupation] {
        &self.factor_pairs
    }

    /// Fidelity with the factor state: the mass of the bin holding `N`.
    pub fn fidelity(&self) -> f64 {
        self.bins.masses()[self.target_index]
    }

    pub fn normalization(&self) -> f64 {
        self.bins.total()
    }

    /// Measure both registers. Pairs within a bin share one amplitude, so
    /// the pair is drawn uniformly once the bin is chosen.
    pub fn sample(&self, r: &mut rng::Stream) -> Occupation {
        let bin = self.bins.sample_index(rng::unit(r));
        let members = self.ranges.members_of(self.bins.keys()[bin]);
        let k = ((rng::unit(r) * members.len() as f64) as usize).min(members.len() - 1);
        members[k].clone()
    }
}

/// One conditional measurement at time `t`. The state is updated in place;
/// after an error it must be discarded.
pub fn run_iteration(
    state: &mut FactoringState,
    config: &FactoringConfig,
    l: usize,
    t: f64,
) -> Result<IterationRecord> {
    let alpha = config.alpha.magnitude(l);
    let kernel = PhaseKernel::new(&config.params, state.ranges.target as i128, t, state.bound)?;
    let out = state
        .bins
        .condition(|&v| overlap_weight(alpha, kernel.delta(v as i128).angle))?;
    let fidelity = state.fidelity();
    Ok(IterationRecord {
        l,
        t_l: t,
        alpha_mag: alpha,
        pr_e: out.probability,
        c_l: out.normalization,
        lambda_l: 1.0 / out.probability,
        fidelity,
        resonant: out.probability > RESONANCE_PR && fidelity < config.stop_fidelity,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    /// Geometric mean of `λ_l` over the recorded iterations.
    pub mean_lambda: f64,
    /// `⌈ln(1/F_0)/ln λ̄⌉`, when `λ̄ > 1`.
    pub estimated_iterations: Option<u64>,
    pub pair_count: u64,
    pub bin_count: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub version: String,
    pub config: FactoringConfig,
    pub seed: u64,
    pub ranges: FactoringRanges,
    pub initial_fidelity: f64,
    pub records: Vec<IterationRecord>,
    pub final_fidelity: f64,
    pub sampled_pair: Occupation,
    /// The sampled pair when its product is `N`.
    pub sampled_factors: Option<(u64, u64)>,
    pub diagnostics: Diagnostics,
}

/// Iterate until the stop fidelity or `L_max`, then measure the register.
pub fn run_factoring(config: &FactoringConfig) -> Result<RunReport> {
    run_factoring_with(config, true)
}

/// Run all `L_max` iterations regardless of the fidelity reached.
pub fn run_factoring_fixed(config: &FactoringConfig) -> Result<RunReport> {
    run_factoring_with(config, false)
}

pub(crate) fn run_factoring_with(config: &FactoringConfig, stop_early: bool) -> Result<RunReport> {
    config.validate()?;
    let mut state = FactoringState::new(config.n)?;
    let (time_seed, sample_seed) = config.sub_seeds();
    let times = sample_times(
        &config.times,
        time_seed,
        config.params.time_scale_coupling(),
    )?;
    let initial_fidelity = state.fidelity();
    let mut records = Vec::new();
    for (l, t) in (1..=config.l_max).zip(times) {
        let rec = run_iteration(&mut state, config, l, t)?;
        records.push(rec);
        if stop_early && rec.fidelity >= config.stop_fidelity {
            break;
        }
    }
    let sampled_pair = state.sample(&mut rng::stream(sample_seed));
    let sampled_factors = match sampled_pair.as_slice() {
        &[r, s] if r as u128 * s as u128 == config.n as u128 => Some((r, s)),
        _ => None,
    };
    let mean_lambda = mean_lambda(&records);
    let estimated_iterations = estimate_iterations(initial_fidelity, mean_lambda).ok();
    Ok(RunReport {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        seed: config.seed,
        ranges: state.ranges,
        initial_fidelity,
        final_fidelity: state.fidelity(),
        records,
        sampled_pair,
        sampled_factors,
        diagnostics: Diagnostics {
            mean_lambda,
            estimated_iterations,
            pair_count: state.ranges.pair_count(),
            bin_count: state.bins.len(),
        },
    })
}

/// Geometric mean of the amplification ratios; `NaN` for no records.
pub fn mean_lambda(records: &[IterationRecord]) -> f64 {
    mean_lambda_of(records.iter().map(|r| r.lambda_l))
}

pub(crate) fn mean_lambda_of(lambdas: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for l in lambdas {
        s += l.ln();
        n += 1;
    }
    if n == 0 {
        f64::NAN
    } else {
        (s / n as f64).exp()
    }
}

/// `⌈ln(1/pr0)/ln λ̄⌉`: iterations needed to lift `pr0` to order one.
pub fn estimate_iterations(pr0: f64, lambda_bar: f64) -> Result<u64> {
    if !(lambda_bar > 1.0) || !lambda_bar.is_finite() {
        return Err(Error::Domain(format!(
            "lambda_bar = {lambda_bar} must exceed 1"
        )));
    }
    if !(pr0 > 0.0 && pr0 < 1.0) {
        return Err(Error::Domain(format!("pr0 = {pr0} not in (0, 1)")));
    }
    Ok(((1.0 / pr0).ln() / lambda_bar.ln()).ceil() as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_iterations_examples() {
        assert_eq!(estimate_iterations(2.883e-9, 6.99).unwrap(), 11);
        assert_eq!(estimate_iterations(0.5, 2.0).unwrap(), 1);
        assert_eq!(estimate_iterations(1.0 / 28.0, 3.0).unwrap(), 4);
        assert!(matches!(
            estimate_iterations(0.5, 1.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn prime_has_no_factor_in_range() {
        assert!(matches!(
            run_factoring(&FactoringConfig::new(13, 0)),
            Err(Error::NoFactorInRange(13))
        ));
    }

    #[test]
    fn zero_time_is_identity() {
        let mut s = FactoringState::new(35).unwrap();
        let f0 = s.fidelity();
        let rec = run_iteration(&mut s, &FactoringConfig::new(35, 0), 1, 0.0).unwrap();
        assert!((rec.pr_e - 1.0).abs() < 1e-15);
        assert!((rec.fidelity - f0).abs() < 1e-15 * f0);
    }

    #[test]
    fn n35_converges_and_factors() {
        let report = run_factoring(&FactoringConfig::new(35, 7)).unwrap();
        assert!(report.final_fidelity >= 0.99);
        assert_eq!(report.sampled_factors, Some((5, 7)));
        for r in &report.records {
            assert!((r.lambda_l * r.pr_e - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn records_are_seed_deterministic() {
        let a = run_factoring(&FactoringConfig::new(77, 3)).unwrap();
        let b = run_factoring(&FactoringConfig::new(77, 3)).unwrap();
        assert_eq!(a.records, b.records);
    }
}

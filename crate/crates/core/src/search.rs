//! Search with a parity-coded black box.
//!
//! The black box writes `h(n)` into the second register: even for solutions,
//! odd otherwise. With `ω_3` an even multiple of `g̃` and `t_s = π/g̃`, the
//! marker returns to `|α>` on solution branches and lands on `|−α>` on the
//! rest, so conditioning on `|α>` multiplies non-solution amplitudes by
//! `<α|−α> = exp(−2|α|²)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{epsilon_overlap, MarkerAmplitude, PhaseDelta};
use crate::ensemble::{self, Occupation, TrialEnsemble};
use crate::error::{Error, Result};
use crate::numeric::deterministic_sum;
use crate::schedule::AlphaSchedule;

/// Predicate over `0..domain_size` with the canonical encoding
/// `h = 0` for solutions and `h = 1` otherwise.
#[derive(Clone)]
pub struct BlackBox {
    domain_size: u64,
    oracle: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl fmt::Debug for BlackBox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBox")
            .field("domain_size", &self.domain_size)
            .finish_non_exhaustive()
    }
}

impl BlackBox {
    pub fn new<F>(domain_size: u64, oracle: F) -> Result<Self>
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        if domain_size == 0 {
            return Err(Error::InvalidConfig("empty search domain".into()));
        }
        Ok(Self {
            domain_size,
            oracle: Arc::new(oracle),
        })
    }

    /// Black box marking exactly the listed indices.
    pub fn from_solutions(domain_size: u64, solutions: &[u64]) -> Result<Self> {
        if let Some(bad) = solutions.iter().find(|&&s| s >= domain_size) {
            return Err(Error::InvalidConfig(format!(
                "solution {bad} outside domain 0..{domain_size}"
            )));
        }
        let mut set = solutions.to_vec();
        set.sort_unstable();
        set.dedup();
        Self::new(domain_size, move |n| set.binary_search(&n).is_ok())
    }

    pub fn domain_size(&self) -> u64 {
        self.domain_size
    }

    pub fn is_solution(&self, n: u64) -> bool {
        (self.oracle)(n)
    }

    /// `h(n)`: 0 for solutions, 1 otherwise.
    pub fn encode(&self, n: u64) -> u64 {
        u64::from(!self.is_solution(n))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub g_tilde: f64,
    /// `ω_3 / g̃`; must be even.
    pub omega3_multiple: i64,
    pub alpha: AlphaSchedule,
    pub l_max: usize,
    /// Stop once the non-solution mass drops below `1 − stop_mass`.
    pub stop_mass: f64,
    /// Value of the second register before the black box acts.
    pub initial_m: u64,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            g_tilde: 1.0,
            omega3_multiple: 0,
            alpha: AlphaSchedule::default(),
            l_max: 10,
            stop_mass: 1.0 - 1e-6,
            initial_m: 0,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        self.alpha.validate()?;
        if !(self.g_tilde > 0.0) || !self.g_tilde.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "g_tilde = {} must be positive",
                self.g_tilde
            )));
        }
        if self.omega3_multiple % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "omega3 multiple {} must be even",
                self.omega3_multiple
            )));
        }
        if self.l_max == 0 {
            return Err(Error::InvalidConfig("l_max must be at least 1".into()));
        }
        if !(self.stop_mass > 0.0 && self.stop_mass < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stop mass {} not in (0, 1)",
                self.stop_mass
            )));
        }
        Ok(())
    }

    /// `t_s = π/g̃`.
    pub fn evolution_time(&self) -> f64 {
        PI / self.g_tilde
    }
}

/// Equal superposition of `(n, initial_m)` for `n = 0..domain_size`.
pub fn init_uniform_search(domain_size: u64, initial_m: u64) -> Result<TrialEnsemble> {
    if domain_size == 0 {
        return Err(Error::InvalidConfig("empty search domain".into()));
    }
    if domain_size > ensemble::MAX_SPARSE_ENTRIES {
        return Err(Error::DomainTooLarge(format!(
            "{domain_size} search inputs"
        )));
    }
    TrialEnsemble::uniform((0..domain_size).map(|n| Occupation::pair(n, initial_m)))
}

/// `(n, m) → (n, h(n))`; one oracle call per domain element.
pub fn apply_black_box(state: &TrialEnsemble, bb: &BlackBox) -> Result<TrialEnsemble> {
    let codes: Vec<u64> = state
        .tuples()
        .par_iter()
        .map(|t| bb.encode(t.as_slice()[0]))
        .collect();
    let mut i = 0;
    state.map_tuples(|t| {
        let out = Occupation::pair(t.as_slice()[0], codes[i]);
        i += 1;
        Ok(out)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRecord {
    pub l: usize,
    pub t_l: f64,
    #[serde(rename = "alpha")]
    pub alpha_mag: f64,
    #[serde(rename = "pr_E")]
    pub pr_e: f64,
    #[serde(rename = "C_l")]
    pub c_l: f64,
    pub lambda_l: f64,
    pub solution_mass: f64,
    pub non_solution_mass: f64,
}

fn parity_masses(state: &TrialEnsemble) -> (f64, f64) {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for (t, m) in state.iter() {
        if t.as_slice()[1] % 2 == 0 {
            even.push(m);
        } else {
            odd.push(m);
        }
    }
    (deterministic_sum(&even), deterministic_sum(&odd))
}

/// Marker phase after `t_s` on the branch with code `h`, as half turns.
pub fn marker_half_turns(config: &SearchConfig, h: u64) -> i128 {
    config.omega3_multiple as i128 + h as i128
}

/// Evolve for `t_s` and condition on the unrotated marker `|α^(l)>`.
pub fn search_iteration(
    state: &TrialEnsemble,
    config: &SearchConfig,
    l: usize,
) -> Result<(TrialEnsemble, SearchRecord)> {
    let alpha = MarkerAmplitude::real(config.alpha.magnitude(l))?;
    let out = state.condition(|t| -> Result<Complex64> {
        let h = t.as_slice()[1];
        Ok(epsilon_overlap(
            alpha,
            PhaseDelta::half_turns(marker_half_turns(config, h)),
        ))
    })?;
    let (solution_mass, non_solution_mass) = parity_masses(&out.post_state);
    let record = SearchRecord {
        l,
        t_l: config.evolution_time(),
        alpha_mag: alpha.magnitude(),
        pr_e: out.probability,
        c_l: out.normalization,
        lambda_l: 1.0 / out.probability,
        solution_mass,
        non_solution_mass,
    };
    Ok((out.post_state, record))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoundSolution {
    pub n: u64,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SearchReport {
    pub version: String,
    pub config: SearchConfig,
    pub domain_size: u64,
    pub oracle_calls: u64,
    pub records: Vec<SearchRecord>,
    /// Inputs read from the first register whose branch carries an even code.
    pub solutions: Vec<FoundSolution>,
    pub non_solution_mass: f64,
    pub converged: bool,
    /// A single measurement of the first register.
    pub sampled: u64,
}

pub fn run_search(config: &SearchConfig, bb: &BlackBox) -> Result<SearchReport> {
    config.validate()?;
    let mut state = apply_black_box(
        &init_uniform_search(bb.domain_size(), config.initial_m)?,
        bb,
    )?;
    let threshold = 1.0 - config.stop_mass;
    let mut records: Vec<SearchRecord> = Vec::new();
    let mut converged = false;
    for l in 1..=config.l_max {
        let (next, rec) = match search_iteration(&state, config, l) {
            Ok(v) => v,
            Err(Error::ConditionedMassVanished(_)) => {
                return Err(Error::NoSolutionFound {
                    iterations: l,
                    last_pr_e: records.last().map_or(0.0, |r| r.pr_e),
                })
            }
            Err(e) => return Err(e),
        };
        records.push(rec);
        state = next;
        if rec.solution_mass == 0.0 {
            return Err(Error::NoSolutionFound {
                iterations: l,
                last_pr_e: rec.pr_e,
            });
        }
        if rec.non_solution_mass < threshold {
            converged = true;
            break;
        }
    }
    let mut solutions = Vec::new();
    for (t, m) in state.iter() {
        let (n, h) = (t.as_slice()[0], t.as_slice()[1]);
        if h % 2 == 0 {
            if !bb.is_solution(n) {
                return Err(Error::Domain(format!(
                    "register reports {n}, which the black box rejects"
                )));
            }
            solutions.push(FoundSolution { n, mass: m });
        }
    }
    let sampled = ensemble::sample(&state, config.seed).as_slice()[0];
    let non_solution_mass = parity_masses(&state).1;
    Ok(SearchReport {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        domain_size: bb.domain_size(),
        oracle_calls: bb.domain_size(),
        records,
        solutions,
        non_solution_mass,
        converged,
        sampled,
    })
}

/// Smallest `L` with `domain_size·exp(−4|α|²L) < delta`.
pub fn required_iterations(domain_size: u64, alpha_mag: f64, delta: f64) -> Result<u64> {
    if !(alpha_mag > 0.0) || !alpha_mag.is_finite() {
        return Err(Error::Domain(format!(
            "alpha = {alpha_mag} must be positive"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} not in (0, 1)")));
    }
    let x = (domain_size as f64 / delta).ln() / (4.0 * alpha_mag * alpha_mag);
    Ok((x.floor() + 1.0).max(0.0) as u64)
}

//! Amplitude amplification over integer tuples under polynomial constraints.
//!
//! Each constraint `f_k` drives its own marker at `Ω^k = ω_k + g_k·f_k(m)`.
//! After evolving for `t_l`, every marker is conditioned on the coherent
//! states of the values it accepts. The coherent projectors for different
//! accepted values overlap, so their sum is not a valid measurement element;
//! instead each constraint contributes the multiplier
//!
//! * `max` mode: `w_k = max_{v*} |ε(α, Δ(v*, v_k))|²`
//! * `sum-clipped` mode: `w_k = min(1, Σ_{v*} |ε(α, Δ(v*, v_k))|²)`
//!
//! and a tuple's weight is the product of its `w_k`. Accepted values give
//! `Δ = 0`, so tuples satisfying every constraint keep weight exactly one.
//!
//! The register is stored binned by the value vector `(f_1, ..., f_B)`.

mod expr;
mod system;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{overlap_weight, OscillatorParams, PhaseKernel};
use crate::ensemble::{BinnedState, Occupation};
use crate::error::{Error, Result};
use crate::numeric::deterministic_sum;
use crate::rng;
use crate::schedule::{sample_times, AlphaSchedule, TimePolicy};

pub use expr::{ConstraintExpr, ParseError, MAX_EXPONENT};
pub use system::{
    cmp_int_real, evaluate_constraints, feasible_set, Constraint, ConstraintSpec, ConstraintSystem,
    Relation, ValueVector, Variable, MAX_ENUMERATION,
};

/// Largest number of accepted values kept per constraint.
pub const MAX_ACCEPTED_VALUES: usize = 1_000_000;

/// Tuples are reported when their mass is at least this fraction of the
/// largest single-tuple mass.
pub const REPORT_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    #[default]
    Max,
    SumClipped,
}

/// Marker of one constraint: its frequency, linear coupling and amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerChannel {
    pub params: OscillatorParams,
    pub alpha: AlphaSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerBank {
    channels: Vec<MarkerChannel>,
}

impl MarkerBank {
    pub fn new(channels: Vec<MarkerChannel>) -> Result<Self> {
        for c in &channels {
            c.alpha.validate()?;
            if c.params.order() != 1 {
                return Err(Error::InvalidConfig(
                    "solver markers use a linear coupling".into(),
                ));
            }
        }
        Ok(Self { channels })
    }

    /// `count` markers with `ω = 0`, `g = 1` and the same schedule.
    pub fn uniform(count: usize, alpha: AlphaSchedule) -> Result<Self> {
        let params = OscillatorParams::linear(1.0)?;
        Self::new(vec![MarkerChannel { params, alpha }; count])
    }

    pub fn channels(&self) -> &[MarkerChannel] {
        &self.channels
    }
}

/// Per constraint, the achievable values that satisfy its relation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AcceptedSet {
    values: Vec<Vec<i128>>,
}

impl AcceptedSet {
    pub fn values(&self, k: usize) -> &[i128] {
        &self.values[k]
    }

    pub fn contains(&self, k: usize, v: i128) -> bool {
        self.values[k].binary_search(&v).is_ok()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.values.iter().map(Vec::len).collect()
    }
}

/// Register state binned by constraint values, from the uniform superposition
/// over the variable box.
#[derive(Debug, Clone)]
pub struct SolverState {
    bins: BinnedState<ValueVector>,
    counts: Vec<u64>,
    feasible: Vec<bool>,
    accepted: AcceptedSet,
    bounds: Vec<u128>,
}

impl SolverState {
    pub fn new(system: &ConstraintSystem) -> Result<Self> {
        let total = system.check_enumerable()?;
        let mut grouped: BTreeMap<ValueVector, u64> = BTreeMap::new();
        system.for_each_tuple(|t| {
            *grouped.entry(evaluate_constraints(system, t)?).or_insert(0) += 1;
            Ok(())
        })?;
        let b = system.constraint_count();
        let mut values = vec![Vec::new(); b];
        let mut bounds = vec![0u128; b];
        for key in grouped.keys() {
            for (k, c) in system.constraints().iter().enumerate() {
                bounds[k] = bounds[k].max(key[k].unsigned_abs());
                if c.spec.relation.holds(key[k], c.spec.bound) {
                    values[k].push(key[k]);
                }
            }
        }
        for (k, v) in values.iter_mut().enumerate() {
            v.sort_unstable();
            v.dedup();
            if v.is_empty() {
                return Err(Error::InfeasibleSystem(format!(
                    "constraint {} '{}' accepts no achievable value",
                    k + 1,
                    system.constraints()[k].spec.expr
                )));
            }
            if v.len() > MAX_ACCEPTED_VALUES {
                return Err(Error::DomainTooLarge(format!(
                    "constraint {} accepts {} distinct values",
                    k + 1,
                    v.len()
                )));
            }
        }
        let feasible: Vec<bool> = grouped.keys().map(|key| system.satisfied_by(key)).collect();
        if !feasible.iter().any(|&f| f) {
            return Err(Error::InfeasibleSystem(
                "no tuple satisfies every constraint".into(),
            ));
        }
        let (keys, counts): (Vec<_>, Vec<_>) = grouped.into_iter().unzip();
        let mass = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Ok(Self {
            bins: BinnedState::new(keys, mass)?,
            counts,
            feasible,
            accepted: AcceptedSet { values },
            bounds,
        })
    }

    pub fn bins(&self) -> &BinnedState<ValueVector> {
        &self.bins
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn accepted(&self) -> &AcceptedSet {
        &self.accepted
    }

    /// Mass on tuples satisfying every constraint.
    pub fn solution_mass(&self) -> f64 {
        let m: Vec<f64> = self
            .bins
            .masses()
            .iter()
            .zip(&self.feasible)
            .map(|(&m, &f)| if f { m } else { 0.0 })
            .collect();
        deterministic_sum(&m)
    }

    /// Mass of a single tuple; tuples sharing a value vector share it equally.
    pub fn tuple_mass(&self, system: &ConstraintSystem, tuple: &[u64]) -> Result<f64> {
        let key = evaluate_constraints(system, tuple)?;
        Ok(match self.bins.keys().binary_search(&key) {
            Ok(i) => self.bins.masses()[i] / self.counts[i] as f64,
            Err(_) => 0.0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverRecord {
    pub l: usize,
    pub t_l: f64,
    #[serde(rename = "pr_E")]
    pub pr_e: f64,
    #[serde(rename = "C_l")]
    pub c_l: f64,
    pub lambda_l: f64,
    pub solution_mass: f64,
}

/// One joint conditioning of all `B` markers at time `t`.
pub fn solver_iteration(
    state: &mut SolverState,
    bank: &MarkerBank,
    l: usize,
    t: f64,
    mode: WeightMode,
) -> Result<SolverRecord> {
    let b = state.accepted.values.len();
    if bank.channels.len() != b {
        return Err(Error::InvalidConfig(format!(
            "{} markers for {b} constraints",
            bank.channels.len()
        )));
    }
    let mut kernels = Vec::with_capacity(b);
    let mut alphas = Vec::with_capacity(b);
    for (k, ch) in bank.channels.iter().enumerate() {
        let ks = state.accepted.values[k]
            .iter()
            .map(|&v| PhaseKernel::new(&ch.params, v, t, state.bounds[k]))
            .collect::<Result<Vec<_>>>()?;
        kernels.push(ks);
        alphas.push(ch.alpha.magnitude(l));
    }
    let accepted = &state.accepted;
    let out = state.bins.condition(|key| {
        let mut w = 1.0;
        for k in 0..b {
            let v = key[k];
            if accepted.contains(k, v) {
                continue;
            }
            let each = kernels[k]
                .iter()
                .map(|kr| overlap_weight(alphas[k], kr.delta(v).angle));
            w *= match mode {
                WeightMode::Max => each.fold(0.0, f64::max),
                WeightMode::SumClipped => each.sum::<f64>().min(1.0),
            };
        }
        w
    })?;
    Ok(SolverRecord {
        l,
        t_l: t,
        pr_e: out.probability,
        c_l: out.normalization,
        lambda_l: 1.0 / out.probability,
        solution_mass: state.solution_mass(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverPolicy {
    pub times: TimePolicy,
    pub l_max: usize,
    /// Stop once the solution mass reaches this.
    pub stop_mass: f64,
    pub mode: WeightMode,
    pub seed: u64,
}

impl Default for SolverPolicy {
    fn default() -> Self {
        Self {
            times: TimePolicy::SeededRandom,
            l_max: 30,
            stop_mass: 1.0 - 1e-10,
            mode: WeightMode::Max,
            seed: 0,
        }
    }
}

impl SolverPolicy {
    pub fn validate(&self) -> Result<()> {
        self.times.validate()?;
        if self.l_max == 0 {
            return Err(Error::InvalidConfig("l_max must be at least 1".into()));
        }
        if !(self.stop_mass > 0.0 && self.stop_mass <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "stop mass {} not in (0, 1]",
                self.stop_mass
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionEntry {
    pub tuple: Occupation,
    pub mass: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverReport {
    pub version: String,
    pub system: ConstraintSystem,
    pub bank: MarkerBank,
    pub policy: SolverPolicy,
    pub seed: u64,
    pub domain_size: u64,
    pub accepted_sizes: Vec<usize>,
    pub initial_solution_mass: f64,
    pub records: Vec<SolverRecord>,
    /// Tuples holding at least half the largest single-tuple mass.
    pub solutions: Vec<SolutionEntry>,
    pub solution_mass: f64,
    pub converged: bool,
    pub sampled: Occupation,
    pub mean_lambda: f64,
    /// `⌈ln 𝒩^A / ln λ̄⌉` with `𝒩^A` the domain size, when `λ̄ > 1`.
    pub iteration_bound: Option<u64>,
}

/// `⌈ln(domain_size)/ln λ̄⌉`.
pub fn iteration_bound(domain_size: u64, lambda_bar: f64) -> Option<u64> {
    (lambda_bar > 1.0 && lambda_bar.is_finite() && domain_size > 1)
        .then(|| ((domain_size as f64).ln() / lambda_bar.ln()).ceil() as u64)
}

pub fn run_solver(
    system: &ConstraintSystem,
    bank: &MarkerBank,
    policy: &SolverPolicy,
) -> Result<SolverReport> {
    policy.validate()?;
    if bank.channels.len() != system.constraint_count() {
        return Err(Error::InvalidConfig(format!(
            "{} markers for {} constraints",
            bank.channels.len(),
            system.constraint_count()
        )));
    }
    let mut state = SolverState::new(system)?;
    let domain_size = system.check_enumerable()?;
    let seeds = rng::derive_seeds(policy.seed, 2);
    let times = sample_times(
        &policy.times,
        seeds[0],
        bank.channels[0].params.time_scale_coupling(),
    )?;
    let initial_solution_mass = state.solution_mass();
    let mut records = Vec::new();
    let mut converged = initial_solution_mass >= policy.stop_mass;
    if !converged {
        for (l, t) in (1..=policy.l_max).zip(times) {
            let rec = solver_iteration(&mut state, bank, l, t, policy.mode)?;
            records.push(rec);
            if rec.solution_mass >= policy.stop_mass {
                converged = true;
                break;
            }
        }
    }

    let per_tuple: Vec<f64> = state
        .bins
        .masses()
        .iter()
        .zip(&state.counts)
        .map(|(&m, &c)| m / c as f64)
        .collect();
    let peak = per_tuple.iter().copied().fold(0.0, f64::max);
    let mut solutions = Vec::new();
    let mut sample_rng = rng::stream(seeds[1]);
    let pick_bin = state.bins.sample_index(rng::unit(&mut sample_rng));
    let pick_member = ((rng::unit(&mut sample_rng) * state.counts[pick_bin] as f64) as u64)
        .min(state.counts[pick_bin] - 1);
    let mut seen_in_pick = 0u64;
    let mut sampled = None;
    system.for_each_tuple(|t| {
        let key = evaluate_constraints(system, t)?;
        let i = state
            .bins
            .keys()
            .binary_search(&key)
            .expect("every tuple has a bin");
        if per_tuple[i] >= REPORT_FRACTION * peak {
            solutions.push(SolutionEntry {
                tuple: Occupation::new(t),
                mass: per_tuple[i],
            });
        }
        if i == pick_bin {
            if seen_in_pick == pick_member {
                sampled = Some(Occupation::new(t));
            }
            seen_in_pick += 1;
        }
        Ok(())
    })?;
    let mean_lambda = crate::factoring::mean_lambda_of(records.iter().map(|r| r.lambda_l));
    Ok(SolverReport {
        version: crate::VERSION.to_string(),
        system: system.clone(),
        bank: bank.clone(),
        policy: policy.clone(),
        seed: policy.seed,
        domain_size,
        accepted_sizes: state.accepted.sizes(),
        initial_solution_mass,
        records,
        solutions,
        solution_mass: state.solution_mass(),
        converged,
        sampled: sampled.expect("sampled bin is populated"),
        mean_lambda,
        iteration_bound: iteration_bound(domain_size, mean_lambda),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_system() -> ConstraintSystem {
        ConstraintSystem::from_json(
            r#"{"variables":[{"name":"m1","upper":3},{"name":"m2","upper":3}],
                "constraints":[{"expr":"m1 + 2*m2","relation":"<=","bound":4}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn accepted_values() {
        let s = SolverState::new(&linear_system()).unwrap();
        assert_eq!(s.accepted().values(0), &[0, 1, 2, 3, 4]);
        assert!((s.solution_mass() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_time_is_identity() {
        let sys = linear_system();
        let mut s = SolverState::new(&sys).unwrap();
        let before = s.bins().masses().to_vec();
        let bank = MarkerBank::uniform(1, AlphaSchedule::Constant(2.0)).unwrap();
        let r = solver_iteration(&mut s, &bank, 1, 0.0, WeightMode::Max).unwrap();
        assert!((r.pr_e - 1.0).abs() < 1e-15);
        for (a, b) in s.bins().masses().iter().zip(&before) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_inequality_recovers_feasible_set() {
        let sys = linear_system();
        let bank = MarkerBank::uniform(1, AlphaSchedule::Constant(2.0)).unwrap();
        for mode in [WeightMode::Max, WeightMode::SumClipped] {
            let r = run_solver(
                &sys,
                &bank,
                &SolverPolicy {
                    mode,
                    ..Default::default()
                },
            )
            .unwrap();
            assert!(r.converged, "{mode:?}");
            let got: Vec<Occupation> = r.solutions.iter().map(|s| s.tuple.clone()).collect();
            assert_eq!(got, feasible_set(&sys).unwrap());
            for s in &r.solutions {
                assert!((s.mass - 0.125).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn infeasible_systems() {
        let contradiction = ConstraintSystem::from_json(
            r#"{"variables":[{"name":"m1","upper":3}],
                "constraints":[{"expr":"m1","relation":">=","bound":1},{"expr":"m1","relation":"<=","bound":0}]}"#,
        )
        .unwrap();
        assert!(matches!(
            SolverState::new(&contradiction),
            Err(Error::InfeasibleSystem(_))
        ));
        let unreachable = ConstraintSystem::from_json(
            r#"{"variables":[{"name":"m1","upper":3}],
                "constraints":[{"expr":"2*m1","relation":"=","bound":3}]}"#,
        )
        .unwrap();
        assert!(matches!(
            SolverState::new(&unreachable),
            Err(Error::InfeasibleSystem(_))
        ));
    }

    #[test]
    fn factoring_through_solver() {
        let sys = ConstraintSystem::factoring(35).unwrap();
        let bank = MarkerBank::uniform(1, AlphaSchedule::Constant(2.0)).unwrap();
        let r = run_solver(
            &sys,
            &bank,
            &SolverPolicy {
                seed: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.solutions.len(), 1);
        assert_eq!(r.solutions[0].tuple, Occupation::pair(5, 7));
        assert_eq!(r.sampled, Occupation::pair(5, 7));
    }

    #[test]
    fn bound_formula() {
        assert_eq!(iteration_bound(4096, 8.0), Some(4));
        assert_eq!(iteration_bound(4096, 1.0), None);
    }
}

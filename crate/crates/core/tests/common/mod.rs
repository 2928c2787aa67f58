//! Checks shared by the integration tests and the acceptance suite.
#![allow(dead_code)]

use hoamp_core::dynamics::OscillatorParams;
use hoamp_core::ensemble::FactoringRanges;
use hoamp_core::factoring::{run_factoring_fixed, run_iteration, FactoringConfig, FactoringState};
use hoamp_core::schedule::{AlphaSchedule, TimePolicy};
use hoamp_core::search::{
    apply_black_box, init_uniform_search, search_iteration, BlackBox, SearchConfig,
};
use hoamp_core::solver::{
    evaluate_constraints, feasible_set, run_solver, solver_iteration, ConstraintSpec,
    ConstraintSystem, MarkerBank, Relation, SolverPolicy, SolverState, Variable, WeightMode,
};
use hoamp_fock_oracle::{brute_force_step, min_cutoff, MarkerSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

type Shift = Box<dyn Fn(&[u64]) -> f64>;

/// Largest deviations from the oracle over a family of instances.
#[derive(Debug, Default, Clone, Copy)]
pub struct Deviation {
    pub instances: usize,
    pub pr: f64,
    pub mass: f64,
}

impl Deviation {
    fn add(&mut self, pr: f64, mass: f64) {
        self.instances += 1;
        self.pr = self.pr.max(pr);
        self.mass = self.mass.max(mass);
    }

    pub fn max(&self) -> f64 {
        self.pr.max(self.mass)
    }
}

fn uniform_register(tuples: &[Vec<u64>]) -> Vec<(Vec<u64>, Complex64)> {
    let a = Complex64::new((1.0 / tuples.len() as f64).sqrt(), 0.0);
    tuples.iter().map(|t| (t.clone(), a)).collect()
}

fn mass_of(post: &[(Vec<u64>, Complex64)], tuple: &[u64]) -> f64 {
    post.iter()
        .find(|(t, _)| t == tuple)
        .map_or(0.0, |(_, a)| a.norm_sqr())
}

fn grid(system: &ConstraintSystem) -> Vec<Vec<u64>> {
    let mut tuples = vec![vec![]];
    for v in system.variables() {
        tuples = tuples
            .into_iter()
            .flat_map(|p: Vec<u64>| {
                (v.lower..=v.upper).map(move |x| {
                    let mut q = p.clone();
                    q.push(x);
                    q
                })
            })
            .collect();
    }
    tuples
}

/// Composites up to 50 with a factor pair inside the trial ranges.
pub fn small_composites() -> Vec<u64> {
    (4..=50u64)
        .filter(|&n| FactoringRanges::new(n).is_ok_and(|r| !r.factor_pairs().is_empty()))
        .collect()
}

/// One factoring step against the oracle, with K in {1, 2} and nonzero
/// oscillator frequencies.
pub fn factoring_vs_oracle(seed: u64, count: usize) -> Deviation {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let pool = small_composites();
    let mut dev = Deviation::default();
    for case in 0..count {
        let n = pool[rng.random_range(0..pool.len())];
        let alpha = rng.random_range(0.3..1.5);
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let k = 1 + case % 2;
        let couplings: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.2)).collect();
        let omega_marker = rng.random_range(-3.0..3.0);
        let params =
            OscillatorParams::new(vec![0.7, -0.4, omega_marker], couplings.clone()).unwrap();
        let config = FactoringConfig {
            params,
            alpha: AlphaSchedule::Constant(alpha),
            ..FactoringConfig::new(n, 0)
        };
        let mut state = FactoringState::new(n).unwrap();
        let ranges = *state.ranges();
        let rec = run_iteration(&mut state, &config, 1, t).unwrap();

        let mut tuples = Vec::new();
        for a in ranges.n_lo..=ranges.n_hi {
            for b in ranges.m_lo..=ranges.m_hi {
                tuples.push(vec![a, b]);
            }
        }
        let poly = |p: f64| {
            couplings
                .iter()
                .enumerate()
                .map(|(i, g)| g * p.powi(i as i32 + 1))
                .sum::<f64>()
        };
        let shift = |r: &[u64]| poly((r[0] * r[1]) as f64);
        let markers = [MarkerSpec {
            alpha: Complex64::new(alpha, 0.0),
            omega: omega_marker,
            shift: &shift,
            target_shift: poly(n as f64),
        }];
        let (post, p) = brute_force_step(
            &uniform_register(&tuples),
            &[0.7, -0.4],
            &markers,
            t,
            min_cutoff(alpha),
        )
        .unwrap();
        let keys = state.bins().keys();
        let mass = tuples
            .iter()
            .map(|tup| {
                let prod = tup[0] * tup[1];
                let i = keys.binary_search(&prod).unwrap();
                let fast = state.bins().masses()[i] / ranges.members_of(prod).len() as f64;
                (fast - mass_of(&post, tup)).abs()
            })
            .fold(0.0, f64::max);
        dev.add((rec.pr_e - p).abs(), mass);
    }
    dev
}

/// One search step against the oracle, domains up to 16.
pub fn search_vs_oracle(seed: u64, count: usize) -> Deviation {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut dev = Deviation::default();
    for _ in 0..count {
        let domain = rng.random_range(2..=16u64);
        let k = rng.random_range(1..=domain.min(4));
        let marked: Vec<u64> = (0..k).map(|_| rng.random_range(0..domain)).collect();
        let bb = BlackBox::from_solutions(domain, &marked).unwrap();
        let alpha = rng.random_range(0.3..1.5);
        let config = SearchConfig {
            g_tilde: rng.random_range(0.5..2.0),
            omega3_multiple: 2 * rng.random_range(-2..=2i64),
            alpha: AlphaSchedule::Constant(alpha),
            ..SearchConfig::default()
        };
        let encoded = apply_black_box(&init_uniform_search(domain, 0).unwrap(), &bb).unwrap();
        let (post_fast, rec) = search_iteration(&encoded, &config, 1).unwrap();

        let tuples: Vec<Vec<u64>> = encoded
            .tuples()
            .iter()
            .map(|t| t.as_slice().to_vec())
            .collect();
        let g = config.g_tilde;
        let omega3 = config.omega3_multiple as f64 * g;
        let shift = |r: &[u64]| g * r[1] as f64;
        let markers = [MarkerSpec {
            alpha: Complex64::new(alpha, 0.0),
            omega: omega3,
            shift: &shift,
            target_shift: -omega3,
        }];
        let (post, p) = brute_force_step(
            &uniform_register(&tuples),
            &[],
            &markers,
            config.evolution_time(),
            min_cutoff(alpha),
        )
        .unwrap();
        let mass = post_fast
            .iter()
            .map(|(t, m)| (m - mass_of(&post, t.as_slice())).abs())
            .fold(0.0, f64::max);
        dev.add((rec.pr_e - p).abs(), mass);
    }
    dev
}

/// Equality systems over at most three variables in `[0, 3]` with a
/// guaranteed solution.
fn random_equality_system(rng: &mut Xoshiro256PlusPlus) -> ConstraintSystem {
    let names = ["x", "y", "z"];
    let arity = rng.random_range(1..=3usize);
    let variables: Vec<Variable> = (0..arity)
        .map(|i| Variable {
            name: names[i].into(),
            lower: 0,
            upper: rng.random_range(1..=3),
        })
        .collect();
    let witness: Vec<i64> = variables
        .iter()
        .map(|v| rng.random_range(0..=v.upper) as i64)
        .collect();
    let b = rng.random_range(1..=2usize);
    let constraints = (0..b)
        .map(|_| {
            let coef: Vec<i64> = (0..arity).map(|_| rng.random_range(-2..=3)).collect();
            let mut terms: Vec<String> = (0..arity)
                .map(|i| format!("{}*{}", coef[i], names[i]))
                .collect();
            let mut value: i64 = (0..arity).map(|i| coef[i] * witness[i]).sum();
            if arity >= 2 && rng.random_bool(0.5) {
                terms.push("x*y".into());
                value += witness[0] * witness[1];
            }
            ConstraintSpec {
                expr: terms.join(" + "),
                relation: Relation::Eq,
                bound: value as f64,
            }
        })
        .collect();
    ConstraintSystem::new(variables, constraints).unwrap()
}

/// One joint solver step against the oracle with one marker per constraint.
pub fn solver_vs_oracle(seed: u64, count: usize) -> Deviation {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut dev = Deviation::default();
    for _ in 0..count {
        let system = random_equality_system(&mut rng);
        let alpha = rng.random_range(0.3..1.5);
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        let bank =
            MarkerBank::uniform(system.constraint_count(), AlphaSchedule::Constant(alpha)).unwrap();
        let mut state = SolverState::new(&system).unwrap();
        let rec = solver_iteration(&mut state, &bank, 1, t, WeightMode::Max).unwrap();

        let tuples = grid(&system);
        let shifts: Vec<Shift> = (0..system.constraint_count())
            .map(|k| {
                let s = system.clone();
                Box::new(move |r: &[u64]| evaluate_constraints(&s, r).unwrap()[k] as f64) as Shift
            })
            .collect();
        let markers: Vec<MarkerSpec> = system
            .constraints()
            .iter()
            .zip(&shifts)
            .map(|(c, f)| MarkerSpec {
                alpha: Complex64::new(alpha, 0.0),
                omega: 0.0,
                shift: f.as_ref(),
                target_shift: c.spec.bound,
            })
            .collect();
        let (post, p) = brute_force_step(
            &uniform_register(&tuples),
            &[],
            &markers,
            t,
            min_cutoff(alpha),
        )
        .unwrap();
        let mass = tuples
            .iter()
            .map(|tup| (state.tuple_mass(&system, tup).unwrap() - mass_of(&post, tup)).abs())
            .fold(0.0, f64::max);
        dev.add((rec.pr_e - p).abs(), mass);
    }
    dev
}

/// Runs where the `m1·m2 = N` solver and the factoring module disagree in
/// any bit of any record, out of those compared.
pub fn embedding_mismatches() -> (usize, usize) {
    let mut compared = 0;
    let mut bad = 0;
    for (n, seed) in [
        (35u64, 7u64),
        (77, 1),
        (143, 3),
        (221, 9),
        (391, 0),
        (1147, 4),
    ] {
        let config = FactoringConfig {
            l_max: 6,
            ..FactoringConfig::new(n, seed)
        };
        let fac = run_factoring_fixed(&config).unwrap();
        let bank = MarkerBank::uniform(1, AlphaSchedule::Constant(2.0)).unwrap();
        let policy = SolverPolicy {
            l_max: 6,
            stop_mass: 1.0,
            seed,
            ..SolverPolicy::default()
        };
        let sol = run_solver(&ConstraintSystem::factoring(n).unwrap(), &bank, &policy).unwrap();
        let full = sol.records.len() == fac.records.len()
            || sol.records.last().unwrap().solution_mass >= 1.0;
        let same = fac.records.iter().zip(&sol.records).all(|(a, b)| {
            a.t_l.to_bits() == b.t_l.to_bits()
                && a.pr_e.to_bits() == b.pr_e.to_bits()
                && a.c_l.to_bits() == b.c_l.to_bits()
                && a.lambda_l.to_bits() == b.lambda_l.to_bits()
                && a.fidelity.to_bits() == b.solution_mass.to_bits()
        });
        compared += 1;
        if !(full && same) {
            bad += 1;
        }
    }
    (compared, bad)
}

/// Explicit-time variant of [`embedding_mismatches`] for one `N`.
pub fn embedding_with_times(n: u64, times: &[f64]) -> bool {
    let config = FactoringConfig {
        times: TimePolicy::Explicit(times.to_vec()),
        l_max: times.len(),
        ..FactoringConfig::new(n, 0)
    };
    let fac = run_factoring_fixed(&config).unwrap();
    let policy = SolverPolicy {
        times: TimePolicy::Explicit(times.to_vec()),
        l_max: times.len(),
        stop_mass: 1.0,
        ..SolverPolicy::default()
    };
    let bank = MarkerBank::uniform(1, AlphaSchedule::Constant(2.0)).unwrap();
    let sol = run_solver(&ConstraintSystem::factoring(n).unwrap(), &bank, &policy).unwrap();
    let a: Vec<u64> = fac.records.iter().map(|r| r.pr_e.to_bits()).collect();
    let b: Vec<u64> = sol.records.iter().map(|r| r.pr_e.to_bits()).collect();
    a == b
}

fn random_inequality_system(rng: &mut Xoshiro256PlusPlus) -> ConstraintSystem {
    let names = ["a", "b", "c"];
    let arity = rng.random_range(1..=3usize);
    let variables: Vec<Variable> = (0..arity)
        .map(|i| Variable {
            name: names[i].into(),
            lower: rng.random_range(0..=1),
            upper: rng.random_range(2..=5),
        })
        .collect();
    let count = rng.random_range(1..=2usize);
    let relations = [Relation::Le, Relation::Ge, Relation::Eq];
    let constraints = (0..count)
        .map(|_| {
            let terms: Vec<String> = (0..arity)
                .map(|i| format!("{}*{}", rng.random_range(1..=3), names[i]))
                .collect();
            let relation = relations[rng.random_range(0..3)];
            let bound =
                rng.random_range(2..=8) as f64 + if rng.random_bool(0.3) { 0.5 } else { 0.0 };
            ConstraintSpec {
                expr: terms.join(" + "),
                relation,
                bound,
            }
        })
        .collect();
    ConstraintSystem::new(variables, constraints).unwrap()
}

/// Random mixed-relation systems: `(feasible instances, infeasible
/// instances, instances where the reported set differs from brute force)`.
pub fn inequality_vs_feasible_set(seed: u64, count: usize) -> (usize, usize, usize) {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let (mut feasible, mut infeasible, mut bad) = (0, 0, 0);
    for i in 0..count {
        let system = random_inequality_system(&mut rng);
        let truth = feasible_set(&system).unwrap();
        let bank =
            MarkerBank::uniform(system.constraint_count(), AlphaSchedule::Constant(2.0)).unwrap();
        let policy = SolverPolicy {
            seed: i as u64,
            l_max: 1000,
            ..SolverPolicy::default()
        };
        match run_solver(&system, &bank, &policy) {
            Ok(report) => {
                feasible += 1;
                let found: Vec<_> = report.solutions.iter().map(|s| s.tuple.clone()).collect();
                if !report.converged || found != truth || !truth.contains(&report.sampled) {
                    bad += 1;
                }
            }
            Err(hoamp_core::Error::InfeasibleSystem(_)) if truth.is_empty() => infeasible += 1,
            Err(_) => bad += 1,
        }
    }
    (feasible, infeasible, bad)
}

//! Command-line front end: `factor`, `search`, `solve`, `replay-table1` and
//! `stats`.
//!
//! Exit codes: 0 ok, 1 tolerance failure, 2 runtime error, 3 usage error,
//! 4 no factor in range / infeasible system / no solution found.

pub mod output;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::OscillatorParams;
use crate::error::{Error, Result};
use crate::factoring::{self, FactoringConfig, IterationRecord};
use crate::rng;
use crate::schedule::{AlphaSchedule, TimePolicy};
use crate::search::{self, BlackBox, SearchConfig};
use crate::solver::{self, ConstraintSystem, MarkerBank, SolverPolicy, WeightMode};

pub use output::StatsRow;

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "HOAMP_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hoamp",
    version,
    about = "Amplitude amplification with coupled oscillators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Factor N by iterated conditional measurement.
    Factor(FactorArgs),
    /// Find the marked indices of a black box.
    Search(SearchArgs),
    /// Solve a system of integer constraints.
    Solve(SolveArgs),
    /// Replay the published N = 1,030,189 run and compare row by row.
    #[command(name = "replay-table1")]
    ReplayTable1(ReplayArgs),
    /// Fidelity and Pr(E) statistics over seeded random-time trajectories.
    Stats(StatsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Max,
    SumClipped,
}

impl From<ModeArg> for WeightMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Max => WeightMode::Max,
            ModeArg::SumClipped => WeightMode::SumClipped,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolutionsFormat {
    /// A bitmask when the file is one 0/1 token of length `--domain`, else a list.
    Auto,
    List,
    Bitmask,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Write only this format; both by default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl OutputArgs {
    fn wants(&self, f: Format) -> bool {
        self.format.is_none_or(|x| x == f)
    }
}

#[derive(Debug, Clone, Args)]
pub struct AlphaArgs {
    /// Constant marker magnitude |α|.
    #[arg(long, default_value_t = 2.0, conflicts_with = "alpha_schedule")]
    pub alpha: f64,
    /// Per-iteration magnitudes; the last one repeats.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub alpha_schedule: Option<Vec<f64>>,
}

impl AlphaArgs {
    fn schedule(&self) -> AlphaSchedule {
        match &self.alpha_schedule {
            Some(v) => AlphaSchedule::Steps(v.clone()),
            None => AlphaSchedule::Constant(self.alpha),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CouplingArgs {
    /// Order K of the coupling polynomial.
    #[arg(long)]
    pub k_order: Option<usize>,
    /// Couplings g_1..g_K. Defaults to g_K = 1 and all others zero.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub couplings: Option<Vec<f64>>,
}

impl CouplingArgs {
    fn params(&self) -> Result<OscillatorParams> {
        let couplings = match (&self.couplings, self.k_order) {
            (Some(g), Some(k)) if g.len() != k => {
                return Err(Error::InvalidConfig(format!(
                    "--couplings has {} entries, --k-order is {k}",
                    g.len()
                )))
            }
            (Some(g), _) => g.clone(),
            (None, Some(k)) => {
                let mut g = vec![0.0; k.max(1)];
                *g.last_mut().unwrap() = 1.0;
                g
            }
            (None, None) => vec![1.0],
        };
        OscillatorParams::new(vec![0.0; 3], couplings)
    }
}

#[derive(Debug, Clone, Args)]
pub struct TimeArgs {
    /// Explicit evolution times; random in [0, 2π/g) otherwise.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub times: Option<Vec<f64>>,
}

impl TimeArgs {
    fn policy(&self) -> TimePolicy {
        match &self.times {
            Some(t) => TimePolicy::Explicit(t.clone()),
            None => TimePolicy::SeededRandom,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FactorArgs {
    #[arg(long)]
    pub n: u64,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = 30)]
    pub l_max: usize,
    #[arg(long, default_value_t = 0.99)]
    pub stop_fidelity: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub domain: u64,
    /// Solution indices, as a list or a 0/1 bitmask.
    #[arg(long)]
    pub solutions_file: PathBuf,
    #[arg(long, value_enum, default_value_t = SolutionsFormat::Auto)]
    pub solutions_format: SolutionsFormat,
    #[arg(long, default_value_t = 1.0)]
    pub g_tilde: f64,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[arg(long, default_value_t = 10)]
    pub l_max: usize,
    #[arg(long, default_value_t = 1.0 - 1e-6)]
    pub stop_mass: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    /// JSON file with `variables` and `constraints`.
    #[arg(long)]
    pub system: PathBuf,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[command(flatten)]
    pub time: TimeArgs,
    #[arg(long, default_value_t = 30)]
    pub l_max: usize,
    #[arg(long, default_value_t = 1.0 - 1e-10)]
    pub stop_mass: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Max)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Move each published time by a seeded offset within its rounding
    /// (±0.0005) and report the result. Informational only.
    #[arg(long)]
    pub dither_seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct StatsArgs {
    #[arg(long, default_value_t = 35)]
    pub n: u64,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 10)]
    pub l_max: usize,
    #[command(flatten)]
    pub alpha: AlphaArgs,
    #[command(flatten)]
    pub coupling: CouplingArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Exit code for a module error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::EmptyRange(_)
        | Error::NoFactorInRange(_)
        | Error::InfeasibleSystem(_)
        | Error::NoSolutionFound { .. }
        | Error::ConditionedMassVanished(_) => EXIT_INFEASIBLE,
        Error::InvalidConfig(_)
        | Error::InvalidParams(_)
        | Error::InvalidAmplitude(_)
        | Error::Parse(_) => EXIT_USAGE,
        _ => EXIT_RUNTIME,
    }
}

/// Parse `args` (program name first), run the command and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(&cli.command, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| {
            Error::InvalidConfig(format!("{THREADS_ENV}={v} is not a thread count"))
        })?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::InvalidConfig(e.to_string()))
}

fn dispatch(cmd: &Command, out: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Factor(a) => cmd_factor(a, out),
        Command::Search(a) => cmd_search(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::ReplayTable1(a) => cmd_replay_table1(a, out),
        Command::Stats(a) => cmd_stats(a, out),
    }
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

pub fn cmd_factor(a: &FactorArgs, out: &mut dyn Write) -> Result<i32> {
    let config = FactoringConfig {
        n: a.n,
        params: a.coupling.params()?,
        alpha: a.alpha.schedule(),
        times: a.time.policy(),
        l_max: a.l_max,
        stop_fidelity: a.stop_fidelity,
        seed: a.out.seed,
    };
    let report = factoring::run_factoring(&config)?;
    prepare(&a.out.out_dir)?;
    if a.out.wants(Format::Json) {
        output::write_json(&a.out.out_dir.join("factor_report.json"), &report)?;
    }
    if a.out.wants(Format::Csv) {
        output::factoring_csv(
            create(&a.out.out_dir, "factor_records.csv")?,
            &report.records,
        )?;
    }
    writeln!(
        out,
        "N = {}: {} iterations, F = {:e}, seed {}",
        a.n,
        report.records.len(),
        report.final_fidelity,
        report.seed
    )?;
    match report.sampled_factors {
        Some((r, s)) => writeln!(out, "{r} × {s}")?,
        None => writeln!(
            out,
            "sampled {} is not a factorization",
            report.sampled_pair
        )?,
    }
    Ok(EXIT_OK)
}

/// Solution indices from `text`: whitespace or comma separated integers
/// (`#` starts a comment), or a single 0/1 string with one digit per index.
pub fn parse_solutions(text: &str, domain: u64, format: SolutionsFormat) -> Result<Vec<u64>> {
    let tokens: Vec<&str> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|t| !t.is_empty())
        .collect();
    let is_mask = |t: &[&str]| {
        t.len() == 1 && t[0].len() as u64 == domain && t[0].bytes().all(|b| b == b'0' || b == b'1')
    };
    let mask = match format {
        SolutionsFormat::Bitmask => {
            if !is_mask(&tokens) {
                return Err(Error::InvalidConfig(format!(
                    "bitmask must be one 0/1 string of length {domain}"
                )));
            }
            true
        }
        SolutionsFormat::List => false,
        SolutionsFormat::Auto => is_mask(&tokens),
    };
    if mask {
        return Ok(tokens[0]
            .bytes()
            .enumerate()
            .filter(|(_, b)| *b == b'1')
            .map(|(i, _)| i as u64)
            .collect());
    }
    tokens
        .iter()
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| Error::InvalidConfig(format!("'{t}' is not a solution index")))
        })
        .collect()
}

pub fn cmd_search(a: &SearchArgs, out: &mut dyn Write) -> Result<i32> {
    let text = fs::read_to_string(&a.solutions_file)?;
    let marked = parse_solutions(&text, a.domain, a.solutions_format)?;
    let bb = BlackBox::from_solutions(a.domain, &marked)?;
    let config = SearchConfig {
        g_tilde: a.g_tilde,
        alpha: a.alpha.schedule(),
        l_max: a.l_max,
        stop_mass: a.stop_mass,
        seed: a.out.seed,
        ..SearchConfig::default()
    };
    let report = search::run_search(&config, &bb)?;
    prepare(&a.out.out_dir)?;
    if a.out.wants(Format::Json) {
        output::write_json(&a.out.out_dir.join("search_report.json"), &report)?;
    }
    if a.out.wants(Format::Csv) {
        output::search_csv(
            create(&a.out.out_dir, "search_records.csv")?,
            &report.records,
        )?;
    }
    writeln!(
        out,
        "{} iterations, {} oracle calls, non-solution mass {:e}",
        report.records.len(),
        report.oracle_calls,
        report.non_solution_mass
    )?;
    let found: Vec<String> = report.solutions.iter().map(|s| s.n.to_string()).collect();
    writeln!(out, "solutions: {}", found.join(" "))?;
    Ok(EXIT_OK)
}

pub fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32> {
    let system = ConstraintSystem::from_json(&fs::read_to_string(&a.system)?)?;
    let bank = MarkerBank::uniform(system.constraint_count(), a.alpha.schedule())?;
    let policy = SolverPolicy {
        times: a.time.policy(),
        l_max: a.l_max,
        stop_mass: a.stop_mass,
        mode: a.mode.into(),
        seed: a.out.seed,
    };
    let report = solver::run_solver(&system, &bank, &policy)?;
    prepare(&a.out.out_dir)?;
    if a.out.wants(Format::Json) {
        output::write_json(&a.out.out_dir.join("solve_report.json"), &report)?;
    }
    if a.out.wants(Format::Csv) {
        output::solver_csv(
            create(&a.out.out_dir, "solve_records.csv")?,
            &report.records,
        )?;
    }
    writeln!(
        out,
        "{} iterations, solution mass {:e}",
        report.records.len(),
        report.solution_mass
    )?;
    for s in &report.solutions {
        writeln!(out, "{}", s.tuple)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct ReplayOutput<'a> {
    version: &'a str,
    dither_seed: Option<u64>,
    passed: bool,
    initial_fidelity: f64,
    initial_fidelity_rel_diff: f64,
    rows: &'a [factoring::ReplayRow],
    report: &'a factoring::RunReport,
}

pub fn cmd_replay_table1(a: &ReplayArgs, out: &mut dyn Write) -> Result<i32> {
    let replay = match a.dither_seed {
        Some(s) => factoring::replay_with_times(&factoring::dithered_times(s))?,
        None => factoring::replay_table1()?,
    };
    prepare(&a.out.out_dir)?;
    let stem = if a.dither_seed.is_some() {
        "table1_dither_replay"
    } else {
        "table1_replay"
    };
    if a.out.wants(Format::Csv) {
        output::replay_csv(
            create(&a.out.out_dir, &format!("{stem}.csv"))?,
            &replay.rows,
        )?;
    }
    if a.out.wants(Format::Json) {
        let doc = ReplayOutput {
            version: crate::VERSION,
            dither_seed: a.dither_seed,
            passed: replay.passed(),
            initial_fidelity: replay.report.initial_fidelity,
            initial_fidelity_rel_diff: replay.initial_fidelity_rel_diff,
            rows: &replay.rows,
            report: &replay.report,
        };
        output::write_json(&a.out.out_dir.join(format!("{stem}.json")), &doc)?;
    }
    writeln!(
        out,
        "F_0 = {:e} (rel diff {:.2e})",
        replay.report.initial_fidelity, replay.initial_fidelity_rel_diff
    )?;
    writeln!(
        out,
        " l     t_l   paper_pr  computed_pr   paper_F    computed_F   status"
    )?;
    for r in &replay.rows {
        let status = match (r.passed(), r.f_ok) {
            (true, None) => "ok (F unchecked)",
            (true, _) => "ok",
            (false, _) => "FAIL",
        };
        writeln!(
            out,
            "{:2} {:7.3} {:9.3} {:12.6} {:10.3e} {:12.4e}   {status}",
            r.l, r.t_l, r.paper_pr, r.computed_pr, r.paper_f, r.computed_f
        )?;
    }
    if a.dither_seed.is_some() {
        writeln!(out, "dithered times: informational, no tolerance check")?;
        return Ok(EXIT_OK);
    }
    Ok(if replay.passed() {
        EXIT_OK
    } else {
        EXIT_TOLERANCE
    })
}

/// Whether `f` never decreases, allowing rounding at the last few ulps.
pub fn is_monotone(f: &[f64]) -> bool {
    f.windows(2)
        .all(|w| w[1] >= w[0] * (1.0 - 8.0 * f64::EPSILON))
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsMeta {
    pub version: String,
    pub seed: u64,
    pub samples: usize,
    pub config: FactoringConfig,
    /// Trajectories whose fidelity never decreases.
    pub monotone_count: usize,
    pub final_mean_fidelity: f64,
    pub final_std_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatsOutput {
    pub meta: StatsMeta,
    pub summary: Vec<StatsRow>,
}

/// Run `samples` fixed-length trajectories, trajectory `i` seeded with the
/// `i`-th derived seed. Results are in sample order whatever the pool size.
pub fn run_stats(
    config: &FactoringConfig,
    samples: usize,
) -> Result<(StatsOutput, Vec<Vec<IterationRecord>>)> {
    if samples < 2 {
        return Err(Error::InvalidConfig(format!(
            "stats needs at least 2 samples, got {samples}"
        )));
    }
    config.validate()?;
    let seeds = rng::derive_seeds(config.seed, samples);
    let trajectories = seeds
        .par_iter()
        .map(|&s| {
            let c = FactoringConfig {
                seed: s,
                ..config.clone()
            };
            factoring::run_factoring_fixed(&c).map(|r| r.records)
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = output::summarize(&trajectories);
    let monotone_count = trajectories
        .iter()
        .filter(|t| is_monotone(&t.iter().map(|r| r.fidelity).collect::<Vec<_>>()))
        .count();
    let last = summary.last();
    let meta = StatsMeta {
        version: crate::VERSION.to_string(),
        seed: config.seed,
        samples,
        config: config.clone(),
        monotone_count,
        final_mean_fidelity: last.map_or(f64::NAN, |r| r.mean_fidelity),
        final_std_fidelity: last.map_or(f64::NAN, |r| r.std_fidelity),
    };
    Ok((StatsOutput { meta, summary }, trajectories))
}

pub fn cmd_stats(a: &StatsArgs, out: &mut dyn Write) -> Result<i32> {
    let config = FactoringConfig {
        n: a.n,
        params: a.coupling.params()?,
        alpha: a.alpha.schedule(),
        times: TimePolicy::SeededRandom,
        l_max: a.l_max,
        stop_fidelity: 1.0,
        seed: a.out.seed,
    };
    let (stats, trajectories) = match run_stats(&config, a.samples) {
        Err(e @ Error::InvalidConfig(_)) => return Err(e),
        Err(e) => return Err(Error::Domain(format!("trajectory failed: {e}"))),
        Ok(v) => v,
    };
    prepare(&a.out.out_dir)?;
    if a.out.wants(Format::Csv) {
        output::stats_summary_csv(create(&a.out.out_dir, "stats_summary.csv")?, &stats.summary)?;
        output::stats_long_csv(create(&a.out.out_dir, "stats_long.csv")?, &trajectories)?;
    }
    if a.out.wants(Format::Json) {
        output::write_json(&a.out.out_dir.join("stats_report.json"), &stats)?;
    }
    writeln!(
        out,
        "N = {}, {} samples, {} iterations: mean F = {:.6} (std {:.2e}), monotone {}/{}",
        a.n,
        a.samples,
        a.l_max,
        stats.meta.final_mean_fidelity,
        stats.meta.final_std_fidelity,
        stats.meta.monotone_count,
        a.samples
    )?;
    Ok(EXIT_OK)
}

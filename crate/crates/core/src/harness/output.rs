//! Report writers. Floats are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::factoring::{IterationRecord, ReplayRow};
use crate::numeric::mean_std;
use crate::search::SearchRecord;
use crate::solver::SolverRecord;

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn rows_to<W: Write>(
    out: W,
    header: &[&str],
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn factoring_csv<W: Write>(out: W, records: &[IterationRecord]) -> Result<()> {
    rows_to(
        out,
        &["l", "t_l", "alpha", "pr_E", "C_l", "lambda_l", "fidelity"],
        records.iter().map(|r| {
            vec![
                r.l.to_string(),
                r.t_l.to_string(),
                r.alpha_mag.to_string(),
                r.pr_e.to_string(),
                r.c_l.to_string(),
                r.lambda_l.to_string(),
                r.fidelity.to_string(),
            ]
        }),
    )
}

pub fn search_csv<W: Write>(out: W, records: &[SearchRecord]) -> Result<()> {
    rows_to(
        out,
        &[
            "l",
            "t_l",
            "alpha",
            "pr_E",
            "C_l",
            "lambda_l",
            "solution_mass",
            "non_solution_mass",
        ],
        records.iter().map(|r| {
            vec![
                r.l.to_string(),
                r.t_l.to_string(),
                r.alpha_mag.to_string(),
                r.pr_e.to_string(),
                r.c_l.to_string(),
                r.lambda_l.to_string(),
                r.solution_mass.to_string(),
                r.non_solution_mass.to_string(),
            ]
        }),
    )
}

pub fn solver_csv<W: Write>(out: W, records: &[SolverRecord]) -> Result<()> {
    rows_to(
        out,
        &["l", "t_l", "pr_E", "C_l", "lambda_l", "solution_mass"],
        records.iter().map(|r| {
            vec![
                r.l.to_string(),
                r.t_l.to_string(),
                r.pr_e.to_string(),
                r.c_l.to_string(),
                r.lambda_l.to_string(),
                r.solution_mass.to_string(),
            ]
        }),
    )
}

pub fn replay_csv<W: Write>(out: W, rows: &[ReplayRow]) -> Result<()> {
    rows_to(
        out,
        &[
            "l",
            "t_l",
            "paper_F",
            "computed_F",
            "paper_pr",
            "computed_pr",
            "abs_diff",
            "rel_diff",
        ],
        rows.iter().map(|r| {
            vec![
                r.l.to_string(),
                r.t_l.to_string(),
                r.paper_f.to_string(),
                r.computed_f.to_string(),
                r.paper_pr.to_string(),
                r.computed_pr.to_string(),
                r.abs_diff.to_string(),
                r.rel_diff.to_string(),
            ]
        }),
    )
}

/// Per-iteration statistics over trajectories of equal length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsRow {
    pub l: usize,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub mean_pr_e: f64,
    pub std_pr_e: f64,
}

pub fn summarize(trajectories: &[Vec<IterationRecord>]) -> Vec<StatsRow> {
    let len = trajectories.iter().map(Vec::len).min().unwrap_or(0);
    (0..len)
        .map(|i| {
            let f: Vec<f64> = trajectories.iter().map(|t| t[i].fidelity).collect();
            let p: Vec<f64> = trajectories.iter().map(|t| t[i].pr_e).collect();
            let (mf, sf) = mean_std(&f);
            let (mp, sp) = mean_std(&p);
            StatsRow {
                l: i + 1,
                mean_fidelity: mf,
                std_fidelity: sf,
                mean_pr_e: mp,
                std_pr_e: sp,
            }
        })
        .collect()
}

pub fn stats_summary_csv<W: Write>(out: W, rows: &[StatsRow]) -> Result<()> {
    rows_to(
        out,
        &["l", "mean_F", "std_F", "mean_pr_E", "std_pr_E"],
        rows.iter().map(|r| {
            vec![
                r.l.to_string(),
                r.mean_fidelity.to_string(),
                r.std_fidelity.to_string(),
                r.mean_pr_e.to_string(),
                r.std_pr_e.to_string(),
            ]
        }),
    )
}

pub fn stats_long_csv<W: Write>(out: W, trajectories: &[Vec<IterationRecord>]) -> Result<()> {
    rows_to(
        out,
        &["sample", "l", "t_l", "pr_E", "fidelity"],
        trajectories.iter().enumerate().flat_map(|(s, t)| {
            t.iter().map(move |r| {
                vec![
                    s.to_string(),
                    r.l.to_string(),
                    r.t_l.to_string(),
                    r.pr_e.to_string(),
                    r.fidelity.to_string(),
                ]
            })
        }),
    )
}

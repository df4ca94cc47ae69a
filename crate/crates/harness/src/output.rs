//! On-disk layout of a run directory:
//!
//! ```text
//! run.json              full report, verdict included
//! reports.csv           one row per arm
//! episodes.csv          one row per episode
//! traces/<arm>-<i>.jsonl
//! brittleness.json      sweeps only
//! brittleness.csv       sweeps only
//! ```

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use exswarm_core::competence::BrittlenessMap;
use exswarm_core::operator::CalibrationTag;
use exswarm_core::world::{EpisodeTrace, Outcome};
use serde::{Deserialize, Serialize};

use crate::experiment::{EpisodeRecord, RunOutput, RunReport};
use crate::HarnessError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub arm: String,
    pub index: usize,
    pub seed: u64,
    /// JSON object of the situation assignment.
    pub situation: String,
    pub outcome: String,
    pub abort_reason: Option<String>,
    pub metric_value: f64,
    pub success: bool,
    pub steps: u64,
    pub distance: f64,
    pub messages: u64,
    pub bucket: Option<usize>,
    pub deployed: Option<bool>,
    pub calibration: Option<String>,
}

impl EpisodeRow {
    pub fn of(r: &EpisodeRecord) -> Self {
        let (outcome, abort_reason) = match &r.summary.outcome {
            Outcome::GoalReached => ("goal_reached", None),
            Outcome::BudgetExhausted => ("budget_exhausted", None),
            Outcome::Aborted { reason } => ("aborted", Some(reason.clone())),
        };
        Self {
            arm: r.arm.clone(),
            index: r.index,
            seed: r.summary.seed,
            situation: serde_json::to_string(&r.situation.assignment).expect("situations serialize"),
            outcome: outcome.into(),
            abort_reason,
            metric_value: r.summary.metric_value,
            success: r.summary.success,
            steps: r.summary.resources_spent.steps,
            distance: r.summary.resources_spent.distance,
            messages: r.summary.resources_spent.messages,
            bucket: r.supervision.as_ref().map(|s| s.bucket),
            deployed: r.supervision.as_ref().map(|s| s.deployed),
            calibration: r.supervision.as_ref().map(|s| calibration_name(s.calibration).into()),
        }
    }
}

fn calibration_name(t: CalibrationTag) -> &'static str {
    match t {
        CalibrationTag::Calibrated => "calibrated",
        CalibrationTag::Misuse => "misuse",
        CalibrationTag::Disuse => "disuse",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub arm: String,
    pub n: u64,
    pub successes: u64,
    pub aborted: u64,
    pub p_hat: f64,
    pub p_lo: f64,
    pub p_hi: f64,
    pub r: f64,
    pub c_hat: f64,
    pub c_lo: f64,
    pub c_hi: f64,
    pub deployed: Option<u64>,
    pub misuse: Option<u64>,
    pub disuse: Option<u64>,
}

pub fn report_rows(report: &RunReport) -> Vec<ReportRow> {
    report
        .arms
        .iter()
        .map(|a| {
            let r = &a.report;
            let sup = a.supervision.as_ref();
            ReportRow {
                arm: a.name.clone(),
                n: r.n,
                successes: r.successes,
                aborted: r.aborted,
                p_hat: r.p_hat,
                p_lo: r.ci.lo,
                p_hi: r.ci.hi,
                r: r.r,
                c_hat: r.c_hat,
                c_lo: r.c_ci.lo,
                c_hi: r.c_ci.hi,
                deployed: sup.map(|s| s.deployed),
                misuse: sup.map(|s| s.misuse),
                disuse: sup.map(|s| s.disuse),
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRow {
    pub cell: usize,
    pub axis_value: String,
    pub n: u64,
    pub p_hat: f64,
    pub c_hat: f64,
    pub c_lo: f64,
    pub c_hi: f64,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<Result<Vec<T>, _>>()?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), HarnessError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn trace_path(dir: &Path, arm: &str, index: usize) -> std::path::PathBuf {
    dir.join("traces").join(format!("{arm}-{index}.jsonl"))
}

pub fn write_run(dir: &Path, out: &RunOutput) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("run.json"), &out.report)?;
    write_csv(&dir.join("reports.csv"), &report_rows(&out.report))?;
    let rows: Vec<_> = out.episodes.iter().map(EpisodeRow::of).collect();
    write_csv(&dir.join("episodes.csv"), &rows)?;
    if !out.traces.is_empty() {
        fs::create_dir_all(dir.join("traces"))?;
        for (arm, i, t) in &out.traces {
            let f = BufWriter::new(fs::File::create(trace_path(dir, arm, *i))?);
            t.write_jsonl(f).map_err(|e| HarnessError::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

pub fn read_run_report(dir: &Path) -> Result<RunReport, HarnessError> {
    let f = BufReader::new(fs::File::open(dir.join("run.json"))?);
    Ok(serde_json::from_reader(f)?)
}

pub fn read_trace(path: &Path) -> Result<EpisodeTrace, HarnessError> {
    let f = BufReader::new(fs::File::open(path)?);
    EpisodeTrace::read_jsonl(f).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}

pub fn write_sweep(dir: &Path, map: &BrittlenessMap) -> Result<(), HarnessError> {
    fs::create_dir_all(dir)?;
    write_json(&dir.join("brittleness.json"), map)?;
    let rows: Vec<_> = map
        .cells
        .iter()
        .map(|c| CellRow {
            cell: c.index,
            axis_value: serde_json::to_string(&c.axis_value).expect("values serialize"),
            n: c.report.n,
            p_hat: c.report.p_hat,
            c_hat: c.report.c_hat,
            c_lo: c.report.c_ci.lo,
            c_hi: c.report.c_ci.hi,
        })
        .collect();
    write_csv(&dir.join("brittleness.csv"), &rows)
}

pub fn read_sweep(dir: &Path) -> Result<BrittlenessMap, HarnessError> {
    let f = BufReader::new(fs::File::open(dir.join("brittleness.json"))?);
    Ok(serde_json::from_reader(f)?)
}

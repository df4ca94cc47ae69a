//! Runs every arm of an experiment on a shared set of situations.
//!
//! All arms see the same situations, drawn from `named_seed(seed,
//! "situations")`. Episode `i` of an arm with seed label `L` runs with
//! `derive_seed(named_seed(seed, "arm/L"), [i])`, so arms never share seeds
//! unless they share a label. Episodes run on a bounded worker pool and are
//! reduced in episode-index order, which makes results independent of the
//! worker count.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use exswarm_core::competence::{
    compare_allocations, sample_situations, CompetenceReport, EpisodeSummary, JointnessVerdict, Situation,
};
use exswarm_core::operator::{supervisory_step, CalibrationTag, TrustModel};
use exswarm_core::rng::{derive_seed, named_seed};
use exswarm_core::scenario::run_roster_episode;
use exswarm_core::world::{EpisodeTrace, Outcome};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ArmConfig, ExperimentConfig};
use crate::HarnessError;

pub fn arm_seed(root: u64, label: &str, index: usize) -> u64 {
    derive_seed(named_seed(root, &format!("arm/{label}")), &[index as u64])
}

pub fn situations_seed(root: u64) -> u64 {
    named_seed(root, "situations")
}

/// The supervisor's call for one episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupervisionRecord {
    pub bucket: usize,
    pub deployed: bool,
    pub calibration: CalibrationTag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub arm: String,
    pub index: usize,
    pub situation: Situation,
    pub summary: EpisodeSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supervision: Option<SupervisionRecord>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SupervisionStats {
    /// Competence the supervisor's decisions are judged against, per bucket.
    pub truth: Vec<f64>,
    /// What the supervisor believed, per bucket.
    pub believed: Vec<f64>,
    pub deployed: u64,
    pub calibrated: u64,
    pub misuse: u64,
    pub disuse: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    pub name: String,
    pub report: CompetenceReport,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub supervision: Option<SupervisionStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub name: String,
    pub scenario: String,
    pub seed: u64,
    pub episodes: usize,
    pub arms: Vec<ArmReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<JointnessVerdict>,
}

impl RunReport {
    pub fn arm(&self, name: &str) -> Option<&ArmReport> {
        self.arms.iter().find(|a| a.name == name)
    }
}

/// Everything a run produced, including the records and traces that go to
/// disk but not into the report.
pub struct RunOutput {
    pub report: RunReport,
    pub episodes: Vec<EpisodeRecord>,
    /// First `keep_traces` traces of each arm, as `(arm, index, trace)`.
    pub traces: Vec<(String, usize, EpisodeTrace)>,
}

/// Worker pool capped at `workers` threads.
pub fn pool(workers: usize) -> Result<rayon::ThreadPool, HarnessError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| HarnessError::Runtime(format!("worker pool: {e}")))
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// A ready-to-run arm: either plain, or supervised with resolved beliefs and truth.
struct PreparedArm<'a> {
    name: &'a str,
    config: &'a ArmConfig,
    supervision: Option<(TrustModel, Vec<f64>)>,
}

struct Job {
    summary: EpisodeSummary,
    supervision: Option<SupervisionRecord>,
    trace: Option<EpisodeTrace>,
}

fn aborted(seed: u64, reason: String) -> EpisodeSummary {
    EpisodeSummary {
        seed,
        outcome: Outcome::Aborted { reason },
        metric_value: 0.0,
        success: false,
        resources_spent: Default::default(),
    }
}

fn panic_reason(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "episode panicked".into())
}

/// Runs one episode. Failures become aborted summaries instead of errors.
fn run_job(cfg: &ExperimentConfig, arm: &PreparedArm<'_>, situation: &Situation, seed: u64, keep: bool) -> Job {
    let spec = arm.config.spec();
    let mut supervision = None;
    let deploy = match &arm.supervision {
        None => true,
        Some((trust, truth)) => {
            let decided = situation
                .number(&trust.axis)
                .and_then(|v| trust.bucket_of(v))
                .ok_or_else(|| format!("situation has no bucket on `{}`", trust.axis))
                .and_then(|b| {
                    supervisory_step(trust, b, truth[b])
                        .map(|a| (b, a))
                        .map_err(|e| e.to_string())
                });
            match decided {
                Ok((bucket, action)) => {
                    let deployed = action.decision.deploys();
                    supervision = Some(SupervisionRecord {
                        bucket,
                        deployed,
                        calibration: action.calibration,
                    });
                    deployed
                }
                Err(reason) => {
                    return Job {
                        summary: aborted(seed, reason),
                        supervision: None,
                        trace: None,
                    }
                }
            }
        }
    };
    let roster = spec.roster(deploy);
    let result = catch_unwind(AssertUnwindSafe(|| {
        run_roster_episode(&cfg.scenario, situation, &cfg.swarm, &roster, &cfg.goal, &cfg.limits, seed)
    }));
    match result {
        Ok(Ok(trace)) => Job {
            summary: EpisodeSummary::from_trace(&trace, &cfg.goal),
            supervision,
            trace: keep.then_some(trace),
        },
        Ok(Err(e)) => Job {
            summary: aborted(seed, e.to_string()),
            supervision,
            trace: None,
        },
        Err(p) => Job {
            summary: aborted(seed, panic_reason(p)),
            supervision,
            trace: None,
        },
    }
}

/// Competence of `records` split by `trust` buckets. Empty buckets get 0.
pub fn bucket_competence(
    records: &[EpisodeRecord],
    trust: &TrustModel,
    cfg: &ExperimentConfig,
) -> Result<Vec<f64>, HarnessError> {
    let mut by_bucket: Vec<Vec<EpisodeSummary>> = vec![Vec::new(); trust.buckets.len()];
    for r in records {
        if let Some(b) = r.situation.number(&trust.axis).and_then(|v| trust.bucket_of(v)) {
            by_bucket[b].push(r.summary.clone());
        }
    }
    by_bucket
        .iter()
        .map(|s| {
            if s.is_empty() {
                return Ok(0.0);
            }
            Ok(CompetenceReport::from_summaries(s, &cfg.limits, &cfg.space.id, &cfg.goal.id, "bucket")?.c_hat)
        })
        .collect()
}

/// Runs all arms. Arms that feed a supervisor's truth run first.
pub fn run_experiment(cfg: &ExperimentConfig, workers: usize) -> Result<RunOutput, HarnessError> {
    let situations = sample_situations(&cfg.space, cfg.episodes, situations_seed(cfg.seed))?;
    let pool = pool(workers)?;

    let (plain, supervised): (Vec<_>, Vec<_>) = cfg.arms.iter().partition(|(_, a)| a.trust().is_none());
    let mut records: BTreeMap<&str, Vec<EpisodeRecord>> = BTreeMap::new();
    let mut reports: BTreeMap<&str, ArmReport> = BTreeMap::new();
    let mut traces = Vec::new();

    for (name, arm) in plain.into_iter().chain(supervised) {
        let supervision = match arm.trust() {
            None => None,
            Some(trust) => {
                let truth = match (&arm.truth, &arm.truth_from) {
                    (Some(t), _) => t.clone(),
                    (None, Some(src)) => bucket_competence(
                        records
                            .get(src.as_str())
                            .ok_or_else(|| HarnessError::Runtime(format!("truth arm `{src}` has not run")))?,
                        trust,
                        cfg,
                    )?,
                    (None, None) => return Err(HarnessError::Runtime(format!("arm `{name}` has no truth"))),
                };
                let mut trust = trust.clone();
                if arm.calibrated {
                    for (b, t) in trust.buckets.iter_mut().zip(&truth) {
                        b.believed = *t;
                    }
                }
                Some((trust, truth))
            }
        };
        let prepared = PreparedArm {
            name,
            config: arm,
            supervision,
        };
        let label = arm.seed_label(name);
        let jobs: Vec<Job> = pool.install(|| {
            situations
                .par_iter()
                .enumerate()
                .map(|(i, s)| run_job(cfg, &prepared, s, arm_seed(cfg.seed, label, i), i < cfg.keep_traces))
                .collect()
        });

        let mut arm_records = Vec::with_capacity(jobs.len());
        let mut stats = prepared.supervision.as_ref().map(|(trust, truth)| SupervisionStats {
            truth: truth.clone(),
            believed: trust.buckets.iter().map(|b| b.believed).collect(),
            ..Default::default()
        });
        for (i, job) in jobs.into_iter().enumerate() {
            if let (Some(st), Some(sup)) = (stats.as_mut(), &job.supervision) {
                st.deployed += u64::from(sup.deployed);
                match sup.calibration {
                    CalibrationTag::Calibrated => st.calibrated += 1,
                    CalibrationTag::Misuse => st.misuse += 1,
                    CalibrationTag::Disuse => st.disuse += 1,
                }
            }
            if let Some(t) = job.trace {
                traces.push((name.clone(), i, t));
            }
            arm_records.push(EpisodeRecord {
                arm: name.clone(),
                index: i,
                situation: situations[i].clone(),
                summary: job.summary,
                supervision: job.supervision,
            });
        }
        let summaries: Vec<_> = arm_records.iter().map(|r| r.summary.clone()).collect();
        let report = CompetenceReport::from_summaries(&summaries, &cfg.limits, &cfg.space.id, &cfg.goal.id, name)?;
        reports.insert(
            prepared.name,
            ArmReport {
                name: name.clone(),
                report,
                supervision: stats,
            },
        );
        records.insert(prepared.name, arm_records);
    }

    let verdict = match &cfg.verdict {
        None => None,
        Some(v) => {
            let get = |n: &str| {
                reports
                    .get(n)
                    .map(|a| &a.report)
                    .ok_or_else(|| HarnessError::Runtime(format!("verdict arm `{n}` missing")))
            };
            Some(compare_allocations(get(&v.nat)?, get(&v.arti)?, get(&v.joint)?)?)
        }
    };
    traces.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
    Ok(RunOutput {
        report: RunReport {
            name: cfg.name.clone(),
            scenario: cfg.scenario.clone(),
            seed: cfg.seed,
            episodes: cfg.episodes,
            arms: reports.into_values().collect(),
            verdict,
        },
        episodes: records.into_values().flatten().collect(),
        traces,
    })
}

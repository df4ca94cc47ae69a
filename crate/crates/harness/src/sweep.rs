//! Brittleness sweep of one arm along one situation axis.

use exswarm_core::competence::{brittleness_sweep, BrittlenessMap, EpisodeSummary, Situation, SweepSpec};
use exswarm_core::rng::named_seed;
use exswarm_core::scenario::run_roster_episode;
use exswarm_core::world::Outcome;
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::experiment::pool;
use crate::HarnessError;

/// Runs the `[sweep]` section of `cfg`. `per_cell_n` overrides the config.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize, per_cell_n: Option<usize>) -> Result<BrittlenessMap, HarnessError> {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| HarnessError::Runtime("config has no [sweep] section".into()))?;
    let arm = &cfg.arms[&sweep.arm];
    if arm.trust().is_some() {
        return Err(HarnessError::Runtime(format!("arm `{}` is supervised; sweeps need a plain arm", sweep.arm)));
    }
    let roster = arm.spec().roster(true);
    let spec = SweepSpec {
        axis: sweep.axis.clone(),
        cells: sweep.cells,
        per_cell_n: per_cell_n.unwrap_or(sweep.per_cell_n),
        seed: named_seed(cfg.seed, &format!("sweep/{}", sweep.arm)),
        cliff_threshold: sweep.cliff_threshold,
    };
    let pool = pool(workers)?;
    let run_batch = |jobs: &[(Situation, u64)]| -> Vec<EpisodeSummary> {
        pool.install(|| {
            jobs.par_iter()
                .map(|(s, seed)| {
                    match run_roster_episode(&cfg.scenario, s, &cfg.swarm, &roster, &cfg.goal, &cfg.limits, *seed) {
                        Ok(t) => EpisodeSummary::from_trace(&t, &cfg.goal),
                        Err(e) => EpisodeSummary {
                            seed: *seed,
                            outcome: Outcome::Aborted { reason: e.to_string() },
                            metric_value: 0.0,
                            success: false,
                            resources_spent: Default::default(),
                        },
                    }
                })
                .collect()
        })
    };
    Ok(brittleness_sweep(&cfg.space, &spec, &cfg.goal, &cfg.limits, &sweep.arm, run_batch)?)
}

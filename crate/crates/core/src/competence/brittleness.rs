//! Competence sweeps along one situation axis, flagging sudden breakdowns.

use serde::{Deserialize, Serialize};

use super::space::{sample_with_pinned, VariableRange, VariableValue};
use super::{CompetenceReport, EpisodeSummary, EvalError, GoalSpec, ResourceLedger, Situation, SituationSpace};
use crate::rng::derive_seed;

pub const MIN_PER_CELL: usize = 30;
pub const DEFAULT_CLIFF_THRESHOLD: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: String,
    /// Grid cells for a continuous axis; discrete axes use one cell per value.
    pub cells: usize,
    pub per_cell_n: usize,
    pub seed: u64,
    pub cliff_threshold: f64,
}

impl SweepSpec {
    pub fn new(axis: &str, cells: usize, per_cell_n: usize, seed: u64) -> Self {
        Self {
            axis: axis.into(),
            cells,
            per_cell_n,
            seed,
            cliff_threshold: DEFAULT_CLIFF_THRESHOLD,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessCell {
    pub index: usize,
    pub axis_value: VariableValue,
    pub report: CompetenceReport,
}

/// Sharp competence drop between two adjacent cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cliff {
    pub from_cell: usize,
    pub to_cell: usize,
    pub drop: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrittlenessMap {
    pub axis: String,
    pub cliff_threshold: f64,
    pub cells: Vec<BrittlenessCell>,
    pub cliffs: Vec<Cliff>,
}

/// Values visited along `axis`: cell centers for a continuous range, every
/// value for a discrete one.
pub fn axis_values(space: &SituationSpace, axis: &str, cells: usize) -> Result<Vec<VariableValue>, EvalError> {
    let var = space.variable(axis).ok_or_else(|| EvalError::UnknownAxis(axis.into()))?;
    Ok(match &var.range {
        VariableRange::Discrete { values } => values.clone(),
        VariableRange::Continuous { min, max } => {
            if cells == 0 {
                return Err(EvalError::ZeroCount);
            }
            let width = (max - min) / cells as f64;
            (0..cells)
                .map(|k| VariableValue::Number(min + (k as f64 + 0.5) * width))
                .collect()
        }
    })
}

/// Flags adjacent-cell drops larger than `threshold` whose competence
/// intervals do not overlap.
pub fn find_cliffs(cells: &[BrittlenessCell], threshold: f64) -> Vec<Cliff> {
    cells
        .windows(2)
        .filter_map(|w| {
            let (a, b) = (&w[0].report, &w[1].report);
            let drop = a.c_hat - b.c_hat;
            (drop > threshold && b.c_ci.hi < a.c_ci.lo).then(|| Cliff {
                from_cell: w[0].index,
                to_cell: w[1].index,
                drop,
            })
        })
        .collect()
}

/// Runs `per_cell_n` episodes per axis cell and reports competence per cell.
///
/// `run_batch` receives the cell's `(situation, episode seed)` pairs and must
/// return one summary per pair, in order.
pub fn brittleness_sweep<F>(
    space: &SituationSpace,
    spec: &SweepSpec,
    goal: &GoalSpec,
    limits: &ResourceLedger,
    policy_id: &str,
    mut run_batch: F,
) -> Result<BrittlenessMap, EvalError>
where
    F: FnMut(&[(Situation, u64)]) -> Vec<EpisodeSummary>,
{
    if spec.per_cell_n < MIN_PER_CELL {
        return Err(EvalError::TooFewEpisodes {
            requested: spec.per_cell_n,
            minimum: MIN_PER_CELL,
        });
    }
    let values = axis_values(space, &spec.axis, spec.cells)?;
    let mut cells = Vec::with_capacity(values.len());
    for (index, value) in values.into_iter().enumerate() {
        let cell_seed = derive_seed(spec.seed, &[index as u64]);
        let situations = sample_with_pinned(space, &spec.axis, &value, spec.per_cell_n, cell_seed)?;
        let jobs: Vec<(Situation, u64)> = situations
            .into_iter()
            .enumerate()
            .map(|(i, s)| (s, derive_seed(cell_seed, &[0x6570, i as u64])))
            .collect();
        let summaries = run_batch(&jobs);
        let report = CompetenceReport::from_summaries(&summaries, limits, &space.id, &goal.id, policy_id)?;
        cells.push(BrittlenessCell {
            index,
            axis_value: value,
            report,
        });
    }
    let cliffs = find_cliffs(&cells, spec.cliff_threshold);
    Ok(BrittlenessMap {
        axis: spec.axis.clone(),
        cliff_threshold: spec.cliff_threshold,
        cells,
        cliffs,
    })
}

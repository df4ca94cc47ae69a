//! Situation spaces and sampling.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::rng::{stream, StreamPurpose};

/// A value taken by one situation variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariableValue {
    Number(f64),
    Label(String),
}

impl VariableValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            VariableValue::Number(x) => Some(*x),
            VariableValue::Label(_) => None,
        }
    }
}

impl fmt::Display for VariableValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VariableValue::Number(x) => write!(f, "{x}"),
            VariableValue::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VariableRange {
    Continuous { min: f64, max: f64 },
    Discrete { values: Vec<VariableValue> },
}

impl VariableRange {
    pub fn contains(&self, v: &VariableValue) -> bool {
        match (self, v) {
            (VariableRange::Continuous { min, max }, VariableValue::Number(x)) => x >= min && x <= max,
            (VariableRange::Continuous { .. }, VariableValue::Label(_)) => false,
            (VariableRange::Discrete { values }, v) => values.contains(v),
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            VariableRange::Continuous { min, max } => !(min <= max) || !min.is_finite() || !max.is_finite(),
            VariableRange::Discrete { values } => values.is_empty(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    #[serde(flatten)]
    pub range: VariableRange,
}

impl Variable {
    pub fn continuous(name: &str, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            range: VariableRange::Continuous { min, max },
        }
    }

    pub fn discrete(name: &str, values: Vec<VariableValue>) -> Self {
        Self {
            name: name.into(),
            range: VariableRange::Discrete { values },
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    #[default]
    Uniform,
    GridCross,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceSize {
    Finite(u128),
    Continuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SituationSpace {
    pub id: String,
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub sampler: Sampler,
}

impl SituationSpace {
    pub fn new(id: &str, variables: Vec<Variable>, sampler: Sampler) -> Result<Self, EvalError> {
        let space = Self {
            id: id.into(),
            variables,
            sampler,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.variables.is_empty() {
            return Err(EvalError::NoVariables);
        }
        let mut seen = BTreeSet::new();
        for v in &self.variables {
            if !seen.insert(v.name.as_str()) {
                return Err(EvalError::DuplicateVariable(v.name.clone()));
            }
            if v.range.is_empty() {
                return Err(EvalError::EmptyRange(v.name.clone()));
            }
        }
        Ok(())
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// |S|: number of distinct situations, or `Continuous`.
    pub fn size(&self) -> SpaceSize {
        let mut total: u128 = 1;
        for v in &self.variables {
            match &v.range {
                VariableRange::Continuous { min, max } if min == max => {}
                VariableRange::Continuous { .. } => return SpaceSize::Continuous,
                VariableRange::Discrete { values } => {
                    total = total.saturating_mul(values.len() as u128);
                }
            }
        }
        SpaceSize::Finite(total)
    }

    pub fn contains(&self, s: &Situation) -> bool {
        s.assignment.len() == self.variables.len()
            && self
                .variables
                .iter()
                .all(|v| s.assignment.get(&v.name).is_some_and(|x| v.range.contains(x)))
    }
}

/// One point of a situation space.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Situation {
    pub assignment: BTreeMap<String, VariableValue>,
}

impl Situation {
    pub fn number(&self, name: &str) -> Option<f64> {
        self.assignment.get(name).and_then(VariableValue::as_f64)
    }

    pub fn with(mut self, name: &str, value: VariableValue) -> Self {
        self.assignment.insert(name.into(), value);
        self
    }
}

fn draw(range: &VariableRange, rng: &mut impl Rng) -> VariableValue {
    match range {
        VariableRange::Continuous { min, max } => {
            if min == max {
                VariableValue::Number(*min)
            } else {
                VariableValue::Number(rng.random_range(*min..=*max))
            }
        }
        VariableRange::Discrete { values } => values[rng.random_range(0..values.len())].clone(),
    }
}

/// Draws `n` situations. Deterministic in `(space, n, seed)`.
///
/// `GridCross` enumerates a lattice in lexicographic order (first variable
/// slowest). Discrete variables contribute all their values; continuous ones
/// share the largest level count `L` with `|discrete| * L^c <= n`, placed at
/// cell centers. A purely discrete lattice is repeated `n / |lattice|` times.
pub fn sample_situations(space: &SituationSpace, n: usize, seed: u64) -> Result<Vec<Situation>, EvalError> {
    space.validate()?;
    if n == 0 {
        return Err(EvalError::ZeroCount);
    }
    match space.sampler {
        Sampler::Uniform => {
            let mut rng = stream(seed, StreamPurpose::Situations);
            Ok((0..n)
                .map(|_| Situation {
                    assignment: space
                        .variables
                        .iter()
                        .map(|v| (v.name.clone(), draw(&v.range, &mut rng)))
                        .collect(),
                })
                .collect())
        }
        Sampler::GridCross => grid_cross(space, n),
    }
}

fn grid_cross(space: &SituationSpace, n: usize) -> Result<Vec<Situation>, EvalError> {
    let discrete: usize = space
        .variables
        .iter()
        .map(|v| match &v.range {
            VariableRange::Discrete { values } => values.len(),
            VariableRange::Continuous { .. } => 1,
        })
        .product();
    let n_cont = space
        .variables
        .iter()
        .filter(|v| matches!(v.range, VariableRange::Continuous { .. }))
        .count() as u32;
    if discrete > n {
        return Err(EvalError::GridTooCoarse { requested: n, minimum: discrete });
    }
    let (levels, repeats) = if n_cont == 0 {
        (1, n / discrete)
    } else {
        let budget = n / discrete;
        let mut l = 1usize;
        while (l + 1).checked_pow(n_cont).is_some_and(|p| p <= budget) {
            l += 1;
        }
        (l, 1)
    };

    let axes: Vec<Vec<VariableValue>> = space
        .variables
        .iter()
        .map(|v| match &v.range {
            VariableRange::Discrete { values } => values.clone(),
            VariableRange::Continuous { min, max } => (0..levels)
                .map(|k| VariableValue::Number(min + (k as f64 + 0.5) * (max - min) / levels as f64))
                .collect(),
        })
        .collect();

    let lattice_size: usize = axes.iter().map(Vec::len).product();
    let mut out = Vec::with_capacity(lattice_size * repeats);
    for _ in 0..repeats {
        for flat in 0..lattice_size {
            let mut rem = flat;
            let mut picks = vec![0usize; axes.len()];
            for (i, axis) in axes.iter().enumerate().rev() {
                picks[i] = rem % axis.len();
                rem /= axis.len();
            }
            out.push(Situation {
                assignment: space
                    .variables
                    .iter()
                    .zip(&axes)
                    .zip(&picks)
                    .map(|((v, axis), &k)| (v.name.clone(), axis[k].clone()))
                    .collect(),
            });
        }
    }
    Ok(out)
}

/// Draws `n` situations with `axis` pinned to `value` and every other
/// variable drawn uniformly.
pub fn sample_with_pinned(
    space: &SituationSpace,
    axis: &str,
    value: &VariableValue,
    n: usize,
    seed: u64,
) -> Result<Vec<Situation>, EvalError> {
    space.validate()?;
    if space.variable(axis).is_none() {
        return Err(EvalError::UnknownAxis(axis.into()));
    }
    let mut rng = stream(seed, StreamPurpose::Situations);
    Ok((0..n)
        .map(|_| Situation {
            assignment: space
                .variables
                .iter()
                .map(|v| {
                    let x = if v.name == axis { value.clone() } else { draw(&v.range, &mut rng) };
                    (v.name.clone(), x)
                })
                .collect(),
        })
        .collect())
}

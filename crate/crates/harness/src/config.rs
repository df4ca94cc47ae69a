//! Experiment configuration in TOML and its validation.
//!
//! [`validate_config`] reports every problem it can find, each tagged with
//! the dotted field path and the line it sits on.

use std::collections::BTreeMap;
use std::fmt;

use exswarm_core::competence::{GoalSpec, ResourceLedger, SituationSpace, VariableRange};
use exswarm_core::operator::{OperatorPolicy, TrustModel};
use exswarm_core::scenario::{is_registered, ArmSpec, StubArm, SwarmArm, SCENARIOS};
use exswarm_core::swarm::SwarmConfig;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::de::{DeTable, DeValue};
use toml::Spanned;

pub const SCHEMA_VERSION: u32 = 1;

/// One allocation arm as written in the config.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorPolicy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swarm: Option<SwarmArm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stub: Option<StubArm>,
    /// Arms with the same label draw the same episode seeds. Defaults to
    /// the arm name, so arms are independent unless paired on purpose.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_label: Option<String>,
    /// Supervised arms only: measure the AI's per-bucket competence from
    /// this arm's episodes in the same run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth_from: Option<String>,
    /// Supervised arms only: per-bucket competence given directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truth: Option<Vec<f64>>,
    /// Supervised arms only: replace the believed competences by the truth.
    #[serde(default)]
    pub calibrated: bool,
}

impl ArmConfig {
    pub fn spec(&self) -> ArmSpec {
        ArmSpec {
            operator: self.operator.clone(),
            swarm: self.swarm.clone(),
            stub: self.stub.clone(),
        }
    }

    pub fn trust(&self) -> Option<&TrustModel> {
        match &self.operator {
            Some(OperatorPolicy::SupervisorScript { trust, .. }) => Some(trust),
            _ => None,
        }
    }

    pub fn seed_label<'a>(&'a self, name: &'a str) -> &'a str {
        self.seed_label.as_deref().unwrap_or(name)
    }
}

/// Arms compared for the jointness verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictArms {
    pub nat: String,
    pub arti: String,
    pub joint: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub arm: String,
    pub axis: String,
    pub cells: usize,
    pub per_cell_n: usize,
    #[serde(default = "default_cliff")]
    pub cliff_threshold: f64,
}

fn default_cliff() -> f64 {
    exswarm_core::competence::DEFAULT_CLIFF_THRESHOLD
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub scenario: String,
    pub seed: u64,
    /// Episodes per arm.
    pub episodes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Full traces written for the first this-many episodes of each arm.
    #[serde(default)]
    pub keep_traces: usize,
    pub space: SituationSpace,
    pub goal: GoalSpec,
    pub limits: ResourceLedger,
    #[serde(default)]
    pub swarm: SwarmConfig,
    pub arms: BTreeMap<String, ArmConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictArms>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    /// 1-based line, when the field can be located in the source.
    pub line: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

const SECTIONS: [&str; 14] = [
    "schema_version",
    "name",
    "scenario",
    "seed",
    "episodes",
    "workers",
    "keep_traces",
    "space",
    "goal",
    "limits",
    "swarm",
    "arms",
    "verdict",
    "sweep",
];
const REQUIRED: [&str; 9] = [
    "schema_version",
    "name",
    "scenario",
    "seed",
    "episodes",
    "space",
    "goal",
    "limits",
    "arms",
];

struct Locator<'a> {
    text: &'a str,
    root: Option<Spanned<DeTable<'a>>>,
}

impl<'a> Locator<'a> {
    fn line_at(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())].matches('\n').count() + 1
    }

    /// Line of the deepest existing prefix of `path`.
    fn line(&self, path: &str) -> Option<usize> {
        let root = self.root.as_ref()?;
        let mut table = root.get_ref();
        let mut best = None;
        for key in path.split('.') {
            let Some((_, v)) = table.iter().find(|(k, _)| k.get_ref() == key) else {
                break;
            };
            best = Some(v.span().start);
            match v.get_ref() {
                DeValue::Table(t) => table = t,
                _ => break,
            }
        }
        best.map(|o| self.line_at(o))
    }
}

struct Collector<'a> {
    loc: Locator<'a>,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.out.push(Violation {
            line: self.loc.line(field),
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn section<T: DeserializeOwned>(&mut self, table: &toml::Table, key: &str) -> Option<T> {
        let value = table.get(key)?.clone();
        match value.try_into::<T>() {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(key, e.message().trim().to_string());
                None
            }
        }
    }
}

/// Parses and checks a config, returning all violations found.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, Vec<Violation>> {
    let root = match DeTable::parse(text) {
        Ok(t) => t,
        Err(e) => {
            let line = e.span().map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            return Err(vec![Violation {
                line,
                field: "<document>".into(),
                message: e.message().trim().to_string(),
            }]);
        }
    };
    let table: toml::Table = match toml::from_str(text) {
        Ok(t) => t,
        Err(e) => {
            return Err(vec![Violation {
                line: None,
                field: "<document>".into(),
                message: e.message().trim().to_string(),
            }])
        }
    };
    let mut c = Collector {
        loc: Locator { text, root: Some(root) },
        out: Vec::new(),
    };

    for key in table.keys() {
        if !SECTIONS.contains(&key.as_str()) {
            c.push(key, "unknown field");
        }
    }
    for key in REQUIRED {
        if !table.contains_key(key) {
            c.out.push(Violation {
                line: None,
                field: key.into(),
                message: "missing required field".into(),
            });
        }
    }

    let schema_version: Option<u32> = c.section(&table, "schema_version");
    if let Some(v) = schema_version {
        if v != SCHEMA_VERSION {
            c.push("schema_version", format!("unsupported version {v}; expected {SCHEMA_VERSION}"));
        }
    }
    let name: Option<String> = c.section(&table, "name");
    let scenario: Option<String> = c.section(&table, "scenario");
    if let Some(s) = &scenario {
        if !is_registered(s) {
            c.push("scenario", format!("unknown scenario `{s}`; known: {}", SCENARIOS.join(", ")));
        }
    }
    let seed: Option<u64> = c.section(&table, "seed");
    let episodes: Option<usize> = c.section(&table, "episodes");
    if episodes == Some(0) {
        c.push("episodes", "must be at least 1");
    }
    let workers: Option<usize> = c.section(&table, "workers");
    if workers == Some(0) {
        c.push("workers", "must be at least 1");
    }
    let keep_traces: Option<usize> = c.section(&table, "keep_traces");

    let space: Option<SituationSpace> = c.section(&table, "space");
    if let Some(s) = &space {
        if let Err(e) = s.validate() {
            c.push("space", e.to_string());
        }
        for (i, v) in s.variables.iter().enumerate() {
            if let VariableRange::Continuous { min, max } = v.range {
                if !(min.is_finite() && max.is_finite()) {
                    c.push(&format!("space.variables.{i}"), format!("`{}` has a non-finite bound", v.name));
                }
            }
        }
    }
    let goal: Option<GoalSpec> = c.section(&table, "goal");
    if let Some(g) = &goal {
        let t = g.tolerated;
        if !(t.lo <= t.hi) {
            c.push("goal.tolerated", format!("lo {} above hi {}", t.lo, t.hi));
        }
    }
    let limits: Option<ResourceLedger> = c.section(&table, "limits");
    if let Some(l) = &limits {
        if l.steps == 0 {
            c.push("limits.steps", "must be positive");
        }
        if !(l.distance > 0.0) {
            c.push("limits.distance", "must be positive");
        }
        if l.messages == 0 {
            c.push("limits.messages", "must be positive");
        }
    }
    let swarm: Option<SwarmConfig> = if table.contains_key("swarm") {
        c.section(&table, "swarm")
    } else {
        Some(SwarmConfig::default())
    };
    if let Some(s) = &swarm {
        for e in s.violations() {
            c.push("swarm", e.to_string());
        }
    }

    let mut arms = BTreeMap::new();
    if let Some(toml::Value::Table(raw)) = table.get("arms") {
        for (arm_name, v) in raw {
            let field = format!("arms.{arm_name}");
            match v.clone().try_into::<ArmConfig>() {
                Ok(a) => {
                    arms.insert(arm_name.clone(), a);
                }
                Err(e) => c.push(&field, e.message().trim().to_string()),
            }
        }
        if raw.is_empty() {
            c.push("arms", "at least one arm is required");
        }
    } else if table.contains_key("arms") {
        c.push("arms", "must be a table of arms");
    }
    check_arms(&mut c, &arms, swarm.as_ref(), space.as_ref());

    let verdict: Option<VerdictArms> = c.section(&table, "verdict");
    if let Some(v) = &verdict {
        for (role, arm) in [("nat", &v.nat), ("arti", &v.arti), ("joint", &v.joint)] {
            if !arms.contains_key(arm) {
                c.push(&format!("verdict.{role}"), format!("no arm named `{arm}`"));
            }
        }
    }
    let sweep: Option<SweepConfig> = c.section(&table, "sweep");
    if let Some(s) = &sweep {
        if !arms.contains_key(&s.arm) {
            c.push("sweep.arm", format!("no arm named `{}`", s.arm));
        }
        if let Some(space) = &space {
            if space.variable(&s.axis).is_none() {
                c.push("sweep.axis", format!("`{}` is not a space variable", s.axis));
            }
        }
        if s.cells == 0 {
            c.push("sweep.cells", "must be at least 1");
        }
        if s.per_cell_n < exswarm_core::competence::MIN_PER_CELL {
            c.push(
                "sweep.per_cell_n",
                format!("{} is below the minimum of {}", s.per_cell_n, exswarm_core::competence::MIN_PER_CELL),
            );
        }
        if !(s.cliff_threshold > 0.0 && s.cliff_threshold <= 1.0) {
            c.push("sweep.cliff_threshold", "must be in (0, 1]");
        }
    }

    if !c.out.is_empty() {
        return Err(c.out);
    }
    // Every required section parsed, so the unwraps below cannot fail.
    Ok(ExperimentConfig {
        schema_version: schema_version.expect("checked"),
        name: name.expect("checked"),
        scenario: scenario.expect("checked"),
        seed: seed.expect("checked"),
        episodes: episodes.expect("checked"),
        workers,
        keep_traces: keep_traces.unwrap_or(0),
        space: space.expect("checked"),
        goal: goal.expect("checked"),
        limits: limits.expect("checked"),
        swarm: swarm.expect("checked"),
        arms,
        verdict,
        sweep,
    })
}

fn check_arms(
    c: &mut Collector<'_>,
    arms: &BTreeMap<String, ArmConfig>,
    swarm: Option<&SwarmConfig>,
    space: Option<&SituationSpace>,
) {
    for (name, arm) in arms {
        let field = format!("arms.{name}");
        for v in arm.spec().violations() {
            c.push(&field, v);
        }
        if let (Some(s), Some(sw)) = (&arm.swarm, swarm) {
            if let Err(e) = s.initial_posture.validate(sw.n_robots, sw.separation_distance) {
                c.push(&format!("{field}.swarm.initial_posture"), e.to_string());
            }
        }
        let Some(trust) = arm.trust() else {
            if arm.truth_from.is_some() || arm.truth.is_some() || arm.calibrated {
                c.push(&field, "truth_from, truth and calibrated need a supervisor_script operator");
            }
            continue;
        };
        if let Err(e) = trust.validate() {
            c.push(&format!("{field}.operator.trust"), e.to_string());
        }
        if let Some(space) = space {
            if space.variable(&trust.axis).is_none() {
                c.push(
                    &format!("{field}.operator.trust.axis"),
                    format!("`{}` is not a space variable", trust.axis),
                );
            }
        }
        match (&arm.truth_from, &arm.truth) {
            (Some(_), Some(_)) => c.push(&field, "give either truth_from or truth, not both"),
            (None, None) => c.push(&field, "supervised arm needs truth_from or truth"),
            (Some(src), None) => match arms.get(src) {
                None => c.push(&format!("{field}.truth_from"), format!("no arm named `{src}`")),
                Some(a) if a.trust().is_some() => {
                    c.push(&format!("{field}.truth_from"), format!("`{src}` is itself supervised"))
                }
                Some(_) => {}
            },
            (None, Some(t)) => {
                if t.len() != trust.buckets.len() {
                    c.push(
                        &format!("{field}.truth"),
                        format!("{} values for {} buckets", t.len(), trust.buckets.len()),
                    );
                }
                if t.iter().any(|x| !(0.0..=1.0).contains(x)) {
                    c.push(&format!("{field}.truth"), "values must lie in [0,1]");
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
schema_version = 1
name = "t"
scenario = "coin_claim"
seed = 1
episodes = 10

[space]
id = "s"
variables = [{ name = "x", min = 0.0, max = 1.0 }]

[goal]
id = "g"
metric = "discovered_fraction"
tolerated = { lo = 1.0, hi = 1.0 }

[limits]
steps = 5
distance = 10.0
messages = 1

[arms.coin]
stub = { claim_probability = 0.5 }
"#;

    #[test]
    fn good_config_parses() {
        let cfg = validate_config(GOOD).unwrap();
        assert_eq!(cfg.arms.len(), 1);
        assert_eq!(cfg.swarm, SwarmConfig::default());
    }

    #[test]
    fn collects_every_violation_with_lines() {
        let bad = GOOD
            .replace("schema_version = 1", "schema_version = 7")
            .replace("episodes = 10", "episodes = 0\nbogus = 3")
            .replace("steps = 5", "steps = 0")
            .replace("claim_probability = 0.5", "claim_probability = 1.5");
        let errs = validate_config(&bad).unwrap_err();
        let fields: Vec<_> = errs.iter().map(|v| v.field.as_str()).collect();
        assert!(fields.contains(&"schema_version"));
        assert!(fields.contains(&"episodes"));
        assert!(fields.contains(&"bogus"));
        assert!(fields.contains(&"limits.steps"));
        assert!(fields.contains(&"arms.coin"));
        let steps = errs.iter().find(|v| v.field == "limits.steps").unwrap();
        let want = bad.lines().position(|l| l.starts_with("steps = 0")).unwrap() + 1;
        assert_eq!(steps.line, Some(want));
    }

    #[test]
    fn syntax_error_has_line() {
        let errs = validate_config("schema_version = 1\nname = \n").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].line, Some(2));
    }

    #[test]
    fn missing_sections_reported() {
        let errs = validate_config("schema_version = 1\n").unwrap_err();
        assert!(errs.iter().any(|v| v.field == "arms" && v.message.contains("missing")));
        assert!(errs.iter().any(|v| v.field == "goal"));
    }
}

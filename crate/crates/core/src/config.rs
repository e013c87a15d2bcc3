//! TOML input files: scenarios and case-base queries.

use serde::{Deserialize, Serialize};

use crate::experiment::ConfigError;
use crate::kb::Situation;
use crate::model::{Behaviour, DecisionContext, ValidationError};
use crate::sim::Scenario;

pub const FORMAT_VERSION: u32 = 1;

fn check_version(v: u32) -> Result<(), ConfigError> {
    if v == FORMAT_VERSION {
        Ok(())
    } else {
        Err(ConfigError::Invalid(ValidationError(vec![format!(
            "unsupported format_version {v}"
        )])))
    }
}

fn read(path: &std::path::Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub scenario: Scenario,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Scenario, ConfigError> {
        let f: ScenarioFile =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        check_version(f.format_version)?;
        f.scenario.validate().map_err(ConfigError::Invalid)?;
        Ok(f.scenario)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario, ConfigError> {
        Self::parse(&read(path)?)
    }

    pub fn to_toml(scenario: &Scenario) -> String {
        toml::to_string(&ScenarioFile {
            format_version: FORMAT_VERSION,
            scenario: scenario.clone(),
        })
        .expect("scenario serialises")
    }
}

/// A situation plus the behaviour to ask the case base about.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub format_version: u32,
    #[serde(flatten)]
    pub situation: Situation,
    pub behaviour: Behaviour,
}

impl QuerySpec {
    pub fn parse(text: &str) -> Result<QuerySpec, ConfigError> {
        let q: QuerySpec = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        check_version(q.format_version)?;
        let mut errs = Vec::new();
        if !(1..=3).contains(&q.situation.epsilon_m) {
            errs.push("epsilon_m out of {1,2,3}".to_string());
        }
        if !q.behaviour.is_well_formed() {
            errs.push("obeyed instruction does not match behaviour kind".to_string());
        }
        if !errs.is_empty() {
            return Err(ConfigError::Invalid(ValidationError(errs)));
        }
        Ok(q)
    }

    pub fn load(path: &std::path::Path) -> Result<QuerySpec, ConfigError> {
        Self::parse(&read(path)?)
    }
}

/// Round-trips a decision context through TOML; used by `validate`.
pub fn parse_context(text: &str) -> Result<DecisionContext, ConfigError> {
    let c: DecisionContext = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    c.validate().map_err(ConfigError::Invalid)?;
    Ok(c)
}

//! The 6-case x 4-character experiment: expected grid, profile files, matrix
//! runs, diffs and the calibration grid search.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::governor::Governor;
use crate::kb::CaseBase;
use crate::model::{CharacterProfile, ValidationError, ValueTag};
use crate::sim::{run_episode, BehaviourClassifier, Scenario, SimError};
use crate::utility::RiskMode;

pub const PROFILES_FORMAT_VERSION: u32 = 1;
pub const PROFILE_NAMES: [&str; 4] = ["M_a", "M_ar", "M_arw", "M_wr"];

/// One experiment case: medicine impact and doses missed beforehand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentCase {
    pub id: u8,
    pub epsilon_m: u8,
    pub d: u32,
    pub expert_opinion: &'static str,
}

pub const CASES: [ExperimentCase; 6] = [
    ExperimentCase {
        id: 1,
        epsilon_m: 1,
        d: 0,
        expert_opinion: "record at step 19",
    },
    ExperimentCase {
        id: 2,
        epsilon_m: 2,
        d: 0,
        expert_opinion: "alert at step 19",
    },
    ExperimentCase {
        id: 3,
        epsilon_m: 3,
        d: 0,
        expert_opinion: "alert at step 10",
    },
    ExperimentCase {
        id: 4,
        epsilon_m: 1,
        d: 2,
        expert_opinion: "record at step 18",
    },
    ExperimentCase {
        id: 5,
        epsilon_m: 2,
        d: 2,
        expert_opinion: "alert at step 10",
    },
    ExperimentCase {
        id: 6,
        epsilon_m: 3,
        d: 2,
        expert_opinion: "alert at step 10",
    },
];

/// Published behaviour classes, rows = cases 1-6, columns = `PROFILE_NAMES`.
/// Version 1 of this table; bump if the grid is ever revised.
pub const EXPECTED: [[u32; 4]; 6] = [
    [1, 2, 2, 3],
    [4, 5, 4, 6],
    [6, 6, 6, 6],
    [1, 7, 1, 6],
    [6, 6, 6, 6],
    [6, 6, 6, 6],
];

impl ExperimentCase {
    pub fn scenario(&self) -> Scenario {
        Scenario::new(format!("case-{}", self.id), self.epsilon_m, self.d)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedProfile {
    pub name: String,
    #[serde(flatten)]
    pub profile: CharacterProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilesFile {
    pub format_version: u32,
    #[serde(rename = "profile", default)]
    pub profiles: Vec<NamedProfile>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation failed: {0}")]
    Invalid(ValidationError),
}

impl ProfilesFile {
    pub fn new(profiles: Vec<NamedProfile>) -> Self {
        ProfilesFile {
            format_version: PROFILES_FORMAT_VERSION,
            profiles,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let pf: ProfilesFile =
            toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        pf.validate().map_err(ConfigError::Invalid)?;
        Ok(pf)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("profiles serialise")
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut errs = Vec::new();
        if self.format_version != PROFILES_FORMAT_VERSION {
            errs.push(format!(
                "unsupported format_version {}",
                self.format_version
            ));
        }
        if self.profiles.is_empty() {
            errs.push("no profiles defined".to_string());
        }
        let mut seen = BTreeSet::new();
        for p in &self.profiles {
            if !seen.insert(p.name.as_str()) {
                errs.push(format!("duplicate profile {:?}", p.name));
            }
            if let Err(e) = p.profile.validate() {
                errs.extend(e.0.into_iter().map(|m| format!("{}: {m}", p.name)));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(errs))
        }
    }

    pub fn get(&self, name: &str) -> Option<&CharacterProfile> {
        self.profiles
            .iter()
            .find(|p| p.name == name)
            .map(|p| &p.profile)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub case_id: u8,
    pub profile: String,
    pub expected: Option<u32>,
    pub actual: u32,
}

impl Cell {
    pub fn matches(&self) -> bool {
        self.expected.is_none_or(|e| e == self.actual)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub cells: Vec<Cell>,
    /// Signatures behind any ids above 7.
    pub synthetic: Vec<(u32, String)>,
}

impl Matrix {
    pub fn diff(&self) -> Vec<&Cell> {
        self.cells.iter().filter(|c| !c.matches()).collect()
    }

    pub fn get(&self, case_id: u8, profile: &str) -> Option<u32> {
        self.cells
            .iter()
            .find(|c| c.case_id == case_id && c.profile == profile)
            .map(|c| c.actual)
    }

    /// Plain-text grid in the layout of the published table.
    pub fn render(&self, profiles: &[String]) -> String {
        let mut out = format!("{:<6}{:<5}{:<4}", "case", "eps", "d");
        for p in profiles {
            out.push_str(&format!("{p:<8}"));
        }
        out.push_str("expert\n");
        for case in CASES {
            out.push_str(&format!("{:<6}{:<5}{:<4}", case.id, case.epsilon_m, case.d));
            for p in profiles {
                let cell = self
                    .cells
                    .iter()
                    .find(|c| c.case_id == case.id && &c.profile == p);
                let s = match cell {
                    Some(c) if c.matches() => c.actual.to_string(),
                    Some(c) => format!("{}!{}", c.actual, c.expected.unwrap_or(0)),
                    None => "-".into(),
                };
                out.push_str(&format!("{s:<8}"));
            }
            out.push_str(case.expert_opinion);
            out.push('\n');
        }
        out
    }
}

pub fn expected_for(case_id: u8, profile: &str) -> Option<u32> {
    let col = PROFILE_NAMES.iter().position(|n| *n == profile)?;
    let row = CASES.iter().position(|c| c.id == case_id)?;
    Some(EXPECTED[row][col])
}

#[derive(Debug, thiserror::Error)]
#[error("cell (case {case_id}, {profile}) failed: {source}")]
pub struct CellError {
    pub case_id: u8,
    pub profile: String,
    pub source: SimError,
}

pub fn run_matrix(
    kb: &CaseBase,
    profiles: &ProfilesFile,
    mode: RiskMode,
) -> Result<Matrix, CellError> {
    let gov = Governor::new(kb).with_risk_mode(mode);
    let mut classifier = BehaviourClassifier::new();
    let mut cells = Vec::new();
    for case in CASES {
        let scenario = case.scenario();
        for np in &profiles.profiles {
            let log = run_episode(&scenario, &np.profile, &gov).map_err(|source| CellError {
                case_id: case.id,
                profile: np.name.clone(),
                source,
            })?;
            cells.push(Cell {
                case_id: case.id,
                profile: np.name.clone(),
                expected: expected_for(case.id, &np.name),
                actual: classifier.classify(&log),
            });
        }
    }
    let synthetic = classifier
        .synthetic()
        .into_iter()
        .map(|(i, s)| (i, s.to_string()))
        .collect();
    Ok(Matrix { cells, synthetic })
}

/// Qualitative description of a character, as integer slider bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Descriptor {
    pub name: &'static str,
    pub c_w: RangeInclusive<u8>,
    pub c_au: RangeInclusive<u8>,
    pub c_rp: RangeInclusive<u8>,
    /// Leans towards autonomy at least as much as wellbeing.
    pub au_at_least_w: bool,
    pub precedence: &'static [ValueTag],
}

impl Descriptor {
    pub fn admits(&self, c_w: u8, c_au: u8, c_rp: u8) -> bool {
        self.c_w.contains(&c_w)
            && self.c_au.contains(&c_au)
            && self.c_rp.contains(&c_rp)
            && (!self.au_at_least_w || c_au >= c_w)
    }

    pub fn profile(&self, c_w: u8, c_au: u8, c_rp: u8) -> CharacterProfile {
        CharacterProfile::new(c_w as f64, c_au as f64, c_rp as f64).with_precedence(self.precedence)
    }
}

pub fn descriptors() -> Vec<Descriptor> {
    use ValueTag::*;
    vec![
        // high autonomy, very low risk propensity, no precedence on wellbeing
        Descriptor {
            name: "M_a",
            c_w: 0..=4,
            c_au: 6..=10,
            c_rp: 0..=1,
            au_at_least_w: false,
            precedence: &[Autonomy],
        },
        // high autonomy, high risk propensity, no precedence on wellbeing
        Descriptor {
            name: "M_ar",
            c_w: 0..=3,
            c_au: 8..=10,
            c_rp: 7..=10,
            au_at_least_w: false,
            precedence: &[Autonomy],
        },
        // moderate everything, leaning towards autonomy
        Descriptor {
            name: "M_arw",
            c_w: 3..=7,
            c_au: 3..=7,
            c_rp: 3..=7,
            au_at_least_w: true,
            precedence: &[Autonomy, Wellbeing],
        },
        // high wellbeing, high risk propensity, no precedence on autonomy
        Descriptor {
            name: "M_wr",
            c_w: 7..=10,
            c_au: 0..=4,
            c_rp: 7..=10,
            au_at_least_w: false,
            precedence: &[Wellbeing],
        },
    ]
}

/// Behaviour classes a profile should show, per case; `None` = unconstrained.
pub type TargetColumn = [Option<u32>; 6];

pub fn published_target(profile: &str) -> Option<TargetColumn> {
    let col = PROFILE_NAMES.iter().position(|n| *n == profile)?;
    Some(std::array::from_fn(|r| Some(EXPECTED[r][col])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub c_w: u8,
    pub c_au: u8,
    pub c_rp: u8,
    pub outcome: [u32; 6],
    pub matched: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub name: String,
    pub evaluated: usize,
    /// Reproducing configurations in search order, up to the cap.
    pub solutions: Vec<Candidate>,
    /// Best partial match when nothing reproduces the target.
    pub nearest_miss: Option<Candidate>,
}

impl Calibration {
    pub fn chosen(&self) -> Option<&Candidate> {
        self.solutions.first()
    }
}

/// Grid-searches `{0..=10}^3` in (c_w, c_au, c_rp) order within the
/// descriptor's bounds. Cases with no target class are not run.
pub fn calibrate(
    kb: &CaseBase,
    descriptor: &Descriptor,
    target: &TargetColumn,
    mode: RiskMode,
    cap: usize,
) -> Result<Calibration, CellError> {
    let gov = Governor::new(kb).with_risk_mode(mode);
    let mut classifier = BehaviourClassifier::new();
    let mut solutions = Vec::new();
    let mut nearest: Option<Candidate> = None;
    let mut evaluated = 0;
    'search: for c_w in 0..=10u8 {
        for c_au in 0..=10u8 {
            for c_rp in 0..=10u8 {
                if !descriptor.admits(c_w, c_au, c_rp) {
                    continue;
                }
                evaluated += 1;
                let profile = descriptor.profile(c_w, c_au, c_rp);
                let mut outcome = [0u32; 6];
                let mut matched = 0;
                for (i, case) in CASES.iter().enumerate() {
                    let Some(want) = target[i] else { continue };
                    let log = run_episode(&case.scenario(), &profile, &gov).map_err(|source| {
                        CellError {
                            case_id: case.id,
                            profile: descriptor.name.to_string(),
                            source,
                        }
                    })?;
                    outcome[i] = classifier.classify(&log);
                    matched += (outcome[i] == want) as usize;
                }
                let cand = Candidate {
                    c_w,
                    c_au,
                    c_rp,
                    outcome,
                    matched,
                };
                if matched == target.iter().flatten().count() {
                    solutions.push(cand);
                    if solutions.len() >= cap {
                        break 'search;
                    }
                } else if nearest.as_ref().is_none_or(|n| matched > n.matched) {
                    nearest = Some(cand);
                }
            }
        }
    }
    let nearest_miss = if solutions.is_empty() { nearest } else { None };
    Ok(Calibration {
        name: descriptor.name.to_string(),
        evaluated,
        solutions,
        nearest_miss,
    })
}

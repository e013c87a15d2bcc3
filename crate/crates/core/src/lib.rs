//! Character-tunable ethical governor with pro-social rule bending, driven
//! through a deterministic medication-reminder simulation.
//!
//! The pipeline for one decision: [`governor::candidate_behaviours`] lists
//! what the robot may do, [`rules`] checks each option, [`utility`] scores
//! it, [`kb`] asks the expert case base, and [`evaluator`] decides whether
//! the robot's character lets it bend (or suppress) a rule.

pub mod blackboard;
pub mod config;
pub mod evaluator;
pub mod experiment;
pub mod governor;
pub mod kb;
pub mod model;
pub mod output;
pub mod rules;
pub mod sim;
pub mod utility;

pub use evaluator::{evaluate, render_explanation, thresholds, Desirability, ThresholdSet};
pub use governor::{arbitrate, candidate_behaviours, Governor, Recommendation};
pub use kb::{CaseBase, Opinion};
pub use model::{
    Behaviour, BehaviourKind, CharacterProfile, DecisionContext, Instruction, ValueTag,
};
pub use rules::{RuleSet, RuleVerdict};
pub use sim::{behaviour_id, run_episode, EpisodeLog, Scenario};
pub use utility::RiskMode;

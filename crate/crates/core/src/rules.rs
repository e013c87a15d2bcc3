//! Pre-programmed rule set and permissibility checks.

use serde::{Deserialize, Serialize};

use crate::model::{Behaviour, BehaviourKind, DecisionContext};

pub type Predicate = fn(&Behaviour, &DecisionContext) -> bool;

/// A rule; `violated` returns true when the behaviour breaks it in `ctx`.
#[derive(Clone)]
pub struct Rule {
    pub id: u32,
    pub description: &'static str,
    pub violated: Predicate,
}

impl std::fmt::Debug for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Rule")
            .field("id", &self.id)
            .field("description", &self.description)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleVerdict {
    /// Ascending, deduplicated ids of the broken rules.
    pub violated_rule_ids: Vec<u32>,
}

impl RuleVerdict {
    pub fn permissible(&self) -> bool {
        self.violated_rule_ids.is_empty()
    }
}

#[derive(Debug, thiserror::Error)]
#[error("duplicate rule id {0}")]
pub struct DuplicateRule(pub u32);

#[derive(Debug, Clone)]
pub struct RuleSet {
    rules: Vec<Rule>,
}

/// Rule 1: do not disobey a resident instruction that is still pending.
fn disobeys_pending(b: &Behaviour, ctx: &DecisionContext) -> bool {
    matches!(ctx.pending_instruction, Some(i) if b.obeys != Some(i))
}

/// Rule 2: an acknowledged-but-untaken dose must be reported. Following up
/// keeps the incident open and is not a violation; anything that closes or
/// ignores it without reporting is.
fn leaves_breach_unreported(b: &Behaviour, ctx: &DecisionContext) -> bool {
    ctx.acknowledged_without_taking
        && !matches!(b.kind, BehaviourKind::Report | BehaviourKind::FollowUp)
}

impl RuleSet {
    pub fn standard() -> Self {
        RuleSet {
            rules: vec![
                Rule {
                    id: 1,
                    description: "It is not permissible to disobey user instructions",
                    violated: disobeys_pending,
                },
                Rule {
                    id: 2,
                    description: "If the resident acknowledged the reminder and did not take the medication, report it to the care-worker",
                    violated: leaves_breach_unreported,
                },
            ],
        }
    }

    pub fn new(rules: Vec<Rule>) -> Result<Self, DuplicateRule> {
        let mut ids: Vec<u32> = rules.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(DuplicateRule(w[0]));
        }
        Ok(RuleSet { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn check(&self, b: &Behaviour, ctx: &DecisionContext) -> RuleVerdict {
        let mut ids: Vec<u32> = self
            .rules
            .iter()
            .filter(|r| (r.violated)(b, ctx))
            .map(|r| r.id)
            .collect();
        ids.sort_unstable();
        RuleVerdict {
            violated_rule_ids: ids,
        }
    }
}

impl Default for RuleSet {
    fn default() -> Self {
        Self::standard()
    }
}

//! The rule-bending evaluator: combines the rule verdict, the case-base
//! opinion and the character's thresholds into a binary desirability.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::blackboard::Entry;
use crate::model::{CharacterProfile, ValueTag};
use crate::utility::{behaviour_risk, RiskMode};

/// Divisor inside the risk-threshold exponent.
pub const RISK_EXP_DIVISOR: f64 = 4.17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    pub t_positive_w: f64,
    pub t_negative_w: f64,
    pub t_positive_au: f64,
    pub t_negative_au: f64,
    pub risk_threshold: f64,
}

impl ThresholdSet {
    pub fn t_positive(&self, v: ValueTag) -> f64 {
        match v {
            ValueTag::Wellbeing => self.t_positive_w,
            ValueTag::Autonomy => self.t_positive_au,
        }
    }

    pub fn t_negative(&self, v: ValueTag) -> f64 {
        match v {
            ValueTag::Wellbeing => self.t_negative_w,
            ValueTag::Autonomy => self.t_negative_au,
        }
    }
}

pub fn risk_threshold(c_rp: f64) -> f64 {
    ((c_rp / RISK_EXP_DIVISOR).exp() - 1.0) / 10.0
}

pub fn thresholds(p: &CharacterProfile) -> ThresholdSet {
    ThresholdSet {
        t_positive_w: (10.0 - p.c_w) / 10.0,
        t_negative_w: (p.c_w - 10.0) / 10.0,
        t_positive_au: (10.0 - p.c_au) / 10.0,
        t_negative_au: (p.c_au - 10.0) / 10.0,
        risk_threshold: risk_threshold(p.c_rp),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Experts agree and no rule is broken.
    CompliantSupported,
    /// Experts disagree and a rule is broken.
    NoncompliantUnsupported,
    /// Experts support breaking a rule; character decides.
    BendEvaluated,
    /// Experts oppose a compliant action; character decides.
    SuppressEvaluated,
}

/// Which explanation template applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationKind {
    BendAccepted,
    CompliantRiskRejected,
    CompliantValuesRejected,
    BendRiskRejected,
    BendValuesRejected,
    SuppressDeclined,
}

impl ExplanationKind {
    pub const ALL: [ExplanationKind; 6] = [
        ExplanationKind::BendAccepted,
        ExplanationKind::CompliantRiskRejected,
        ExplanationKind::CompliantValuesRejected,
        ExplanationKind::BendRiskRejected,
        ExplanationKind::BendValuesRejected,
        ExplanationKind::SuppressDeclined,
    ];

    /// 1-based template number.
    pub fn number(self) -> u8 {
        self as u8 + 1
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::ALL.get((n as usize).checked_sub(1)?).copied()
    }

    pub fn template(self) -> &'static str {
        match self {
            ExplanationKind::BendAccepted => "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. Since it increases <intentions> values greatly, while not reducing the other values <other_values> by a considerable amount, and the outcome is within accepted risk levels, deemed accepted by the PSRB system.",
            ExplanationKind::CompliantRiskRejected => "The action does not break any rules. However, this action in this context is considered undesirable by experts. Since the action outcomes introduce a high risk, deemed not accepted by the PSRB system.",
            ExplanationKind::CompliantValuesRejected => "The action does not break any rules. However, this action in this context is considered undesirable by experts. Since it decreases <intentions> values by a considerable amount, the action is deemed unacceptable by the system",
            ExplanationKind::BendRiskRejected => "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. Although the value tradeoff is satisfactory, the risk taken by the action is not acceptable to bend the rule.",
            ExplanationKind::BendValuesRejected => "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. But, the PSRB system suggests that the value tradeoff is not satisfactory to bend the rule.",
            ExplanationKind::SuppressDeclined => "The action does not break any rules. However, this action in this context is considered undesirable by experts. But, the PSRB system suggests that the value tradeoff is not satisfactory to bend the rule.",
        }
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    let v: Vec<String> = items.into_iter().map(|t| t.to_string()).collect();
    if v.is_empty() {
        "none".to_string()
    } else {
        v.join(", ")
    }
}

pub fn render_explanation(
    kind: ExplanationKind,
    rule_ids: &[u32],
    intentions: &BTreeSet<ValueTag>,
    other_values: &BTreeSet<ValueTag>,
) -> String {
    kind.template()
        .replace("<rule_ids>", &join(rule_ids))
        .replace("<intentions>", &join(intentions))
        .replace("<other_values>", &join(other_values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Desirability {
    pub desirable: bool,
    pub branch: Branch,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explanation_kind: Option<ExplanationKind>,
    /// Values whose utility fell below the applicable threshold.
    #[serde(default)]
    pub value_failures: Vec<ValueTag>,
    /// Risk figure, only computed on the character-evaluated branches.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk: Option<f64>,
    #[serde(default)]
    pub risk_exceeded: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("blackboard entry for {behaviour} is missing {field}")]
pub struct MissingField {
    pub behaviour: crate::model::Behaviour,
    pub field: &'static str,
}

fn utility(entry_au: f64, entry_w: f64, v: ValueTag) -> f64 {
    match v {
        ValueTag::Wellbeing => entry_w,
        ValueTag::Autonomy => entry_au,
    }
}

pub fn evaluate(
    entry: &Entry,
    profile: &CharacterProfile,
    mode: RiskMode,
) -> Result<Desirability, MissingField> {
    let missing = |field| MissingField {
        behaviour: entry.behaviour,
        field,
    };
    let verdict = entry
        .rule_verdict
        .as_ref()
        .ok_or_else(|| missing("rule_verdict"))?;
    let au = entry
        .autonomy_utility
        .ok_or_else(|| missing("autonomy_utility"))?;
    let w = entry
        .wellbeing_utility
        .ok_or_else(|| missing("wellbeing_utility"))?;
    let spec = entry
        .wellbeing_distribution
        .as_ref()
        .ok_or_else(|| missing("wellbeing_distribution"))?;
    let opinion = entry
        .kb_opinion
        .as_ref()
        .ok_or_else(|| missing("kb_opinion"))?;

    let broken = !verdict.permissible();
    let plain = |desirable, branch| Desirability {
        desirable,
        branch,
        explanation: None,
        explanation_kind: None,
        value_failures: Vec::new(),
        risk: None,
        risk_exceeded: false,
    };
    match (opinion.acceptable, broken) {
        (true, false) => return Ok(plain(true, Branch::CompliantSupported)),
        (false, true) => return Ok(plain(false, Branch::NoncompliantUnsupported)),
        _ => {}
    }

    let t = thresholds(profile);
    let mut failures = Vec::new();
    for v in ValueTag::ALL {
        let u = utility(au, w, v);
        let intended = opinion.intentions.contains(&v);
        let fails = if broken {
            if intended {
                u < t.t_positive(v)
            } else {
                u < t.t_negative(v)
            }
        } else {
            intended && u < t.t_negative(v)
        };
        if fails {
            failures.push(v);
        }
    }
    let risk = behaviour_risk(spec, mode);
    let risk_exceeded = risk > t.risk_threshold;
    let desirable = failures.is_empty() && !risk_exceeded;

    let (branch, kind) = if broken {
        let k = if desirable {
            ExplanationKind::BendAccepted
        } else if failures.is_empty() {
            ExplanationKind::BendRiskRejected
        } else {
            ExplanationKind::BendValuesRejected
        };
        (Branch::BendEvaluated, k)
    } else {
        let k = if desirable {
            ExplanationKind::SuppressDeclined
        } else if failures.is_empty() {
            ExplanationKind::CompliantRiskRejected
        } else {
            ExplanationKind::CompliantValuesRejected
        };
        (Branch::SuppressEvaluated, k)
    };
    let others: BTreeSet<ValueTag> = ValueTag::ALL
        .into_iter()
        .filter(|v| !opinion.intentions.contains(v))
        .collect();
    let text = render_explanation(
        kind,
        &verdict.violated_rule_ids,
        &opinion.intentions,
        &others,
    );
    Ok(Desirability {
        desirable,
        branch,
        explanation: Some(text),
        explanation_kind: Some(kind),
        value_failures: failures,
        risk: Some(risk),
        risk_exceeded,
    })
}

//! One decision step: enumerate candidates, fill the blackboard, evaluate,
//! and pick the behaviour the robot carries out.

use serde::{Deserialize, Serialize};

use crate::blackboard::{Blackboard, BlackboardError};
use crate::evaluator::{evaluate, MissingField};
use crate::kb::{encode, CaseBase, KbError, Opinion, Situation, DEFAULT_K};
use crate::model::{
    Behaviour, BehaviourKind, CharacterProfile, DecisionContext, Instruction, ValidationError,
};
use crate::rules::RuleSet;
use crate::utility::{autonomy_utility, wellbeing_utility, RiskMode, UtilityError};

/// Follow-ups after which record and report join the candidate set.
pub const EXPANSION_FOLLOW_UPS: u32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum GovernorError {
    #[error("invalid context: {0}")]
    Context(#[from] ValidationError),
    #[error(transparent)]
    Utility(#[from] UtilityError),
    #[error(transparent)]
    Kb(#[from] KbError),
    #[error(transparent)]
    Blackboard(#[from] BlackboardError),
    #[error(transparent)]
    Evaluation(#[from] MissingField),
}

pub fn candidate_behaviours(ctx: &DecisionContext) -> Vec<Behaviour> {
    if let Some(i) = ctx.pending_instruction {
        return vec![Behaviour::obeying(i)];
    }
    if ctx.acknowledged_without_taking || ctx.f >= EXPANSION_FOLLOW_UPS {
        return vec![Behaviour::FOLLOW_UP, Behaviour::RECORD, Behaviour::REPORT];
    }
    if ctx.f == 0 && ctx.reminder_state == crate::model::ReminderState::Issued {
        return vec![Behaviour::REMIND];
    }
    vec![Behaviour::FOLLOW_UP]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub candidates: Vec<Behaviour>,
    /// Behaviours with D = 1, in candidate order. When none qualified this
    /// holds the single fallback choice.
    pub desirable: Vec<Behaviour>,
    pub fallback: bool,
    pub blackboard: Blackboard,
}

impl Recommendation {
    fn combined_utility(&self, b: &Behaviour) -> f64 {
        let e = self.blackboard.entry(b).expect("candidate on blackboard");
        e.autonomy_utility.unwrap_or(0.0) + e.wellbeing_utility.unwrap_or(0.0)
    }

    fn compliant(&self, b: &Behaviour) -> bool {
        self.blackboard
            .entry(b)
            .and_then(|e| e.rule_verdict.as_ref())
            .is_some_and(|v| v.permissible())
    }
}

/// First maximum in iteration order.
fn best_by<'a>(
    items: impl Iterator<Item = &'a Behaviour>,
    key: impl Fn(&Behaviour) -> f64,
) -> Option<Behaviour> {
    let mut best: Option<(Behaviour, f64)> = None;
    for b in items {
        let k = key(b);
        if best.is_none_or(|(_, bk)| k > bk) {
            best = Some((*b, k));
        }
    }
    best.map(|(b, _)| b)
}

#[derive(Debug, Clone)]
pub struct Governor<'kb> {
    pub rules: RuleSet,
    pub kb: &'kb CaseBase,
    pub k: usize,
    pub risk_mode: RiskMode,
}

impl<'kb> Governor<'kb> {
    pub fn new(kb: &'kb CaseBase) -> Self {
        Governor {
            rules: RuleSet::standard(),
            kb,
            k: DEFAULT_K,
            risk_mode: RiskMode::default(),
        }
    }

    pub fn with_risk_mode(mut self, mode: RiskMode) -> Self {
        self.risk_mode = mode;
        self
    }

    pub fn decide(
        &self,
        ctx: &DecisionContext,
        profile: &CharacterProfile,
    ) -> Result<Recommendation, GovernorError> {
        ctx.validate()?;
        let candidates = candidate_behaviours(ctx);
        let mut bb = Blackboard::new(&candidates)?;
        let situation = Situation::from(ctx);
        for b in &candidates {
            let verdict = self.rules.check(b, ctx);
            let permissible = verdict.permissible();
            bb.put_verdict(b, verdict)?;
            let au = autonomy_utility(b, ctx);
            let (w, spec) = wellbeing_utility(b, ctx)?;
            bb.put_utilities(b, au, w, spec)?;
            let opinion = if self.kb.is_empty() {
                Opinion::agree_with_rules(permissible)
            } else {
                self.kb.opinion(&encode(&situation, b)?, self.k)?
            };
            bb.put_opinion(b, opinion)?;
            let d = evaluate(bb.entry(b).expect("just written"), profile, self.risk_mode)?;
            bb.put_desirability(b, d)?;
        }
        let desirable: Vec<Behaviour> = candidates
            .iter()
            .copied()
            .filter(|b| {
                bb.entry(b)
                    .and_then(|e| e.desirability.as_ref())
                    .is_some_and(|d| d.desirable)
            })
            .collect();
        let mut rec = Recommendation {
            candidates,
            desirable,
            fallback: false,
            blackboard: bb,
        };
        if rec.desirable.is_empty() {
            let choice = fallback_choice(&rec);
            rec.desirable = vec![choice];
            rec.fallback = true;
        }
        Ok(rec)
    }
}

/// Nothing qualified: keep following up if that is allowed, otherwise the
/// compliant candidate with the best combined utility.
fn fallback_choice(rec: &Recommendation) -> Behaviour {
    if rec.candidates.contains(&Behaviour::FOLLOW_UP) && rec.compliant(&Behaviour::FOLLOW_UP) {
        return Behaviour::FOLLOW_UP;
    }
    let key = |b: &Behaviour| rec.combined_utility(b);
    best_by(rec.candidates.iter().filter(|b| rec.compliant(b)), key)
        .or_else(|| best_by(rec.candidates.iter(), key))
        .expect("candidate set is never empty")
}

/// The behaviour the robot carries out. Resident instructions come first;
/// otherwise the desirable behaviour that best respects autonomy wins.
pub fn arbitrate(rec: &Recommendation, pending: Option<Instruction>) -> Behaviour {
    if let Some(i) = pending {
        if let Some(b) = rec.desirable.iter().find(|b| b.obeys == Some(i)) {
            return *b;
        }
    }
    let mut ordered = rec.desirable.clone();
    ordered.sort_by_key(|b| b.kind);
    let au = |b: &Behaviour| {
        rec.blackboard
            .entry(b)
            .and_then(|e| e.autonomy_utility)
            .unwrap_or(f64::NEG_INFINITY)
    };
    best_by(ordered.iter(), au).expect("recommendation is never empty")
}

/// Whether the kind escalates the incident to someone else.
pub fn is_escalation(kind: BehaviourKind) -> bool {
    matches!(kind, BehaviourKind::Record | BehaviourKind::Report)
}

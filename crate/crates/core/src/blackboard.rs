//! Per-decision shared record. Each pipeline stage deposits its result for
//! each candidate exactly once; entries are sealed when desirability lands.

use serde::{Deserialize, Serialize};

use crate::evaluator::Desirability;
use crate::kb::Opinion;
use crate::model::Behaviour;
use crate::rules::RuleVerdict;
use crate::utility::GammaSpec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BlackboardError {
    #[error("{behaviour}: {field} already written")]
    AlreadyWritten {
        behaviour: Behaviour,
        field: &'static str,
    },
    #[error("{0} is not a candidate on this blackboard")]
    UnknownBehaviour(Behaviour),
    #[error("{0} listed twice")]
    DuplicateCandidate(Behaviour),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub behaviour: Behaviour,
    pub rule_verdict: Option<RuleVerdict>,
    pub autonomy_utility: Option<f64>,
    pub wellbeing_utility: Option<f64>,
    pub wellbeing_distribution: Option<GammaSpec>,
    pub kb_opinion: Option<Opinion>,
    pub desirability: Option<Desirability>,
}

impl Entry {
    pub fn new(behaviour: Behaviour) -> Self {
        Entry {
            behaviour,
            rule_verdict: None,
            autonomy_utility: None,
            wellbeing_utility: None,
            wellbeing_distribution: None,
            kb_opinion: None,
            desirability: None,
        }
    }

    pub fn is_sealed(&self) -> bool {
        self.desirability.is_some()
    }
}

fn put<T>(
    slot: &mut Option<T>,
    value: T,
    behaviour: Behaviour,
    field: &'static str,
) -> Result<(), BlackboardError> {
    if slot.is_some() {
        return Err(BlackboardError::AlreadyWritten { behaviour, field });
    }
    *slot = Some(value);
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Blackboard {
    entries: Vec<Entry>,
}

impl Blackboard {
    pub fn new(candidates: &[Behaviour]) -> Result<Self, BlackboardError> {
        let mut entries: Vec<Entry> = Vec::with_capacity(candidates.len());
        for &b in candidates {
            if entries.iter().any(|e| e.behaviour == b) {
                return Err(BlackboardError::DuplicateCandidate(b));
            }
            entries.push(Entry::new(b));
        }
        Ok(Blackboard { entries })
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn entry(&self, b: &Behaviour) -> Option<&Entry> {
        self.entries.iter().find(|e| e.behaviour == *b)
    }

    fn slot(&mut self, b: &Behaviour, field: &'static str) -> Result<&mut Entry, BlackboardError> {
        let e = self
            .entries
            .iter_mut()
            .find(|e| e.behaviour == *b)
            .ok_or(BlackboardError::UnknownBehaviour(*b))?;
        if e.is_sealed() {
            return Err(BlackboardError::AlreadyWritten {
                behaviour: *b,
                field,
            });
        }
        Ok(e)
    }

    pub fn put_verdict(&mut self, b: &Behaviour, v: RuleVerdict) -> Result<(), BlackboardError> {
        let e = self.slot(b, "rule_verdict")?;
        put(&mut e.rule_verdict, v, *b, "rule_verdict")
    }

    pub fn put_utilities(
        &mut self,
        b: &Behaviour,
        au: f64,
        w: f64,
        spec: GammaSpec,
    ) -> Result<(), BlackboardError> {
        let e = self.slot(b, "utilities")?;
        if e.autonomy_utility.is_some()
            || e.wellbeing_utility.is_some()
            || e.wellbeing_distribution.is_some()
        {
            return Err(BlackboardError::AlreadyWritten {
                behaviour: *b,
                field: "utilities",
            });
        }
        e.autonomy_utility = Some(au);
        e.wellbeing_utility = Some(w);
        e.wellbeing_distribution = Some(spec);
        Ok(())
    }

    pub fn put_opinion(&mut self, b: &Behaviour, o: Opinion) -> Result<(), BlackboardError> {
        let e = self.slot(b, "kb_opinion")?;
        put(&mut e.kb_opinion, o, *b, "kb_opinion")
    }

    pub fn put_desirability(
        &mut self,
        b: &Behaviour,
        d: Desirability,
    ) -> Result<(), BlackboardError> {
        let e = self.slot(b, "desirability")?;
        put(&mut e.desirability, d, *b, "desirability")
    }
}

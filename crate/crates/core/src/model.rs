//! Shared vocabulary: behaviours, instructions, character profiles and the
//! per-decision context every other module reads.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Maximum number of simulation steps in an episode.
pub const HORIZON: u32 = 29;

/// Closed set of robot behaviour kinds. Declaration order is the canonical
/// order used wherever behaviours are listed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BehaviourKind {
    Remind,
    Snooze,
    AcknowledgeWait,
    FollowUp,
    Record,
    Report,
}

impl BehaviourKind {
    pub const ALL: [BehaviourKind; 6] = [
        BehaviourKind::Remind,
        BehaviourKind::Snooze,
        BehaviourKind::AcknowledgeWait,
        BehaviourKind::FollowUp,
        BehaviourKind::Record,
        BehaviourKind::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BehaviourKind::Remind => "remind",
            BehaviourKind::Snooze => "snooze",
            BehaviourKind::AcknowledgeWait => "acknowledge_wait",
            BehaviourKind::FollowUp => "follow_up",
            BehaviourKind::Record => "record",
            BehaviourKind::Report => "report",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for BehaviourKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Instructions the resident can give in response to a reminder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Instruction {
    Snooze,
    Acknowledge,
}

impl Instruction {
    pub fn as_str(self) -> &'static str {
        match self {
            Instruction::Snooze => "SNOOZE",
            Instruction::Acknowledge => "ACKNOWLEDGE",
        }
    }

    /// The behaviour kind that directly executes this instruction.
    pub fn obeying_kind(self) -> BehaviourKind {
        match self {
            Instruction::Snooze => BehaviourKind::Snooze,
            Instruction::Acknowledge => BehaviourKind::AcknowledgeWait,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A candidate action. `obeys` is set iff the behaviour directly executes a
/// resident instruction; the constructors keep that invariant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Behaviour {
    pub kind: BehaviourKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub obeys: Option<Instruction>,
}

impl Behaviour {
    pub const fn plain(kind: BehaviourKind) -> Self {
        Behaviour { kind, obeys: None }
    }

    pub fn obeying(instruction: Instruction) -> Self {
        Behaviour {
            kind: instruction.obeying_kind(),
            obeys: Some(instruction),
        }
    }

    pub const REMIND: Behaviour = Behaviour::plain(BehaviourKind::Remind);
    pub const FOLLOW_UP: Behaviour = Behaviour::plain(BehaviourKind::FollowUp);
    pub const RECORD: Behaviour = Behaviour::plain(BehaviourKind::Record);
    pub const REPORT: Behaviour = Behaviour::plain(BehaviourKind::Report);

    /// True when the tag is consistent with the kind.
    pub fn is_well_formed(&self) -> bool {
        match self.obeys {
            None => true,
            Some(i) => i.obeying_kind() == self.kind,
        }
    }
}

impl fmt::Display for Behaviour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.obeys {
            Some(i) => write!(f, "{}[{}]", self.kind, i),
            None => write!(f, "{}", self.kind),
        }
    }
}

/// Value dimensions a character can care about and an expert opinion can be
/// oriented toward.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueTag {
    Wellbeing,
    Autonomy,
}

impl ValueTag {
    pub const ALL: [ValueTag; 2] = [ValueTag::Wellbeing, ValueTag::Autonomy];

    pub fn as_str(self) -> &'static str {
        match self {
            ValueTag::Wellbeing => "wellbeing",
            ValueTag::Autonomy => "autonomy",
        }
    }
}

impl fmt::Display for ValueTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .0.join("; "))]
pub struct ValidationError(pub Vec<String>);

/// Character of a robot: value preferences and risk propensity on [0, 10].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacterProfile {
    pub c_w: f64,
    pub c_au: f64,
    pub c_rp: f64,
    /// Values the character explicitly gives precedence to. Documents intent;
    /// the evaluator only reads the numeric preferences.
    #[serde(default)]
    pub precedence: BTreeSet<ValueTag>,
}

impl CharacterProfile {
    pub fn new(c_w: f64, c_au: f64, c_rp: f64) -> Self {
        CharacterProfile {
            c_w,
            c_au,
            c_rp,
            precedence: BTreeSet::new(),
        }
    }

    pub fn with_precedence(mut self, tags: &[ValueTag]) -> Self {
        self.precedence = tags.iter().copied().collect();
        self
    }

    /// Numeric preference for one value dimension.
    pub fn preference(&self, v: ValueTag) -> f64 {
        match v {
            ValueTag::Wellbeing => self.c_w,
            ValueTag::Autonomy => self.c_au,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut errs = Vec::new();
        for (name, v) in [("c_w", self.c_w), ("c_au", self.c_au), ("c_rp", self.c_rp)] {
            if !(0.0..=10.0).contains(&v) {
                errs.push(format!("{name} out of [0,10]"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(errs))
        }
    }
}

/// Progress of the current reminder as perceived by the robot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReminderState {
    Issued,
    Snoozed,
    Ignored,
    Acknowledged,
}

impl ReminderState {
    pub const ALL: [ReminderState; 4] = [
        ReminderState::Issued,
        ReminderState::Snoozed,
        ReminderState::Ignored,
        ReminderState::Acknowledged,
    ];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Everything the governor knows about the situation at a decision point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionContext {
    pub epsilon_m: u8,
    pub d: u32,
    pub f: u32,
    pub reminder_state: ReminderState,
    /// Most recent instruction the resident gave, served or not.
    #[serde(default)]
    pub last_instruction: Option<Instruction>,
    /// Instruction still waiting to be carried out. Cleared once the robot
    /// has served it (snooze window elapsed, inspection finished).
    #[serde(default)]
    pub pending_instruction: Option<Instruction>,
    #[serde(default)]
    pub acknowledged_without_taking: bool,
    pub step: u32,
}

impl DecisionContext {
    pub fn new(epsilon_m: u8, d: u32) -> Self {
        DecisionContext {
            epsilon_m,
            d,
            f: 0,
            reminder_state: ReminderState::Issued,
            last_instruction: None,
            pending_instruction: None,
            acknowledged_without_taking: false,
            step: 0,
        }
    }

    /// Context at an inspection failure: the resident acknowledged but did
    /// not take the medication.
    pub fn breach(epsilon_m: u8, d: u32, f: u32, step: u32) -> Self {
        DecisionContext {
            epsilon_m,
            d,
            f,
            reminder_state: ReminderState::Acknowledged,
            last_instruction: Some(Instruction::Acknowledge),
            pending_instruction: None,
            acknowledged_without_taking: true,
            step,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut errs = Vec::new();
        if !(1..=3).contains(&self.epsilon_m) {
            errs.push("epsilon_m out of {1,2,3}".to_string());
        }
        if self.step > HORIZON {
            errs.push(format!("step beyond horizon {HORIZON}"));
        }
        if self.acknowledged_without_taking
            && self.last_instruction != Some(Instruction::Acknowledge)
        {
            errs.push(
                "acknowledged_without_taking requires last_instruction = ACKNOWLEDGE".to_string(),
            );
        }
        if self.pending_instruction.is_some() && self.pending_instruction != self.last_instruction {
            errs.push("pending_instruction must equal last_instruction".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(errs))
        }
    }
}

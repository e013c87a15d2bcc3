//! Discrete-step world: a scripted resident, the reminding robot with its
//! snooze and inspection timers, and the episode runner.
//!
//! Each step the resident acts first (answering a reminder issued on the
//! previous step), then the robot either continues a timed activity or asks
//! the governor for a decision.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::governor::{arbitrate, Governor, GovernorError, Recommendation};
use crate::model::{
    Behaviour, BehaviourKind, CharacterProfile, DecisionContext, Instruction, ReminderState,
    ValidationError, HORIZON,
};

pub const SNOOZE_STEPS: u32 = 3;
pub const INSPECT_STEPS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidentConfig {
    /// Answers to successive reminders, repeated cyclically.
    pub responses: Vec<Instruction>,
    #[serde(default)]
    pub takes_medication: bool,
}

impl Default for ResidentConfig {
    /// Snooze once, then acknowledge, forever; never takes the dose.
    fn default() -> Self {
        ResidentConfig {
            responses: vec![Instruction::Snooze, Instruction::Acknowledge],
            takes_medication: false,
        }
    }
}

fn default_horizon() -> u32 {
    HORIZON
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub epsilon_m: u8,
    pub d: u32,
    #[serde(default)]
    pub resident: ResidentConfig,
    #[serde(default = "default_horizon")]
    pub horizon: u32,
}

impl Scenario {
    pub fn new(name: impl Into<String>, epsilon_m: u8, d: u32) -> Self {
        Scenario {
            name: name.into(),
            epsilon_m,
            d,
            resident: ResidentConfig::default(),
            horizon: HORIZON,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut errs = Vec::new();
        if !(1..=3).contains(&self.epsilon_m) {
            errs.push("epsilon_m out of {1,2,3}".to_string());
        }
        if self.resident.responses.is_empty() {
            errs.push("resident.responses must not be empty".to_string());
        }
        if self.horizon == 0 || self.horizon > HORIZON {
            errs.push(format!("horizon must be in 1..={HORIZON}"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(ValidationError(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Idle,
    Reminded,
    Snoozing,
    Inspecting,
    Escalated,
    CycleClosed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub snooze_timer: u32,
    pub inspect_timer: u32,
    pub f: u32,
    pub cycle_d: u32,
    pub phase: Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    MedicationTaken,
    Recorded,
    Reported,
    HorizonReached,
}

/// What the robot did on a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "activity", content = "behaviour")]
pub enum Activity {
    Acted(Behaviour),
    Snoozing,
    Inspecting,
    ObservedIntake,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub context: DecisionContext,
    pub recommendation: Recommendation,
    pub chosen: Behaviour,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resident: Option<Instruction>,
    pub robot: Activity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<DecisionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub scenario: Scenario,
    pub profile: CharacterProfile,
    pub steps: Vec<StepRecord>,
    pub terminal: Terminal,
}

impl EpisodeLog {
    pub fn decisions(&self) -> impl Iterator<Item = (&StepRecord, &DecisionRecord)> {
        self.steps
            .iter()
            .filter_map(|s| s.decision.as_ref().map(|d| (s, d)))
    }

    pub fn actions(&self) -> impl Iterator<Item = (u32, Behaviour)> + '_ {
        self.steps.iter().filter_map(|s| match s.robot {
            Activity::Acted(b) => Some((s.step, b)),
            _ => None,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    Scenario(ValidationError),
    #[error("invalid profile: {0}")]
    Profile(ValidationError),
    #[error("step {step}: {source}")]
    Governor { step: u32, source: GovernorError },
    #[error("episode already finished")]
    Finished,
}

pub struct World<'a> {
    scenario: &'a Scenario,
    profile: &'a CharacterProfile,
    governor: &'a Governor<'a>,
    pub robot: RobotState,
    ctx: DecisionContext,
    next_response: usize,
    awaiting_response: bool,
    took_medication: bool,
    step: u32,
    steps: Vec<StepRecord>,
    terminal: Option<Terminal>,
}

impl<'a> World<'a> {
    pub fn new(
        scenario: &'a Scenario,
        profile: &'a CharacterProfile,
        governor: &'a Governor<'a>,
    ) -> Result<Self, SimError> {
        scenario.validate().map_err(SimError::Scenario)?;
        profile.validate().map_err(SimError::Profile)?;
        Ok(World {
            scenario,
            profile,
            governor,
            robot: RobotState {
                snooze_timer: 0,
                inspect_timer: 0,
                f: 0,
                cycle_d: scenario.d,
                phase: Phase::Idle,
            },
            ctx: DecisionContext::new(scenario.epsilon_m, scenario.d),
            next_response: 0,
            awaiting_response: false,
            took_medication: false,
            step: 0,
            steps: Vec::new(),
            terminal: None,
        })
    }

    pub fn terminal(&self) -> Option<Terminal> {
        self.terminal
    }

    /// Advances one step. Returns the terminal outcome once reached.
    pub fn step(&mut self) -> Result<Option<Terminal>, SimError> {
        if self.terminal.is_some() {
            return Err(SimError::Finished);
        }
        self.step += 1;
        let step = self.step;

        // resident
        let mut resident = None;
        if self.awaiting_response {
            self.awaiting_response = false;
            let r = &self.scenario.resident;
            let answer = r.responses[self.next_response % r.responses.len()];
            self.next_response += 1;
            self.ctx.last_instruction = Some(answer);
            self.ctx.pending_instruction = Some(answer);
            self.ctx.acknowledged_without_taking = false;
            self.ctx.reminder_state = match answer {
                Instruction::Snooze => ReminderState::Snoozed,
                Instruction::Acknowledge => ReminderState::Acknowledged,
            };
            if answer == Instruction::Acknowledge && r.takes_medication {
                self.took_medication = true;
            }
            resident = Some(answer);
        }

        // robot
        let mut decision = None;
        let activity = if self.robot.snooze_timer > 0 {
            self.robot.snooze_timer -= 1;
            if self.robot.snooze_timer == 0 {
                self.ctx.pending_instruction = None;
            }
            Activity::Snoozing
        } else if self.robot.inspect_timer > 0 {
            self.robot.inspect_timer -= 1;
            if self.took_medication {
                self.robot.inspect_timer = 0;
                self.robot.phase = Phase::CycleClosed;
                self.terminal = Some(Terminal::MedicationTaken);
                Activity::ObservedIntake
            } else {
                if self.robot.inspect_timer == 0 {
                    self.ctx.pending_instruction = None;
                    self.ctx.acknowledged_without_taking = true;
                }
                Activity::Inspecting
            }
        } else {
            self.ctx.f = self.robot.f;
            self.ctx.step = step;
            let rec = self
                .governor
                .decide(&self.ctx, self.profile)
                .map_err(|source| SimError::Governor { step, source })?;
            let chosen = arbitrate(&rec, self.ctx.pending_instruction);
            decision = Some(DecisionRecord {
                context: self.ctx.clone(),
                recommendation: rec,
                chosen,
            });
            self.apply(chosen);
            Activity::Acted(chosen)
        };

        self.steps.push(StepRecord {
            step,
            resident,
            robot: activity,
            decision,
        });
        if self.terminal.is_none() && step >= self.scenario.horizon {
            self.terminal = Some(Terminal::HorizonReached);
        }
        Ok(self.terminal)
    }

    fn apply(&mut self, b: Behaviour) {
        match b.kind {
            BehaviourKind::Remind => {
                self.awaiting_response = true;
                self.robot.phase = Phase::Reminded;
            }
            BehaviourKind::FollowUp => {
                self.robot.f += 1;
                self.awaiting_response = true;
                self.robot.phase = Phase::Reminded;
            }
            BehaviourKind::Snooze => {
                self.robot.snooze_timer = SNOOZE_STEPS;
                self.robot.phase = Phase::Snoozing;
            }
            BehaviourKind::AcknowledgeWait => {
                self.robot.inspect_timer = INSPECT_STEPS;
                self.robot.phase = Phase::Inspecting;
            }
            BehaviourKind::Record => {
                self.robot.phase = Phase::Escalated;
                self.terminal = Some(Terminal::Recorded);
            }
            BehaviourKind::Report => {
                self.robot.phase = Phase::Escalated;
                self.terminal = Some(Terminal::Reported);
            }
        }
    }

    pub fn into_log(self) -> EpisodeLog {
        EpisodeLog {
            scenario: self.scenario.clone(),
            profile: self.profile.clone(),
            steps: self.steps,
            terminal: self.terminal.unwrap_or(Terminal::HorizonReached),
        }
    }
}

pub fn run_episode(
    scenario: &Scenario,
    profile: &CharacterProfile,
    governor: &Governor<'_>,
) -> Result<EpisodeLog, SimError> {
    let mut world = World::new(scenario, profile, governor)?;
    while world.step()?.is_none() {}
    Ok(world.into_log())
}

/// First synthetic class id handed out for unrecognised signatures.
pub const FIRST_SYNTHETIC_ID: u32 = 8;

/// Maps episode logs to behaviour classes 1-7 by where, and after what
/// recommendation, the incident was escalated. Unrecognised signatures get
/// stable ids from 8 upward for the lifetime of the classifier.
#[derive(Debug, Default)]
pub struct BehaviourClassifier {
    synthetic: HashMap<String, u32>,
}

impl BehaviourClassifier {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn classify(&mut self, log: &EpisodeLog) -> u32 {
        match known_class(log) {
            Some(id) => id,
            None => {
                let sig = signature(log);
                let next = FIRST_SYNTHETIC_ID + self.synthetic.len() as u32;
                *self.synthetic.entry(sig).or_insert(next)
            }
        }
    }

    /// Signatures interned so far, by id.
    pub fn synthetic(&self) -> Vec<(u32, &str)> {
        let mut v: Vec<(u32, &str)> = self
            .synthetic
            .iter()
            .map(|(s, id)| (*id, s.as_str()))
            .collect();
        v.sort();
        v
    }
}

pub fn behaviour_id(log: &EpisodeLog) -> u32 {
    BehaviourClassifier::new().classify(log)
}

fn signature(log: &EpisodeLog) -> String {
    let acts: Vec<String> = log.actions().map(|(s, b)| format!("{s}:{b}")).collect();
    format!("{} -> {:?}", acts.join(" "), log.terminal)
}

fn known_class(log: &EpisodeLog) -> Option<u32> {
    let breaches: Vec<&DecisionRecord> = log
        .decisions()
        .map(|(_, d)| d)
        .filter(|d| d.context.acknowledged_without_taking)
        .collect();
    let escalation = log
        .decisions()
        .map(|(_, d)| d)
        .find(|d| matches!(d.chosen.kind, BehaviourKind::Record | BehaviourKind::Report));
    let Some(esc) = escalation else {
        return (log.terminal == Terminal::HorizonReached).then_some(1);
    };
    if !esc.context.acknowledged_without_taking {
        return None;
    }
    let nth = breaches.iter().position(|d| std::ptr::eq(*d, esc))? + 1;
    match (esc.chosen.kind, nth) {
        (BehaviourKind::Record, 1) => Some(7),
        (BehaviourKind::Record, 2) => Some(2),
        (BehaviourKind::Report, 1) => Some(6),
        (BehaviourKind::Report, 2) => {
            let first = &breaches[0].recommendation;
            if first.fallback {
                Some(4)
            } else if first.desirable.contains(&Behaviour::REPORT) {
                Some(3)
            } else {
                Some(5)
            }
        }
        _ => None,
    }
}

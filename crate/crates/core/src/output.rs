//! Episode renderers: JSONL event log, utility CSV and a text timeline.

use std::io::Write;

use serde::Serialize;

use crate::sim::{Activity, EpisodeLog, StepRecord, Terminal};

#[derive(Serialize)]
struct Summary<'a> {
    summary: SummaryBody<'a>,
}

#[derive(Serialize)]
struct SummaryBody<'a> {
    scenario: &'a str,
    steps: usize,
    terminal: Terminal,
    behaviour_id: u32,
}

/// One line per step, then a summary line.
pub fn write_jsonl(log: &EpisodeLog, behaviour_id: u32, mut w: impl Write) -> std::io::Result<()> {
    for s in &log.steps {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    let summary = Summary {
        summary: SummaryBody {
            scenario: &log.scenario.name,
            steps: log.steps.len(),
            terminal: log.terminal,
            behaviour_id,
        },
    };
    serde_json::to_writer(&mut w, &summary)?;
    w.write_all(b"\n")
}

pub fn read_jsonl_steps(text: &str) -> serde_json::Result<Vec<StepRecord>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with("{\"summary\""))
        .map(serde_json::from_str)
        .collect()
}

#[derive(Serialize)]
struct CsvRow {
    step: u32,
    behavior: String,
    #[serde(rename = "Au")]
    au: f64,
    #[serde(rename = "W")]
    w: f64,
    risk: Option<f64>,
    #[serde(rename = "D")]
    d: u8,
}

/// Per-candidate utilities of every decision.
pub fn write_csv(log: &EpisodeLog, w: impl Write) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for (s, dec) in log.decisions() {
        for e in dec.recommendation.blackboard.entries() {
            out.serialize(CsvRow {
                step: s.step,
                behavior: e.behaviour.to_string(),
                au: e.autonomy_utility.unwrap_or(f64::NAN),
                w: e.wellbeing_utility.unwrap_or(f64::NAN),
                risk: e.desirability.as_ref().and_then(|d| d.risk),
                d: e.desirability.as_ref().is_some_and(|d| d.desirable) as u8,
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Three rows per step: resident, robot, governor recommendation.
pub fn timeline(log: &EpisodeLog) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "scenario {} (eps={}, d={})\n",
        log.scenario.name, log.scenario.epsilon_m, log.scenario.d
    ));
    out.push_str(&format!(
        "{:>4}  {:<12} {:<30} {}\n",
        "step", "resident", "robot", "governor"
    ));
    for s in &log.steps {
        let resident = s
            .resident
            .map(|i| i.to_string())
            .unwrap_or_else(|| "-".into());
        let robot = match s.robot {
            Activity::Acted(b) => b.to_string(),
            Activity::Snoozing => "(snoozing)".into(),
            Activity::Inspecting => "(inspecting)".into(),
            Activity::ObservedIntake => "(medication taken)".into(),
        };
        let gov = match &s.decision {
            Some(d) => {
                let names: Vec<String> = d
                    .recommendation
                    .desirable
                    .iter()
                    .map(|b| b.to_string())
                    .collect();
                let mut g = format!("{{{}}}", names.join(", "));
                if d.recommendation.fallback {
                    g.push_str(" fallback");
                }
                g
            }
            None => "-".into(),
        };
        out.push_str(&format!(
            "{:>4}  {:<12} {:<30} {}\n",
            s.step, resident, robot, gov
        ));
    }
    out.push_str(&format!("terminal: {}\n", terminal_name(log.terminal)));
    out
}

pub fn terminal_name(t: Terminal) -> &'static str {
    match t {
        Terminal::MedicationTaken => "medication_taken",
        Terminal::Recorded => "recorded",
        Terminal::Reported => "reported",
        Terminal::HorizonReached => "horizon_reached",
    }
}

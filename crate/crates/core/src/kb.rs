//! Expert case base: normalised feature vectors, K-nearest-neighbour
//! retrieval and weighted opinion aggregation.
//!
//! On disk a case base is line-delimited JSON. The first line is a header
//! carrying the format version and the feature manifest; each further line is
//! one case with raw, unnormalised scenario fields. Features are derived at
//! load time so the file stays readable.

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{Behaviour, BehaviourKind, DecisionContext, ReminderState, ValueTag};
use crate::utility::{autonomy_utility, wellbeing_utility, UtilityError};

pub const FORMAT: &str = "psrb-case-base";
pub const FORMAT_VERSION: u32 = 1;
pub const DEFAULT_K: usize = 3;
/// Neighbours at or below this distance count as exact matches.
pub const NEAR_DISTANCE: f64 = 0.1;
pub const NEAR_WEIGHT: f64 = 10.0;
pub const D_CAP: u32 = 4;
pub const F_CAP: u32 = 6;

#[derive(Debug, thiserror::Error)]
pub enum KbError {
    #[error("case base not found: {0}")]
    NotFound(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("bad header: {0}")]
    Header(String),
    #[error("duplicate case id {0:?}")]
    DuplicateId(String),
    #[error("case {id:?}: {msg}")]
    InvalidCase { id: String, msg: String },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("no knowledge: the case base is empty")]
    Empty,
}

/// One named feature dimension and how it is normalised.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub encoding: String,
}

fn dim(name: &str, encoding: &str) -> Dimension {
    Dimension {
        name: name.into(),
        encoding: encoding.into(),
    }
}

/// The feature layout shared by stored cases and queries.
pub fn manifest() -> Vec<Dimension> {
    let mut m = vec![
        dim("epsilon_m", "value/3"),
        dim("d", "min(value,4)/4"),
        dim("f", "min(value,6)/6"),
    ];
    for s in ReminderState::ALL {
        m.push(dim(&format!("reminder_state={}", state_name(s)), "one-hot"));
    }
    m.push(dim("acknowledged_without_taking", "0/1"));
    m.push(dim("instruction_pending", "0/1"));
    for k in BehaviourKind::ALL {
        m.push(dim(&format!("behaviour={k}"), "one-hot"));
    }
    m.push(dim("autonomy_utility", "raw"));
    m.push(dim("wellbeing_utility", "raw"));
    m
}

fn state_name(s: ReminderState) -> &'static str {
    match s {
        ReminderState::Issued => "issued",
        ReminderState::Snoozed => "snoozed",
        ReminderState::Ignored => "ignored",
        ReminderState::Acknowledged => "acknowledged",
    }
}

/// Scenario fields of a case or a query, before normalisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Situation {
    pub epsilon_m: u8,
    pub d: u32,
    pub f: u32,
    pub reminder_state: ReminderState,
    #[serde(default)]
    pub acknowledged_without_taking: bool,
    #[serde(default)]
    pub instruction_pending: bool,
}

impl From<&DecisionContext> for Situation {
    fn from(c: &DecisionContext) -> Self {
        Situation {
            epsilon_m: c.epsilon_m,
            d: c.d,
            f: c.f,
            reminder_state: c.reminder_state,
            acknowledged_without_taking: c.acknowledged_without_taking,
            instruction_pending: c.pending_instruction.is_some(),
        }
    }
}

impl Situation {
    fn context(&self) -> DecisionContext {
        let mut c = DecisionContext::new(self.epsilon_m, self.d);
        c.f = self.f;
        c.reminder_state = self.reminder_state;
        c.acknowledged_without_taking = self.acknowledged_without_taking;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Normalised features; utilities are recomputed from the raw fields.
pub fn encode(s: &Situation, b: &Behaviour) -> Result<FeatureVector, UtilityError> {
    let ctx = s.context();
    let au = autonomy_utility(b, &ctx);
    let (w, _) = wellbeing_utility(b, &ctx)?;
    let mut v = Vec::with_capacity(17);
    v.push(s.epsilon_m as f64 / 3.0);
    v.push(s.d.min(D_CAP) as f64 / D_CAP as f64);
    v.push(s.f.min(F_CAP) as f64 / F_CAP as f64);
    for st in ReminderState::ALL {
        v.push(if st == s.reminder_state { 1.0 } else { 0.0 });
    }
    v.push(s.acknowledged_without_taking as u8 as f64);
    v.push(s.instruction_pending as u8 as f64);
    for k in BehaviourKind::ALL {
        v.push(if k == b.kind { 1.0 } else { 0.0 });
    }
    v.push(au);
    v.push(w);
    Ok(FeatureVector(v))
}

/// Euclidean distance scaled by the square root of the dimension count.
pub fn distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64, KbError> {
    if a.len() != b.len() {
        return Err(KbError::DimensionMismatch(a.len(), b.len()));
    }
    let ss: f64 = a.0.iter().zip(&b.0).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(ss.sqrt() / (a.len() as f64).sqrt())
}

pub fn weight(distance: f64) -> f64 {
    if distance <= NEAR_DISTANCE {
        NEAR_WEIGHT
    } else {
        1.0 / distance
    }
}

/// Stored form of a case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct CaseRecord {
    id: String,
    #[serde(flatten)]
    situation: Situation,
    behaviour: Behaviour,
    acceptability: f64,
    intention: BTreeSet<ValueTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    note: Option<String>,
}

/// An expert-labelled scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub id: String,
    pub situation: Situation,
    pub behaviour: Behaviour,
    pub acceptability: f64,
    pub intention: BTreeSet<ValueTag>,
    pub note: Option<String>,
    features: FeatureVector,
}

impl Case {
    pub fn new(
        id: impl Into<String>,
        situation: Situation,
        behaviour: Behaviour,
        acceptability: f64,
        intention: impl IntoIterator<Item = ValueTag>,
    ) -> Result<Case, KbError> {
        let id = id.into();
        let intention: BTreeSet<ValueTag> = intention.into_iter().collect();
        let bad = |msg: &str| KbError::InvalidCase {
            id: id.clone(),
            msg: msg.into(),
        };
        if !(0.0..=1.0).contains(&acceptability) {
            return Err(bad("acceptability out of [0,1]"));
        }
        if intention.is_empty() {
            return Err(bad("intention must not be empty"));
        }
        if !behaviour.is_well_formed() {
            return Err(bad("obeyed instruction does not match behaviour kind"));
        }
        let features = encode(&situation, &behaviour).map_err(|e| bad(&e.to_string()))?;
        Ok(Case {
            id,
            situation,
            behaviour,
            acceptability,
            intention,
            note: None,
            features,
        })
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    pub fn features(&self) -> &FeatureVector {
        &self.features
    }

    pub fn acceptable(&self) -> bool {
        self.acceptability >= 0.5
    }

    fn record(&self) -> CaseRecord {
        CaseRecord {
            id: self.id.clone(),
            situation: self.situation.clone(),
            behaviour: self.behaviour,
            acceptability: self.acceptability,
            intention: self.intention.clone(),
            note: self.note.clone(),
        }
    }

    fn from_record(r: CaseRecord) -> Result<Case, KbError> {
        let c = Case::new(r.id, r.situation, r.behaviour, r.acceptability, r.intention)?;
        Ok(Case { note: r.note, ..c })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    manifest: Vec<Dimension>,
}

#[derive(Debug, Clone, Copy)]
pub struct Neighbour<'a> {
    pub case: &'a Case,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub case_id: String,
    pub distance: f64,
    pub weight: f64,
}

/// Aggregated expert view of one behaviour in one situation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Opinion {
    pub acceptable: bool,
    pub score: f64,
    pub intentions: BTreeSet<ValueTag>,
    pub trace: Vec<TraceEntry>,
}

impl Opinion {
    /// Stand-in when the case base holds nothing: agree with the rules.
    pub fn agree_with_rules(permissible: bool) -> Opinion {
        Opinion {
            acceptable: permissible,
            score: if permissible { 1.0 } else { 0.0 },
            intentions: BTreeSet::new(),
            trace: Vec::new(),
        }
    }
}

pub fn aggregate_opinion(neighbours: &[Neighbour<'_>]) -> Opinion {
    // sum in id order so the score does not depend on neighbour order
    let mut ordered: Vec<&Neighbour<'_>> = neighbours.iter().collect();
    ordered.sort_by(|a, b| a.case.id.cmp(&b.case.id));
    let (mut num, mut den) = (0.0, 0.0);
    for n in &ordered {
        let w = weight(n.distance);
        num += w * n.case.acceptability;
        den += w;
    }
    let score = if den > 0.0 { num / den } else { 0.0 };
    let acceptable = score >= 0.5;
    let intentions = neighbours
        .iter()
        .filter(|n| n.case.acceptable() == acceptable)
        .flat_map(|n| n.case.intention.iter().copied())
        .collect();
    let trace = neighbours
        .iter()
        .map(|n| TraceEntry {
            case_id: n.case.id.clone(),
            distance: n.distance,
            weight: weight(n.distance),
        })
        .collect();
    Opinion {
        acceptable,
        score,
        intentions,
        trace,
    }
}

#[derive(Debug, Clone, Default)]
pub struct CaseBase {
    cases: Vec<Case>,
    ids: HashSet<String>,
}

impl CaseBase {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cases(cases: impl IntoIterator<Item = Case>) -> Result<Self, KbError> {
        let mut kb = CaseBase::new();
        for c in cases {
            kb.add_case(c)?;
        }
        Ok(kb)
    }

    pub fn add_case(&mut self, case: Case) -> Result<(), KbError> {
        if !self.ids.insert(case.id.clone()) {
            return Err(KbError::DuplicateId(case.id));
        }
        self.cases.push(case);
        Ok(())
    }

    /// Drops every case matching `pred`; returns how many went.
    pub fn remove_where(&mut self, pred: impl Fn(&Case) -> bool) -> usize {
        let before = self.cases.len();
        self.cases.retain(|c| !pred(c));
        self.ids = self.cases.iter().map(|c| c.id.clone()).collect();
        before - self.cases.len()
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn cases(&self) -> &[Case] {
        &self.cases
    }

    pub fn get(&self, id: &str) -> Option<&Case> {
        self.cases.iter().find(|c| c.id == id)
    }

    /// The `k` nearest cases, ascending by distance then id.
    pub fn retrieve(&self, query: &FeatureVector, k: usize) -> Result<Vec<Neighbour<'_>>, KbError> {
        if self.cases.is_empty() {
            return Err(KbError::Empty);
        }
        let mut all = Vec::with_capacity(self.cases.len());
        for c in &self.cases {
            all.push(Neighbour {
                case: c,
                distance: distance(query, &c.features)?,
            });
        }
        all.sort_by(|a, b| {
            a.distance
                .total_cmp(&b.distance)
                .then_with(|| a.case.id.cmp(&b.case.id))
        });
        all.truncate(k);
        Ok(all)
    }

    pub fn opinion(&self, query: &FeatureVector, k: usize) -> Result<Opinion, KbError> {
        Ok(aggregate_opinion(&self.retrieve(query, k)?))
    }

    pub fn load(reader: impl BufRead) -> Result<Self, KbError> {
        let mut kb = CaseBase::new();
        let mut header_seen = false;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let n = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                let h: Header = serde_json::from_str(&line).map_err(|e| KbError::Malformed {
                    line: n,
                    msg: format!("header: {e}"),
                })?;
                if h.format != FORMAT {
                    return Err(KbError::Header(format!("unknown format {:?}", h.format)));
                }
                if h.version != FORMAT_VERSION {
                    return Err(KbError::Header(format!(
                        "unsupported version {}",
                        h.version
                    )));
                }
                if h.manifest != manifest() {
                    return Err(KbError::Header(
                        "feature manifest differs from this build".into(),
                    ));
                }
                header_seen = true;
                continue;
            }
            let r: CaseRecord = serde_json::from_str(&line).map_err(|e| KbError::Malformed {
                line: n,
                msg: e.to_string(),
            })?;
            let case = Case::from_record(r).map_err(|e| KbError::Malformed {
                line: n,
                msg: e.to_string(),
            })?;
            kb.add_case(case).map_err(|e| KbError::Malformed {
                line: n,
                msg: e.to_string(),
            })?;
        }
        if !header_seen {
            return Err(KbError::Header("missing header record".into()));
        }
        Ok(kb)
    }

    pub fn save(&self, mut w: impl Write) -> Result<(), KbError> {
        let h = Header {
            format: FORMAT.into(),
            version: FORMAT_VERSION,
            manifest: manifest(),
        };
        writeln!(
            w,
            "{}",
            serde_json::to_string(&h).expect("header serialises")
        )?;
        for c in &self.cases {
            writeln!(
                w,
                "{}",
                serde_json::to_string(&c.record()).expect("case serialises")
            )?;
        }
        Ok(())
    }

    pub fn load_path(path: impl AsRef<Path>) -> Result<Self, KbError> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => KbError::NotFound(path.display().to_string()),
            _ => KbError::Io(e),
        })?;
        CaseBase::load(std::io::BufReader::new(file))
    }

    pub fn save_path(&self, path: impl AsRef<Path>) -> Result<(), KbError> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.save(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

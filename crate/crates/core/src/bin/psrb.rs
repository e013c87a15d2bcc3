use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use psrb::config::{QuerySpec, ScenarioFile};
use psrb::experiment::{
    calibrate, descriptors, published_target, run_matrix, ConfigError, NamedProfile, ProfilesFile,
    TargetColumn, CASES,
};
use psrb::governor::Governor;
use psrb::kb::{encode, CaseBase, KbError};
use psrb::output::{terminal_name, timeline, write_csv, write_jsonl};
use psrb::sim::{run_episode, BehaviourClassifier};
use psrb::utility::RiskMode;

const EXIT_VALIDATION: u8 = 1;
const EXIT_MISMATCH: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(
    name = "psrb",
    version,
    about = "Rule-bending ethical governor: simulation and experiment harness"
)]
struct Cli {
    /// Reserved: nothing in this tool is random. Setting it is an error.
    #[arg(long, global = true)]
    seed_irrelevant: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Harm,
    Literal,
}

impl From<Mode> for RiskMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Harm => RiskMode::default(),
            Mode::Literal => RiskMode::Literal,
        }
    }
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "data/seed_kb.jsonl")]
    kb: PathBuf,
    #[arg(long, value_enum, default_value = "harm")]
    risk_mode: Mode,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario and write JSONL, CSV and a timeline.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        profile: String,
        #[arg(long, default_value = "data/profiles.toml")]
        profiles: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run all six cases for every profile and diff against the published grid.
    Matrix {
        #[arg(long, default_value = "data/profiles.toml")]
        profiles: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Grid-search slider values reproducing a target grid.
    Calibrate {
        /// `published`, `none` (descriptors only) or a TOML file of targets.
        #[arg(long, default_value = "published")]
        target: String,
        /// Where to write the chosen profiles.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        cap: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Show the nearest expert cases for one query.
    KbTrace {
        #[arg(long)]
        query: PathBuf,
        #[arg(long, default_value_t = psrb::kb::DEFAULT_K)]
        k: usize,
        #[arg(long, default_value = "data/seed_kb.jsonl")]
        kb: PathBuf,
    },
    /// Check input files without running anything.
    Validate {
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        scenario: Vec<PathBuf>,
        #[arg(long)]
        kb: Option<PathBuf>,
        #[arg(long)]
        query: Option<PathBuf>,
    },
}

struct Failure(u8, String);

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        let code = match e {
            ConfigError::Io { .. } => EXIT_RUNTIME,
            _ => EXIT_VALIDATION,
        };
        Failure(code, e.to_string())
    }
}

impl From<KbError> for Failure {
    fn from(e: KbError) -> Self {
        let code = match e {
            KbError::Malformed { .. }
            | KbError::Header(_)
            | KbError::DuplicateId(_)
            | KbError::InvalidCase { .. } => EXIT_VALIDATION,
            _ => EXIT_RUNTIME,
        };
        Failure(code, e.to_string())
    }
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure(EXIT_RUNTIME, e.to_string())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    std::fs::write(path, bytes).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.seed_irrelevant {
        eprintln!("error: --seed-irrelevant is reserved; this tool has no randomness to seed");
        return ExitCode::from(EXIT_VALIDATION);
    }
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Run {
            scenario,
            profile,
            profiles,
            out,
            common,
        } => {
            let scenario = ScenarioFile::load(&scenario)?;
            let pf = ProfilesFile::load(&profiles)?;
            let p = pf.get(&profile).ok_or_else(|| {
                Failure(
                    EXIT_VALIDATION,
                    format!("profile {profile:?} not in {}", profiles.display()),
                )
            })?;
            let kb = CaseBase::load_path(&common.kb)?;
            let gov = Governor::new(&kb).with_risk_mode(common.risk_mode.into());
            let log = run_episode(&scenario, p, &gov).map_err(runtime)?;
            let id = BehaviourClassifier::new().classify(&log);
            create_dir(&out)?;
            let stem = format!("{}-{}", scenario.name, profile);
            let mut jsonl = Vec::new();
            write_jsonl(&log, id, &mut jsonl).map_err(runtime)?;
            write_file(&out.join(format!("{stem}.jsonl")), &jsonl)?;
            let mut csv = Vec::new();
            write_csv(&log, &mut csv).map_err(runtime)?;
            write_file(&out.join(format!("{stem}.csv")), &csv)?;
            let text = timeline(&log);
            write_file(&out.join(format!("{stem}.txt")), text.as_bytes())?;
            print!("{text}");
            println!("behaviour class: {id} ({})", terminal_name(log.terminal));
            Ok(())
        }
        Cmd::Matrix {
            profiles,
            out,
            common,
        } => {
            let pf = ProfilesFile::load(&profiles)?;
            let kb = CaseBase::load_path(&common.kb)?;
            let m = run_matrix(&kb, &pf, common.risk_mode.into()).map_err(runtime)?;
            let names: Vec<String> = pf.profiles.iter().map(|p| p.name.clone()).collect();
            let grid = m.render(&names);
            let diff = m.diff();
            let mut diff_text = String::new();
            for c in &diff {
                diff_text.push_str(&format!(
                    "case {} {}: expected {} got {}\n",
                    c.case_id,
                    c.profile,
                    c.expected.map(|e| e.to_string()).unwrap_or_default(),
                    c.actual
                ));
            }
            for (id, sig) in &m.synthetic {
                diff_text.push_str(&format!("class {id}: {sig}\n"));
            }
            create_dir(&out)?;
            write_file(&out.join("matrix.txt"), grid.as_bytes())?;
            write_file(&out.join("matrix.diff"), diff_text.as_bytes())?;
            print!("{grid}");
            if diff.is_empty() {
                println!("{}/{} cells match", m.cells.len(), m.cells.len());
                Ok(())
            } else {
                print!("{diff_text}");
                Err(Failure(
                    EXIT_MISMATCH,
                    format!("{} of {} cells differ", diff.len(), m.cells.len()),
                ))
            }
        }
        Cmd::Calibrate {
            target,
            out,
            cap,
            common,
        } => {
            let kb = CaseBase::load_path(&common.kb)?;
            let targets = load_targets(&target)?;
            let mut chosen = Vec::new();
            let mut missed = false;
            for desc in descriptors() {
                let Some(t) = targets
                    .iter()
                    .find(|(n, _)| n == desc.name)
                    .map(|(_, t)| *t)
                else {
                    continue;
                };
                let cal = calibrate(&kb, &desc, &t, common.risk_mode.into(), cap.max(1))
                    .map_err(runtime)?;
                println!("{}: {} configurations evaluated", cal.name, cal.evaluated);
                for s in &cal.solutions {
                    println!("  solution c_w={} c_au={} c_rp={}", s.c_w, s.c_au, s.c_rp);
                }
                match (cal.chosen(), &cal.nearest_miss) {
                    (Some(c), _) => chosen.push(NamedProfile {
                        name: cal.name.clone(),
                        profile: desc.profile(c.c_w, c.c_au, c.c_rp),
                    }),
                    (None, Some(n)) => {
                        missed = true;
                        println!(
                            "  no solution; nearest miss c_w={} c_au={} c_rp={} matched {}/{} cells, classes {:?}",
                            n.c_w,
                            n.c_au,
                            n.c_rp,
                            n.matched,
                            t.iter().flatten().count(),
                            n.outcome
                        );
                    }
                    (None, None) => {
                        missed = true;
                        println!("  no configuration satisfies the descriptor");
                    }
                }
            }
            let pf = ProfilesFile::new(chosen);
            if let Some(path) = out {
                write_file(&path, pf.to_toml().as_bytes())?;
            } else {
                print!("{}", pf.to_toml());
            }
            if missed {
                Err(Failure(
                    EXIT_MISMATCH,
                    "calibration found no configuration for some profiles".into(),
                ))
            } else {
                Ok(())
            }
        }
        Cmd::KbTrace { query, k, kb } => {
            let q = QuerySpec::load(&query)?;
            let kb = CaseBase::load_path(&kb)?;
            if kb.is_empty() {
                println!("no knowledge: the case base is empty");
                return Ok(());
            }
            let fv = encode(&q.situation, &q.behaviour)
                .map_err(|e| Failure(EXIT_VALIDATION, e.to_string()))?;
            let op = kb.opinion(&fv, k)?;
            println!("{:<36} {:>10} {:>8}", "case", "distance", "weight");
            for t in &op.trace {
                println!("{:<36} {:>10.6} {:>8.4}", t.case_id, t.distance, t.weight);
            }
            let tags: Vec<&str> = op.intentions.iter().map(|t| t.as_str()).collect();
            println!(
                "score {:.6} -> {}; intentions: {}",
                op.score,
                if op.acceptable {
                    "acceptable"
                } else {
                    "unacceptable"
                },
                tags.join(", ")
            );
            Ok(())
        }
        Cmd::Validate {
            profiles,
            scenario,
            kb,
            query,
        } => {
            if profiles.is_none() && scenario.is_empty() && kb.is_none() && query.is_none() {
                return Err(Failure(EXIT_VALIDATION, "nothing to validate".into()));
            }
            if let Some(p) = profiles {
                let pf = ProfilesFile::load(&p)?;
                println!("{}: ok ({} profiles)", p.display(), pf.profiles.len());
            }
            for s in scenario {
                ScenarioFile::load(&s)?;
                println!("{}: ok", s.display());
            }
            if let Some(k) = kb {
                let base = CaseBase::load_path(&k)?;
                println!("{}: ok ({} cases)", k.display(), base.len());
            }
            if let Some(q) = query {
                QuerySpec::load(&q)?;
                println!("{}: ok", q.display());
            }
            Ok(())
        }
    }
}

/// Target file format: `[targets]` table mapping profile name to six
/// classes, 0 meaning "any".
fn load_targets(spec: &str) -> Result<Vec<(String, TargetColumn)>, Failure> {
    let names = descriptors().into_iter().map(|d| d.name.to_string());
    match spec {
        "published" => Ok(names
            .map(|n| (n.clone(), published_target(&n).expect("known profile")))
            .collect()),
        "none" => Ok(names.map(|n| (n, [None; 6])).collect()),
        path => {
            #[derive(serde::Deserialize)]
            struct TargetFile {
                targets: std::collections::BTreeMap<String, Vec<u32>>,
            }
            let text =
                std::fs::read_to_string(path).map_err(|e| runtime(format!("{path}: {e}")))?;
            let tf: TargetFile =
                toml::from_str(&text).map_err(|e| Failure(EXIT_VALIDATION, e.to_string()))?;
            let mut out = Vec::new();
            for (name, classes) in tf.targets {
                if classes.len() != CASES.len() {
                    return Err(Failure(
                        EXIT_VALIDATION,
                        format!("{name}: expected {} classes", CASES.len()),
                    ));
                }
                let col: TargetColumn =
                    std::array::from_fn(|i| (classes[i] != 0).then_some(classes[i]));
                out.push((name, col));
            }
            Ok(out)
        }
    }
}

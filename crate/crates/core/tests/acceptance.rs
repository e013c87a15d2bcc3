//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::collections::BTreeSet;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use psrb::blackboard::Entry;
use psrb::evaluator::{evaluate, render_explanation, thresholds, Branch, ExplanationKind};
use psrb::experiment::{run_matrix, ProfilesFile, CASES, EXPECTED, PROFILE_NAMES};
use psrb::governor::Governor;
use psrb::kb::{weight, Case, CaseBase, Opinion, Situation};
use psrb::model::{
    Behaviour, BehaviourKind, CharacterProfile, DecisionContext, Instruction, ReminderState,
    ValueTag, HORIZON,
};
use psrb::output::{read_jsonl_steps, write_jsonl};
use psrb::rules::RuleVerdict;
use psrb::sim::{behaviour_id, run_episode, Activity, EpisodeLog, Scenario, Terminal};
use psrb::utility::{
    autonomy_utility, behaviour_risk, gamma_pdf, pmax_util, scale_param, shape_param, GammaSpec,
    RiskMode, DEFAULT_HARM_SCALE, RESTRAINT_UTILITY,
};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn seed_kb() -> CaseBase {
    CaseBase::load_path(common::data_dir().join("seed_kb.jsonl")).expect("seed case base")
}

fn profiles() -> ProfilesFile {
    ProfilesFile::load(&common::data_dir().join("profiles.toml")).expect("profiles")
}

fn table_reproduction() -> Check {
    let kb = seed_kb();
    let pf = profiles();
    let t0 = Instant::now();
    let m = run_matrix(&kb, &pf, RiskMode::default()).map_err(|e| e.to_string())?;
    let elapsed = t0.elapsed();
    ensure(m.cells.len() == 24, || format!("{} cells", m.cells.len()))?;
    for (r, case) in CASES.iter().enumerate() {
        for (c, name) in PROFILE_NAMES.iter().enumerate() {
            let got = m
                .get(case.id, name)
                .ok_or(format!("missing cell {} {name}", case.id))?;
            ensure(got == EXPECTED[r][c], || {
                format!(
                    "case {} {name}: expected {} got {got}",
                    case.id, EXPECTED[r][c]
                )
            })?;
        }
    }
    ensure(elapsed.as_secs_f64() < 10.0, || format!("took {elapsed:?}"))?;
    Ok(format!("24/24 cells in {:.3}s", elapsed.as_secs_f64()))
}

fn autonomy_exactness() -> Check {
    let mut n = 0;
    for kind in BehaviourKind::ALL {
        for tag in [
            None,
            Some(Instruction::Snooze),
            Some(Instruction::Acknowledge),
        ] {
            let b = Behaviour { kind, obeys: tag };
            if !b.is_well_formed() {
                continue;
            }
            for f in 0..=60u32 {
                let expected = match (tag, kind) {
                    (Some(_), _) => 1.0,
                    (None, BehaviourKind::Record) => 0.5,
                    (None, BehaviourKind::FollowUp) => -0.1 * f as f64,
                    (None, BehaviourKind::Report) => -0.7,
                    (None, _) => 0.0,
                };
                // the value must not depend on anything but (kind, tag, f)
                for eps in 1..=3u8 {
                    for d in [0, 2, 7] {
                        for awt in [false, true] {
                            let mut ctx = DecisionContext::new(eps, d);
                            ctx.f = f;
                            ctx.acknowledged_without_taking = awt;
                            if awt {
                                ctx.reminder_state = ReminderState::Acknowledged;
                                ctx.last_instruction = Some(Instruction::Acknowledge);
                            }
                            let got = autonomy_utility(&b, &ctx);
                            ensure(got == expected, || {
                                format!("{b} f={f}: {got} != {expected}")
                            })?;
                            n += 1;
                        }
                    }
                }
            }
        }
    }
    ensure(RESTRAINT_UTILITY == -1.0, || "restraint constant".into())?;
    Ok(format!("{n} lattice points exact"))
}

fn gamma_fidelity() -> Check {
    let text = std::fs::read_to_string(common::test_data("gamma_pdf_mp.json"))
        .map_err(|e| e.to_string())?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let samples = v["samples"].as_array().ok_or("samples")?;
    ensure(samples.len() == 1000, || {
        format!("{} samples", samples.len())
    })?;
    let mut worst: f64 = 0.0;
    for s in samples {
        let num = |i: usize| s[i].as_str().unwrap().parse::<f64>().unwrap();
        let (x, a, b, reference) = (num(0), num(1), num(2), num(3));
        let got = gamma_pdf(x, &GammaSpec::new(a, b).unwrap());
        let err = (got - reference).abs();
        worst = worst.max(err);
        ensure(err <= 1e-9, || {
            format!("x={x} a={a} b={b}: {got} vs {reference}")
        })?;
    }
    // normalisation over the full support for every reachable spec,
    // substituting x = v + beta*u^2 to smooth the left edge
    let mut specs = Vec::new();
    for eps in 1..=3u8 {
        for d in [0.0, 2.0] {
            for f in 0..=6 {
                let f = f as f64;
                for dose in [d + f / 8.0, d + f / 3.0, d + f / 4.0, d + 1.0] {
                    specs.push(GammaSpec::for_dose(eps, dose).unwrap());
                }
            }
        }
    }
    let mut worst_norm: f64 = 0.0;
    for spec in &specs {
        let u_max = (spec.alpha + 80.0).sqrt();
        let n = 40_000;
        let h = u_max / n as f64;
        let g = |u: f64| gamma_pdf(spec.v + spec.beta * u * u, spec) * 2.0 * spec.beta * u;
        let mut sum = g(0.0) + g(u_max);
        for i in 1..n {
            sum += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let integral = sum * h / 3.0;
        worst_norm = worst_norm.max((integral - 1.0).abs());
        ensure((integral - 1.0).abs() <= 1e-6, || {
            format!("{spec:?} integrates to {integral}")
        })?;
    }
    Ok(format!(
        "max |err| {worst:.1e} over 1000 samples; {} specs normalised within {worst_norm:.1e}",
        specs.len()
    ))
}

fn shape_scale() -> Check {
    for (e, want) in [(1u8, 10.0), (2, 4.5), (3, 1.65)] {
        let got = shape_param(e).map_err(|x| x.to_string())?;
        ensure((got - want).abs() <= 1e-12, || {
            format!("alpha({e}) = {got}")
        })?;
    }
    let got = scale_param(0.0);
    let want = (-2.65f64).exp() + 0.01;
    ensure((got - want).abs() <= 1e-12, || format!("beta(0) = {got}"))?;
    ensure(shape_param(0).is_err() && shape_param(4).is_err(), || {
        "out-of-range impact accepted".into()
    })?;
    Ok(format!("alpha = 10, 4.5, 1.65; beta(0) = {got:.6}"))
}

fn pmax_checks() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&(0.5f64..=12.0, 0.005f64..=0.2), |(a, b)| {
            let got = pmax_util(&GammaSpec::new(a, b).unwrap());
            let want = common::grid_argmax(a, b);
            prop_assert_eq!(got, want, "alpha={} beta={}", a, b);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    for eps in 1..=3u8 {
        let mut prev = f64::INFINITY;
        for i in 0..=16 {
            let dose = i as f64 * 0.25;
            let p = pmax_util(&GammaSpec::for_dose(eps, dose).unwrap());
            ensure(p <= prev, || format!("eps {eps}: rises at dose {dose}"))?;
            prev = p;
        }
    }
    for i in 0..=16 {
        let dose = i as f64 * 0.25;
        let ps: Vec<f64> = (1..=3u8)
            .map(|e| pmax_util(&GammaSpec::for_dose(e, dose).unwrap()))
            .collect();
        ensure(ps[0] >= ps[1] && ps[1] >= ps[2], || {
            format!("dose {dose}: {ps:?} not non-increasing in impact")
        })?;
    }
    Ok("500 random specs match grid argmax; monotone in dose and impact".into())
}

fn threshold_checks() -> Check {
    for cw in 0..=10 {
        for cau in 0..=10 {
            for crp in 0..=10 {
                let p = CharacterProfile::new(cw as f64, cau as f64, crp as f64);
                let t = thresholds(&p);
                let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
                ensure(
                    close(t.t_positive_w, (10.0 - cw as f64) / 10.0)
                        && close(t.t_negative_w, (cw as f64 - 10.0) / 10.0)
                        && close(t.t_positive_au, (10.0 - cau as f64) / 10.0)
                        && close(t.t_negative_au, (cau as f64 - 10.0) / 10.0)
                        && close(t.risk_threshold, common::risk_threshold(crp as f64)),
                    || format!("{p:?}"),
                )?;
            }
        }
    }
    let r0 = thresholds(&CharacterProfile::new(0.0, 0.0, 0.0)).risk_threshold;
    ensure(r0 == 0.0, || format!("risk_threshold(0) = {r0}"))?;
    let rs: Vec<f64> = (0..=10)
        .map(|c| thresholds(&CharacterProfile::new(5.0, 5.0, c as f64)).risk_threshold)
        .collect();
    ensure(rs.windows(2).all(|w| w[1] > w[0]), || {
        format!("not strictly increasing: {rs:?}")
    })?;
    Ok(format!(
        "1331 profiles exact; risk_threshold(10) = {:.4}",
        rs[10]
    ))
}

fn arb_entry() -> impl Strategy<Value = (Entry, CharacterProfile)> {
    (
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
        any::<bool>(),
        -1.0f64..=1.0,
        -1.0f64..=1.5,
        0.5f64..=12.0,
        0.005f64..=0.2,
        (0.0f64..=10.0, 0.0f64..=10.0, 0.0f64..=10.0),
    )
        .prop_map(
            |(broken, acceptable, iw, ia, au, w, a, b, (cw, cau, crp))| {
                let mut e = Entry::new(Behaviour::RECORD);
                e.rule_verdict = Some(RuleVerdict {
                    violated_rule_ids: if broken { vec![2] } else { vec![] },
                });
                e.autonomy_utility = Some(au);
                e.wellbeing_utility = Some(w);
                e.wellbeing_distribution = Some(GammaSpec::new(a, b).unwrap());
                let mut intentions = BTreeSet::new();
                if iw {
                    intentions.insert(ValueTag::Wellbeing);
                }
                if ia {
                    intentions.insert(ValueTag::Autonomy);
                }
                e.kb_opinion = Some(Opinion {
                    acceptable,
                    score: acceptable as u8 as f64,
                    intentions,
                    trace: vec![],
                });
                (e, CharacterProfile::new(cw, cau, crp))
            },
        )
}

fn psrb_properties() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let mode = RiskMode::default();
    runner
        .run(
            &(arb_entry(), 0.0f64..=10.0, 0.0f64..=1.0),
            |((e, p), bump, frac)| {
                let d = evaluate(&e, &p, mode).map_err(|x| TestCaseError::fail(x.to_string()))?;
                let acceptable = e.kb_opinion.as_ref().unwrap().acceptable;
                let broken = !e.rule_verdict.as_ref().unwrap().permissible();
                // (iv) totality: exactly the branch the table prescribes
                let want = match (acceptable, broken) {
                    (true, false) => Branch::CompliantSupported,
                    (false, true) => Branch::NoncompliantUnsupported,
                    (true, true) => Branch::BendEvaluated,
                    (false, false) => Branch::SuppressEvaluated,
                };
                prop_assert_eq!(d.branch, want);
                // (i) no bending without expert support
                if broken && !acceptable {
                    prop_assert!(!d.desirable);
                }
                if matches!(d.branch, Branch::BendEvaluated | Branch::SuppressEvaluated) {
                    prop_assert!(d.explanation.as_ref().is_some_and(|s| !s.is_empty()));
                }
                if d.desirable {
                    // (ii) more risk tolerance never revokes approval
                    let mut bolder = p.clone();
                    bolder.c_rp = p.c_rp + (10.0 - p.c_rp) * frac;
                    prop_assert!(evaluate(&e, &bolder, mode).unwrap().desirable);
                    // (iii) caring more about an intended value never revokes a bend
                    if d.branch == Branch::BendEvaluated {
                        for v in e.kb_opinion.as_ref().unwrap().intentions.iter() {
                            let mut keener = p.clone();
                            match v {
                                ValueTag::Wellbeing => keener.c_w = (p.c_w + bump).min(10.0),
                                ValueTag::Autonomy => keener.c_au = (p.c_au + bump).min(10.0),
                            }
                            prop_assert!(evaluate(&e, &keener, mode).unwrap().desirable);
                        }
                    }
                }
                Ok(())
            },
        )
        .map_err(|e| e.to_string())?;
    Ok("10000 random blackboard entries, no violations".into())
}

fn random_case(id: usize, rng: &mut impl FnMut(u32) -> u32) -> Case {
    let kinds = [
        Behaviour::REMIND,
        Behaviour::obeying(Instruction::Snooze),
        Behaviour::obeying(Instruction::Acknowledge),
        Behaviour::FOLLOW_UP,
        Behaviour::RECORD,
        Behaviour::REPORT,
        Behaviour::plain(BehaviourKind::Snooze),
    ];
    let situation = Situation {
        epsilon_m: 1 + rng(3) as u8,
        d: rng(6),
        f: rng(8),
        reminder_state: ReminderState::ALL[rng(4) as usize],
        acknowledged_without_taking: rng(2) == 1,
        instruction_pending: rng(2) == 1,
    };
    let b = kinds[rng(kinds.len() as u32) as usize];
    let tags = if rng(2) == 1 {
        vec![ValueTag::Wellbeing]
    } else {
        vec![ValueTag::Autonomy]
    };
    Case::new(format!("r{id:04}"), situation, b, rng(2) as f64, tags).unwrap()
}

fn oracle_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    s.sqrt() / (a.len() as f64).sqrt()
}

fn knn_oracle() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(
            &(1usize..=500, any::<u64>(), 1usize..=7),
            |(size, seed, k)| {
                let mut state = seed | 1;
                let mut rng = move |n: u32| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    (state % n as u64) as u32
                };
                let cases: Vec<Case> = (0..size).map(|i| random_case(i, &mut rng)).collect();
                let query = random_case(9999, &mut rng);
                let kb = CaseBase::from_cases(cases.clone()).unwrap();
                let got: Vec<(String, f64)> = kb
                    .retrieve(query.features(), k)
                    .unwrap()
                    .into_iter()
                    .map(|n| (n.case.id.clone(), n.distance))
                    .collect();
                let mut all: Vec<(String, f64)> = cases
                    .iter()
                    .map(|c| {
                        (
                            c.id.clone(),
                            oracle_distance(&c.features().0, &query.features().0),
                        )
                    })
                    .collect();
                all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then_with(|| a.0.cmp(&b.0)));
                all.truncate(k);
                prop_assert_eq!(got, all);
                Ok(())
            },
        )
        .map_err(|e| e.to_string())?;
    ensure(weight(0.1) == 10.0 && weight(0.5) == 2.0, || {
        "weight boundary".into()
    })?;
    Ok("200 random bases match brute-force nearest-k; weight(0.1)=10, weight(0.5)=2".into())
}

const TEMPLATES: [&str; 6] = [
    "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. Since it increases <intentions> values greatly, while not reducing the other values <other_values> by a considerable amount, and the outcome is within accepted risk levels, deemed accepted by the PSRB system.",
    "The action does not break any rules. However, this action in this context is considered undesirable by experts. Since the action outcomes introduce a high risk, deemed not accepted by the PSRB system.",
    "The action does not break any rules. However, this action in this context is considered undesirable by experts. Since it decreases <intentions> values by a considerable amount, the action is deemed unacceptable by the system",
    "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. Although the value tradeoff is satisfactory, the risk taken by the action is not acceptable to bend the rule.",
    "The action breaks the rules <rule_ids>. However, this action in this context is considered desirable by experts. But, the PSRB system suggests that the value tradeoff is not satisfactory to bend the rule.",
    "The action does not break any rules. However, this action in this context is considered undesirable by experts. But, the PSRB system suggests that the value tradeoff is not satisfactory to bend the rule.",
];

fn explanation_fidelity() -> Check {
    let tagsets: [&[ValueTag]; 4] = [
        &[],
        &[ValueTag::Wellbeing],
        &[ValueTag::Autonomy],
        &[ValueTag::Wellbeing, ValueTag::Autonomy],
    ];
    let names = |t: &[ValueTag]| {
        if t.is_empty() {
            "none".to_string()
        } else {
            t.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(", ")
        }
    };
    let mut n = 0;
    for (i, tpl) in TEMPLATES.iter().enumerate() {
        let kind = ExplanationKind::from_number(i as u8 + 1).ok_or("template number")?;
        for ids in [&[][..], &[1][..], &[1, 2][..]] {
            for it in tagsets {
                for ot in tagsets {
                    let want = tpl
                        .replace(
                            "<rule_ids>",
                            &if ids.is_empty() {
                                "none".to_string()
                            } else {
                                ids.iter()
                                    .map(|x| x.to_string())
                                    .collect::<Vec<_>>()
                                    .join(", ")
                            },
                        )
                        .replace("<intentions>", &names(it))
                        .replace("<other_values>", &names(ot));
                    let got = render_explanation(
                        kind,
                        ids,
                        &it.iter().copied().collect(),
                        &ot.iter().copied().collect(),
                    );
                    ensure(got == want, || format!("template {}: {got:?}", i + 1))?;
                    n += 1;
                }
            }
        }
    }
    ensure(ExplanationKind::from_number(7).is_none(), || {
        "unknown outcome accepted".into()
    })?;
    // every template is reachable through the evaluator
    let kb = seed_kb();
    let pf = profiles();
    let gov = Governor::new(&kb);
    let mut seen = BTreeSet::new();
    for case in CASES {
        for np in &pf.profiles {
            let log =
                run_episode(&case.scenario(), &np.profile, &gov).map_err(|e| e.to_string())?;
            for (_, d) in log.decisions() {
                for e in d.recommendation.blackboard.entries() {
                    let des = e.desirability.as_ref().unwrap();
                    if let (Some(k), Some(text)) = (des.explanation_kind, &des.explanation) {
                        let body = TEMPLATES[k.number() as usize - 1];
                        let prefix = body.split('<').next().unwrap();
                        ensure(text.starts_with(prefix), || format!("{text:?}"))?;
                        seen.insert(k.number());
                    }
                }
            }
        }
    }
    Ok(format!(
        "{n} renderings byte-exact; templates seen in the experiment: {seen:?}"
    ))
}

fn jsonl(log: &EpisodeLog) -> Vec<u8> {
    let mut out = Vec::new();
    write_jsonl(log, behaviour_id(log), &mut out).unwrap();
    out
}

fn determinism_replay() -> Check {
    let kb = seed_kb();
    let pf = profiles();
    let mut replayed = 0;
    let mut scenarios: Vec<Scenario> = CASES.iter().map(|c| c.scenario()).collect();
    for name in ["always-snooze", "takes-medication"] {
        let path = common::data_dir().join(format!("scenarios/{name}.toml"));
        scenarios.push(psrb::config::ScenarioFile::load(&path).map_err(|e| e.to_string())?);
    }
    for mode in [RiskMode::default(), RiskMode::Literal] {
        let gov = Governor::new(&kb).with_risk_mode(mode);
        for s in &scenarios {
            for np in &pf.profiles {
                let a = jsonl(&run_episode(s, &np.profile, &gov).map_err(|e| e.to_string())?);
                let b = jsonl(&run_episode(s, &np.profile, &gov).map_err(|e| e.to_string())?);
                ensure(a == b, || format!("{} {}: logs differ", s.name, np.name))?;
                let steps = read_jsonl_steps(std::str::from_utf8(&a).unwrap())
                    .map_err(|e| e.to_string())?;
                for st in &steps {
                    let Some(dec) = &st.decision else { continue };
                    for e in dec.recommendation.blackboard.entries() {
                        let mut fresh = e.clone();
                        let stored = fresh.desirability.take().ok_or("no desirability")?;
                        let again =
                            evaluate(&fresh, &np.profile, mode).map_err(|x| x.to_string())?;
                        ensure(again == stored, || {
                            format!("step {} {}: replay differs", st.step, e.behaviour)
                        })?;
                        replayed += 1;
                    }
                }
            }
        }
    }
    Ok(format!(
        "{} runs byte-identical; {replayed} decisions replayed from JSONL",
        scenarios.len() * 4 * 2
    ))
}

fn timing_rules() -> Check {
    let kb = seed_kb();
    let pf = profiles();
    let gov = Governor::new(&kb);
    let load = |n: &str| {
        psrb::config::ScenarioFile::load(&common::data_dir().join(format!("scenarios/{n}.toml")))
    };
    let always_snooze = load("always-snooze").map_err(|e| e.to_string())?;
    let takes = load("takes-medication").map_err(|e| e.to_string())?;
    let mut logs = Vec::new();
    for np in &pf.profiles {
        for s in CASES
            .iter()
            .map(|c| c.scenario())
            .chain([always_snooze.clone(), takes.clone()])
        {
            logs.push(run_episode(&s, &np.profile, &gov).map_err(|e| e.to_string())?);
        }
    }
    let at = |log: &EpisodeLog, step: u32| log.steps.iter().find(|s| s.step == step).cloned();
    for log in &logs {
        ensure(log.steps.len() as u32 <= HORIZON, || {
            "beyond horizon".into()
        })?;
        ensure(
            log.steps.windows(2).all(|w| w[1].step == w[0].step + 1),
            || "step gap".into(),
        )?;
        let last = log.steps.last().unwrap().step;
        for s in &log.steps {
            if let Activity::Acted(b) = s.robot {
                let window = match b.kind {
                    BehaviourKind::Snooze => Some((3, Activity::Snoozing)),
                    BehaviourKind::AcknowledgeWait => Some((2, Activity::Inspecting)),
                    _ => None,
                };
                if let Some((n, act)) = window {
                    for k in 1..=n {
                        if let Some(next) = at(log, s.step + k) {
                            let ok = next.robot == act
                                || (next.robot == Activity::ObservedIntake
                                    && act == Activity::Inspecting);
                            ensure(ok && next.decision.is_none(), || {
                                format!("{}: step {} busy", log.scenario.name, s.step + k)
                            })?;
                        }
                    }
                    if let Some(next) = at(log, s.step + n + 1) {
                        ensure(next.decision.is_some(), || {
                            format!("{}: no decision after window", log.scenario.name)
                        })?;
                    }
                }
                let reminds = matches!(b.kind, BehaviourKind::Remind | BehaviourKind::FollowUp);
                if reminds && s.step < last {
                    ensure(at(log, s.step + 1).unwrap().resident.is_some(), || {
                        "reminder unanswered".into()
                    })?;
                }
            }
            if s.resident.is_some() {
                let prev = at(log, s.step - 1).ok_or("response without a step before")?;
                let ok = matches!(prev.robot, Activity::Acted(b) if matches!(b.kind, BehaviourKind::Remind | BehaviourKind::FollowUp));
                ensure(ok, || {
                    format!("response at {} not preceded by a reminder", s.step)
                })?;
            }
        }
    }
    // expansion happens when the third follow-up has gone unanswered
    for log in logs.iter().filter(|l| l.scenario.name == "always-snooze") {
        let mut expanded_at = None;
        for (s, d) in log.decisions() {
            if d.context.pending_instruction.is_some() {
                continue;
            }
            if d.recommendation.candidates.len() == 3 {
                expanded_at = Some((s.step, d.context.f));
                break;
            }
            ensure(d.recommendation.candidates.len() == 1, || {
                "early expansion".into()
            })?;
        }
        let (step, f) = expanded_at.ok_or("never expanded")?;
        ensure(f == 3, || format!("expanded at f={f}"))?;
        ensure(step == 21, || format!("expanded at step {step}"))?;
    }
    let horizon_runs: Vec<&EpisodeLog> = logs
        .iter()
        .filter(|l| l.terminal == Terminal::HorizonReached)
        .collect();
    ensure(!horizon_runs.is_empty(), || {
        "no run reached the horizon".into()
    })?;
    for l in &horizon_runs {
        ensure(l.steps.last().unwrap().step == HORIZON, || {
            "horizon run ended early".into()
        })?;
    }
    for l in logs
        .iter()
        .filter(|l| l.scenario.name == "takes-medication")
    {
        ensure(l.terminal == Terminal::MedicationTaken, || {
            format!("{:?}", l.terminal)
        })?;
        ensure(l.steps.last().unwrap().step == 8, || {
            "intake not seen on the first inspection step".into()
        })?;
    }
    Ok(format!("{} logs: 3-step snooze, 2-step inspection, 1-step lag, expansion at f=3 (step 21), horizon {HORIZON}", logs.len()))
}

fn risk_discrimination() -> Check {
    let mode = RiskMode::default();
    let scale = DEFAULT_HARM_SCALE;
    let risk = |eps: u8, dose: f64| -> Result<f64, String> {
        let spec = GammaSpec::for_dose(eps, dose).unwrap();
        let lib = behaviour_risk(&spec, mode);
        let oracle = scale * common::harm_scan(common::shape(eps), common::scale(dose));
        ensure((lib - oracle).abs() <= 1e-9, || {
            format!("eps {eps} dose {dose}: {lib} vs {oracle}")
        })?;
        Ok(oracle)
    };
    let (lo, hi) = (common::risk_threshold(1.0), common::risk_threshold(10.0));
    let rec = risk(1, 1.0)?;
    ensure(rec < hi && rec > lo, || {
        format!("case-1 record risk {rec} not in ({lo}, {hi})")
    })?;
    let mut min3 = f64::INFINITY;
    for d in [0.0, 2.0] {
        for f in 0..=6 {
            let f = f as f64;
            for dose in [d + f / 8.0, d + f / 3.0, d + f / 4.0, d + 1.0] {
                min3 = min3.min(risk(3, dose)?);
            }
        }
    }
    ensure(min3 > hi, || format!("impact-3 risk {min3} below {hi}"))?;
    Ok(format!(
        "case-1 record {rec:.4} in ({lo:.4}, {hi:.4}); impact-3 minimum {min3:.4} > {hi:.4}"
    ))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "behaviour matrix reproduces the published grid",
            table_reproduction,
        ),
        (
            "autonomy utility exact on the input lattice",
            autonomy_exactness,
        ),
        (
            "gamma density matches high-precision oracle and normalises",
            gamma_fidelity,
        ),
        ("shape and scale formulas", shape_scale),
        (
            "most probable utility: grid argmax and monotone skew",
            pmax_checks,
        ),
        ("evaluator thresholds", threshold_checks),
        ("rule-bending evaluator properties", psrb_properties),
        ("nearest-neighbour retrieval equals brute force", knn_oracle),
        (
            "explanations byte-match the templates",
            explanation_fidelity,
        ),
        ("determinism and blackboard replay", determinism_replay),
        ("timing rules visible in logs", timing_rules),
        ("harm-risk discrimination", risk_discrimination),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

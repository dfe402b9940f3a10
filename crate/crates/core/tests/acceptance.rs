//! One PASS/FAIL line per acceptance criterion. Exits non-zero if any fail.

mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bevalkit_core::eval::{check_po, eval_predicate, EvalParams, Reason, Verdict};
use bevalkit_core::pipeline::{gain, render_csv, render_report, run_pipeline, PipelineOptions, PipelineReport};
use bevalkit_core::prover::{normalize, prove, Force};
use bevalkit_core::rules::{make_rule, render_rule, render_user_pass, FixedClock, PassEntry, Rule, UserPass};
use bevalkit_core::store::{Group, ProofObligation, StoreError, Workspace};
use bevalkit_core::syntax::{parse_predicate, render, DefinitionTable};
use common::{oracle, random_ast, random_instance};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Check = fn() -> Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

const STAMP: &str = "Thu Jun 27 18:02:32 BRT 2013";

const GOLDEN_RULE: &str = "THEORY RulesProBAssertionLemmas_1 IS \n  /* Expression from (AssertionLemmas_1), it was added  in Thu Jun 27 18:02:32 BRT 2013\n  evaluated with ProB in 5913 milliseconds. Module Path:/B_Resources/BYTE_DEFINITION.mch */\t \n  \"`Check assertion (card(BYTE) = 256) deduction - ref 3.2, 4.2, 5.3'\"\n  BYTE = (1..8 --> {0,1}) =>   (card(BYTE) = 256)\nEND\n";

const GOLDEN_PASS: &str = "THEORY User_Pass IS\n        Operation(Initialisation) & mp(Tac(RulesProBAssertionLemmas_1))\nEND\n";

fn p(text: &str) -> bevalkit_core::syntax::Expr {
    parse_predicate(text).unwrap()
}

fn gain_cells() -> Result<String, String> {
    let cells = [(18, 2, 18, 88), (49, 23, 49, 53), (18, 12, 18, 33), (6, 2, 6, 66), (136, 129, 132, 2), (69, 67, 69, 2)];
    for (t, b, w, want) in cells {
        let got = gain(t, b, w).map_err(|e| e.to_string())?;
        ensure!(got == want, "gain({t},{b},{w}) = {got}, want {want}");
    }
    Ok("6/6 cells".into())
}

fn byte_evaluation() -> Result<String, String> {
    let po = ProofObligation::new("AssertionLemmas_1", Group::Common, vec![p("BYTE = (1..8 --> {0,1})")], p("card(BYTE) = 256"));
    let start = Instant::now();
    let r = check_po(&po, &EvalParams::default(), &DefinitionTable::new());
    let took = start.elapsed();
    ensure!(r.verdict == Verdict::True, "cardinality lemma: {r:?}");
    ensure!(took < Duration::from_secs(10), "cardinality lemma took {took:?}");

    let mut defs = DefinitionTable::new();
    defs.insert("BYTE", p("1..8 --> {0,1}")).unwrap();
    let seq = p("[0,0,0,0,0,0,0,0] : BYTE");
    let on = eval_predicate(&seq, &EvalParams { init: true, ..EvalParams::default() }, &defs);
    let off = eval_predicate(&seq, &EvalParams::default(), &defs);
    ensure!(on.verdict == Verdict::True, "with definitions: {on:?}");
    ensure!(
        off.verdict == Verdict::Unknown && off.reason == Some(Reason::UnknownIdentifier),
        "without definitions: {off:?}"
    );
    Ok(format!("card lemma TRUE in {} ms", r.elapsed_ms))
}

fn golden_blocks() -> Result<String, String> {
    let rule = Rule {
        theory_name: "RulesProBAssertionLemmas_1".into(),
        po_name: "AssertionLemmas_1".into(),
        description: "Check assertion (card(BYTE) = 256) deduction - ref 3.2, 4.2, 5.3".into(),
        timestamp: STAMP.into(),
        elapsed_ms: 5913,
        module_path: "/B_Resources/BYTE_DEFINITION.mch".into(),
        guards: vec![p("BYTE = (1..8 --> {0,1})")],
        conclusion: p("card(BYTE) = 256"),
        wd: false,
    };
    let text = render_rule(&rule);
    ensure!(text == GOLDEN_RULE, "rule block differs:\n{text}");
    let pass = UserPass {
        entries: vec![PassEntry { selector: "Initialisation".into(), rule: "RulesProBAssertionLemmas_1".into() }],
    };
    let text = render_user_pass(&pass).map_err(|e| e.to_string())?;
    ensure!(text == GOLDEN_PASS, "user pass differs:\n{text}");
    Ok(format!("{} + {} bytes", GOLDEN_RULE.len(), GOLDEN_PASS.len()))
}

fn oracle_equivalence() -> Result<String, String> {
    let params = EvalParams::default();
    let defs = DefinitionTable::new();
    let mut rng = StdRng::seed_from_u64(0xacce97);
    let start = Instant::now();
    let n = 1000;
    for i in 0..n {
        let inst = random_instance(&mut rng);
        ensure!(inst.space <= 1024, "#{i}: search space {}", inst.space);
        let want = if oracle(&inst) { Verdict::True } else { Verdict::False };
        let po = ProofObligation::new("g", Group::Common, inst.hypotheses(), inst.goal.clone());
        let got = check_po(&po, &params, &defs).verdict;
        ensure!(got == want, "#{i} {}: got {got}, oracle {want}", inst.goal);
    }
    let took = start.elapsed();
    ensure!(took < Duration::from_secs(60), "took {took:?}");
    Ok(format!("{n} instances, 0 mismatches, {} ms", took.as_millis()))
}

fn run(ws: &Workspace, forces_only: bool, emit: bool) -> Result<Vec<PipelineReport>, String> {
    let clock = FixedClock::new(STAMP, Some(5913));
    let params = EvalParams::default();
    let opts = PipelineOptions { params: &params, forces_only, emit_rules: emit, clock: &clock };
    let mut out = Vec::new();
    for name in ws.list().map_err(|e| e.to_string())? {
        let mut c = ws.load(&name).map_err(|e| e.to_string())?;
        out.push(run_pipeline(&mut c, &opts).map_err(|e| e.to_string())?);
        ws.save(&mut c).map_err(|e| e.to_string())?;
    }
    Ok(out)
}

fn feedback_loop() -> Result<String, String> {
    let dir = common::fixture_workspace();
    let ws = Workspace::open(dir.path()).map_err(|e| e.to_string())?;
    let first = run(&ws, false, true)?;
    let second = run(&ws, true, false)?;
    let mut closed = 0;
    for (a, b) in first.iter().zip(&second) {
        for g in [Group::Common, Group::Wd] {
            let (ca, cb) = (a.group(g), b.group(g));
            closed += ca.f123_beval - ca.f123;
            ensure!(cb.f123 == ca.f123_beval, "{} {g}: rerun F1;F2;F3 {} vs {}", a.component, cb.f123, ca.f123_beval);
        }
    }
    ensure!(closed > 0, "evaluator closed nothing");
    for name in ["Power", "Power2", "BIT", "BV16"] {
        let r = first.iter().find(|r| r.component == name).ok_or(format!("{name} missing"))?;
        ensure!(r.common.gain > 0, "{name}: no gain");
    }
    Ok(format!("{closed} obligations closed by the evaluator, all replayed by rules"))
}

fn invariants() -> Result<String, String> {
    let mut rng = StdRng::seed_from_u64(0x1a7a);
    let params = EvalParams::default();
    let defs = DefinitionTable::new();

    for i in 0..500 {
        let e = random_ast(&mut rng, 6);
        let text = render(&e);
        ensure!(parse_predicate(&text).ok() == Some(e.clone()), "round trip #{i}: {text}");
        let n = normalize(&e);
        ensure!(normalize(&n) == n, "normalize not idempotent on {text}");
    }

    let clock = FixedClock::new(STAMP, Some(1));
    let mut rules = Vec::new();
    let mut pos = Vec::new();
    while rules.len() < 30 {
        let inst = random_instance(&mut rng);
        let po = ProofObligation::new(format!("r{}", rules.len()), Group::Common, inst.hypotheses(), inst.goal.clone());
        let r = check_po(&po, &params, &defs);
        if r.verdict == Verdict::True {
            let rule = make_rule(&po, &r, &clock, "/g.mch").map_err(|e| e.to_string())?;
            rules.push(rule);
        }
        pos.push(po);
    }
    for po in &pos {
        let levels: Vec<bool> = Force::ALL.iter().map(|&f| prove(po, f, &rules).is_proved()).collect();
        ensure!(levels.windows(2).all(|w| !w[0] || w[1]), "force monotonicity: {}", po.goal);
        let mut was = false;
        for k in [0, 10, 30] {
            let now = prove(po, Force::F3, &rules[..k]).is_proved();
            ensure!(!was || now, "rule monotonicity: {}", po.goal);
            was = now;
        }
    }

    let mut strengthened = 0;
    for po in &pos {
        if check_po(po, &params, &defs).verdict != Verdict::True {
            continue;
        }
        let mut s = po.clone();
        s.hypotheses.push(random_instance(&mut rng).goal);
        if rng.gen_bool(0.3) {
            s.hypotheses.push(p("1 / (x - x) = 0"));
        }
        ensure!(check_po(&s, &params, &defs).verdict != Verdict::False, "strengthening: {}", po.goal);
        strengthened += 1;
    }

    let adversarial = p("!f.(f : 1..20 --> {0,1} => card(dom(f)) = 20)");
    let budget = 200;
    let start = Instant::now();
    let r = eval_predicate(&adversarial, &EvalParams { timeout_ms: budget, ..EvalParams::default() }, &defs);
    let took = start.elapsed();
    ensure!(r.reason == Some(Reason::Timeout), "timeout: {r:?}");
    ensure!(took <= Duration::from_millis(budget + 500), "timeout took {took:?}");

    let dir = common::fixture_workspace();
    let ws = Workspace::open(dir.path()).map_err(|e| e.to_string())?;
    let reports = run(&ws, false, true)?;
    let pmm = fs::read(ws.path("Power2", ".pmm")).map_err(|e| e.to_string())?;
    let mut c = ws.load("Power2").map_err(|e| e.to_string())?;
    c.pmm_text.insert(0, ' ');
    ensure!(matches!(ws.save(&mut c), Err(StoreError::NotAppendOnly { .. })), "rewrite accepted");
    ensure!(fs::read(ws.path("Power2", ".pmm")).ok() == Some(pmm), "pmm changed");

    let dir2 = common::fixture_workspace();
    let ws2 = Workspace::open(dir2.path()).map_err(|e| e.to_string())?;
    let again = run(&ws2, false, true)?;
    ensure!(render_report(&reports) == render_report(&again), "reports differ");
    ensure!(render_csv(&reports) == render_csv(&again), "csv differs");
    for name in ws.list().map_err(|e| e.to_string())? {
        for suffix in [".pmm", "_wd.pmm", ".pass", ".status"] {
            let a = fs::read(ws.path(&name, suffix)).ok();
            let b = fs::read(ws2.path(&name, suffix)).ok();
            ensure!(a == b, "{name}{suffix} differs between runs");
        }
    }
    Ok(format!("8 suites; {strengthened} strengthened, timeout after {} ms", took.as_millis()))
}

fn main() -> ExitCode {
    let checks: [(&str, Check); 6] = [
        ("gain formula", gain_cells),
        ("BYTE evaluation and definition dependency", byte_evaluation),
        ("byte-exact rule and user pass", golden_blocks),
        ("oracle equivalence", oracle_equivalence),
        ("feedback loop on fixtures", feedback_loop),
        ("invariant suites", invariants),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS  {name} ({detail})"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

mod common;

use std::time::{Duration, Instant};

use bevalkit_core::eval::{check_po, eval_predicate, EvalParams, Reason, Verdict};
use bevalkit_core::prover::normalize;
use bevalkit_core::store::{Group, ProofObligation};
use bevalkit_core::syntax::{parse_predicate, DefinitionTable, Expr};
use common::{oracle, oracle_pred, random_instance, Instance};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn po(inst: &Instance) -> ProofObligation {
    ProofObligation::new("generated", Group::Common, inst.hypotheses(), inst.goal.clone())
}

fn expect(want: bool) -> Verdict {
    if want {
        Verdict::True
    } else {
        Verdict::False
    }
}

#[test]
fn verdicts_match_brute_force() {
    let params = EvalParams::default();
    let defs = DefinitionTable::new();
    let mut rng = StdRng::seed_from_u64(0x0ac1e);
    let start = Instant::now();
    let mut falses = 0;
    for i in 0..1200 {
        let inst = random_instance(&mut rng);
        assert!(inst.space <= 1024, "#{i}: space {}", inst.space);
        let want = oracle(&inst);

        let open = check_po(&po(&inst), &params, &defs);
        assert_eq!(open.verdict, expect(want), "#{i} {} under {:?}: {open:?}", inst.goal, inst.vars);

        let closed = eval_predicate(&inst.closed(), &params, &defs);
        assert_eq!(closed.verdict, expect(want), "#{i} closed {}: {closed:?}", inst.closed());

        if !want {
            falses += 1;
            // the counterexample must falsify the goal
            let w = open.counterexample.as_ref().unwrap_or_else(|| panic!("#{i}: no counterexample"));
            let mut env: Vec<(String, i64)> = Vec::new();
            for v in &inst.vars {
                let b = w.iter().find(|b| b.name == v.name).unwrap_or_else(|| panic!("#{i}: {} unbound in {w:?}", v.name));
                let n = b.value.as_int().unwrap();
                assert!(v.domain.contains(&n), "#{i}: {} = {n} outside its domain", v.name);
                env.push((v.name.clone(), n));
            }
            assert!(!oracle_pred(&inst.goal, &mut env), "#{i}: {w:?} does not falsify {}", inst.goal);
        }
    }
    assert!(falses > 100 && falses < 1100, "degenerate corpus: {falses} false");
    assert!(start.elapsed() < Duration::from_secs(60), "took {:?}", start.elapsed());
}

#[test]
fn search_flags_never_flip_a_definite_verdict() {
    let defs = DefinitionTable::new();
    let mut rng = StdRng::seed_from_u64(0xf1a9);
    let variants: Vec<EvalParams> = (0..8)
        .map(|bits| EvalParams {
            kodkod: bits & 1 != 0,
            smt: bits & 2 != 0,
            clpfd: bits & 4 != 0,
            ..EvalParams::default()
        })
        .collect();
    for i in 0..200 {
        let inst = random_instance(&mut rng);
        let want = expect(oracle(&inst));
        for p in &variants {
            let got = check_po(&po(&inst), p, &defs).verdict;
            assert!(got == want || got == Verdict::Unknown, "#{i} {} with {p}: {got}", inst.goal);
        }
    }
}

#[test]
fn normalization_keeps_ground_verdicts() {
    let params = EvalParams::default();
    let defs = DefinitionTable::new();
    let mut rng = StdRng::seed_from_u64(0x9e0);
    for i in 0..300 {
        let p = random_instance(&mut rng).closed();
        let a = eval_predicate(&p, &params, &defs).verdict;
        let b = eval_predicate(&normalize(&p), &params, &defs).verdict;
        assert_eq!(a, b, "#{i} {p}");
    }
}

#[test]
fn stronger_antecedents_never_turn_true_into_false() {
    let params = EvalParams::default();
    let defs = DefinitionTable::new();
    let mut rng = StdRng::seed_from_u64(0x57e9);
    let mut checked = 0;
    for _ in 0..600 {
        let inst = random_instance(&mut rng);
        let base = po(&inst);
        if check_po(&base, &params, &defs).verdict != Verdict::True {
            continue;
        }
        // an extra hypothesis over the same variables, possibly
        // contradictory, possibly ill-defined
        let extra = random_instance(&mut rng).goal;
        let mut stronger = base.clone();
        stronger.hypotheses.push(extra.clone());
        if rng.gen_bool(0.2) {
            stronger.hypotheses.push(parse_predicate("1 / (x - x) = 0").unwrap());
        }
        let v = check_po(&stronger, &params, &defs).verdict;
        assert_ne!(v, Verdict::False, "{} & {extra} turned {} false", inst.goal, base.goal);
        checked += 1;
    }
    assert!(checked > 100, "only {checked} TRUE instances");
}

/// 2^20 total functions, each needing a full scan, and never false.
const ADVERSARIAL: &str = "!f.(f : 1..20 --> {0,1} => card(dom(f)) = 20)";

#[test]
fn timeouts_come_back_unknown_within_budget() {
    let defs = DefinitionTable::new();
    let p = parse_predicate(ADVERSARIAL).unwrap();
    for timeout_ms in [50, 200, 1000] {
        let params = EvalParams { timeout_ms, ..EvalParams::default() };
        let start = Instant::now();
        let r = eval_predicate(&p, &params, &defs);
        let wall = start.elapsed();
        assert_eq!(r.verdict, Verdict::Unknown, "{timeout_ms} ms: {r:?}");
        assert_eq!(r.reason, Some(Reason::Timeout));
        assert!(wall <= Duration::from_millis(timeout_ms + 500), "{timeout_ms} ms budget took {wall:?}");
    }
}

#[test]
fn reference_predicates() {
    let params = EvalParams::default();
    let init = EvalParams { init: true, ..EvalParams::default() };
    let mut defs = DefinitionTable::new();
    defs.insert("BYTE", parse_predicate("1..8 --> {0,1}").unwrap()).unwrap();
    let empty = DefinitionTable::new();
    let cases: [(&str, &EvalParams, &DefinitionTable, Verdict); 9] = [
        ("(1..8 --> {0,1}) = (1..8 --> {0,1})", &params, &empty, Verdict::True),
        ("BYTE = (1..8 --> {0,1}) => card(BYTE) = 256", &params, &empty, Verdict::True),
        ("card(1..8 --> {0,1}) = 255", &params, &empty, Verdict::False),
        ("!x.(x : 1..3 => x < 4)", &params, &empty, Verdict::True),
        ("[0,0,0,0,0,0,0,0] : BYTE", &params, &defs, Verdict::Unknown),
        ("[0,0,0,0,0,0,0,0] : BYTE", &init, &defs, Verdict::True),
        ("x : 1..10 => x ** 2 <= 100", &params, &empty, Verdict::True),
        ("card(1..4 --> {0,1}) = 16 & 2 ** 10 = 1024 & card({}) = 0", &params, &empty, Verdict::True),
        ("card(0..15 --> {0,1}) = 65536", &params, &empty, Verdict::True),
    ];
    for (src, p, d, want) in cases {
        let r = eval_predicate(&parse_predicate(src).unwrap(), p, d);
        assert_eq!(r.verdict, want, "{src}: {r:?}");
        assert!(r.elapsed_ms >= 1);
    }
    let r = eval_predicate(&parse_predicate("[0,0,0,0,0,0,0,0] : BYTE").unwrap(), &params, &defs);
    assert_eq!(r.reason, Some(Reason::UnknownIdentifier));
}

#[test]
fn byte_lemma_is_fast() {
    let hyp: Expr = parse_predicate("BYTE = (1..8 --> {0,1})").unwrap();
    let goal = parse_predicate("card(BYTE) = 256").unwrap();
    let po = ProofObligation::new("AssertionLemmas_1", Group::Common, vec![hyp], goal);
    let start = Instant::now();
    let r = check_po(&po, &EvalParams::default(), &DefinitionTable::new());
    assert_eq!(r.verdict, Verdict::True);
    assert!(start.elapsed() < Duration::from_secs(10));
}

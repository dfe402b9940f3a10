//! An escalating-force prover over normalized predicates.
//!
//! * Force 1: the goal normalizes to `TRUE` or to one of the hypotheses.
//! * Force 2: additionally rewrites the goal with hypothesis equalities
//!   `id = e`.
//! * Force 3: additionally applies pmm rules `G1 & ... & Gk => C` by matching
//!   `C` against the goal and discharging each instantiated `Gi` at Force 1.
//!
//! None of the forces evaluate `**` or `card`, so arithmetic and cardinality
//! lemmas stay out of reach until a rule for them exists.

mod normalize;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::rules::{Rule, UserPass};
use crate::store::ProofObligation;
use crate::syntax::{BinOp, Expr};

pub use normalize::normalize;

/// Attempts allowed per rule: each conclusion match and each way of binding
/// a guard-only variable to a hypothesis costs one.
pub const RULE_BUDGET: usize = 100;

/// Equalities are used at most this often during Force 2 rewriting.
const EQUALITY_USES: usize = 2;
const REWRITE_PASSES: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Force {
    F1 = 1,
    F2 = 2,
    F3 = 3,
}

impl Force {
    pub const ALL: [Force; 3] = [Force::F1, Force::F2, Force::F3];

    pub fn level(self) -> u8 {
        self as u8
    }

    pub fn from_level(level: u8) -> Option<Force> {
        Force::ALL.into_iter().find(|f| f.level() == level)
    }
}

impl fmt::Display for Force {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.level())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Proof {
    /// Lowest force that found the proof.
    pub force: Force,
    /// Rule applied, when Force 3 (or a user pass) closed the goal.
    pub rule: Option<String>,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ProofOutcome {
    Proved(Proof),
    NotProved,
}

impl ProofOutcome {
    pub fn is_proved(&self) -> bool {
        matches!(self, ProofOutcome::Proved(_))
    }

    pub fn proof(&self) -> Option<&Proof> {
        match self {
            ProofOutcome::Proved(p) => Some(p),
            ProofOutcome::NotProved => None,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ProverError {
    #[error("user pass refers to rule '{0}', which is not in the rule files")]
    MissingRule(String),
}

/// The normalized hypotheses of an obligation, conjunctions split.
struct Context {
    hyps: Vec<Expr>,
}

impl Context {
    fn new(po: &ProofObligation) -> Self {
        let mut hyps = Vec::new();
        for h in &po.hypotheses {
            let h = normalize(h);
            for c in h.conjuncts() {
                if !hyps.contains(c) {
                    hyps.push(c.clone());
                }
            }
        }
        Context { hyps }
    }

    /// Force 1 on an already normalized predicate.
    fn closes(&self, goal: &Expr) -> Option<String> {
        if *goal == Expr::Bool(true) {
            return Some("normalizes to TRUE".into());
        }
        if self.hyps.contains(goal) {
            return Some("found among the hypotheses".into());
        }
        if let Expr::Binary(BinOp::And, _, _) = goal {
            if goal.conjuncts().iter().all(|c| self.closes(c).is_some()) {
                return Some("every conjunct holds".into());
            }
        }
        if self.hyps.contains(&Expr::Bool(false)) {
            return Some("hypotheses are contradictory".into());
        }
        None
    }

    /// Oriented rewrite equalities `id := e`.
    fn equalities(&self) -> Vec<(String, Expr, String)> {
        let mut out = Vec::new();
        for h in &self.hyps {
            let Expr::Binary(BinOp::Eq, l, r) = h else { continue };
            let oriented = match (&**l, &**r) {
                (Expr::Ident(a), Expr::Ident(b)) => {
                    let (big, small) = if a > b { (a, r) } else { (b, l) };
                    Some((big.clone(), (**small).clone()))
                }
                (Expr::Ident(a), other) | (other, Expr::Ident(a)) => {
                    Some((a.clone(), other.clone()))
                }
                _ => None,
            };
            if let Some((id, e)) = oriented {
                if !e.mentions(&id) {
                    out.push((id, e, h.to_string()));
                }
            }
        }
        out
    }

    /// Force 2: the goal after each rewriting pass, normalized.
    fn rewrites(&self, goal: &Expr) -> Vec<(Expr, Vec<String>)> {
        let eqs = self.equalities();
        let mut uses = vec![0usize; eqs.len()];
        let mut current = goal.clone();
        let mut steps = Vec::new();
        let mut out = Vec::new();
        for _ in 0..REWRITE_PASSES {
            let mut changed = false;
            for (i, (id, e, shown)) in eqs.iter().enumerate() {
                if uses[i] < EQUALITY_USES && current.mentions(id) {
                    current = current.substitute(id, e);
                    uses[i] += 1;
                    steps.push(format!("F2: rewrote with {shown}"));
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            current = normalize(&current);
            out.push((current.clone(), steps.clone()));
        }
        out
    }
}

/// Tries the forces up to `force`, cheapest first.
pub fn prove(po: &ProofObligation, force: Force, rules: &[Rule]) -> ProofOutcome {
    let ctx = Context::new(po);
    let goal = normalize(&po.goal);

    if let Some(why) = ctx.closes(&goal) {
        return proved(Force::F1, None, vec![format!("F1: goal {why}")]);
    }
    if force == Force::F1 {
        return ProofOutcome::NotProved;
    }

    let rewrites = ctx.rewrites(&goal);
    for (g, steps) in &rewrites {
        if let Some(why) = ctx.closes(g) {
            let mut trace = steps.clone();
            trace.push(format!("F1: rewritten goal {why}"));
            return proved(Force::F2, None, trace);
        }
    }
    if force == Force::F2 {
        return ProofOutcome::NotProved;
    }

    let mut forms = vec![(goal, Vec::new())];
    forms.extend(rewrites);
    for rule in rules {
        if let Some(trace) = try_rule(&ctx, &forms, rule) {
            return proved(Force::F3, Some(rule.theory_name.clone()), trace);
        }
    }
    ProofOutcome::NotProved
}

/// Replays the user pass: the entries selecting this obligation by name each
/// get one Force 3 attempt with their rule.
pub fn apply_user_pass(
    po: &ProofObligation,
    pass: &UserPass,
    rules: &[Rule],
) -> Result<ProofOutcome, ProverError> {
    let ctx = Context::new(po);
    let goal = normalize(&po.goal);
    let mut forms = vec![(goal.clone(), Vec::new())];
    forms.extend(ctx.rewrites(&goal));
    for entry in pass.entries.iter().filter(|e| e.selector == po.name) {
        let rule = rules
            .iter()
            .find(|r| r.theory_name == entry.rule)
            .ok_or_else(|| ProverError::MissingRule(entry.rule.clone()))?;
        if let Some(mut trace) = try_rule(&ctx, &forms, rule) {
            trace.insert(0, format!("pass: Operation({}) selects \"{}\"", entry.selector, po.name));
            return Ok(proved(Force::F3, Some(rule.theory_name.clone()), trace));
        }
    }
    Ok(ProofOutcome::NotProved)
}

fn proved(force: Force, rule: Option<String>, trace: Vec<String>) -> ProofOutcome {
    ProofOutcome::Proved(Proof { force, rule, trace })
}

type Subst = BTreeMap<String, Expr>;

fn try_rule(ctx: &Context, forms: &[(Expr, Vec<String>)], rule: &Rule) -> Option<Vec<String>> {
    let mut vars: Vec<String> = Vec::new();
    for g in &rule.guards {
        for v in g.free_vars() {
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
    }
    for v in rule.conclusion.free_vars() {
        if !vars.contains(&v) {
            vars.push(v);
        }
    }
    let conclusion = normalize(&rule.conclusion);
    let guards: Vec<Expr> = rule.guards.iter().map(normalize).collect();
    let mut budget = RULE_BUDGET;

    for (goal, steps) in forms {
        let mut s = Subst::new();
        if !matches(&conclusion, goal, &vars, &mut s) {
            continue;
        }
        if budget == 0 {
            return None;
        }
        budget -= 1;
        if discharge(ctx, &guards, &vars, s, &mut budget) {
            let mut trace = steps.clone();
            trace.push(format!(
                "F3: applied {} ({} guard{})",
                rule.theory_name,
                guards.len(),
                if guards.len() == 1 { "" } else { "s" }
            ));
            return Some(trace);
        }
    }
    None
}

/// Discharges `guards` in order under `s`, binding variables that only occur
/// in guards by matching hypotheses.
fn discharge(ctx: &Context, guards: &[Expr], vars: &[String], s: Subst, budget: &mut usize) -> bool {
    let Some((g, rest)) = guards.split_first() else {
        return true;
    };
    let inst = normalize(&instantiate(g, &s));
    let open: Vec<String> = inst
        .free_vars()
        .into_iter()
        .filter(|v| vars.contains(v) && !s.contains_key(v))
        .collect();
    if open.is_empty() {
        return ctx.closes(&inst).is_some() && discharge(ctx, rest, vars, s, budget);
    }
    for h in &ctx.hyps {
        let mut ext = s.clone();
        if !matches(&inst, h, &open, &mut ext) {
            continue;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        if discharge(ctx, rest, vars, ext, budget) {
            return true;
        }
    }
    false
}

/// Simultaneous substitution of the metavariables.
fn instantiate(e: &Expr, s: &Subst) -> Expr {
    // rename first so that a binding mentioning another metavariable is not
    // substituted twice
    let mut out = e.clone();
    let temps: Vec<(String, String)> = s
        .keys()
        .enumerate()
        .map(|(i, k)| (k.clone(), format!("\u{0}m{i}")))
        .collect();
    for (k, t) in &temps {
        out = out.substitute(k, &Expr::Ident(t.clone()));
    }
    for (k, t) in &temps {
        out = out.substitute(t, &s[k]);
    }
    out
}

/// First-order matching of `pattern` against `target`; identifiers listed in
/// `vars` are metavariables, everything else must agree literally.
fn matches(pattern: &Expr, target: &Expr, vars: &[String], s: &mut Subst) -> bool {
    match (pattern, target) {
        (Expr::Ident(v), _) if vars.contains(v) => match s.get(v) {
            Some(bound) => bound == target,
            None => {
                s.insert(v.clone(), target.clone());
                true
            }
        },
        (Expr::Int(a), Expr::Int(b)) => a == b,
        (Expr::Bool(a), Expr::Bool(b)) => a == b,
        (Expr::Ident(a), Expr::Ident(b)) => a == b,
        (Expr::Neg(a), Expr::Neg(b)) | (Expr::Not(a), Expr::Not(b)) => matches(a, b, vars, s),
        (Expr::Binary(o1, l1, r1), Expr::Binary(o2, l2, r2)) => {
            o1 == o2 && matches(l1, l2, vars, s) && matches(r1, r2, vars, s)
        }
        (Expr::Call(f1, a), Expr::Call(f2, b)) => f1 == f2 && matches(a, b, vars, s),
        (Expr::Apply(f1, a1), Expr::Apply(f2, a2)) => {
            matches(f1, f2, vars, s) && matches(a1, a2, vars, s)
        }
        (
            Expr::Quant {
                kind: k1,
                var: v1,
                domain: d1,
                body: b1,
            },
            Expr::Quant {
                kind: k2,
                var: v2,
                domain: d2,
                body: b2,
            },
        ) => {
            // bound names are literal: a metavariable of the same name is
            // shadowed inside the body
            let inner: Vec<String> = vars.iter().filter(|v| *v != v1).cloned().collect();
            k1 == k2 && v1 == v2 && matches(d1, d2, vars, s) && matches(b1, b2, &inner, s)
        }
        (Expr::SetExt(a), Expr::SetExt(b)) | (Expr::SeqExt(a), Expr::SeqExt(b)) => {
            a.len() == b.len() && a.iter().zip(b).all(|(x, y)| matches(x, y, vars, s))
        }
        _ => false,
    }
}

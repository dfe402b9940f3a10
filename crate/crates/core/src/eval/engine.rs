//! Three-valued evaluation over finite domains.
//!
//! Predicates evaluate to a [`Truth`]: definite answers follow Kleene's strong
//! three-valued logic, so `FALSE & P` is false even when `P` cannot be
//! decided. Anything that stops a sub-predicate from being decided (an
//! unknown identifier, an out-of-range integer, a set too large to build, an
//! ill-defined application) becomes `Unknown` at the nearest predicate. Only
//! the deadline aborts the whole evaluation.

use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Instant;

use super::sets::{LazySet, SpaceKind, ENUMERATION_CAP};
use super::value::Value;
use super::EvalError;
use crate::syntax::{BinOp, Builtin, Expr, Quantifier};

#[derive(Clone, Debug)]
pub(crate) enum Val {
    Plain(Value),
    Lazy(Rc<LazySet>),
}

impl From<Value> for Val {
    fn from(v: Value) -> Self {
        Val::Plain(v)
    }
}

impl From<LazySet> for Val {
    fn from(s: LazySet) -> Self {
        Val::Lazy(Rc::new(s))
    }
}

pub(crate) type Witness = Vec<(String, Value)>;

#[derive(Clone, Debug)]
pub(crate) enum Truth {
    True,
    /// Carries the bindings of the universally quantified variables that
    /// falsified it, outermost first.
    False(Witness),
    Unknown(EvalError),
}

/// The deadline passed or the evaluation was cancelled.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Halt;

type R<T> = Result<T, EvalError>;

pub(crate) struct Engine<'a> {
    lo: i64,
    hi: i64,
    deadline: Instant,
    cancel: Option<&'a AtomicBool>,
    reverse: bool,
    propagate: bool,
    ticks: u32,
    env: Vec<(String, Val)>,
}

pub(crate) struct EngineConfig<'a> {
    pub bounds: (i64, i64),
    pub deadline: Instant,
    pub cancel: Option<&'a AtomicBool>,
    pub reverse: bool,
    pub propagate: bool,
}

/// How a free identifier of a predicate gets its value.
#[derive(Clone, Debug)]
pub(crate) enum Step<'e> {
    Bind(String, &'e Expr),
    Enumerate(String, &'e Expr),
}

impl<'a> Engine<'a> {
    pub fn new(cfg: EngineConfig<'a>) -> Self {
        Engine {
            lo: cfg.bounds.0,
            hi: cfg.bounds.1,
            deadline: cfg.deadline,
            cancel: cfg.cancel,
            reverse: cfg.reverse,
            propagate: cfg.propagate,
            ticks: 0,
            env: Vec::new(),
        }
    }

    fn tick(&mut self) -> R<()> {
        self.ticks = self.ticks.wrapping_add(1);
        if self.ticks.is_multiple_of(16) {
            let cancelled = self.cancel.is_some_and(|c| c.load(Ordering::Relaxed));
            if cancelled || Instant::now() >= self.deadline {
                return Err(EvalError::Timeout);
            }
        }
        Ok(())
    }

    fn tick_or_halt(&mut self) -> Result<(), Halt> {
        self.tick().map_err(|_| Halt)
    }

    fn check_int(&self, n: i64) -> R<Value> {
        if n < self.lo || n > self.hi {
            Err(EvalError::UnboundedDomain(format!(
                "{n} lies outside {}..{}",
                self.lo, self.hi
            )))
        } else {
            Ok(Value::Int(n))
        }
    }

    fn lookup(&self, name: &str) -> Option<&Val> {
        self.env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    // ----------------------------------------------------------------------
    // predicates

    /// Decides a top-level predicate whose free identifiers are resolved by
    /// `plan`: bound to a value or enumerated over a domain, both taken from
    /// the antecedent of the top-level implication.
    pub fn decide(&mut self, p: &Expr, plan: &[Step<'_>], guards: &[&Expr]) -> Result<Truth, Halt> {
        let Some((step, rest)) = plan.split_first() else {
            return self.truth(p);
        };
        match step {
            Step::Bind(name, e) => {
                let v = match self.value(e) {
                    Ok(v) => v,
                    Err(EvalError::Timeout) => return Err(Halt),
                    Err(err) => return Ok(Truth::Unknown(err)),
                };
                let shown = self.materialize(v.clone()).ok();
                self.env.push((name.clone(), v));
                let t = self.decide(p, rest, guards);
                self.env.pop();
                Ok(match t? {
                    Truth::False(w) => Truth::False(prepend(shown.map(|v| (name.clone(), v)), w)),
                    other => other,
                })
            }
            Step::Enumerate(name, domain) => {
                let dom = match self.value(domain) {
                    Ok(v) => v,
                    Err(EvalError::Timeout) => return Err(Halt),
                    Err(err) => return Ok(Truth::Unknown(err)),
                };
                let elements = match self.domain_elements(name, &dom, guards) {
                    Ok(it) => it,
                    Err(EvalError::Timeout) => return Err(Halt),
                    Err(err) => return Ok(Truth::Unknown(err)),
                };
                let mut unknown = None;
                for x in elements {
                    self.tick_or_halt()?;
                    self.env.push((name.clone(), Val::Plain(x.clone())));
                    let t = self.decide(p, rest, guards);
                    self.env.pop();
                    match t? {
                        Truth::False(w) => {
                            return Ok(Truth::False(prepend(Some((name.clone(), x)), w)))
                        }
                        u @ Truth::Unknown(_) => {
                            unknown.get_or_insert(u);
                        }
                        Truth::True => {}
                    }
                }
                Ok(unknown.unwrap_or(Truth::True))
            }
        }
    }

    pub fn truth(&mut self, e: &Expr) -> Result<Truth, Halt> {
        match e {
            Expr::Bool(true) => Ok(Truth::True),
            Expr::Bool(false) => Ok(Truth::False(Vec::new())),
            Expr::Not(inner) => Ok(match self.truth(inner)? {
                Truth::True => Truth::False(Vec::new()),
                Truth::False(_) => Truth::True,
                u => u,
            }),
            Expr::Binary(BinOp::And, l, r) => {
                let a = self.truth(l)?;
                if matches!(a, Truth::False(_)) {
                    return Ok(a);
                }
                let b = self.truth(r)?;
                Ok(match (a, b) {
                    (_, b @ Truth::False(_)) => b,
                    (Truth::True, Truth::True) => Truth::True,
                    (a @ Truth::Unknown(..), _) => a,
                    (_, b) => b,
                })
            }
            Expr::Binary(BinOp::Or, l, r) => {
                let a = self.truth(l)?;
                if matches!(a, Truth::True) {
                    return Ok(a);
                }
                let b = self.truth(r)?;
                Ok(match (a, b) {
                    (_, Truth::True) => Truth::True,
                    (Truth::False(_), Truth::False(_)) => Truth::False(Vec::new()),
                    (a @ Truth::Unknown(..), _) => a,
                    (_, b) => b,
                })
            }
            Expr::Binary(BinOp::Implies, l, r) => {
                let a = self.truth(l)?;
                if matches!(a, Truth::False(_)) {
                    return Ok(Truth::True);
                }
                let b = self.truth(r)?;
                Ok(match (a, b) {
                    (_, Truth::True) => Truth::True,
                    (Truth::True, b) => b,
                    (a, _) => a,
                })
            }
            Expr::Binary(BinOp::Equiv, l, r) => {
                let a = self.truth(l)?;
                let b = self.truth(r)?;
                Ok(match (a, b) {
                    (u @ Truth::Unknown(..), _) | (_, u @ Truth::Unknown(..)) => u,
                    (Truth::True, Truth::True) | (Truth::False(_), Truth::False(_)) => Truth::True,
                    _ => Truth::False(Vec::new()),
                })
            }
            Expr::Quant {
                kind,
                var,
                domain,
                body,
            } => self.quantify(*kind, var, domain, body),
            Expr::Binary(op, l, r) if op.is_predicate() => {
                let r = self.atom(*op, l, r);
                lift(r)
            }
            other => {
                let r = self.value(other).and_then(|v| match v {
                    Val::Plain(Value::Bool(b)) => Ok(b),
                    Val::Plain(v) => Err(EvalError::Unsupported(format!(
                        "{} used as a predicate",
                        v.kind()
                    ))),
                    Val::Lazy(_) => Err(EvalError::Unsupported("set used as a predicate".into())),
                });
                lift(r)
            }
        }
    }

    fn quantify(
        &mut self,
        kind: Quantifier,
        var: &str,
        domain: &Expr,
        body: &Expr,
    ) -> Result<Truth, Halt> {
        let dom = match self.value(domain) {
            Ok(v) => v,
            Err(EvalError::Timeout) => return Err(Halt),
            Err(err) => return Ok(Truth::Unknown(err)),
        };
        let guards: Vec<&Expr> = match (kind, body) {
            (Quantifier::ForAll, Expr::Binary(BinOp::Implies, g, _)) => g.conjuncts(),
            (Quantifier::ForAll, _) => Vec::new(),
            (Quantifier::Exists, b) => b.conjuncts(),
        };
        let elements = match self.domain_elements(var, &dom, &guards) {
            Ok(it) => it,
            Err(EvalError::Timeout) => return Err(Halt),
            Err(err) => return Ok(Truth::Unknown(err)),
        };
        let mut unknown = None;
        for x in elements {
            self.tick_or_halt()?;
            self.env.push((var.to_string(), Val::Plain(x.clone())));
            let t = self.truth(body);
            self.env.pop();
            match (kind, t?) {
                (Quantifier::ForAll, Truth::False(w)) => {
                    return Ok(Truth::False(prepend(Some((var.to_string(), x)), w)))
                }
                (Quantifier::Exists, Truth::True) => return Ok(Truth::True),
                (_, u @ Truth::Unknown(..)) => {
                    unknown.get_or_insert(u);
                }
                _ => {}
            }
        }
        Ok(unknown.unwrap_or(match kind {
            Quantifier::ForAll => Truth::True,
            Quantifier::Exists => Truth::False(Vec::new()),
        }))
    }

    /// Elements of a quantifier domain, optionally pruned by the integer
    /// bounds the guards impose on `var`. Pruned values are exactly those for
    /// which some guard is definitely false.
    fn domain_elements(
        &mut self,
        var: &str,
        dom: &Val,
        guards: &[&Expr],
    ) -> R<Box<dyn Iterator<Item = Value>>> {
        let (lo, hi) = if self.propagate {
            self.propagate_bounds(var, guards)
        } else {
            (None, None)
        };
        if let Val::Lazy(s) = dom {
            if let LazySet::Interval(a, b) = **s {
                let a = lo.map_or(a, |l| a.max(l));
                let b = hi.map_or(b, |h| b.min(h));
                return Ok(LazySet::Interval(a, b).elements(self.reverse));
            }
        }
        let it = self.stream(dom)?;
        if lo.is_none() && hi.is_none() {
            return Ok(it);
        }
        Ok(Box::new(it.filter(move |v| match v {
            Value::Int(n) => lo.is_none_or(|l| *n >= l) && hi.is_none_or(|h| *n <= h),
            _ => true,
        })))
    }

    /// Interval reasoning over guards of the form `var op c` / `c op var` and
    /// `var : a..b`, where `c`, `a`, `b` evaluate without mentioning `var`.
    fn propagate_bounds(&mut self, var: &str, guards: &[&Expr]) -> (Option<i64>, Option<i64>) {
        let (mut lo, mut hi): (Option<i64>, Option<i64>) = (None, None);
        let mut tighten = |l: Option<i64>, h: Option<i64>| {
            if let Some(l) = l {
                lo = Some(lo.map_or(l, |x| x.max(l)));
            }
            if let Some(h) = h {
                hi = Some(hi.map_or(h, |x| x.min(h)));
            }
        };
        for g in guards {
            let Expr::Binary(op, l, r) = g else { continue };
            let is_var = |e: &Expr| matches!(e, Expr::Ident(n) if n == var);
            if *op == BinOp::Member && is_var(l) {
                if let Expr::Binary(BinOp::Interval, a, b) = &**r {
                    if !a.mentions(var) && !b.mentions(var) {
                        if let (Some(a), Some(b)) = (self.ground_int(a), self.ground_int(b)) {
                            tighten(Some(a), Some(b));
                        }
                    }
                }
                continue;
            }
            let (op, other) = if is_var(l) && !r.mentions(var) {
                (*op, &**r)
            } else if is_var(r) && !l.mentions(var) {
                let flipped = match op {
                    BinOp::Lt => BinOp::Gt,
                    BinOp::Le => BinOp::Ge,
                    BinOp::Gt => BinOp::Lt,
                    BinOp::Ge => BinOp::Le,
                    other => *other,
                };
                (flipped, &**l)
            } else {
                continue;
            };
            if !matches!(
                op,
                BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq
            ) {
                continue;
            }
            let Some(k) = self.ground_int(other) else { continue };
            match op {
                BinOp::Lt => tighten(None, k.checked_sub(1)),
                BinOp::Le => tighten(None, Some(k)),
                BinOp::Gt => tighten(k.checked_add(1), None),
                BinOp::Ge => tighten(Some(k), None),
                _ => tighten(Some(k), Some(k)),
            }
        }
        (lo, hi)
    }

    fn ground_int(&mut self, e: &Expr) -> Option<i64> {
        match self.value(e) {
            Ok(Val::Plain(Value::Int(n))) => Some(n),
            _ => None,
        }
    }

    fn atom(&mut self, op: BinOp, l: &Expr, r: &Expr) -> R<bool> {
        match op {
            BinOp::Eq | BinOp::Neq => {
                let a = self.value(l)?;
                let b = self.value(r)?;
                let eq = self.values_equal(&a, &b)?;
                Ok(eq == (op == BinOp::Eq))
            }
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                let a = self.int_of(l)?;
                let b = self.int_of(r)?;
                Ok(match op {
                    BinOp::Lt => a < b,
                    BinOp::Le => a <= b,
                    BinOp::Gt => a > b,
                    _ => a >= b,
                })
            }
            BinOp::Member | BinOp::NotMember => {
                let v = self.value(l)?;
                let v = self.materialize(v)?;
                let s = self.value(r)?;
                Ok(self.contains(&s, &v)? == (op == BinOp::Member))
            }
            BinOp::Subset => {
                let a = self.value(l)?;
                let b = self.value(r)?;
                self.subset(&a, &b)
            }
            _ => unreachable!("{op:?} is not an atomic predicate"),
        }
    }

    // ----------------------------------------------------------------------
    // expressions

    pub fn value(&mut self, e: &Expr) -> R<Val> {
        self.tick()?;
        match e {
            Expr::Int(n) => Ok(self.check_int(*n)?.into()),
            Expr::Bool(b) => Ok(Value::Bool(*b).into()),
            Expr::Ident(name) => self
                .lookup(name)
                .cloned()
                .ok_or_else(|| EvalError::UnknownIdentifier(name.clone())),
            Expr::Neg(inner) => {
                let n = self.int_of(inner)?;
                let n = n
                    .checked_neg()
                    .ok_or_else(|| EvalError::UnboundedDomain("integer overflow".into()))?;
                Ok(self.check_int(n)?.into())
            }
            Expr::Not(_) | Expr::Quant { .. } => self.truth_value(e),
            Expr::Binary(op, _, _) if op.is_predicate() => self.truth_value(e),
            Expr::Binary(op, l, r) => self.binary_value(*op, l, r),
            Expr::Call(f, arg) => self.call(*f, arg),
            Expr::Apply(f, arg) => self.apply(f, arg),
            Expr::SetExt(items) => {
                let mut out = BTreeSet::new();
                for item in items {
                    let v = self.value(item)?;
                    out.insert(self.materialize(v)?);
                }
                Ok(Value::Set(out).into())
            }
            Expr::SeqExt(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    let v = self.value(item)?;
                    out.push(self.materialize(v)?);
                }
                Ok(Value::sequence(out).into())
            }
        }
    }

    fn truth_value(&mut self, e: &Expr) -> R<Val> {
        match self.truth(e) {
            Ok(Truth::True) => Ok(Value::Bool(true).into()),
            Ok(Truth::False(_)) => Ok(Value::Bool(false).into()),
            Ok(Truth::Unknown(e)) => Err(e),
            Err(Halt) => Err(EvalError::Timeout),
        }
    }

    fn int_of(&mut self, e: &Expr) -> R<i64> {
        match self.value(e)? {
            Val::Plain(Value::Int(n)) => Ok(n),
            Val::Plain(v) => Err(EvalError::Unsupported(format!(
                "expected an integer, found a {}",
                v.kind()
            ))),
            Val::Lazy(_) => Err(EvalError::Unsupported(
                "expected an integer, found a set".into(),
            )),
        }
    }

    fn binary_value(&mut self, op: BinOp, l: &Expr, r: &Expr) -> R<Val> {
        match op {
            BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod | BinOp::Pow => {
                let a = self.value(l)?;
                let b = self.value(r)?;
                match (&a, &b) {
                    (Val::Plain(Value::Int(x)), Val::Plain(Value::Int(y))) => {
                        Ok(self.arith(op, *x, *y)?.into())
                    }
                    _ if matches!(op, BinOp::Sub | BinOp::Mul) => self.set_binary(op, a, b),
                    _ => Err(EvalError::Unsupported(format!(
                        "'{}' expects integers",
                        op.symbol()
                    ))),
                }
            }
            BinOp::Interval => {
                let lo = self.int_of(l)?;
                let hi = self.int_of(r)?;
                Ok(LazySet::Interval(lo, hi).into())
            }
            BinOp::Union | BinOp::Inter => {
                let a = self.value(l)?;
                let b = self.value(r)?;
                self.set_binary(op, a, b)
            }
            BinOp::Maplet => {
                let a = self.value(l)?;
                let a = self.materialize(a)?;
                let b = self.value(r)?;
                let b = self.materialize(b)?;
                Ok(Value::pair(a, b).into())
            }
            BinOp::Relations | BinOp::TotalFns | BinOp::PartialFns => {
                let kind = match op {
                    BinOp::Relations => SpaceKind::Relations,
                    BinOp::TotalFns => SpaceKind::Total,
                    _ => SpaceKind::Partial,
                };
                let dom = self.set_of(l)?;
                let codom = self.set_of(r)?;
                Ok(LazySet::space(kind, dom, codom).into())
            }
            _ => unreachable!("{op:?} is a predicate operator"),
        }
    }

    fn arith(&self, op: BinOp, x: i64, y: i64) -> R<Value> {
        let overflow = || EvalError::UnboundedDomain("integer overflow".into());
        let n = match op {
            BinOp::Add => x.checked_add(y).ok_or_else(overflow)?,
            BinOp::Sub => x.checked_sub(y).ok_or_else(overflow)?,
            BinOp::Mul => x.checked_mul(y).ok_or_else(overflow)?,
            BinOp::Div => {
                if y == 0 {
                    return Err(EvalError::IllDefined("division by zero".into()));
                }
                x.checked_div(y).ok_or_else(overflow)?
            }
            BinOp::Mod => {
                if y <= 0 {
                    return Err(EvalError::IllDefined(format!(
                        "{x} mod {y}: the divisor must be positive"
                    )));
                }
                x % y
            }
            BinOp::Pow => {
                if y < 0 {
                    return Err(EvalError::IllDefined(format!(
                        "{x} ** {y}: negative exponent"
                    )));
                }
                let e = u32::try_from(y).map_err(|_| overflow())?;
                x.checked_pow(e).ok_or_else(overflow)?
            }
            _ => unreachable!(),
        };
        self.check_int(n)
    }

    fn set_binary(&mut self, op: BinOp, a: Val, b: Val) -> R<Val> {
        if let (Val::Lazy(x), Val::Lazy(y)) = (&a, &b) {
            if let (BinOp::Inter, LazySet::Interval(a1, a2), LazySet::Interval(b1, b2)) =
                (op, &**x, &**y)
            {
                return Ok(LazySet::Interval(*a1.max(b1), *a2.min(b2)).into());
            }
        }
        match op {
            BinOp::Union => {
                let mut xs = self.materialize_set(a)?;
                let ys = self.materialize_set(b)?;
                xs.extend(ys);
                self.within_cap(xs.len() as u128)?;
                Ok(Value::Set(xs).into())
            }
            BinOp::Inter => {
                // filter whichever side is cheaper to list
                let (small, other) = match (self.card_of(&a)?, self.card_of(&b)?) {
                    (Some(x), Some(y)) if y < x => (b, a),
                    (None, _) => (b, a),
                    _ => (a, b),
                };
                let xs = self.materialize_set(small)?;
                let mut out = BTreeSet::new();
                for x in xs {
                    self.tick()?;
                    if self.contains(&other, &x)? {
                        out.insert(x);
                    }
                }
                Ok(Value::Set(out).into())
            }
            BinOp::Sub => {
                let xs = self.materialize_set(a)?;
                let mut out = BTreeSet::new();
                for x in xs {
                    self.tick()?;
                    if !self.contains(&b, &x)? {
                        out.insert(x);
                    }
                }
                Ok(Value::Set(out).into())
            }
            BinOp::Mul => {
                let xs = self.materialize_set(a)?;
                let ys = self.materialize_set(b)?;
                self.within_cap(xs.len() as u128 * ys.len() as u128)?;
                let mut out = BTreeSet::new();
                for x in &xs {
                    for y in &ys {
                        self.tick()?;
                        out.insert(Value::pair(x.clone(), y.clone()));
                    }
                }
                Ok(Value::Set(out).into())
            }
            _ => unreachable!(),
        }
    }

    fn call(&mut self, f: Builtin, arg: &Expr) -> R<Val> {
        match f {
            Builtin::Pow => Ok(LazySet::power_set(self.set_of(arg)?).into()),
            Builtin::Card => {
                let s = self.value(arg)?;
                let n = self.card_of(&s)?.ok_or_else(|| {
                    EvalError::UnboundedDomain("cardinality exceeds 128 bits".into())
                })?;
                let n = i64::try_from(n)
                    .map_err(|_| EvalError::UnboundedDomain(format!("cardinality {n}")))?;
                Ok(self.check_int(n)?.into())
            }
            Builtin::Dom | Builtin::Ran => {
                let rel = self.set_of(arg)?;
                let mut out = BTreeSet::new();
                for item in rel {
                    let Value::Pair(a, b) = item else {
                        return Err(EvalError::Unsupported(format!(
                            "{} of a set that is not a relation",
                            f.keyword()
                        )));
                    };
                    out.insert(if f == Builtin::Dom { *a } else { *b });
                }
                Ok(Value::Set(out).into())
            }
            Builtin::Size => {
                let s = self.set_of(arg)?;
                let n = s.len() as i64;
                let is_sequence = s.iter().enumerate().all(|(i, item)| {
                    matches!(item, Value::Pair(a, _) if **a == Value::Int(i as i64 + 1))
                });
                if !is_sequence {
                    return Err(EvalError::IllDefined("size of a non-sequence".into()));
                }
                Ok(self.check_int(n)?.into())
            }
        }
    }

    fn apply(&mut self, f: &Expr, arg: &Expr) -> R<Val> {
        let fv = self.value(f)?;
        let rel = self.materialize_set(fv)?;
        let x = self.value(arg)?;
        let x = self.materialize(x)?;
        let start = Value::pair(x.clone(), Value::Int(i64::MIN));
        let mut images = rel
            .range(start..)
            .take_while(|item| matches!(item, Value::Pair(a, _) if **a == x));
        match (images.next(), images.next()) {
            (Some(Value::Pair(_, y)), None) => Ok((**y).clone().into()),
            (None, _) => {
                if rel.iter().any(|item| !matches!(item, Value::Pair(..))) {
                    return Err(EvalError::Unsupported(
                        "application of a set that is not a relation".into(),
                    ));
                }
                Err(EvalError::IllDefined(format!("{x} is not in the domain")))
            }
            _ => Err(EvalError::IllDefined(format!(
                "relation is not functional at {x}"
            ))),
        }
    }

    // ----------------------------------------------------------------------
    // sets

    fn within_cap(&self, n: u128) -> R<()> {
        if n > ENUMERATION_CAP {
            Err(EvalError::Unsupported(format!(
                "building a set of {n} elements exceeds the enumeration cap of {ENUMERATION_CAP}"
            )))
        } else {
            Ok(())
        }
    }

    pub fn materialize(&mut self, v: Val) -> R<Value> {
        match v {
            Val::Plain(v) => Ok(v),
            Val::Lazy(s) => {
                match s.card() {
                    Some(n) => self.within_cap(n)?,
                    None => {
                        return Err(EvalError::Unsupported(
                            "set too large to enumerate".into(),
                        ))
                    }
                }
                let mut out = BTreeSet::new();
                for x in s.elements(false) {
                    self.tick()?;
                    out.insert(x);
                }
                Ok(Value::Set(out))
            }
        }
    }

    fn materialize_set(&mut self, v: Val) -> R<BTreeSet<Value>> {
        match self.materialize(v)? {
            Value::Set(s) => Ok(s),
            other => Err(EvalError::Unsupported(format!(
                "expected a set, found a {}",
                other.kind()
            ))),
        }
    }

    fn set_of(&mut self, e: &Expr) -> R<BTreeSet<Value>> {
        let v = self.value(e)?;
        self.materialize_set(v)
    }

    fn card_of(&self, v: &Val) -> R<Option<u128>> {
        match v {
            Val::Plain(Value::Set(s)) => Ok(Some(s.len() as u128)),
            Val::Lazy(s) => Ok(s.card()),
            Val::Plain(other) => Err(EvalError::Unsupported(format!(
                "expected a set, found a {}",
                other.kind()
            ))),
        }
    }

    fn stream(&self, v: &Val) -> R<Box<dyn Iterator<Item = Value>>> {
        match v {
            Val::Plain(Value::Set(s)) => {
                let items = s.clone();
                Ok(if self.reverse {
                    Box::new(items.into_iter().rev())
                } else {
                    Box::new(items.into_iter())
                })
            }
            Val::Lazy(s) => Ok(s.elements(self.reverse)),
            Val::Plain(other) => Err(EvalError::Unsupported(format!(
                "expected a set, found a {}",
                other.kind()
            ))),
        }
    }

    fn contains(&self, s: &Val, v: &Value) -> R<bool> {
        match s {
            Val::Plain(Value::Set(items)) => Ok(items.contains(v)),
            Val::Lazy(s) => Ok(s.contains(v)),
            Val::Plain(other) => Err(EvalError::Unsupported(format!(
                "membership in a {}",
                other.kind()
            ))),
        }
    }

    fn values_equal(&mut self, a: &Val, b: &Val) -> R<bool> {
        match (a, b) {
            (Val::Plain(x), Val::Plain(y)) => {
                if std::mem::discriminant(x) != std::mem::discriminant(y) {
                    return Err(EvalError::Unsupported(format!(
                        "cannot compare a {} with a {}",
                        x.kind(),
                        y.kind()
                    )));
                }
                Ok(x == y)
            }
            _ => self.sets_equal(a, b),
        }
    }

    fn sets_equal(&mut self, a: &Val, b: &Val) -> R<bool> {
        if let (Val::Lazy(x), Val::Lazy(y)) = (a, b) {
            if x.same_description(y) {
                return Ok(true);
            }
        }
        let (ca, cb) = (self.card_of(a)?, self.card_of(b)?);
        let (probe, other) = match (ca, cb) {
            (Some(x), Some(y)) if x != y => return Ok(false),
            (None, None) => {
                return Err(EvalError::Unsupported(
                    "cannot compare sets of this size".into(),
                ))
            }
            (Some(_), None) | (None, Some(_)) => return Ok(false),
            // equal cardinality: inclusion one way suffices
            _ => match (a, b) {
                (Val::Lazy(_), Val::Plain(_)) => (b, a),
                _ => (a, b),
            },
        };
        for x in self.stream(probe)? {
            self.tick()?;
            if !self.contains(other, &x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn subset(&mut self, a: &Val, b: &Val) -> R<bool> {
        if let (Val::Lazy(x), Val::Lazy(y)) = (a, b) {
            match (&**x, &**y) {
                (LazySet::Interval(a1, a2), LazySet::Interval(b1, b2)) => {
                    return Ok(a1 > a2 || (b1 <= a1 && a2 <= b2))
                }
                (LazySet::PowerSet(xs), LazySet::PowerSet(ys)) => {
                    return Ok(xs.iter().all(|v| ys.binary_search(v).is_ok()))
                }
                _ => {}
            }
        }
        let (ca, cb) = (self.card_of(a)?, self.card_of(b)?);
        match (ca, cb) {
            (Some(x), Some(y)) if x > y => return Ok(false),
            (None, Some(_)) => return Ok(false),
            (None, None) => {
                return Err(EvalError::Unsupported(
                    "cannot compare sets of this size".into(),
                ))
            }
            _ => {}
        }
        for x in self.stream(a)? {
            self.tick()?;
            if !self.contains(b, &x)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn lift(r: R<bool>) -> Result<Truth, Halt> {
    match r {
        Ok(true) => Ok(Truth::True),
        Ok(false) => Ok(Truth::False(Vec::new())),
        Err(EvalError::Timeout) => Err(Halt),
        Err(e) => Ok(Truth::Unknown(e)),
    }
}

fn prepend(head: Option<(String, Value)>, mut tail: Witness) -> Witness {
    if let Some(h) = head {
        tail.insert(0, h);
    }
    tail
}

/// Orders the free identifiers of a predicate: each is bound by an equation
/// `id = e` or enumerated over a membership `id : D` among `antecedents`,
/// where `e`/`D` only mention identifiers resolved earlier. Equations win
/// over memberships. Returns the unresolved identifiers on failure.
pub(crate) fn resolve_free<'e>(
    free: &[String],
    antecedents: &[&'e Expr],
) -> Result<Vec<Step<'e>>, Vec<String>> {
    let mut resolved: Vec<String> = Vec::new();
    let mut pending: Vec<String> = free.to_vec();
    let mut plan = Vec::new();
    let ready = |e: &Expr, resolved: &[String]| e.free_vars().iter().all(|v| resolved.contains(v));

    while !pending.is_empty() {
        let mut found = None;
        'eq: for (i, id) in pending.iter().enumerate() {
            for c in antecedents {
                if let Expr::Binary(BinOp::Eq, l, r) = c {
                    let other = match (&**l, &**r) {
                        (Expr::Ident(n), other) if n == id => other,
                        (other, Expr::Ident(n)) if n == id => other,
                        _ => continue,
                    };
                    if !other.mentions(id) && ready(other, &resolved) {
                        found = Some((i, Step::Bind(id.clone(), other)));
                        break 'eq;
                    }
                }
            }
        }
        if found.is_none() {
            'mem: for (i, id) in pending.iter().enumerate() {
                for c in antecedents {
                    if let Expr::Binary(BinOp::Member, l, d) = c {
                        if matches!(&**l, Expr::Ident(n) if n == id)
                            && !d.mentions(id)
                            && ready(d, &resolved)
                        {
                            found = Some((i, Step::Enumerate(id.clone(), d)));
                            break 'mem;
                        }
                    }
                }
            }
        }
        match found {
            Some((i, step)) => {
                resolved.push(pending.remove(i));
                plan.push(step);
            }
            None => return Err(pending),
        }
    }
    Ok(plan)
}

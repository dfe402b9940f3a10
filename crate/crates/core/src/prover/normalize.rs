//! Canonical forms for syntactic matching.
//!
//! Every rewrite keeps the value of a predicate wherever the evaluator can
//! compute it: folding only happens on literals, reflexivity only on
//! expressions that are always defined, and the logical simplifications are
//! valid in Kleene's three-valued logic.

use crate::syntax::{BinOp, Builtin, Expr};

/// Literal folding stays inside the default integer range, so a folded
/// constant is one the evaluator would also accept.
const FOLD_LIMIT: i64 = 65536;

pub fn normalize(e: &Expr) -> Expr {
    let mut current = step(e);
    // `step` is close to a normal-form builder already; the loop catches
    // rewrites that enable others one level up.
    for _ in 0..32 {
        let next = step(&current);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

fn literal(n: Option<i64>) -> Option<Expr> {
    n.filter(|n| n.abs() <= FOLD_LIMIT).map(Expr::Int)
}

fn step(e: &Expr) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Ident(_) => e.clone(),
        Expr::Neg(inner) => match step(inner) {
            Expr::Int(n) => literal(n.checked_neg()).unwrap_or(Expr::neg(Expr::Int(n))),
            Expr::Neg(x) => *x,
            other => Expr::Neg(Box::new(other)),
        },
        Expr::Not(inner) => negate(step(inner)),
        Expr::Binary(op, l, r) => binary(*op, step(l), step(r)),
        Expr::Call(f, arg) => Expr::call(*f, step(arg)),
        Expr::Apply(f, arg) => Expr::apply(step(f), step(arg)),
        Expr::Quant {
            kind,
            var,
            domain,
            body,
        } => Expr::Quant {
            kind: *kind,
            var: var.clone(),
            domain: Box::new(step(domain)),
            body: Box::new(step(body)),
        },
        Expr::SetExt(items) => {
            let mut items: Vec<Expr> = items.iter().map(step).collect();
            items.sort();
            items.dedup();
            Expr::SetExt(items)
        }
        Expr::SeqExt(items) => Expr::SeqExt(items.iter().map(step).collect()),
    }
}

fn negate(p: Expr) -> Expr {
    match p {
        Expr::Bool(b) => Expr::Bool(!b),
        Expr::Not(inner) => *inner,
        Expr::Binary(BinOp::Eq, l, r) => Expr::Binary(BinOp::Neq, l, r),
        Expr::Binary(BinOp::Neq, l, r) => Expr::Binary(BinOp::Eq, l, r),
        Expr::Binary(BinOp::Member, l, r) => Expr::Binary(BinOp::NotMember, l, r),
        Expr::Binary(BinOp::NotMember, l, r) => Expr::Binary(BinOp::Member, l, r),
        Expr::Binary(BinOp::Lt, l, r) => Expr::Binary(BinOp::Le, r, l),
        Expr::Binary(BinOp::Le, l, r) => Expr::Binary(BinOp::Lt, r, l),
        other => Expr::not(other),
    }
}

/// Whether `e` denotes an integer whenever it is defined.
fn is_arith(e: &Expr) -> bool {
    match e {
        Expr::Int(_) | Expr::Neg(_) => true,
        Expr::Call(Builtin::Card | Builtin::Size, _) => true,
        Expr::Binary(BinOp::Add | BinOp::Div | BinOp::Mod | BinOp::Pow, _, _) => true,
        Expr::Binary(BinOp::Mul | BinOp::Sub, l, r) => is_arith(l) || is_arith(r),
        _ => false,
    }
}

/// Defined for every assignment of its free identifiers: no partial
/// operators and no way to leave the integer range.
fn always_defined(e: &Expr) -> bool {
    match e {
        Expr::Int(n) => n.abs() <= FOLD_LIMIT,
        Expr::Bool(_) | Expr::Ident(_) => true,
        Expr::SetExt(items) | Expr::SeqExt(items) => items.iter().all(always_defined),
        Expr::Binary(
            BinOp::Interval | BinOp::Union | BinOp::Inter | BinOp::Maplet,
            l,
            r,
        ) => always_defined(l) && always_defined(r),
        _ => false,
    }
}

fn flatten(op: BinOp, e: Expr, out: &mut Vec<Expr>) {
    match e {
        Expr::Binary(o, l, r) if o == op => {
            flatten(op, *l, out);
            flatten(op, *r, out);
        }
        other => out.push(other),
    }
}

fn rebuild(op: BinOp, parts: Vec<Expr>) -> Option<Expr> {
    parts.into_iter().reduce(|acc, p| Expr::binary(op, acc, p))
}

fn binary(op: BinOp, l: Expr, r: Expr) -> Expr {
    use BinOp::*;
    match (op, &l, &r) {
        (And | Or, _, _) => junction(op, l, r),
        (Implies, Expr::Bool(false), _) | (Implies, _, Expr::Bool(true)) => Expr::Bool(true),
        (Implies, Expr::Bool(true), _) => r,
        (Implies, _, Expr::Bool(false)) => negate(l),
        (Equiv, Expr::Bool(true), _) => r,
        (Equiv, _, Expr::Bool(true)) => l,
        (Equiv, Expr::Bool(false), _) => negate(r),
        (Equiv, _, Expr::Bool(false)) => negate(l),
        (Equiv, _, _) => sorted(op, l, r),
        (Add, _, _) => sum(l, r),
        (Mul, Expr::Int(a), Expr::Int(b)) => {
            literal(a.checked_mul(*b)).unwrap_or_else(|| sorted(op, l, r))
        }
        (Mul, _, _) if is_arith(&l) || is_arith(&r) => sorted(op, l, r),
        (Sub, Expr::Int(a), Expr::Int(b)) => {
            literal(a.checked_sub(*b)).unwrap_or_else(|| Expr::binary(op, l, r))
        }
        (Div, Expr::Int(a), Expr::Int(b)) if *b != 0 => {
            literal(a.checked_div(*b)).unwrap_or_else(|| Expr::binary(op, l, r))
        }
        (Mod, Expr::Int(a), Expr::Int(b)) if *b > 0 => Expr::Int(a % b),
        (Eq | Neq, Expr::Int(a), Expr::Int(b)) => Expr::Bool((a == b) == (op == Eq)),
        (Lt, Expr::Int(a), Expr::Int(b)) => Expr::Bool(a < b),
        (Le, Expr::Int(a), Expr::Int(b)) => Expr::Bool(a <= b),
        (Eq | Neq, _, _) if l == r && always_defined(&l) => Expr::Bool(op == Eq),
        (Eq | Neq, _, _) => sorted(op, l, r),
        (Gt, _, _) => binary(Lt, r, l),
        (Ge, _, _) => binary(Le, r, l),
        _ => Expr::binary(op, l, r),
    }
}

fn sorted(op: BinOp, l: Expr, r: Expr) -> Expr {
    if r < l {
        Expr::binary(op, r, l)
    } else {
        Expr::binary(op, l, r)
    }
}

/// Flattened, sorted, deduplicated `&` / `or` chain with the units removed.
fn junction(op: BinOp, l: Expr, r: Expr) -> Expr {
    let (unit, zero) = if op == BinOp::And { (true, false) } else { (false, true) };
    let mut parts = Vec::new();
    flatten(op, l, &mut parts);
    flatten(op, r, &mut parts);
    if parts.contains(&Expr::Bool(zero)) {
        return Expr::Bool(zero);
    }
    parts.retain(|p| *p != Expr::Bool(unit));
    parts.sort();
    parts.dedup();
    rebuild(op, parts).unwrap_or(Expr::Bool(unit))
}

/// Flattened sum with its literal terms folded into one trailing constant.
fn sum(l: Expr, r: Expr) -> Expr {
    let mut parts = Vec::new();
    flatten(BinOp::Add, l, &mut parts);
    flatten(BinOp::Add, r, &mut parts);
    let mut constant: Option<i64> = Some(0);
    let mut any_literal = false;
    let mut rest = Vec::new();
    for p in parts {
        match p {
            Expr::Int(n) => {
                any_literal = true;
                constant = constant.and_then(|c| c.checked_add(n));
                rest.push(Expr::Int(n));
            }
            other => rest.push(other),
        }
    }
    if let Some(c) = constant.filter(|c| any_literal && c.abs() <= FOLD_LIMIT) {
        rest.retain(|p| !matches!(p, Expr::Int(_)));
        if c != 0 || rest.is_empty() {
            rest.push(Expr::Int(c));
        }
    }
    rest.sort();
    rebuild(BinOp::Add, rest).expect("a sum has at least one term")
}

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use bevalkit_core::syntax::{BinOp, Builtin, Expr, Quantifier};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixtures_dir().join(name)).expect("fixture exists")
}

/// Copies every bundled fixture into a fresh directory.
pub fn fixture_workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in std::fs::read_dir(fixtures_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "pos") {
            std::fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
        }
    }
    dir
}

fn int(n: i64) -> Expr {
    Expr::Int(n)
}

fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
    Expr::binary(op, l, r)
}

// ---------------------------------------------------------------------------
// Untyped ASTs, for round-trip and normalization properties.

const NAMES: [&str; 6] = ["x", "y", "z", "f", "S", "BYTE"];

const BINOPS: [BinOp; 26] = [
    BinOp::Add,
    BinOp::Sub,
    BinOp::Mul,
    BinOp::Div,
    BinOp::Mod,
    BinOp::Pow,
    BinOp::Eq,
    BinOp::Neq,
    BinOp::Lt,
    BinOp::Le,
    BinOp::Gt,
    BinOp::Ge,
    BinOp::And,
    BinOp::Or,
    BinOp::Implies,
    BinOp::Equiv,
    BinOp::Interval,
    BinOp::Union,
    BinOp::Inter,
    BinOp::Member,
    BinOp::NotMember,
    BinOp::Subset,
    BinOp::Maplet,
    BinOp::Relations,
    BinOp::TotalFns,
    BinOp::PartialFns,
];

const BUILTINS: [Builtin; 5] = [Builtin::Pow, Builtin::Dom, Builtin::Ran, Builtin::Card, Builtin::Size];

/// Any well-formed tree of depth at most `depth`, in the shape the parser
/// produces (negative literals folded, no `-` applied to a literal).
pub fn random_ast(rng: &mut StdRng, depth: u32) -> Expr {
    if depth <= 1 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..4) {
            0 => int(rng.gen_range(-20..300)),
            1 => Expr::Bool(rng.gen()),
            _ => Expr::ident(*NAMES.choose(rng).unwrap()),
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..20) {
        0 => {
            let inner = random_ast(rng, d);
            if matches!(inner, Expr::Int(_)) {
                inner
            } else {
                Expr::neg(inner)
            }
        }
        1 => Expr::not(random_ast(rng, d)),
        2 => Expr::call(*BUILTINS.choose(rng).unwrap(), random_ast(rng, d)),
        3 => Expr::apply(random_ast(rng, d), random_ast(rng, d)),
        4 => {
            let kind = if rng.gen() { Quantifier::ForAll } else { Quantifier::Exists };
            Expr::Quant {
                kind,
                var: (*["i", "j", "k"].choose(rng).unwrap()).to_string(),
                domain: Box::new(random_ast(rng, d)),
                body: Box::new(random_ast(rng, d)),
            }
        }
        5 => {
            let n = rng.gen_range(0..4);
            Expr::SetExt((0..n).map(|_| random_ast(rng, d)).collect())
        }
        6 => {
            let n = rng.gen_range(0..4);
            Expr::SeqExt((0..n).map(|_| random_ast(rng, d)).collect())
        }
        _ => bin(*BINOPS.choose(rng).unwrap(), random_ast(rng, d), random_ast(rng, d)),
    }
}

// ---------------------------------------------------------------------------
// Typed, finite predicates with a brute-force oracle.

/// An integer variable with its finite domain.
#[derive(Clone, Debug)]
pub struct Var {
    pub name: String,
    pub domain: Vec<i64>,
}

/// A generated instance: `goal` over the free variables `vars`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub vars: Vec<Var>,
    pub goal: Expr,
    /// Upper bound on valuations visited, nested quantifiers included.
    pub space: u64,
}

impl Instance {
    /// `x : D` hypotheses, one per variable.
    pub fn hypotheses(&self) -> Vec<Expr> {
        self.vars.iter().map(|v| bin(BinOp::Member, Expr::ident(&v.name), domain_expr(&v.domain))).collect()
    }

    /// The same question with every variable bound by `!x.(x : D => ...)`.
    pub fn closed(&self) -> Expr {
        self.vars.iter().rev().fold(self.goal.clone(), |body, v| Expr::Quant {
            kind: Quantifier::ForAll,
            var: v.name.clone(),
            domain: Box::new(domain_expr(&v.domain)),
            body: Box::new(body),
        })
    }
}

/// Intervals when contiguous, extensions otherwise.
fn domain_expr(d: &[i64]) -> Expr {
    let contiguous = d.windows(2).all(|w| w[1] == w[0] + 1);
    if contiguous && d.len() > 1 {
        bin(BinOp::Interval, int(d[0]), int(*d.last().unwrap()))
    } else {
        Expr::SetExt(d.iter().copied().map(int).collect())
    }
}

/// Keeps every intermediate integer well inside the default MAXINT so
/// that the oracle never has to model overflow.
const MAGNITUDE: i64 = 2000;

struct Gen<'a> {
    rng: &'a mut StdRng,
    /// Bound variables in scope with their magnitude bound.
    scope: Vec<(String, i64)>,
    /// Remaining multiplicative budget for nested quantifiers.
    budget: u64,
    fresh: usize,
}

impl Gen<'_> {
    fn int_expr(&mut self, depth: u32) -> (Expr, i64) {
        if depth == 0 || self.rng.gen_bool(0.3) {
            if !self.scope.is_empty() && self.rng.gen_bool(0.7) {
                let (name, m) = self.scope.choose(self.rng).unwrap().clone();
                return (Expr::ident(name), m);
            }
            let n = self.rng.gen_range(-3..=6);
            return (int(n), n.abs());
        }
        let d = depth - 1;
        match self.rng.gen_range(0..9) {
            0 | 1 => {
                let (a, ma) = self.int_expr(d);
                let (b, mb) = self.int_expr(d);
                (bin(BinOp::Add, a, b), ma + mb)
            }
            2 => {
                let (a, ma) = self.int_expr(d);
                let (b, mb) = self.int_expr(d);
                (bin(BinOp::Sub, a, b), ma + mb)
            }
            3 => {
                let (a, ma) = self.int_expr(d);
                let (b, mb) = self.int_expr(d);
                if ma * mb <= MAGNITUDE {
                    (bin(BinOp::Mul, a, b), ma * mb)
                } else {
                    (a, ma)
                }
            }
            4 => {
                let (a, ma) = self.int_expr(d);
                let k = self.rng.gen_range(1..=4);
                let op = if self.rng.gen() { BinOp::Div } else { BinOp::Mod };
                (bin(op, a, int(k)), ma)
            }
            5 => {
                let (a, ma) = self.int_expr(d);
                let e = self.rng.gen_range(0..=3u32);
                if ma.pow(e) <= MAGNITUDE {
                    (bin(BinOp::Pow, a, int(e as i64)), ma.pow(e).max(1))
                } else {
                    (a, ma)
                }
            }
            6 => {
                let (a, ma) = self.int_expr(d);
                if matches!(a, Expr::Int(_)) {
                    (a, ma)
                } else {
                    (Expr::neg(a), ma)
                }
            }
            7 => {
                let (s, ms) = self.set_expr(d);
                (Expr::call(Builtin::Card, s), 2 * ms + 1)
            }
            _ => {
                let (a, ma) = self.int_expr(d);
                (a, ma)
            }
        }
    }

    /// A set of integers and a bound on the magnitude of its elements.
    fn set_expr(&mut self, depth: u32) -> (Expr, i64) {
        let d = depth.saturating_sub(1);
        match self.rng.gen_range(0..5) {
            0 | 1 => {
                let (a, ma) = self.int_expr(d);
                let (b, mb) = self.int_expr(d);
                (bin(BinOp::Interval, a, b), ma.max(mb))
            }
            2 => {
                let n = self.rng.gen_range(0..4);
                let mut m = 0;
                let items = (0..n)
                    .map(|_| {
                        let (e, me) = self.int_expr(d);
                        m = m.max(me);
                        e
                    })
                    .collect();
                (Expr::SetExt(items), m)
            }
            _ if depth > 0 => {
                let (a, ma) = self.set_expr(d);
                let (b, mb) = self.set_expr(d);
                let op = if self.rng.gen() { BinOp::Union } else { BinOp::Inter };
                (bin(op, a, b), ma.max(mb))
            }
            _ => (bin(BinOp::Interval, int(0), int(self.rng.gen_range(-1..5))), 4),
        }
    }

    fn pred(&mut self, depth: u32) -> Expr {
        if depth == 0 {
            return self.atom(0);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..12) {
            0 => bin(BinOp::And, self.pred(d), self.pred(d)),
            1 => bin(BinOp::Or, self.pred(d), self.pred(d)),
            2 => bin(BinOp::Implies, self.pred(d), self.pred(d)),
            3 => bin(BinOp::Equiv, self.pred(d), self.pred(d)),
            4 => Expr::not(self.pred(d)),
            5 | 6 => self.quantified(d),
            _ => self.atom(d),
        }
    }

    fn atom(&mut self, depth: u32) -> Expr {
        match self.rng.gen_range(0..10) {
            0 => Expr::Bool(self.rng.gen()),
            1 | 2 => {
                let (a, _) = self.int_expr(depth);
                let (s, _) = self.set_expr(depth);
                let op = if self.rng.gen() { BinOp::Member } else { BinOp::NotMember };
                bin(op, a, s)
            }
            3 => {
                let (s, _) = self.set_expr(depth);
                let (t, _) = self.set_expr(depth);
                let op = if self.rng.gen() { BinOp::Subset } else { BinOp::Eq };
                bin(op, s, t)
            }
            _ => {
                let (a, _) = self.int_expr(depth);
                let (b, _) = self.int_expr(depth);
                let op = *[BinOp::Eq, BinOp::Neq, BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge]
                    .choose(self.rng)
                    .unwrap();
                bin(op, a, b)
            }
        }
    }

    fn quantified(&mut self, depth: u32) -> Expr {
        let lo = self.rng.gen_range(-2..=3);
        let size = self.rng.gen_range(1..=4u64);
        if size > self.budget / 2 || self.budget < 2 {
            return self.atom(depth);
        }
        self.budget /= size;
        let var = format!("q{}", self.fresh);
        self.fresh += 1;
        let hi = lo + size as i64 - 1;
        self.scope.push((var.clone(), lo.abs().max(hi.abs())));
        let body = self.pred(depth);
        self.scope.pop();
        let kind = if self.rng.gen() { Quantifier::ForAll } else { Quantifier::Exists };
        Expr::Quant {
            kind,
            var,
            domain: Box::new(bin(BinOp::Interval, int(lo), int(hi))),
            body: Box::new(body),
        }
    }
}

/// A predicate over 1-3 free integer variables whose total search space
/// (free valuations times nested quantifier domains) stays within 2^10.
pub fn random_instance(rng: &mut StdRng) -> Instance {
    let n = rng.gen_range(1..=3);
    let mut vars = Vec::new();
    let mut space = 1u64;
    for name in ["x", "y", "z"].iter().take(n) {
        let size = rng.gen_range(1..=8usize);
        let lo = rng.gen_range(-3..=4);
        let domain: Vec<i64> = if rng.gen_bool(0.3) {
            let mut d: BTreeSet<i64> = BTreeSet::new();
            for _ in 0..size {
                d.insert(rng.gen_range(-4..=8));
            }
            d.into_iter().collect()
        } else {
            (lo..lo + size as i64).collect()
        };
        space *= domain.len() as u64;
        vars.push(Var { name: (*name).to_string(), domain });
    }
    let scope = vars
        .iter()
        .map(|v| (v.name.clone(), v.domain.iter().map(|x| x.abs()).max().unwrap()))
        .collect();
    let mut g = Gen {
        rng,
        scope,
        budget: 1024 / space,
        fresh: 0,
    };
    let depth = g.rng.gen_range(1..=4);
    let goal = g.pred(depth);
    let space = space * (1024 / space / g.budget.max(1)).max(1);
    Instance { vars, goal, space }
}

// ---------------------------------------------------------------------------
// The oracle: a direct two-valued interpreter for the generated fragment.

type Env = Vec<(String, i64)>;

fn lookup(env: &Env, name: &str) -> i64 {
    env.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v).expect("bound variable")
}

fn oracle_int(e: &Expr, env: &Env) -> i64 {
    match e {
        Expr::Int(n) => *n,
        Expr::Ident(n) => lookup(env, n),
        Expr::Neg(a) => -oracle_int(a, env),
        Expr::Call(Builtin::Card, s) => oracle_set(s, env).len() as i64,
        Expr::Binary(op, a, b) => {
            let (x, y) = (oracle_int(a, env), oracle_int(b, env));
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => x / y,
                BinOp::Mod => x % y,
                BinOp::Pow => (0..y).fold(1, |acc, _| acc * x),
                _ => panic!("not an integer operator: {op:?}"),
            }
        }
        other => panic!("not an integer expression: {other:?}"),
    }
}

fn oracle_set(e: &Expr, env: &Env) -> BTreeSet<i64> {
    match e {
        Expr::SetExt(items) => items.iter().map(|i| oracle_int(i, env)).collect(),
        Expr::Binary(BinOp::Interval, a, b) => (oracle_int(a, env)..=oracle_int(b, env)).collect(),
        Expr::Binary(BinOp::Union, a, b) => &oracle_set(a, env) | &oracle_set(b, env),
        Expr::Binary(BinOp::Inter, a, b) => &oracle_set(a, env) & &oracle_set(b, env),
        other => panic!("not a set expression: {other:?}"),
    }
}

fn is_set(e: &Expr) -> bool {
    matches!(
        e,
        Expr::SetExt(_) | Expr::Binary(BinOp::Interval | BinOp::Union | BinOp::Inter, _, _)
    )
}

pub fn oracle_pred(p: &Expr, env: &mut Env) -> bool {
    match p {
        Expr::Bool(b) => *b,
        Expr::Not(a) => !oracle_pred(a, env),
        Expr::Binary(op, a, b) => match op {
            BinOp::And => oracle_pred(a, env) && oracle_pred(b, env),
            BinOp::Or => oracle_pred(a, env) || oracle_pred(b, env),
            BinOp::Implies => !oracle_pred(a, env) || oracle_pred(b, env),
            BinOp::Equiv => oracle_pred(a, env) == oracle_pred(b, env),
            BinOp::Member => oracle_set(b, env).contains(&oracle_int(a, env)),
            BinOp::NotMember => !oracle_set(b, env).contains(&oracle_int(a, env)),
            BinOp::Subset => oracle_set(a, env).is_subset(&oracle_set(b, env)),
            BinOp::Eq if is_set(a) => oracle_set(a, env) == oracle_set(b, env),
            BinOp::Eq => oracle_int(a, env) == oracle_int(b, env),
            BinOp::Neq => oracle_int(a, env) != oracle_int(b, env),
            BinOp::Lt => oracle_int(a, env) < oracle_int(b, env),
            BinOp::Le => oracle_int(a, env) <= oracle_int(b, env),
            BinOp::Gt => oracle_int(a, env) > oracle_int(b, env),
            BinOp::Ge => oracle_int(a, env) >= oracle_int(b, env),
            _ => panic!("not a predicate operator: {op:?}"),
        },
        Expr::Quant { kind, var, domain, body } => {
            let dom = oracle_set(domain, env);
            let mut check = |v: i64| {
                env.push((var.clone(), v));
                let r = oracle_pred(body, env);
                env.pop();
                r
            };
            match kind {
                Quantifier::ForAll => dom.into_iter().all(&mut check),
                Quantifier::Exists => dom.into_iter().any(&mut check),
            }
        }
        other => panic!("not a predicate: {other:?}"),
    }
}

/// Whether the goal holds for every valuation of the free variables.
pub fn oracle(inst: &Instance) -> bool {
    fn go(vars: &[Var], goal: &Expr, env: &mut Env) -> bool {
        let Some((v, rest)) = vars.split_first() else {
            return oracle_pred(goal, env);
        };
        v.domain.iter().all(|&x| {
            env.push((v.name.clone(), x));
            let r = go(rest, goal, env);
            env.pop();
            r
        })
    }
    go(&inst.vars, &inst.goal, &mut Vec::new())
}

//! Abstract syntax for the B predicate/expression fragment.

use std::collections::BTreeSet;
use std::fmt;

/// Binary operators, covering arithmetic, logic, comparison and set/relation
/// constructors. `*` and `-` are overloaded: multiplication/subtraction on
/// integers, cartesian product/difference on sets. The evaluator dispatches on
/// the operand kinds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Pow,
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    Implies,
    Equiv,
    Interval,
    Union,
    Inter,
    Member,
    NotMember,
    Subset,
    Maplet,
    Relations,
    TotalFns,
    PartialFns,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "mod",
            BinOp::Pow => "**",
            BinOp::Eq => "=",
            BinOp::Neq => "/=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "&",
            BinOp::Or => "or",
            BinOp::Implies => "=>",
            BinOp::Equiv => "<=>",
            BinOp::Interval => "..",
            BinOp::Union => "\\/",
            BinOp::Inter => "/\\",
            BinOp::Member => ":",
            BinOp::NotMember => "/:",
            BinOp::Subset => "<:",
            BinOp::Maplet => "|->",
            BinOp::Relations => "<->",
            BinOp::TotalFns => "-->",
            BinOp::PartialFns => "+->",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Equiv => 1,
            BinOp::Implies => 2,
            BinOp::Or => 3,
            BinOp::And => 4,
            BinOp::Eq
            | BinOp::Neq
            | BinOp::Lt
            | BinOp::Le
            | BinOp::Gt
            | BinOp::Ge
            | BinOp::Member
            | BinOp::NotMember
            | BinOp::Subset => 6,
            BinOp::Union
            | BinOp::Inter
            | BinOp::Maplet
            | BinOp::Relations
            | BinOp::TotalFns
            | BinOp::PartialFns => 7,
            BinOp::Interval => 8,
            BinOp::Add | BinOp::Sub => 9,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 10,
            BinOp::Pow => 12,
        }
    }

    pub fn is_right_assoc(self) -> bool {
        matches!(self, BinOp::Implies | BinOp::Pow)
    }

    pub fn is_logical(self) -> bool {
        matches!(
            self,
            BinOp::And | BinOp::Or | BinOp::Implies | BinOp::Equiv
        )
    }

    /// Operators whose result is a truth value.
    pub fn is_predicate(self) -> bool {
        self.is_logical() || self.precedence() == 6
    }

    /// Set-of-relations constructors; rendered parenthesized when nested.
    pub fn is_relation_space(self) -> bool {
        matches!(self, BinOp::Relations | BinOp::TotalFns | BinOp::PartialFns)
    }
}

/// Prefix operators written `keyword(arg)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Builtin {
    Pow,
    Dom,
    Ran,
    Card,
    Size,
}

impl Builtin {
    pub fn keyword(self) -> &'static str {
        match self {
            Builtin::Pow => "POW",
            Builtin::Dom => "dom",
            Builtin::Ran => "ran",
            Builtin::Card => "card",
            Builtin::Size => "size",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

/// A B predicate or expression.
///
/// A negated integer literal is always represented as `Int(-n)`; the parser
/// folds `-<literal>` so that printing and re-parsing agree.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Ident(String),
    Neg(Box<Expr>),
    Not(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Builtin, Box<Expr>),
    Apply(Box<Expr>, Box<Expr>),
    /// `!x.(x : domain => body)` or `#x.(x : domain & body)`.
    Quant {
        kind: Quantifier,
        var: String,
        domain: Box<Expr>,
        body: Box<Expr>,
    },
    SetExt(Vec<Expr>),
    SeqExt(Vec<Expr>),
}

impl Expr {
    pub fn ident(name: impl Into<String>) -> Expr {
        Expr::Ident(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    /// Unary minus, folding literals into negative constants.
    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Int(n) if n != i64::MIN => Expr::Int(-n),
            other => Expr::Neg(Box::new(other)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expr) -> Expr {
        Expr::Not(Box::new(e))
    }

    pub fn call(f: Builtin, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn apply(f: Expr, arg: Expr) -> Expr {
        Expr::Apply(Box::new(f), Box::new(arg))
    }

    /// Left-nested conjunction of `parts`; `TRUE` when empty.
    pub fn conjunction(parts: impl IntoIterator<Item = Expr>) -> Expr {
        parts
            .into_iter()
            .reduce(|acc, p| Expr::binary(BinOp::And, acc, p))
            .unwrap_or(Expr::Bool(true))
    }

    /// `h1 & ... & hn => goal`, or just `goal` without hypotheses.
    pub fn implication(hyps: &[Expr], goal: Expr) -> Expr {
        if hyps.is_empty() {
            goal
        } else {
            Expr::binary(BinOp::Implies, Expr::conjunction(hyps.iter().cloned()), goal)
        }
    }

    /// Flattens a left/right nesting of `&` into its conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Binary(BinOp::And, l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    pub fn is_predicate(&self) -> bool {
        match self {
            Expr::Bool(_) | Expr::Not(_) | Expr::Quant { .. } => true,
            Expr::Binary(op, _, _) => op.is_predicate(),
            _ => false,
        }
    }

    /// Identifiers occurring free, in order of first occurrence.
    pub fn free_vars(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut bound = Vec::new();
        self.collect_free(&mut bound, &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<String>, out: &mut Vec<String>) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Ident(n) => {
                if !bound.contains(n) && !out.contains(n) {
                    out.push(n.clone());
                }
            }
            Expr::Neg(e) | Expr::Not(e) | Expr::Call(_, e) => e.collect_free(bound, out),
            Expr::Binary(_, l, r) | Expr::Apply(l, r) => {
                l.collect_free(bound, out);
                r.collect_free(bound, out);
            }
            Expr::Quant {
                var, domain, body, ..
            } => {
                domain.collect_free(bound, out);
                bound.push(var.clone());
                body.collect_free(bound, out);
                bound.pop();
            }
            Expr::SetExt(items) | Expr::SeqExt(items) => {
                for item in items {
                    item.collect_free(bound, out);
                }
            }
        }
    }

    pub fn mentions(&self, name: &str) -> bool {
        self.free_vars().iter().any(|n| n == name)
    }

    /// Capture-avoiding substitution of the free occurrences of `name`.
    pub fn substitute(&self, name: &str, replacement: &Expr) -> Expr {
        let fv: BTreeSet<String> = replacement.free_vars().into_iter().collect();
        self.subst_inner(name, replacement, &fv)
    }

    fn subst_inner(&self, name: &str, rep: &Expr, rep_free: &BTreeSet<String>) -> Expr {
        match self {
            Expr::Int(_) | Expr::Bool(_) => self.clone(),
            Expr::Ident(n) if n == name => rep.clone(),
            Expr::Ident(_) => self.clone(),
            Expr::Neg(e) => Expr::Neg(Box::new(e.subst_inner(name, rep, rep_free))),
            Expr::Not(e) => Expr::Not(Box::new(e.subst_inner(name, rep, rep_free))),
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.subst_inner(name, rep, rep_free))),
            Expr::Binary(op, l, r) => Expr::Binary(
                *op,
                Box::new(l.subst_inner(name, rep, rep_free)),
                Box::new(r.subst_inner(name, rep, rep_free)),
            ),
            Expr::Apply(l, r) => Expr::Apply(
                Box::new(l.subst_inner(name, rep, rep_free)),
                Box::new(r.subst_inner(name, rep, rep_free)),
            ),
            Expr::Quant {
                kind,
                var,
                domain,
                body,
            } => {
                let domain = Box::new(domain.subst_inner(name, rep, rep_free));
                if var == name {
                    return Expr::Quant {
                        kind: *kind,
                        var: var.clone(),
                        domain,
                        body: body.clone(),
                    };
                }
                if rep_free.contains(var) && body.mentions(name) {
                    let fresh = fresh_name(var, |c| {
                        rep_free.contains(c) || body.mentions(c) || c == name
                    });
                    let renamed = body.substitute(var, &Expr::Ident(fresh.clone()));
                    return Expr::Quant {
                        kind: *kind,
                        var: fresh,
                        domain,
                        body: Box::new(renamed.subst_inner(name, rep, rep_free)),
                    };
                }
                Expr::Quant {
                    kind: *kind,
                    var: var.clone(),
                    domain,
                    body: Box::new(body.subst_inner(name, rep, rep_free)),
                }
            }
            Expr::SetExt(items) => Expr::SetExt(
                items
                    .iter()
                    .map(|i| i.subst_inner(name, rep, rep_free))
                    .collect(),
            ),
            Expr::SeqExt(items) => Expr::SeqExt(
                items
                    .iter()
                    .map(|i| i.subst_inner(name, rep, rep_free))
                    .collect(),
            ),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Ident(_) => 1,
            Expr::Neg(e) | Expr::Not(e) | Expr::Call(_, e) => 1 + e.size(),
            Expr::Binary(_, l, r) | Expr::Apply(l, r) => 1 + l.size() + r.size(),
            Expr::Quant { domain, body, .. } => 1 + domain.size() + body.size(),
            Expr::SetExt(items) | Expr::SeqExt(items) => {
                1 + items.iter().map(Expr::size).sum::<usize>()
            }
        }
    }
}

fn fresh_name(base: &str, taken: impl Fn(&str) -> bool) -> String {
    (1..)
        .map(|i| format!("{base}_{i}"))
        .find(|c| !taken(c))
        .expect("unbounded counter")
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&super::render(self))
    }
}

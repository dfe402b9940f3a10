//! Finite-domain evaluation of B predicates with a three-valued verdict.

mod engine;
mod params;
mod sets;
mod value;

use std::fmt;
use std::sync::atomic::AtomicBool;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::store::ProofObligation;
use crate::syntax::{BinOp, DefinitionTable, Expr};
use engine::{resolve_free, Engine, EngineConfig, Truth, Val};

pub use params::{EvalParams, ParamsError, CLPFD_MAX, CLPFD_MIN};
pub use sets::{LazySet, SpaceKind, ENUMERATION_CAP};
pub use value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    True,
    False,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::True => "TRUE",
            Verdict::False => "FALSE",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

/// Why a verdict is UNKNOWN.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reason {
    Timeout,
    UnboundedDomain,
    UnsupportedConstruct,
    UnknownIdentifier,
    /// Division by zero, application outside the domain, negative exponent.
    IllDefined,
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Reason::Timeout => "timeout",
            Reason::UnboundedDomain => "unbounded-domain",
            Reason::UnsupportedConstruct => "unsupported-construct",
            Reason::UnknownIdentifier => "unknown-identifier",
            Reason::IllDefined => "ill-defined",
        })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("time limit exceeded")]
    Timeout,
    #[error("outside the integer bounds: {0}")]
    UnboundedDomain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("ill-defined: {0}")]
    IllDefined(String),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

impl EvalError {
    pub fn reason(&self) -> Reason {
        match self {
            EvalError::Timeout => Reason::Timeout,
            EvalError::UnboundedDomain(_) => Reason::UnboundedDomain,
            EvalError::Unsupported(_) | EvalError::Params(_) => Reason::UnsupportedConstruct,
            EvalError::UnknownIdentifier(_) => Reason::UnknownIdentifier,
            EvalError::IllDefined(_) => Reason::IllDefined,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Binding {
    pub name: String,
    pub value: Value,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EvalResult {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub elapsed_ms: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Vec<Binding>>,
}

impl EvalResult {
    pub fn is_true(&self) -> bool {
        self.verdict == Verdict::True
    }

    fn unknown(err: &EvalError, elapsed_ms: u64) -> Self {
        EvalResult {
            verdict: Verdict::Unknown,
            reason: Some(err.reason()),
            message: Some(err.to_string()),
            elapsed_ms,
            counterexample: None,
        }
    }
}

/// Replaces every defined identifier by its (recursively expanded) body.
/// Undefined identifiers are left alone. `defs` must be acyclic, which
/// [`DefinitionTable`] guarantees.
pub fn expand(e: &Expr, defs: &DefinitionTable) -> Expr {
    let mut out = e.clone();
    for name in e.free_vars() {
        if let Some(body) = defs.get(&name) {
            out = out.substitute(&name, &expand(body, defs));
        }
    }
    out
}

/// Evaluation entry point carrying an optional cancellation flag; the free
/// functions below are shorthands for the uncancellable case.
pub struct Evaluator<'a> {
    params: &'a EvalParams,
    defs: &'a DefinitionTable,
    cancel: Option<&'a AtomicBool>,
}

impl<'a> Evaluator<'a> {
    pub fn new(params: &'a EvalParams, defs: &'a DefinitionTable) -> Self {
        Evaluator {
            params,
            defs,
            cancel: None,
        }
    }

    /// Setting `flag` makes a running evaluation stop with UNKNOWN(timeout).
    pub fn with_cancel(mut self, flag: &'a AtomicBool) -> Self {
        self.cancel = Some(flag);
        self
    }

    fn engine(&self, start: Instant) -> Engine<'a> {
        Engine::new(EngineConfig {
            bounds: self.params.int_bounds(),
            deadline: start + Duration::from_millis(self.params.timeout_ms),
            cancel: self.cancel,
            reverse: self.params.kodkod,
            propagate: self.params.smt,
        })
    }

    fn prepare(&self, e: &Expr) -> Expr {
        if self.params.init {
            expand(e, self.defs)
        } else {
            e.clone()
        }
    }

    pub fn expression(&self, e: &Expr) -> Result<Value, EvalError> {
        self.params.validate()?;
        let e = self.prepare(e);
        let mut engine = self.engine(Instant::now());
        let v: Val = engine.value(&e)?;
        engine.materialize(v)
    }

    pub fn predicate(&self, p: &Expr) -> EvalResult {
        let start = Instant::now();
        if let Err(e) = self.params.validate() {
            return EvalResult::unknown(&e.into(), elapsed_ms(start));
        }
        let p = self.prepare(p);
        let antecedents = match &p {
            Expr::Binary(BinOp::Implies, h, _) => h.conjuncts(),
            _ => Vec::new(),
        };
        let plan = match resolve_free(&p.free_vars(), &antecedents) {
            Ok(plan) => plan,
            Err(missing) => {
                let err = EvalError::UnknownIdentifier(missing.join("', '"));
                return EvalResult::unknown(&err, elapsed_ms(start));
            }
        };
        let mut engine = self.engine(start);
        let truth = engine.decide(&p, &plan, &antecedents);
        let elapsed = elapsed_ms(start);
        match truth {
            Ok(Truth::True) => EvalResult {
                verdict: Verdict::True,
                reason: None,
                message: None,
                elapsed_ms: elapsed,
                counterexample: None,
            },
            Ok(Truth::False(w)) => EvalResult {
                verdict: Verdict::False,
                reason: None,
                message: None,
                elapsed_ms: elapsed,
                counterexample: (!w.is_empty()).then(|| {
                    w.into_iter()
                        .map(|(name, value)| Binding { name, value })
                        .collect()
                }),
            },
            Ok(Truth::Unknown(e)) => EvalResult::unknown(&e, elapsed),
            Err(_) => EvalResult::unknown(&EvalError::Timeout, elapsed),
        }
    }

    /// Evaluates `H1 & ... & Hn => Goal`.
    pub fn check_po(&self, po: &ProofObligation) -> EvalResult {
        self.predicate(&Expr::implication(&po.hypotheses, po.goal.clone()))
    }
}

/// Rounded up, so a finished evaluation never reports 0 ms.
fn elapsed_ms(start: Instant) -> u64 {
    let us = start.elapsed().as_micros();
    u64::try_from(us.div_ceil(1000)).unwrap_or(u64::MAX).max(1)
}

pub fn eval_expression(
    e: &Expr,
    params: &EvalParams,
    defs: &DefinitionTable,
) -> Result<Value, EvalError> {
    Evaluator::new(params, defs).expression(e)
}

pub fn eval_predicate(p: &Expr, params: &EvalParams, defs: &DefinitionTable) -> EvalResult {
    Evaluator::new(params, defs).predicate(p)
}

pub fn check_po(po: &ProofObligation, params: &EvalParams, defs: &DefinitionTable) -> EvalResult {
    Evaluator::new(params, defs).check_po(po)
}

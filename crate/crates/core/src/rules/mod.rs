//! Proof rules derived from TRUE evaluations, in the pmm THEORY layout, and
//! the User_Pass theory that replays them.

mod clock;

use thiserror::Error;

use crate::eval::{EvalResult, Verdict};
use crate::store::{Component, Group, ProofObligation};
use crate::syntax::{parse_predicate, render, render_operand, Expr, ParseError};

pub use clock::{Clock, FixedClock, SystemClock};

/// Guards bind tighter than the `&` that joins them.
const GUARD_PRECEDENCE: u8 = 5;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub theory_name: String,
    pub po_name: String,
    pub description: String,
    pub timestamp: String,
    pub elapsed_ms: u64,
    pub module_path: String,
    pub guards: Vec<Expr>,
    pub conclusion: Expr,
    /// Lives in the `_wd.pmm` file.
    pub wd: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassEntry {
    /// Name of the proof obligation, matched exactly.
    pub selector: String,
    pub rule: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UserPass {
    pub entries: Vec<PassEntry>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("only TRUE evaluations become rules (verdict was {0})")]
    NotTrue(Verdict),
    #[error("a user pass needs at least one entry")]
    EmptyPass,
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: {source}")]
    Parse { line: usize, source: ParseError },
}

pub fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

/// Builds the rule `H1 & ... & Hn => Goal` for an obligation evaluated TRUE.
/// The theory name may still change on collision, see [`append_rule`].
pub fn make_rule(
    po: &ProofObligation,
    result: &EvalResult,
    clock: &dyn Clock,
    module_path: &str,
) -> Result<Rule, RuleError> {
    if result.verdict != Verdict::True {
        return Err(RuleError::NotTrue(result.verdict));
    }
    Ok(Rule {
        theory_name: format!("RulesProB{}", sanitize(&po.name)),
        po_name: po.name.clone(),
        description: format!("Check assertion ({}) deduction", render(&po.goal)),
        timestamp: clock.timestamp(),
        elapsed_ms: clock.duration_ms(result.elapsed_ms),
        module_path: module_path.to_string(),
        guards: po.hypotheses.clone(),
        conclusion: po.goal.clone(),
        wd: po.group == Group::Wd,
    })
}

pub fn render_rule(r: &Rule) -> String {
    let body = if r.guards.is_empty() {
        format!("({})", render(&r.conclusion))
    } else {
        let guards: Vec<String> = r
            .guards
            .iter()
            .map(|g| render_operand(g, GUARD_PRECEDENCE))
            .collect();
        format!("{} =>   ({})", guards.join(" & "), render(&r.conclusion))
    };
    format!(
        "THEORY {} IS \n  /* Expression from ({}), it was added  in {}\n  evaluated with ProB in {} milliseconds. Module Path:{} */\t \n  \"`{}'\"\n  {}\nEND\n",
        r.theory_name, r.po_name, r.timestamp, r.elapsed_ms, r.module_path, r.description, body
    )
}

/// Parses a pmm text back into rules. `wd` is recorded on every rule.
pub fn parse_pmm(text: &str, wd: bool) -> Result<Vec<Rule>, RuleError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut rules = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        if lines[i].trim().is_empty() {
            i += 1;
            continue;
        }
        if i + 5 >= lines.len() {
            return Err(format_err(i + 1, "truncated THEORY block"));
        }
        rules.push(parse_block(&lines[i..i + 6], i + 1, wd)?);
        i += 6;
    }
    Ok(rules)
}

fn format_err(line: usize, message: impl Into<String>) -> RuleError {
    RuleError::Format {
        line,
        message: message.into(),
    }
}

fn between<'a>(s: &'a str, start: &str, end: &str) -> Option<&'a str> {
    s.strip_prefix(start)?.strip_suffix(end)
}

fn parse_block(block: &[&str], first: usize, wd: bool) -> Result<Rule, RuleError> {
    let theory_name = between(block[0].trim_end(), "THEORY ", " IS")
        .ok_or_else(|| format_err(first, "expected 'THEORY <name> IS'"))?;
    let (po_name, timestamp) = block[1]
        .strip_prefix("  /* Expression from (")
        .and_then(|rest| rest.split_once("), it was added  in "))
        .ok_or_else(|| format_err(first + 1, "expected the 'Expression from' comment"))?;
    let (elapsed, module_path) = block[2]
        .strip_prefix("  evaluated with ProB in ")
        .and_then(|rest| rest.trim_end().strip_suffix("*/"))
        .and_then(|rest| rest.trim_end().split_once(" milliseconds. Module Path:"))
        .ok_or_else(|| format_err(first + 2, "expected the 'evaluated with ProB' comment"))?;
    let elapsed_ms = elapsed
        .parse()
        .map_err(|_| format_err(first + 2, format!("bad duration '{elapsed}'")))?;
    let description = between(block[3], "  \"`", "'\"")
        .ok_or_else(|| format_err(first + 3, "expected the quoted description"))?;
    let body = block[4]
        .strip_prefix("  ")
        .ok_or_else(|| format_err(first + 4, "expected the rule body"))?;
    let parse = |text: &str| {
        parse_predicate(text).map_err(|source| RuleError::Parse {
            line: first + 4,
            source,
        })
    };
    let (guards, conclusion) = match body.rfind(" =>   (") {
        Some(at) => {
            let guards = split_guards(&body[..at])
                .into_iter()
                .map(parse)
                .collect::<Result<Vec<_>, _>>()?;
            (guards, parse(&body[at + 5..])?)
        }
        None => (Vec::new(), parse(body)?),
    };
    if block[5].trim_end() != "END" {
        return Err(format_err(first + 5, "expected END"));
    }
    Ok(Rule {
        theory_name: theory_name.to_string(),
        po_name: po_name.to_string(),
        description: description.to_string(),
        timestamp: timestamp.to_string(),
        elapsed_ms,
        module_path: module_path.trim_end().to_string(),
        guards,
        conclusion,
        wd,
    })
}

/// Splits at the ` & ` separators outside any brackets.
fn split_guards(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let bytes = text.as_bytes();
    for (i, &b) in bytes.iter().enumerate() {
        match b {
            b'(' | b'{' | b'[' => depth += 1,
            b')' | b'}' | b']' => depth -= 1,
            b'&' if depth == 0 => {
                parts.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(text[start..].trim());
    parts
}

pub fn render_user_pass(p: &UserPass) -> Result<String, RuleError> {
    if p.entries.is_empty() {
        return Err(RuleError::EmptyPass);
    }
    let lines: Vec<String> = p
        .entries
        .iter()
        .map(|e| format!("        Operation({}) & mp(Tac({}))", e.selector, e.rule))
        .collect();
    Ok(format!("THEORY User_Pass IS\n{}\nEND\n", lines.join(";\n")))
}

/// Empty text is an empty pass.
pub fn parse_user_pass(text: &str) -> Result<UserPass, RuleError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((i, header)) = lines.next() else {
        return Ok(UserPass::default());
    };
    if header.trim_end() != "THEORY User_Pass IS" {
        return Err(format_err(i + 1, "expected 'THEORY User_Pass IS'"));
    }
    let mut entries = Vec::new();
    for (i, line) in lines {
        let line = line.trim();
        if line == "END" {
            return Ok(UserPass { entries });
        }
        let entry = line.strip_suffix(';').unwrap_or(line);
        let (selector, rule) = entry
            .strip_prefix("Operation(")
            .and_then(|rest| rest.split_once(") & mp(Tac("))
            .and_then(|(sel, rest)| Some((sel, rest.strip_suffix("))")?)))
            .ok_or_else(|| {
                format_err(i + 1, "expected 'Operation(<name>) & mp(Tac(<rule>))'")
            })?;
        entries.push(PassEntry {
            selector: selector.to_string(),
            rule: rule.to_string(),
        });
    }
    Err(format_err(text.lines().count(), "missing END"))
}

/// Rules of both pmm files of a component.
pub fn component_rules(c: &Component) -> Result<(Vec<Rule>, Vec<Rule>), RuleError> {
    Ok((parse_pmm(&c.pmm_text, false)?, parse_pmm(&c.wd_pmm_text, true)?))
}

/// Appends `r` to the pmm or wd_pmm text of `c`, suffixing `_2`, `_3`, ...
/// when the theory name is taken in either file. Returns the final name.
pub fn append_rule(c: &mut Component, mut r: Rule) -> String {
    let taken: Vec<String> = [&c.pmm_text, &c.wd_pmm_text]
        .iter()
        .flat_map(|t| t.lines())
        .filter_map(|l| between(l.trim_end(), "THEORY ", " IS"))
        .map(str::to_string)
        .collect();
    let base = r.theory_name.clone();
    let mut n = 1;
    while taken.contains(&r.theory_name) {
        n += 1;
        r.theory_name = format!("{base}_{n}");
    }
    let target = if r.wd {
        &mut c.wd_pmm_text
    } else {
        &mut c.pmm_text
    };
    if !target.is_empty() && !target.ends_with('\n') {
        target.push('\n');
    }
    target.push_str(&render_rule(&r));
    r.theory_name
}

/// Adds a User_Pass entry selecting `po_name` with `rule`.
pub fn add_pass_entry(c: &mut Component, po_name: &str, rule: &str) -> Result<(), RuleError> {
    let mut pass = parse_user_pass(&c.user_pass_text)?;
    pass.entries.push(PassEntry {
        selector: po_name.to_string(),
        rule: rule.to_string(),
    });
    c.user_pass_text = render_user_pass(&pass)?;
    Ok(())
}

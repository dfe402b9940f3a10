//! The line-oriented `.pos` format:
//!
//! ```text
//! COMPONENT <name> PATH <module path>
//! DEF <NAME> == <expression>
//! PO "<name>" GROUP <common|wd>
//! HYP <predicate>
//! GOAL <predicate>
//! END
//! ```
//!
//! Lines starting with `//` are comments.

use super::{Component, Group, ProofObligation, StoreError};
use crate::syntax::{parse_definition_line, parse_predicate, render, DefinitionError, Expr};

struct Open {
    name: String,
    group: Group,
    hyps: Vec<Expr>,
    goal: Option<Expr>,
}

pub fn import_component(text: &str) -> Result<Component, StoreError> {
    let mut component: Option<Component> = None;
    let mut open: Option<Open> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let err = |message: String| StoreError::Format {
            line: line_no,
            message,
        };
        let (keyword, rest) = line.split_once(' ').unwrap_or((line, ""));
        let rest = rest.trim();

        let Some(c) = component.as_mut() else {
            if keyword != "COMPONENT" {
                return Err(err("expected 'COMPONENT <name> PATH <path>' first".into()));
            }
            let (name, path) = rest
                .split_once(" PATH ")
                .ok_or_else(|| err("expected 'COMPONENT <name> PATH <path>'".into()))?;
            let name = name.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(err(format!("bad component name '{name}'")));
            }
            component = Some(Component::new(name, path.trim()));
            continue;
        };

        match (keyword, open.as_mut()) {
            ("DEF", None) => {
                let (name, body) =
                    parse_definition_line(rest).map_err(|e| e.at_line(line_no))?;
                if c.definitions.contains(&name) {
                    return Err(DefinitionError::Duplicate {
                        name,
                        line: Some(line_no),
                    }
                    .into());
                }
                c.definitions.insert(name, body)?;
            }
            ("PO", None) => {
                let (name, group) = parse_po_header(rest).map_err(err)?;
                if c.po(&name).is_some() {
                    return Err(StoreError::DuplicatePo {
                        name,
                        line: line_no,
                    });
                }
                open = Some(Open {
                    name,
                    group,
                    hyps: Vec::new(),
                    goal: None,
                });
            }
            ("HYP", Some(po)) if po.goal.is_none() => {
                po.hyps.push(parse_predicate(rest).map_err(|e| e.at_line(line_no))?);
            }
            ("GOAL", Some(po)) if po.goal.is_none() => {
                po.goal = Some(parse_predicate(rest).map_err(|e| e.at_line(line_no))?);
            }
            ("END", Some(_)) => {
                let po = open.take().expect("checked above");
                let goal = po
                    .goal
                    .ok_or_else(|| err(format!("proof obligation \"{}\" has no GOAL", po.name)))?;
                c.pos
                    .push(ProofObligation::new(po.name, po.group, po.hyps, goal));
            }
            (kw, Some(po)) => {
                return Err(err(format!(
                    "unexpected '{kw}' inside proof obligation \"{}\"",
                    po.name
                )))
            }
            (kw, None) => return Err(err(format!("unexpected '{kw}' outside a proof obligation"))),
        }
    }

    if let Some(po) = open {
        return Err(StoreError::Format {
            line: text.lines().count(),
            message: format!("proof obligation \"{}\" is missing END", po.name),
        });
    }
    component.ok_or(StoreError::Format {
        line: 1,
        message: "empty file: expected 'COMPONENT <name> PATH <path>'".into(),
    })
}

fn parse_po_header(rest: &str) -> Result<(String, Group), String> {
    let rest = rest
        .strip_prefix('"')
        .ok_or("expected 'PO \"<name>\" GROUP <common|wd>'")?;
    let (name, tail) = rest.split_once('"').ok_or("unterminated proof obligation name")?;
    if name.is_empty() {
        return Err("empty proof obligation name".into());
    }
    let group = match tail.split_whitespace().collect::<Vec<_>>().as_slice() {
        ["GROUP", "common"] => Group::Common,
        ["GROUP", "wd"] => Group::Wd,
        _ => return Err(format!("expected 'GROUP common' or 'GROUP wd' after \"{name}\"")),
    };
    Ok((name.to_string(), group))
}

/// Canonical rendering; importing the result gives back the same component
/// (statuses aside, which live in the sidecar).
pub fn render_component(c: &Component) -> String {
    let mut out = format!("COMPONENT {} PATH {}\n", c.name, c.module_path);
    for (name, body) in c.definitions.iter() {
        out.push_str(&format!("DEF {name} == {}\n", render(body)));
    }
    for po in &c.pos {
        out.push_str(&format!("PO \"{}\" GROUP {}\n", po.name, po.group));
        for h in &po.hypotheses {
            out.push_str(&format!("HYP {}\n", render(h)));
        }
        out.push_str(&format!("GOAL {}\nEND\n", render(&po.goal)));
    }
    out
}

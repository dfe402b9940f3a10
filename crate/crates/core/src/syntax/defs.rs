use indexmap::IndexMap;

use super::ast::Expr;
use super::lexer::{tokenize, Tok};
use super::parser::Parser;
use super::{DefinitionError, ParseError};

/// Parameterless DEFINITIONS, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DefinitionTable {
    entries: IndexMap<String, Expr>,
}

impl DefinitionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a definition, rejecting duplicates and any cycle it would close.
    pub fn insert(&mut self, name: impl Into<String>, body: Expr) -> Result<(), DefinitionError> {
        let name = name.into();
        if self.entries.contains_key(&name) {
            return Err(DefinitionError::Duplicate { name, line: None });
        }
        self.entries.insert(name.clone(), body);
        if let Some(cycle) = self.find_cycle() {
            self.entries.shift_remove(&name);
            return Err(DefinitionError::Cycle { path: cycle });
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        self.entries.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Expr)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// First cycle found by depth-first traversal, as the list of names on it.
    fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Active,
            Done,
        }
        let mut marks: IndexMap<&str, Mark> =
            self.entries.keys().map(|k| (k.as_str(), Mark::New)).collect();
        let mut stack: Vec<String> = Vec::new();

        fn visit<'a>(
            table: &'a DefinitionTable,
            name: &'a str,
            marks: &mut IndexMap<&'a str, Mark>,
            stack: &mut Vec<String>,
        ) -> Option<Vec<String>> {
            match marks.get(name) {
                Some(Mark::Done) | None => return None,
                Some(Mark::Active) => {
                    let start = stack.iter().position(|n| n == name).unwrap_or(0);
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(name.to_string());
                    return Some(cycle);
                }
                Some(Mark::New) => {}
            }
            marks.insert(name, Mark::Active);
            stack.push(name.to_string());
            let (key, body) = table.entries.get_key_value(name)?;
            for dep in body.free_vars() {
                if let Some((dep_key, _)) = table.entries.get_key_value(dep.as_str()) {
                    if let Some(c) = visit(table, dep_key, marks, stack) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            marks.insert(key, Mark::Done);
            None
        }

        let names: Vec<&str> = self.entries.keys().map(String::as_str).collect();
        for name in names {
            if let Some(c) = visit(self, name, &mut marks, &mut stack) {
                return Some(c);
            }
        }
        None
    }
}

/// Parses `NAME == <expression>` lines. Blank lines and `//` comments are
/// skipped.
pub fn parse_definitions(text: &str) -> Result<DefinitionTable, DefinitionError> {
    let mut table = DefinitionTable::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with("//") {
            continue;
        }
        let (name, body) = parse_definition_line(line).map_err(|e| e.at_line(line_no))?;
        if table.contains(&name) {
            return Err(DefinitionError::Duplicate {
                name,
                line: Some(line_no),
            });
        }
        table.entries.insert(name, body);
    }
    if let Some(path) = table.find_cycle() {
        return Err(DefinitionError::Cycle { path });
    }
    Ok(table)
}

/// One `NAME == body` line.
pub fn parse_definition_line(line: &str) -> Result<(String, Expr), ParseError> {
    let tokens = tokenize(line)?;
    let name = match &tokens[0].tok {
        Tok::Ident(n) => n.clone(),
        other => {
            return Err(ParseError::Syntax {
                line: tokens[0].line,
                column: tokens[0].column,
                found: other.describe(),
                expected: "a definition name".into(),
            })
        }
    };
    if tokens.get(1).map(|t| &t.tok) != Some(&Tok::Sym("==")) {
        let t = &tokens[1];
        return Err(ParseError::Syntax {
            line: t.line,
            column: t.column,
            found: t.tok.describe(),
            expected: "'=='".into(),
        });
    }
    let mut parser = Parser::new(tokens[2..].to_vec());
    let body = parser.equiv()?;
    parser.expect_end()?;
    Ok((name, body))
}

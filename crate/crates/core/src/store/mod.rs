//! Proof obligations per component: the interchange format, proof status
//! tracking and on-disk persistence.

mod interchange;
mod workspace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{DefinitionError, DefinitionTable, Expr, ParseError};

pub use interchange::{import_component, render_component};
pub use workspace::Workspace;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Common,
    Wd,
}

impl Group {
    pub fn keyword(self) -> &'static str {
        match self {
            Group::Common => "common",
            Group::Wd => "wd",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Unproved,
    ProvedF1,
    ProvedF2,
    ProvedF3,
    ProvedBeval,
}

impl Status {
    pub const ALL: [Status; 5] = [
        Status::Unproved,
        Status::ProvedF1,
        Status::ProvedF2,
        Status::ProvedF3,
        Status::ProvedBeval,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Status::Unproved => "UNPROVED",
            Status::ProvedF1 => "PROVED_F1",
            Status::ProvedF2 => "PROVED_F2",
            Status::ProvedF3 => "PROVED_F3",
            Status::ProvedBeval => "PROVED_BEVAL",
        }
    }

    pub fn is_proved(self) -> bool {
        self != Status::Unproved
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for Status {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Status::ALL
            .into_iter()
            .find(|st| st.keyword() == s)
            .ok_or_else(|| format!("unknown status '{s}'"))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Filter {
    #[default]
    All,
    Unproved,
    Proved,
}

impl Filter {
    pub fn accepts(self, status: Status) -> bool {
        match self {
            Filter::All => true,
            Filter::Unproved => !status.is_proved(),
            Filter::Proved => status.is_proved(),
        }
    }
}

impl FromStr for Filter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(Filter::All),
            "unproved" => Ok(Filter::Unproved),
            "proved" => Ok(Filter::Proved),
            _ => Err(format!("unknown filter '{s}' (expected all, unproved or proved)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProofObligation {
    pub name: String,
    pub group: Group,
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub status: Status,
    /// Rule that discharged the obligation, if any.
    pub provenance: Option<String>,
}

impl ProofObligation {
    pub fn new(name: impl Into<String>, group: Group, hypotheses: Vec<Expr>, goal: Expr) -> Self {
        ProofObligation {
            name: name.into(),
            group,
            hypotheses,
            goal,
            status: Status::Unproved,
            provenance: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Component {
    pub name: String,
    pub module_path: String,
    pub definitions: DefinitionTable,
    pub pos: Vec<ProofObligation>,
    pub pmm_text: String,
    pub wd_pmm_text: String,
    pub user_pass_text: String,
    /// Status changes not yet written to the audit log.
    pub(crate) pending_audit: Vec<String>,
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: proof obligation \"{name}\" is declared twice")]
    DuplicatePo { name: String, line: usize },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Definition(#[from] DefinitionError),
    #[error("unknown proof obligation \"{0}\"")]
    UnknownPo(String),
    #[error("unknown component '{0}'")]
    UnknownComponent(String),
    #[error("\"{po}\" is {from}; returning it to UNPROVED needs an explicit reset")]
    Regression { po: String, from: Status },
    #[error("{file} no longer starts with its previous contents; rule files are append-only")]
    NotAppendOnly { file: String },
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl Component {
    pub fn new(name: impl Into<String>, module_path: impl Into<String>) -> Self {
        Component {
            name: name.into(),
            module_path: module_path.into(),
            definitions: DefinitionTable::new(),
            pos: Vec::new(),
            pmm_text: String::new(),
            wd_pmm_text: String::new(),
            user_pass_text: String::new(),
            pending_audit: Vec::new(),
        }
    }

    pub fn po(&self, name: &str) -> Option<&ProofObligation> {
        self.pos.iter().find(|po| po.name == name)
    }

    /// File order, filtered.
    pub fn list_pos(&self, filter: Filter) -> Vec<&ProofObligation> {
        self.pos.iter().filter(|po| filter.accepts(po.status)).collect()
    }

    /// Records a proof. Moving a proved obligation back to UNPROVED is
    /// refused; use [`Component::reset_status`].
    pub fn set_status(
        &mut self,
        po_name: &str,
        status: Status,
        provenance: Option<String>,
    ) -> Result<(), StoreError> {
        let po = self
            .pos
            .iter_mut()
            .find(|po| po.name == po_name)
            .ok_or_else(|| StoreError::UnknownPo(po_name.to_string()))?;
        if status == Status::Unproved && po.status.is_proved() {
            return Err(StoreError::Regression {
                po: po_name.to_string(),
                from: po.status,
            });
        }
        if po.status == status && po.provenance == provenance {
            return Ok(());
        }
        self.pending_audit.push(format!(
            "set \"{}\" {} -> {}{}",
            po.name,
            po.status,
            status,
            provenance.as_deref().map(|r| format!(" {r}")).unwrap_or_default()
        ));
        po.status = status;
        po.provenance = provenance;
        Ok(())
    }

    /// Returns an obligation to UNPROVED, leaving a trace in the audit log.
    pub fn reset_status(&mut self, po_name: &str) -> Result<(), StoreError> {
        let po = self
            .pos
            .iter_mut()
            .find(|po| po.name == po_name)
            .ok_or_else(|| StoreError::UnknownPo(po_name.to_string()))?;
        if po.status.is_proved() {
            self.pending_audit
                .push(format!("reset \"{}\" {} -> UNPROVED", po.name, po.status));
        }
        po.status = Status::Unproved;
        po.provenance = None;
        Ok(())
    }

    /// `"<po name>" <STATUS> [<rule name>]` per obligation, in file order.
    pub fn status_text(&self) -> String {
        let mut out = String::new();
        for po in &self.pos {
            out.push_str(&format!("\"{}\" {}", po.name, po.status));
            if let Some(rule) = &po.provenance {
                out.push(' ');
                out.push_str(rule);
            }
            out.push('\n');
        }
        out
    }

    /// Applies a status sidecar. Entries for unknown obligations are errors.
    pub fn apply_status_text(&mut self, text: &str) -> Result<(), StoreError> {
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let format_err = |message: &str| StoreError::Format {
                line: line_no,
                message: message.to_string(),
            };
            let rest = line
                .strip_prefix('"')
                .ok_or_else(|| format_err("expected a quoted obligation name"))?;
            let (name, rest) = rest
                .split_once('"')
                .ok_or_else(|| format_err("unterminated obligation name"))?;
            let mut words = rest.split_whitespace();
            let status: Status = words
                .next()
                .ok_or_else(|| format_err("missing status"))?
                .parse()
                .map_err(|m: String| format_err(&m))?;
            let provenance = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(format_err("trailing text after the rule name"));
            }
            let po = self
                .pos
                .iter_mut()
                .find(|po| po.name == name)
                .ok_or_else(|| StoreError::UnknownPo(name.to_string()))?;
            po.status = status;
            po.provenance = provenance;
        }
        Ok(())
    }
}

//! The three-strategy experiment: forces 1, then forces 1–3, then the
//! evaluator on whatever is left; with the gain column and report table.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::eval::{EvalParams, EvalResult, Evaluator, Reason, Verdict};
use crate::prover::{prove, Force, ProofOutcome};
use crate::rules::{add_pass_entry, append_rule, component_rules, make_rule, Clock, RuleError};
use crate::store::{Component, Group, Status, StoreError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GainError {
    #[error("counts must satisfy 0 <= baseline ({baseline}) <= with_beval ({with_beval}) <= total ({total})")]
    Inconsistent {
        total: u32,
        baseline: u32,
        with_beval: u32,
    },
}

/// Percentage of obligations closed only thanks to the evaluator, rounded
/// down; 0 for an empty group.
pub fn gain(total: u32, baseline: u32, with_beval: u32) -> Result<u32, GainError> {
    if baseline > with_beval || with_beval > total {
        return Err(GainError::Inconsistent {
            total,
            baseline,
            with_beval,
        });
    }
    if total == 0 {
        return Ok(0);
    }
    Ok(100 * (with_beval - baseline) / total)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GroupCounts {
    pub total: u32,
    pub f1: u32,
    pub f123: u32,
    pub f123_beval: u32,
    pub gain: u32,
}

impl GroupCounts {
    /// Table cells; `-` marks a count equal to the previous strategy's.
    pub fn cells(&self) -> [String; 5] {
        let show = |n: u32, prev: u32| if n == prev { "-".to_string() } else { n.to_string() };
        [
            self.total.to_string(),
            show(self.f1, 0),
            show(self.f123, self.f1),
            show(self.f123_beval, self.f123),
            format!("{}%", self.gain),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    F1,
    F2,
    F3,
    Beval,
    Unproved,
}

/// What happened to one obligation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PoDetail {
    pub po: String,
    pub group: Group,
    pub outcome: Outcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PipelineReport {
    pub component: String,
    pub common: GroupCounts,
    pub wd: GroupCounts,
    pub details: Vec<PoDetail>,
}

impl PipelineReport {
    pub fn group(&self, g: Group) -> &GroupCounts {
        match g {
            Group::Common => &self.common,
            Group::Wd => &self.wd,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("rule file: {0}")]
    Rules(#[from] RuleError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub struct PipelineOptions<'a> {
    pub params: &'a EvalParams,
    /// Skip the evaluator stage (forces only).
    pub forces_only: bool,
    pub emit_rules: bool,
    pub clock: &'a dyn Clock,
}

/// Runs every obligation through the forces, hands the survivors to the
/// evaluator in parallel, then records statuses (and rules, when asked) in
/// file order.
pub fn run_pipeline(c: &mut Component, opts: &PipelineOptions<'_>) -> Result<PipelineReport, PipelineError> {
    let (pmm, wd_pmm) = component_rules(c)?;
    let forced: Vec<(Option<Force>, Option<String>)> = c
        .pos
        .par_iter()
        .map(|po| {
            let rules = if po.group == Group::Wd { &wd_pmm } else { &pmm };
            match prove(po, Force::F3, rules) {
                ProofOutcome::Proved(p) => (Some(p.force), p.rule),
                ProofOutcome::NotProved => (None, None),
            }
        })
        .collect();

    let evaluator = Evaluator::new(opts.params, &c.definitions);
    let evaluated: Vec<Option<EvalResult>> = c
        .pos
        .par_iter()
        .zip(&forced)
        .map(|(po, (force, _))| {
            (force.is_none() && !opts.forces_only).then(|| evaluator.check_po(po))
        })
        .collect();

    let mut report = PipelineReport {
        component: c.name.clone(),
        common: GroupCounts::default(),
        wd: GroupCounts::default(),
        details: Vec::with_capacity(c.pos.len()),
    };

    for (i, ((force, forced_rule), result)) in forced.into_iter().zip(evaluated).enumerate() {
        let po = c.pos[i].clone();
        let counts = match po.group {
            Group::Common => &mut report.common,
            Group::Wd => &mut report.wd,
        };
        counts.total += 1;
        let mut detail = PoDetail {
            po: po.name.clone(),
            group: po.group,
            outcome: Outcome::Unproved,
            rule: None,
            verdict: None,
            reason: None,
            elapsed_ms: None,
        };
        if let Some(force) = force {
            counts.f123 += 1;
            counts.f123_beval += 1;
            let status = match force {
                Force::F1 => {
                    counts.f1 += 1;
                    detail.outcome = Outcome::F1;
                    Status::ProvedF1
                }
                Force::F2 => {
                    detail.outcome = Outcome::F2;
                    Status::ProvedF2
                }
                Force::F3 => {
                    detail.outcome = Outcome::F3;
                    Status::ProvedF3
                }
            };
            detail.rule = forced_rule.clone();
            c.set_status(&po.name, status, forced_rule)?;
        } else if let Some(result) = result {
            detail.verdict = Some(result.verdict);
            detail.reason = result.reason;
            detail.elapsed_ms = Some(result.elapsed_ms);
            if result.is_true() {
                counts.f123_beval += 1;
                detail.outcome = Outcome::Beval;
                let mut provenance = None;
                if opts.emit_rules {
                    let rule = make_rule(&po, &result, opts.clock, &c.module_path)?;
                    let name = append_rule(c, rule);
                    add_pass_entry(c, &po.name, &name)?;
                    provenance = Some(name);
                }
                detail.rule = provenance.clone();
                c.set_status(&po.name, Status::ProvedBeval, provenance)?;
            }
        }
        report.details.push(detail);
    }

    for counts in [&mut report.common, &mut report.wd] {
        counts.gain = gain(counts.total, counts.f123, counts.f123_beval)
            .expect("counts are monotone by construction");
    }
    Ok(report)
}

const HEADERS: [&str; 5] = ["T. POs", "F1", "F1;F2;F3", "F1;F2;F3;BEval", "Gain"];

/// Aligned text table, one row per component, common then W.D. columns.
pub fn render_report(reports: &[PipelineReport]) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let mut head = vec!["Name".to_string()];
    head.extend(HEADERS.iter().map(|h| h.to_string()));
    head.extend(HEADERS.iter().map(|h| h.to_string()));
    rows.push(head);
    for r in reports {
        let mut row = vec![r.component.clone()];
        row.extend(r.common.cells());
        row.extend(r.wd.cells());
        rows.push(row);
    }
    let widths: Vec<usize> = (0..rows[0].len())
        .map(|col| rows.iter().map(|row| row[col].len()).max().unwrap_or(0))
        .collect();

    let common_width: usize = widths[1..6].iter().sum::<usize>() + 2 * 4;
    let mut out = format!(
        "{:w0$}  {:<cw$}  |  W. D. P. Os.\n",
        "",
        "Common POs",
        w0 = widths[0],
        cw = common_width
    );
    for row in &rows {
        let mut line = String::new();
        for (col, cell) in row.iter().enumerate() {
            if col == 0 {
                line.push_str(&format!("{:<w$}", cell, w = widths[0]));
            } else {
                line.push_str(if col == 6 { "  |  " } else { "  " });
                line.push_str(&format!("{:>w$}", cell, w = widths[col]));
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// `component,group,total,f1,f123,f123_beval,gain`, with a header line.
pub fn render_csv(reports: &[PipelineReport]) -> String {
    let mut out = String::from("component,group,total,f1,f123,f123_beval,gain\n");
    for r in reports {
        for g in [Group::Common, Group::Wd] {
            let c = r.group(g);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.component, g, c.total, c.f1, c.f123, c.f123_beval, c.gain
            ));
        }
    }
    out
}

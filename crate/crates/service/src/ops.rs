//! Operations shared by the command line and the HTTP API.

use std::sync::atomic::AtomicBool;

use bevalkit_core::eval::{EvalParams, EvalResult, Evaluator, Verdict};
use bevalkit_core::pipeline::{run_pipeline, PipelineOptions, PipelineReport};
use bevalkit_core::rules::{add_pass_entry, append_rule, make_rule, Clock};
use bevalkit_core::store::{Component, Group, ProofObligation, Status, Workspace};
use bevalkit_core::syntax::{parse_predicate, DefinitionTable, Expr};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalRequest {
    pub component: Option<String>,
    /// Obligation the rule is attached to; defaults to the one whose goal
    /// matches.
    pub po: Option<String>,
    pub goal: String,
    pub hypotheses: Vec<String>,
    pub params: Option<EvalParams>,
    /// `-p MAXINT ...` flag string, as an alternative to `params`.
    pub params_text: Option<String>,
    pub add_rule: bool,
    pub wd: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleInfo {
    pub theory_name: String,
    /// `pmm` or `wd_pmm`.
    pub file: &'static str,
    pub po: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalResponse {
    pub result: EvalResult,
    pub params: EvalParams,
    pub params_text: String,
    pub rule_added: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleInfo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub fn resolve_params(
    params: Option<&EvalParams>,
    text: Option<&str>,
) -> Result<EvalParams, ServiceError> {
    let params = match (params, text) {
        (Some(_), Some(_)) => {
            return Err(ServiceError::BadRequest(
                "give either params or params_text, not both".into(),
            ))
        }
        (Some(p), None) => p.clone(),
        (None, Some(t)) => t
            .parse()
            .map_err(|e| ServiceError::BadRequest(format!("params_text: {e}")))?,
        (None, None) => EvalParams::default(),
    };
    params
        .validate()
        .map_err(|e| ServiceError::BadRequest(format!("params: {e}")))?;
    Ok(params)
}

fn parse_field(field: &str, text: &str) -> Result<Expr, ServiceError> {
    parse_predicate(text).map_err(|error| ServiceError::Parse {
        field: field.to_string(),
        error,
    })
}

/// Parses the request, evaluates it and, for a TRUE verdict with `add_rule`,
/// appends the rule and saves the component. `timeout_cap_ms` bounds the
/// requested timeout.
pub fn evaluate(
    ws: Option<&Workspace>,
    req: &EvalRequest,
    clock: &dyn Clock,
    cancel: &AtomicBool,
    timeout_cap_ms: Option<u64>,
) -> Result<EvalResponse, ServiceError> {
    let params = resolve_params(req.params.as_ref(), req.params_text.as_deref())?;
    let goal = parse_field("goal", &req.goal)?;
    let hyps = req
        .hypotheses
        .iter()
        .enumerate()
        .map(|(i, h)| parse_field(&format!("hypotheses[{i}]"), h))
        .collect::<Result<Vec<_>, _>>()?;
    if req.add_rule && req.component.is_none() {
        return Err(ServiceError::BadRequest(
            "add_rule needs a component to write the rule to".into(),
        ));
    }
    let mut component = match &req.component {
        Some(name) => {
            let ws = ws.ok_or_else(|| {
                ServiceError::BadRequest("no workspace configured (set BEVALKIT_WORKSPACE)".into())
            })?;
            Some(ws.load(name)?)
        }
        None => None,
    };
    let linked = match (&component, req.add_rule) {
        (Some(c), true) => Some(link_po(c, req.po.as_deref(), &hyps, &goal)?),
        (Some(c), false) => match &req.po {
            Some(name) if c.po(name).is_none() => {
                return Err(ServiceError::NotFound(format!("proof obligation \"{name}\"")))
            }
            _ => None,
        },
        _ => None,
    };

    let mut run_params = params.clone();
    if let Some(cap) = timeout_cap_ms {
        run_params.timeout_ms = run_params.timeout_ms.min(cap);
    }
    let empty = DefinitionTable::new();
    let defs = component.as_ref().map_or(&empty, |c| &c.definitions);
    let group = if req.wd { Group::Wd } else { Group::Common };
    let po = ProofObligation::new(linked.clone().unwrap_or_default(), group, hyps, goal);
    let result = Evaluator::new(&run_params, defs)
        .with_cancel(cancel)
        .check_po(&po);

    let mut response = EvalResponse {
        result,
        params_text: params.to_flag_string(),
        params,
        rule_added: false,
        rule: None,
        note: None,
    };
    if !req.add_rule {
        return Ok(response);
    }
    if response.result.verdict != Verdict::True {
        response.note = Some(format!(
            "not added: verdict is {}, only TRUE evaluations become rules",
            response.result.verdict
        ));
        return Ok(response);
    }
    let (Some(c), Some(ws), Some(po_name)) = (component.as_mut(), ws, linked) else {
        unreachable!("add_rule was checked to come with a component");
    };
    let rule = make_rule(&po, &response.result, clock, &c.module_path.clone())
        .map_err(|e| ServiceError::Internal(e.to_string()))?;
    let name = append_rule(c, rule);
    add_pass_entry(c, &po_name, &name).map_err(|e| ServiceError::Internal(e.to_string()))?;
    c.set_status(&po_name, Status::ProvedBeval, Some(name.clone()))?;
    ws.save(c)?;
    response.rule_added = true;
    response.rule = Some(RuleInfo {
        theory_name: name,
        file: if req.wd { "wd_pmm" } else { "pmm" },
        po: po_name,
    });
    Ok(response)
}

/// The obligation a new rule belongs to: named explicitly, or the first one
/// whose goal (and, preferably, hypotheses) match the request.
fn link_po(
    c: &Component,
    name: Option<&str>,
    hyps: &[Expr],
    goal: &Expr,
) -> Result<String, ServiceError> {
    if let Some(name) = name {
        return c
            .po(name)
            .map(|po| po.name.clone())
            .ok_or_else(|| ServiceError::NotFound(format!("proof obligation \"{name}\"")));
    }
    c.pos
        .iter()
        .find(|po| po.goal == *goal && po.hypotheses == hyps)
        .or_else(|| c.pos.iter().find(|po| po.goal == *goal))
        .map(|po| po.name.clone())
        .ok_or_else(|| {
            ServiceError::BadRequest(format!(
                "no proof obligation of {} has this goal; name one with 'po'",
                c.name
            ))
        })
}

pub struct PipelineRequest<'a> {
    pub params: &'a EvalParams,
    pub emit_rules: bool,
    pub forces_only: bool,
}

/// Loads, runs and saves one component.
pub fn pipeline(
    ws: &Workspace,
    name: &str,
    req: &PipelineRequest<'_>,
    clock: &dyn Clock,
) -> Result<PipelineReport, ServiceError> {
    let mut c = ws.load(name)?;
    let report = run_pipeline(
        &mut c,
        &PipelineOptions {
            params: req.params,
            forces_only: req.forces_only,
            emit_rules: req.emit_rules,
            clock,
        },
    )
    .map_err(|e| ServiceError::Internal(e.to_string()))?;
    ws.save(&mut c)?;
    Ok(report)
}

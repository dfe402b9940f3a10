use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use bevalkit_core::eval::{EvalParams, Verdict};
use bevalkit_core::pipeline::{render_csv, render_report, PipelineReport};
use bevalkit_core::rules::{Clock, FixedClock, SystemClock};
use bevalkit_core::store::Workspace;
use clap::{Args, Parser, Subcommand};

use crate::api::{router, AppState};
use crate::error::ServiceError;
use crate::ops::{self, EvalRequest, PipelineRequest};

/// Exit status for usage, parse and I/O errors.
pub const EXIT_ERROR: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "bevalkit", version, about = "Evaluate B proof obligations over finite domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one goal under hypotheses. Exits 0 TRUE, 1 FALSE, 2 UNKNOWN.
    Eval(EvalArgs),
    /// Run forces and the evaluator over whole components and report gain.
    Pipeline(PipelineArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct WorkspaceArg {
    /// Directory holding `<component>.pos` and its rule files.
    #[arg(long, env = "BEVALKIT_WORKSPACE")]
    pub workspace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub goal: String,
    /// Hypothesis; repeat for several.
    #[arg(long = "hyp")]
    pub hypotheses: Vec<String>,
    /// Component whose definitions are used and which receives the rule.
    #[arg(long)]
    pub component: Option<String>,
    /// Obligation the rule belongs to (default: the one with this goal).
    #[arg(long)]
    pub po: Option<String>,
    /// Flag string, e.g. "-p MAXINT 127 -p TIME_OUT 500".
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Append a rule for a TRUE verdict.
    #[arg(long)]
    pub add_rule: bool,
    /// Treat as a well-definedness obligation.
    #[arg(long)]
    pub wd: bool,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub workspace: WorkspaceArg,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    /// Workspace components to run (default: all of them).
    pub components: Vec<String>,
    /// A `.pos` file; its rule and status files live next to it.
    #[arg(long = "component-file")]
    pub component_files: Vec<PathBuf>,
    #[arg(long)]
    pub emit_rules: bool,
    #[arg(long)]
    pub forces_only: bool,
    #[arg(long, allow_hyphen_values = true)]
    pub params: Option<String>,
    /// Pin the timestamp written into emitted rules.
    #[arg(long)]
    pub timestamp: Option<String>,
    /// Pin the duration written into emitted rules (with --timestamp).
    #[arg(long, requires = "timestamp")]
    pub elapsed_ms: Option<u64>,
    #[arg(long, conflicts_with = "json")]
    pub csv: bool,
    #[arg(long)]
    pub json: bool,
    #[command(flatten)]
    pub workspace: WorkspaceArg,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: std::net::IpAddr,
    #[command(flatten)]
    pub workspace: WorkspaceArg,
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

pub fn run(cli: Cli) -> Result<u8, ServiceError> {
    match cli.command {
        Command::Eval(args) => eval(args),
        Command::Pipeline(args) => pipeline(args),
        Command::Serve(args) => serve(args),
    }
}

fn open_workspace(arg: &WorkspaceArg) -> Result<Option<Workspace>, ServiceError> {
    arg.workspace
        .as_ref()
        .map(|root| Workspace::open(root).map_err(ServiceError::from))
        .transpose()
}

fn parse_params(text: Option<&str>) -> Result<EvalParams, ServiceError> {
    ops::resolve_params(None, Some(text.unwrap_or("")))
}

fn eval(args: EvalArgs) -> Result<u8, ServiceError> {
    let ws = open_workspace(&args.workspace)?;
    let req = EvalRequest {
        component: args.component,
        po: args.po,
        goal: args.goal,
        hypotheses: args.hypotheses,
        params: None,
        params_text: Some(args.params.unwrap_or_default()),
        add_rule: args.add_rule,
        wd: args.wd,
    };
    let cancel = AtomicBool::new(false);
    let resp = ops::evaluate(ws.as_ref(), &req, &SystemClock, &cancel, None)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&resp).expect("response serializes"));
    } else {
        let r = &resp.result;
        match (&r.reason, &r.message) {
            (Some(reason), Some(msg)) => println!("{} ({reason}: {msg}) in {} ms", r.verdict, r.elapsed_ms),
            (Some(reason), None) => println!("{} ({reason}) in {} ms", r.verdict, r.elapsed_ms),
            _ => println!("{} in {} ms", r.verdict, r.elapsed_ms),
        }
        for b in r.counterexample.iter().flatten() {
            println!("  {} = {}", b.name, b.value);
        }
        if let Some(rule) = &resp.rule {
            println!("rule {} added to {} for \"{}\"", rule.theory_name, rule.file, rule.po);
        }
        if let Some(note) = &resp.note {
            println!("{note}");
        }
    }
    Ok(match resp.result.verdict {
        Verdict::True => 0,
        Verdict::False => 1,
        Verdict::Unknown => 2,
    })
}

/// A component file is run in place: its directory is the workspace.
fn file_target(path: &Path) -> Result<(Workspace, String), ServiceError> {
    let bad = || ServiceError::BadRequest(format!("{}: expected a <name>.pos file", path.display()));
    if path.extension().is_none_or(|e| e != "pos") {
        return Err(bad());
    }
    let name = path.file_stem().and_then(|s| s.to_str()).ok_or_else(bad)?;
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if !path.is_file() {
        return Err(ServiceError::NotFound(format!("file {}", path.display())));
    }
    Ok((Workspace::open(dir)?, name.to_string()))
}

fn pipeline(args: PipelineArgs) -> Result<u8, ServiceError> {
    let params = parse_params(args.params.as_deref())?;
    let mut targets = Vec::new();
    for file in &args.component_files {
        targets.push(file_target(file)?);
    }
    let ws = open_workspace(&args.workspace)?;
    if !args.components.is_empty() || targets.is_empty() {
        let ws = ws.ok_or_else(|| {
            ServiceError::BadRequest(
                "no components: pass --component-file or set --workspace / BEVALKIT_WORKSPACE".into(),
            )
        })?;
        let names = if args.components.is_empty() { ws.list()? } else { args.components.clone() };
        targets.extend(names.into_iter().map(|n| (ws.clone(), n)));
    }

    let clock: Box<dyn Clock> = match &args.timestamp {
        Some(ts) => Box::new(FixedClock::new(ts.clone(), args.elapsed_ms)),
        None => Box::new(SystemClock),
    };
    let req = PipelineRequest {
        params: &params,
        emit_rules: args.emit_rules,
        forces_only: args.forces_only,
    };
    let reports = targets
        .iter()
        .map(|(ws, name)| ops::pipeline(ws, name, &req, clock.as_ref()))
        .collect::<Result<Vec<PipelineReport>, _>>()?;

    if args.json {
        println!("{}", serde_json::to_string_pretty(&reports).expect("report serializes"));
    } else if args.csv {
        print!("{}", render_csv(&reports));
    } else {
        print!("{}", render_report(&reports));
    }
    Ok(0)
}

fn serve(args: ServeArgs) -> Result<u8, ServiceError> {
    let ws = open_workspace(&args.workspace)?.ok_or_else(|| {
        ServiceError::BadRequest("serve needs --workspace or BEVALKIT_WORKSPACE".into())
    })?;
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| ServiceError::Internal(format!("runtime: {e}")))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| ServiceError::Internal(format!("bind {addr}: {e}")))?;
        eprintln!("listening on http://{addr} (workspace {})", ws.root().display());
        let app = router(AppState::new(ws, Arc::new(SystemClock)));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| ServiceError::Internal(e.to_string()))
    })?;
    Ok(0)
}

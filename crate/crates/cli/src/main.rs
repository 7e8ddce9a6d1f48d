//! `dispenser`: dispensable-variable analysis of DIMACS CNF files.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use dispenser_core::{
    cross_check, dispensable, encode_min_ones, export_wcnf, format_vars, parse_dimacs, CnfFormula,
    DispensableReport, Engine, EngineError, EngineOptions, VarOrder,
};
use serde::Serialize;

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum EngineArg {
    MaxsatEnum,
    BddEnum,
    BddDirect,
    Oracle,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::MaxsatEnum => Engine::MaxSatEnum,
            EngineArg::BddEnum => Engine::BddEnum,
            EngineArg::BddDirect => Engine::BddDirect,
            EngineArg::Oracle => Engine::Oracle,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Dispensable,
    Enumerate,
    Check,
    ExportWcnf,
    Stats,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Find the variables that are 0 in every minimal model of a CNF formula.
#[derive(Parser, Debug)]
#[command(name = "dispenser", version)]
struct RunConfig {
    /// DIMACS CNF file, or `-` for standard input.
    input: PathBuf,

    #[arg(long, value_enum, default_value = "bdd-direct")]
    engine: EngineArg,

    #[arg(long, value_enum, default_value = "dispensable")]
    mode: Mode,

    /// Stop enumerating after this many minimal models.
    #[arg(long = "max-models", value_name = "N", default_value_t = dispenser_core::DEFAULT_MODEL_CAP,
          value_parser = parse_max_models)]
    max_models: usize,

    /// BDD variable order, top level first, e.g. `3,1,2`.
    #[arg(long, value_name = "I1,I2,...", value_delimiter = ',')]
    order: Option<Vec<u32>>,

    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn parse_max_models(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

enum CliError {
    Usage(String),
    Resource(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Failure(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Resource(m) | CliError::Failure(m) => m,
        }
    }
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::Oracle(_) | EngineError::ModelCapExceeded(_) => {
                CliError::Resource(e.to_string())
            }
            EngineError::OrderMismatch { .. } => CliError::Usage(e.to_string()),
            EngineError::MaxSat(_) | EngineError::EngineDisagreement(_) => {
                CliError::Failure(e.to_string())
            }
        }
    }
}

#[derive(Serialize)]
struct JsonStats {
    elapsed_ms: f64,
    bdd_size: Option<usize>,
    solver_decisions: Option<u64>,
}

#[derive(Serialize)]
struct JsonReport {
    status: &'static str,
    engine: &'static str,
    dispensable: Vec<u32>,
    num_minimal_models: Option<usize>,
    truncated: bool,
    stats: JsonStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    models: Option<Vec<String>>,
}

impl From<&DispensableReport> for JsonReport {
    fn from(r: &DispensableReport) -> Self {
        JsonReport {
            status: r.status.as_str(),
            engine: r.engine.name(),
            dispensable: r.dispensable.iter().map(|v| v.index()).collect(),
            num_minimal_models: r.num_minimal_models,
            truncated: r.truncated,
            stats: JsonStats {
                elapsed_ms: r.stats.elapsed.as_secs_f64() * 1000.0,
                bdd_size: r.stats.bdd_size,
                solver_decisions: r.stats.solver_decisions,
            },
            models: r
                .models
                .as_ref()
                .map(|ms| ms.iter().map(|m| m.to_string()).collect()),
        }
    }
}

#[derive(Serialize)]
struct JsonCheck {
    #[serde(flatten)]
    summary: JsonReport,
    agreement: bool,
    engines: Vec<JsonReport>,
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| CliError::Usage(format!("reading standard input: {e}")))?;
    } else {
        text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("reading {}: {e}", path.display())))?;
    }
    Ok(text)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("report serializes");
    s.push('\n');
    s
}

fn run(cfg: &RunConfig) -> Result<String, CliError> {
    let formula: CnfFormula =
        parse_dimacs(&read_input(&cfg.input)?).map_err(|e| CliError::Usage(e.to_string()))?;
    let order = match &cfg.order {
        None => None,
        Some(vars) => {
            if vars.len() != formula.num_vars() as usize {
                return Err(CliError::Usage(format!(
                    "--order lists {} variables, formula has {}",
                    vars.len(),
                    formula.num_vars()
                )));
            }
            Some(VarOrder::new(vars).map_err(|e| CliError::Usage(e.to_string()))?)
        }
    };
    let engine = Engine::from(cfg.engine);
    let base = EngineOptions {
        max_models: cfg.max_models,
        order,
        ..Default::default()
    };

    let mut out = String::new();
    match cfg.mode {
        Mode::Dispensable => {
            let r = dispensable(&formula, engine, &base)?;
            warn_truncated(&r);
            match cfg.format {
                Format::Json => out = to_json(&JsonReport::from(&r)),
                Format::Text => {
                    write!(
                        out,
                        "status={} dispensable={}",
                        r.status,
                        format_vars(&r.dispensable)
                    )
                    .unwrap();
                    if r.truncated {
                        out.push_str(" truncated=true");
                    }
                    out.push('\n');
                }
            }
        }
        Mode::Enumerate => {
            let opts = EngineOptions {
                early_stop: false,
                collect_models: true,
                ..base
            };
            let r = dispensable(&formula, engine, &opts)?;
            warn_truncated(&r);
            match cfg.format {
                Format::Json => out = to_json(&JsonReport::from(&r)),
                Format::Text => {
                    for m in r.models.iter().flatten() {
                        writeln!(out, "{m}").unwrap();
                    }
                }
            }
        }
        Mode::Check => {
            let report = cross_check(&formula, &base)?;
            match cfg.format {
                Format::Json => {
                    let engines: Vec<JsonReport> =
                        report.reports.iter().map(JsonReport::from).collect();
                    let first = &report.reports[0];
                    let summary = JsonReport {
                        engine: "check",
                        num_minimal_models: report.num_minimal_models(),
                        truncated: report.reports.iter().any(|r| r.truncated),
                        stats: JsonStats {
                            elapsed_ms: engines.iter().map(|e| e.stats.elapsed_ms).sum(),
                            bdd_size: first.stats.bdd_size,
                            solver_decisions: first.stats.solver_decisions,
                        },
                        models: None,
                        ..JsonReport::from(first)
                    };
                    let engines = engines
                        .into_iter()
                        .map(|e| JsonReport { models: None, ..e })
                        .collect();
                    out = to_json(&JsonCheck {
                        summary,
                        agreement: true,
                        engines,
                    });
                }
                Format::Text => {
                    writeln!(
                        out,
                        "{:<12} {:<6} {:<16} minimal_models",
                        "engine", "status", "dispensable"
                    )
                    .unwrap();
                    for r in &report.reports {
                        let count = r
                            .num_minimal_models
                            .map_or_else(|| "-".to_string(), |c| c.to_string());
                        writeln!(
                            out,
                            "{:<12} {:<6} {:<16} {}",
                            r.engine.name(),
                            r.status.as_str(),
                            format_vars(&r.dispensable),
                            count
                        )
                        .unwrap();
                    }
                    out.push_str("agreement=yes\n");
                }
            }
        }
        Mode::ExportWcnf => {
            out = export_wcnf(&encode_min_ones(&formula))
                .map_err(|e| CliError::Failure(e.to_string()))?;
        }
        Mode::Stats => {
            let r = dispensable(&formula, engine, &base)?;
            warn_truncated(&r);
            match cfg.format {
                Format::Json => out = to_json(&JsonReport::from(&r)),
                Format::Text => {
                    let opt = |v: Option<String>| v.unwrap_or_else(|| "-".into());
                    writeln!(
                        out,
                        "engine={} status={} vars={} clauses={} dispensable={} models_visited={} bdd_size={} solver_decisions={} elapsed_ms={:.3}",
                        r.engine,
                        r.status,
                        formula.num_vars(),
                        formula.num_clauses(),
                        r.dispensable.len(),
                        r.models_visited,
                        opt(r.stats.bdd_size.map(|s| s.to_string())),
                        opt(r.stats.solver_decisions.map(|s| s.to_string())),
                        r.stats.elapsed.as_secs_f64() * 1000.0
                    )
                    .unwrap();
                }
            }
        }
    }
    Ok(out)
}

fn warn_truncated(r: &DispensableReport) {
    if r.truncated {
        eprintln!(
            "warning: stopped after {} minimal models; the dispensable set may be an over-approximation",
            r.models_visited
        );
    }
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    match run(&cfg) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            if stdout
                .write_all(out.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

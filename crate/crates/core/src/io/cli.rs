//! Command-line front end. Results go to stdout or `--out`; errors go to
//! stderr as single-line JSON records.

use std::fs;
use std::io::{ErrorKind, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use nalgebra::Vector6;
use serde::Serialize;
use serde_json::json;

use super::document::{load_model, ModelDocument};
use super::results::{to_json, AnalysisDoc, LoadedDoc, StiffnessDoc};
use crate::assembly::{check_model, Analysis, CheckReport};
use crate::error::{MsaError, Result};
use crate::reference::navaro::{navaro_document, navaro_leg_document, NavaroParams};

pub const EXIT_OK: i32 = 0;
/// `check` found a model that is not well posed.
pub const EXIT_NOT_WELL_POSED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "msa",
    version,
    about = "Stiffness analysis of manipulators by matrix structural analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cartesian stiffness of a model, optionally solved under an end load.
    Analyze {
        model: PathBuf,
        /// End wrench fx,fy,fz,mx,my,mz.
        #[arg(long, value_parser = parse_load, allow_hyphen_values = true)]
        load: Option<LoadArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equation accounting, rank and connectivity audit.
    Check {
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds and analyzes the NaVaRo robot (or one leg).
    Navaro {
        /// JSON file overriding default parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        leg_only: bool,
        /// Output directory for the model and result files.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadArg(pub [f64; 6]);

fn parse_load(s: &str) -> std::result::Result<LoadArg, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(format!("expected 6 comma-separated numbers, got {}", parts.len()));
    }
    let mut w = [0.0f64; 6];
    for (slot, p) in w.iter_mut().zip(&parts) {
        *slot = p.parse().map_err(|_| format!("'{p}' is not a number"))?;
        if !slot.is_finite() {
            return Err(format!("'{p}' is not finite"));
        }
    }
    Ok(LoadArg(w))
}

/// Single-line JSON description of an error.
pub fn error_record(e: &MsaError) -> String {
    let mut record = json!({ "error": e.kind(), "message": e.to_string() });
    match e {
        MsaError::Field { path, .. } => record["path"] = json!(path),
        MsaError::Parse { line, column, .. } => {
            record["line"] = json!(line);
            record["column"] = json!(column);
        }
        MsaError::UnresistedLoad { direction } => record["direction"] = json!(direction),
        _ => {}
    }
    record.to_string()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| MsaError::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, format!("{text}\n")).map_err(|e| MsaError::Io(format!("{}: {e}", path.display())))
}

/// Writes a line to stdout; a closed pipe (as in `msa check m.json | head`)
/// is not an error.
fn print_line(text: &str) -> Result<()> {
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(MsaError::Io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => print_line(text),
    }
}

fn fail(e: &MsaError) -> i32 {
    eprintln!("{}", error_record(e));
    EXIT_ERROR
}

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Analyze { model, load, out } => analyze(&model, load.map(|l| Vector6::from(l.0)), out.as_deref()),
        Command::Check { model, out } => check(&model, out.as_deref()),
        Command::Navaro { params, leg_only, out } => navaro(params.as_deref(), leg_only, out.as_deref()),
    };
    result.unwrap_or_else(|e| fail(&e))
}

fn analyze(path: &Path, load: Option<Vector6<f64>>, out: Option<&Path>) -> Result<i32> {
    let model = load_model(&read(path)?)?;
    let analysis = match Analysis::from_model(&model) {
        Ok(a) => a,
        Err(e) => {
            // the audit explains most assembly failures
            emit(out, &to_json(&check_model(&model)))?;
            return Ok(fail(&e));
        }
    };
    let loaded = match load {
        Some(w) => Some(LoadedDoc::new(&model, &w, &analysis.solve_loaded(&w)?)),
        None => None,
    };
    let report = check_model(&model);
    let doc = AnalysisDoc {
        end_effector: model.node_name(model.end_effector).to_string(),
        summary: report.summary(),
        stiffness: StiffnessDoc::from(analysis.stiffness()),
        loaded,
        check: Some(report),
    };
    emit(out, &to_json(&doc))?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckDoc<'a> {
    summary: String,
    #[serde(flatten)]
    report: &'a CheckReport,
}

fn check(path: &Path, out: Option<&Path>) -> Result<i32> {
    let model = load_model(&read(path)?)?;
    let report = check_model(&model);
    let doc = CheckDoc {
        summary: report.summary(),
        report: &report,
    };
    emit(out, &to_json(&doc))?;
    Ok(if report.well_posed {
        EXIT_OK
    } else {
        EXIT_NOT_WELL_POSED
    })
}

#[derive(Serialize)]
struct NavaroDoc {
    model: &'static str,
    params: NavaroParams,
    summary: String,
    stiffness: StiffnessDoc,
    /// Equation accounting of a single leg loaded at its end.
    leg_audit: CheckReport,
    check: CheckReport,
}

fn navaro(params: Option<&Path>, leg_only: bool, out: Option<&Path>) -> Result<i32> {
    let params: NavaroParams = match params {
        Some(p) => serde_json::from_str(&read(p)?).map_err(|e| MsaError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?,
        None => NavaroParams::default(),
    };
    let leg_doc = navaro_leg_document(&params)?;
    let leg_audit = check_model(&leg_doc.to_model()?);
    let (name, doc): (_, ModelDocument) = if leg_only {
        ("navaro_leg", leg_doc)
    } else {
        ("navaro", navaro_document(&params)?)
    };
    let model = doc.to_model()?;
    let analysis = Analysis::from_model(&model)?;
    let report = check_model(&model);
    let result = NavaroDoc {
        model: if leg_only { "leg" } else { "robot" },
        summary: report.summary(),
        params,
        stiffness: StiffnessDoc::from(analysis.stiffness()),
        leg_audit,
        check: report,
    };
    let dir = out.unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| MsaError::Io(format!("{}: {e}", dir.display())))?;
    let model_path = dir.join(format!("{name}_model.json"));
    let result_path = dir.join(format!("{name}_result.json"));
    write(&model_path, &doc.to_json())?;
    write(&result_path, &to_json(&result))?;
    print_line(
        &json!({ "model": model_path.display().to_string(), "result": result_path.display().to_string() }).to_string(),
    )?;
    Ok(EXIT_OK)
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use m4calc::geography::{chart, ChartFormat};
use m4calc::knots::{alexander, fibered_genus, KnotDescriptor};
use m4calc::manifold::{exotic_verdict, homeomorphic, ManifoldModel};
use m4calc::script::{self, Diagnostic};

#[derive(Parser)]
#[command(name = "m4calc", version, about = "Surgery calculus for smooth 4-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a construction script
    Run {
        script: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
        report: ReportFormat,
        /// Write the construction DAG in DOT format
        #[arg(long)]
        dag: Option<PathBuf>,
    },
    /// Print the geography chart
    Geography {
        #[arg(long, default_value_t = 10)]
        chi_max: i64,
        #[arg(long, value_enum, default_value_t = Format::Tsv)]
        format: Format,
        /// Keep only points satisfying the spin congruence
        #[arg(long)]
        spin: bool,
    },
    /// Knot utilities
    Knot {
        #[command(subcommand)]
        command: KnotCommand,
    },
    /// Compare two models (model JSON or scripts, using the last binding)
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Subcommand)]
enum KnotCommand {
    /// Symmetrized Alexander polynomial
    Alexander(KnotArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct KnotArgs {
    #[arg(long, num_args = 2, value_names = ["P", "Q"], allow_negative_numbers = true)]
    torus: Option<Vec<i64>>,
    /// JSON file holding a Seifert matrix or {"seifert": [[..]], "fibered": bool}
    #[arg(long)]
    seifert: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Tsv,
    Svg,
}

/// Failure split by exit code.
enum Failure {
    Diagnostics(Vec<String>),
    Internal(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Internal(e)
    }
}

fn diagnostics(path: &Path, list: &[Diagnostic]) -> Failure {
    Failure::Diagnostics(list.iter().map(|d| format!("{}:{d}", path.display())).collect())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_run(path: &Path, report: ReportFormat, dag: Option<&Path>) -> Result<(), Failure> {
    let text = read(path)?;
    let parsed = script::parse(&text).map_err(|d| diagnostics(path, &d))?;
    let result = script::run(&parsed).map_err(|e| Failure::Diagnostics(vec![format!("{}: {e}", path.display())]))?;
    match report {
        ReportFormat::Json => {
            let out = serde_json::to_string_pretty(&script::report_json(&result)).map_err(anyhow::Error::from)?;
            println!("{out}");
        }
        ReportFormat::Text => print!("{}", script::report_text(&result)),
    }
    if let Some(dag) = dag {
        fs::write(dag, script::emit_dag(&result)).with_context(|| format!("writing {}", dag.display()))?;
    }
    Ok(())
}

fn cmd_knot(args: &KnotArgs) -> Result<(), Failure> {
    let knot = match (&args.torus, &args.seifert) {
        (Some(pq), _) => KnotDescriptor::Torus { p: pq[0], q: pq[1] },
        (None, Some(file)) => {
            let v: Value = serde_json::from_str(&read(file)?)
                .map_err(|e| Failure::Diagnostics(vec![format!("{}: {e}", file.display())]))?;
            let v = if v.is_array() { json!({ "seifert": v, "fibered": false }) } else { v };
            serde_json::from_value(v)
                .map_err(|e| Failure::Diagnostics(vec![format!("{}: not a Seifert matrix: {e}", file.display())]))?
        }
        (None, None) => unreachable!("clap requires one knot source"),
    };
    let delta = alexander(&knot).map_err(|e| Failure::Diagnostics(vec![e.to_string()]))?;
    let out = json!({
        "knot": knot.name(),
        "alexander": delta.to_string(),
        "terms": delta.to_json(),
        "degree": delta.degree(),
        "fibered_genus": fibered_genus(&knot).ok(),
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?);
    Ok(())
}

/// Loads a model from model JSON, or runs a script and takes its last binding.
fn load_model(path: &Path) -> Result<ManifoldModel, Failure> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text).map_err(|e| {
        Failure::Diagnostics(vec![format!("{}:{}:{}: SyntaxError: {e}", path.display(), e.line(), e.column())])
    })?;
    if v.get("steps").is_some() {
        let parsed = script::parse(&text).map_err(|d| diagnostics(path, &d))?;
        let result = script::run(&parsed).map_err(|e| Failure::Diagnostics(vec![format!("{}: {e}", path.display())]))?;
        result
            .models
            .into_iter()
            .last()
            .map(|(_, m)| m)
            .ok_or_else(|| Failure::Diagnostics(vec![format!("{}: script binds no models", path.display())]))
    } else {
        ManifoldModel::from_json(&v).map_err(|e| Failure::Diagnostics(vec![format!("{}: {e}", path.display())]))
    }
}

fn cmd_compare(a: &Path, b: &Path) -> Result<(), Failure> {
    let (x, y) = (load_model(a)?, load_model(b)?);
    let out = json!({
        "a": x.name,
        "b": y.name,
        "homeomorphic": homeomorphic(&x, &y),
        "verdict": exotic_verdict(&x, &y).to_string(),
    });
    println!("{}", serde_json::to_string_pretty(&out).map_err(anyhow::Error::from)?);
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { script, report, dag } => cmd_run(&script, report, dag.as_deref()),
        Command::Geography { chi_max, format, spin } => {
            if chi_max < 1 {
                return Err(Failure::Diagnostics(vec!["--chi-max must be at least 1".into()]));
            }
            let format = match format {
                Format::Tsv => ChartFormat::Tsv,
                Format::Svg => ChartFormat::Svg,
            };
            print!("{}", chart(chi_max, format, spin));
            Ok(())
        }
        Command::Knot { command: KnotCommand::Alexander(args) } => cmd_knot(&args),
        Command::Compare { a, b } => cmd_compare(&a, &b),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Diagnostics(lines)) => {
            for l in lines {
                eprintln!("{l}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Internal(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

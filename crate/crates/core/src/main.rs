use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use holder_lab::catalog::registry::{build_map, entries, lookup, CatalogEntry, MapSpec, RegistryError};
use holder_lab::domain::{DomainConfig, DEFAULT_BREADTH};
use holder_lab::experiment::{exit, run, RunOptions};

#[derive(Parser)]
#[command(name = "holder-lab", version, about = "Run verification experiments against a catalog of Hölder maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write its report and summary.
    Run {
        config: PathBuf,
        /// Report-only checks outside their claim fail the run.
        #[arg(long)]
        strict: bool,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Sampling breadth (overrides the config).
        #[arg(long)]
        breadth: Option<usize>,
    },
    /// List every construction in the catalog.
    List,
    /// Show the full sheet for one construction.
    Describe { name: String },
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() { exit::CONFIG } else { exit::PASS });
        }
    };
    match cli.command {
        Command::Run { config, strict, out, seed, breadth } => {
            let opts = RunOptions { strict, out, seed, breadth };
            match run(&config, &opts) {
                Ok(outcome) => {
                    print!("{}", outcome.report.summary());
                    println!("report: {}", outcome.report_path.display());
                    println!("summary: {}", outcome.summary_path.display());
                    code(outcome.exit_code())
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    code(e.exit_code())
                }
            }
        }
        Command::List => {
            for e in entries() {
                print!("{}", listing(&e));
            }
            code(exit::PASS)
        }
        Command::Describe { name } => match lookup(&name) {
            Ok(e) => {
                print!("{}", sheet(&e));
                code(exit::PASS)
            }
            Err(e @ RegistryError::UnknownName { .. }) => {
                eprintln!("error: {e}");
                code(exit::UNKNOWN_NAME)
            }
            Err(e) => {
                eprintln!("error: {e}");
                code(exit::CONFIG)
            }
        },
    }
}

fn params_line(e: &CatalogEntry) -> String {
    if e.params.is_empty() {
        return "none".into();
    }
    e.params
        .iter()
        .map(|p| format!("{}: {} = {}", p.name, p.kind, p.default))
        .collect::<Vec<_>>()
        .join(", ")
}

fn listing(e: &CatalogEntry) -> String {
    let mut s = format!("{}\n  formula: {}\n  params: {}\n", e.name, e.formula, params_line(e));
    match build_map(&MapSpec::named(e.name), DEFAULT_BREADTH) {
        Ok(m) => {
            s += &format!("  claims: {}\n", m.claims.summary());
            s += &format!("  oracle: {}\n", if m.has_oracle() { "yes" } else { "no" });
        }
        Err(err) => s += &format!("  defaults do not build: {err}\n"),
    }
    s
}

fn sheet(e: &CatalogEntry) -> String {
    let mut s = format!("{}\n\nformula\n  {}\n\nparameters\n", e.name, e.formula);
    if e.params.is_empty() {
        s += "  none\n";
    }
    for p in &e.params {
        s += &format!("  {:<10} {:<14} default {:<28} {}\n", p.name, p.kind, p.default.to_string(), p.constraint);
    }
    match build_map(&MapSpec::named(e.name), DEFAULT_BREADTH) {
        Ok(m) => {
            let domain = serde_json::to_string(&DomainConfig::from_spec(&m.domain)).expect("serializable");
            s += &format!("\ndomain (defaults)\n  {domain}\n  norm {}\n", m.norm);
            s += &format!("\nclaims (defaults)\n  {}\n", m.claims.summary());
            if m.claims.truncation_residual > 0.0 {
                s += &format!("  truncation residual: {}\n", m.claims.truncation_residual);
            }
            s += &format!("  iterate oracle: {}\n", if m.has_oracle() { "yes" } else { "no" });
        }
        Err(err) => s += &format!("\ndefaults do not build: {err}\n"),
    }
    if !e.notes.is_empty() {
        s += "\nnotes\n";
        for n in e.notes {
            s += &format!("  - {n}\n");
        }
    }
    s
}

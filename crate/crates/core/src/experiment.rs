//! Experiment configs, the run pipeline and report files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::registry::{build_map, MapSpec, RegistryError};
use crate::domain::{DomainConfig, DomainError, DEFAULT_BREADTH};
use crate::rng::{derive_seed, stream};
use crate::verify::{run_check, CheckRecord, CheckRequest, Verdict, VerifyError, RELATIVE_SLACK};

pub const SCHEMA_VERSION: u32 = 1;

pub mod exit {
    pub const PASS: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const PARAMETER: i32 = 3;
    pub const UNKNOWN_NAME: i32 = 4;
    pub const CHECK_FAILED: i32 = 5;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub map: MapSpec,
    /// Replaces the map's own domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainConfig>,
    pub checks: Vec<CheckRequest>,
    pub seed: u64,
    /// Relative slack on claimed constants for every check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Output directory, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub strict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub breadth: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, RunError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let bad = |m: String| Err(RunError::Config(m));
        if self.schema_version != SCHEMA_VERSION {
            return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", self.schema_version));
        }
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c)) {
            return bad(format!("name `{}` must be nonempty and use only [A-Za-z0-9._-]", self.name));
        }
        if self.checks.is_empty() {
            return bad("at least one check is required".into());
        }
        if self.tolerance.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
            return bad("tolerance must be a finite number >= 0".into());
        }
        if self.breadth == Some(0) {
            return bad("breadth must be >= 1".into());
        }
        for (i, c) in self.checks.iter().enumerate() {
            c.validate().map_err(|e| RunError::Config(format!("checks[{i}]: {e}")))?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("{0}")]
    UnknownName(RegistryError),
    #[error("cannot write report: {0}")]
    Io(#[from] std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => exit::CONFIG,
            RunError::Parameter(_) => exit::PARAMETER,
            RunError::UnknownName(_) => exit::UNKNOWN_NAME,
        }
    }
}

impl From<RegistryError> for RunError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownName { .. } => RunError::UnknownName(e),
            RegistryError::Params { .. } => RunError::Config(e.to_string()),
            RegistryError::Catalog { .. } => RunError::Parameter(e.to_string()),
        }
    }
}

impl From<DomainError> for RunError {
    fn from(e: DomainError) -> Self {
        match e {
            DomainError::InvalidParameter { .. } | DomainError::InvalidBudget => {
                RunError::Parameter(format!("domain: {e}"))
            }
            _ => RunError::Config(format!("domain: {e}")),
        }
    }
}

/// Command-line overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunOptions {
    pub strict: bool,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub breadth: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub name: String,
    pub schema_version: u32,
    pub map: MapSpec,
    pub seed: u64,
    pub breadth: usize,
    pub strict: bool,
    pub passed: bool,
    pub checks: Vec<CheckRecord>,
    /// Excluded from determinism comparisons, together with `runtime_ms`.
    pub generated_at: String,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            exit::PASS
        } else {
            exit::CHECK_FAILED
        }
    }

    /// The report with wall-clock fields cleared.
    pub fn without_timing(&self) -> Report {
        let mut r = self.clone();
        r.generated_at.clear();
        for c in &mut r.checks {
            c.runtime_ms = 0;
        }
        r
    }

    pub fn summary(&self) -> String {
        let mut s = format!(
            "{}  map {}  seed {}  breadth {}{}\n",
            self.name,
            self.map.name,
            self.seed,
            self.breadth,
            if self.strict { "  strict" } else { "" }
        );
        if !self.map.params.is_empty() {
            s += &format!("params {}\n", serde_json::Value::Object(self.map.params.clone()));
        }
        s += &format!("{:<36} {:<12} {:<24} {:<24} {}\n", "check", "verdict", "measured", "claimed", "direction");
        for c in &self.checks {
            let verdict = match (c.verdict, c.within_claim) {
                (Verdict::Pass, _) => "pass",
                (Verdict::Fail, _) => "FAIL",
                (Verdict::ReportOnly, Some(false)) => "report*",
                (Verdict::ReportOnly, _) => "report",
            };
            let direction = c.direction.split(':').next().unwrap_or("");
            s += &format!(
                "{:<36} {:<12} {:<24} {:<24} {}\n",
                c.label,
                verdict,
                short(&c.measured),
                short(&c.claimed),
                direction
            );
        }
        s += &format!("result: {}\n", if self.passed { "pass" } else { "FAIL" });
        if self.checks.iter().any(|c| c.verdict == Verdict::ReportOnly && c.within_claim == Some(false)) {
            s += "report*: report-only measurement outside the stated claim\n";
        }
        s
    }
}

fn short(v: &serde_json::Value) -> String {
    let s = match v {
        serde_json::Value::Number(n) => match n.as_f64() {
            Some(f) if f != 0.0 && !(1e-3..1e4).contains(&f.abs()) => format!("{f:.6e}"),
            Some(f) => format!("{f:.6}"),
            None => n.to_string(),
        },
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    if s.chars().count() > 24 {
        s.chars().take(21).collect::<String>() + "..."
    } else {
        s
    }
}

/// Builds the map and runs every check.
pub fn execute(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report, RunError> {
    cfg.validate()?;
    let seed = opts.seed.unwrap_or(cfg.seed);
    let breadth = opts.breadth.or(cfg.breadth).unwrap_or(DEFAULT_BREADTH);
    if breadth == 0 {
        return Err(RunError::Config("breadth must be >= 1".into()));
    }
    let strict = opts.strict || cfg.strict;
    let tolerance = cfg.tolerance.unwrap_or(RELATIVE_SLACK);
    let mut map = build_map(&cfg.map, breadth)?;
    if let Some(d) = &cfg.domain {
        let mut domain = d.build()?;
        if d.breadth.is_none() {
            domain.breadth = breadth;
        }
        map = map.with_domain(domain);
    }
    let mut checks = Vec::new();
    for (i, req) in cfg.checks.iter().enumerate() {
        let check_seed = derive_seed(seed, stream::CHECK, i as u64);
        let records = run_check(&map, req, check_seed, tolerance).map_err(|e| match e {
            VerifyError::InvalidParameter { .. } | VerifyError::InvalidCheck(_) | VerifyError::InvalidStrategy(_) => {
                RunError::Config(format!("checks[{i}] ({}): {e}", req.kind.name()))
            }
            other => RunError::Config(other.to_string()),
        })?;
        checks.extend(records);
    }
    let passed = checks.iter().all(|c| match c.verdict {
        Verdict::Pass => true,
        Verdict::Fail => false,
        Verdict::ReportOnly => !strict || c.within_claim != Some(false),
    });
    Ok(Report {
        name: cfg.name.clone(),
        schema_version: SCHEMA_VERSION,
        map: cfg.map.clone(),
        seed,
        breadth,
        strict,
        passed,
        checks,
        generated_at: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
    })
}

pub struct RunOutcome {
    pub report: Report,
    pub report_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code()
    }
}

fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("report")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Reads a config file, runs it and writes `<name>.report.json` and
/// `<name>.summary.txt`.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| RunError::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let cfg = ExperimentConfig::from_json(&text)?;
    let report = execute(&cfg, opts)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let dir = match (&opts.out, &cfg.output) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) if d.is_absolute() => d.clone(),
        (None, Some(d)) => base.join(d),
        (None, None) => base.to_path_buf(),
    };
    fs::create_dir_all(&dir)?;
    let report_path = dir.join(format!("{}.report.json", cfg.name));
    let summary_path = dir.join(format!("{}.summary.txt", cfg.name));
    let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_atomic(&report_path, &json)?;
    write_atomic(&summary_path, &report.summary())?;
    Ok(RunOutcome { report, report_path, summary_path })
}

//! Run reports: serde model, structured (JSON) and aligned text output.

use std::fmt::Write as _;
use std::io;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::GroupValue;

pub const REPORT_SCHEMA: &str = "abphase-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
    Timeout,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
            Status::Timeout => "TIMEOUT",
        }
    }
}

/// A residual compared against the tolerance it was tested with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance, passed: residual <= tolerance }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Value {
    Phase { angle: f64, complex: [f64; 2] },
    /// Row-major, entries as `[re, im]`.
    Matrix { rows: Vec<Vec<[f64; 2]>> },
    Complex { complex: [f64; 2] },
    Real { value: f64 },
    Text { text: String },
    Integers { values: Vec<i64> },
    Flag { value: bool },
}

impl Value {
    pub fn from_group(g: &GroupValue) -> Value {
        match g {
            GroupValue::Phase(p) => {
                let z = p.to_complex();
                Value::Phase { angle: p.angle(), complex: [z.re, z.im] }
            }
            GroupValue::Matrix(u) => {
                let m = u.matrix();
                let rows = (0..m.nrows())
                    .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
                    .collect();
                Value::Matrix { rows }
            }
            other => Value::Text { text: format!("{other:?}") },
        }
    }

    pub fn complex(z: Complex64) -> Value {
        Value::Complex { complex: [z.re, z.im] }
    }

    pub fn text(s: impl Into<String>) -> Value {
        Value::Text { text: s.into() }
    }

    fn render(&self) -> String {
        match self {
            Value::Phase { angle, complex } => {
                format!("Phase({angle:+.12}) = {}", fmt_complex(complex))
            }
            Value::Matrix { rows } => {
                let body: Vec<String> = rows
                    .iter()
                    .map(|r| r.iter().map(fmt_complex).collect::<Vec<_>>().join(", "))
                    .collect();
                format!("[{}]", body.join("; "))
            }
            Value::Complex { complex } => fmt_complex(complex),
            Value::Real { value } => format!("{value:.6e}"),
            Value::Text { text } => text.clone(),
            Value::Integers { values } => format!("{values:?}"),
            Value::Flag { value } => value.to_string(),
        }
    }
}

fn fmt_complex(z: &[f64; 2]) -> String {
    format!("{:+.12}{:+.12}i", z[0], z[1])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub value: Value,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub task: String,
    pub status: Status,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub checks: Vec<Check>,
    pub values: Vec<NamedValue>,
}

impl TaskReport {
    pub fn new(task: &str, tolerance: f64) -> Self {
        TaskReport {
            task: task.into(),
            status: Status::Pass,
            tolerance,
            message: None,
            checks: vec![],
            values: vec![],
        }
    }

    pub fn check(&mut self, name: impl Into<String>, residual: f64) {
        self.checks.push(Check::new(name, residual, self.tolerance));
    }

    pub fn check_with(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check::new(name, residual, tolerance));
    }

    pub fn value(&mut self, name: impl Into<String>, value: Value) {
        self.values.push(NamedValue { name: name.into(), value, tolerance: self.tolerance });
    }

    /// Status from the checks, unless already decided.
    pub fn finish(mut self) -> Self {
        if self.status == Status::Pass && self.checks.iter().any(|c| !c.passed) {
            self.status = Status::Fail;
        }
        self
    }

    pub fn failed(task: &str, tolerance: f64, err: &Error) -> Self {
        let mut t = TaskReport::new(task, tolerance);
        t.status = if matches!(err, Error::Timeout { .. }) { Status::Timeout } else { Status::Fail };
        t.message = Some(err.to_string());
        t
    }

    pub fn skipped(task: &str, tolerance: f64, because: &str) -> Self {
        let mut t = TaskReport::new(task, tolerance);
        t.status = Status::Skipped;
        t.message = Some(format!("dependency '{because}' did not pass"));
        t
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSummary {
    pub topology: String,
    pub regions: Vec<String>,
    pub overlaps: usize,
    pub triples: usize,
    pub group: String,
    pub pi1: String,
    pub generators: Vec<String>,
    pub reduced_generators: Vec<String>,
    pub modes_per_region: usize,
    pub charge: usize,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub version: u32,
    pub scenario: ScenarioSummary,
    pub tasks: Vec<TaskReport>,
    pub passed: bool,
}

impl Report {
    pub fn new(scenario: ScenarioSummary, tasks: Vec<TaskReport>) -> Self {
        let passed = tasks.iter().all(|t| t.status == Status::Pass);
        Report { schema: REPORT_SCHEMA.into(), version: REPORT_VERSION, scenario, tasks, passed }
    }

    pub fn task(&self, name: &str) -> Option<&TaskReport> {
        self.tasks.iter().find(|t| t.task == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Structured,
}

/// Writes floats with 17 significant digits.
struct FullPrecision;

impl serde_json::ser::Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

pub fn to_structured(report: &Report) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    report.serialize(&mut ser).expect("report serializes");
    let mut s = String::from_utf8(buf).expect("JSON is UTF-8");
    s.push('\n');
    s
}

pub fn from_structured(text: &str) -> Result<Report> {
    let r: Report = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if r.schema != REPORT_SCHEMA || r.version != REPORT_VERSION {
        return Err(Error::Schema {
            field: "schema".into(),
            message: format!("expected {REPORT_SCHEMA} v{REPORT_VERSION}, got {} v{}", r.schema, r.version),
        });
    }
    Ok(r)
}

pub fn to_text(report: &Report) -> String {
    let s = &report.scenario;
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_SCHEMA} v{REPORT_VERSION}");
    let _ = writeln!(
        out,
        "topology {} ({} regions, {} overlaps, {} triples), pi_1 = {}, group {}",
        s.topology,
        s.regions.len(),
        s.overlaps,
        s.triples,
        s.pi1,
        s.group
    );
    let _ = writeln!(
        out,
        "generators [{}], reduced [{}], modes/region {}, charge {}, seed {}",
        s.generators.join(", "),
        s.reduced_generators.join(", "),
        s.modes_per_region,
        s.charge,
        s.seed.map_or("none".to_string(), |x| x.to_string())
    );
    for t in &report.tasks {
        let _ = writeln!(out);
        let _ = writeln!(out, "[{}] {} (tolerance {:.1e})", t.status.label(), t.task, t.tolerance);
        if let Some(m) = &t.message {
            let _ = writeln!(out, "  {m}");
        }
        let width = t
            .checks
            .iter()
            .map(|c| c.name.len())
            .chain(t.values.iter().map(|v| v.name.len()))
            .max()
            .unwrap_or(0);
        for c in &t.checks {
            let _ = writeln!(
                out,
                "  {:<width$}  residual {:.3e}  <= {:.1e}  {}",
                c.name,
                c.residual,
                c.tolerance,
                if c.passed { "ok" } else { "FAILED" }
            );
        }
        for v in &t.values {
            let _ = writeln!(out, "  {:<width$}  {}", v.name, v.value.render());
        }
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "overall: {}", if report.passed { "PASS" } else { "FAIL" });
    out
}

pub fn emit<W: io::Write>(report: &Report, format: Format, out: &mut W) -> Result<()> {
    let s = match format {
        Format::Text => to_text(report),
        Format::Structured => to_structured(report),
    };
    out.write_all(s.as_bytes())?;
    Ok(())
}

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::empirical::EstimateWithCI;
use crate::rng::RngStream;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Outside the hypotheses or out of desk-scale range.
    Skipped,
    /// Reported for context only.
    Info,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped => "skipped",
            Status::Info => "info",
        }
    }
}

/// One grid point: a value with provenance, the declared bound and a verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Cell {
    pub id: String,
    pub params: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    /// Human-readable form of the check, e.g. "≤ 0.25 + 3·se".
    pub bound: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl Cell {
    pub fn exact(id: impl Into<String>, params: serde_json::Value, value: f64, bound: impl Into<String>, status: Status) -> Self {
        Cell { id: id.into(), params, value: Some(value), std_error: None, n_samples: None, stream: None, bound: bound.into(), status, note: None, wall_time: None }
    }

    pub fn estimate(id: impl Into<String>, params: serde_json::Value, e: &EstimateWithCI, bound: impl Into<String>, status: Status) -> Self {
        Cell {
            id: id.into(),
            params,
            value: Some(e.value),
            std_error: Some(e.std_error),
            n_samples: Some(e.n_samples),
            stream: Some(e.stream),
            bound: bound.into(),
            status,
            note: None,
            wall_time: None,
        }
    }

    pub fn skipped(id: impl Into<String>, params: serde_json::Value, reason: impl Into<String>) -> Self {
        Cell { id: id.into(), params, value: None, std_error: None, n_samples: None, stream: None, bound: String::new(), status: Status::Skipped, note: Some(reason.into()), wall_time: None }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub skipped: usize,
    pub info: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub experiment: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub seed: u64,
    pub notes: Vec<String>,
    pub cells: Vec<Cell>,
    pub tally: Tally,
    pub verdict: Status,
}

impl ExperimentReport {
    pub fn new(experiment: &str, group: Option<String>, seed: u64, notes: Vec<String>, cells: Vec<Cell>) -> Self {
        let mut tally = Tally::default();
        for c in &cells {
            match c.status {
                Status::Pass => tally.pass += 1,
                Status::Fail => tally.fail += 1,
                Status::Skipped => tally.skipped += 1,
                Status::Info => tally.info += 1,
            }
        }
        let verdict = Status::from_bool(tally.fail == 0);
        ExperimentReport { experiment: experiment.into(), group, seed, notes, cells, tally, verdict }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Status::Pass
    }

    pub fn cell(&self, id: &str) -> Option<&Cell> {
        self.cells.iter().find(|c| c.id == id)
    }
}

/// Everything one invocation produces.
#[derive(Debug, Clone, Serialize)]
pub struct RunOutput {
    pub schema: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub reports: Vec<ExperimentReport>,
    pub verdict: Status,
}

impl RunOutput {
    pub fn new(command: &str, config: serde_json::Value, reports: Vec<ExperimentReport>) -> Self {
        let verdict = Status::from_bool(reports.iter().all(|r| r.passed()));
        RunOutput { schema: SCHEMA_VERSION, command: command.into(), config, reports, verdict }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.reports {
            out.push_str(&render_text(r));
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", self.verdict.as_str());
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["experiment", "id", "value", "std_error", "n_samples", "bound", "status", "note", "params"]).expect("in-memory write");
        for r in &self.reports {
            for c in &r.cells {
                w.write_record([
                    r.experiment.clone(),
                    c.id.clone(),
                    c.value.map(fmt_num).unwrap_or_default(),
                    c.std_error.map(fmt_num).unwrap_or_default(),
                    c.n_samples.map(|n| n.to_string()).unwrap_or_default(),
                    c.bound.clone(),
                    c.status.as_str().to_string(),
                    c.note.clone().unwrap_or_default(),
                    c.params.to_string(),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

pub fn fmt_num(x: f64) -> String {
    if x == 0.0 || (1e-4..1e6).contains(&x.abs()) {
        format!("{x:.6}")
    } else {
        format!("{x:.4e}")
    }
}

/// Aligned-column table of one report.
pub fn render_text(r: &ExperimentReport) -> String {
    let mut out = String::new();
    let title = match &r.group {
        Some(g) => format!("== {} [{}] seed {} ==", r.experiment, g, r.seed),
        None => format!("== {} seed {} ==", r.experiment, r.seed),
    };
    let _ = writeln!(out, "{title}");
    for n in &r.notes {
        let _ = writeln!(out, "  note: {n}");
    }
    let rows: Vec<[String; 5]> = r
        .cells
        .iter()
        .map(|c| {
            [
                c.id.clone(),
                c.value.map(fmt_num).unwrap_or_else(|| "-".into()),
                c.std_error.map(fmt_num).unwrap_or_else(|| "-".into()),
                if c.bound.is_empty() { c.note.clone().unwrap_or_default() } else { c.bound.clone() },
                c.status.as_str().to_string(),
            ]
        })
        .collect();
    let header = ["cell", "value", "s.e.", "bound", "status"].map(String::from);
    let mut widths = header.clone().map(|h| h.chars().count());
    for row in &rows {
        for (w, s) in widths.iter_mut().zip(row) {
            *w = (*w).max(s.chars().count());
        }
    }
    for row in std::iter::once(&header).chain(&rows) {
        let line: Vec<String> = row.iter().zip(&widths).map(|(s, w)| format!("{s}{}", " ".repeat(w - s.chars().count()))).collect();
        let _ = writeln!(out, "  {}", line.join("  ").trim_end());
    }
    let t = r.tally;
    let _ = writeln!(out, "  verdict: {} ({} pass, {} fail, {} skipped, {} info)", r.verdict.as_str(), t.pass, t.fail, t.skipped, t.info);
    out
}

/// Seed, per-experiment stream and timing switch shared by the runners.
#[derive(Debug, Clone, Copy)]
pub struct Ctx {
    pub seed: u64,
    pub timing: bool,
}

impl Ctx {
    pub fn new(seed: u64) -> Self {
        Ctx { seed, timing: false }
    }

    /// Stream for cell `cell` of experiment `experiment`.
    pub fn stream(&self, experiment: u64, cell: u64) -> RngStream {
        RngStream::new(self.seed, experiment).child(cell)
    }

    /// Attaches the time since `start` when timing is on.
    pub fn stamp(&self, c: &mut Cell, start: Instant) {
        if self.timing {
            c.wall_time = Some(start.elapsed().as_secs_f64());
        }
    }

    /// Runs `f` and attaches its wall time when timing is on.
    pub fn timed(&self, f: impl FnOnce() -> Cell) -> Cell {
        let start = Instant::now();
        let mut c = f();
        if self.timing {
            c.wall_time = Some(start.elapsed().as_secs_f64());
        }
        c
    }
}

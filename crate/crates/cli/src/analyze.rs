use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use flexmind_core::analytics::{
    analyze_annotation, analyze_log, card_forest_from_canvases, compute_metrics, strip_qa_nodes, Annotation,
    JumpAnalysis, JumpDistribution, JumpType, MetricsReport, SessionAnalysis,
};
use flexmind_core::model::{ActionEvent, Project};
use flexmind_core::scoring::{wilcoxon_signed_rank, WilcoxonResult};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, ExitKind};

pub const BASELINE: &str = "baseline";
pub const FLEXMIND: &str = "flexmind";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SessionSource {
    Annotation,
    ActionLog,
    /// Live canvases only: no history, so no jumps.
    ProjectExport,
}

#[derive(Debug, Clone, Serialize)]
pub struct JumpRow {
    pub from: String,
    pub to: String,
    pub jump_type: JumpType,
}

#[derive(Debug, Clone, Serialize)]
pub struct SessionReport {
    /// Participant id, or the file stem.
    pub label: String,
    pub condition: String,
    pub file: String,
    pub source: SessionSource,
    pub metrics: MetricsReport,
    pub jumps: Vec<JumpRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub first: MeanSd,
    pub second: MeanSd,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<WilcoxonResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub conditions: [String; 2],
    pub pairs: Vec<String>,
    pub bonferroni_m: usize,
    pub rows: Vec<ComparisonRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeReport {
    pub sessions: Vec<SessionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<Comparison>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .or_else(|| path.file_name())
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::read(path, e))
}

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::new(ExitKind::Parse, "ParseError", format!("{}: {msg}", path.display()))
}

fn log_rows(jumps: &JumpAnalysis) -> Vec<JumpRow> {
    jumps
        .records
        .iter()
        .map(|r| JumpRow {
            from: r.from_action_seq.to_string(),
            to: r.to_action_seq.to_string(),
            jump_type: r.jump_type,
        })
        .collect()
}

fn from_log(path: &Path, label: String, events: &[ActionEvent]) -> Result<SessionReport, CliError> {
    let SessionAnalysis { metrics, jumps } = analyze_log(events)?;
    Ok(SessionReport {
        label,
        condition: FLEXMIND.into(),
        file: path.display().to_string(),
        source: SessionSource::ActionLog,
        metrics,
        jumps: log_rows(&jumps),
    })
}

fn from_annotation(path: &Path, annotation: &Annotation) -> Result<SessionReport, CliError> {
    let SessionAnalysis { metrics, jumps } = analyze_annotation(annotation)?;
    // Sites are numbered by position among action nodes; report node ids.
    let actions: Vec<&str> = annotation
        .nodes
        .iter()
        .filter(|n| n.class == flexmind_core::analytics::NodeClass::Action)
        .map(|n| n.id.as_str())
        .collect();
    let name = |seq: u64| actions[seq as usize - 1].to_owned();
    Ok(SessionReport {
        label: annotation.participant.clone().unwrap_or_else(|| stem(path)),
        condition: annotation.condition.clone().unwrap_or_else(|| BASELINE.into()),
        file: path.display().to_string(),
        source: SessionSource::Annotation,
        metrics,
        jumps: jumps
            .records
            .iter()
            .map(|r| JumpRow {
                from: name(r.from_action_seq),
                to: name(r.to_action_seq),
                jump_type: r.jump_type,
            })
            .collect(),
    })
}

/// Reads one session: an annotation JSON, a JSONL action log, a project
/// export, or a stored project directory.
pub fn load_session(path: &Path, force_annotation: bool) -> Result<SessionReport, CliError> {
    if path.is_dir() {
        let log = path.join("events.jsonl");
        if !log.is_file() {
            return Err(CliError::input(format!("{} holds no events.jsonl", path.display())));
        }
        let events = ActionEvent::parse_jsonl(&read(&log)?).map_err(|e| parse_err(&log, e))?;
        return from_log(path, stem(path), &events);
    }
    let text = read(path)?;
    let is_jsonl = path.extension().is_some_and(|e| e == "jsonl");
    if is_jsonl && !force_annotation {
        let events = ActionEvent::parse_jsonl(&text).map_err(|e| parse_err(path, e))?;
        return from_log(path, stem(path), &events);
    }
    if force_annotation {
        return from_annotation(path, &Annotation::from_json(&text)?);
    }
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| parse_err(path, e))?;
    if value.get("nodes").is_some() {
        return from_annotation(path, &Annotation::from_json(&text)?);
    }
    if value.get("canvases").is_some() {
        let project: Project = serde_json::from_value(value).map_err(|e| parse_err(path, e))?;
        let forest = strip_qa_nodes(&card_forest_from_canvases(&project.canvases)?);
        return Ok(SessionReport {
            label: stem(path),
            condition: FLEXMIND.into(),
            file: path.display().to_string(),
            source: SessionSource::ProjectExport,
            metrics: compute_metrics(&forest).with_jumps(JumpDistribution::default()),
            jumps: Vec::new(),
        });
    }
    Err(parse_err(path, "not an annotation, action log or project export"))
}

/// Session inputs inside `dir`, in file-name order.
pub fn session_paths(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::read(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json" || e == "jsonl") || p.join("events.jsonl").is_file())
        .collect();
    paths.sort();
    Ok(paths)
}

fn mean_sd(xs: &[f64]) -> MeanSd {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return MeanSd { mean: 0.0, sd: 0.0 };
    }
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanSd { mean, sd }
}

/// Paired Wilcoxon per metric between the two conditions, pairing sessions
/// by label. `None` unless exactly two conditions share at least one label.
pub fn compare(sessions: &[SessionReport], bonferroni_m: usize) -> Option<Comparison> {
    let conditions: BTreeSet<&str> = sessions.iter().map(|s| s.condition.as_str()).collect();
    let [first, second]: [&str; 2] = conditions.into_iter().collect::<Vec<_>>().try_into().ok()?;
    let by = |cond: &str| -> BTreeMap<&str, &MetricsReport> {
        sessions
            .iter()
            .filter(|s| s.condition == cond)
            .map(|s| (s.label.as_str(), &s.metrics))
            .collect()
    };
    let (left, right) = (by(first), by(second));
    let pairs: Vec<&str> = left.keys().filter(|k| right.contains_key(*k)).copied().collect();
    if pairs.is_empty() {
        return None;
    }
    let rows = MetricsReport::COLUMNS
        .iter()
        .enumerate()
        .map(|(i, metric)| {
            let a: Vec<f64> = pairs.iter().map(|p| left[p].values()[i]).collect();
            let b: Vec<f64> = pairs.iter().map(|p| right[p].values()[i]).collect();
            let (test, skipped) = match wilcoxon_signed_rank(&a, &b, bonferroni_m) {
                Ok(t) => (Some(t), None),
                Err(e) => (None, Some(e.code().to_owned())),
            };
            ComparisonRow {
                metric: (*metric).to_owned(),
                first: mean_sd(&a),
                second: mean_sd(&b),
                test,
                skipped,
            }
        })
        .collect();
    Some(Comparison {
        conditions: [first.to_owned(), second.to_owned()],
        pairs: pairs.into_iter().map(str::to_owned).collect(),
        bonferroni_m,
        rows,
    })
}

/// Analyzes one file or every session in a directory (in parallel, merged
/// in file-name order).
pub fn analyze(path: &Path, force_annotation: bool, bonferroni_m: usize) -> Result<AnalyzeReport, CliError> {
    if path.is_dir() && !path.join("events.jsonl").is_file() {
        let paths = session_paths(path)?;
        if paths.is_empty() {
            return Err(CliError::input(format!("no session files in {}", path.display())));
        }
        let sessions = paths
            .par_iter()
            .map(|p| load_session(p, force_annotation))
            .collect::<Result<Vec<_>, _>>()?;
        let comparison = compare(&sessions, bonferroni_m);
        return Ok(AnalyzeReport { sessions, comparison });
    }
    Ok(AnalyzeReport {
        sessions: vec![load_session(path, force_annotation)?],
        comparison: None,
    })
}

impl AnalyzeReport {
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("# Exploration metrics\n\n");
        let labels: Vec<String> = self
            .sessions
            .iter()
            .map(|s| format!("{} ({})", s.label, s.condition))
            .collect();
        out.push_str(&MetricsReport::markdown_table(
            labels
                .iter()
                .map(String::as_str)
                .zip(self.sessions.iter().map(|s| &s.metrics)),
        ));
        for s in self.sessions.iter().filter(|s| !s.jumps.is_empty()) {
            let _ = write!(out, "\n## Jumps: {}\n\n| From | To | Jump |\n|---|---|---|\n", s.label);
            for j in &s.jumps {
                let kind = serde_json::to_value(j.jump_type).expect("jump type");
                let _ = writeln!(out, "| {} | {} | {} |", j.from, j.to, kind.as_str().unwrap_or_default());
            }
        }
        if let Some(c) = &self.comparison {
            let _ = write!(
                out,
                "\n## Paired comparison ({} pairs, Bonferroni m = {})\n\n| Metric | {} Mean(SD) | {} Mean(SD) | W (Bonf. p) |\n|---|---|---|---|\n",
                c.pairs.len(),
                c.bonferroni_m,
                c.conditions[0],
                c.conditions[1]
            );
            for r in &c.rows {
                let test = match (&r.test, &r.skipped) {
                    (Some(t), _) => format!(
                        "{:.1} ({:.3})",
                        t.result.statistic,
                        t.result.corrected_p.unwrap_or(t.result.p_value)
                    ),
                    (None, Some(why)) => format!("n/a ({why})"),
                    (None, None) => "n/a".into(),
                };
                let _ = writeln!(
                    out,
                    "| {} | {:.2} ({:.2}) | {:.2} ({:.2}) | {} |",
                    r.metric, r.first.mean, r.first.sd, r.second.mean, r.second.sd, test
                );
            }
        }
        out
    }
}

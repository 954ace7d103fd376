use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::ScoringError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    Novelty,
    Feasibility,
    Value,
}

impl Dimension {
    pub const ALL: [Dimension; 3] = [Dimension::Novelty, Dimension::Feasibility, Dimension::Value];

    pub fn as_str(self) -> &'static str {
        match self {
            Dimension::Novelty => "novelty",
            Dimension::Feasibility => "feasibility",
            Dimension::Value => "value",
        }
    }
}

/// One rater's judgement of one idea.
///
/// The three dimensions are required unless `too_vague` is set. `condition`,
/// `task` and `calibration` come from optional CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub idea_id: String,
    pub rater_id: String,
    pub novelty: Option<f64>,
    pub feasibility: Option<f64>,
    pub value: Option<f64>,
    pub too_vague: bool,
    #[serde(default)]
    pub condition: Option<String>,
    #[serde(default)]
    pub task: Option<String>,
    #[serde(default)]
    pub calibration: bool,
}

impl RatingRecord {
    pub fn new(idea: &str, rater: &str, novelty: f64, feasibility: f64, value: f64) -> Self {
        Self {
            idea_id: idea.to_owned(),
            rater_id: rater.to_owned(),
            novelty: Some(novelty),
            feasibility: Some(feasibility),
            value: Some(value),
            too_vague: false,
            condition: None,
            task: None,
            calibration: false,
        }
    }

    pub fn vague(idea: &str, rater: &str) -> Self {
        Self {
            novelty: None,
            feasibility: None,
            value: None,
            too_vague: true,
            ..Self::new(idea, rater, 1.0, 1.0, 1.0)
        }
    }

    pub fn dim(&self, d: Dimension) -> Option<f64> {
        match d {
            Dimension::Novelty => self.novelty,
            Dimension::Feasibility => self.feasibility,
            Dimension::Value => self.value,
        }
    }

    pub fn validate(&self) -> Result<(), ScoringError> {
        if self.idea_id.trim().is_empty() || self.rater_id.trim().is_empty() {
            return Err(ScoringError::InvalidRating("empty idea_id or rater_id".into()));
        }
        for d in Dimension::ALL {
            match self.dim(d) {
                Some(x) if !(1.0..=5.0).contains(&x) => {
                    return Err(ScoringError::InvalidRating(format!(
                        "{} {} of idea `{}` is outside [1, 5]",
                        d.as_str(),
                        x,
                        self.idea_id
                    )))
                }
                None if !self.too_vague => {
                    return Err(ScoringError::InvalidRating(format!(
                        "idea `{}` by `{}` is missing {}",
                        self.idea_id,
                        self.rater_id,
                        d.as_str()
                    )))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    idea_id: String,
    rater_id: String,
    novelty: Option<f64>,
    feasibility: Option<f64>,
    value: Option<f64>,
    too_vague: Option<String>,
    #[serde(default)]
    condition: Option<String>,
    #[serde(default)]
    task: Option<String>,
    #[serde(default)]
    calibration: Option<String>,
}

fn parse_flag(raw: Option<&str>, line: u64) -> Result<bool, ScoringError> {
    match raw.map(|s| s.trim().to_ascii_lowercase()).as_deref() {
        None | Some("") | Some("false") | Some("0") | Some("no") => Ok(false),
        Some("true") | Some("1") | Some("yes") => Ok(true),
        Some(other) => Err(ScoringError::Csv(format!("line {line}: `{other}` is not a boolean"))),
    }
}

fn non_empty(s: Option<String>) -> Option<String> {
    s.map(|s| s.trim().to_owned()).filter(|s| !s.is_empty())
}

/// Reads ratings from CSV with header
/// `idea_id,rater_id,novelty,feasibility,value,too_vague` and optional
/// `condition`, `task` and `calibration` columns.
pub fn parse_ratings_csv<R: Read>(input: R) -> Result<Vec<RatingRecord>, ScoringError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let mut out = Vec::new();
    for row in reader.deserialize::<CsvRow>() {
        let row = row.map_err(|e| ScoringError::Csv(e.to_string()))?;
        let line = out.len() as u64 + 2;
        let rec = RatingRecord {
            idea_id: row.idea_id,
            rater_id: row.rater_id,
            novelty: row.novelty,
            feasibility: row.feasibility,
            value: row.value,
            too_vague: parse_flag(row.too_vague.as_deref(), line)?,
            condition: non_empty(row.condition),
            task: non_empty(row.task),
            calibration: parse_flag(row.calibration.as_deref(), line)?,
        };
        rec.validate()?;
        out.push(rec);
    }
    Ok(out)
}

/// Geometric mean of three positive values.
///
/// Evaluated as `a * cbrt((b/a) * (c/a))` so equal inputs return exactly that
/// value, then clamped into `[min, arithmetic mean]` to absorb rounding.
pub fn geometric_mean(a: f64, b: f64, c: f64) -> f64 {
    if a == b && b == c {
        return a;
    }
    let gm = a * ((b / a) * (c / a)).cbrt();
    let lo = a.min(b).min(c);
    let am = (a + b + c) / 3.0;
    gm.max(lo).min(am)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdeaScore {
    pub idea_id: String,
    pub novelty: f64,
    pub feasibility: f64,
    pub value: f64,
    pub overall: f64,
    /// Number of non-vague ratings averaged.
    pub raters: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
}

impl IdeaScore {
    pub fn dim(&self, d: Dimension) -> f64 {
        match d {
            Dimension::Novelty => self.novelty,
            Dimension::Feasibility => self.feasibility,
            Dimension::Value => self.value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExclusionReason {
    TooVague,
    Calibration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedIdea {
    pub idea_id: String,
    pub reason: ExclusionReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub scores: Vec<IdeaScore>,
    pub excluded: Vec<ExcludedIdea>,
}

/// Scores a single idea from its ratings. Vague ratings are ignored.
pub fn score_idea(idea_id: &str, ratings: &[&RatingRecord]) -> Result<IdeaScore, ScoringError> {
    let usable: Vec<&RatingRecord> = ratings.iter().copied().filter(|r| !r.too_vague).collect();
    if usable.is_empty() {
        return Err(ScoringError::AllRatingsVague(idea_id.to_owned()));
    }
    let mean_of = |d: Dimension| -> Result<f64, ScoringError> {
        let mut sum = 0.0;
        for r in &usable {
            r.validate()?;
            sum += r.dim(d).unwrap_or_default();
        }
        Ok(sum / usable.len() as f64)
    };
    let (n, f, v) = (
        mean_of(Dimension::Novelty)?,
        mean_of(Dimension::Feasibility)?,
        mean_of(Dimension::Value)?,
    );
    Ok(IdeaScore {
        idea_id: idea_id.to_owned(),
        novelty: n,
        feasibility: f,
        value: v,
        overall: geometric_mean(n, f, v),
        raters: usable.len(),
        condition: usable.iter().find_map(|r| r.condition.clone()),
        task: usable.iter().find_map(|r| r.task.clone()),
    })
}

/// Averages each dimension over raters and combines the means with the
/// geometric mean. Calibration ideas and ideas every rater marked too vague
/// are reported in `excluded`; output order follows first appearance.
pub fn score_ideas(ratings: &[RatingRecord]) -> Result<ScoreReport, ScoringError> {
    let mut order: Vec<&str> = Vec::new();
    let mut groups: BTreeMap<&str, Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        r.validate()?;
        let entry = groups.entry(&r.idea_id).or_default();
        if entry.is_empty() {
            order.push(&r.idea_id);
        }
        entry.push(r);
    }
    let mut report = ScoreReport {
        scores: Vec::new(),
        excluded: Vec::new(),
    };
    for id in order {
        let group = &groups[id];
        if group.iter().any(|r| r.calibration) {
            report.excluded.push(ExcludedIdea {
                idea_id: id.to_owned(),
                reason: ExclusionReason::Calibration,
            });
            continue;
        }
        match score_idea(id, group) {
            Ok(s) => report.scores.push(s),
            Err(ScoringError::AllRatingsVague(_)) => report.excluded.push(ExcludedIdea {
                idea_id: id.to_owned(),
                reason: ExclusionReason::TooVague,
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

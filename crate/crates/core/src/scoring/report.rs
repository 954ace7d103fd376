use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    band_assign, icc_2k, mean, sample_variance, score_ideas, welch_t, Band, Dimension, ExcludedIdea, IdeaScore,
    RatingRecord, ScoringError, TestResult,
};

type Measure = (&'static str, fn(&IdeaScore) -> f64);

/// Per-condition descriptive statistics over scored ideas.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub n: usize,
    pub novelty: MeanSd,
    pub feasibility: MeanSd,
    pub value: MeanSd,
    pub overall: MeanSd,
    pub bands: BTreeMap<Band, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    /// Sample SD; 0 when only one value is present.
    pub sd: f64,
}

impl MeanSd {
    fn of(xs: &[f64]) -> Self {
        Self {
            mean: mean(xs),
            sd: if xs.len() > 1 { sample_variance(xs).sqrt() } else { 0.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IccRow {
    pub task: String,
    pub dimension: Dimension,
    pub icc: f64,
    /// Ideas rated by every rater of the group.
    pub n: usize,
    pub raters: usize,
    pub degenerate: bool,
}

/// Scores, exclusions, reliability and condition comparison for one ratings
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingReport {
    pub scores: Vec<IdeaScore>,
    pub excluded: Vec<ExcludedIdea>,
    pub conditions: Vec<ConditionSummary>,
    pub icc: Vec<IccRow>,
    /// Welch comparisons keyed by measure, present with exactly two
    /// conditions.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub welch: BTreeMap<String, TestResult>,
}

const UNLABELLED: &str = "all";

impl RatingReport {
    pub fn build(ratings: &[RatingRecord]) -> Result<Self, ScoringError> {
        let scored = score_ideas(ratings)?;
        let icc = icc_rows(ratings)?;

        let mut by_condition: BTreeMap<String, Vec<&IdeaScore>> = BTreeMap::new();
        for s in &scored.scores {
            let key = s.condition.clone().unwrap_or_else(|| UNLABELLED.to_owned());
            by_condition.entry(key).or_default().push(s);
        }
        let mut conditions = Vec::new();
        for (condition, scores) in &by_condition {
            let col = |f: &dyn Fn(&IdeaScore) -> f64| -> Vec<f64> { scores.iter().map(|s| f(s)).collect() };
            let mut bands = BTreeMap::new();
            for s in scores {
                *bands.entry(band_assign(s.overall)?).or_insert(0) += 1;
            }
            conditions.push(ConditionSummary {
                condition: condition.clone(),
                n: scores.len(),
                novelty: MeanSd::of(&col(&|s| s.novelty)),
                feasibility: MeanSd::of(&col(&|s| s.feasibility)),
                value: MeanSd::of(&col(&|s| s.value)),
                overall: MeanSd::of(&col(&|s| s.overall)),
                bands,
            });
        }

        let mut welch = BTreeMap::new();
        if by_condition.len() == 2 {
            let groups: Vec<&Vec<&IdeaScore>> = by_condition.values().collect();
            let measures: [Measure; 4] = [
                ("novelty", |s| s.novelty),
                ("feasibility", |s| s.feasibility),
                ("value", |s| s.value),
                ("overall", |s| s.overall),
            ];
            for (name, f) in measures {
                let a: Vec<f64> = groups[0].iter().map(|s| f(s)).collect();
                let b: Vec<f64> = groups[1].iter().map(|s| f(s)).collect();
                // Too-small or constant groups simply have no comparison.
                if let Ok(t) = welch_t(&a, &b) {
                    welch.insert(name.to_owned(), t);
                }
            }
        }

        Ok(Self {
            scores: scored.scores,
            excluded: scored.excluded,
            conditions,
            icc,
            welch,
        })
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        out.push_str("| Condition | n | Novelty | Feasibility | Value | Overall | Low | Medium | High |\n");
        out.push_str("|---|---|---|---|---|---|---|---|---|\n");
        for c in &self.conditions {
            let cell = |m: &MeanSd| format!("{:.2} ({:.2})", m.mean, m.sd);
            let band = |b: Band| c.bands.get(&b).copied().unwrap_or(0);
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                c.condition,
                c.n,
                cell(&c.novelty),
                cell(&c.feasibility),
                cell(&c.value),
                cell(&c.overall),
                band(Band::Low),
                band(Band::Medium),
                band(Band::High)
            );
        }
        if !self.icc.is_empty() {
            out.push_str("\n| Task | Dimension | ICC(2,k) | n |\n|---|---|---|---|\n");
            for r in &self.icc {
                let flag = if r.degenerate { " (degenerate)" } else { "" };
                let _ = writeln!(
                    out,
                    "| {} | {} | {:.4}{} | {} |",
                    r.task,
                    r.dimension.as_str(),
                    r.icc,
                    flag,
                    r.n
                );
            }
        }
        if !self.welch.is_empty() {
            out.push_str("\n| Measure | t | df | p |\n|---|---|---|---|\n");
            for (name, t) in &self.welch {
                let _ = writeln!(
                    out,
                    "| {} | {:.3} | {:.2} | {:.4} |",
                    name,
                    t.statistic,
                    t.df.unwrap_or(f64::NAN),
                    t.p_value
                );
            }
        }
        if !self.excluded.is_empty() {
            let ids: Vec<&str> = self.excluded.iter().map(|e| e.idea_id.as_str()).collect();
            let _ = writeln!(out, "\nExcluded: {}", ids.join(", "));
        }
        out
    }
}

/// One ICC per task and dimension, over the ideas that every rater of the
/// task scored (calibration and vague ratings removed).
fn icc_rows(ratings: &[RatingRecord]) -> Result<Vec<IccRow>, ScoringError> {
    let calibration: BTreeSet<&str> = ratings
        .iter()
        .filter(|r| r.calibration)
        .map(|r| r.idea_id.as_str())
        .collect();
    let mut tasks: BTreeMap<&str, Vec<&RatingRecord>> = BTreeMap::new();
    for r in ratings {
        if r.too_vague || calibration.contains(r.idea_id.as_str()) {
            continue;
        }
        tasks
            .entry(r.task.as_deref().unwrap_or(UNLABELLED))
            .or_default()
            .push(r);
    }
    let mut rows = Vec::new();
    for (task, recs) in tasks {
        let raters: BTreeSet<&str> = recs.iter().map(|r| r.rater_id.as_str()).collect();
        let mut cells: BTreeMap<&str, BTreeMap<&str, &RatingRecord>> = BTreeMap::new();
        for r in &recs {
            cells
                .entry(r.idea_id.as_str())
                .or_default()
                .entry(r.rater_id.as_str())
                .or_insert(r);
        }
        let complete: Vec<&BTreeMap<&str, &RatingRecord>> =
            cells.values().filter(|m| m.len() == raters.len()).collect();
        if raters.len() < 2 || complete.len() < 2 {
            continue;
        }
        for d in Dimension::ALL {
            let matrix: Vec<Vec<f64>> = complete
                .iter()
                .map(|m| m.values().map(|r| r.dim(d).unwrap_or_default()).collect())
                .collect();
            let icc = icc_2k(&matrix)?;
            rows.push(IccRow {
                task: task.to_owned(),
                dimension: d,
                icc: icc.value,
                n: icc.subjects,
                raters: icc.raters,
                degenerate: icc.degenerate,
            });
        }
    }
    Ok(rows)
}

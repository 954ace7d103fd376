//! Tolerant extraction of structured regions from LLM responses.

use std::fmt::Write as _;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::LlmError;

fn tag_regex(tag: &str, closing: bool) -> Regex {
    let slash = if closing { r"/\s*" } else { "" };
    Regex::new(&format!(r"(?i)<\s*{slash}{}\s*>", regex::escape(tag))).expect("tag regex")
}

/// Inner text of the first `<tag> … </tag>` region, trimmed.
///
/// Whitespace inside the tag brackets is ignored, so `< table >`,
/// `<table>` and `</ table >` all match.
pub fn extract_tagged(text: &str, tag: &str) -> Result<String, LlmError> {
    let open = tag_regex(tag, false);
    let close = tag_regex(tag, true);
    let Some(start) = open.find(text) else {
        return Err(if close.is_match(text) {
            LlmError::UnbalancedTags(tag.to_owned())
        } else {
            LlmError::TagNotFound(tag.to_owned())
        });
    };
    let rest = &text[start.end()..];
    let end = close
        .find(rest)
        .ok_or_else(|| LlmError::UnbalancedTags(tag.to_owned()))?;
    Ok(rest[..end.start()].trim().to_owned())
}

/// A markdown table with a header and rows of equal arity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn split_cells(line: &str) -> Vec<String> {
    let line = line.trim();
    let line = line.strip_prefix('|').unwrap_or(line);
    let line = line.strip_suffix('|').unwrap_or(line);
    line.split('|')
        .map(|cell| cell.replace("**", "").trim().to_owned())
        .collect()
}

fn is_separator(cells: &[String]) -> bool {
    cells.iter().all(|c| {
        let c = c.trim_matches(':');
        !c.is_empty() && c.chars().all(|ch| ch == '-')
    })
}

/// Parses the rows of a markdown table.
///
/// Lines without a `|` are treated as prose and skipped, as are separator
/// rows and rows whose cells are all empty. `**` is stripped from cells.
pub fn parse_markdown_table(inner: &str) -> Result<ParsedTable, LlmError> {
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (index, line) in inner.lines().enumerate() {
        if !line.contains('|') {
            continue;
        }
        let cells = split_cells(line);
        if is_separator(&cells) || cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        match &columns {
            None => columns = Some(cells),
            Some(header) => {
                if cells.len() != header.len() {
                    return Err(LlmError::RaggedRow {
                        line: index + 1,
                        expected: header.len(),
                        got: cells.len(),
                    });
                }
                rows.push(cells);
            }
        }
    }
    let columns = columns.ok_or(LlmError::EmptyTable)?;
    Ok(ParsedTable { columns, rows })
}

impl ParsedTable {
    /// Index of the first column whose header matches one of `names`
    /// (case-insensitive).
    pub fn column(&self, names: &[&str]) -> Option<usize> {
        names
            .iter()
            .find_map(|name| self.columns.iter().position(|c| c.eq_ignore_ascii_case(name)))
    }

    /// Renders the table back to markdown.
    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let line = |cells: &[String]| format!("| {} |", cells.join(" | "));
        let _ = writeln!(out, "{}", line(&self.columns));
        let _ = writeln!(out, "|{}|", vec!["---"; self.columns.len()].join("|"));
        for row in &self.rows {
            let _ = writeln!(out, "{}", line(row));
        }
        out
    }
}

/// First JSON value in `text`, skipping markdown fences and any prose
/// before the first `[` or `{`. Trailing text after the value is ignored.
pub fn extract_json(text: &str) -> Result<serde_json::Value, String> {
    let body = strip_fence(text);
    let start = body.find(['[', '{']).ok_or_else(|| "no JSON value found".to_owned())?;
    let mut stream = serde_json::Deserializer::from_str(&body[start..]).into_iter();
    match stream.next() {
        Some(Ok(value)) => Ok(value),
        Some(Err(e)) => Err(e.to_string()),
        None => Err("no JSON value found".to_owned()),
    }
}

fn strip_fence(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text;
    };
    let after = &text[open + 3..];
    // Skip the info string ("json") on the fence line.
    let after = after.find('\n').map_or(after, |nl| &after[nl + 1..]);
    match after.find("```") {
        Some(close) => &after[..close],
        None => after,
    }
}

//! SOAP section parsing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoapSection {
    Subjective,
    Objective,
    Assessment,
    Plan,
}

impl SoapSection {
    pub const ALL: [SoapSection; 4] = [
        SoapSection::Subjective,
        SoapSection::Objective,
        SoapSection::Assessment,
        SoapSection::Plan,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SoapSection::Subjective => "subjective",
            SoapSection::Objective => "objective",
            SoapSection::Assessment => "assessment",
            SoapSection::Plan => "plan",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            SoapSection::Subjective => "Subjective",
            SoapSection::Objective => "Objective",
            SoapSection::Assessment => "Assessment",
            SoapSection::Plan => "Plan",
        }
    }
}

impl fmt::Display for SoapSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four section bodies, as written to summary files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoapSections {
    pub subjective: String,
    pub objective: String,
    pub assessment: String,
    pub plan: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoapSummary {
    pub subjective: String,
    pub objective: String,
    pub assessment: String,
    pub plan: String,
    pub raw_text: String,
}

impl SoapSummary {
    pub fn section(&self, s: SoapSection) -> &str {
        match s {
            SoapSection::Subjective => &self.subjective,
            SoapSection::Objective => &self.objective,
            SoapSection::Assessment => &self.assessment,
            SoapSection::Plan => &self.plan,
        }
    }

    fn section_mut(&mut self, s: SoapSection) -> &mut String {
        match s {
            SoapSection::Subjective => &mut self.subjective,
            SoapSection::Objective => &mut self.objective,
            SoapSection::Assessment => &mut self.assessment,
            SoapSection::Plan => &mut self.plan,
        }
    }

    pub fn sections(&self) -> SoapSections {
        SoapSections {
            subjective: self.subjective.clone(),
            objective: self.objective.clone(),
            assessment: self.assessment.clone(),
            plan: self.plan.clone(),
        }
    }

    /// "Subjective:\n...\n\nObjective:\n..." with plain headers.
    pub fn to_canonical_text(&self) -> String {
        SoapSection::ALL
            .iter()
            .map(|&s| format!("{}:\n{}", s.title(), self.section(s)))
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

/// Recognizes a header line such as `Plan:`, `**Plan:**`, `## Plan`, or
/// `- Assessment: likely asthma`. Returns the section and any text that
/// follows the colon on the same line.
fn header_of(line: &str) -> Option<(SoapSection, &str)> {
    let body = line.trim_start_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '#' | '-'));
    for section in SoapSection::ALL {
        let name = section.title();
        let Some(head) = body.get(..name.len()) else {
            continue;
        };
        if !head.eq_ignore_ascii_case(name) {
            continue;
        }
        let after = body[name.len()..].trim_start_matches('*');
        if let Some(rest) = after.strip_prefix(':') {
            let rest = rest.trim_start_matches(|c: char| c == '*' || c.is_whitespace());
            return Some((section, rest));
        }
        if after
            .trim_matches(|c: char| c.is_whitespace() || matches!(c, '*' | '#'))
            .is_empty()
        {
            return Some((section, ""));
        }
    }
    None
}

/// Splits model output into SOAP sections. Text before the first header is
/// ignored; a repeated header appends to its section. Missing sections yield
/// [`Error::PartialSoap`] carrying whatever was found.
pub fn parse_soap(raw: &str) -> Result<SoapSummary> {
    let mut summary = SoapSummary {
        raw_text: raw.to_string(),
        ..Default::default()
    };
    let mut seen = [false; 4];
    let mut current: Option<SoapSection> = None;

    for line in raw.lines() {
        if let Some((section, rest)) = header_of(line) {
            seen[section as usize] = true;
            current = Some(section);
            if !rest.is_empty() {
                push_line(summary.section_mut(section), rest);
            }
        } else if let Some(section) = current {
            push_line(summary.section_mut(section), line);
        }
    }
    for s in SoapSection::ALL {
        let trimmed = summary.section(s).trim().to_string();
        *summary.section_mut(s) = trimmed;
    }

    let missing: Vec<SoapSection> = SoapSection::ALL
        .into_iter()
        .filter(|&s| !seen[s as usize])
        .collect();
    if missing.is_empty() {
        Ok(summary)
    } else {
        Err(Error::PartialSoap {
            missing,
            partial: Box::new(summary),
        })
    }
}

fn push_line(buf: &mut String, line: &str) {
    if !buf.is_empty() {
        buf.push('\n');
    }
    buf.push_str(line);
}

//! Transcripts, sentence chunking and dataset files.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infer::tokenizer::Tokenizer;
use crate::text;

/// One speaker turn. Speaker labels are kept verbatim ("D", "P", or anything else).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub speaker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub id: String,
    #[serde(default)]
    pub turns: Vec<Turn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub specialty: Option<String>,
}

impl Transcript {
    pub fn from_turns<S, T>(id: impl Into<String>, turns: impl IntoIterator<Item = (S, T)>) -> Self
    where
        S: Into<String>,
        T: Into<String>,
    {
        Transcript {
            id: id.into(),
            turns: turns
                .into_iter()
                .map(|(speaker, text)| Turn {
                    speaker: speaker.into(),
                    text: text.into(),
                })
                .collect(),
            raw_text: None,
            specialty: None,
        }
    }

    pub fn from_text(id: impl Into<String>, text: impl Into<String>) -> Self {
        Transcript {
            id: id.into(),
            turns: Vec::new(),
            raw_text: Some(text.into()),
            specialty: None,
        }
    }
}

/// A single sentence of a transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub transcript_id: String,
    pub ord: usize,
    pub text: String,
}

/// A conversation with its reference summary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPair {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub conversation: String,
    pub summary: String,
}

/// Drops speaker labels and joins trimmed turn texts with single spaces.
/// A non-empty `raw_text` wins over turns.
pub fn flatten_diarized(transcript: &Transcript) -> Result<String> {
    if let Some(raw) = transcript.raw_text.as_deref() {
        if !raw.trim().is_empty() {
            return Ok(raw.to_string());
        }
    }
    let joined = transcript
        .turns
        .iter()
        .map(|t| t.text.trim())
        .filter(|t| !t.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    if joined.is_empty() {
        return Err(Error::EmptyTranscript(transcript.id.clone()));
    }
    Ok(joined)
}

fn is_terminator(c: char) -> bool {
    matches!(c, '.' | '?' | '!')
}

fn is_closer(c: char) -> bool {
    matches!(c, '"' | '\'' | ')' | ']' | '\u{201d}' | '\u{2019}')
}

/// Splits flat text into trimmed sentence strings.
///
/// A sentence ends at `.`, `?` or `!` (plus any closing quotes or brackets)
/// followed by whitespace or end of text. A period after a standalone single
/// letter does not end a sentence when the next word starts lowercase
/// ("e.g. the", "J. smith"). Decimals never split because the period is not
/// followed by whitespace.
pub fn sentence_spans(text: &str) -> Vec<&str> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let n = chars.len();
    let mut out = Vec::new();
    let mut start = 0usize;

    let mut i = 0;
    while i < n {
        let c = chars[i].1;
        if !is_terminator(c) {
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < n && is_closer(chars[j].1) {
            j += 1;
        }
        let at_boundary = j == n || chars[j].1.is_whitespace();
        if !at_boundary || (c == '.' && abbreviation_period(&chars, i, j)) {
            i += 1;
            continue;
        }
        let end = if j == n { text.len() } else { chars[j].0 };
        let segment = text[start..end].trim();
        if !segment.is_empty() {
            out.push(segment);
        }
        start = end;
        i = j;
    }
    let tail = text[start..].trim();
    if !tail.is_empty() {
        out.push(tail);
    }
    out
}

fn abbreviation_period(chars: &[(usize, char)], period: usize, after: usize) -> bool {
    if period == 0 || after != period + 1 {
        return false;
    }
    let letter = chars[period - 1].1;
    if !letter.is_alphabetic() {
        return false;
    }
    let standalone = period == 1 || !chars[period - 2].1.is_alphanumeric();
    if !standalone {
        return false;
    }
    chars[after..]
        .iter()
        .map(|&(_, c)| c)
        .find(|c| !c.is_whitespace())
        .is_some_and(char::is_lowercase)
}

/// Sentence chunks of `flat_text`, numbered from 0 in order of appearance.
pub fn split_sentences(transcript_id: &str, flat_text: &str) -> Vec<Chunk> {
    sentence_spans(flat_text)
        .into_iter()
        .enumerate()
        .map(|(ord, s)| Chunk {
            transcript_id: transcript_id.to_string(),
            ord,
            text: s.to_string(),
        })
        .collect()
}

/// Flattens and splits in one step.
pub fn chunk_transcript(transcript: &Transcript) -> Result<Vec<Chunk>> {
    let flat = flatten_diarized(transcript)?;
    Ok(split_sentences(&transcript.id, &flat))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TranscriptFormat {
    Jsonl,
    Txt,
}

impl TranscriptFormat {
    /// Guesses from the extension; directories are read as text files.
    pub fn detect(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("json") => TranscriptFormat::Jsonl,
            _ => TranscriptFormat::Txt,
        }
    }
}

impl FromStr for TranscriptFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(TranscriptFormat::Jsonl),
            "txt" => Ok(TranscriptFormat::Txt),
            other => Err(Error::Config(format!(
                "unknown transcript format {other:?}"
            ))),
        }
    }
}

/// Reads transcripts. JSONL yields one transcript per non-blank line; `Txt`
/// accepts a single file or a directory of `.txt` files, each file becoming
/// one transcript named after its stem.
pub fn read_transcripts(path: &Path, format: TranscriptFormat) -> Result<Vec<Transcript>> {
    match format {
        TranscriptFormat::Jsonl => {
            let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            parse_transcripts_jsonl(&body)
        }
        TranscriptFormat::Txt => {
            if path.is_dir() {
                let mut files = Vec::new();
                for entry in fs::read_dir(path).map_err(|e| Error::io(path, e))? {
                    let p = entry.map_err(|e| Error::io(path, e))?.path();
                    if p.extension().is_some_and(|e| e == "txt") {
                        files.push(p);
                    }
                }
                files.sort();
                files.iter().map(|p| read_txt(p)).collect()
            } else {
                Ok(vec![read_txt(path)?])
            }
        }
    }
}

fn read_txt(path: &Path) -> Result<Transcript> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Transcript::from_text(id, body))
}

#[derive(Deserialize)]
struct TranscriptLine {
    id: Option<String>,
    #[serde(default)]
    turns: Vec<Turn>,
    raw_text: Option<String>,
    specialty: Option<String>,
}

pub fn parse_transcripts_jsonl(body: &str) -> Result<Vec<Transcript>> {
    parse_jsonl(body, |line, rec: TranscriptLine| {
        let id = rec.id.ok_or_else(|| Error::Parse {
            line,
            message: "missing field `id`".into(),
        })?;
        Ok(Transcript {
            id,
            turns: rec.turns,
            raw_text: rec.raw_text,
            specialty: rec.specialty,
        })
    })
}

pub fn read_pairs(path: &Path) -> Result<Vec<DatasetPair>> {
    let body = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_pairs_jsonl(&body)
}

pub fn parse_pairs_jsonl(body: &str) -> Result<Vec<DatasetPair>> {
    parse_jsonl(body, |line, pair: DatasetPair| {
        if pair.conversation.trim().is_empty() || pair.summary.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "conversation and summary must be non-empty".into(),
            });
        }
        Ok(pair)
    })
}

fn parse_jsonl<R, T>(body: &str, mut convert: impl FnMut(usize, R) -> Result<T>) -> Result<Vec<T>>
where
    R: serde::de::DeserializeOwned,
{
    let mut out = Vec::new();
    for (idx, raw) in body.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let rec: R = serde_json::from_str(raw).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(convert(line, rec)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CountSummary {
    pub total: usize,
    pub mean: f64,
    pub max: usize,
    pub min: usize,
}

impl CountSummary {
    pub fn from_counts(counts: &[usize]) -> Self {
        if counts.is_empty() {
            return CountSummary::default();
        }
        let total: usize = counts.iter().sum();
        CountSummary {
            total,
            mean: total as f64 / counts.len() as f64,
            max: counts.iter().copied().max().unwrap_or(0),
            min: counts.iter().copied().min().unwrap_or(0),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub count: usize,
    pub sentences: CountSummary,
    pub words: CountSummary,
    pub chars: CountSummary,
    pub tokens: CountSummary,
    /// Distinct lowercased words across the whole corpus.
    pub vocab: usize,
}

pub fn corpus_stats<S: AsRef<str>>(texts: &[S], tokenizer: &dyn Tokenizer) -> CorpusStats {
    let mut sentences = Vec::with_capacity(texts.len());
    let mut words = Vec::with_capacity(texts.len());
    let mut chars = Vec::with_capacity(texts.len());
    let mut tokens = Vec::with_capacity(texts.len());
    let mut vocab = BTreeSet::new();

    for t in texts {
        let t = t.as_ref();
        sentences.push(sentence_spans(t).len());
        words.push(text::whitespace_words(t).count());
        chars.push(t.chars().count());
        tokens.push(tokenizer.count(t));
        for w in text::whitespace_words(t) {
            let w = w.trim_matches(|c: char| !c.is_alphanumeric());
            if !w.is_empty() {
                vocab.insert(w.to_lowercase());
            }
        }
    }

    CorpusStats {
        count: texts.len(),
        sentences: CountSummary::from_counts(&sentences),
        words: CountSummary::from_counts(&words),
        chars: CountSummary::from_counts(&chars),
        tokens: CountSummary::from_counts(&tokens),
        vocab: vocab.len(),
    }
}

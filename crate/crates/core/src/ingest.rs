//! Record and labeled-corpus ingestion.
//!
//! Two input shapes are supported for interaction records: line-delimited
//! JSON (`{id, author, text, created_at, reply_to?, keyword?}`, unknown keys
//! ignored) and CSV with the same column names. Malformed lines are skipped
//! and counted. Labeled corpora are CSV files with a `text,label` header.

use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

/// Longest handle Twitter allows after the `@`.
pub const MAX_HANDLE_LEN: usize = 15;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InteractionRecord {
    pub id: String,
    pub author: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reply_to: Option<String>,
    pub created_at: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub keyword: Option<String>,
}

impl InteractionRecord {
    /// Mentioned handles in the message body, in order of appearance.
    pub fn mentions(&self) -> Vec<String> {
        extract_mentions(&self.text)
    }

    /// Canonical single-line JSON form, accepted back by [`parse_records`].
    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("record serialization is infallible")
    }
}

/// Lowercases a handle and strips a leading `@`. Returns `None` when nothing
/// is left.
pub fn normalize_handle(raw: &str) -> Option<String> {
    let trimmed = raw.trim();
    let bare = trimmed.strip_prefix('@').unwrap_or(trimmed).trim();
    if bare.is_empty() {
        None
    } else {
        Some(bare.to_lowercase())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl RecordFormat {
    /// Infers the format from a file extension (`.jsonl`, `.ndjson`, `.json`, `.csv`).
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "jsonl" | "ndjson" | "json" => Some(RecordFormat::Jsonl),
            "csv" => Some(RecordFormat::Csv),
            _ => None,
        }
    }
}

impl FromStr for RecordFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Ok(RecordFormat::Jsonl),
            "csv" => Ok(RecordFormat::Csv),
            other => Err(Error::validation(
                None,
                format!("unknown record format {other:?}"),
            )),
        }
    }
}

/// Output of [`parse_records`]: the well-formed records plus the 1-based line
/// numbers that were skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecords {
    pub records: Vec<InteractionRecord>,
    pub skipped_lines: Vec<usize>,
}

impl ParsedRecords {
    pub fn skipped_count(&self) -> usize {
        self.skipped_lines.len()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Text(String),
    Int(i64),
    Uint(u64),
}

impl From<RawId> for String {
    fn from(id: RawId) -> Self {
        match id {
            RawId::Text(s) => s,
            RawId::Int(i) => i.to_string(),
            RawId::Uint(u) => u.to_string(),
        }
    }
}

fn de_id<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<String, D::Error> {
    RawId::deserialize(d).map(String::from)
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(deserialize_with = "de_id")]
    id: String,
    author: String,
    text: String,
    created_at: String,
    #[serde(default)]
    reply_to: Option<String>,
    #[serde(default)]
    keyword: Option<String>,
}

impl RawRecord {
    fn normalize(self) -> Option<InteractionRecord> {
        let author = normalize_handle(&self.author)?;
        Some(InteractionRecord {
            id: self.id,
            author,
            text: self.text,
            reply_to: self.reply_to.as_deref().and_then(normalize_handle),
            created_at: self.created_at,
            keyword: self.keyword.filter(|k| !k.trim().is_empty()),
        })
    }
}

/// Parses interaction records from a line-delimited stream.
///
/// Blank lines are ignored. Lines that fail to parse, miss a required field,
/// or carry an empty author are skipped and reported in
/// [`ParsedRecords::skipped_lines`]. Zero usable records is an error.
pub fn parse_records<R: Read>(source: R, format: RecordFormat) -> Result<ParsedRecords> {
    let parsed = match format {
        RecordFormat::Jsonl => parse_jsonl(source)?,
        RecordFormat::Csv => parse_csv(source)?,
    };
    if parsed.records.is_empty() {
        let reason = if parsed.skipped_lines.is_empty() {
            "input is empty".to_string()
        } else {
            format!("all {} lines were malformed", parsed.skipped_lines.len())
        };
        return Err(Error::EmptyInput(reason));
    }
    Ok(parsed)
}

fn parse_jsonl<R: Read>(source: R) -> Result<ParsedRecords> {
    let mut records = Vec::new();
    let mut skipped_lines = Vec::new();
    for (idx, line) in BufReader::new(source).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RawRecord>(&line)
            .ok()
            .and_then(RawRecord::normalize)
        {
            Some(rec) => records.push(rec),
            None => skipped_lines.push(idx + 1),
        }
    }
    Ok(ParsedRecords {
        records,
        skipped_lines,
    })
}

fn parse_csv<R: Read>(source: R) -> Result<ParsedRecords> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = match reader.headers() {
        Ok(h) => h.clone(),
        Err(err) => return Err(csv_error(err)),
    };
    let mut records = Vec::new();
    let mut skipped_lines = Vec::new();
    let mut row = csv::StringRecord::new();
    loop {
        match reader.read_record(&mut row) {
            Ok(false) => break,
            Ok(true) => {
                let line = row.position().map_or(0, |p| p.line() as usize);
                match row
                    .deserialize::<RawRecord>(Some(&headers))
                    .ok()
                    .and_then(RawRecord::normalize)
                {
                    Some(rec) => records.push(rec),
                    None => skipped_lines.push(line),
                }
            }
            Err(err) => match err.kind() {
                csv::ErrorKind::Io(_) => return Err(csv_error(err)),
                _ => skipped_lines.push(err.position().map_or(0, |p| p.line() as usize)),
            },
        }
    }
    Ok(ParsedRecords {
        records,
        skipped_lines,
    })
}

fn is_handle_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Byte ranges of every mention token (including its `@`) in `text`.
pub(crate) fn mention_spans(text: &str) -> Vec<Range<usize>> {
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'@' {
            i += 1;
            continue;
        }
        let preceded_by_word = i > 0 && is_handle_char(bytes[i - 1] as char);
        let start = i + 1;
        let mut end = start;
        while end < bytes.len() && is_handle_char(bytes[end] as char) {
            end += 1;
        }
        let len = end - start;
        if !preceded_by_word && (1..=MAX_HANDLE_LEN).contains(&len) {
            spans.push(i..end);
        }
        i = end.max(i + 1);
    }
    spans
}

/// Extracts `@handle` mentions: `@` followed by 1 to 15 characters of
/// `[A-Za-z0-9_]`, taken as a maximal run. Handles are lowercased and
/// returned without the `@`, in order, duplicates kept.
///
/// An `@` glued to a preceding word character (as in an e-mail address) does
/// not start a mention, and a run longer than 15 characters is not a handle.
pub fn extract_mentions(text: &str) -> Vec<String> {
    mention_spans(text)
        .into_iter()
        .map(|r| text[r.start + 1..r.end].to_ascii_lowercase())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    // Declaration order gives Negative < Positive, matching alphabetical order.
    Negative,
    Positive,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Positive, Label::Negative];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Positive => "positive",
            Label::Negative => "negative",
        }
    }

    pub fn flip(self) -> Label {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "positive" => Ok(Label::Positive),
            "negative" => Ok(Label::Negative),
            other => Err(Error::validation(
                None,
                format!("label {other:?} is not one of positive, negative"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDocument {
    pub text: String,
    pub label: Label,
}

impl LabeledDocument {
    pub fn new(text: impl Into<String>, label: Label) -> Self {
        LabeledDocument {
            text: text.into(),
            label,
        }
    }
}

/// Reads a `text,label` CSV corpus. Column order may vary but both columns
/// must be named in the header. Any bad row fails the whole read with the
/// offending line number.
pub fn parse_labeled_corpus<R: Read>(source: R) -> Result<Vec<LabeledDocument>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(source);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::validation(Some(1), format!("missing {name:?} column in header")))
    };
    let text_col = column("text")?;
    let label_col = column("label")?;

    let mut docs = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_error)?;
        let line = row.position().map(|p| p.line() as usize);
        let (Some(text), Some(label)) = (row.get(text_col), row.get(label_col)) else {
            return Err(Error::validation(
                line,
                "row is missing the text or label field",
            ));
        };
        let label = label.parse::<Label>().map_err(|e| match e {
            Error::Validation { message, .. } => Error::validation(line, message),
            other => other,
        })?;
        docs.push(LabeledDocument::new(text, label));
    }
    Ok(docs)
}

fn csv_error(err: csv::Error) -> Error {
    let line = err.position().map(|p| p.line() as usize);
    match err.into_kind() {
        csv::ErrorKind::Io(e) => Error::Io(e),
        other => Error::validation(line, format!("malformed csv: {other:?}")),
    }
}

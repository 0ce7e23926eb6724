//! Tokenizing, stopword filtering and rule-table stemming for Indonesian
//! short-form text.

use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, Read};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::mention_spans;

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_id.txt");
const DEFAULT_RULES: &str = include_str!("../data/stemmer_rules.tsv");

/// Shortest stem a rule may leave behind.
pub const MIN_STEM_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AffixClass {
    /// Inflectional particles such as -lah, -kah, -nya.
    Particle,
    /// Derivational suffixes such as -kan, -an, -i.
    Suffix,
    /// Derivational prefixes such as me-, ber-, di-.
    Prefix,
}

impl AffixClass {
    const ORDER: [AffixClass; 3] = [AffixClass::Particle, AffixClass::Suffix, AffixClass::Prefix];

    fn is_prefix(self) -> bool {
        self == AffixClass::Prefix
    }
}

impl fmt::Display for AffixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AffixClass::Particle => "particle",
            AffixClass::Suffix => "suffix",
            AffixClass::Prefix => "prefix",
        })
    }
}

impl FromStr for AffixClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "particle" => Ok(AffixClass::Particle),
            "suffix" => Ok(AffixClass::Suffix),
            "prefix" => Ok(AffixClass::Prefix),
            other => Err(Error::validation(
                None,
                format!("unknown affix class {other:?}"),
            )),
        }
    }
}

/// One line of the stemmer rule table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRule {
    pub class: AffixClass,
    pub affix: String,
    /// Letters that may not sit next to the affix (before a suffix, after a
    /// prefix) for the rule to fire.
    pub blocked_neighbors: String,
    pub replacement: String,
}

impl StemRule {
    /// Parses `class<TAB>pattern<TAB>replacement`. The pattern is the affix,
    /// optionally with a `[^..]` guard on the side that touches the stem.
    pub fn parse_line(line: &str) -> Result<Self> {
        let mut cols = line.split('\t');
        let class: AffixClass = cols.next().unwrap_or_default().trim().parse()?;
        let pattern = cols.next().unwrap_or_default().trim();
        let replacement = cols.next().unwrap_or_default().trim().to_lowercase();
        if cols.next().is_some() {
            return Err(Error::validation(None, "rule has more than three columns"));
        }
        let (affix, blocked) = split_guard(pattern, class.is_prefix())?;
        if affix.is_empty() || affix.chars().any(|c| !c.is_lowercase()) {
            return Err(Error::validation(
                None,
                format!("affix {affix:?} must be non-empty lowercase letters"),
            ));
        }
        if replacement.chars().count() >= affix.chars().count() {
            return Err(Error::validation(
                None,
                format!("replacement {replacement:?} must be shorter than affix {affix:?}"),
            ));
        }
        Ok(StemRule {
            class,
            affix: affix.to_string(),
            blocked_neighbors: blocked.to_string(),
            replacement,
        })
    }

    fn pattern(&self) -> String {
        match (self.blocked_neighbors.is_empty(), self.class.is_prefix()) {
            (true, _) => self.affix.clone(),
            (false, true) => format!("{}[^{}]", self.affix, self.blocked_neighbors),
            (false, false) => format!("[^{}]{}", self.blocked_neighbors, self.affix),
        }
    }

    /// Applies the rule if it matches and leaves at least [`MIN_STEM_LEN`]
    /// characters.
    fn apply(&self, token: &str) -> Option<String> {
        let (stem, neighbor) = if self.class.is_prefix() {
            let stem = token.strip_prefix(self.affix.as_str())?;
            (stem, stem.chars().next())
        } else {
            let stem = token.strip_suffix(self.affix.as_str())?;
            (stem, stem.chars().next_back())
        };
        if neighbor.is_some_and(|c| self.blocked_neighbors.contains(c)) {
            return None;
        }
        let out = if self.class.is_prefix() {
            format!("{}{}", self.replacement, stem)
        } else {
            format!("{}{}", stem, self.replacement)
        };
        (out.chars().count() >= MIN_STEM_LEN).then_some(out)
    }
}

fn split_guard(pattern: &str, prefix: bool) -> Result<(&str, &str)> {
    let bad = || Error::validation(None, format!("malformed rule pattern {pattern:?}"));
    if prefix {
        match pattern.find("[^") {
            None => Ok((pattern, "")),
            Some(i) => {
                let guard = pattern[i + 2..].strip_suffix(']').ok_or_else(bad)?;
                Ok((&pattern[..i], guard))
            }
        }
    } else if let Some(rest) = pattern.strip_prefix("[^") {
        let close = rest.find(']').ok_or_else(bad)?;
        Ok((&rest[close + 1..], &rest[..close]))
    } else {
        Ok((pattern, ""))
    }
}

/// Ordered rule table. At most one rule per class fires per pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemmerRules {
    rules: Vec<StemRule>,
}

impl StemmerRules {
    /// Parses a rule file; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let rule = StemRule::parse_line(line).map_err(|e| match e {
                Error::Validation { message, .. } => Error::validation(Some(idx + 1), message),
                other => other,
            })?;
            rules.push(rule);
        }
        Ok(StemmerRules { rules })
    }

    pub fn rules(&self) -> &[StemRule] {
        &self.rules
    }

    /// Particle, then suffix, then prefix; first matching rule per class.
    fn single_pass(&self, token: &str) -> String {
        let mut current = token.to_string();
        for class in AffixClass::ORDER {
            if let Some(next) = self
                .rules
                .iter()
                .filter(|r| r.class == class)
                .find_map(|r| r.apply(&current))
            {
                current = next;
            }
        }
        current
    }

    /// Repeats the single pass until the token stops changing. Every rule
    /// shortens the token, so this terminates.
    pub fn stem(&self, token: &str) -> String {
        let mut current = token.to_string();
        loop {
            let next = self.single_pass(&current);
            if next == current {
                return current;
            }
            current = next;
        }
    }
}

impl Default for StemmerRules {
    fn default() -> Self {
        StemmerRules::parse(DEFAULT_RULES).expect("bundled stemmer rules are valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPipelineConfig {
    pub stopwords: BTreeSet<String>,
    pub strip_mentions: bool,
    pub strip_urls: bool,
    pub stemmer_rules: StemmerRules,
    pub min_token_len: usize,
}

impl Default for TokenPipelineConfig {
    fn default() -> Self {
        TokenPipelineConfig {
            stopwords: parse_stopwords(DEFAULT_STOPWORDS),
            strip_mentions: true,
            strip_urls: true,
            stemmer_rules: StemmerRules::default(),
            min_token_len: 2,
        }
    }
}

/// One word per line; blank lines and `#` comments ignored; lowercased.
pub fn parse_stopwords(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

pub fn load_stopwords<R: Read>(source: R) -> Result<BTreeSet<String>> {
    let mut text = String::new();
    BufReader::new(source).read_to_string(&mut text)?;
    Ok(parse_stopwords(&text))
}

pub fn load_stemmer_rules<R: Read>(source: R) -> Result<StemmerRules> {
    let mut text = String::new();
    for line in BufReader::new(source).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    StemmerRules::parse(&text)
}

impl TokenPipelineConfig {
    /// Stable SHA-256 over every setting that changes tokenization. Models
    /// record it so they are only reused with the pipeline they were trained
    /// with.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"convograph-pipeline-v1\n");
        h.update(format!(
            "strip_mentions={}\nstrip_urls={}\nmin_token_len={}\n",
            self.strip_mentions, self.strip_urls, self.min_token_len
        ));
        for w in &self.stopwords {
            h.update(b"stop\t");
            h.update(w.as_bytes());
            h.update(b"\n");
        }
        for r in self.stemmer_rules.rules() {
            h.update(format!(
                "rule\t{}\t{}\t{}\n",
                r.class,
                r.pattern(),
                r.replacement
            ));
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn url_spans(text: &str) -> Vec<std::ops::Range<usize>> {
    let mut spans = Vec::new();
    let mut offset = 0;
    for chunk in text.split_inclusive(char::is_whitespace) {
        let word = chunk.trim_end();
        let lower = word.to_ascii_lowercase();
        let start = lower.find("http://").or_else(|| lower.find("https://"));
        if let Some(s) = start {
            spans.push(offset + s..offset + word.len());
        } else if lower.starts_with("www.") {
            spans.push(offset..offset + word.len());
        }
        offset += chunk.len();
    }
    spans
}

/// Lowercases, blanks out mentions and URLs per `cfg`, splits on runs of
/// non-alphanumeric characters and drops tokens shorter than
/// `min_token_len` characters.
pub fn tokenize(text: &str, cfg: &TokenPipelineConfig) -> Vec<String> {
    let mut spans = Vec::new();
    if cfg.strip_urls {
        spans.extend(url_spans(text));
    }
    if cfg.strip_mentions {
        spans.extend(mention_spans(text));
    }
    let mut cleaned = String::with_capacity(text.len());
    for (i, c) in text.char_indices() {
        if spans.iter().any(|s| s.contains(&i)) {
            cleaned.push(' ');
        } else {
            cleaned.push(c);
        }
    }
    cleaned
        .to_lowercase()
        .split(|c: char| !c.is_alphanumeric() || c.is_uppercase())
        .filter(|t| !t.is_empty() && t.chars().count() >= cfg.min_token_len.max(1))
        .map(str::to_string)
        .collect()
}

pub fn filter_stopwords(tokens: Vec<String>, cfg: &TokenPipelineConfig) -> Vec<String> {
    tokens
        .into_iter()
        .filter(|t| !cfg.stopwords.contains(t))
        .collect()
}

pub fn stem(token: &str, cfg: &TokenPipelineConfig) -> String {
    cfg.stemmer_rules.stem(token)
}

/// tokenize, then filter stopwords, then stem.
pub fn preprocess(text: &str, cfg: &TokenPipelineConfig) -> Vec<String> {
    filter_stopwords(tokenize(text, cfg), cfg)
        .into_iter()
        .map(|t| stem(&t, cfg))
        .collect()
}

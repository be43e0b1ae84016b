//! Offset-preserving tokenization, character/token span alignment, and the
//! term-normalization pipeline used by the description-overlap analysis.
//!
//! All offsets in this module count Unicode scalar values (chars), not bytes,
//! matching the character positions carried by corpus annotations.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");
const DEFAULT_LEMMA_TABLE: &str = include_str!("../data/lemma_table.json");

/// A single token with character offsets into the source text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    /// Inclusive char offset of the first character.
    pub begin: usize,
    /// Exclusive char offset one past the last character.
    pub end: usize,
    /// Ordinal of this token within its document.
    pub index: usize,
}

impl Token {
    /// True when the surface contains no alphanumeric character.
    pub fn is_punctuation(&self) -> bool {
        !self.surface.chars().any(char::is_alphanumeric)
    }

    /// True when every character of the surface is numeric.
    pub fn is_numeric(&self) -> bool {
        !self.surface.is_empty() && self.surface.chars().all(char::is_numeric)
    }
}

/// Tokens of one document plus the source length in chars.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenizedDocument {
    pub note_id: String,
    pub tokens: Vec<Token>,
    pub source_length: usize,
}

/// Inclusive range of token indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TokenSpan {
    pub first: usize,
    pub last: usize,
}

impl TokenSpan {
    pub fn new(first: usize, last: usize) -> Self {
        debug_assert!(first <= last);
        TokenSpan { first, last }
    }

    /// Number of tokens covered. Never zero: a span always covers at least
    /// the token at `first`.
    pub fn len(&self) -> usize {
        self.last - self.first + 1
    }

    pub fn contains(&self, index: usize) -> bool {
        self.first <= index && index <= self.last
    }

    pub fn token_ids(&self) -> impl Iterator<Item = usize> {
        self.first..=self.last
    }
}

/// Word-level tokenization: maximal runs of alphanumeric characters form
/// tokens, every punctuation character is its own token, whitespace is never
/// a token. Total and deterministic for any input.
pub fn tokenize(text: &str) -> TokenizedDocument {
    let mut tokens = Vec::new();
    let mut run_start: Option<usize> = None;
    let mut run = String::new();
    let mut char_count = 0;

    let mut flush = |tokens: &mut Vec<Token>, run: &mut String, start: &mut Option<usize>, end: usize| {
        if let Some(begin) = start.take() {
            tokens.push(Token {
                surface: std::mem::take(run),
                begin,
                end,
                index: tokens.len(),
            });
        }
    };

    for (pos, ch) in text.chars().enumerate() {
        char_count = pos + 1;
        if ch.is_alphanumeric() {
            if run_start.is_none() {
                run_start = Some(pos);
            }
            run.push(ch);
        } else {
            flush(&mut tokens, &mut run, &mut run_start, pos);
            if !ch.is_whitespace() {
                tokens.push(Token {
                    surface: ch.to_string(),
                    begin: pos,
                    end: pos + 1,
                    index: tokens.len(),
                });
            }
        }
    }
    flush(&mut tokens, &mut run, &mut run_start, char_count);

    TokenizedDocument {
        note_id: String::new(),
        tokens,
        source_length: char_count,
    }
}

/// Minimal token span covering every token that overlaps `[begin, end)`.
/// Overlap means `token.begin < end && token.end > begin`.
pub fn align_span(doc: &TokenizedDocument, begin: usize, end: usize) -> Result<TokenSpan> {
    if begin >= end || end > doc.source_length {
        return Err(Error::InvalidSpan {
            begin,
            end,
            len: doc.source_length,
        });
    }
    let mut first = None;
    let mut last = None;
    for token in &doc.tokens {
        if token.begin >= end {
            break;
        }
        if token.begin < end && token.end > begin {
            if first.is_none() {
                first = Some(token.index);
            }
            last = Some(token.index);
        }
    }
    match (first, last) {
        (Some(first), Some(last)) => Ok(TokenSpan { first, last }),
        _ => Err(Error::Alignment { begin, end }),
    }
}

/// Configuration for `normalize_terms`.
///
/// The default carries a built-in English stopword list and lemma table;
/// both can be replaced via data files.
#[derive(Debug, Clone)]
pub struct NormConfig {
    stopwords: BTreeSet<String>,
    lemma_table: BTreeMap<String, String>,
    pub keep_numbers: bool,
    /// When true, input case is preserved and comparison is case-sensitive.
    /// Defaults to false: both sides of an overlap comparison are lowercased.
    pub case_sensitive: bool,
}

impl Default for NormConfig {
    fn default() -> Self {
        let stopwords = DEFAULT_STOPWORDS
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let lemma_table: BTreeMap<String, String> =
            serde_json::from_str(DEFAULT_LEMMA_TABLE).expect("built-in lemma table is valid JSON");
        NormConfig {
            stopwords,
            lemma_table,
            keep_numbers: true,
            case_sensitive: false,
        }
    }
}

/// On-disk form of [`NormConfig`]: paths to the data files plus switches.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormConfigFile {
    #[serde(default)]
    pub stopwords: Option<String>,
    #[serde(default)]
    pub lemma_table: Option<String>,
    #[serde(default = "default_true")]
    pub keep_numbers: bool,
    #[serde(default)]
    pub case_sensitive: bool,
}

fn default_true() -> bool {
    true
}

impl NormConfig {
    /// Load a config file, resolving relative data-file paths against the
    /// config file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let file: NormConfigFile =
            serde_json::from_str(&text).map_err(|e| Error::from_json(&e, &text))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        let mut config = NormConfig {
            keep_numbers: file.keep_numbers,
            case_sensitive: file.case_sensitive,
            ..NormConfig::default()
        };
        if let Some(p) = file.stopwords {
            let text = fs::read_to_string(base.join(&p))?;
            config.stopwords = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#'))
                .map(str::to_string)
                .collect();
        }
        if let Some(p) = file.lemma_table {
            let text = fs::read_to_string(base.join(&p))?;
            config.lemma_table =
                serde_json::from_str(&text).map_err(|e| Error::from_json(&e, &text))?;
        }
        Ok(config)
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    fn lemma(&self, word: &str) -> String {
        if let Some(mapped) = self.lemma_table.get(word) {
            return mapped.clone();
        }
        strip_plural(word)
    }
}

/// Rule-based plural stripping. Words ending in `ss`, `us`, or `is` are left
/// alone so that e.g. latinate disease names survive intact.
fn strip_plural(word: &str) -> String {
    let n = word.chars().count();
    if n >= 5 && word.ends_with("ies") {
        let stem: String = word.chars().take(n - 3).collect();
        return format!("{stem}y");
    }
    if n >= 5
        && word.ends_with("es")
        && (word.ends_with("sses")
            || word.ends_with("xes")
            || word.ends_with("zes")
            || word.ends_with("ches")
            || word.ends_with("shes"))
    {
        return word.chars().take(n - 2).collect();
    }
    if n >= 4
        && word.ends_with('s')
        && !word.ends_with("ss")
        && !word.ends_with("us")
        && !word.ends_with("is")
    {
        return word.chars().take(n - 1).collect();
    }
    word.to_string()
}

/// Normalize free text into an ordered set of content words.
///
/// Pipeline: lowercase (unless case-sensitive), tokenize, drop punctuation
/// tokens, drop stopwords, optionally drop numeric tokens, apply the lemma
/// table and plural stripping, and deduplicate preserving first-occurrence
/// order. Idempotent on its own output.
pub fn normalize_terms(text: &str, config: &NormConfig) -> Vec<String> {
    let prepared: String = if config.case_sensitive {
        text.to_string()
    } else {
        text.to_lowercase()
    };
    let doc = tokenize(&prepared);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for token in &doc.tokens {
        if token.is_punctuation() {
            continue;
        }
        // Stopword and lemma lookups always happen on the lowercased form.
        let lower = token.surface.to_lowercase();
        if config.is_stopword(&lower) {
            continue;
        }
        if !config.keep_numbers && token.is_numeric() {
            continue;
        }
        let lemma = config.lemma(&lower);
        // A user-supplied table may map onto a stopword; keep the pipeline
        // idempotent by re-checking.
        if config.is_stopword(&lemma) {
            continue;
        }
        let word = if config.case_sensitive && lemma == lower {
            token.surface.clone()
        } else {
            lemma
        };
        if seen.insert(word.clone()) {
            out.push(word);
        }
    }
    out
}

//! Parsing, validation, and indexing of span-annotated corpora, plus the
//! cross-annotation-scheme subset analysis.
//!
//! Input files are JSON: a top-level list of admissions, each holding notes,
//! each note holding annotations with character offsets into the note text.
//! A schema map can rename the expected keys so differently-labelled files
//! load without code changes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textproc;

/// Code system an annotation belongs to.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CodeSystem {
    Icd9,
    Icd10Cm,
    Icd10Pcs,
    Other(String),
}

impl CodeSystem {
    pub fn parse(raw: &str) -> CodeSystem {
        let folded: String = raw
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_uppercase();
        match folded.as_str() {
            "ICD9" | "ICD9CM" => CodeSystem::Icd9,
            "ICD10CM" => CodeSystem::Icd10Cm,
            "ICD10PCS" => CodeSystem::Icd10Pcs,
            _ => CodeSystem::Other(raw.to_string()),
        }
    }
}

impl fmt::Display for CodeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSystem::Icd9 => write!(f, "ICD-9"),
            CodeSystem::Icd10Cm => write!(f, "ICD-10-CM"),
            CodeSystem::Icd10Pcs => write!(f, "ICD-10-PCS"),
            CodeSystem::Other(raw) => write!(f, "{raw}"),
        }
    }
}

impl Serialize for CodeSystem {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for CodeSystem {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        Ok(CodeSystem::parse(&raw))
    }
}

/// One evidence span: an ICD code justified by the characters
/// `[begin, end)` of the owning note text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvidenceAnnotation {
    pub code: String,
    #[serde(default = "default_code_system")]
    pub code_system: CodeSystem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub begin: usize,
    pub end: usize,
}

fn default_code_system() -> CodeSystem {
    CodeSystem::Other(String::new())
}

/// One clinical document with its evidence annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Note {
    #[serde(deserialize_with = "string_or_int")]
    pub note_id: String,
    #[serde(default)]
    pub category: String,
    pub text: String,
    #[serde(default)]
    pub annotations: Vec<EvidenceAnnotation>,
}

impl Note {
    /// Character count of the note text.
    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }

    /// The text covered by an annotation, sliced by character offsets.
    pub fn covered_text(&self, ann: &EvidenceAnnotation) -> String {
        self.text
            .chars()
            .skip(ann.begin)
            .take(ann.end.saturating_sub(ann.begin))
            .collect()
    }
}

/// A hospital admission grouping one or more notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Admission {
    #[serde(deserialize_with = "string_or_int")]
    pub hadm_id: String,
    #[serde(default)]
    pub notes: Vec<Note>,
}

fn string_or_int<'de, D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<String, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        S(String),
        I(i64),
    }
    Ok(match Raw::deserialize(deserializer)? {
        Raw::S(s) => s,
        Raw::I(i) => i.to_string(),
    })
}

/// Annotation scheme a corpus was produced under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Only as much evidence as needed to justify each code.
    Sufficient,
    /// Every evidence occurrence in the document.
    Complete,
    Unspecified,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sufficient" => Ok(Scheme::Sufficient),
            "complete" => Ok(Scheme::Complete),
            "unspecified" => Ok(Scheme::Unspecified),
            other => Err(Error::InvalidInput(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Position of one annotation inside a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AnnotationRef {
    pub admission: usize,
    pub note: usize,
    pub annotation: usize,
}

/// Derived lookup maps. Rebuilding from the same admissions yields an
/// identical index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusIndex {
    /// Normalized code -> every annotation carrying it.
    pub by_code: BTreeMap<String, Vec<AnnotationRef>>,
    /// note_id -> (admission index, note index).
    pub by_note_id: BTreeMap<String, (usize, usize)>,
    /// category -> notes in that category.
    pub by_category: BTreeMap<String, Vec<(usize, usize)>>,
}

/// A parsed, validated corpus with its derived index.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub scheme: Scheme,
    pub admissions: Vec<Admission>,
    pub index: CorpusIndex,
}

/// Non-fatal issues found while validating a corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationWarning {
    pub note_id: String,
    pub message: String,
}

/// Codes are compared after stripping dots and uppercasing, so `I10`,
/// `i10`, and `I10.` all denote the same code.
pub fn normalize_code(code: &str) -> String {
    code.chars()
        .filter(|c| *c != '.')
        .collect::<String>()
        .to_ascii_uppercase()
}

impl Corpus {
    /// Build a corpus from already-parsed admissions, validating and
    /// indexing them.
    pub fn from_admissions(scheme: Scheme, admissions: Vec<Admission>) -> Result<Corpus> {
        let mut corpus = Corpus {
            scheme,
            admissions,
            index: CorpusIndex::default(),
        };
        corpus.validate_structure()?;
        corpus.index = corpus.build_index();
        Ok(corpus)
    }

    fn validate_structure(&self) -> Result<()> {
        let mut seen_hadm = BTreeSet::new();
        let mut seen_note = BTreeSet::new();
        for admission in &self.admissions {
            if !seen_hadm.insert(admission.hadm_id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate hadm_id '{}'",
                    admission.hadm_id
                )));
            }
            for note in &admission.notes {
                if !seen_note.insert(note.note_id.clone()) {
                    return Err(Error::Validation(format!(
                        "duplicate note_id '{}'",
                        note.note_id
                    )));
                }
                let len = note.char_len();
                for (i, ann) in note.annotations.iter().enumerate() {
                    if ann.begin >= ann.end {
                        return Err(Error::Validation(format!(
                            "note '{}' annotation {}: begin < end violated ({} >= {})",
                            note.note_id, i, ann.begin, ann.end
                        )));
                    }
                    if ann.end > len {
                        return Err(Error::Validation(format!(
                            "note '{}' annotation {}: offset out of bounds (end {} > text length {})",
                            note.note_id, i, ann.end, len
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Re-check all invariants, returning the non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<ValidationWarning>> {
        self.validate_structure()?;
        let mut warnings = Vec::new();
        for admission in &self.admissions {
            for note in &admission.notes {
                for (i, ann) in note.annotations.iter().enumerate() {
                    if matches!(&ann.description, Some(d) if d.is_empty()) {
                        warnings.push(ValidationWarning {
                            note_id: note.note_id.clone(),
                            message: format!("annotation {i}: empty description"),
                        });
                    }
                    if ann.code.is_empty() {
                        warnings.push(ValidationWarning {
                            note_id: note.note_id.clone(),
                            message: format!("annotation {i}: empty code"),
                        });
                    }
                }
            }
        }
        Ok(warnings)
    }

    fn build_index(&self) -> CorpusIndex {
        let mut index = CorpusIndex::default();
        for (a, admission) in self.admissions.iter().enumerate() {
            for (n, note) in admission.notes.iter().enumerate() {
                index.by_note_id.insert(note.note_id.clone(), (a, n));
                index
                    .by_category
                    .entry(note.category.clone())
                    .or_default()
                    .push((a, n));
                for (i, ann) in note.annotations.iter().enumerate() {
                    index
                        .by_code
                        .entry(normalize_code(&ann.code))
                        .or_default()
                        .push(AnnotationRef {
                            admission: a,
                            note: n,
                            annotation: i,
                        });
                }
            }
        }
        index
    }

    pub fn note(&self, r: (usize, usize)) -> &Note {
        &self.admissions[r.0].notes[r.1]
    }

    pub fn annotation(&self, r: AnnotationRef) -> &EvidenceAnnotation {
        &self.admissions[r.admission].notes[r.note].annotations[r.annotation]
    }

    /// Every (note, annotation) pair in admission order.
    pub fn annotations(&self) -> impl Iterator<Item = (&Note, &EvidenceAnnotation)> {
        self.admissions
            .iter()
            .flat_map(|a| a.notes.iter())
            .flat_map(|n| n.annotations.iter().map(move |ann| (n, ann)))
    }

    pub fn notes(&self) -> impl Iterator<Item = &Note> {
        self.admissions.iter().flat_map(|a| a.notes.iter())
    }

    pub fn span_count(&self) -> usize {
        self.notes().map(|n| n.annotations.len()).sum()
    }

    pub fn note_count(&self) -> usize {
        self.notes().count()
    }

    /// Serialize the admissions back to the input JSON schema.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(&self.admissions)
            .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))
    }
}

/// Key renames applied to input JSON before deserialization, so files with
/// different field labels load unchanged. Maps canonical field name ->
/// name used in the file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SchemaMap {
    #[serde(flatten)]
    pub renames: BTreeMap<String, String>,
}

impl SchemaMap {
    pub fn from_file(path: &Path) -> Result<SchemaMap> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::from_json(&e, &text))
    }

    fn is_identity(&self) -> bool {
        self.renames.iter().all(|(k, v)| k == v) || self.renames.is_empty()
    }

    /// Recursively rename keys from the file's names to the canonical ones.
    fn apply(&self, value: &mut serde_json::Value) {
        if self.is_identity() {
            return;
        }
        let reverse: BTreeMap<&str, &str> = self
            .renames
            .iter()
            .map(|(canonical, actual)| (actual.as_str(), canonical.as_str()))
            .collect();
        rename_keys(value, &reverse);
    }
}

fn rename_keys(value: &mut serde_json::Value, reverse: &BTreeMap<&str, &str>) {
    match value {
        serde_json::Value::Object(map) => {
            let keys: Vec<String> = map.keys().cloned().collect();
            for key in keys {
                let mut inner = map.remove(&key).expect("key just listed");
                rename_keys(&mut inner, reverse);
                let new_key = reverse.get(key.as_str()).map_or(key, |k| (*k).to_string());
                map.insert(new_key, inner);
            }
        }
        serde_json::Value::Array(items) => {
            for item in items {
                rename_keys(item, reverse);
            }
        }
        _ => {}
    }
}

/// Parse a corpus from JSON text, validating offsets and uniqueness and
/// building the index.
pub fn parse_corpus(json_text: &str, scheme: Scheme) -> Result<Corpus> {
    parse_corpus_mapped(json_text, scheme, &SchemaMap::default())
}

/// Like [`parse_corpus`] but renaming keys through a schema map first.
pub fn parse_corpus_mapped(json_text: &str, scheme: Scheme, map: &SchemaMap) -> Result<Corpus> {
    let admissions: Vec<Admission> = if map.is_identity() {
        serde_json::from_str(json_text).map_err(|e| Error::from_json(&e, json_text))?
    } else {
        let mut value: serde_json::Value =
            serde_json::from_str(json_text).map_err(|e| Error::from_json(&e, json_text))?;
        map.apply(&mut value);
        serde_json::from_value(value).map_err(|e| Error::from_json(&e, json_text))?
    };
    let admissions = admissions
        .into_iter()
        .map(|mut admission| {
            for note in &mut admission.notes {
                for ann in &mut note.annotations {
                    // Treat a provided-but-empty description as absent.
                    if matches!(&ann.description, Some(d) if d.is_empty()) {
                        ann.description = None;
                    }
                }
            }
            admission
        })
        .collect();
    Corpus::from_admissions(scheme, admissions)
}

/// Load and parse a corpus file.
pub fn load_corpus(path: &Path, scheme: Scheme, map: &SchemaMap) -> Result<Corpus> {
    let text = fs::read_to_string(path)?;
    parse_corpus_mapped(&text, scheme, map)
}

// ---------------------------------------------------------------------------
// Corpus statistics
// ---------------------------------------------------------------------------

/// Per-document-category span counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryStats {
    pub category: String,
    pub note_count: usize,
    pub span_count: usize,
    pub avg_spans_per_note: f64,
}

/// Corpus-level statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport {
    pub scheme: Scheme,
    pub admission_count: usize,
    pub note_count: usize,
    pub total_spans: usize,
    /// Mean number of annotations per note.
    pub avg_labels_per_doc: f64,
    /// Mean evidence span length in word-level tokens.
    pub avg_evidence_tokens: f64,
    /// Annotations whose span covered no token (whitespace-only).
    pub unalignable_spans: usize,
    pub per_category: Vec<CategoryStats>,
}

/// Compute span totals, per-category breakdowns, labels per document, and
/// average evidence length in tokens. An empty corpus yields zero counts.
pub fn corpus_stats(corpus: &Corpus) -> StatsReport {
    let mut per_category: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut total_spans = 0usize;
    let mut note_count = 0usize;
    let mut token_sum = 0usize;
    let mut aligned = 0usize;
    let mut unalignable = 0usize;

    for note in corpus.notes() {
        note_count += 1;
        let entry = per_category.entry(note.category.clone()).or_insert((0, 0));
        entry.0 += 1;
        entry.1 += note.annotations.len();
        total_spans += note.annotations.len();
        if note.annotations.is_empty() {
            continue;
        }
        let doc = textproc::tokenize(&note.text);
        for ann in &note.annotations {
            match textproc::align_span(&doc, ann.begin, ann.end) {
                Ok(span) => {
                    token_sum += span.len();
                    aligned += 1;
                }
                Err(_) => unalignable += 1,
            }
        }
    }

    StatsReport {
        scheme: corpus.scheme,
        admission_count: corpus.admissions.len(),
        note_count,
        total_spans,
        avg_labels_per_doc: ratio(total_spans, note_count),
        avg_evidence_tokens: ratio(token_sum, aligned),
        unalignable_spans: unalignable,
        per_category: per_category
            .into_iter()
            .map(|(category, (notes, spans))| CategoryStats {
                category,
                note_count: notes,
                span_count: spans,
                avg_spans_per_note: ratio(spans, notes),
            })
            .collect(),
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

// ---------------------------------------------------------------------------
// Cross-scheme subset analysis
// ---------------------------------------------------------------------------

/// How two spans are compared when testing the subset relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContainmentMode {
    /// A sufficient span counts when it lies within some complete span.
    Contain,
    /// A sufficient span counts only when a complete span equals it exactly.
    ExactEqual,
}

/// Whether a case is identified by (note_id, code) or by code string alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseIdentity {
    NoteAndCode,
    CodeOnly,
}

#[derive(Debug, Clone, Copy)]
pub struct SubsetOptions {
    pub containment: ContainmentMode,
    pub identity: CaseIdentity,
}

impl Default for SubsetOptions {
    fn default() -> Self {
        SubsetOptions {
            containment: ContainmentMode::Contain,
            identity: CaseIdentity::NoteAndCode,
        }
    }
}

/// Per-note detail of the subset comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetNoteRow {
    pub note_id: String,
    pub sufficient_cases: usize,
    pub complete_cases: usize,
    pub identical_cases: usize,
    pub subset_cases: usize,
}

/// Result of comparing a sufficient corpus against a complete one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubsetReport {
    /// Admissions sharing a hadm_id across the two corpora.
    pub common_admissions: usize,
    /// Distinct note ids appearing on either side within common admissions.
    pub unique_note_ids: usize,
    /// Note ids appearing on both sides.
    pub common_note_ids: usize,
    /// Cases present on exactly one side, over common notes.
    pub unique_code_cases: usize,
    /// Cases present on both sides, over common notes.
    pub identical_code_cases: usize,
    /// Identical cases where every sufficient span is contained in some
    /// complete span.
    pub strict_subset_cases: usize,
    pub per_note: Vec<SubsetNoteRow>,
}

type CaseSpans = BTreeMap<(String, String), Vec<(usize, usize)>>;

/// Collect (note_id, normalized code) -> merged span list for the notes
/// named in `note_ids`. Duplicate cases on one side collapse to one case
/// with the union of their spans.
fn collect_cases(corpus: &Corpus, note_ids: &BTreeSet<String>) -> CaseSpans {
    let mut cases: CaseSpans = BTreeMap::new();
    for note in corpus.notes() {
        if !note_ids.contains(&note.note_id) {
            continue;
        }
        for ann in &note.annotations {
            cases
                .entry((note.note_id.clone(), normalize_code(&ann.code)))
                .or_default()
                .push((ann.begin, ann.end));
        }
    }
    for spans in cases.values_mut() {
        spans.sort_unstable();
        spans.dedup();
    }
    cases
}

fn span_contained(inner: (usize, usize), outer: (usize, usize), mode: ContainmentMode) -> bool {
    match mode {
        ContainmentMode::Contain => outer.0 <= inner.0 && inner.1 <= outer.1,
        ContainmentMode::ExactEqual => inner == outer,
    }
}

/// Compare a sufficient-scheme corpus against a complete-scheme corpus:
/// shared admissions, shared notes, identical (note, code) cases, and the
/// cases whose sufficient evidence lies inside the complete evidence.
pub fn common_subset(sufficient: &Corpus, complete: &Corpus) -> SubsetReport {
    common_subset_with(sufficient, complete, SubsetOptions::default())
}

pub fn common_subset_with(
    sufficient: &Corpus,
    complete: &Corpus,
    options: SubsetOptions,
) -> SubsetReport {
    let hadm_a: BTreeSet<&str> = sufficient
        .admissions
        .iter()
        .map(|a| a.hadm_id.as_str())
        .collect();
    let hadm_b: BTreeSet<&str> = complete
        .admissions
        .iter()
        .map(|a| a.hadm_id.as_str())
        .collect();
    let common_hadm: BTreeSet<&str> = hadm_a.intersection(&hadm_b).copied().collect();

    let note_ids = |corpus: &Corpus| -> BTreeSet<String> {
        corpus
            .admissions
            .iter()
            .filter(|a| common_hadm.contains(a.hadm_id.as_str()))
            .flat_map(|a| a.notes.iter().map(|n| n.note_id.clone()))
            .collect()
    };
    let notes_a = note_ids(sufficient);
    let notes_b = note_ids(complete);
    let all_notes: BTreeSet<String> = notes_a.union(&notes_b).cloned().collect();
    let common_notes: BTreeSet<String> = notes_a.intersection(&notes_b).cloned().collect();

    let cases_a = collect_cases(sufficient, &common_notes);
    let cases_b = collect_cases(complete, &common_notes);

    let (unique_code_cases, identical_keys) = match options.identity {
        CaseIdentity::NoteAndCode => {
            let keys_a: BTreeSet<&(String, String)> = cases_a.keys().collect();
            let keys_b: BTreeSet<&(String, String)> = cases_b.keys().collect();
            let identical: Vec<(String, String)> = keys_a
                .intersection(&keys_b)
                .map(|k| (*k).clone())
                .collect();
            let unique = keys_a.symmetric_difference(&keys_b).count();
            (unique, identical)
        }
        CaseIdentity::CodeOnly => {
            let codes_a: BTreeSet<&str> = cases_a.keys().map(|(_, c)| c.as_str()).collect();
            let codes_b: BTreeSet<&str> = cases_b.keys().map(|(_, c)| c.as_str()).collect();
            let common_codes: BTreeSet<&str> =
                codes_a.intersection(&codes_b).copied().collect();
            let unique = codes_a.symmetric_difference(&codes_b).count();
            // Subset evaluation still proceeds per (note, code) case, over
            // cases whose code appears on both sides.
            let identical: Vec<(String, String)> = cases_a
                .keys()
                .filter(|(note, code)| {
                    common_codes.contains(code.as_str())
                        && cases_b.contains_key(&(note.clone(), code.clone()))
                })
                .cloned()
                .collect();
            (unique, identical)
        }
    };

    let mut subset_cases = 0usize;
    let mut per_note: BTreeMap<String, SubsetNoteRow> = common_notes
        .iter()
        .map(|id| {
            (
                id.clone(),
                SubsetNoteRow {
                    note_id: id.clone(),
                    sufficient_cases: 0,
                    complete_cases: 0,
                    identical_cases: 0,
                    subset_cases: 0,
                },
            )
        })
        .collect();
    for (note_id, _) in cases_a.keys() {
        if let Some(row) = per_note.get_mut(note_id) {
            row.sufficient_cases += 1;
        }
    }
    for (note_id, _) in cases_b.keys() {
        if let Some(row) = per_note.get_mut(note_id) {
            row.complete_cases += 1;
        }
    }
    for key in &identical_keys {
        let suff_spans = &cases_a[key];
        let comp_spans = &cases_b[key];
        let is_subset = suff_spans.iter().all(|s| {
            comp_spans
                .iter()
                .any(|c| span_contained(*s, *c, options.containment))
        });
        if let Some(row) = per_note.get_mut(&key.0) {
            row.identical_cases += 1;
            if is_subset {
                row.subset_cases += 1;
            }
        }
        if is_subset {
            subset_cases += 1;
        }
    }

    SubsetReport {
        common_admissions: common_hadm.len(),
        unique_note_ids: all_notes.len(),
        common_note_ids: common_notes.len(),
        unique_code_cases,
        identical_code_cases: identical_keys.len(),
        strict_subset_cases: subset_cases,
        per_note: per_note.into_values().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single_note_corpus(text: &str, anns: Vec<EvidenceAnnotation>) -> String {
        serde_json::json!([{
            "hadm_id": "1",
            "notes": [{
                "note_id": "n1",
                "category": "Discharge summary",
                "text": text,
                "annotations": anns.iter().map(|a| serde_json::json!({
                    "code": a.code,
                    "code_system": "ICD-10-CM",
                    "description": a.description,
                    "begin": a.begin,
                    "end": a.end,
                })).collect::<Vec<_>>(),
            }]
        }])
        .to_string()
    }

    fn ann(code: &str, begin: usize, end: usize) -> EvidenceAnnotation {
        EvidenceAnnotation {
            code: code.to_string(),
            code_system: CodeSystem::Icd10Cm,
            description: Some("desc".to_string()),
            begin,
            end,
        }
    }

    #[test]
    fn parse_minimal_corpus() {
        let json = single_note_corpus("hypertension.", vec![ann("I10", 0, 12)]);
        let corpus = parse_corpus(&json, Scheme::Sufficient).unwrap();
        assert_eq!(corpus.admissions.len(), 1);
        assert_eq!(corpus.span_count(), 1);
        let note = corpus.note((0, 0));
        assert_eq!(note.covered_text(&note.annotations[0]), "hypertension");
    }

    #[test]
    fn parse_rejects_inverted_span() {
        let json = single_note_corpus("hypertension.", vec![ann("I10", 5, 3)]);
        let err = parse_corpus(&json, Scheme::Sufficient).unwrap_err();
        assert!(err.to_string().contains("begin < end violated"), "{err}");
    }

    #[test]
    fn parse_rejects_out_of_bounds_span() {
        let json = single_note_corpus("short", vec![ann("I10", 0, 99)]);
        let err = parse_corpus(&json, Scheme::Sufficient).unwrap_err();
        assert!(err.to_string().contains("out of bounds"), "{err}");
        assert!(err.to_string().contains("n1"), "{err}");
    }

    #[test]
    fn parse_rejects_duplicate_note_id() {
        let json = serde_json::json!([
            {"hadm_id": "1", "notes": [{"note_id": "n1", "category": "x", "text": "a", "annotations": []}]},
            {"hadm_id": "2", "notes": [{"note_id": "n1", "category": "x", "text": "b", "annotations": []}]}
        ])
        .to_string();
        let err = parse_corpus(&json, Scheme::Unspecified).unwrap_err();
        assert!(err.to_string().contains("duplicate note_id"), "{err}");
    }

    #[test]
    fn parse_reports_json_position() {
        let err = parse_corpus("[{\"hadm_id\": }]", Scheme::Unspecified).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn numeric_ids_coerce_to_strings() {
        let json = serde_json::json!([{
            "hadm_id": 42,
            "notes": [{"note_id": 7, "category": "x", "text": "a", "annotations": []}]
        }])
        .to_string();
        let corpus = parse_corpus(&json, Scheme::Unspecified).unwrap();
        assert_eq!(corpus.admissions[0].hadm_id, "42");
        assert_eq!(corpus.admissions[0].notes[0].note_id, "7");
    }

    #[test]
    fn schema_map_renames_keys() {
        let json = serde_json::json!([{
            "admission_id": "1",
            "documents": [{
                "doc_id": "n1",
                "doc_type": "Discharge summary",
                "body": "hypertension.",
                "spans": [{"code": "I10", "code_system": "ICD-10-CM", "begin": 0, "end": 12}]
            }]
        }])
        .to_string();
        let mut map = SchemaMap::default();
        for (canonical, actual) in [
            ("hadm_id", "admission_id"),
            ("notes", "documents"),
            ("note_id", "doc_id"),
            ("category", "doc_type"),
            ("text", "body"),
            ("annotations", "spans"),
        ] {
            map.renames.insert(canonical.to_string(), actual.to_string());
        }
        let corpus = parse_corpus_mapped(&json, Scheme::Sufficient, &map).unwrap();
        assert_eq!(corpus.span_count(), 1);
        assert_eq!(corpus.note((0, 0)).category, "Discharge summary");
    }

    #[test]
    fn round_trip_preserves_structure() {
        let json = single_note_corpus("hypertension, stable.", vec![ann("I10", 0, 12)]);
        let corpus = parse_corpus(&json, Scheme::Sufficient).unwrap();
        let serialized = corpus.to_json().unwrap();
        let reparsed = parse_corpus(&serialized, Scheme::Sufficient).unwrap();
        assert_eq!(corpus, reparsed);
    }

    #[test]
    fn code_normalization() {
        assert_eq!(normalize_code("i10"), "I10");
        assert_eq!(normalize_code("I10."), "I10");
        assert_eq!(normalize_code("Z87.891"), "Z87891");
    }

    #[test]
    fn stats_counts_labels_per_doc() {
        let json = single_note_corpus(
            "hypertension and snoring",
            vec![ann("I10", 0, 12), ann("R06.83", 17, 24)],
        );
        let corpus = parse_corpus(&json, Scheme::Sufficient).unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.total_spans, 2);
        assert_eq!(stats.avg_labels_per_doc, 2.0);
        assert_eq!(stats.avg_evidence_tokens, 1.0);
        assert_eq!(stats.unalignable_spans, 0);
    }

    #[test]
    fn stats_empty_corpus_is_zero() {
        let corpus = Corpus::from_admissions(Scheme::Unspecified, Vec::new()).unwrap();
        let stats = corpus_stats(&corpus);
        assert_eq!(stats.total_spans, 0);
        assert_eq!(stats.avg_labels_per_doc, 0.0);
        assert_eq!(stats.avg_evidence_tokens, 0.0);
    }

    #[test]
    fn stats_totals_match_per_category_sum() {
        let json = serde_json::json!([{
            "hadm_id": "1",
            "notes": [
                {"note_id": "n1", "category": "Discharge summary", "text": "hypertension here",
                 "annotations": [{"code": "I10", "code_system": "ICD-10-CM", "begin": 0, "end": 12}]},
                {"note_id": "n2", "category": "Physician", "text": "snoring noted",
                 "annotations": [{"code": "R06.83", "code_system": "ICD-10-CM", "begin": 0, "end": 7}]}
            ]
        }])
        .to_string();
        let corpus = parse_corpus(&json, Scheme::Sufficient).unwrap();
        let stats = corpus_stats(&corpus);
        let sum: usize = stats.per_category.iter().map(|c| c.span_count).sum();
        assert_eq!(stats.total_spans, sum);
        assert_eq!(stats.per_category.len(), 2);
    }

    fn two_scheme_fixture() -> (Corpus, Corpus) {
        // Sufficient side: one admission, notes n1 (code I10 at (0,12)) and n9.
        let suff = serde_json::json!([
            {"hadm_id": "h1", "notes": [
                {"note_id": "n1", "category": "x", "text": "hypertension noted, hypertension again",
                 "annotations": [{"code": "I10", "code_system": "ICD-10-CM", "begin": 0, "end": 12}]},
                {"note_id": "n9", "category": "x", "text": "only here", "annotations": []}
            ]},
            {"hadm_id": "h2", "notes": [
                {"note_id": "n5", "category": "x", "text": "unshared admission", "annotations": []}
            ]}
        ])
        .to_string();
        // Complete side: same admission h1, note n1 with a containing span
        // plus a second code; note n8 unique to this side.
        let comp = serde_json::json!([
            {"hadm_id": "h1", "notes": [
                {"note_id": "n1", "category": "x", "text": "hypertension noted, hypertension again",
                 "annotations": [
                    {"code": "I10", "code_system": "ICD-10-CM", "begin": 0, "end": 18},
                    {"code": "I10", "code_system": "ICD-10-CM", "begin": 20, "end": 32},
                    {"code": "E66.9", "code_system": "ICD-10-CM", "begin": 13, "end": 18}
                 ]},
                {"note_id": "n8", "category": "x", "text": "only complete", "annotations": []}
            ]}
        ])
        .to_string();
        (
            parse_corpus(&suff, Scheme::Sufficient).unwrap(),
            parse_corpus(&comp, Scheme::Complete).unwrap(),
        )
    }

    #[test]
    fn subset_counts_common_structures() {
        let (suff, comp) = two_scheme_fixture();
        let report = common_subset(&suff, &comp);
        assert_eq!(report.common_admissions, 1);
        // n1 shared; n9 and n8 on one side each.
        assert_eq!(report.unique_note_ids, 3);
        assert_eq!(report.common_note_ids, 1);
        // (n1, I10) identical; (n1, E669) only on the complete side.
        assert_eq!(report.identical_code_cases, 1);
        assert_eq!(report.unique_code_cases, 1);
        // the sufficient span (0,12) is inside the complete span (0,18)
        assert_eq!(report.strict_subset_cases, 1);
    }

    #[test]
    fn subset_symmetric_counts_survive_swap() {
        let (suff, comp) = two_scheme_fixture();
        let forward = common_subset(&suff, &comp);
        let backward = common_subset(&comp, &suff);
        assert_eq!(forward.common_admissions, backward.common_admissions);
        assert_eq!(forward.common_note_ids, backward.common_note_ids);
        assert_eq!(forward.unique_note_ids, backward.unique_note_ids);
    }

    #[test]
    fn subset_identical_corpora_all_subset() {
        let (suff, _) = two_scheme_fixture();
        let report = common_subset(&suff, &suff);
        assert_eq!(report.identical_code_cases, report.strict_subset_cases);
        assert_eq!(report.unique_code_cases, 0);
    }

    #[test]
    fn subset_disjoint_spans_not_counted() {
        // Sufficient span (5,10); complete spans {(0,4), (20,30)} for the
        // same case: containment fails for every pair.
        let suff = serde_json::json!([{"hadm_id": "h1", "notes": [
            {"note_id": "n1", "category": "x", "text": "abcdefghijklmnopqrstuvwxyz-abcdef",
             "annotations": [{"code": "A00", "code_system": "ICD-10-CM", "begin": 5, "end": 10}]}
        ]}])
        .to_string();
        let comp = serde_json::json!([{"hadm_id": "h1", "notes": [
            {"note_id": "n1", "category": "x", "text": "abcdefghijklmnopqrstuvwxyz-abcdef",
             "annotations": [
                {"code": "A00", "code_system": "ICD-10-CM", "begin": 0, "end": 4},
                {"code": "A00", "code_system": "ICD-10-CM", "begin": 20, "end": 30}
             ]}
        ]}])
        .to_string();
        let suff = parse_corpus(&suff, Scheme::Sufficient).unwrap();
        let comp = parse_corpus(&comp, Scheme::Complete).unwrap();
        let report = common_subset(&suff, &comp);
        assert_eq!(report.identical_code_cases, 1);
        assert_eq!(report.strict_subset_cases, 0);
    }

    #[test]
    fn subset_zero_common_admissions_is_not_an_error() {
        let a = parse_corpus(
            &serde_json::json!([{"hadm_id": "h1", "notes": []}]).to_string(),
            Scheme::Sufficient,
        )
        .unwrap();
        let b = parse_corpus(
            &serde_json::json!([{"hadm_id": "h2", "notes": []}]).to_string(),
            Scheme::Complete,
        )
        .unwrap();
        let report = common_subset(&a, &b);
        assert_eq!(report.common_admissions, 0);
        assert_eq!(report.common_note_ids, 0);
        assert_eq!(report.identical_code_cases, 0);
    }

    #[test]
    fn exact_equality_mode_is_stricter() {
        let (suff, comp) = two_scheme_fixture();
        let report = common_subset_with(
            &suff,
            &comp,
            SubsetOptions {
                containment: ContainmentMode::ExactEqual,
                identity: CaseIdentity::NoteAndCode,
            },
        );
        // (0,12) != (0,18), so exact mode rejects the case
        assert_eq!(report.strict_subset_cases, 0);
    }

    proptest! {
        #[test]
        fn index_is_coherent(codes in proptest::collection::vec("[A-Z][0-9]{2}", 1..8)) {
            let text = "x".repeat(64);
            let annotations: Vec<serde_json::Value> = codes.iter().enumerate().map(|(i, code)| {
                serde_json::json!({"code": code, "code_system": "ICD-10-CM", "begin": i, "end": i + 1})
            }).collect();
            let json = serde_json::json!([{
                "hadm_id": "1",
                "notes": [{"note_id": "n1", "category": "x", "text": text, "annotations": annotations}]
            }]).to_string();
            let corpus = parse_corpus(&json, Scheme::Unspecified).unwrap();

            // every annotation reachable via index[code] carries that code
            let mut via_index = 0usize;
            for (code, refs) in &corpus.index.by_code {
                for r in refs {
                    prop_assert_eq!(&normalize_code(&corpus.annotation(*r).code), code);
                    via_index += 1;
                }
            }
            // union over codes equals the full annotation multiset
            prop_assert_eq!(via_index, corpus.span_count());

            // rebuilding yields an identical index
            let rebuilt = Corpus::from_admissions(corpus.scheme, corpus.admissions.clone()).unwrap();
            prop_assert_eq!(rebuilt.index, corpus.index);
        }
    }
}

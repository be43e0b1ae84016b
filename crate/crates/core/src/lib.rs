//! Span-evidence corpus analysis and plausibility evaluation for medical
//! coding.
//!
//! The crate has two halves. The first ingests corpora of clinical notes
//! whose ICD codes carry character-offset evidence spans and computes
//! dataset-level statistics: where evidence sits in a document, how much it
//! overlaps the code descriptions, how diverse it is per code, and how two
//! annotation schemes (sufficient vs. complete) relate. The second evaluates
//! model-produced evidence against the human annotations: fusing attention
//! and gradient attributions into per-token scores, calibrating an extraction
//! threshold, classifying each case into a five-way match taxonomy, and
//! comparing models by agreement, output probability, and evidence length.
//!
//! Entry points:
//! - [`corpus::parse_corpus`] and [`corpus::common_subset`]
//! - [`textproc::tokenize`], [`textproc::align_span`], [`textproc::normalize_terms`]
//! - [`analysis`] for position, overlap, diversity, and duplicate reports
//! - [`attribution::attingrad`], [`attribution::calibrate_threshold`],
//!   [`attribution::extract_evidence`]
//! - [`matching::classify_match`] and [`matching::token_prf`]
//! - [`compare`] for cross-model aggregations
//! - [`synth`] for deterministic synthetic corpora, attributions, and the
//!   brute-force match oracle

pub mod analysis;
pub mod attribution;
pub mod compare;
pub mod corpus;
pub mod error;
pub mod matching;
pub mod report;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};

//! Easy-Read sentence segmentation.
//!
//! Sentences are split into display lines at natural linguistic boundaries.
//! A gap scorer assigns one score per word gap (higher means a better place
//! to break) and a windowed beam search picks the break pattern with the
//! best mean segment score. Two scorers ship with the crate: constituency
//! tree distance ([`tree`]) and externally computed scores, read either from
//! a file or from a sidecar process speaking a line-delimited JSON protocol
//! ([`scorer`]).
//!
//! The [`corpus`] module reads marker-format corpora and computes their
//! statistics, and [`metrics`] implements break F1, BLEU with and without
//! break tokens, and Sigma.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod scorer;
pub mod segmenter;
pub mod text;
pub mod tree;

pub use crate::error::{Error, Result};
pub use crate::segmenter::{
    beam_search_segment, get_segmentation_candidates, segment_corpus, Candidate,
    CorpusSegmentation, GapScores, SegmentationConfig, SegmentationPath, EXCLUDED_GAP,
};
pub use crate::text::{SegmentedText, Sentence, DEFAULT_MARKER};

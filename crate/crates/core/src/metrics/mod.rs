//! Evaluation metrics for segmentation hypotheses.
//!
//! Hypotheses and references are paired by index. Break F1 and the Sigma
//! upper bound both align hypothesis and reference words by LCS, so they
//! stay defined when a hypothesis rewrites its input.

pub mod align;
pub mod bleu;
pub mod breaks;
pub mod validate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::SegmentedText;

pub use self::align::{lcs_align, Alignment};
pub use self::bleu::{bleu_tokens, corpus_bleu, sentence_bleu, BleuStats};
pub use self::breaks::{break_f1, project_reference_breaks, sigma, BreakScores, SigmaScores};
pub use self::validate::{
    validate_corpus, validate_hypothesis, AlterationReport, DiffOp, ValidationSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceDiagnostics {
    pub index: usize,
    pub hyp_breaks: usize,
    pub ref_breaks: usize,
    pub matched_breaks: usize,
    pub text_preserved: bool,
    pub bleu_nb: f64,
}

/// Share of segments falling outside a `[min, max]` word window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    pub min_words: usize,
    pub max_words: usize,
    pub segments: usize,
    pub under_min: usize,
    pub over_max: usize,
    pub under_min_pct: f64,
    pub over_max_pct: f64,
}

impl WindowDiagnostics {
    /// Segments of break-bearing sentences only; unsegmented sentences say
    /// nothing about where lines were split.
    pub fn compute(texts: &[SegmentedText], min_words: usize, max_words: usize) -> Self {
        let lengths: Vec<usize> = texts
            .iter()
            .filter(|t| t.has_breaks())
            .flat_map(|t| t.segment_lengths())
            .collect();
        let under_min = lengths.iter().filter(|&&l| l < min_words).count();
        let over_max = lengths.iter().filter(|&&l| l > max_words).count();
        let pct = |k: usize| {
            if lengths.is_empty() {
                0.0
            } else {
                100.0 * k as f64 / lengths.len() as f64
            }
        };
        WindowDiagnostics {
            min_words,
            max_words,
            segments: lengths.len(),
            under_min,
            over_max,
            under_min_pct: pct(under_min),
            over_max_pct: pct(over_max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub sentences: usize,
    /// `None` when the upper-bound BLEU is 0; see `sigma_error`.
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_error: Option<String>,
    pub bleu_upper: f64,
    pub bleu_br: f64,
    pub bleu_nb: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub text_preserved_pct: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_window: Option<WindowDiagnostics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis_window: Option<WindowDiagnostics>,
    pub per_sentence: Vec<SentenceDiagnostics>,
}

/// Compute every metric for a paired corpus. `window` adds under/over-window
/// segment diagnostics for both sides.
pub fn evaluate(
    hyps: &[SegmentedText],
    refs: &[SegmentedText],
    window: Option<(usize, usize)>,
) -> Result<EvalReport> {
    if hyps.is_empty() {
        return Err(Error::Metric("empty corpus".into()));
    }
    if hyps.len() != refs.len() {
        return Err(Error::Metric(format!(
            "{} hypotheses for {} references",
            hyps.len(),
            refs.len()
        )));
    }
    let f1 = break_f1(hyps, refs)?;
    let bleu_nb = corpus_bleu(hyps, refs, false)?;
    let (sigma_value, sigma_error, bleu_br, bleu_upper) = match sigma(hyps, refs) {
        Ok(s) => (Some(s.sigma), None, s.bleu_br, s.bleu_upper),
        Err(Error::Metric(m)) => (None, Some(m), corpus_bleu(hyps, refs, true)?, 0.0),
        Err(e) => return Err(e),
    };
    let per_sentence: Vec<SentenceDiagnostics> = hyps
        .iter()
        .zip(refs)
        .enumerate()
        .map(|(index, (h, r))| {
            let preserved = h.words == r.words;
            let single =
                break_f1(std::slice::from_ref(h), std::slice::from_ref(r)).expect("paired slices");
            SentenceDiagnostics {
                index,
                hyp_breaks: h.break_count(),
                ref_breaks: r.break_count(),
                matched_breaks: single.matched,
                text_preserved: preserved,
                bleu_nb: if preserved {
                    100.0
                } else {
                    sentence_bleu(&h.words, &r.words)
                },
            }
        })
        .collect();
    let preserved = per_sentence.iter().filter(|d| d.text_preserved).count();
    Ok(EvalReport {
        sentences: hyps.len(),
        sigma: sigma_value,
        sigma_error,
        bleu_upper,
        bleu_br,
        bleu_nb,
        precision: f1.precision,
        recall: f1.recall,
        f1: f1.f1,
        text_preserved_pct: 100.0 * preserved as f64 / hyps.len() as f64,
        reference_window: window.map(|(lo, hi)| WindowDiagnostics::compute(refs, lo, hi)),
        hypothesis_window: window.map(|(lo, hi)| WindowDiagnostics::compute(hyps, lo, hi)),
        per_sentence,
    })
}

//! Break-position F1 and the Sigma upper bound, both defined through the
//! LCS alignment of break-free words.

use std::collections::BTreeSet;

use super::align::{lcs_align, Alignment};
use super::bleu::corpus_bleu;
use crate::error::{Error, Result};
use crate::text::SegmentedText;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BreakScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub matched: usize,
    pub hyp_breaks: usize,
    pub ref_breaks: usize,
}

impl BreakScores {
    pub fn from_counts(matched: usize, hyp_breaks: usize, ref_breaks: usize) -> Self {
        let (precision, recall, f1) = match (hyp_breaks, ref_breaks) {
            (0, 0) => (100.0, 100.0, 100.0),
            (0, _) | (_, 0) => (0.0, 0.0, 0.0),
            (h, r) => {
                let p = matched as f64 / h as f64;
                let r = matched as f64 / r as f64;
                let f = if matched == 0 {
                    0.0
                } else {
                    2.0 * p * r / (p + r)
                };
                (100.0 * p, 100.0 * r, 100.0 * f)
            }
        };
        BreakScores {
            precision,
            recall,
            f1,
            matched,
            hyp_breaks,
            ref_breaks,
        }
    }
}

/// Hypothesis breaks whose flanking words align to the flanking words of a
/// reference break.
pub fn matched_breaks(
    hyp: &SegmentedText,
    reference: &SegmentedText,
    alignment: &Alignment,
) -> usize {
    hyp.break_gaps
        .iter()
        .filter(
            |&&g| match (alignment.left_to_right[g], alignment.left_to_right[g + 1]) {
                (Some(a), Some(b)) => b == a + 1 && reference.break_gaps.contains(&a),
                _ => false,
            },
        )
        .count()
}

fn check_paired(hyps: &[SegmentedText], refs: &[SegmentedText]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(Error::Metric(format!(
            "{} hypotheses for {} references",
            hyps.len(),
            refs.len()
        )));
    }
    Ok(())
}

/// Corpus-level (micro-averaged) break precision, recall and F1.
pub fn break_f1(hyps: &[SegmentedText], refs: &[SegmentedText]) -> Result<BreakScores> {
    check_paired(hyps, refs)?;
    let (mut matched, mut h, mut r) = (0, 0, 0);
    for (hyp, reference) in hyps.iter().zip(refs) {
        matched += if hyp.words == reference.words {
            hyp.break_gaps.intersection(&reference.break_gaps).count()
        } else {
            matched_breaks(hyp, reference, &lcs_align(&hyp.words, &reference.words))
        };
        h += hyp.break_count();
        r += reference.break_count();
    }
    Ok(BreakScores::from_counts(matched, h, r))
}

/// The hypothesis words with the reference breaks projected onto them.
///
/// A reference break after word `a` lands after the hypothesis word aligned
/// to `a`; failing that, before the hypothesis word aligned to `a + 1`.
/// Breaks with neither flank aligned, or that would fall at either end of
/// the hypothesis, are dropped.
pub fn project_reference_breaks(hyp: &SegmentedText, reference: &SegmentedText) -> SegmentedText {
    if hyp.words == reference.words {
        return SegmentedText {
            words: hyp.words.clone(),
            break_gaps: reference.break_gaps.clone(),
        };
    }
    let alignment = lcs_align(&reference.words, &hyp.words);
    let n = hyp.words.len();
    let mut gaps = BTreeSet::new();
    for &a in &reference.break_gaps {
        let left = alignment.left_to_right[a].filter(|&h| h + 1 < n);
        let right = alignment.left_to_right[a + 1]
            .filter(|&h| h >= 1)
            .map(|h| h - 1);
        if let Some(g) = left.or(right) {
            gaps.insert(g);
        }
    }
    SegmentedText {
        words: hyp.words.clone(),
        break_gaps: gaps,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaScores {
    pub sigma: f64,
    pub bleu_br: f64,
    pub bleu_upper: f64,
}

/// Sigma: BLEU with breaks relative to the BLEU of the same hypothesis text
/// with reference-projected breaks.
pub fn sigma(hyps: &[SegmentedText], refs: &[SegmentedText]) -> Result<SigmaScores> {
    check_paired(hyps, refs)?;
    let bleu_br = corpus_bleu(hyps, refs, true)?;
    let oracle: Vec<SegmentedText> = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| project_reference_breaks(h, r))
        .collect();
    let bleu_upper = corpus_bleu(&oracle, refs, true)?;
    if bleu_upper == 0.0 {
        return Err(Error::Metric(
            "upper-bound BLEU is 0; Sigma is undefined".into(),
        ));
    }
    Ok(SigmaScores {
        sigma: 100.0 * bleu_br / bleu_upper,
        bleu_br,
        bleu_upper,
    })
}

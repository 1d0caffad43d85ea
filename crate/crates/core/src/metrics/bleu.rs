//! Corpus BLEU: clipped n-gram precisions for n = 1..4, geometric mean,
//! brevity penalty, no smoothing.
//!
//! Orders for which the hypotheses contain no n-grams at all (every
//! hypothesis shorter than n) are left out of the geometric mean. Any order
//! with n-grams but no matches makes the score 0.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::text::{SegmentedText, DEFAULT_MARKER};

pub const MAX_ORDER: usize = 4;

/// Sufficient statistics; corpus BLEU is a fold over sentence pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BleuStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts<S: AsRef<str>>(tokens: &[S], n: usize) -> HashMap<Vec<&str>, usize> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            let key: Vec<&str> = window.iter().map(AsRef::as_ref).collect();
            *counts.entry(key).or_insert(0) += 1;
        }
    }
    counts
}

impl BleuStats {
    pub fn from_pair<H: AsRef<str>, R: AsRef<str>>(hyp: &[H], reference: &[R]) -> Self {
        let mut stats = BleuStats {
            hyp_len: hyp.len(),
            ref_len: reference.len(),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            let h = ngram_counts(hyp, n);
            let r = ngram_counts(reference, n);
            stats.totals[n - 1] = hyp.len().saturating_sub(n - 1);
            stats.matches[n - 1] = h
                .iter()
                .map(|(gram, &c)| c.min(r.get(gram).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn merge(mut self, other: &BleuStats) -> Self {
        for k in 0..MAX_ORDER {
            self.matches[k] += other.matches[k];
            self.totals[k] += other.totals[k];
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self
    }

    /// BLEU in points (0..=100).
    pub fn score(&self) -> f64 {
        if self.hyp_len == 0 {
            return 0.0;
        }
        let mut log_sum = 0.0;
        let mut orders = 0;
        for k in 0..MAX_ORDER {
            if self.totals[k] == 0 {
                continue;
            }
            if self.matches[k] == 0 {
                return 0.0;
            }
            log_sum += (self.matches[k] as f64 / self.totals[k] as f64).ln();
            orders += 1;
        }
        let ratio = self.ref_len as f64 / self.hyp_len as f64;
        let log_bp = (1.0 - ratio).min(0.0);
        100.0 * (log_bp + log_sum / orders as f64).exp()
    }
}

/// Corpus BLEU over paired token sequences.
pub fn bleu_tokens<H: AsRef<str>, R: AsRef<str>>(hyps: &[Vec<H>], refs: &[Vec<R>]) -> Result<f64> {
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
    let stats = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| BleuStats::from_pair(h, r))
        .fold(BleuStats::default(), |acc, s| acc.merge(&s));
    Ok(stats.score())
}

/// Corpus BLEU on segmented text, with break markers as ordinary tokens or
/// stripped.
pub fn corpus_bleu(
    hyps: &[SegmentedText],
    refs: &[SegmentedText],
    include_breaks: bool,
) -> Result<f64> {
    let tokens = |t: &SegmentedText| {
        if include_breaks {
            t.tokens_with_breaks(DEFAULT_MARKER)
        } else {
            t.words.clone()
        }
    };
    let h: Vec<Vec<String>> = hyps.iter().map(tokens).collect();
    let r: Vec<Vec<String>> = refs.iter().map(tokens).collect();
    bleu_tokens(&h, &r)
}

/// BLEU of a single pair.
pub fn sentence_bleu<H: AsRef<str>, R: AsRef<str>>(hyp: &[H], reference: &[R]) -> f64 {
    BleuStats::from_pair(hyp, reference).score()
}

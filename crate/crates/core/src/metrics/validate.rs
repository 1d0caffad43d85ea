//! Text-alteration audit for hypotheses that may rewrite their input.

use serde::{Deserialize, Serialize};

use super::align::lcs_align;
use super::bleu::sentence_bleu;
use crate::error::{Error, Result};
use crate::text::{SegmentedText, Sentence};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum DiffOp {
    /// Source word missing from the hypothesis.
    Delete { position: usize, word: String },
    /// Hypothesis word absent from the source.
    Insert { position: usize, word: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlterationReport {
    pub preserved: bool,
    pub bleu_nb: f64,
    pub diff: Vec<DiffOp>,
}

pub fn validate_hypothesis(hyp: &SegmentedText, src: &Sentence) -> AlterationReport {
    if hyp.words == src.tokens {
        return AlterationReport {
            preserved: true,
            bleu_nb: 100.0,
            diff: Vec::new(),
        };
    }
    let alignment = lcs_align(&src.tokens, &hyp.words);
    let mut diff = Vec::new();
    let (mut i, mut j) = (0, 0);
    let pairs = alignment
        .pairs
        .iter()
        .copied()
        .chain([(src.len(), hyp.words.len())]);
    for (a, b) in pairs {
        diff.extend((i..a).map(|p| DiffOp::Delete {
            position: p,
            word: src.tokens[p].clone(),
        }));
        diff.extend((j..b).map(|p| DiffOp::Insert {
            position: p,
            word: hyp.words[p].clone(),
        }));
        i = a + 1;
        j = b + 1;
    }
    AlterationReport {
        preserved: false,
        bleu_nb: sentence_bleu(&hyp.words, &src.tokens),
        diff,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationSummary {
    pub sentences: usize,
    pub preserved: usize,
    pub preserved_pct: f64,
    /// Corpus BLEU of break-free hypotheses against the sources.
    pub bleu_nb: f64,
    pub reports: Vec<AlterationReport>,
}

pub fn validate_corpus(hyps: &[SegmentedText], srcs: &[Sentence]) -> Result<ValidationSummary> {
    if hyps.len() != srcs.len() {
        return Err(Error::Metric(format!(
            "{} hypotheses for {} sources",
            hyps.len(),
            srcs.len()
        )));
    }
    let reports: Vec<AlterationReport> = hyps
        .iter()
        .zip(srcs)
        .map(|(h, s)| validate_hypothesis(h, s))
        .collect();
    let h: Vec<Vec<String>> = hyps.iter().map(|h| h.words.clone()).collect();
    let s: Vec<Vec<String>> = srcs.iter().map(|s| s.tokens.clone()).collect();
    let bleu_nb = super::bleu::bleu_tokens(&h, &s)?;
    let preserved = reports.iter().filter(|r| r.preserved).count();
    Ok(ValidationSummary {
        sentences: reports.len(),
        preserved,
        preserved_pct: 100.0 * preserved as f64 / reports.len() as f64,
        bleu_nb,
        reports,
    })
}

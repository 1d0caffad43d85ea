//! Marker-format Easy-Read corpora: one sentence per line, line breaks
//! encoded as a marker token (`<seg>` by default) between words.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
#[cfg(test)]
use crate::text::DEFAULT_MARKER;
use crate::text::{SegmentedText, Sentence};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub text: SegmentedText,
    /// Source document or file the entry came from.
    pub source: String,
    /// 1-based line in the source file.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErCorpus {
    pub entries: Vec<CorpusEntry>,
    pub language: Option<String>,
}

impl ErCorpus {
    pub fn from_texts(texts: Vec<SegmentedText>, source: &str) -> Self {
        ErCorpus {
            entries: texts
                .into_iter()
                .enumerate()
                .map(|(i, text)| CorpusEntry {
                    text,
                    source: source.to_owned(),
                    line: i + 1,
                })
                .collect(),
            language: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn texts(&self) -> Vec<SegmentedText> {
        self.entries.iter().map(|e| e.text.clone()).collect()
    }

    /// Break-free sentences, as fed to a segmenter.
    pub fn sentences(&self) -> Vec<Sentence> {
        self.entries.iter().map(|e| e.text.to_sentence()).collect()
    }

    pub fn to_string_with(&self, marker: &str) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&e.text.to_line(marker));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: impl AsRef<Path>, marker: &str) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(self.to_string_with(marker).as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    fn subset(&self, keep: impl Fn(&CorpusEntry) -> bool) -> ErCorpus {
        ErCorpus {
            entries: self.entries.iter().filter(|e| keep(e)).cloned().collect(),
            language: self.language.clone(),
        }
    }
}

pub fn parse_corpus(text: &str, marker: &str, source: &str) -> Result<ErCorpus> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let parsed = SegmentedText::parse(line, marker).map_err(|e| match e {
            Error::Format { message, .. } => Error::Format {
                line: i + 1,
                message,
            },
            other => other,
        })?;
        entries.push(CorpusEntry {
            text: parsed,
            source: source.to_owned(),
            line: i + 1,
        });
    }
    Ok(ErCorpus {
        entries,
        language: None,
    })
}

pub fn load_corpus(path: impl AsRef<Path>, marker: &str) -> Result<ErCorpus> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, marker, &path.display().to_string()).map_err(|e| match e {
        Error::Format { line, message } => Error::Format {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    })
}

/// Corpus statistics. Fields over an empty subpopulation are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub n_sentences: usize,
    pub n_breaks: usize,
    /// Percentage of sentences containing at least one break.
    pub pct_with_breaks: f64,
    /// Breaks per 100 sentences.
    pub breaks_per_100_sentences: f64,
    pub n_unsegmented: usize,
    pub avg_len_unsegmented: Option<f64>,
    pub n_segmented: usize,
    pub avg_breaks_segmented: Option<f64>,
    pub avg_sent_len_segmented: Option<f64>,
    pub avg_seg_len: Option<f64>,
}

fn mean(values: impl Iterator<Item = usize>) -> Option<f64> {
    let (sum, n) = values.fold((0usize, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64)
}

pub fn compute_stats(corpus: &ErCorpus) -> Result<CorpusStats> {
    if corpus.is_empty() {
        return Err(Error::EmptyInput);
    }
    let texts = || corpus.entries.iter().map(|e| &e.text);
    let segmented = || texts().filter(|t| t.has_breaks());
    let unsegmented = || texts().filter(|t| !t.has_breaks());
    let n = corpus.len();
    let n_breaks: usize = texts().map(SegmentedText::break_count).sum();
    let n_segmented = segmented().count();
    Ok(CorpusStats {
        n_sentences: n,
        n_breaks,
        pct_with_breaks: 100.0 * n_segmented as f64 / n as f64,
        breaks_per_100_sentences: 100.0 * n_breaks as f64 / n as f64,
        n_unsegmented: n - n_segmented,
        avg_len_unsegmented: mean(unsegmented().map(SegmentedText::word_count)),
        n_segmented,
        avg_breaks_segmented: mean(segmented().map(SegmentedText::break_count)),
        avg_sent_len_segmented: mean(segmented().map(SegmentedText::word_count)),
        avg_seg_len: mean(segmented().flat_map(|t| t.segment_lengths())),
    })
}

/// Entries with at least one break, in order.
pub fn filter_segmented(corpus: &ErCorpus) -> ErCorpus {
    corpus.subset(|e| e.text.has_breaks())
}

/// True when a word other than the last ends a sentence (`.`, `!` or `?`,
/// optionally followed by closing quotes or brackets) and the next word
/// starts with an uppercase letter: text continues after a final
/// punctuation mark.
pub fn has_text_after_final_punctuation(text: &SegmentedText) -> bool {
    text.words.windows(2).any(|pair| {
        let head = pair[0].trim_end_matches(['"', '\'', ')', ']', '»', '”', '’']);
        head.ends_with(['.', '!', '?']) && pair[1].chars().next().is_some_and(char::is_uppercase)
    })
}

/// Drop improperly split entries; returns the kept corpus and the number
/// removed.
pub fn filter_noise(corpus: &ErCorpus) -> (ErCorpus, usize) {
    let kept = corpus.subset(|e| !has_text_after_final_punctuation(&e.text));
    let removed = corpus.len() - kept.len();
    (kept, removed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub train: ErCorpus,
    pub dev: ErCorpus,
    pub test: ErCorpus,
}

/// Seeded split: test and dev are drawn from a shuffle, the rest is train.
/// Each split keeps corpus order.
pub fn partition(corpus: &ErCorpus, dev: usize, test: usize, seed: u64) -> Result<Partition> {
    if dev + test > corpus.len() {
        return Err(Error::Config(format!(
            "dev {dev} + test {test} exceeds corpus size {}",
            corpus.len()
        )));
    }
    let mut order: Vec<usize> = (0..corpus.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0u8; corpus.len()];
    for &i in &order[..test] {
        labels[i] = 2;
    }
    for &i in &order[test..test + dev] {
        labels[i] = 1;
    }
    let pick = |label: u8| ErCorpus {
        entries: corpus
            .entries
            .iter()
            .zip(&labels)
            .filter(|(_, &l)| l == label)
            .map(|(e, _)| e.clone())
            .collect(),
        language: corpus.language.clone(),
    };
    Ok(Partition {
        train: pick(0),
        dev: pick(1),
        test: pick(2),
    })
}

//! Sentences and marker-delimited segmented text.

use std::collections::BTreeSet;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Break marker used by the corpora and by BLEU-with-breaks.
pub const DEFAULT_MARKER: &str = "<seg>";

/// A whitespace-tokenized source sentence.
///
/// `raw` is the whitespace-normalized text: runs of whitespace collapse to a
/// single space and the ends are trimmed. `token_spans` are byte ranges into
/// `raw`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sentence {
    pub raw: String,
    pub tokens: Vec<String>,
    pub token_spans: Vec<Range<usize>>,
}

impl Sentence {
    pub fn new(text: &str) -> Self {
        let tokens: Vec<String> = text.split_whitespace().map(str::to_owned).collect();
        Self::from_tokens(tokens)
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let tokens: Vec<String> = tokens
            .into_iter()
            .map(|t| t.as_ref().to_owned())
            .filter(|t| !t.is_empty())
            .collect();
        let mut raw = String::new();
        let mut token_spans = Vec::with_capacity(tokens.len());
        for (i, token) in tokens.iter().enumerate() {
            if i > 0 {
                raw.push(' ');
            }
            let start = raw.len();
            raw.push_str(token);
            token_spans.push(start..raw.len());
        }
        Sentence {
            raw,
            tokens,
            token_spans,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Collapse whitespace runs to single spaces and trim.
pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Words with break positions between them.
///
/// A break at gap `g` sits between `words[g]` and `words[g + 1]`, so valid
/// gaps lie in `0..words.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedText {
    pub words: Vec<String>,
    pub break_gaps: BTreeSet<usize>,
}

impl SegmentedText {
    pub fn new(words: Vec<String>, break_gaps: BTreeSet<usize>) -> Result<Self> {
        if let Some(&last) = break_gaps.iter().next_back() {
            if last + 1 >= words.len() {
                return Err(Error::Usage(format!(
                    "break gap {last} out of range for {} words",
                    words.len()
                )));
            }
        }
        Ok(SegmentedText { words, break_gaps })
    }

    pub fn unsegmented(words: Vec<String>) -> Self {
        SegmentedText {
            words,
            break_gaps: BTreeSet::new(),
        }
    }

    /// Parse a marker-delimited line such as `a b <seg> c d`.
    ///
    /// Leading, trailing and adjacent markers are rejected. The error carries
    /// line 0; callers reading files substitute the real line number.
    pub fn parse(line: &str, marker: &str) -> Result<Self> {
        let mut words = Vec::new();
        let mut break_gaps = BTreeSet::new();
        let mut pending_break = false;
        for token in line.split_whitespace() {
            if token == marker {
                if words.is_empty() {
                    return Err(format_err("leading break marker"));
                }
                if pending_break {
                    return Err(format_err("adjacent break markers"));
                }
                pending_break = true;
            } else {
                if pending_break {
                    break_gaps.insert(words.len() - 1);
                    pending_break = false;
                }
                words.push(token.to_owned());
            }
        }
        if pending_break {
            return Err(format_err("trailing break marker"));
        }
        if words.is_empty() {
            return Err(format_err("empty sentence"));
        }
        Ok(SegmentedText { words, break_gaps })
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    pub fn break_count(&self) -> usize {
        self.break_gaps.len()
    }

    pub fn has_breaks(&self) -> bool {
        !self.break_gaps.is_empty()
    }

    /// Segment lengths in words, in order.
    pub fn segment_lengths(&self) -> Vec<usize> {
        let mut lengths = Vec::with_capacity(self.break_gaps.len() + 1);
        let mut start = 0;
        for &gap in &self.break_gaps {
            lengths.push(gap + 1 - start);
            start = gap + 1;
        }
        lengths.push(self.words.len() - start);
        lengths
    }

    /// Words with the marker interleaved at every break.
    pub fn tokens_with_breaks(&self, marker: &str) -> Vec<String> {
        let mut out = Vec::with_capacity(self.words.len() + self.break_gaps.len());
        for (i, word) in self.words.iter().enumerate() {
            out.push(word.clone());
            if self.break_gaps.contains(&i) {
                out.push(marker.to_owned());
            }
        }
        out
    }

    pub fn to_line(&self, marker: &str) -> String {
        self.tokens_with_breaks(marker).join(" ")
    }

    pub fn plain_text(&self) -> String {
        self.words.join(" ")
    }

    pub fn to_sentence(&self) -> Sentence {
        Sentence::from_tokens(&self.words)
    }
}

fn format_err(message: &str) -> Error {
    Error::Format {
        line: 0,
        message: message.to_owned(),
    }
}

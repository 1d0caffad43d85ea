//! Segmentation-window grid search.
//!
//! Gap scores do not depend on the window, so every sentence is scored
//! once and the scores are reused for each (min, max) cell.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::break_f1;
use crate::segmenter::{segment_scored, GapScores, SegmentationConfig};
use crate::text::SegmentedText;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub min_words: usize,
    pub max_words: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub min_range: (usize, usize),
    pub max_range: (usize, usize),
    pub beam_width: usize,
    pub penalty: f64,
    /// Cells in (min, max) order, only where min <= max.
    pub cells: Vec<GridCell>,
    /// Highest F1; the first such cell on ties.
    pub best: GridCell,
}

impl GridResult {
    pub fn cell(&self, min_words: usize, max_words: usize) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.min_words == min_words && c.max_words == max_words)
    }
}

/// F1 of every window against `references`, segmenting their break-free
/// text with the precomputed `scores`.
pub fn grid_search(
    references: &[SegmentedText],
    scores: &[Result<GapScores>],
    min_range: RangeInclusive<usize>,
    max_range: RangeInclusive<usize>,
    beam_width: usize,
    penalty: f64,
    jobs: usize,
) -> Result<GridResult> {
    if references.is_empty() {
        return Err(Error::EmptyInput);
    }
    if *min_range.start() == 0 {
        return Err(Error::Config("min_words must be positive".into()));
    }
    let sentences: Vec<_> = references.iter().map(SegmentedText::to_sentence).collect();
    let mut cells = Vec::new();
    for min_words in min_range.clone() {
        for max_words in max_range.clone().filter(|&m| m >= min_words) {
            let config = SegmentationConfig {
                min_words,
                max_words,
                beam_width,
                penalty,
            };
            let segmentation = segment_scored(&sentences, scores, &config, jobs)?;
            let hyps = segmentation.to_segmented(&sentences);
            let f = break_f1(&hyps, references)?;
            cells.push(GridCell {
                min_words,
                max_words,
                precision: f.precision,
                recall: f.recall,
                f1: f.f1,
            });
        }
    }
    let best = cells
        .iter()
        .fold(None::<&GridCell>, |best, c| match best {
            Some(b) if b.f1 >= c.f1 => Some(b),
            _ => Some(c),
        })
        .cloned()
        .ok_or_else(|| Error::Config("grid has no cell with min <= max".into()))?;
    Ok(GridResult {
        min_range: (*min_range.start(), *min_range.end()),
        max_range: (*max_range.start(), *max_range.end()),
        beam_width,
        penalty,
        cells,
        best,
    })
}

/// Parse an inclusive range written `A-B`, `A..B`, `A..=B` or `A`.
pub fn parse_range(text: &str) -> Result<RangeInclusive<usize>> {
    let bad = || Error::Usage(format!("bad range {text:?}; expected A-B"));
    let (lo, hi) = if let Some((a, b)) = text.split_once("..=") {
        (a, b)
    } else if let Some((a, b)) = text.split_once("..") {
        (a, b)
    } else if let Some((a, b)) = text.split_once('-') {
        (a, b)
    } else {
        (text, text)
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(Error::Usage(format!("empty range {text:?}")));
    }
    Ok(lo..=hi)
}

//! Tree files: one bracketed tree per line, line `i` aligned with sentence
//! `i` of the corpus. A blank line means the sentence has no parse.

use std::fs;
use std::path::Path;

use super::{GapScorer, ScoreRequest};
use crate::error::{Error, Result};
use crate::segmenter::GapScores;
use crate::tree::{parse_bracketed, tree_gap_scores, BracketedTree};

#[derive(Debug, Clone)]
pub struct TreeScorer {
    trees: Vec<std::result::Result<Option<BracketedTree>, String>>,
}

impl TreeScorer {
    /// Parse every line. Unparseable lines are kept as per-sentence errors.
    pub fn from_text(text: &str) -> Self {
        let trees = text
            .lines()
            .enumerate()
            .map(|(i, line)| {
                if line.trim().is_empty() {
                    Ok(None)
                } else {
                    parse_bracketed(line)
                        .map(Some)
                        .map_err(|e| format!("tree line {}: {e}", i + 1))
                }
            })
            .collect();
        TreeScorer { trees }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::from_text(&text))
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }
}

impl GapScorer for TreeScorer {
    fn name(&self) -> &str {
        "tree"
    }

    fn score(&self, request: &ScoreRequest<'_>) -> Result<GapScores> {
        let err = |message: String| Error::Scores {
            id: request.id.clone(),
            message,
        };
        let line: usize = request
            .id
            .parse()
            .ok()
            .filter(|&l| l >= 1)
            .ok_or_else(|| err("tree scorer needs a 1-based line number as id".into()))?;
        match self.trees.get(line - 1) {
            None => Err(err(format!(
                "tree file has only {} lines",
                self.trees.len()
            ))),
            Some(Err(message)) => Err(err(message.clone())),
            Some(Ok(None)) => Err(err("no parse".into())),
            Some(Ok(Some(tree))) => tree_gap_scores(request.sentence, tree),
        }
    }
}

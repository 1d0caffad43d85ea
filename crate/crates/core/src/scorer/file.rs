//! Precomputed score files: one JSON object per line with `id`, `tokens`
//! and `scores`.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{check_probability_scores, GapScorer, ScoreRequest};
use crate::error::{Error, Result};
use crate::segmenter::GapScores;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub id: String,
    pub tokens: Vec<String>,
    pub scores: Vec<f64>,
}

impl ScoreRecord {
    pub fn validate(&self) -> Result<()> {
        if self.scores.len() != self.tokens.len() {
            return Err(Error::Record {
                id: self.id.clone(),
                message: format!(
                    "{} scores for {} tokens",
                    self.scores.len(),
                    self.tokens.len()
                ),
            });
        }
        check_probability_scores(&self.scores).map_err(|message| Error::Record {
            id: self.id.clone(),
            message,
        })
    }
}

pub fn load_score_file(path: impl AsRef<Path>) -> Result<HashMap<String, ScoreRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_score_records(BufReader::new(file)).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

pub fn read_score_records(reader: impl BufRead) -> Result<HashMap<String, ScoreRecord>> {
    let mut records = HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<score file>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScoreRecord = serde_json::from_str(&line).map_err(|e| Error::Format {
            line: i + 1,
            message: e.to_string(),
        })?;
        record.validate()?;
        if records.contains_key(&record.id) {
            return Err(Error::Record {
                id: record.id,
                message: format!("duplicate id on line {}", i + 1),
            });
        }
        records.insert(record.id.clone(), record);
    }
    Ok(records)
}

/// Serves scores from a loaded score file. The sentence-final gap is set to
/// 1.0.
#[derive(Debug, Clone)]
pub struct FileScorer {
    records: HashMap<String, ScoreRecord>,
}

impl FileScorer {
    pub fn new(records: HashMap<String, ScoreRecord>) -> Self {
        FileScorer { records }
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        load_score_file(path).map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

impl GapScorer for FileScorer {
    fn name(&self) -> &str {
        "file"
    }

    fn score(&self, request: &ScoreRequest<'_>) -> Result<GapScores> {
        let record = self.records.get(&request.id).ok_or_else(|| Error::Scores {
            id: request.id.clone(),
            message: "no record in score file".into(),
        })?;
        if record.tokens != request.sentence.tokens {
            return Err(Error::Scores {
                id: request.id.clone(),
                message: "record tokens differ from the sentence".into(),
            });
        }
        Ok(GapScores::new(record.scores.clone())?.with_final_gap(1.0))
    }
}

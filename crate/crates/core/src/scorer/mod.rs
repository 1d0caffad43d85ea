//! Gap scorers.
//!
//! A scorer turns a sentence into [`GapScores`]. Three transports exist:
//! precomputed score files ([`file`]), constituency trees read from a tree
//! file ([`tree_file`]), and a sidecar process speaking a line-delimited JSON
//! protocol ([`subprocess`]).

pub mod file;
pub mod subprocess;
pub mod tree_file;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::segmenter::GapScores;
use crate::text::Sentence;

pub use self::file::{load_score_file, FileScorer, ScoreRecord};
pub use self::subprocess::{SidecarOptions, SidecarSession, SubprocessScorer};
pub use self::tree_file::TreeScorer;

#[derive(Debug, Clone)]
pub struct ScoreRequest<'a> {
    pub id: String,
    pub sentence: &'a Sentence,
}

pub trait GapScorer: Send + Sync {
    fn name(&self) -> &str;

    fn score(&self, request: &ScoreRequest<'_>) -> Result<GapScores>;

    /// Score many sentences; transports that can pipeline override this.
    fn score_batch(&self, requests: &[ScoreRequest<'_>]) -> Vec<Result<GapScores>> {
        requests.iter().map(|r| self.score(r)).collect()
    }
}

/// Scorer selection string: `tree:<treefile>`, `file:<scorefile>` or
/// `subprocess:<command line>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScorerSpec {
    Tree(PathBuf),
    File(PathBuf),
    Subprocess(Vec<String>),
}

impl FromStr for ScorerSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Usage(format!("scorer spec {s:?} has no ':'")))?;
        if arg.is_empty() {
            return Err(Error::Usage(format!(
                "scorer spec {s:?} has an empty argument"
            )));
        }
        match kind {
            "tree" => Ok(ScorerSpec::Tree(arg.into())),
            "file" => Ok(ScorerSpec::File(arg.into())),
            "subprocess" => {
                let argv = shlex::split(arg)
                    .filter(|v| !v.is_empty())
                    .ok_or_else(|| Error::Usage(format!("cannot split command {arg:?}")))?;
                Ok(ScorerSpec::Subprocess(argv))
            }
            other => Err(Error::Usage(format!("unknown scorer kind {other:?}"))),
        }
    }
}

impl fmt::Display for ScorerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorerSpec::Tree(p) => write!(f, "tree:{}", p.display()),
            ScorerSpec::File(p) => write!(f, "file:{}", p.display()),
            ScorerSpec::Subprocess(argv) => write!(f, "subprocess:{}", argv.join(" ")),
        }
    }
}

impl ScorerSpec {
    /// Input files the scorer reads, for run manifests.
    pub fn input_path(&self) -> Option<&std::path::Path> {
        match self {
            ScorerSpec::Tree(p) | ScorerSpec::File(p) => Some(p),
            ScorerSpec::Subprocess(_) => None,
        }
    }

    pub fn open(&self, sidecar: &SidecarOptions) -> Result<Box<dyn GapScorer>> {
        Ok(match self {
            ScorerSpec::Tree(path) => Box::new(TreeScorer::from_path(path)?),
            ScorerSpec::File(path) => Box::new(FileScorer::from_path(path)?),
            ScorerSpec::Subprocess(argv) => {
                Box::new(SubprocessScorer::new(SidecarSession::spawn(argv, sidecar)?))
            }
        })
    }
}

/// Check that scores are finite and each lies in [0,1] or is the exclusion
/// sentinel.
pub(crate) fn check_probability_scores(scores: &[f64]) -> std::result::Result<(), String> {
    for (i, &s) in scores.iter().enumerate() {
        if !s.is_finite() {
            return Err(format!("score {i} is not finite"));
        }
        if s != crate::segmenter::EXCLUDED_GAP && !(0.0..=1.0).contains(&s) {
            return Err(format!("score {i} = {s} outside [0,1]"));
        }
    }
    Ok(())
}

//! Windowed segmentation candidates and beam search over gap scores.
//!
//! Gap `i` (0-based) is the position right after token `i`; the last gap is
//! the end of the sentence. A segment of `j` tokens starting at token `p`
//! closes at gap `p + j - 1` and takes that gap's score. A path's score is
//! the arithmetic mean of its segment scores.
//!
//! The search keeps one partial path per (position, segment count): two
//! partial paths that reach the same position with the same number of
//! segments share every completion, so the one with the larger score sum
//! dominates. All partial paths in one search round have the same segment
//! count, so the beam never holds more than one entry per token position,
//! and a beam at least as wide as the sentence is exhaustive.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::{GapScorer, ScoreRequest};
use crate::text::{SegmentedText, Sentence};

/// Score of a gap that must never carry a break.
pub const EXCLUDED_GAP: f64 = -1.0;

/// One score per token; `scores[i]` rates a break right after token `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GapScores(Vec<f64>);

impl GapScores {
    /// Scores must be finite.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Config(format!("gap score {i} is not finite")));
        }
        Ok(GapScores(scores))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_excluded(&self, gap: usize) -> bool {
        self.0[gap] == EXCLUDED_GAP
    }

    /// Overwrite the sentence-final gap.
    pub fn with_final_gap(mut self, value: f64) -> Self {
        if let Some(last) = self.0.last_mut() {
            *last = value;
        }
        self
    }

    /// Check alignment with a sentence of `tokens` words.
    pub fn check_aligned(&self, tokens: usize) -> Result<()> {
        if self.0.len() != tokens {
            return Err(Error::Config(format!(
                "{} gap scores for {} tokens",
                self.0.len(),
                tokens
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub beam_width: usize,
    pub penalty: f64,
}

impl Default for SegmentationConfig {
    fn default() -> Self {
        SegmentationConfig {
            min_words: 5,
            max_words: 15,
            beam_width: 5,
            penalty: 0.0,
        }
    }
}

impl SegmentationConfig {
    pub fn window(min_words: usize, max_words: usize) -> Self {
        SegmentationConfig {
            min_words,
            max_words,
            ..Default::default()
        }
    }

    pub fn with_beam(mut self, beam_width: usize) -> Self {
        self.beam_width = beam_width;
        self
    }

    pub fn with_penalty(mut self, penalty: f64) -> Self {
        self.penalty = penalty;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_words == 0 {
            return Err(Error::Config("min_words must be positive".into()));
        }
        if self.min_words > self.max_words {
            return Err(Error::Config(format!(
                "min_words {} exceeds max_words {}",
                self.min_words, self.max_words
            )));
        }
        if self.beam_width == 0 {
            return Err(Error::Config("beam_width must be at least 1".into()));
        }
        if !self.penalty.is_finite() {
            return Err(Error::Config("penalty must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateKind {
    /// Break inside the window at a usable gap.
    Window,
    /// Fewer than `min_words` tokens left; the whole remainder at `penalty`.
    ShortRemainder,
    /// No usable gap inside the window; best usable gap anywhere.
    Fallback,
}

/// A first segment for the tokens passed to [`get_segmentation_candidates`].
///
/// The remainder is `tokens[segment.end..]` with `scores[segment.end..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub segment: Range<usize>,
    pub score: f64,
    pub kind: CandidateKind,
}

impl Candidate {
    pub fn remaining<'a, T>(&self, items: &'a [T]) -> &'a [T] {
        &items[self.segment.end..]
    }
}

/// First-segment candidates for `tokens`.
pub fn get_segmentation_candidates<T>(
    tokens: &[T],
    scores: &[f64],
    config: &SegmentationConfig,
) -> Result<Vec<Candidate>> {
    if tokens.is_empty() {
        return Err(Error::EmptyInput);
    }
    if scores.len() != tokens.len() {
        return Err(Error::Config(format!(
            "{} gap scores for {} tokens",
            scores.len(),
            tokens.len()
        )));
    }
    config.validate()?;
    Ok(candidates_from(scores, config))
}

fn candidates_from(scores: &[f64], config: &SegmentationConfig) -> Vec<Candidate> {
    let n = scores.len();
    if n < config.min_words {
        return vec![Candidate {
            segment: 0..n,
            score: config.penalty,
            kind: CandidateKind::ShortRemainder,
        }];
    }
    let upper = config.max_words.min(n);
    let window: Vec<Candidate> = (config.min_words..=upper)
        .filter(|&j| scores[j - 1] != EXCLUDED_GAP)
        .map(|j| Candidate {
            segment: 0..j,
            score: scores[j - 1],
            kind: CandidateKind::Window,
        })
        .collect();
    if !window.is_empty() {
        return window;
    }

    let mut best: Option<usize> = None;
    for j in 1..=n {
        let s = scores[j - 1];
        if s == EXCLUDED_GAP {
            continue;
        }
        if best.is_none_or(|b| s > scores[b - 1]) {
            best = Some(j);
        }
    }
    match best {
        Some(j) => vec![Candidate {
            segment: 0..j,
            score: scores[j - 1],
            kind: CandidateKind::Fallback,
        }],
        None => vec![Candidate {
            segment: 0..n,
            score: config.penalty,
            kind: CandidateKind::ShortRemainder,
        }],
    }
}

/// A complete segmentation of one sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentationPath {
    pub segments: Vec<Range<usize>>,
    pub segment_scores: Vec<f64>,
    pub path_score: f64,
    /// True when some segment came from the out-of-window fallback.
    #[serde(default)]
    pub used_fallback: bool,
}

impl SegmentationPath {
    /// One segment covering all tokens, scored at `penalty`.
    #[allow(clippy::single_range_in_vec_init)]
    pub fn unsegmented(tokens: usize, penalty: f64) -> Self {
        SegmentationPath {
            segments: vec![0..tokens],
            segment_scores: vec![penalty],
            path_score: penalty,
            used_fallback: false,
        }
    }

    /// Token indices after which a break is placed (the sentence end excluded).
    pub fn break_gaps(&self) -> Vec<usize> {
        let k = self.segments.len();
        self.segments[..k.saturating_sub(1)]
            .iter()
            .map(|r| r.end - 1)
            .collect()
    }

    pub fn token_count(&self) -> usize {
        self.segments.last().map_or(0, |r| r.end)
    }

    pub fn to_segmented(&self, sentence: &Sentence) -> SegmentedText {
        SegmentedText {
            words: sentence.tokens.clone(),
            break_gaps: self.break_gaps().into_iter().collect(),
        }
    }

    /// Segments rendered as text lines.
    pub fn lines(&self, sentence: &Sentence) -> Vec<String> {
        self.segments
            .iter()
            .map(|r| sentence.tokens[r.clone()].join(" "))
            .collect()
    }
}

#[derive(Debug, Clone)]
struct Partial {
    pos: usize,
    ends: Vec<usize>,
    scores: Vec<f64>,
    sum: f64,
    used_fallback: bool,
}

impl Partial {
    fn mean(&self) -> f64 {
        self.sum / self.scores.len() as f64
    }

    fn extend(&self, candidate: &Candidate) -> Partial {
        let mut ends = self.ends.clone();
        let mut scores = self.scores.clone();
        let end = self.pos + candidate.segment.end;
        ends.push(end);
        scores.push(candidate.score);
        Partial {
            pos: end,
            ends,
            scores,
            sum: self.sum + candidate.score,
            used_fallback: self.used_fallback || candidate.kind == CandidateKind::Fallback,
        }
    }

    fn into_path(self) -> SegmentationPath {
        let mut start = 0;
        let segments = self
            .ends
            .iter()
            .map(|&end| {
                let r = start..end;
                start = end;
                r
            })
            .collect();
        SegmentationPath {
            segments,
            path_score: self.mean(),
            segment_scores: self.scores,
            used_fallback: self.used_fallback,
        }
    }
}

/// Higher mean first; on equal means the path whose first differing break is
/// earlier.
fn rank(a: &Partial, b: &Partial) -> Ordering {
    b.mean()
        .partial_cmp(&a.mean())
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.ends.cmp(&b.ends))
}

/// Same position and segment count: larger sum wins, then earlier breaks.
fn dominates(a: &Partial, b: &Partial) -> bool {
    match a.sum.partial_cmp(&b.sum) {
        Some(Ordering::Greater) => true,
        Some(Ordering::Less) => false,
        _ => a.ends < b.ends,
    }
}

/// Best-scoring segmentation of `sentence` reachable under the beam.
pub fn beam_search_segment(
    sentence: &Sentence,
    scores: &GapScores,
    config: &SegmentationConfig,
) -> Result<SegmentationPath> {
    beam_search(scores.as_slice(), sentence.len(), config)
}

pub(crate) fn beam_search(
    scores: &[f64],
    tokens: usize,
    config: &SegmentationConfig,
) -> Result<SegmentationPath> {
    config.validate()?;
    if tokens == 0 {
        return Err(Error::EmptyInput);
    }
    if scores.len() != tokens {
        return Err(Error::Config(format!(
            "{} gap scores for {} tokens",
            scores.len(),
            tokens
        )));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::Config(format!("gap score {i} is not finite")));
    }

    let mut beam = vec![Partial {
        pos: 0,
        ends: Vec::new(),
        scores: Vec::new(),
        sum: 0.0,
        used_fallback: false,
    }];
    let mut best: Option<Partial> = None;

    while !beam.is_empty() {
        let mut by_pos: HashMap<usize, Partial> = HashMap::new();
        for partial in &beam {
            for candidate in candidates_from(&scores[partial.pos..], config) {
                let next = partial.extend(&candidate);
                if next.pos == tokens {
                    if best
                        .as_ref()
                        .is_none_or(|b| rank(&next, b) == Ordering::Less)
                    {
                        best = Some(next);
                    }
                    continue;
                }
                match by_pos.get(&next.pos) {
                    Some(existing) if !dominates(&next, existing) => {}
                    _ => {
                        by_pos.insert(next.pos, next);
                    }
                }
            }
        }
        let mut next_beam: Vec<Partial> = by_pos.into_values().collect();
        next_beam.sort_by(rank);
        next_beam.truncate(config.beam_width);
        beam = next_beam;
    }

    // Every candidate advances by at least one token, so the search always
    // completes at least one path.
    Ok(best.expect("beam search completes").into_path())
}

/// Per-sentence failure recorded during corpus segmentation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub index: usize,
    pub id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSegmentation {
    pub paths: Vec<SegmentationPath>,
    pub diagnostics: Vec<Diagnostic>,
}

impl CorpusSegmentation {
    pub fn to_segmented(&self, sentences: &[Sentence]) -> Vec<SegmentedText> {
        self.paths
            .iter()
            .zip(sentences)
            .map(|(p, s)| p.to_segmented(s))
            .collect()
    }
}

/// Identifier used for the sentence at `index` (1-based line number).
pub fn sentence_id(index: usize) -> String {
    (index + 1).to_string()
}

/// Score every sentence once.
pub fn score_corpus(sentences: &[Sentence], scorer: &dyn GapScorer) -> Vec<Result<GapScores>> {
    let requests: Vec<ScoreRequest<'_>> = sentences
        .iter()
        .enumerate()
        .map(|(i, sentence)| ScoreRequest {
            id: sentence_id(i),
            sentence,
        })
        .collect();
    scorer.score_batch(&requests)
}

/// Segment sentences whose scores are already known.
///
/// Failed scores and empty sentences yield an unsegmented path plus a
/// diagnostic. `jobs > 1` segments on a thread pool; output order always
/// follows input order.
pub fn segment_scored(
    sentences: &[Sentence],
    scores: &[Result<GapScores>],
    config: &SegmentationConfig,
    jobs: usize,
) -> Result<CorpusSegmentation> {
    config.validate()?;
    if sentences.len() != scores.len() {
        return Err(Error::Config(format!(
            "{} score vectors for {} sentences",
            scores.len(),
            sentences.len()
        )));
    }
    let run = |i: usize| -> std::result::Result<SegmentationPath, String> {
        let sentence = &sentences[i];
        match &scores[i] {
            Ok(s) => beam_search_segment(sentence, s, config).map_err(|e| e.to_string()),
            Err(e) => Err(e.to_string()),
        }
    };
    let results: Vec<std::result::Result<SegmentationPath, String>> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?;
        pool.install(|| (0..sentences.len()).into_par_iter().map(run).collect())
    } else {
        (0..sentences.len()).map(run).collect()
    };

    let mut paths = Vec::with_capacity(results.len());
    let mut diagnostics = Vec::new();
    for (index, result) in results.into_iter().enumerate() {
        match result {
            Ok(path) => paths.push(path),
            Err(message) => {
                log::warn!("sentence {}: {message}", sentence_id(index));
                diagnostics.push(Diagnostic {
                    index,
                    id: sentence_id(index),
                    message,
                });
                paths.push(SegmentationPath::unsegmented(
                    sentences[index].len(),
                    config.penalty,
                ));
            }
        }
    }
    Ok(CorpusSegmentation { paths, diagnostics })
}

/// Score and segment a corpus.
pub fn segment_corpus(
    sentences: &[Sentence],
    scorer: &dyn GapScorer,
    config: &SegmentationConfig,
    jobs: usize,
) -> Result<CorpusSegmentation> {
    config.validate()?;
    let scores = score_corpus(sentences, scorer);
    segment_scored(sentences, &scores, config, jobs)
}


#[cfg(test)]
mod tests {
    use super::oracle::{brute_force, count_paths};
    use super::*;
    use proptest::prelude::*;

    fn words(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("w{i}")).collect()
    }

    fn ends(path: &SegmentationPath) -> Vec<usize> {
        path.segments.iter().map(|r| r.end).collect()
    }

    #[test]
    fn short_input_is_one_penalized_candidate() {
        let cfg = SegmentationConfig::default().with_penalty(-0.5);
        let c = get_segmentation_candidates(&words(3), &[0.2, 0.3, 1.0], &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].segment, 0..3);
        assert_eq!(c[0].score, -0.5);
        assert_eq!(c[0].kind, CandidateKind::ShortRemainder);
        assert!(c[0].remaining(&words(3)).is_empty());
    }

    #[test]
    fn window_candidate_counts() {
        let cfg = SegmentationConfig::default();
        let c = get_segmentation_candidates(&words(20), &[0.5; 20], &cfg).unwrap();
        assert_eq!(c.len(), 11);
        assert_eq!(
            c.iter().map(|c| c.segment.end).collect::<Vec<_>>(),
            (5..=15).collect::<Vec<_>>()
        );

        let toks = words(10);
        let scores: Vec<f64> = (0..10).map(|i| i as f64 / 10.0).collect();
        let c = get_segmentation_candidates(&toks, &scores, &cfg).unwrap();
        assert_eq!(
            c.iter().map(|c| c.segment.end).collect::<Vec<_>>(),
            vec![5, 6, 7, 8, 9, 10]
        );
        let last = c.last().unwrap();
        assert!(last.remaining(&toks).is_empty());
        assert_eq!(last.score, 0.9);
        assert_eq!(c[0].remaining(&toks).len(), 5);
        assert_eq!(c[0].remaining(&scores)[0], 0.5);
    }

    #[test]
    fn excluded_gaps_are_skipped() {
        let cfg = SegmentationConfig::window(2, 3);
        let scores = [0.1, EXCLUDED_GAP, 0.4, 0.3, 1.0];
        let c = get_segmentation_candidates(&words(5), &scores, &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].segment, 0..3);
    }

    #[test]
    fn fallback_when_window_fully_excluded() {
        let cfg = SegmentationConfig::window(2, 3);
        let scores = [0.7, EXCLUDED_GAP, EXCLUDED_GAP, 0.9, 0.2, 1.0];
        let c = get_segmentation_candidates(&words(6), &scores, &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].kind, CandidateKind::Fallback);
        assert_eq!(c[0].segment, 0..6);
        assert_eq!(c[0].score, 1.0);

        let scores = [0.7, EXCLUDED_GAP, EXCLUDED_GAP, 0.9, 0.2, EXCLUDED_GAP];
        let c = get_segmentation_candidates(&words(6), &scores, &cfg).unwrap();
        assert_eq!(c[0].segment, 0..4);

        let scores = [EXCLUDED_GAP; 6];
        let c = get_segmentation_candidates(&words(6), &scores, &cfg).unwrap();
        assert_eq!(c[0].segment, 0..6);
        assert_eq!(c[0].kind, CandidateKind::ShortRemainder);
    }

    #[test]
    fn candidate_errors() {
        let cfg = SegmentationConfig::default();
        let empty: [String; 0] = [];
        assert!(matches!(
            get_segmentation_candidates(&empty, &[], &cfg),
            Err(Error::EmptyInput)
        ));
        assert!(get_segmentation_candidates(&words(3), &[0.1], &cfg).is_err());
        let bad = SegmentationConfig::window(6, 5);
        assert!(get_segmentation_candidates(&words(3), &[0.1; 3], &bad).is_err());
    }

    #[test]
    fn below_min_sentence_is_single_segment() {
        let s = Sentence::new("one two three four");
        let scores = GapScores::new(vec![0.3, 0.9, 0.1, 1.0]).unwrap();
        let path = beam_search_segment(&s, &scores, &SegmentationConfig::default()).unwrap();
        assert_eq!(path.segments, vec![0..4]);
        assert_eq!(path.path_score, 0.0);
    }

    #[test]
    fn matches_brute_force_on_twelve_tokens() {
        let scores = [
            0.10, 0.40, 0.80, 0.20, 0.55, 0.30, 0.90, 0.15, 0.60, 0.35, 0.70, 1.0,
        ];
        let cfg = SegmentationConfig::window(3, 6);
        let legal = count_paths(&scores, &cfg);
        let cfg = cfg.with_beam(legal);
        let (mean, best_ends) = brute_force(&scores, &cfg);
        let path = beam_search(&scores, 12, &cfg).unwrap();
        assert_eq!(ends(&path), best_ends);
        assert_eq!(path.path_score, mean);
    }

    #[test]
    fn wider_beam_beats_greedy() {
        // Taking the locally best first break (after 6) leaves two words.
        let scores = [0.1, 0.1, 0.1, 0.6, 0.5, 0.9, 0.1, 1.0];
        let greedy =
            beam_search(&scores, 8, &SegmentationConfig::window(4, 6).with_beam(1)).unwrap();
        let wide = beam_search(&scores, 8, &SegmentationConfig::window(4, 6).with_beam(8)).unwrap();
        assert_eq!(ends(&greedy), vec![6, 8]);
        assert_eq!(greedy.path_score, 0.45);
        assert_eq!(ends(&wide), vec![4, 8]);
        assert_eq!(wide.path_score, 0.8);
    }

    #[test]
    fn ties_prefer_earlier_breaks() {
        let scores = [0.5, 0.5, 0.5, 0.5];
        let path = beam_search(&scores, 4, &SegmentationConfig::window(1, 4).with_beam(8)).unwrap();
        assert_eq!(ends(&path), vec![1, 2, 3, 4]);
    }

    #[test]
    fn path_helpers() {
        let s = Sentence::new("a b c d e");
        let path = SegmentationPath {
            segments: vec![0..2, 2..5],
            segment_scores: vec![0.5, 1.0],
            path_score: 0.75,
            used_fallback: false,
        };
        assert_eq!(path.break_gaps(), vec![1]);
        assert_eq!(path.lines(&s), vec!["a b", "c d e"]);
        assert_eq!(path.to_segmented(&s).to_line("<seg>"), "a b <seg> c d e");
    }

    fn scores_strategy(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(
            prop_oneof![
                8 => (0u32..=64).prop_map(|k| k as f64 / 64.0),
                1 => Just(EXCLUDED_GAP),
            ],
            1..=max_len,
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn exhaustive_beam_equals_brute_force(
            scores in scores_strategy(12),
            min in 1usize..=5,
            extra in 0usize..=6,
            penalty in prop_oneof![Just(0.0), Just(-0.25)],
        ) {
            let cfg = SegmentationConfig::window(min, min + extra)
                .with_penalty(penalty)
                .with_beam(64);
            let (mean, best_ends) = brute_force(&scores, &cfg);
            let path = beam_search(&scores, scores.len(), &cfg).unwrap();
            prop_assert_eq!(ends(&path), best_ends);
            prop_assert_eq!(path.path_score, mean);
        }

        #[test]
        fn paths_cover_tokens_and_respect_window(
            scores in prop::collection::vec(0.0f64..1.0, 1..40),
            min in 1usize..=6,
            extra in 0usize..=10,
            beam in 1usize..=6,
        ) {
            let cfg = SegmentationConfig::window(min, min + extra).with_beam(beam);
            let path = beam_search(&scores, scores.len(), &cfg).unwrap();
            let mut expected_start = 0;
            for r in &path.segments {
                prop_assert_eq!(r.start, expected_start);
                prop_assert!(r.end > r.start);
                expected_start = r.end;
            }
            prop_assert_eq!(expected_start, scores.len());
            let k = path.segments.len();
            for r in &path.segments[..k - 1] {
                prop_assert!(r.len() >= min && r.len() <= min + extra);
            }
            let last = path.segments.last().unwrap();
            if last.len() < min {
                prop_assert_eq!(*path.segment_scores.last().unwrap(), cfg.penalty);
            }
            let mean = path.segment_scores.iter().sum::<f64>() / k as f64;
            prop_assert!((mean - path.path_score).abs() <= 1e-12);
        }

        #[test]
        fn affine_maps_keep_the_argmax(
            scores in prop::collection::vec((0u32..=32).prop_map(|k| k as f64 / 32.0), 1..=12),
            min in 1usize..=4,
            extra in 0usize..=5,
            scale_exp in 0i32..=3,
            shift in -4i32..=4,
        ) {
            let cfg = SegmentationConfig::window(min, min + extra).with_beam(64);
            let a = f64::powi(2.0, scale_exp);
            let b = shift as f64 / 4.0 + 2.0;
            let mapped: Vec<f64> = scores.iter().map(|s| a * s + b).collect();
            let mapped_cfg = cfg.with_penalty(a * cfg.penalty + b);
            let p1 = beam_search(&scores, scores.len(), &cfg).unwrap();
            let p2 = beam_search(&mapped, mapped.len(), &mapped_cfg).unwrap();
            prop_assert_eq!(p1.segments, p2.segments);
        }
    }
}

//! C ABI for erseg.
//!
//! Objects are opaque handles owned by the caller and released with the
//! matching `*_free` function. Fallible calls return an [`ErsegStatus`];
//! on failure a description is available from [`erseg_last_error_message`]
//! on the same thread. Strings returned by the library are freed with
//! [`erseg_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use erseg::corpus::parse_corpus;
use erseg::metrics::evaluate;
use erseg::tree::{parse_bracketed, tree_gap_scores, BracketedTree};
use erseg::{
    beam_search_segment, Error, GapScores, SegmentationConfig, SegmentationPath, Sentence,
    DEFAULT_MARKER,
};

/// Result of a fallible call. Zero is success; errors are negative.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErsegStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidUtf8 = -2,
    InvalidConfig = -3,
    EmptyInput = -4,
    Format = -5,
    TreeParse = -6,
    Alignment = -7,
    OutOfRange = -8,
    Metric = -9,
    BufferTooSmall = -10,
    Internal = -99,
}

/// Segmentation window and search parameters.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErsegConfig {
    pub min_words: usize,
    pub max_words: usize,
    pub beam_width: usize,
    pub penalty: f64,
}

/// Corpus-level evaluation scores, all on a 0-100 scale.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ErsegMetrics {
    pub sentences: usize,
    /// False when Sigma is undefined; `sigma` is then 0.
    pub sigma_defined: bool,
    pub sigma: f64,
    pub bleu_upper: f64,
    pub bleu_br: f64,
    pub bleu_nb: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub text_preserved_pct: f64,
}

/// A segmented sentence.
pub struct ErsegPath {
    sentence: Sentence,
    path: SegmentationPath,
}

/// A parsed bracketed tree.
pub struct ErsegTree {
    tree: BracketedTree,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let message = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(message));
}

fn status_of(error: &Error) -> ErsegStatus {
    match error {
        Error::Config(_) | Error::Usage(_) => ErsegStatus::InvalidConfig,
        Error::EmptyInput => ErsegStatus::EmptyInput,
        Error::Format { .. } | Error::Record { .. } | Error::Scores { .. } => ErsegStatus::Format,
        Error::TreeParse { .. } => ErsegStatus::TreeParse,
        Error::Alignment { .. } => ErsegStatus::Alignment,
        Error::LeafIndex { .. } => ErsegStatus::OutOfRange,
        Error::Metric(_) => ErsegStatus::Metric,
        _ => ErsegStatus::Internal,
    }
}

fn fail(status: ErsegStatus, message: impl Into<String>) -> ErsegStatus {
    set_error(message.into());
    status
}

/// Run `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), ErsegStatus>) -> ErsegStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ErsegStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(ErsegStatus::Internal, "internal panic"),
    }
}

fn lift(error: Error) -> ErsegStatus {
    fail(status_of(&error), error.to_string())
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, ErsegStatus> {
    if p.is_null() {
        return Err(fail(ErsegStatus::NullPointer, format!("{what} is NULL")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(ErsegStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, ErsegStatus> {
    p.as_ref()
        .ok_or_else(|| fail(ErsegStatus::NullPointer, format!("{what} is NULL")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), ErsegStatus> {
    if p.is_null() {
        Err(fail(ErsegStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(())
    }
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn erseg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copy of the last error message on this thread, or NULL if the last call
/// succeeded. Free with `erseg_string_free`.
#[no_mangle]
pub extern "C" fn erseg_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |m| m.clone().into_raw())
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn erseg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Window 5-15, beam 5, penalty 0.
#[no_mangle]
pub extern "C" fn erseg_config_default() -> ErsegConfig {
    let c = SegmentationConfig::default();
    ErsegConfig {
        min_words: c.min_words,
        max_words: c.max_words,
        beam_width: c.beam_width,
        penalty: c.penalty,
    }
}

/// Segment whitespace-tokenized `text` using one gap score per token.
///
/// # Safety
/// `text` must be a NUL-terminated string, `scores` must point to
/// `n_scores` doubles, `config` must be valid and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_segment(
    text: *const c_char,
    scores: *const f64,
    n_scores: usize,
    config: *const ErsegConfig,
    out: *mut *mut ErsegPath,
) -> ErsegStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(text, "text")?;
        let config = ref_arg(config, "config")?;
        if scores.is_null() && n_scores > 0 {
            return Err(fail(ErsegStatus::NullPointer, "scores is NULL"));
        }
        let scores = if n_scores == 0 {
            Vec::new()
        } else {
            std::slice::from_raw_parts(scores, n_scores).to_vec()
        };
        let sentence = Sentence::new(text);
        let config = SegmentationConfig {
            min_words: config.min_words,
            max_words: config.max_words,
            beam_width: config.beam_width,
            penalty: config.penalty,
        };
        let gaps = GapScores::new(scores).map_err(lift)?;
        let path = beam_search_segment(&sentence, &gaps, &config).map_err(lift)?;
        *out = Box::into_raw(Box::new(ErsegPath { sentence, path }));
        Ok(())
    })
}

/// # Safety
/// `path` must be NULL or a handle from `erseg_segment` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn erseg_path_free(path: *mut ErsegPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of segments, or 0 for a NULL handle.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn erseg_path_segment_count(path: *const ErsegPath) -> usize {
    path.as_ref().map_or(0, |p| p.path.segments.len())
}

/// Mean segment score of the path, or NaN for a NULL handle.
///
/// # Safety
/// `path` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn erseg_path_score(path: *const ErsegPath) -> f64 {
    path.as_ref().map_or(f64::NAN, |p| p.path.path_score)
}

/// Exclusive token end of segment `index`.
///
/// # Safety
/// `path` must be a live handle and `end` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_path_segment_end(
    path: *const ErsegPath,
    index: usize,
    end: *mut usize,
) -> ErsegStatus {
    guard(|| {
        let p = ref_arg(path, "path")?;
        out_arg(end, "end")?;
        let seg = p.path.segments.get(index).ok_or_else(|| {
            fail(
                ErsegStatus::OutOfRange,
                format!("segment {index} of {}", p.path.segments.len()),
            )
        })?;
        *end = seg.end;
        Ok(())
    })
}

/// The sentence with `marker` between segments (the default marker when
/// `marker` is NULL). Free with `erseg_string_free`; NULL on error.
///
/// # Safety
/// `path` must be a live handle; `marker` NULL or a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn erseg_path_to_line(
    path: *const ErsegPath,
    marker: *const c_char,
) -> *mut c_char {
    let mut line = None;
    let status = guard(|| {
        let p = ref_arg(path, "path")?;
        let marker = if marker.is_null() {
            DEFAULT_MARKER
        } else {
            str_arg(marker, "marker")?
        };
        line = Some(p.path.to_segmented(&p.sentence).to_line(marker));
        Ok(())
    });
    match (status, line) {
        (ErsegStatus::Ok, Some(l)) => owned_string(l),
        _ => ptr::null_mut(),
    }
}

/// Parse one bracketed tree such as `(S (NP (DT the) (NN dog)) (VP ran))`.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_tree_parse(
    text: *const c_char,
    out: *mut *mut ErsegTree,
) -> ErsegStatus {
    guard(|| {
        out_arg(out, "out")?;
        let tree = parse_bracketed(str_arg(text, "text")?).map_err(lift)?;
        *out = Box::into_raw(Box::new(ErsegTree { tree }));
        Ok(())
    })
}

/// # Safety
/// `tree` must be NULL or a handle from `erseg_tree_parse` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn erseg_tree_free(tree: *mut ErsegTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// # Safety
/// `tree` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn erseg_tree_leaf_count(tree: *const ErsegTree) -> usize {
    tree.as_ref().map_or(0, |t| t.tree.leaves().len())
}

/// Number of edges between leaves `i` and `j`.
///
/// # Safety
/// `tree` must be a live handle and `distance` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_tree_leaf_distance(
    tree: *const ErsegTree,
    i: usize,
    j: usize,
    distance: *mut usize,
) -> ErsegStatus {
    guard(|| {
        let t = ref_arg(tree, "tree")?;
        out_arg(distance, "distance")?;
        *distance = t.tree.leaf_distance(i, j).map_err(lift)?;
        Ok(())
    })
}

/// Normalized gap scores of `sentence` under `tree`, one per token.
///
/// `*len` receives the token count. When `capacity` is smaller the call
/// returns `BufferTooSmall` and writes nothing else, so callers can size
/// the buffer with a first call passing `capacity` 0.
///
/// # Safety
/// `tree` must be a live handle, `sentence` NUL-terminated, `scores` valid
/// for `capacity` doubles (or NULL when `capacity` is 0) and `len` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_tree_gap_scores(
    tree: *const ErsegTree,
    sentence: *const c_char,
    scores: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> ErsegStatus {
    guard(|| {
        let t = ref_arg(tree, "tree")?;
        out_arg(len, "len")?;
        let sentence = Sentence::new(str_arg(sentence, "sentence")?);
        let gaps = tree_gap_scores(&sentence, &t.tree).map_err(lift)?;
        let values = gaps.as_slice();
        *len = values.len();
        if capacity < values.len() {
            return Err(fail(
                ErsegStatus::BufferTooSmall,
                format!("need {} scores, capacity {capacity}", values.len()),
            ));
        }
        out_arg(scores, "scores")?;
        ptr::copy_nonoverlapping(values.as_ptr(), scores, values.len());
        Ok(())
    })
}

/// Score hypothesis against reference corpora given as newline-separated
/// marker-format text (the default marker when `marker` is NULL).
///
/// # Safety
/// `hyp` and `reference` must be NUL-terminated, `marker` NULL or
/// NUL-terminated, and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn erseg_evaluate(
    hyp: *const c_char,
    reference: *const c_char,
    marker: *const c_char,
    out: *mut ErsegMetrics,
) -> ErsegStatus {
    guard(|| {
        out_arg(out, "out")?;
        let marker = if marker.is_null() {
            DEFAULT_MARKER
        } else {
            str_arg(marker, "marker")?
        };
        let hyps = parse_corpus(str_arg(hyp, "hyp")?, marker, "hyp").map_err(lift)?;
        let refs =
            parse_corpus(str_arg(reference, "reference")?, marker, "reference").map_err(lift)?;
        let r = evaluate(&hyps.texts(), &refs.texts(), None).map_err(lift)?;
        *out = ErsegMetrics {
            sentences: r.sentences,
            sigma_defined: r.sigma.is_some(),
            sigma: r.sigma.unwrap_or(0.0),
            bleu_upper: r.bleu_upper,
            bleu_br: r.bleu_br,
            bleu_nb: r.bleu_nb,
            precision: r.precision,
            recall: r.recall,
            f1: r.f1,
            text_preserved_pct: r.text_preserved_pct,
        };
        Ok(())
    })
}

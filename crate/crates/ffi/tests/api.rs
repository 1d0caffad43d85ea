use std::ffi::{CStr, CString};
use std::ptr;

use erseg_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> Option<String> {
    let p = erseg_last_error_message();
    if p.is_null() {
        return None;
    }
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { erseg_string_free(p) };
    Some(s)
}

#[test]
fn segment_and_read_back() {
    let text = c("w0 w1 w2 w3 w4 w5 w6 w7");
    let scores = [0.1, 0.1, 0.1, 0.6, 0.5, 0.9, 0.1, 1.0];
    let mut config = erseg_config_default();
    assert_eq!(
        (config.min_words, config.max_words, config.beam_width),
        (5, 15, 5)
    );
    config.min_words = 4;
    config.max_words = 6;
    config.beam_width = 8;
    let mut path = ptr::null_mut();
    let status = unsafe {
        erseg_segment(
            text.as_ptr(),
            scores.as_ptr(),
            scores.len(),
            &config,
            &mut path,
        )
    };
    assert_eq!(status, ErsegStatus::Ok);
    assert!(last_error().is_none());
    unsafe {
        assert_eq!(erseg_path_segment_count(path), 2);
        assert_eq!(erseg_path_score(path), 0.8);
        let mut end = 0;
        assert_eq!(erseg_path_segment_end(path, 0, &mut end), ErsegStatus::Ok);
        assert_eq!(end, 4);
        assert_eq!(
            erseg_path_segment_end(path, 2, &mut end),
            ErsegStatus::OutOfRange
        );
        assert!(last_error().unwrap().contains("segment 2"));

        let line = erseg_path_to_line(path, ptr::null());
        assert_eq!(
            CStr::from_ptr(line).to_str().unwrap(),
            "w0 w1 w2 w3 <seg> w4 w5 w6 w7"
        );
        erseg_string_free(line);
        let bar = c("|");
        let line = erseg_path_to_line(path, bar.as_ptr());
        assert_eq!(
            CStr::from_ptr(line).to_str().unwrap(),
            "w0 w1 w2 w3 | w4 w5 w6 w7"
        );
        erseg_string_free(line);
        erseg_path_free(path);
    }
}

#[test]
fn segment_errors() {
    let text = c("a b c");
    let scores = [0.5, 0.5];
    let config = erseg_config_default();
    let mut path = ptr::null_mut();
    unsafe {
        assert_eq!(
            erseg_segment(text.as_ptr(), scores.as_ptr(), 2, &config, &mut path),
            ErsegStatus::InvalidConfig
        );
        assert!(last_error().unwrap().contains("2 gap scores for 3 tokens"));
        assert!(path.is_null());
        assert_eq!(
            erseg_segment(ptr::null(), scores.as_ptr(), 2, &config, &mut path),
            ErsegStatus::NullPointer
        );
        let bad = [0.5, f64::NAN, 1.0];
        assert_eq!(
            erseg_segment(text.as_ptr(), bad.as_ptr(), 3, &config, &mut path),
            ErsegStatus::InvalidConfig
        );
        let empty = c("   ");
        assert_eq!(
            erseg_segment(empty.as_ptr(), ptr::null(), 0, &config, &mut path),
            ErsegStatus::EmptyInput
        );
        let invalid = [0xffu8, 0];
        assert_eq!(
            erseg_segment(
                invalid.as_ptr().cast(),
                scores.as_ptr(),
                2,
                &config,
                &mut path
            ),
            ErsegStatus::InvalidUtf8
        );
        // NULL handles are tolerated by the accessors and free functions.
        assert_eq!(erseg_path_segment_count(ptr::null()), 0);
        assert!(erseg_path_score(ptr::null()).is_nan());
        erseg_path_free(ptr::null_mut());
        erseg_tree_free(ptr::null_mut());
        erseg_string_free(ptr::null_mut());
    }
}

#[test]
fn tree_handles() {
    let text = c("(S (NP (DT the) (NN dog)) (VP (VBD ran)))");
    let mut tree = ptr::null_mut();
    unsafe {
        assert_eq!(erseg_tree_parse(text.as_ptr(), &mut tree), ErsegStatus::Ok);
        assert_eq!(erseg_tree_leaf_count(tree), 3);
        let mut d = 0;
        assert_eq!(
            erseg_tree_leaf_distance(tree, 0, 1, &mut d),
            ErsegStatus::Ok
        );
        assert_eq!(d, 2);
        assert_eq!(
            erseg_tree_leaf_distance(tree, 1, 2, &mut d),
            ErsegStatus::Ok
        );
        assert_eq!(d, 4);
        assert_eq!(
            erseg_tree_leaf_distance(tree, 0, 9, &mut d),
            ErsegStatus::OutOfRange
        );

        let sentence = c("the dog ran");
        let mut len = 0;
        assert_eq!(
            erseg_tree_gap_scores(tree, sentence.as_ptr(), ptr::null_mut(), 0, &mut len),
            ErsegStatus::BufferTooSmall
        );
        assert_eq!(len, 3);
        let mut buf = vec![0.0; len];
        assert_eq!(
            erseg_tree_gap_scores(
                tree,
                sentence.as_ptr(),
                buf.as_mut_ptr(),
                buf.len(),
                &mut len
            ),
            ErsegStatus::Ok
        );
        assert_eq!(buf, [0.5, 1.0, 1.0]);
        let other = c("a cat ran");
        assert_eq!(
            erseg_tree_gap_scores(tree, other.as_ptr(), buf.as_mut_ptr(), buf.len(), &mut len),
            ErsegStatus::Alignment
        );
        erseg_tree_free(tree);

        let broken = c("(S (NP the");
        let mut t2 = ptr::null_mut();
        assert_eq!(
            erseg_tree_parse(broken.as_ptr(), &mut t2),
            ErsegStatus::TreeParse
        );
        assert!(last_error().unwrap().contains("offset"));
        assert!(t2.is_null());
    }
}

#[test]
fn evaluate_corpora() {
    let refs = c("a b c <seg> d e f\ng h <seg> i j\n");
    let hyps = c("a b <seg> c d e f\ng h <seg> i j\n");
    let mut m = ErsegMetrics::default();
    unsafe {
        assert_eq!(
            erseg_evaluate(refs.as_ptr(), refs.as_ptr(), ptr::null(), &mut m),
            ErsegStatus::Ok
        );
        assert_eq!((m.sentences, m.f1, m.bleu_nb), (2, 100.0, 100.0));
        assert!(m.sigma_defined && m.sigma == 100.0);
        assert_eq!(
            erseg_evaluate(hyps.as_ptr(), refs.as_ptr(), ptr::null(), &mut m),
            ErsegStatus::Ok
        );
        assert_eq!((m.precision, m.recall, m.f1), (50.0, 50.0, 50.0));
        assert!((m.sigma - m.bleu_br).abs() < 1e-9);

        let short = c("a b c\n");
        assert_eq!(
            erseg_evaluate(short.as_ptr(), refs.as_ptr(), ptr::null(), &mut m),
            ErsegStatus::Metric
        );
        let bad = c("<seg> a\n");
        assert_eq!(
            erseg_evaluate(bad.as_ptr(), refs.as_ptr(), ptr::null(), &mut m),
            ErsegStatus::Format
        );
        assert!(last_error().unwrap().starts_with("line 1"));
    }
}

#[test]
fn errors_are_thread_local() {
    let mut tree = ptr::null_mut();
    let broken = c("(");
    unsafe { erseg_tree_parse(broken.as_ptr(), &mut tree) };
    std::thread::spawn(|| assert!(last_error().is_none()))
        .join()
        .unwrap();
    assert!(last_error().is_some());
}

#[test]
fn version_matches_package() {
    let v = unsafe { CStr::from_ptr(erseg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

//! Word-level longest-common-subsequence alignment.

/// Monotone alignment between two word sequences.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    /// Aligned `(left, right)` index pairs, increasing in both.
    pub pairs: Vec<(usize, usize)>,
    pub left_to_right: Vec<Option<usize>>,
    pub right_to_left: Vec<Option<usize>>,
}

impl Alignment {
    pub fn is_identity(&self) -> bool {
        self.left_to_right.len() == self.right_to_left.len()
            && self.pairs.len() == self.left_to_right.len()
    }
}

/// LCS alignment. Among equally long alignments, matches are taken as early
/// as possible in both sequences.
pub fn lcs_align<A: AsRef<str>, B: AsRef<str>>(left: &[A], right: &[B]) -> Alignment {
    let (n, m) = (left.len(), right.len());
    // suffix[i][j] = LCS length of left[i..] and right[j..]
    let mut suffix = vec![vec![0u32; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i][j] = if left[i].as_ref() == right[j].as_ref() {
                suffix[i + 1][j + 1] + 1
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }
    let mut pairs = Vec::with_capacity(suffix[0][0] as usize);
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if left[i].as_ref() == right[j].as_ref() && suffix[i][j] == suffix[i + 1][j + 1] + 1 {
            pairs.push((i, j));
            i += 1;
            j += 1;
        } else if suffix[i + 1][j] >= suffix[i][j + 1] {
            i += 1;
        } else {
            j += 1;
        }
    }
    let mut left_to_right = vec![None; n];
    let mut right_to_left = vec![None; m];
    for &(a, b) in &pairs {
        left_to_right[a] = Some(b);
        right_to_left[b] = Some(a);
    }
    Alignment {
        pairs,
        left_to_right,
        right_to_left,
    }
}

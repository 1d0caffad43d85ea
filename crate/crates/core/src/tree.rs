//! Penn-style bracketed constituency trees and tree-distance gap scores.
//!
//! A preterminal such as `(DT the)` is a single leaf node labelled `DT`
//! carrying the word `the`. Bare tokens next to other children, as in
//! `(NP a b)`, become unlabelled leaf nodes. The root has depth 1.
//!
//! Gap scores come from the edge-count distance between the leaves on
//! either side of a whitespace gap, divided by the largest such distance in
//! the sentence. A whitespace gap that no leaf boundary coincides with (the
//! parser merged the words around it) can never carry a break and is scored
//! [`EXCLUDED_GAP`].

use std::collections::HashMap;
use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmenter::{GapScores, EXCLUDED_GAP};
use crate::text::Sentence;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub label: String,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
    /// Index into [`BracketedTree::leaves`] for leaf nodes.
    pub leaf: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaf {
    /// Surface form with bracket escapes resolved.
    pub word: String,
    pub node: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BracketedTree {
    nodes: Vec<Node>,
    leaves: Vec<Leaf>,
}

const ESCAPES: &[(&str, &str)] = &[
    ("-LRB-", "("),
    ("-RRB-", ")"),
    ("-LCB-", "{"),
    ("-RCB-", "}"),
    ("-LSB-", "["),
    ("-RSB-", "]"),
];

fn unescape(token: &str) -> String {
    ESCAPES
        .iter()
        .find(|(esc, _)| *esc == token)
        .map_or_else(|| token.to_owned(), |(_, lit)| (*lit).to_owned())
}

fn escape(word: &str) -> String {
    match word {
        "(" => "-LRB-".into(),
        ")" => "-RRB-".into(),
        _ => word.replace('(', "-LRB-").replace(')', "-RRB-"),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Open,
    Close,
    Atom(&'a str),
}

fn lex(text: &str) -> Vec<(usize, Tok<'_>)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        let delim = c == '(' || c == ')' || c.is_whitespace();
        if delim {
            if let Some(s) = start.take() {
                out.push((s, Tok::Atom(&text[s..i])));
            }
            match c {
                '(' => out.push((i, Tok::Open)),
                ')' => out.push((i, Tok::Close)),
                _ => {}
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, Tok::Atom(&text[s..])));
    }
    out
}

/// Intermediate parse result before flattening into the arena.
enum Raw {
    Node { label: String, children: Vec<Raw> },
    Word(String),
}

struct Parser<'a> {
    toks: Vec<(usize, Tok<'a>)>,
    pos: usize,
    len: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, offset: usize, message: &str) -> Error {
        Error::TreeParse {
            offset,
            message: message.to_owned(),
        }
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(o, _)| *o)
    }

    fn node(&mut self) -> Result<Raw> {
        let open_at = self.offset();
        match self.toks.get(self.pos) {
            Some((_, Tok::Open)) => self.pos += 1,
            _ => return Err(self.err(open_at, "expected '('")),
        }
        let label = match self.toks.get(self.pos) {
            Some((_, Tok::Atom(a))) => {
                self.pos += 1;
                (*a).to_owned()
            }
            _ => String::new(),
        };
        let mut children = Vec::new();
        loop {
            match self.toks.get(self.pos) {
                Some((_, Tok::Close)) => {
                    self.pos += 1;
                    break;
                }
                Some((_, Tok::Open)) => children.push(self.node()?),
                Some((_, Tok::Atom(a))) => {
                    children.push(Raw::Word(unescape(a)));
                    self.pos += 1;
                }
                None => return Err(self.err(open_at, "unclosed '('")),
            }
        }
        if children.is_empty() {
            return Err(self.err(open_at, "node has no children"));
        }
        Ok(Raw::Node { label, children })
    }
}

/// Parse one bracketed tree.
pub fn parse_bracketed(text: &str) -> Result<BracketedTree> {
    let toks = lex(text);
    if toks.is_empty() {
        return Err(Error::TreeParse {
            offset: 0,
            message: "empty input".into(),
        });
    }
    let mut parser = Parser {
        toks,
        pos: 0,
        len: text.len(),
    };
    let raw = parser.node()?;
    if parser.pos < parser.toks.len() {
        let (offset, tok) = &parser.toks[parser.pos];
        let message = if *tok == Tok::Close {
            "unbalanced ')'"
        } else {
            "trailing input after tree"
        };
        return Err(Error::TreeParse {
            offset: *offset,
            message: message.into(),
        });
    }
    let mut tree = BracketedTree {
        nodes: Vec::new(),
        leaves: Vec::new(),
    };
    tree.push(raw, None, 1);
    Ok(tree)
}

impl std::str::FromStr for BracketedTree {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_bracketed(s)
    }
}

impl BracketedTree {
    fn push(&mut self, raw: Raw, parent: Option<usize>, depth: usize) -> usize {
        let id = self.nodes.len();
        match raw {
            Raw::Word(word) => {
                self.add_leaf(id, String::new(), word, parent, depth);
            }
            Raw::Node {
                label,
                mut children,
            } => {
                if children.len() == 1 && matches!(children[0], Raw::Word(_)) {
                    let Some(Raw::Word(word)) = children.pop() else {
                        unreachable!()
                    };
                    self.add_leaf(id, label, word, parent, depth);
                } else {
                    self.nodes.push(Node {
                        label,
                        parent,
                        children: Vec::with_capacity(children.len()),
                        depth,
                        leaf: None,
                    });
                    for child in children {
                        let c = self.push(child, Some(id), depth + 1);
                        self.nodes[id].children.push(c);
                    }
                }
            }
        }
        id
    }

    fn add_leaf(
        &mut self,
        id: usize,
        label: String,
        word: String,
        parent: Option<usize>,
        depth: usize,
    ) {
        self.nodes.push(Node {
            label,
            parent,
            children: Vec::new(),
            depth,
            leaf: Some(self.leaves.len()),
        });
        self.leaves.push(Leaf { word, node: id });
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaves(&self) -> &[Leaf] {
        &self.leaves
    }

    pub fn leaf_words(&self) -> Vec<&str> {
        self.leaves.iter().map(|l| l.word.as_str()).collect()
    }

    pub fn leaf_depth(&self, leaf: usize) -> Option<usize> {
        self.leaves.get(leaf).map(|l| self.nodes[l.node].depth)
    }

    /// Edges on the path between two leaves.
    pub fn leaf_distance(&self, i: usize, j: usize) -> Result<usize> {
        let len = self.leaves.len();
        for index in [i, j] {
            if index >= len {
                return Err(Error::LeafIndex { index, len });
            }
        }
        let (mut a, mut b) = (self.leaves[i].node, self.leaves[j].node);
        let mut dist = 0;
        while a != b {
            let (da, db) = (self.nodes[a].depth, self.nodes[b].depth);
            if da >= db {
                a = self.nodes[a].parent.expect("non-root has a parent");
                dist += 1;
            }
            if db >= da {
                b = self.nodes[b].parent.expect("non-root has a parent");
                dist += 1;
            }
        }
        Ok(dist)
    }

    /// Byte span of every leaf in `sentence.raw`.
    ///
    /// Matching ignores whitespace, so a leaf may span a whitespace gap when
    /// the parser merged words.
    pub fn align(&self, sentence: &Sentence) -> Result<Vec<Range<usize>>> {
        let raw = sentence.raw.as_str();
        let mut chars = raw
            .char_indices()
            .filter(|(_, c)| !c.is_whitespace())
            .peekable();
        let mut spans = Vec::with_capacity(self.leaves.len());
        for leaf in &self.leaves {
            let mut start = None;
            let mut end = 0;
            if leaf.word == "``" || leaf.word == "''" {
                if let Some(&(at, '"')) = chars.peek() {
                    chars.next();
                    spans.push(at..at + 1);
                    continue;
                }
            }
            for expected in leaf.word.chars() {
                match chars.next() {
                    Some((at, c)) if c == expected => {
                        start.get_or_insert(at);
                        end = at + c.len_utf8();
                    }
                    Some((at, c)) => {
                        return Err(Error::Alignment {
                            offset: at,
                            message: format!(
                                "leaf {:?} expects {expected:?}, text has {c:?}",
                                leaf.word
                            ),
                        })
                    }
                    None => {
                        return Err(Error::Alignment {
                            offset: raw.len(),
                            message: format!("text ends inside leaf {:?}", leaf.word),
                        })
                    }
                }
            }
            spans.push(start.unwrap_or(end)..end);
        }
        if let Some((at, _)) = chars.next() {
            return Err(Error::Alignment {
                offset: at,
                message: "text continues after the last leaf".into(),
            });
        }
        Ok(spans)
    }
}

impl fmt::Display for BracketedTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_node(tree: &BracketedTree, id: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let node = &tree.nodes[id];
            if let Some(leaf) = node.leaf {
                let word = escape(&tree.leaves[leaf].word);
                return if node.label.is_empty() && node.parent.is_some() {
                    write!(f, "{word}")
                } else {
                    write!(f, "({} {word})", node.label)
                };
            }
            write!(f, "(")?;
            f.write_str(&node.label)?;
            for (k, &child) in node.children.iter().enumerate() {
                if k > 0 || !node.label.is_empty() {
                    write!(f, " ")?;
                }
                write_node(tree, child, f)?;
            }
            write!(f, ")")
        }
        write_node(self, 0, f)
    }
}

/// Whether each inter-token gap (`len - 1` of them) coincides with a leaf
/// boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapValidity {
    pub valid: Vec<bool>,
}

/// For each interior gap, the leaf ending exactly at the left token's end.
fn boundary_leaves(sentence: &Sentence, spans: &[Range<usize>]) -> Vec<Option<usize>> {
    let by_end: HashMap<usize, usize> = spans.iter().enumerate().map(|(i, s)| (s.end, i)).collect();
    let n = sentence.len();
    (0..n.saturating_sub(1))
        .map(|t| {
            let leaf = *by_end.get(&sentence.token_spans[t].end)?;
            (leaf + 1 < spans.len()).then_some(leaf)
        })
        .collect()
}

pub fn gap_validity(sentence: &Sentence, tree: &BracketedTree) -> Result<GapValidity> {
    let spans = tree.align(sentence)?;
    Ok(GapValidity {
        valid: boundary_leaves(sentence, &spans)
            .into_iter()
            .map(|l| l.is_some())
            .collect(),
    })
}

/// Normalized tree-distance gap scores for `sentence`.
pub fn tree_gap_scores(sentence: &Sentence, tree: &BracketedTree) -> Result<GapScores> {
    if sentence.is_empty() {
        return Err(Error::EmptyInput);
    }
    let spans = tree.align(sentence)?;
    let distances: Vec<Option<usize>> = boundary_leaves(sentence, &spans)
        .into_iter()
        .map(|leaf| leaf.map(|l| tree.leaf_distance(l, l + 1)).transpose())
        .collect::<Result<_>>()?;
    let max = distances.iter().flatten().copied().max().unwrap_or(0);
    let mut scores: Vec<f64> = distances
        .into_iter()
        .map(|d| match d {
            None => EXCLUDED_GAP,
            Some(_) if max == 0 => 1.0,
            Some(d) => d as f64 / max as f64,
        })
        .collect();
    scores.push(1.0);
    GapScores::new(scores)
}

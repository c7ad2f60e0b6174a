//! LZ78 phrase construction for a string set.
//!
//! Building happens in three passes over the input:
//!
//! 1. [`initial_parse`] runs LZ78 over the concatenation of all strings. A
//!    string boundary terminates the current phrase, so every string starts
//!    with a fresh phrase. The cut phrase is always a path to an existing
//!    node, so nothing is inserted for it.
//! 2. [`seed_alphabet`] makes every byte of the input a one-letter phrase so
//!    that greedy matching can always advance.
//! 3. [`reparse`] decomposes every string greedily into the longest phrases of
//!    the frozen trie. Phrases no string uses are dropped and the survivors are
//!    numbered by lexicographic rank.
//!
//! After step 3 the parse of a string depends only on the string and the
//! phrase set, never on the other strings, which is what lets a query string be
//! parsed the same way at lookup time.

use std::collections::HashSet;

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// A set of distinct, non-empty byte strings in caller order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputSet {
    strings: Vec<Vec<u8>>,
    duplicates_removed: usize,
}

impl InputSet {
    /// Keeps the first occurrence of every string. Fails on an empty set or an
    /// empty string.
    pub fn new<I, S>(strings: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<Vec<u8>>,
    {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        let mut duplicates_removed = 0;
        for (i, s) in strings.into_iter().enumerate() {
            let s = s.into();
            if s.is_empty() {
                return Err(Error::InvalidInput(format!("string {i} is empty")));
            }
            if seen.contains(s.as_slice()) {
                duplicates_removed += 1;
                continue;
            }
            seen.insert(s.clone());
            out.push(s);
        }
        if out.is_empty() {
            return Err(Error::InvalidInput("input set contains no strings".into()));
        }
        Ok(InputSet { strings: out, duplicates_removed })
    }

    pub fn strings(&self) -> &[Vec<u8>] {
        &self.strings
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    /// Combined length of all strings in bytes.
    pub fn total_bytes(&self) -> usize {
        self.strings.iter().map(Vec::len).sum()
    }

    pub fn duplicates_removed(&self) -> usize {
        self.duplicates_removed
    }

    /// Distinct bytes occurring in the input, ascending.
    pub fn alphabet(&self) -> Vec<u8> {
        let mut present = [false; 256];
        for s in &self.strings {
            for &b in s {
                present[b as usize] = true;
            }
        }
        (0..=255u8).filter(|&b| present[b as usize]).collect()
    }
}

const ROOT: u32 = 0;

#[derive(Debug, Clone)]
struct TrieNode {
    parent: u32,
    byte: u8,
    phrase: bool,
}

/// Mutable byte trie holding the phrase dictionary during construction.
#[derive(Debug, Clone)]
pub struct BuildTrie {
    nodes: Vec<TrieNode>,
    children: FxHashMap<(u32, u8), u32>,
    phrases: usize,
    seeded: usize,
}

impl Default for BuildTrie {
    fn default() -> Self {
        BuildTrie {
            nodes: vec![TrieNode { parent: ROOT, byte: 0, phrase: false }],
            children: FxHashMap::default(),
            phrases: 0,
            seeded: 0,
        }
    }
}

impl BuildTrie {
    /// Nodes excluding the root.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases
    }

    /// Single letters added by [`seed_alphabet`].
    pub fn seeded_letters(&self) -> usize {
        self.seeded
    }

    #[inline]
    fn child(&self, node: u32, byte: u8) -> Option<u32> {
        self.children.get(&(node, byte)).copied()
    }

    fn add_phrase(&mut self, parent: u32, byte: u8) -> u32 {
        let id = self.nodes.len() as u32;
        self.nodes.push(TrieNode { parent, byte, phrase: true });
        self.children.insert((parent, byte), id);
        self.phrases += 1;
        id
    }

    fn find(&self, s: &[u8]) -> Option<u32> {
        s.iter().try_fold(ROOT, |node, &b| self.child(node, b))
    }

    pub fn contains_phrase(&self, s: &[u8]) -> bool {
        self.find(s).is_some_and(|n| n != ROOT && self.nodes[n as usize].phrase)
    }

    fn spell(&self, mut node: u32, buf: &mut Vec<u8>) {
        buf.clear();
        while node != ROOT {
            let n = &self.nodes[node as usize];
            buf.push(n.byte);
            node = n.parent;
        }
        buf.reverse();
    }

    /// All phrase strings in lexicographic order.
    pub fn phrases(&self) -> Vec<Vec<u8>> {
        let mut buf = Vec::new();
        let mut out: Vec<Vec<u8>> = (1..self.nodes.len() as u32)
            .filter(|&n| self.nodes[n as usize].phrase)
            .map(|n| {
                self.spell(n, &mut buf);
                buf.clone()
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Deepest node reachable by matching a prefix of `s`, with the match length.
    #[inline]
    fn longest_match(&self, s: &[u8]) -> (u32, usize) {
        let mut node = ROOT;
        let mut len = 0;
        while let Some(&b) = s.get(len) {
            match self.child(node, b) {
                Some(c) => {
                    node = c;
                    len += 1;
                }
                None => break,
            }
        }
        (node, len)
    }
}

/// LZ78 over the concatenated input with a forced phrase break at every string end.
pub fn initial_parse(input: &InputSet) -> BuildTrie {
    initial_parse_impl(input, None)
}

/// Like [`initial_parse`], also returning the phrase lengths of every string's parse.
pub fn initial_parse_traced(input: &InputSet) -> (BuildTrie, Vec<Vec<usize>>) {
    let mut trace = Vec::with_capacity(input.len());
    let trie = initial_parse_impl(input, Some(&mut trace));
    (trie, trace)
}

fn initial_parse_impl(input: &InputSet, mut trace: Option<&mut Vec<Vec<usize>>>) -> BuildTrie {
    let mut trie = BuildTrie::default();
    for s in input.strings() {
        let mut pieces = Vec::new();
        let mut pos = 0;
        while pos < s.len() {
            let (node, len) = trie.longest_match(&s[pos..]);
            if pos + len < s.len() {
                trie.add_phrase(node, s[pos + len]);
                pieces.push(len + 1);
                pos += len + 1;
            } else {
                // Cut by the string boundary; `node` is already a phrase.
                pieces.push(len);
                pos += len;
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(pieces);
        }
    }
    trie
}

/// Inserts every byte of the input alphabet as a one-letter phrase if missing.
pub fn seed_alphabet(trie: &mut BuildTrie, input: &InputSet) {
    for b in input.alphabet() {
        if trie.child(ROOT, b).is_none() {
            trie.add_phrase(ROOT, b);
            trie.seeded += 1;
        }
    }
}

/// Lexicographically sorted, distinct phrase strings. A phrase's ID is its rank.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhraseSet {
    phrases: Vec<Vec<u8>>,
}

impl PhraseSet {
    pub fn new(phrases: Vec<Vec<u8>>) -> Result<Self> {
        if let Some(w) = phrases.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Construction(format!(
                "phrases not strictly sorted at {:?}",
                String::from_utf8_lossy(&w[1])
            )));
        }
        if phrases.first().is_some_and(|p| p.is_empty()) {
            return Err(Error::Construction("empty phrase".into()));
        }
        Ok(PhraseSet { phrases })
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn get(&self, id: u32) -> Option<&[u8]> {
        self.phrases.get(id as usize).map(Vec::as_slice)
    }

    pub fn as_slice(&self) -> &[Vec<u8>] {
        &self.phrases
    }

    pub fn into_vec(self) -> Vec<Vec<u8>> {
        self.phrases
    }

    /// Longest phrase that is a prefix of `q`, as (id, length).
    pub fn longest_prefix(&self, q: &[u8]) -> Option<(u32, usize)> {
        let mut limit = q.len();
        loop {
            let key = &q[..limit];
            // Largest phrase <= key.
            let idx = self.phrases.partition_point(|p| p.as_slice() <= key).checked_sub(1)?;
            let p = &self.phrases[idx];
            let lcp = common_prefix(p, key);
            if lcp == p.len() {
                return Some((idx as u32, lcp));
            }
            // Any phrase prefixing `key` also prefixes `p`, so it fits in `lcp` bytes.
            limit = lcp;
        }
    }

    /// Repeatedly strips the longest phrase prefix. `None` if some suffix of `s`
    /// starts with no phrase.
    pub fn greedy_parse(&self, s: &[u8]) -> Option<Vec<u32>> {
        let mut out = Vec::new();
        let mut pos = 0;
        while pos < s.len() {
            let (id, len) = self.longest_prefix(&s[pos..])?;
            out.push(id);
            pos += len;
        }
        Some(out)
    }

    /// Concatenation of the phrases named by `ids`.
    pub fn expand(&self, ids: &[u32]) -> Vec<u8> {
        ids.iter().flat_map(|&id| self.phrases[id as usize].iter().copied()).collect()
    }
}

pub(crate) fn common_prefix(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

/// One input string expressed as phrase IDs.
pub type Parsing = Vec<u32>;

/// Greedy reparse of every input string against the frozen trie, then pruning.
pub fn reparse(trie: &BuildTrie, input: &InputSet) -> Result<(PhraseSet, Vec<Parsing>)> {
    let mut node_parsings: Vec<Vec<u32>> = Vec::with_capacity(input.len());
    let mut used = vec![false; trie.nodes.len()];
    for s in input.strings() {
        let mut pos = 0;
        let mut parse = Vec::new();
        while pos < s.len() {
            let (node, len) = trie.longest_match(&s[pos..]);
            if len == 0 {
                return Err(Error::Internal(format!(
                    "greedy parse stuck on byte {:#04x}; alphabet not seeded",
                    s[pos]
                )));
            }
            debug_assert!(trie.nodes[node as usize].phrase);
            used[node as usize] = true;
            parse.push(node);
            pos += len;
        }
        node_parsings.push(parse);
    }

    let mut buf = Vec::new();
    let mut kept: Vec<(Vec<u8>, u32)> = used
        .iter()
        .enumerate()
        .filter(|&(_, &u)| u)
        .map(|(n, _)| {
            trie.spell(n as u32, &mut buf);
            (buf.clone(), n as u32)
        })
        .collect();
    kept.sort_unstable();
    let mut rank = vec![u32::MAX; trie.nodes.len()];
    for (id, (_, node)) in kept.iter().enumerate() {
        rank[*node as usize] = id as u32;
    }
    let parsings = node_parsings
        .into_iter()
        .map(|p| p.into_iter().map(|n| rank[n as usize]).collect())
        .collect();
    let phrases = PhraseSet::new(kept.into_iter().map(|(s, _)| s).collect())?;
    Ok((phrases, parsings))
}

/// Size of the parse before and after reparsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildStats {
    pub nodes_before: usize,
    pub nodes_after: usize,
    pub phrases_before: usize,
    pub phrases_after: usize,
    /// Phrases created by the initial parse; each is used exactly once there.
    pub parsing_before: usize,
    pub parsing_after: usize,
    /// Pieces of the initial parse including boundary-cut repeats, which the
    /// counts above exclude.
    pub pieces_before: usize,
    pub strings: usize,
}

impl BuildStats {
    /// Mean number of phrases per string after reparsing.
    pub fn mean_parse_len(&self) -> f64 {
        if self.strings == 0 {
            0.0
        } else {
            self.parsing_after as f64 / self.strings as f64
        }
    }

    /// Table with one row each for nodes, phrases and parsing size.
    pub fn table(&self) -> String {
        format!(
            "{:<10} {:>12} {:>12}\n{:<10} {:>12} {:>12}\n{:<10} {:>12} {:>12}\n{:<10} {:>12} {:>12}\n",
            "", "before", "after",
            "#Nodes", self.nodes_before, self.nodes_after,
            "#Phrases", self.phrases_before, self.phrases_after,
            "#Parsing", self.parsing_before, self.parsing_after,
        )
    }
}

/// `before` must be the trie as built by [`initial_parse`] (seeded letters are
/// discounted). `nodes_after` counts the distinct non-empty prefixes of the
/// surviving phrases, i.e. the nodes of a trie storing exactly them.
pub fn build_stats(before: &BuildTrie, phrases: &PhraseSet, parsings: &[Parsing]) -> BuildStats {
    let initial = before.phrase_count() - before.seeded_letters();
    let mut nodes_after = 0;
    let mut prev: &[u8] = &[];
    for p in phrases.as_slice() {
        nodes_after += p.len() - common_prefix(prev, p);
        prev = p;
    }
    BuildStats {
        nodes_before: before.node_count() - before.seeded_letters(),
        nodes_after,
        phrases_before: initial,
        phrases_after: phrases.len(),
        parsing_before: initial,
        parsing_after: parsings.iter().map(Vec::len).sum(),
        pieces_before: 0,
        strings: parsings.len(),
    }
}

/// Output of the whole phrase construction pipeline.
#[derive(Debug, Clone)]
pub struct LzParse {
    pub phrases: PhraseSet,
    pub parsings: Vec<Parsing>,
    pub stats: BuildStats,
}

pub fn build(input: &InputSet) -> Result<LzParse> {
    let (mut trie, trace) = initial_parse_traced(input);
    let pieces_before = trace.iter().map(Vec::len).sum();
    drop(trace);
    let nodes_before = trie.node_count();
    seed_alphabet(&mut trie, input);
    let (phrases, parsings) = reparse(&trie, input)?;
    let mut stats = build_stats(&trie, &phrases, &parsings);
    debug_assert_eq!(stats.nodes_before, nodes_before);
    stats.pieces_before = pieces_before;
    Ok(LzParse { phrases, parsings, stats })
}

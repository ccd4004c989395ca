//! Pointer-based Aho-Corasick automaton.
//!
//! This is both the construction input for the double-array and the
//! reference matcher the double-array is tested against.

use std::collections::BTreeMap;
use std::collections::VecDeque;

use crate::codemap::{Encoder, INVALID_LABEL};
use crate::dictionary::{Dictionary, Occurrence};
use crate::error::Result;
use crate::matcher::MatchStats;

pub const ROOT: u32 = 0;

/// Prefix tree over the label sequences of a dictionary.
///
/// States are numbered in breadth-first order with label-sorted children,
/// so the root is 0 and every parent has a smaller id than its children.
#[derive(Clone, Debug)]
pub struct Trie {
    encoder: Encoder,
    pattern_lens: Vec<u32>,
    edges: Vec<Vec<(u32, u32)>>,
    output: Vec<Option<u32>>,
    depth: Vec<u32>,
}

impl Trie {
    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    pub fn transitions(&self, s: u32) -> &[(u32, u32)] {
        &self.edges[s as usize]
    }

    /// Pattern spelled exactly by `s`, if any.
    pub fn output(&self, s: u32) -> Option<u32> {
        self.output[s as usize]
    }

    pub fn depth(&self, s: u32) -> u32 {
        self.depth[s as usize]
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    #[inline]
    pub fn goto(&self, s: u32, label: u32) -> Option<u32> {
        let edges = &self.edges[s as usize];
        edges
            .binary_search_by_key(&label, |&(c, _)| c)
            .ok()
            .map(|i| edges[i].1)
    }
}

pub fn build_trie(dict: &Dictionary, encoder: Encoder) -> Trie {
    // Insertion-order trie first, then renumber breadth-first.
    let mut children: Vec<BTreeMap<u32, u32>> = vec![BTreeMap::new()];
    let mut terminal: Vec<Option<u32>> = vec![None];
    for (id, pattern) in dict.patterns().iter().enumerate() {
        let mut s = 0usize;
        for label in encoder.pattern_labels(pattern) {
            let next = children.len() as u32;
            let t = *children[s].entry(label).or_insert(next);
            if t == next {
                children.push(BTreeMap::new());
                terminal.push(None);
            }
            s = t as usize;
        }
        terminal[s] = Some(id as u32);
    }

    let n = children.len();
    let mut new_id = vec![u32::MAX; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0u32]);
    new_id[0] = 0;
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for &t in children[s as usize].values() {
            new_id[t as usize] = (order.len() + queue.len()) as u32;
            queue.push_back(t);
        }
    }

    let mut edges = vec![Vec::new(); n];
    let mut output = vec![None; n];
    let mut depth = vec![0u32; n];
    for &old in &order {
        let s = new_id[old as usize] as usize;
        output[s] = terminal[old as usize];
        edges[s] = children[old as usize]
            .iter()
            .map(|(&c, &t)| (c, new_id[t as usize]))
            .collect();
        for &(_, t) in &edges[s] {
            depth[t as usize] = depth[s] + 1;
        }
    }

    Trie {
        encoder,
        pattern_lens: dict.byte_lens(),
        edges,
        output,
        depth,
    }
}

/// Trie plus failure function and output sets.
#[derive(Clone, Debug)]
pub struct AcAutomaton {
    trie: Trie,
    fail: Vec<u32>,
    outsets: Vec<Vec<u32>>,
}

pub fn build_failures(trie: Trie) -> AcAutomaton {
    let n = trie.num_states();
    let mut ac = AcAutomaton {
        fail: vec![ROOT; n],
        outsets: vec![Vec::new(); n],
        trie,
    };
    // Ids are breadth-first, so walking them in order visits parents first.
    for s in 0..n as u32 {
        for i in 0..ac.trie.edges[s as usize].len() {
            let (c, t) = ac.trie.edges[s as usize][i];
            let f = if s == ROOT {
                ROOT
            } else {
                ac.delta_star(ac.fail[s as usize], c)
            };
            ac.fail[t as usize] = f;
            let mut out = Vec::with_capacity(1 + ac.outsets[f as usize].len());
            out.extend(ac.trie.output[t as usize]);
            out.extend_from_slice(&ac.outsets[f as usize]);
            ac.outsets[t as usize] = out;
        }
    }
    ac
}

impl AcAutomaton {
    pub fn new(dict: &Dictionary, encoder: Encoder) -> Self {
        build_failures(build_trie(dict, encoder))
    }

    pub fn trie(&self) -> &Trie {
        &self.trie
    }

    pub fn num_states(&self) -> usize {
        self.trie.num_states()
    }

    pub fn fail(&self, s: u32) -> u32 {
        self.fail[s as usize]
    }

    /// Output set: own pattern first, then the failure closure nearest first.
    pub fn outset(&self, s: u32) -> &[u32] {
        &self.outsets[s as usize]
    }

    pub fn encoder(&self) -> &Encoder {
        &self.trie.encoder
    }

    pub fn pattern_lens(&self) -> &[u32] {
        &self.trie.pattern_lens
    }

    pub fn num_patterns(&self) -> usize {
        self.trie.pattern_lens.len()
    }

    /// Extended transition: follows failure links until a transition on
    /// `label` exists, or returns the root.
    pub fn delta_star(&self, s: u32, label: u32) -> u32 {
        self.delta_star_counted(s, label, &mut MatchStats::default())
    }

    pub fn delta_star_counted(&self, mut s: u32, label: u32, stats: &mut MatchStats) -> u32 {
        loop {
            if let Some(t) = self.trie.goto(s, label) {
                stats.forward_transitions += 1;
                return t;
            }
            if s == ROOT {
                return ROOT;
            }
            s = self.fail[s as usize];
            stats.failure_hops += 1;
        }
    }

    pub fn find_overlapping(&self, text: &[u8]) -> Result<Vec<Occurrence>> {
        self.find_overlapping_with_stats(text).map(|(occ, _)| occ)
    }

    pub fn find_overlapping_with_stats(
        &self,
        text: &[u8],
    ) -> Result<(Vec<Occurrence>, MatchStats)> {
        let units = self.encoder().encode(text)?;
        let mut stats = MatchStats::default();
        let mut out = Vec::new();
        let mut s = ROOT;
        let mut end = 0usize;
        for unit in units {
            debug_assert!(unit.label != INVALID_LABEL || self.encoder().mapping().is_some());
            s = self.delta_star_counted(s, unit.label, &mut stats);
            stats.units_consumed += 1;
            end += unit.width as usize;
            for &k in self.outset(s) {
                let len = self.trie.pattern_lens[k as usize] as usize;
                out.push(Occurrence::new(k, end - len, end));
            }
        }
        stats.occurrences = out.len() as u64;
        Ok((out, stats))
    }
}

/// Quadratic reference matcher: byte comparison at every text position.
pub fn naive_find(dict: &Dictionary, text: &[u8]) -> Vec<Occurrence> {
    let mut out = Vec::new();
    for (k, p) in dict.patterns().iter().enumerate() {
        let p = p.as_bytes();
        if p.len() > text.len() {
            continue;
        }
        for start in 0..=text.len() - p.len() {
            if &text[start..start + p.len()] == p {
                out.push(Occurrence::new(k as u32, start, start + p.len()));
            }
        }
    }
    out.sort_unstable_by_key(|o| (o.end, o.pattern_id));
    out
}

//! Encodings of the output function.
//!
//! * `Simple` stores every output set contiguously, terminated by a TERM bit.
//! * `Shared` is `Simple` where a set that is a suffix of an already written
//!   set along the same failure chain points into that set instead.
//! * `Forest` stores one node per pattern; a set is read by climbing parent
//!   links from the node of the nearest output state.

use std::fmt;
use std::str::FromStr;

use crate::error::{DaacError, Result};
use crate::nfa::AcAutomaton;

/// OUTPOS value for states with an empty output set.
pub const NO_OUTPUT: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StoreKind {
    Simple,
    Shared,
    Forest,
}

impl StoreKind {
    pub const ALL: [StoreKind; 3] = [StoreKind::Simple, StoreKind::Shared, StoreKind::Forest];

    pub fn name(self) -> &'static str {
        match self {
            StoreKind::Simple => "simple",
            StoreKind::Shared => "shared",
            StoreKind::Forest => "forest",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for StoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown output store `{s}`"))
    }
}

/// OUTPUT array with a parallel TERM bit vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TermStore {
    output: Vec<u32>,
    term: Vec<u64>,
    pattern_lens: Vec<u32>,
}

impl TermStore {
    fn new(pattern_lens: Vec<u32>) -> Self {
        Self {
            output: Vec::new(),
            term: Vec::new(),
            pattern_lens,
        }
    }

    pub(crate) fn from_parts(
        output: Vec<u32>,
        term_bits: Vec<bool>,
        pattern_lens: Vec<u32>,
    ) -> Result<Self> {
        if output.len() != term_bits.len() {
            return Err(DaacError::Corrupt("OUTPUT/TERM length mismatch".into()));
        }
        if output.last().is_some() && !term_bits[term_bits.len() - 1] {
            return Err(DaacError::Corrupt("last OUTPUT entry lacks TERM".into()));
        }
        if let Some(&k) = output.iter().find(|&&k| k as usize >= pattern_lens.len()) {
            return Err(DaacError::Corrupt(format!("pattern id {k} out of range")));
        }
        let mut store = Self::new(pattern_lens);
        for (k, t) in output.into_iter().zip(term_bits) {
            store.push(k, t);
        }
        Ok(store)
    }

    fn push(&mut self, pattern: u32, term: bool) {
        let i = self.output.len();
        if i % 64 == 0 {
            self.term.push(0);
        }
        if term {
            self.term[i / 64] |= 1 << (i % 64);
        }
        self.output.push(pattern);
    }

    fn push_set(&mut self, set: &[u32]) -> u32 {
        let start = self.output.len() as u32;
        for (i, &k) in set.iter().enumerate() {
            self.push(k, i + 1 == set.len());
        }
        start
    }

    #[inline]
    pub fn is_term(&self, i: usize) -> bool {
        self.term[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn output(&self) -> &[u32] {
        &self.output
    }

    pub fn pattern_lens(&self) -> &[u32] {
        &self.pattern_lens
    }

    pub(crate) fn term_words(&self) -> &[u64] {
        &self.term
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(C)]
pub struct ForestNode {
    pub pattern: u32,
    /// Pattern length in bytes.
    pub len: u32,
    /// Parent node index, or the node count for tree roots.
    pub parent: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestStore {
    nodes: Vec<ForestNode>,
}

impl ForestStore {
    pub(crate) fn from_nodes(nodes: Vec<ForestNode>, num_patterns: usize) -> Result<Self> {
        let n = nodes.len();
        if n != num_patterns {
            return Err(DaacError::Corrupt(format!(
                "forest has {n} nodes for {num_patterns} patterns"
            )));
        }
        let mut seen = vec![false; n];
        for node in &nodes {
            if node.parent as usize > n {
                return Err(DaacError::Corrupt("forest parent out of range".into()));
            }
            match seen.get_mut(node.pattern as usize) {
                Some(s) if !*s => *s = true,
                _ => {
                    return Err(DaacError::Corrupt(format!(
                        "forest pattern {} invalid or repeated",
                        node.pattern
                    )))
                }
            }
        }
        // Acyclic: colour nodes by the walk that first reached them.
        let mut mark = vec![u32::MAX; n];
        for start in 0..n {
            let mut i = start;
            while i < n && mark[i] == u32::MAX {
                mark[i] = start as u32;
                i = nodes[i].parent as usize;
            }
            if i < n && mark[i] == start as u32 {
                return Err(DaacError::Corrupt("cycle in output forest".into()));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[ForestNode] {
        &self.nodes
    }

    pub fn sentinel(&self) -> u32 {
        self.nodes.len() as u32
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OutputStore {
    Simple(TermStore),
    Shared(TermStore),
    Forest(ForestStore),
}

impl OutputStore {
    pub fn kind(&self) -> StoreKind {
        match self {
            OutputStore::Simple(_) => StoreKind::Simple,
            OutputStore::Shared(_) => StoreKind::Shared,
            OutputStore::Forest(_) => StoreKind::Forest,
        }
    }

    /// Number of entries in OUTPUT.
    pub fn len(&self) -> usize {
        match self {
            OutputStore::Simple(s) | OutputStore::Shared(s) => s.output.len(),
            OutputStore::Forest(f) => f.nodes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Bytes of OUTPUT+TERM, or of the forest nodes (id, length, parent).
    pub fn heap_bytes(&self) -> usize {
        match self {
            OutputStore::Simple(s) | OutputStore::Shared(s) => {
                s.output.len() * 4 + s.term.len() * 8
            }
            OutputStore::Forest(f) => f.nodes.len() * std::mem::size_of::<ForestNode>(),
        }
    }

    /// Bytes of the separate pattern length table (term stores only).
    pub fn lens_bytes(&self) -> usize {
        match self {
            OutputStore::Simple(s) | OutputStore::Shared(s) => s.pattern_lens.len() * 4,
            OutputStore::Forest(_) => 0,
        }
    }

    /// Yields `(pattern id, byte length)` for every member of the set at `pos`.
    pub fn emit(&self, pos: u32) -> Result<Emit<'_>> {
        if pos != NO_OUTPUT && pos as usize >= self.len() {
            return Err(DaacError::OutputRange {
                pos,
                len: self.len(),
            });
        }
        Ok(self.emit_unchecked(pos))
    }

    #[inline]
    pub(crate) fn emit_unchecked(&self, pos: u32) -> Emit<'_> {
        if pos == NO_OUTPUT {
            return Emit::Empty;
        }
        match self {
            OutputStore::Simple(s) | OutputStore::Shared(s) => Emit::Term {
                store: s,
                i: pos as usize,
            },
            OutputStore::Forest(f) => Emit::Forest {
                nodes: &f.nodes,
                i: pos as usize,
            },
        }
    }
}

pub enum Emit<'a> {
    Empty,
    Term { store: &'a TermStore, i: usize },
    Forest { nodes: &'a [ForestNode], i: usize },
}

impl Iterator for Emit<'_> {
    type Item = (u32, u32);

    #[inline]
    fn next(&mut self) -> Option<(u32, u32)> {
        match self {
            Emit::Empty => None,
            Emit::Term { store, i } => {
                let k = store.output[*i];
                let item = (k, store.pattern_lens[k as usize]);
                if store.is_term(*i) {
                    *self = Emit::Empty;
                } else {
                    *i += 1;
                }
                Some(item)
            }
            Emit::Forest { nodes, i } => {
                let node = nodes.get(*i)?;
                *i = node.parent as usize;
                Some((node.pattern, node.len))
            }
        }
    }
}

/// Nearest output state in each state's failure closure.
fn nearest_outputs(ac: &AcAutomaton) -> Vec<u32> {
    let n = ac.num_states();
    let mut nearest = vec![NO_OUTPUT; n];
    // Breadth-first ids: fail(s) < s.
    for s in 1..n as u32 {
        nearest[s as usize] = if ac.trie().output(s).is_some() {
            s
        } else {
            nearest[ac.fail(s) as usize]
        };
    }
    nearest
}

fn fill_from_nearest(outpos: &mut [u32], nearest: &[u32]) {
    for s in 0..outpos.len() {
        if nearest[s] != NO_OUTPUT {
            outpos[s] = outpos[nearest[s] as usize];
        }
    }
}

pub fn build_simple(ac: &AcAutomaton) -> (OutputStore, Vec<u32>) {
    let mut store = TermStore::new(ac.pattern_lens().to_vec());
    let n = ac.num_states();
    let mut outpos = vec![NO_OUTPUT; n];
    for s in 0..n as u32 {
        if ac.trie().output(s).is_some() {
            outpos[s as usize] = store.push_set(ac.outset(s));
        }
    }
    fill_from_nearest(&mut outpos, &nearest_outputs(ac));
    (OutputStore::Simple(store), outpos)
}

pub fn build_shared(ac: &AcAutomaton) -> (OutputStore, Vec<u32>) {
    let mut store = TermStore::new(ac.pattern_lens().to_vec());
    let n = ac.num_states();
    let nearest = nearest_outputs(ac);
    let mut outpos = vec![NO_OUTPUT; n];
    let mut order: Vec<u32> = (0..n as u32)
        .filter(|&s| ac.trie().output(s).is_some())
        .collect();
    order.sort_by_key(|&s| (std::cmp::Reverse(ac.outset(s).len()), s));
    for s in order {
        if outpos[s as usize] != NO_OUTPUT {
            continue;
        }
        let set = ac.outset(s);
        let start = store.push_set(set);
        outpos[s as usize] = start;
        // h(s) = own pattern followed by h(next output state up the chain),
        // so every such set is a literal suffix of this region.
        let mut t = nearest[ac.fail(s) as usize];
        while t != NO_OUTPUT && outpos[t as usize] == NO_OUTPUT {
            let skip = set.len() - ac.outset(t).len();
            debug_assert_eq!(&set[skip..], ac.outset(t));
            outpos[t as usize] = start + skip as u32;
            t = nearest[ac.fail(t) as usize];
        }
    }
    fill_from_nearest(&mut outpos, &nearest);
    (OutputStore::Shared(store), outpos)
}

pub fn build_forest(ac: &AcAutomaton) -> (OutputStore, Vec<u32>) {
    let n = ac.num_states();
    let nearest = nearest_outputs(ac);
    let lens = ac.pattern_lens();
    let mut node_of = vec![NO_OUTPUT; n];
    let mut nodes = Vec::with_capacity(ac.num_patterns());
    for s in 0..n as u32 {
        if let Some(k) = ac.trie().output(s) {
            node_of[s as usize] = nodes.len() as u32;
            nodes.push(ForestNode {
                pattern: k,
                len: lens[k as usize],
                parent: 0,
            });
        }
    }
    let sentinel = nodes.len() as u32;
    for s in 0..n as u32 {
        let i = node_of[s as usize];
        if i != NO_OUTPUT {
            let up = nearest[ac.fail(s) as usize];
            nodes[i as usize].parent = if up == NO_OUTPUT {
                sentinel
            } else {
                node_of[up as usize]
            };
        }
    }
    let outpos = nearest
        .iter()
        .map(|&t| {
            if t == NO_OUTPUT {
                NO_OUTPUT
            } else {
                node_of[t as usize]
            }
        })
        .collect();
    (OutputStore::Forest(ForestStore { nodes }), outpos)
}

pub fn build_store(ac: &AcAutomaton, kind: StoreKind) -> (OutputStore, Vec<u32>) {
    match kind {
        StoreKind::Simple => build_simple(ac),
        StoreKind::Shared => build_shared(ac),
        StoreKind::Forest => build_forest(ac),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codemap::Encoder;
    use crate::dictionary::Dictionary;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn golden_ac() -> AcAutomaton {
        let d = Dictionary::new(["ab", "b", "bab", "bac", "db", "dd"]).unwrap();
        AcAutomaton::new(&d, Encoder::Bytewise)
    }

    fn ids(store: &OutputStore, pos: u32) -> Vec<u32> {
        store.emit(pos).unwrap().map(|(k, _)| k).collect()
    }

    #[test]
    fn simple_duplicates_b_four_times() {
        let (store, outpos) = build_simple(&golden_ac());
        let OutputStore::Simple(s) = &store else {
            unreachable!()
        };
        assert_eq!(s.output().iter().filter(|&&k| k == 1).count(), 4);
        assert_eq!(ids(&store, outpos[8]), vec![2, 0, 1]);
        assert_eq!(store.len(), 1 + 2 + 2 + 1 + 3 + 1);
    }

    #[test]
    fn single_pattern_stores() {
        let d = Dictionary::new(["a"]).unwrap();
        let ac = AcAutomaton::new(&d, Encoder::Bytewise);
        let (simple, pos) = build_simple(&ac);
        let OutputStore::Simple(s) = &simple else {
            unreachable!()
        };
        assert_eq!(s.output(), &[0]);
        assert!(s.is_term(0));
        assert_eq!(pos, vec![NO_OUTPUT, 0]);
        let (shared, pos2) = build_shared(&ac);
        let OutputStore::Shared(s2) = &shared else {
            unreachable!()
        };
        assert_eq!(s, s2);
        assert_eq!(pos, pos2);
    }

    #[test]
    fn forest_golden() {
        let (store, outpos) = build_forest(&golden_ac());
        assert_eq!(store.len(), 6);
        let mut got = ids(&store, outpos[8]);
        got.sort();
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(ids(&store, outpos[9]), vec![3]);
        assert!(ids(&store, outpos[5]).is_empty());
        assert_eq!(outpos[5], NO_OUTPUT);
    }

    #[test]
    fn forest_disjoint_patterns_are_single_trees() {
        let d = Dictionary::new(["aa", "bb"]).unwrap();
        let (store, _) = build_forest(&AcAutomaton::new(&d, Encoder::Bytewise));
        let OutputStore::Forest(f) = &store else {
            unreachable!()
        };
        assert!(f.nodes().iter().all(|n| n.parent == f.sentinel()));
    }

    #[test]
    fn emit_range_error() {
        let (store, _) = build_simple(&golden_ac());
        assert!(matches!(
            store.emit(store.len() as u32),
            Err(DaacError::OutputRange { .. })
        ));
        assert_eq!(store.emit(NO_OUTPUT).unwrap().count(), 0);
    }

    #[test]
    fn forest_rejects_cycles() {
        let nodes = vec![
            ForestNode {
                pattern: 0,
                len: 1,
                parent: 1,
            },
            ForestNode {
                pattern: 1,
                len: 1,
                parent: 0,
            },
        ];
        assert!(ForestStore::from_nodes(nodes, 2).is_err());
    }

    fn brute_closure(ac: &AcAutomaton, s: u32) -> BTreeSet<u32> {
        let mut out = BTreeSet::new();
        let mut t = s;
        loop {
            out.extend(ac.trie().output(t));
            if t == 0 {
                break;
            }
            t = ac.fail(t);
        }
        out
    }

    proptest! {
        #[test]
        fn stores_emit_closure(set in proptest::collection::btree_set("[abc]{1,7}", 1..80)) {
            let d = Dictionary::new(set).unwrap();
            let ac = AcAutomaton::new(&d, Encoder::Bytewise);
            let mut lens = Vec::new();
            for kind in StoreKind::ALL {
                let (store, outpos) = build_store(&ac, kind);
                lens.push(store.len());
                for s in 0..ac.num_states() as u32 {
                    let got: Vec<(u32, u32)> = store.emit(outpos[s as usize]).unwrap().collect();
                    let as_set: BTreeSet<u32> = got.iter().map(|&(k, _)| k).collect();
                    prop_assert_eq!(as_set.len(), got.len());
                    prop_assert_eq!(&as_set, &brute_closure(&ac, s));
                    for (k, len) in got {
                        prop_assert_eq!(len, d.byte_len(k as usize));
                    }
                }
            }
            let simple_brute: usize = (0..ac.num_states() as u32)
                .filter(|&s| ac.trie().output(s).is_some())
                .map(|s| brute_closure(&ac, s).len())
                .sum();
            prop_assert_eq!(lens[0], simple_brute);
            prop_assert!(lens[2] == d.len() && lens[2] <= lens[1] && lens[1] <= lens[0]);
        }
    }
}

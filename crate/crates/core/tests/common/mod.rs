#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};

use daac::dabuild::{DEFAULT_DENSE_THRESHOLD, DEFAULT_SKIP_BLOCKS};
use daac::synth;
use daac::{
    build, AcAutomaton, BuildConfig, BuildStats, Dictionary, DoubleArrayAutomaton, Encoder,
    Format, Layout, Occurrence, Scheme, StoreKind, TraversalOrder, VacantStrategy,
};
use rand::Rng;

pub const GOLDEN: [&str; 6] = ["ab", "b", "bab", "bac", "db", "dd"];

pub fn golden() -> Dictionary {
    Dictionary::new(GOLDEN).unwrap()
}

/// (A,0,2) (B,1,2) (D,1,4) (F,4,6) with A..F as ids 0..5.
pub fn golden_expected() -> BTreeSet<Occurrence> {
    [(0, 0, 2), (1, 1, 2), (3, 1, 4), (5, 4, 6)]
        .into_iter()
        .map(|(k, s, e)| Occurrence::new(k, s, e))
        .collect()
}

pub fn set(v: impl IntoIterator<Item = Occurrence>) -> BTreeSet<Occurrence> {
    v.into_iter().collect()
}

pub fn build_with(dict: &Dictionary, cfg: &BuildConfig) -> (AcAutomaton, DoubleArrayAutomaton, BuildStats) {
    let ac = AcAutomaton::new(dict, Encoder::for_scheme(cfg.scheme, dict));
    let (da, stats) = build(&ac, cfg).unwrap_or_else(|e| panic!("{cfg}: {e}"));
    (ac, da, stats)
}

pub fn small_alphabet() -> Vec<char> {
    "abcd".chars().collect()
}

/// 3000 code points from U+0100: two- and three-byte UTF-8.
pub fn large_alphabet() -> Vec<char> {
    (0x100u32..0x100 + 3000).filter_map(char::from_u32).collect()
}

/// Twelve configurations that together use every value of every axis.
pub fn sampled_configs() -> Vec<BuildConfig> {
    (0..12)
        .map(|i| {
            let scheme = Scheme::ALL[i % 3];
            BuildConfig {
                scheme,
                layout: Layout::ALL[(i / 2) % 2],
                format: if scheme == Scheme::Bytewise && i % 2 == 0 {
                    Format::Compact
                } else {
                    Format::Basic
                },
                vacant: [
                    VacantStrategy::Chain,
                    VacantStrategy::SkipForward {
                        blocks: DEFAULT_SKIP_BLOCKS,
                    },
                    VacantStrategy::SkipDense {
                        threshold: DEFAULT_DENSE_THRESHOLD,
                    },
                ][(i / 4) % 3],
                order: TraversalOrder::ALL[i % 4],
                store: StoreKind::ALL[(i / 3) % 3],
            }
        })
        .collect()
}

/// A random dictionary of up to `max_patterns` patterns of 1..=8 characters.
pub fn random_dictionary<R: Rng>(rng: &mut R, max_patterns: usize, alphabet: &[char]) -> Dictionary {
    let n = rng.random_range(1..=max_patterns);
    synth::uniform_dictionary(rng, n, 1..=8, alphabet)
}

pub fn random_text<R: Rng>(rng: &mut R, dict: &Dictionary, alphabet: &[char]) -> String {
    let len = rng.random_range(0..=120);
    synth::planted_text(rng, dict, len, alphabet)
}

/// Every (s, c) with c < A satisfies block(BASE[s] ^ c) == block(BASE[s]).
pub fn block_violations(da: &DoubleArrayAutomaton) -> u64 {
    let bs = da.block_size();
    let occ = da.occupied();
    let mut bad = 0;
    for s in 0..da.len() as u32 {
        if !occ[s as usize] || da.is_leaf(s) {
            continue;
        }
        let b = da.base(s);
        for c in 0..da.alphabet_size() {
            if (b ^ c) / bs != b / bs {
                bad += 1;
            }
        }
    }
    bad
}

/// Walks the original trie and the double array together; returns the id
/// map, or a description of the first broken transition.
pub fn lockstep(ac: &AcAutomaton, da: &DoubleArrayAutomaton) -> Result<Vec<u32>, String> {
    let mut map = vec![u32::MAX; ac.num_states()];
    map[0] = 0;
    let compact = da.config().format == Format::Compact;
    for s in 0..ac.num_states() as u32 {
        let sid = map[s as usize];
        for &(c, t) in ac.trie().transitions(s) {
            let tid = da.base(sid) ^ c;
            let want_check = if compact { c } else { sid };
            if (tid as usize) >= da.len() || da.check(tid) != want_check {
                return Err(format!("transition {s} -{c}-> {t} lost"));
            }
            map[t as usize] = tid;
        }
    }
    for s in 1..ac.num_states() {
        if da.fail(map[s]) != map[ac.fail(s as u32) as usize] {
            return Err(format!("FAIL of {s} not translated"));
        }
    }
    Ok(map)
}

/// BASE and CHECK per id from a naive forward scan: for each state in the
/// configured traversal, try q = 0, 1, 2, ... with base q ^ c1 and take the
/// first base whose targets are all free (and, under Compact, unused).
pub struct NaiveArrays {
    pub base: Vec<u32>,
    pub check: Vec<u32>,
}

pub fn naive_double_array(ac: &AcAutomaton, dict: &Dictionary, cfg: &BuildConfig) -> NaiveArrays {
    let trie = ac.trie();
    let n = trie.num_states();
    let compact = cfg.format == Format::Compact;
    let alphabet = (0..n as u32)
        .flat_map(|s| trie.transitions(s).iter().map(|&(c, _)| c + 1))
        .max()
        .unwrap_or(1);
    let bs = alphabet.next_power_of_two();

    let mut freq: HashMap<u32, u64> = HashMap::new();
    for p in dict.patterns() {
        for c in ac.encoder().pattern_labels(p) {
            *freq.entry(c).or_default() += 1;
        }
    }
    let scan = |s: u32| -> Vec<(u32, u32)> {
        let mut e = trie.transitions(s).to_vec();
        if matches!(cfg.order, TraversalOrder::FreqBfs | TraversalOrder::FreqDfs) {
            e.sort_by(|a, b| freq[&b.0].cmp(&freq[&a.0]).then(a.0.cmp(&b.0)));
        }
        e
    };
    let dfs = matches!(cfg.order, TraversalOrder::LexDfs | TraversalOrder::FreqDfs);

    let mut used = vec![true];
    let mut base_of: Vec<Option<u32>> = vec![None];
    let mut check_of: Vec<u32> = vec![u32::MAX];
    let mut used_bases = BTreeSet::new();
    let mut id = vec![0u32; n];
    let mut work = vec![0u32];
    while !work.is_empty() {
        let s = if dfs { work.pop().unwrap() } else { work.remove(0) };
        let edges = scan(s);
        if edges.is_empty() {
            continue;
        }
        let c1 = edges[0].0;
        let free = |used: &Vec<bool>, t: u32| used.get(t as usize).map_or(true, |u| !u);
        let mut q = 0u32;
        let b = loop {
            let b = q ^ c1;
            let fits = edges.iter().all(|&(c, _)| free(&used, b ^ c))
                && !(compact && used_bases.contains(&b));
            if fits {
                break b;
            }
            q += 1;
        };
        let top = edges.iter().map(|&(c, _)| b ^ c).max().unwrap();
        let new_len = ((top / bs) + 1) * bs;
        if new_len as usize > used.len() {
            used.resize(new_len as usize, false);
            base_of.resize(new_len as usize, None);
            check_of.resize(new_len as usize, u32::MAX);
        }
        used_bases.insert(b);
        let sid = id[s as usize];
        base_of[sid as usize] = Some(b);
        for &(c, t) in &edges {
            let tid = b ^ c;
            used[tid as usize] = true;
            check_of[tid as usize] = if compact { c } else { sid };
            id[t as usize] = tid;
        }
        if dfs {
            work.extend(edges.iter().rev().map(|&(_, t)| t));
        } else {
            work.extend(edges.iter().map(|&(_, t)| t));
        }
    }
    let leaf = if compact { 0x00FF_FFFF } else { u32::MAX };
    let base: Vec<u32> = base_of.iter().map(|b| b.unwrap_or(leaf)).collect();
    let mut check = check_of;
    if compact {
        for t in 0..used.len() as u32 {
            if t == 0 || !used[t as usize] {
                let blk = t / bs * bs;
                let bstar = (blk..blk + bs).find(|b| !used_bases.contains(b)).unwrap();
                check[t as usize] = bstar ^ t;
            }
        }
    }
    NaiveArrays { base, check }
}

pub fn da_arrays(da: &DoubleArrayAutomaton) -> NaiveArrays {
    NaiveArrays {
        base: (0..da.len() as u32).map(|s| da.base(s)).collect(),
        check: (0..da.len() as u32).map(|t| da.check(t)).collect(),
    }
}

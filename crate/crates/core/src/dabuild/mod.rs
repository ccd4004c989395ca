//! Double-array construction.
//!
//! Every configuration places transitions with `BASE[s] ^ c = t`, so all
//! children of a state share the block of size `B = 2^ceil(log2 A)` that
//! contains `BASE[s]`.

pub mod states;
mod vacant;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::automaton::{BuildStats, DoubleArrayAutomaton, SearchCounters};
use crate::codemap::Scheme;
use crate::error::{DaacError, Result};
use crate::nfa::AcAutomaton;
use crate::outputs::{build_store, StoreKind, NO_OUTPUT};
use states::{
    BasicRecord, CompactRecord, IndividualBasic, IndividualCompact, PackedBasic, PackedCompact,
    States, LEAF_BASE_BASIC, LEAF_BASE_COMPACT, NO_PARENT,
};
use vacant::Arena;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Layout {
    Individual,
    Packed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    /// 4-byte BASE and CHECK; CHECK holds the parent id.
    Basic,
    /// CHECK holds the label in one byte; BASE values must be distinct.
    Compact,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VacantStrategy {
    /// Walk every vacant id in order.
    Chain,
    /// Only the last `blocks` blocks.
    SkipForward { blocks: u32 },
    /// Only blocks whose vacant fraction is at least `threshold`.
    SkipDense { threshold: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TraversalOrder {
    LexBfs,
    FreqBfs,
    LexDfs,
    FreqDfs,
}

pub const DEFAULT_SKIP_BLOCKS: u32 = 16;
pub const DEFAULT_DENSE_THRESHOLD: f64 = 0.1;

macro_rules! named_enum {
    ($ty:ident, $what:literal, $($variant:ident => $name:literal),+ $(,)?) => {
        impl $ty {
            pub const ALL: &'static [$ty] = &[$($ty::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $($ty::$variant => $name),+
                }
            }

            pub(crate) fn tag(self) -> u8 {
                self as u8
            }

            pub(crate) fn from_tag(tag: u8) -> Option<Self> {
                Self::ALL.get(tag as usize).copied()
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name() == s)
                    .ok_or_else(|| format!(concat!("unknown ", $what, " `{}`"), s))
            }
        }
    };
}

named_enum!(Layout, "layout", Individual => "individual", Packed => "packed");
named_enum!(Format, "format", Basic => "basic", Compact => "compact");
named_enum!(
    TraversalOrder,
    "order",
    LexBfs => "lex-bfs",
    FreqBfs => "freq-bfs",
    LexDfs => "lex-dfs",
    FreqDfs => "freq-dfs",
);

impl TraversalOrder {
    pub fn is_dfs(self) -> bool {
        matches!(self, TraversalOrder::LexDfs | TraversalOrder::FreqDfs)
    }

    pub fn is_freq(self) -> bool {
        matches!(self, TraversalOrder::FreqBfs | TraversalOrder::FreqDfs)
    }
}

impl VacantStrategy {
    pub fn name(self) -> &'static str {
        match self {
            VacantStrategy::Chain => "chain",
            VacantStrategy::SkipForward { .. } => "skip-forward",
            VacantStrategy::SkipDense { .. } => "skip-dense",
        }
    }

    /// Parses `chain`, `skip-forward` or `skip-dense` with the given parameters.
    pub fn parse(name: &str, blocks: u32, threshold: f64) -> Result<Self, String> {
        match name {
            "chain" => Ok(VacantStrategy::Chain),
            "skip-forward" => Ok(VacantStrategy::SkipForward { blocks }),
            "skip-dense" => Ok(VacantStrategy::SkipDense { threshold }),
            _ => Err(format!("unknown vacant strategy `{name}`")),
        }
    }

    pub(crate) fn tag(self) -> u8 {
        match self {
            VacantStrategy::Chain => 0,
            VacantStrategy::SkipForward { .. } => 1,
            VacantStrategy::SkipDense { .. } => 2,
        }
    }
}

impl fmt::Display for VacantStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VacantStrategy::Chain => f.write_str("chain"),
            VacantStrategy::SkipForward { blocks } => write!(f, "skip-forward(L={blocks})"),
            VacantStrategy::SkipDense { threshold } => write!(f, "skip-dense(tau={threshold})"),
        }
    }
}

/// Selects one technique on every axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BuildConfig {
    pub scheme: Scheme,
    pub layout: Layout,
    pub format: Format,
    pub vacant: VacantStrategy,
    pub order: TraversalOrder,
    pub store: StoreKind,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            scheme: Scheme::Bytewise,
            layout: Layout::Packed,
            format: Format::Compact,
            vacant: VacantStrategy::SkipForward {
                blocks: DEFAULT_SKIP_BLOCKS,
            },
            order: TraversalOrder::LexDfs,
            store: StoreKind::Forest,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format == Format::Compact && self.scheme != Scheme::Bytewise {
            return Err(DaacError::Config(format!(
                "compact format requires the bytewise scheme, got {}",
                self.scheme
            )));
        }
        match self.vacant {
            VacantStrategy::SkipForward { blocks: 0 } => {
                Err(DaacError::Config("skip-forward needs L >= 1".into()))
            }
            VacantStrategy::SkipDense { threshold } if !(0.0..=1.0).contains(&threshold) => {
                Err(DaacError::Config(format!(
                    "skip-dense threshold {threshold} outside [0, 1]"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Every valid combination of scheme, layout, format, vacant strategy and
    /// order (default strategy parameters) for one output store.
    pub fn grid(store: StoreKind) -> Vec<BuildConfig> {
        let mut out = Vec::new();
        for &scheme in &Scheme::ALL {
            for &layout in Layout::ALL {
                for &format in Format::ALL {
                    if format == Format::Compact && scheme != Scheme::Bytewise {
                        continue;
                    }
                    for vacant in [
                        VacantStrategy::Chain,
                        VacantStrategy::SkipForward {
                            blocks: DEFAULT_SKIP_BLOCKS,
                        },
                        VacantStrategy::SkipDense {
                            threshold: DEFAULT_DENSE_THRESHOLD,
                        },
                    ] {
                        for &order in TraversalOrder::ALL {
                            out.push(BuildConfig {
                                scheme,
                                layout,
                                format,
                                vacant,
                                order,
                                store,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// Exclusive bound on storable array length: the block holding the leaf
    /// sentinel is never allocated.
    pub fn id_limit(&self, block_size: u32) -> u64 {
        match self.format {
            Format::Basic => (1u64 << 32) - u64::from(block_size),
            Format::Compact => (1u64 << 24) - u64::from(block_size),
        }
    }
}

impl fmt::Display for BuildConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}+{}+{}+{}+{}+{}",
            self.store, self.scheme, self.layout, self.format, self.vacant, self.order
        )
    }
}

/// Block index of an id.
#[inline]
pub fn block_of(id: u32, block_size: u32) -> u32 {
    id / block_size
}

/// Frequency of each label over all pattern code units, read off the trie:
/// an edge into `t` is crossed by every pattern ending in `t`'s subtree.
fn label_frequencies(ac: &AcAutomaton) -> HashMap<u32, u64> {
    let trie = ac.trie();
    let n = trie.num_states();
    let mut below = vec![0u64; n];
    for s in (0..n as u32).rev() {
        let own = u64::from(trie.output(s).is_some());
        below[s as usize] = own
            + trie
                .transitions(s)
                .iter()
                .map(|&(_, t)| below[t as usize])
                .sum::<u64>();
    }
    let mut freq = HashMap::new();
    for s in 0..n as u32 {
        for &(c, t) in trie.transitions(s) {
            *freq.entry(c).or_insert(0) += below[t as usize];
        }
    }
    freq
}

/// Builds the double-array automaton for `ac` under `config`.
pub fn build(ac: &AcAutomaton, config: &BuildConfig) -> Result<(DoubleArrayAutomaton, BuildStats)> {
    config.validate()?;
    if ac.encoder().scheme() != config.scheme {
        return Err(DaacError::Config(format!(
            "automaton was encoded {}, config asks for {}",
            ac.encoder().scheme(),
            config.scheme
        )));
    }
    let started = Instant::now();
    let trie = ac.trie();
    let n = trie.num_states();

    let alphabet = (0..n as u32)
        .filter_map(|s| trie.transitions(s).last().map(|&(c, _)| c + 1))
        .max()
        .unwrap_or(1);
    let block_size = alphabet.next_power_of_two();
    let compact = config.format == Format::Compact;
    let mut arena = Arena::new(
        block_size,
        config.vacant,
        compact,
        config.id_limit(block_size),
    )?;

    let freq = config.order.is_freq().then(|| label_frequencies(ac));
    let scan_order = |s: u32| -> Vec<(u32, u32)> {
        let mut edges = trie.transitions(s).to_vec();
        if let Some(freq) = &freq {
            edges.sort_by_key(|&(c, _)| (std::cmp::Reverse(freq[&c]), c));
        }
        edges
    };

    let mut new_id = vec![u32::MAX; n];
    new_id[0] = 0;
    let mut work = VecDeque::from([0u32]);
    let mut labels = Vec::new();
    loop {
        let next = if config.order.is_dfs() {
            work.pop_back()
        } else {
            work.pop_front()
        };
        let Some(s) = next else { break };
        let sid = new_id[s as usize];
        let edges = scan_order(s);
        if edges.is_empty() {
            continue;
        }
        labels.clear();
        labels.extend(edges.iter().map(|&(c, _)| c));
        let base = arena.find_base(&labels)?;
        arena.place(base, &labels);
        arena.set_base(sid, base);
        for &(c, t) in &edges {
            let tid = base ^ c;
            arena.set_check(tid, if compact { c } else { sid });
            new_id[t as usize] = tid;
        }
        if config.order.is_dfs() {
            work.extend(edges.iter().rev().map(|&(_, t)| t));
        } else {
            work.extend(edges.iter().map(|&(_, t)| t));
        }
    }
    arena.trim();

    let len = arena.len() as usize;
    let (store, outpos_nfa) = build_store(ac, config.store);
    let mut fail = vec![0u32; len];
    let mut outpos = vec![NO_OUTPUT; len];
    for s in 0..n {
        let sid = new_id[s] as usize;
        if s != 0 {
            fail[sid] = new_id[ac.fail(s as u32) as usize];
        }
        outpos[sid] = outpos_nfa[s];
    }

    let leaf = if compact {
        LEAF_BASE_COMPACT
    } else {
        LEAF_BASE_BASIC
    };
    let mut base = vec![leaf; len];
    let mut check = vec![NO_PARENT; len];
    for id in 0..len as u32 {
        if arena.is_vacant(id) {
            continue;
        }
        if let Some(b) = arena.base(id) {
            base[id as usize] = b;
        }
        if id != 0 {
            check[id as usize] = arena.check(id);
        }
    }
    if compact {
        fill_free_checks(&arena, &mut check, block_size);
    }

    let states = match (config.layout, config.format) {
        (Layout::Individual, Format::Basic) => States::IndividualBasic(IndividualBasic {
            base,
            check,
            fail,
            outpos,
        }),
        (Layout::Individual, Format::Compact) => States::IndividualCompact(IndividualCompact {
            base,
            check: check.into_iter().map(|c| c as u8).collect(),
            fail,
            outpos,
        }),
        (Layout::Packed, Format::Basic) => States::PackedBasic(PackedBasic(
            (0..len)
                .map(|i| BasicRecord {
                    base: base[i],
                    check: check[i],
                    fail: fail[i],
                    outpos: outpos[i],
                })
                .collect(),
        )),
        (Layout::Packed, Format::Compact) => States::PackedCompact(PackedCompact(
            (0..len)
                .map(|i| CompactRecord::new(base[i], check[i] as u8, fail[i], outpos[i]))
                .collect(),
        )),
    };

    let counters = SearchCounters {
        searches: arena.searches,
        verifications: arena.verifications,
    };
    let daac = DoubleArrayAutomaton::from_parts(
        *config,
        states,
        store,
        ac.encoder().clone(),
        alphabet,
        ac.num_patterns() as u32,
        counters,
    );
    let elapsed = started.elapsed();
    let mut stats = daac.stats();
    stats.build_time = Some(elapsed);
    Ok((daac, stats))
}

/// Under Compact, CHECK of an id that is nobody's child (the root or a
/// vacant id) must not equal any label that could reach it. Use `b ^ t`
/// for a base `b` of the same block that no state owns; such a base exists
/// because the block has fewer children than slots.
fn fill_free_checks(arena: &Arena, check: &mut [u32], block_size: u32) {
    let len = check.len() as u32;
    for block_start in (0..len).step_by(block_size as usize) {
        let block = block_start..block_start + block_size;
        let free_base = block.clone().find(|&b| !arena.base_used(b));
        for t in block {
            if t == 0 || arena.is_vacant(t) {
                let b = free_base.expect("a block with a non-child slot has a free base");
                check[t as usize] = b ^ t;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codemap::Encoder;
    use crate::dictionary::Dictionary;

    fn ac(patterns: &[&str], scheme: Scheme) -> AcAutomaton {
        let d = Dictionary::new(patterns.iter().copied()).unwrap();
        let enc = Encoder::for_scheme(scheme, &d);
        AcAutomaton::new(&d, enc)
    }

    #[test]
    fn block_examples() {
        assert_eq!(block_of(5, 4), 1);
        assert_eq!(block_of(7, 4), 1);
        for b in [1, 2, 4, 256, 1 << 21] {
            assert_eq!(block_of(0, b), 0);
        }
    }

    #[test]
    fn compact_requires_bytewise() {
        let a = ac(&["ab"], Scheme::Charwise);
        let cfg = BuildConfig {
            scheme: Scheme::Charwise,
            format: Format::Compact,
            ..BuildConfig::default()
        };
        assert!(matches!(build(&a, &cfg), Err(DaacError::Config(_))));
        let bad_l = BuildConfig {
            vacant: VacantStrategy::SkipForward { blocks: 0 },
            ..BuildConfig::default()
        };
        assert!(bad_l.validate().is_err());
        let bad_tau = BuildConfig {
            vacant: VacantStrategy::SkipDense { threshold: 1.5 },
            ..BuildConfig::default()
        };
        assert!(bad_tau.validate().is_err());
    }

    #[test]
    fn scheme_mismatch_is_rejected() {
        let a = ac(&["ab"], Scheme::Charwise);
        assert!(build(&a, &BuildConfig::default()).is_err());
    }

    #[test]
    fn one_pattern_two_states() {
        let a = ac(&["a"], Scheme::Bytewise);
        for format in [Format::Basic, Format::Compact] {
            let cfg = BuildConfig {
                format,
                vacant: VacantStrategy::Chain,
                ..BuildConfig::default()
            };
            let (da, stats) = build(&a, &cfg).unwrap();
            assert_eq!(stats.num_states, 2);
            assert_eq!(stats.array_len - stats.vacant_ids, 2);
            let t = da.base(0) ^ u32::from(b'a');
            let expect = if format == Format::Basic { 0 } else { u32::from(b'a') };
            assert_eq!(da.check(t), expect);
            assert_eq!(da.child(0, u32::from(b'a')), Some(t));
        }
    }

    #[test]
    fn grid_size() {
        // 4 scheme/format pairs x 2 layouts x 3 strategies x 4 orders.
        assert_eq!(BuildConfig::grid(StoreKind::Forest).len(), 96);
    }

    #[test]
    fn freq_order_counts_pattern_units() {
        let a = ac(&["ab", "b", "bab", "bac", "db", "dd"], Scheme::Bytewise);
        let f = label_frequencies(&a);
        assert_eq!(f[&u32::from(b'b')], 6);
        assert_eq!(f[&u32::from(b'a')], 3);
        assert_eq!(f[&u32::from(b'd')], 3);
        assert_eq!(f[&u32::from(b'c')], 1);
    }

    #[test]
    fn parse_names() {
        assert_eq!("lex-dfs".parse::<TraversalOrder>(), Ok(TraversalOrder::LexDfs));
        assert_eq!("packed".parse::<Layout>(), Ok(Layout::Packed));
        assert!("bogus".parse::<Format>().is_err());
        assert_eq!(
            VacantStrategy::parse("skip-forward", 16, 0.1),
            Ok(VacantStrategy::SkipForward { blocks: 16 })
        );
    }
}

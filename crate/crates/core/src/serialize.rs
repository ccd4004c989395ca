//! Versioned binary archives.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! "DAAC" version:u32
//! scheme layout format store vacant order : u8 x6
//! skip_blocks:u32 dense_threshold:f64
//! alphabet:u32 num_patterns:u32
//! array_len output_len lens_len mapping_len searches verifications : u64 x6
//! states    Individual: base[n] check[n] fail[n] outpos[n] (check is u8 under Compact)
//!           Packed:     n records of 16 (Basic) or 12 (Compact) bytes
//! outputs   Simple/Shared: output[m]:u32 term[ceil(m/64)]:u64 lens[p]:u32
//!           Forest:        m x (pattern, len, parent):u32
//! mapping   pi[k]:i32
//! ```

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};

use crate::automaton::{DoubleArrayAutomaton, SearchCounters};
use crate::codemap::{Encoder, MappingTable, Scheme, CODE_POINT_LIMIT};
use crate::dabuild::states::{
    BasicRecord, CompactRecord, IndividualBasic, IndividualCompact, PackedBasic, PackedCompact,
    States, LEAF_BASE_BASIC, LEAF_BASE_COMPACT, NO_PARENT,
};
use crate::dabuild::{BuildConfig, Format, Layout, TraversalOrder, VacantStrategy};
use crate::error::{DaacError, Result};
use crate::outputs::{ForestNode, ForestStore, OutputStore, StoreKind, TermStore, NO_OUTPUT};

pub const MAGIC: &[u8; 4] = b"DAAC";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 6 + 4 + 8 + 4 + 4 + 6 * 8;

struct Sink {
    buf: Vec<u8>,
}

impl Sink {
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u32s(&mut self, vs: impl IntoIterator<Item = u32>) {
        for v in vs {
            self.u32(v);
        }
    }
}

/// Serializes `daac`. Identical automata give identical bytes.
pub fn to_bytes(daac: &DoubleArrayAutomaton) -> Vec<u8> {
    let cfg = daac.config();
    let mut w = Sink { buf: Vec::new() };
    w.buf.extend_from_slice(MAGIC);
    w.u32(VERSION);
    for tag in [
        cfg.scheme.tag(),
        cfg.layout.tag(),
        cfg.format.tag(),
        cfg.store.tag(),
        cfg.vacant.tag(),
        cfg.order.tag(),
    ] {
        w.u8(tag);
    }
    let (blocks, threshold) = match cfg.vacant {
        VacantStrategy::Chain => (0, 0.0),
        VacantStrategy::SkipForward { blocks } => (blocks, 0.0),
        VacantStrategy::SkipDense { threshold } => (0, threshold),
    };
    w.u32(blocks);
    w.u64(f64::to_bits(threshold));
    w.u32(daac.alphabet_size());
    w.u32(daac.num_patterns());

    let store = daac.store();
    let lens_len = match store {
        OutputStore::Simple(t) | OutputStore::Shared(t) => t.pattern_lens().len(),
        OutputStore::Forest(_) => 0,
    };
    let mapping = daac.encoder().mapping().map_or(&[][..], |m| m.raw());
    let counters = daac.counters();
    for v in [
        daac.len() as u64,
        store.len() as u64,
        lens_len as u64,
        mapping.len() as u64,
        counters.searches,
        counters.verifications,
    ] {
        w.u64(v);
    }

    match daac.states() {
        States::IndividualBasic(a) => {
            w.u32s(a.base.iter().copied());
            w.u32s(a.check.iter().copied());
            w.u32s(a.fail.iter().copied());
            w.u32s(a.outpos.iter().copied());
        }
        States::IndividualCompact(a) => {
            w.u32s(a.base.iter().copied());
            w.buf.extend_from_slice(&a.check);
            w.u32s(a.fail.iter().copied());
            w.u32s(a.outpos.iter().copied());
        }
        States::PackedBasic(a) => {
            for r in &a.0 {
                w.u32s([r.base, r.check, r.fail, r.outpos]);
            }
        }
        States::PackedCompact(a) => {
            for r in &a.0 {
                w.u32s([r.base_check, r.fail, r.outpos]);
            }
        }
    }

    match store {
        OutputStore::Simple(t) | OutputStore::Shared(t) => {
            w.u32s(t.output().iter().copied());
            for &word in t.term_words() {
                w.u64(word);
            }
            w.u32s(t.pattern_lens().iter().copied());
        }
        OutputStore::Forest(f) => {
            for n in f.nodes() {
                w.u32s([n.pattern, n.len, n.parent]);
            }
        }
    }
    for &v in mapping {
        w.buf.extend_from_slice(&v.to_le_bytes());
    }
    w.buf
}

/// Writes the archive to `sink` and returns the byte count.
pub fn save<W: Write>(daac: &DoubleArrayAutomaton, sink: &mut W) -> Result<u64> {
    let bytes = to_bytes(daac);
    sink.write_all(&bytes)?;
    sink.flush()?;
    Ok(bytes.len() as u64)
}

/// Reads a whole archive from `source`.
pub fn load<R: Read>(source: &mut R) -> Result<DoubleArrayAutomaton> {
    let mut buf = Vec::new();
    source.read_to_end(&mut buf)?;
    from_bytes(&buf)
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn corrupt(msg: impl Into<String>) -> DaacError {
    DaacError::Corrupt(msg.into())
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| corrupt(format!("truncated {what}")))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    /// Checks that `count` items of `width` bytes remain before allocating.
    fn reserve(&self, count: u64, width: usize, what: &str) -> Result<usize> {
        count
            .checked_mul(width as u64)
            .filter(|&n| n <= (self.buf.len() - self.pos) as u64)
            .map(|_| count as usize)
            .ok_or_else(|| corrupt(format!("truncated {what}")))
    }

    fn u32_vec(&mut self, count: u64, what: &str) -> Result<Vec<u32>> {
        let n = self.reserve(count, 4, what)?;
        let raw = self.take(n * 4, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn tag<T>(v: u8, parse: impl Fn(u8) -> Option<T>, what: &str) -> Result<T> {
    parse(v).ok_or_else(|| DaacError::Format(format!("unknown {what} tag {v}")))
}

/// Parses and fully validates an archive.
pub fn from_bytes(buf: &[u8]) -> Result<DoubleArrayAutomaton> {
    if buf.len() < 8 || &buf[..4] != MAGIC {
        return Err(DaacError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(buf[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(DaacError::Format(format!("unsupported version {version}")));
    }
    if buf.len() < HEADER_LEN {
        return Err(corrupt("truncated header"));
    }
    let mut r = Cursor { buf, pos: 8 };
    let scheme = tag(r.u8("header")?, Scheme::from_tag, "scheme")?;
    let layout = tag(r.u8("header")?, Layout::from_tag, "layout")?;
    let format = tag(r.u8("header")?, Format::from_tag, "format")?;
    let store_kind = tag(r.u8("header")?, StoreKind::from_tag, "store")?;
    let vacant_tag = r.u8("header")?;
    let order = tag(r.u8("header")?, TraversalOrder::from_tag, "order")?;
    let blocks = r.u32("header")?;
    let threshold = f64::from_bits(r.u64("header")?);
    let vacant = match vacant_tag {
        0 => VacantStrategy::Chain,
        1 => VacantStrategy::SkipForward { blocks },
        2 => VacantStrategy::SkipDense { threshold },
        v => return Err(DaacError::Format(format!("unknown vacant tag {v}"))),
    };
    let canonical_params = match vacant {
        VacantStrategy::Chain => blocks == 0 && threshold.to_bits() == 0,
        VacantStrategy::SkipForward { .. } => threshold.to_bits() == 0,
        VacantStrategy::SkipDense { .. } => blocks == 0,
    };
    if !canonical_params {
        return Err(DaacError::Format("unused strategy parameter is set".into()));
    }
    let config = BuildConfig {
        scheme,
        layout,
        format,
        vacant,
        order,
        store: store_kind,
    };
    config
        .validate()
        .map_err(|e| DaacError::Format(e.to_string()))?;

    let alphabet = r.u32("header")?;
    let num_patterns = r.u32("header")?;
    let array_len = r.u64("header")?;
    let output_len = r.u64("header")?;
    let lens_len = r.u64("header")?;
    let mapping_len = r.u64("header")?;
    let counters = SearchCounters {
        searches: r.u64("header")?,
        verifications: r.u64("header")?,
    };

    let max_alphabet = match scheme {
        Scheme::Bytewise => 256,
        Scheme::Charwise | Scheme::Mapped => CODE_POINT_LIMIT,
    };
    if alphabet == 0 || alphabet > max_alphabet {
        return Err(corrupt(format!("alphabet size {alphabet}")));
    }
    let block_size = alphabet.next_power_of_two();
    if array_len == 0
        || array_len > config.id_limit(block_size)
        || array_len % u64::from(block_size) != 0
    {
        return Err(corrupt(format!("array length {array_len}")));
    }
    if num_patterns == 0 {
        return Err(corrupt("no patterns"));
    }

    let n = array_len;
    let states = match (layout, format) {
        (Layout::Individual, Format::Basic) => {
            r.reserve(n, 16, "states")?;
            States::IndividualBasic(IndividualBasic {
                base: r.u32_vec(n, "BASE")?,
                check: r.u32_vec(n, "CHECK")?,
                fail: r.u32_vec(n, "FAIL")?,
                outpos: r.u32_vec(n, "OUTPOS")?,
            })
        }
        (Layout::Individual, Format::Compact) => {
            r.reserve(n, 13, "states")?;
            let base = r.u32_vec(n, "BASE")?;
            let check = r.take(n as usize, "CHECK")?.to_vec();
            States::IndividualCompact(IndividualCompact {
                base,
                check,
                fail: r.u32_vec(n, "FAIL")?,
                outpos: r.u32_vec(n, "OUTPOS")?,
            })
        }
        (Layout::Packed, Format::Basic) => {
            let v = r.u32_vec(n * 4, "states")?;
            States::PackedBasic(PackedBasic(
                v.chunks_exact(4)
                    .map(|c| BasicRecord {
                        base: c[0],
                        check: c[1],
                        fail: c[2],
                        outpos: c[3],
                    })
                    .collect(),
            ))
        }
        (Layout::Packed, Format::Compact) => {
            let v = r.u32_vec(n * 3, "states")?;
            States::PackedCompact(PackedCompact(
                v.chunks_exact(3)
                    .map(|c| CompactRecord {
                        base_check: c[0],
                        fail: c[1],
                        outpos: c[2],
                    })
                    .collect(),
            ))
        }
    };

    let store = match store_kind {
        StoreKind::Simple | StoreKind::Shared => {
            if lens_len != u64::from(num_patterns) {
                return Err(corrupt("pattern length table size"));
            }
            let output = r.u32_vec(output_len, "OUTPUT")?;
            let words = r.reserve(output_len.div_ceil(64), 8, "TERM")?;
            let mut term = Vec::with_capacity(output.len());
            for w in 0..words {
                let word = r.u64("TERM")?;
                let bits = (output.len() - w * 64).min(64);
                if bits < 64 && word >> bits != 0 {
                    return Err(corrupt("stray TERM bits"));
                }
                term.extend((0..bits).map(|i| word >> i & 1 == 1));
            }
            let lens = r.u32_vec(lens_len, "pattern lengths")?;
            if lens.contains(&0) {
                return Err(corrupt("zero pattern length"));
            }
            let t = TermStore::from_parts(output, term, lens)?;
            if store_kind == StoreKind::Simple {
                OutputStore::Simple(t)
            } else {
                OutputStore::Shared(t)
            }
        }
        StoreKind::Forest => {
            if lens_len != 0 {
                return Err(corrupt("forest archives carry no length table"));
            }
            let v = r.u32_vec(output_len.saturating_mul(3), "forest")?;
            let nodes: Vec<ForestNode> = v
                .chunks_exact(3)
                .map(|c| ForestNode {
                    pattern: c[0],
                    len: c[1],
                    parent: c[2],
                })
                .collect();
            if nodes.iter().any(|n| n.len == 0) {
                return Err(corrupt("zero pattern length"));
            }
            OutputStore::Forest(ForestStore::from_nodes(nodes, num_patterns as usize)?)
        }
    };

    let encoder = match scheme {
        Scheme::Bytewise | Scheme::Charwise => {
            if mapping_len != 0 {
                return Err(corrupt("mapping table without the mapped scheme"));
            }
            if scheme == Scheme::Bytewise {
                Encoder::Bytewise
            } else {
                Encoder::Charwise
            }
        }
        Scheme::Mapped => {
            let m = r.reserve(mapping_len, 4, "mapping")?;
            let raw = r.take(m * 4, "mapping")?;
            let pi = raw
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect();
            let table = MappingTable::from_raw(pi)?;
            if table.sigma() != alphabet {
                return Err(corrupt("mapped alphabet disagrees with the table"));
            }
            Encoder::Mapped(table)
        }
    };

    if r.pos != buf.len() {
        return Err(corrupt(format!("{} trailing bytes", buf.len() - r.pos)));
    }

    let daac = DoubleArrayAutomaton::from_parts(
        config,
        states,
        store,
        encoder,
        alphabet,
        num_patterns,
        counters,
    );
    validate(&daac)?;
    Ok(daac)
}

/// Structural checks: the arrays describe a trie rooted at 0 with every
/// transition in its base's block, consistent failure links, and output
/// positions inside the store.
fn validate(daac: &DoubleArrayAutomaton) -> Result<()> {
    let n = daac.len();
    let compact = daac.config().format == Format::Compact;
    let leaf = if compact {
        LEAF_BASE_COMPACT
    } else {
        LEAF_BASE_BASIC
    };
    let alphabet = daac.alphabet_size();

    if compact {
        if let States::PackedCompact(p) = daac.states() {
            if p.0.iter().any(|r| r.base_check >> 8 > LEAF_BASE_COMPACT) {
                return Err(corrupt("BASE exceeds 24 bits"));
            }
        } else if (0..n as u32).any(|s| daac.base(s) > LEAF_BASE_COMPACT) {
            return Err(corrupt("BASE exceeds 24 bits"));
        }
    }

    // Parent and label of every occupied non-root id.
    let mut parent = vec![u32::MAX; n];
    let mut label = vec![0u32; n];
    if compact {
        let mut owner = HashMap::new();
        for s in 0..n as u32 {
            let b = daac.base(s);
            if b != leaf && owner.insert(b, s).is_some() {
                return Err(corrupt(format!("BASE {b} used twice")));
            }
        }
        if owner.contains_key(&daac.check(0)) {
            return Err(corrupt("root is some state's child"));
        }
        for t in 1..n as u32 {
            let c = daac.check(t);
            if let Some(&p) = owner.get(&(t ^ c)) {
                parent[t as usize] = p;
                label[t as usize] = c;
            }
        }
    } else {
        if daac.check(0) != NO_PARENT {
            return Err(corrupt("root has a parent"));
        }
        for t in 1..n as u32 {
            let p = daac.check(t);
            if p == NO_PARENT {
                continue;
            }
            if p as usize >= n {
                return Err(corrupt(format!("CHECK[{t}] out of range")));
            }
            let b = daac.base(p);
            if b == leaf {
                return Err(corrupt(format!("CHECK[{t}] names leaf {p}")));
            }
            parent[t as usize] = p;
            label[t as usize] = b ^ t;
        }
    }

    let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
    for t in 1..n {
        if parent[t] != u32::MAX {
            if label[t] >= alphabet {
                return Err(corrupt(format!("label {} >= alphabet {alphabet}", label[t])));
            }
            children[parent[t] as usize].push(t as u32);
        }
    }
    let max_label = (1..n).filter(|&t| parent[t] != u32::MAX).map(|t| label[t]).max();
    if max_label.map_or(true, |c| c + 1 != alphabet) {
        return Err(corrupt("alphabet size disagrees with the labels"));
    }

    // Breadth-first from the root: reach every occupied id exactly once.
    let mut depth = vec![u32::MAX; n];
    depth[0] = 0;
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0u32]);
    while let Some(s) = queue.pop_front() {
        order.push(s);
        let kids = &children[s as usize];
        let is_leaf = daac.base(s) == leaf;
        if is_leaf != kids.is_empty() {
            return Err(corrupt(format!("state {s} BASE disagrees with its children")));
        }
        for &t in kids {
            if depth[t as usize] != u32::MAX {
                return Err(corrupt("trie has a cycle"));
            }
            depth[t as usize] = depth[s as usize] + 1;
            queue.push_back(t);
        }
    }
    for t in 1..n {
        if parent[t] != u32::MAX && depth[t] == u32::MAX {
            return Err(corrupt(format!("state {t} unreachable from the root")));
        }
    }
    let searches = order.iter().filter(|&&s| daac.base(s) != leaf).count() as u64;
    let c = daac.counters();
    if c.searches != searches || c.verifications < c.searches {
        return Err(corrupt("search counters disagree with the arrays"));
    }

    // Vacant ids are canonical.
    for t in 0..n {
        if depth[t] == u32::MAX {
            let t = t as u32;
            if daac.base(t) != leaf || daac.fail(t) != 0 || daac.outpos(t) != NO_OUTPUT {
                return Err(corrupt(format!("vacant id {t} carries data")));
            }
        }
    }

    // Failure links, parents first.
    if daac.fail(0) != 0 {
        return Err(corrupt("FAIL[0] is not 0"));
    }
    let mut scratch = crate::matcher::MatchStats::default();
    for &s in order.iter().skip(1) {
        let p = parent[s as usize];
        let want = if p == 0 {
            0
        } else {
            daac.next_state(daac.fail(p), label[s as usize], &mut scratch)
        };
        if daac.fail(s) != want {
            return Err(corrupt(format!("FAIL[{s}] should be {want}")));
        }
    }

    validate_outputs(daac, &order, &parent, &label)
}

/// Each state emits either exactly what its failure target emits, or one
/// own pattern whose length is the state's byte depth followed by that.
fn validate_outputs(
    daac: &DoubleArrayAutomaton,
    order: &[u32],
    parent: &[u32],
    label: &[u32],
) -> Result<()> {
    let store = daac.store();
    let inverse = daac.encoder().mapping().map(|m| m.inverse());
    let width = |c: u32| -> Result<u32> {
        let cp = match (&inverse, daac.encoder()) {
            (_, Encoder::Bytewise) => return Ok(1),
            (Some(inv), _) => inv[c as usize],
            (None, _) => c,
        };
        char::from_u32(cp)
            .map(|ch| ch.len_utf8() as u32)
            .ok_or_else(|| corrupt(format!("label {c:#x} is not a character")))
    };
    let mut byte_depth = vec![0u32; parent.len()];
    let mut owned = vec![false; daac.num_patterns() as usize];
    let mut owners = 0usize;
    let limit = owned.len();
    let sets = |s: u32| -> Result<Vec<(u32, u32)>> {
        let mut v = Vec::new();
        for item in store.emit(daac.outpos(s))? {
            v.push(item);
            if v.len() > limit {
                return Err(corrupt(format!("state {s} emits too many patterns")));
            }
        }
        Ok(v)
    };
    if daac.outpos(0) != NO_OUTPUT {
        return Err(corrupt("root has outputs"));
    }
    for &s in order.iter().skip(1) {
        let p = parent[s as usize];
        byte_depth[s as usize] = byte_depth[p as usize] + width(label[s as usize])?;
        let mine = sets(s)?;
        let inherited = sets(daac.fail(s))?;
        let own = match mine.len().checked_sub(inherited.len()) {
            Some(0) => None,
            Some(1) => Some(mine[0]),
            _ => return Err(corrupt(format!("state {s} drops inherited outputs"))),
        };
        if mine[mine.len() - inherited.len()..] != inherited[..] {
            return Err(corrupt(format!("state {s} emits a foreign set")));
        }
        if let Some((k, len)) = own {
            if len != byte_depth[s as usize] || std::mem::replace(&mut owned[k as usize], true) {
                return Err(corrupt(format!("pattern {k} misplaced at state {s}")));
            }
            owners += 1;
        }
    }
    if owners != owned.len() {
        return Err(corrupt("some pattern has no state"));
    }
    Ok(())
}

//! Overlapping search over a double-array automaton.

use std::str::CharIndices;

use crate::automaton::DoubleArrayAutomaton;
use crate::codemap::{Encoder, INVALID_LABEL};
use crate::dabuild::states::{with_states, StateArray};
use crate::dictionary::Occurrence;
use crate::error::Result;
use crate::outputs::Emit;

/// Counters for one search.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MatchStats {
    /// Successful real transitions. The root's implicit self-loop is not one.
    pub forward_transitions: u64,
    pub failure_hops: u64,
    pub units_consumed: u64,
    pub occurrences: u64,
}

impl MatchStats {
    /// States visited: forward transitions plus failure hops.
    pub fn visited(&self) -> u64 {
        self.forward_transitions + self.failure_hops
    }

    pub fn add(&mut self, other: &MatchStats) {
        self.forward_transitions += other.forward_transitions;
        self.failure_hops += other.failure_hops;
        self.units_consumed += other.units_consumed;
        self.occurrences += other.occurrences;
    }
}

/// δ* over the arrays: probe `BASE[s] ^ label`, fall back along FAIL, stop
/// at the root.
#[inline]
pub fn next_state_da<A: StateArray>(arr: &A, mut s: u32, label: u32, stats: &mut MatchStats) -> u32 {
    loop {
        if let Some(t) = arr.child(s, label) {
            stats.forward_transitions += 1;
            return t;
        }
        if s == 0 {
            return 0;
        }
        s = arr.fail(s);
        stats.failure_hops += 1;
    }
}

fn run<A, F>(
    arr: &A,
    daac: &DoubleArrayAutomaton,
    text: &[u8],
    as_str: Option<&str>,
    mut f: F,
) -> MatchStats
where
    A: StateArray,
    F: FnMut(Occurrence),
{
    let store = daac.store();
    let mut stats = MatchStats::default();
    let mut s = 0;
    let mut report = |s: u32, end: usize, stats: &mut MatchStats| {
        for (k, len) in store.emit_unchecked(arr.outpos(s)) {
            stats.occurrences += 1;
            f(Occurrence::new(k, end.saturating_sub(len as usize), end));
        }
    };
    match as_str {
        None => {
            for (i, &b) in text.iter().enumerate() {
                s = next_state_da(arr, s, u32::from(b), &mut stats);
                stats.units_consumed += 1;
                report(s, i + 1, &mut stats);
            }
        }
        Some(text) => {
            let enc = daac.encoder();
            for (i, c) in text.char_indices() {
                let label = enc.map_char(c);
                s = if label == INVALID_LABEL {
                    0
                } else {
                    next_state_da(arr, s, label, &mut stats)
                };
                stats.units_consumed += 1;
                report(s, i + c.len_utf8(), &mut stats);
            }
        }
    }
    stats
}

impl DoubleArrayAutomaton {
    /// δ* on this automaton.
    pub fn next_state(&self, s: u32, label: u32, stats: &mut MatchStats) -> u32 {
        if label == INVALID_LABEL {
            return 0;
        }
        with_states!(self.states(), a => next_state_da(a, s, label, stats))
    }

    /// Calls `f` for every occurrence in end order.
    pub fn for_each_match<F: FnMut(Occurrence)>(&self, text: &[u8], f: F) -> Result<MatchStats> {
        let as_str = self.encoder().validate(text)?;
        Ok(with_states!(self.states(), a => run(a, self, text, as_str, f)))
    }

    /// Every occurrence, overlapping and nested ones included.
    pub fn find_overlapping(&self, text: &[u8]) -> Result<(Vec<Occurrence>, MatchStats)> {
        let mut out = Vec::new();
        let stats = self.for_each_match(text, |o| out.push(o))?;
        Ok((out, stats))
    }

    /// Lazy variant of [`find_overlapping`](Self::find_overlapping).
    pub fn find_iter<'a>(&'a self, text: &'a [u8]) -> Result<Matches<'a>> {
        let units = match self.encoder().validate(text)? {
            None => Units::Bytes(text.iter().enumerate()),
            Some(s) => Units::Chars(s.char_indices()),
        };
        Ok(Matches {
            daac: self,
            units,
            state: 0,
            end: 0,
            pending: Emit::Empty,
            stats: MatchStats::default(),
        })
    }
}

enum Units<'a> {
    Bytes(std::iter::Enumerate<std::slice::Iter<'a, u8>>),
    Chars(CharIndices<'a>),
}

impl Units<'_> {
    #[inline]
    fn next(&mut self, enc: &Encoder) -> Option<(u32, usize)> {
        match self {
            Units::Bytes(it) => it.next().map(|(i, &b)| (u32::from(b), i + 1)),
            Units::Chars(it) => it
                .next()
                .map(|(i, c)| (enc.map_char(c), i + c.len_utf8())),
        }
    }
}

/// Iterator over occurrences; see [`DoubleArrayAutomaton::find_iter`].
pub struct Matches<'a> {
    daac: &'a DoubleArrayAutomaton,
    units: Units<'a>,
    state: u32,
    end: usize,
    pending: Emit<'a>,
    stats: MatchStats,
}

impl Matches<'_> {
    /// Counters so far.
    pub fn stats(&self) -> MatchStats {
        self.stats
    }
}

impl Iterator for Matches<'_> {
    type Item = Occurrence;

    fn next(&mut self) -> Option<Occurrence> {
        loop {
            if let Some((k, len)) = self.pending.next() {
                self.stats.occurrences += 1;
                let start = self.end.saturating_sub(len as usize);
                return Some(Occurrence::new(k, start, self.end));
            }
            let (label, end) = self.units.next(self.daac.encoder())?;
            self.state = self.daac.next_state(self.state, label, &mut self.stats);
            self.stats.units_consumed += 1;
            self.end = end;
            self.pending = self
                .daac
                .store()
                .emit_unchecked(self.daac.outpos(self.state));
        }
    }
}

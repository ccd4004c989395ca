//! The built double-array automaton and its measurement record.

use std::collections::HashSet;
use std::time::Duration;

use crate::codemap::Encoder;
use crate::dabuild::states::{States, LEAF_BASE_BASIC, LEAF_BASE_COMPACT, NO_PARENT};
use crate::dabuild::{BuildConfig, Format};
use crate::outputs::OutputStore;

/// Vacant-search counters kept from construction. They cannot be recovered
/// from the arrays, so archives carry them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchCounters {
    pub searches: u64,
    pub verifications: u64,
}

/// Heap bytes per component.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MemoryBreakdown {
    /// BASE, CHECK, FAIL and OUTPOS together.
    pub states: usize,
    /// OUTPUT and TERM, or the forest nodes.
    pub outputs: usize,
    /// Pattern byte lengths kept beside a Simple or Shared store.
    pub pattern_lens: usize,
    /// The code mapping table under Mapped.
    pub mapping: usize,
}

impl MemoryBreakdown {
    pub fn total(&self) -> usize {
        self.states + self.outputs + self.pattern_lens + self.mapping
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BuildStats {
    /// States of the original trie, |S|.
    pub num_states: usize,
    /// Double-array length including vacant ids, |S_BC|.
    pub array_len: usize,
    pub vacant_ids: usize,
    pub vacant_proportion: f64,
    pub internal_states: usize,
    pub transitions: usize,
    pub avg_out_transitions: f64,
    pub searches: u64,
    /// Candidate bases tested; one per candidate, however many labels it probes.
    pub verifications: u64,
    pub avg_verifications: f64,
    pub alphabet_size: u32,
    pub block_size: u32,
    pub output_len: usize,
    pub num_patterns: u32,
    pub memory: MemoryBreakdown,
    pub build_time: Option<Duration>,
}

impl BuildStats {
    /// `(key, value)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, String)> {
        let mut rows = vec![
            ("num_states", self.num_states.to_string()),
            ("array_len", self.array_len.to_string()),
            ("vacant_ids", self.vacant_ids.to_string()),
            ("vacant_proportion", format!("{:.6}", self.vacant_proportion)),
            ("internal_states", self.internal_states.to_string()),
            ("transitions", self.transitions.to_string()),
            ("avg_out_transitions", format!("{:.6}", self.avg_out_transitions)),
            ("vacant_searches", self.searches.to_string()),
            ("verifications", self.verifications.to_string()),
            ("avg_verifications", format!("{:.6}", self.avg_verifications)),
            ("alphabet_size", self.alphabet_size.to_string()),
            ("block_size", self.block_size.to_string()),
            ("num_patterns", self.num_patterns.to_string()),
            ("output_len", self.output_len.to_string()),
            ("mem_states", self.memory.states.to_string()),
            ("mem_outputs", self.memory.outputs.to_string()),
            ("mem_pattern_lens", self.memory.pattern_lens.to_string()),
            ("mem_mapping", self.memory.mapping.to_string()),
            ("mem_total", self.memory.total().to_string()),
        ];
        if let Some(t) = self.build_time {
            rows.push(("build_seconds", format!("{:.6}", t.as_secs_f64())));
        }
        rows
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoubleArrayAutomaton {
    config: BuildConfig,
    states: States,
    store: OutputStore,
    encoder: Encoder,
    alphabet: u32,
    num_patterns: u32,
    counters: SearchCounters,
}

impl DoubleArrayAutomaton {
    pub(crate) fn from_parts(
        config: BuildConfig,
        states: States,
        store: OutputStore,
        encoder: Encoder,
        alphabet: u32,
        num_patterns: u32,
        counters: SearchCounters,
    ) -> Self {
        Self {
            config,
            states,
            store,
            encoder,
            alphabet,
            num_patterns,
            counters,
        }
    }

    pub fn config(&self) -> &BuildConfig {
        &self.config
    }

    pub fn states(&self) -> &States {
        &self.states
    }

    pub fn store(&self) -> &OutputStore {
        &self.store
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    /// Exclusive bound on labels, A (σ under Mapped).
    pub fn alphabet_size(&self) -> u32 {
        self.alphabet
    }

    pub fn block_size(&self) -> u32 {
        self.alphabet.next_power_of_two()
    }

    pub fn num_patterns(&self) -> u32 {
        self.num_patterns
    }

    pub fn counters(&self) -> SearchCounters {
        self.counters
    }

    /// |S_BC|.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn base(&self, s: u32) -> u32 {
        self.states.base(s)
    }

    pub fn check(&self, t: u32) -> u32 {
        self.states.check(t)
    }

    pub fn fail(&self, s: u32) -> u32 {
        self.states.fail(s)
    }

    pub fn outpos(&self, s: u32) -> u32 {
        self.states.outpos(s)
    }

    /// Real transition from `s` on `label`, if any.
    pub fn child(&self, s: u32, label: u32) -> Option<u32> {
        self.states.child(s, label)
    }

    pub fn leaf_base(&self) -> u32 {
        match self.config.format {
            Format::Basic => LEAF_BASE_BASIC,
            Format::Compact => LEAF_BASE_COMPACT,
        }
    }

    pub fn is_leaf(&self, s: u32) -> bool {
        self.base(s) == self.leaf_base()
    }

    /// Occupied flag per id, read off BASE and CHECK alone.
    pub fn occupied(&self) -> Vec<bool> {
        let n = self.len();
        let mut occ = vec![false; n];
        if n == 0 {
            return occ;
        }
        occ[0] = true;
        match self.config.format {
            Format::Basic => {
                for (t, o) in occ.iter_mut().enumerate().skip(1) {
                    *o = self.check(t as u32) != NO_PARENT;
                }
            }
            Format::Compact => {
                let leaf = self.leaf_base();
                let used: HashSet<u32> = (0..n as u32)
                    .map(|s| self.base(s))
                    .filter(|&b| b != leaf)
                    .collect();
                for (t, o) in occ.iter_mut().enumerate().skip(1) {
                    let t = t as u32;
                    *o = used.contains(&(t ^ self.check(t)));
                }
            }
        }
        occ
    }

    pub fn memory(&self) -> MemoryBreakdown {
        MemoryBreakdown {
            states: self.states.heap_bytes(),
            outputs: self.store.heap_bytes(),
            pattern_lens: self.store.lens_bytes(),
            mapping: self.encoder.mapping().map_or(0, |m| m.heap_bytes()),
        }
    }

    /// Every figure recomputed from the arrays; `build_time` is left empty.
    pub fn stats(&self) -> BuildStats {
        let occ = self.occupied();
        let num_states = occ.iter().filter(|&&o| o).count();
        let array_len = self.len();
        let internal_states = (0..array_len as u32)
            .filter(|&s| occ[s as usize] && !self.is_leaf(s))
            .count();
        let transitions = num_states.saturating_sub(1);
        let ratio = |a: f64, b: f64| if b == 0.0 { 0.0 } else { a / b };
        BuildStats {
            num_states,
            array_len,
            vacant_ids: array_len - num_states,
            vacant_proportion: ratio((array_len - num_states) as f64, array_len as f64),
            internal_states,
            transitions,
            avg_out_transitions: ratio(transitions as f64, internal_states as f64),
            searches: self.counters.searches,
            verifications: self.counters.verifications,
            avg_verifications: ratio(
                self.counters.verifications as f64,
                self.counters.searches as f64,
            ),
            alphabet_size: self.alphabet,
            block_size: self.block_size(),
            output_len: self.store.len(),
            num_patterns: self.num_patterns,
            memory: self.memory(),
            build_time: None,
        }
    }
}

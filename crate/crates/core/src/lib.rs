//! Double-array Aho–Corasick automata with selectable implementation
//! techniques: label scheme, memory layout, CHECK format, vacant search,
//! traversal order and output store.
//!
//! ```
//! use daac::{build, AcAutomaton, BuildConfig, Dictionary, Encoder};
//!
//! let dict = Dictionary::new(["ab", "b", "bab"]).unwrap();
//! let cfg = BuildConfig::default();
//! let ac = AcAutomaton::new(&dict, Encoder::for_scheme(cfg.scheme, &dict));
//! let (da, _stats) = build(&ac, &cfg).unwrap();
//! let (occ, _) = da.find_overlapping(b"abab").unwrap();
//! assert_eq!(occ.len(), 5);
//! ```

pub mod automaton;
pub mod codemap;
pub mod dabuild;
pub mod dictionary;
pub mod error;
pub mod matcher;
pub mod nfa;
pub mod outputs;
pub mod serialize;
pub mod synth;

pub use automaton::{BuildStats, DoubleArrayAutomaton, MemoryBreakdown, SearchCounters};
pub use codemap::{Encoder, MappingTable, Scheme, Unit, INVALID_LABEL};
pub use dabuild::{block_of, build, BuildConfig, Format, Layout, TraversalOrder, VacantStrategy};
pub use dictionary::{Dictionary, Occurrence};
pub use error::{DaacError, Result};
pub use matcher::{next_state_da, MatchStats, Matches};
pub use nfa::{naive_find, AcAutomaton};
pub use outputs::{OutputStore, StoreKind};

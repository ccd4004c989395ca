//! Seeded synthetic dictionaries and texts.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::dictionary::Dictionary;

pub type SynthRng = ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5EED_DAAC;

/// Seed from `DAAC_SEED` (decimal or `0x` hex), else [`DEFAULT_SEED`].
pub fn env_seed() -> u64 {
    std::env::var("DAAC_SEED")
        .ok()
        .and_then(|v| parse_seed(&v))
        .unwrap_or(DEFAULT_SEED)
}

pub fn parse_seed(v: &str) -> Option<u64> {
    let v = v.trim();
    match v.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => v.parse().ok(),
    }
}

pub fn rng(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct patterns with lengths in `lens` (in characters) drawn from
/// `sample`. Gives up growing after many consecutive duplicates.
pub fn distinct_patterns<R: Rng>(
    rng: &mut R,
    n: usize,
    lens: std::ops::RangeInclusive<usize>,
    mut sample: impl FnMut(&mut R) -> char,
) -> Dictionary {
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut misses = 0;
    while out.len() < n && misses < 10_000 {
        let len = rng.random_range(lens.clone());
        let p: String = (0..len).map(|_| sample(rng)).collect();
        if seen.insert(p.clone()) {
            out.push(p);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    Dictionary::new(out).expect("patterns are distinct and non-empty")
}

/// Uniform choice from a fixed alphabet.
pub fn uniform_dictionary<R: Rng>(
    rng: &mut R,
    n: usize,
    lens: std::ops::RangeInclusive<usize>,
    alphabet: &[char],
) -> Dictionary {
    distinct_patterns(rng, n, lens, |r| *alphabet.choose(r).unwrap())
}

/// A text of `len` characters that plants dictionary patterns among
/// characters from `alphabet`.
pub fn planted_text<R: Rng>(rng: &mut R, dict: &Dictionary, len: usize, alphabet: &[char]) -> String {
    let mut s = String::new();
    let mut chars = 0;
    while chars < len {
        if rng.random_bool(0.3) {
            let p = dict.pattern(rng.random_range(0..dict.len()));
            s.push_str(p);
            chars += p.chars().count();
        } else {
            s.push(*alphabet.choose(rng).unwrap());
            chars += 1;
        }
    }
    s
}

/// CJK ideographs ranked by a Zipf law, with a share of ASCII letters.
pub struct ZipfCjk {
    zipf: Zipf<f64>,
    ranks: u32,
    ascii: f64,
}

pub const CJK_BASE: u32 = 0x4E00;

impl ZipfCjk {
    pub fn new(ranks: u32, exponent: f64, ascii: f64) -> Self {
        Self {
            zipf: Zipf::new(f64::from(ranks), exponent).expect("valid Zipf parameters"),
            ranks,
            ascii,
        }
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> char {
        if rng.random_bool(self.ascii) {
            return char::from(b'a' + rng.random_range(0..26));
        }
        // Spread ranks over the block so frequent ideographs are not adjacent.
        let rank = self.zipf.sample(rng) as u32 - 1;
        let cp = CJK_BASE + (rank.wrapping_mul(7919) % self.ranks);
        char::from_u32(cp).unwrap()
    }
}

/// Word-like dictionary over [`ZipfCjk`] characters.
pub fn zipf_cjk_dictionary<R: Rng>(rng: &mut R, n: usize) -> (Dictionary, ZipfCjk) {
    let dist = ZipfCjk::new(6000, 1.1, 0.15);
    let dict = distinct_patterns(rng, n, 1..=6, |r| dist.sample(r));
    (dict, dist)
}

/// Lines of text drawn from `dist` with patterns planted in them.
pub fn zipf_cjk_lines<R: Rng>(
    rng: &mut R,
    dict: &Dictionary,
    dist: &ZipfCjk,
    lines: usize,
    line_len: usize,
) -> Vec<String> {
    (0..lines)
        .map(|_| {
            let mut s = String::new();
            let mut chars = 0;
            while chars < line_len {
                if rng.random_bool(0.2) {
                    let p = dict.pattern(rng.random_range(0..dict.len()));
                    s.push_str(p);
                    chars += p.chars().count();
                } else {
                    s.push(dist.sample(rng));
                    chars += 1;
                }
            }
            s
        })
        .collect()
}

/// Long lowercase words that make almost every state single-child, plus a
/// few words holding rare two-byte characters so that bytes up to 0xC4
/// appear and the block size is 256. Under Compact, once a block is nearly
/// full its last vacant ids only accept labels whose base is still unused,
/// which for a common letter is rarely the case.
pub fn adversarial_dictionary<R: Rng>(rng: &mut R, n: usize) -> Dictionary {
    let rare = ['Ā', 'ā', 'Ă', 'é', 'ß'];
    let letters: Vec<char> = ('a'..='z').collect();
    distinct_patterns(rng, n, 12..=24, |r| {
        if r.random_bool(0.002) {
            *rare.choose(r).unwrap()
        } else {
            *letters.choose(r).unwrap()
        }
    })
}

/// Lowercase ASCII words.
pub fn ascii_dictionary<R: Rng>(rng: &mut R, n: usize) -> Dictionary {
    let letters: Vec<char> = ('a'..='z').collect();
    uniform_dictionary(rng, n, 2..=10, &letters)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    ZipfCjk,
    Ascii,
    Adversarial,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 3] = [CorpusKind::ZipfCjk, CorpusKind::Ascii, CorpusKind::Adversarial];

    pub fn name(self) -> &'static str {
        match self {
            CorpusKind::ZipfCjk => "zipf-cjk",
            CorpusKind::Ascii => "ascii",
            CorpusKind::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown corpus kind `{s}`"))
    }
}

/// A dictionary and text lines of the given kind.
pub fn corpus(kind: CorpusKind, seed: u64, patterns: usize, lines: usize, line_len: usize) -> (Dictionary, Vec<String>) {
    let mut r = rng(seed);
    match kind {
        CorpusKind::ZipfCjk => {
            let (dict, dist) = zipf_cjk_dictionary(&mut r, patterns);
            let text = zipf_cjk_lines(&mut r, &dict, &dist, lines, line_len);
            (dict, text)
        }
        CorpusKind::Ascii | CorpusKind::Adversarial => {
            let dict = if kind == CorpusKind::Ascii {
                ascii_dictionary(&mut r, patterns)
            } else {
                adversarial_dictionary(&mut r, patterns)
            };
            let letters: Vec<char> = ('a'..='z').chain([' ']).collect();
            let text = (0..lines)
                .map(|_| planted_text(&mut r, &dict, line_len, &letters))
                .collect();
            (dict, text)
        }
    }
}

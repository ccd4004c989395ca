//! Text to transition-label conversion.
//!
//! Three schemes are supported: raw UTF-8 bytes, Unicode scalar values, and
//! scalar values remapped by descending dictionary frequency so that common
//! characters get small labels.

use std::fmt;
use std::str::FromStr;

use crate::dictionary::Dictionary;
use crate::error::{DaacError, Result};

/// Label emitted for text characters that never occur in the dictionary
/// (only under [`Scheme::Mapped`]). No transition carries it.
pub const INVALID_LABEL: u32 = u32::MAX;

/// Largest Unicode scalar value plus one.
pub const CODE_POINT_LIMIT: u32 = 0x11_0000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    Bytewise,
    Charwise,
    Mapped,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Bytewise, Scheme::Charwise, Scheme::Mapped];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Bytewise => "bytewise",
            Scheme::Charwise => "charwise",
            Scheme::Mapped => "mapped",
        }
    }

    pub(crate) fn tag(self) -> u8 {
        self as u8
    }

    pub(crate) fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(tag as usize).copied()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown scheme `{s}`"))
    }
}

/// One transition label together with the number of text bytes it spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Unit {
    pub label: u32,
    pub width: u8,
}

/// Frequency-ranked code point mapping.
///
/// `pi[c]` is the mapped label of code point `c`, or `-1` if `c` does not
/// occur in the dictionary. Lookups past the end of the table are `-1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MappingTable {
    pi: Vec<i32>,
    sigma: u32,
}

impl MappingTable {
    /// Ranks code points by descending frequency over all patterns; ties go
    /// to the smaller code point.
    pub fn build(dict: &Dictionary) -> Self {
        let mut counts: std::collections::HashMap<u32, u64> = std::collections::HashMap::new();
        for p in dict.patterns() {
            for ch in p.chars() {
                *counts.entry(ch as u32).or_default() += 1;
            }
        }
        let mut ranked: Vec<(u32, u64)> = counts.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let table_len = ranked.iter().map(|&(c, _)| c + 1).max().unwrap_or(0);
        let mut pi = vec![-1i32; table_len as usize];
        for (rank, &(c, _)) in ranked.iter().enumerate() {
            pi[c as usize] = rank as i32;
        }
        Self {
            pi,
            sigma: ranked.len() as u32,
        }
    }

    /// Rebuilds a table from its raw entries, checking that the valid
    /// entries form a permutation of `0..sigma`.
    pub fn from_raw(pi: Vec<i32>) -> Result<Self> {
        if pi.len() > CODE_POINT_LIMIT as usize {
            return Err(DaacError::Corrupt("mapping table too long".into()));
        }
        let sigma = pi.iter().filter(|&&v| v >= 0).count();
        let mut seen = vec![false; sigma];
        for (c, &v) in pi.iter().enumerate() {
            if v < -1 {
                return Err(DaacError::Corrupt(format!("bad mapping entry {v}")));
            }
            if v >= 0 {
                if char::from_u32(c as u32).is_none() {
                    return Err(DaacError::Corrupt(format!("mapped surrogate {c:#x}")));
                }
                let slot = seen
                    .get_mut(v as usize)
                    .ok_or_else(|| DaacError::Corrupt(format!("mapping value {v} >= {sigma}")))?;
                if *slot {
                    return Err(DaacError::Corrupt(format!("mapping value {v} repeated")));
                }
                *slot = true;
            }
        }
        Ok(Self {
            pi,
            sigma: sigma as u32,
        })
    }

    #[inline]
    pub fn get(&self, code_point: u32) -> Option<u32> {
        match self.pi.get(code_point as usize) {
            Some(&v) if v >= 0 => Some(v as u32),
            _ => None,
        }
    }

    /// Mapped alphabet size: number of distinct code points in the dictionary.
    pub fn sigma(&self) -> u32 {
        self.sigma
    }

    pub fn raw(&self) -> &[i32] {
        &self.pi
    }

    pub fn heap_bytes(&self) -> usize {
        self.pi.len() * std::mem::size_of::<i32>()
    }

    /// Mapped label to code point.
    pub fn inverse(&self) -> Vec<u32> {
        let mut inv = vec![0u32; self.sigma as usize];
        for (c, &v) in self.pi.iter().enumerate() {
            if v >= 0 {
                inv[v as usize] = c as u32;
            }
        }
        inv
    }
}

/// Converts patterns and texts to transition labels under one scheme.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Encoder {
    Bytewise,
    Charwise,
    Mapped(MappingTable),
}

impl Encoder {
    pub fn for_scheme(scheme: Scheme, dict: &Dictionary) -> Self {
        match scheme {
            Scheme::Bytewise => Encoder::Bytewise,
            Scheme::Charwise => Encoder::Charwise,
            Scheme::Mapped => Encoder::Mapped(MappingTable::build(dict)),
        }
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            Encoder::Bytewise => Scheme::Bytewise,
            Encoder::Charwise => Scheme::Charwise,
            Encoder::Mapped(_) => Scheme::Mapped,
        }
    }

    pub fn mapping(&self) -> Option<&MappingTable> {
        match self {
            Encoder::Mapped(m) => Some(m),
            _ => None,
        }
    }

    /// Labels of a dictionary pattern. Every character of a pattern is
    /// mapped, so no [`INVALID_LABEL`] appears for dictionary patterns.
    pub fn pattern_labels(&self, pattern: &str) -> Vec<u32> {
        match self {
            Encoder::Bytewise => pattern.bytes().map(u32::from).collect(),
            Encoder::Charwise => pattern.chars().map(u32::from).collect(),
            Encoder::Mapped(m) => pattern
                .chars()
                .map(|c| m.get(c as u32).unwrap_or(INVALID_LABEL))
                .collect(),
        }
    }

    #[inline]
    pub(crate) fn map_char(&self, c: char) -> u32 {
        match self {
            Encoder::Mapped(m) => m.get(c as u32).unwrap_or(INVALID_LABEL),
            _ => c as u32,
        }
    }

    /// Exclusive upper bound on the labels used by `dict`'s patterns.
    pub fn alphabet_size(&self, dict: &Dictionary) -> u32 {
        match self {
            Encoder::Bytewise => dict
                .patterns()
                .iter()
                .flat_map(|p| p.bytes())
                .map(|b| u32::from(b) + 1)
                .max()
                .unwrap_or(1),
            Encoder::Charwise => dict
                .patterns()
                .iter()
                .flat_map(|p| p.chars())
                .map(|c| c as u32 + 1)
                .max()
                .unwrap_or(1),
            Encoder::Mapped(m) => m.sigma().max(1),
        }
    }

    /// Checks that `text` is decodable under this scheme and returns it as
    /// `&str` when the scheme is code-point based.
    pub(crate) fn validate<'t>(&self, text: &'t [u8]) -> Result<Option<&'t str>> {
        match self {
            Encoder::Bytewise => Ok(None),
            _ => std::str::from_utf8(text)
                .map(Some)
                .map_err(|e| DaacError::Encoding(e.valid_up_to())),
        }
    }

    /// Converts `text` to labels with their byte widths.
    pub fn encode(&self, text: &[u8]) -> Result<Vec<Unit>> {
        match self.validate(text)? {
            None => Ok(text
                .iter()
                .map(|&b| Unit {
                    label: u32::from(b),
                    width: 1,
                })
                .collect()),
            Some(s) => Ok(s
                .chars()
                .map(|c| Unit {
                    label: self.map_char(c),
                    width: c.len_utf8() as u8,
                })
                .collect()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn golden() -> Dictionary {
        Dictionary::new(["ab", "b", "bab", "bac", "db", "dd"]).unwrap()
    }

    #[test]
    fn encode_world() {
        let text = "世界".as_bytes();
        let bytes = Encoder::Bytewise.encode(text).unwrap();
        let labels: Vec<u32> = bytes.iter().map(|u| u.label).collect();
        assert_eq!(labels, vec![0xE4, 0xB8, 0x96, 0xE7, 0x95, 0x8C]);
        assert!(bytes.iter().all(|u| u.width == 1));

        let chars = Encoder::Charwise.encode(text).unwrap();
        assert_eq!(
            chars,
            vec![
                Unit {
                    label: 0x4E16,
                    width: 3
                },
                Unit {
                    label: 0x754C,
                    width: 3
                }
            ]
        );
    }

    #[test]
    fn encode_empty() {
        let dict = golden();
        for scheme in Scheme::ALL {
            assert!(Encoder::for_scheme(scheme, &dict)
                .encode(b"")
                .unwrap()
                .is_empty());
        }
    }

    #[test]
    fn invalid_utf8_only_fails_codepoint_schemes() {
        let dict = golden();
        assert!(Encoder::Bytewise.encode(b"a\xC3").is_ok());
        assert!(matches!(
            Encoder::Charwise.encode(b"a\xC3"),
            Err(DaacError::Encoding(1))
        ));
        assert!(Encoder::for_scheme(Scheme::Mapped, &dict)
            .encode(b"\xFF")
            .is_err());
    }

    #[test]
    fn golden_mapping() {
        // #(b)=6, #(a)=3, #(d)=3, #(c)=1
        let m = MappingTable::build(&golden());
        assert_eq!(m.sigma(), 4);
        assert_eq!(m.get('b' as u32), Some(0));
        assert_eq!(m.get('a' as u32), Some(1));
        assert_eq!(m.get('d' as u32), Some(2));
        assert_eq!(m.get('c' as u32), Some(3));
        assert_eq!(m.get('e' as u32), None);
        assert_eq!(m.get(0x10FFFF), None);
    }

    #[test]
    fn single_pattern_mapping() {
        let m = MappingTable::build(&Dictionary::new(["a"]).unwrap());
        assert_eq!(m.sigma(), 1);
        assert_eq!(m.get('a' as u32), Some(0));
        assert_eq!(m.raw().iter().filter(|&&v| v == -1).count(), 'a' as usize);
        assert_eq!(m.raw().len(), 'a' as usize + 1);
    }

    #[test]
    fn unmapped_text_chars_are_invalid() {
        let enc = Encoder::for_scheme(Scheme::Mapped, &golden());
        let units = enc.encode("bz世".as_bytes()).unwrap();
        assert_eq!(units[0].label, 0);
        assert_eq!(units[1].label, INVALID_LABEL);
        assert_eq!(units[2].label, INVALID_LABEL);
        assert_eq!(units[2].width, 3);
    }

    #[test]
    fn from_raw_rejects_non_permutation() {
        assert!(MappingTable::from_raw(vec![0, 0]).is_err());
        assert!(MappingTable::from_raw(vec![0, 2]).is_err());
        assert!(MappingTable::from_raw(vec![-2]).is_err());
        assert_eq!(MappingTable::from_raw(vec![1, -1, 0]).unwrap().sigma(), 2);
    }

    fn dict_strategy() -> impl Strategy<Value = Dictionary> {
        proptest::collection::btree_set("[a-dα-δ世界]{1,6}", 1..30)
            .prop_map(|set| Dictionary::new(set).unwrap())
    }

    proptest! {
        #[test]
        fn mapping_is_frequency_ranked_permutation(dict in dict_strategy()) {
            let m = MappingTable::build(&dict);
            let mut counts = std::collections::BTreeMap::new();
            for p in dict.patterns() {
                for c in p.chars() {
                    *counts.entry(c as u32).or_insert(0u64) += 1;
                }
            }
            prop_assert_eq!(m.sigma() as usize, counts.len());
            let mut values: Vec<u32> = counts.keys().map(|&c| m.get(c).unwrap()).collect();
            values.sort_unstable();
            prop_assert_eq!(values, (0..m.sigma()).collect::<Vec<_>>());
            for (&c, &n) in &counts {
                for (&c2, &n2) in &counts {
                    if n < n2 {
                        prop_assert!(m.get(c).unwrap() > m.get(c2).unwrap());
                    }
                }
            }
            for (c, &v) in m.raw().iter().enumerate() {
                prop_assert_eq!(v == -1, !counts.contains_key(&(c as u32)));
            }
        }

        #[test]
        fn widths_sum_to_byte_length(text in "\\PC{0,40}") {
            for enc in [Encoder::Bytewise, Encoder::Charwise] {
                let units = enc.encode(text.as_bytes()).unwrap();
                let total: usize = units.iter().map(|u| u.width as usize).sum();
                prop_assert_eq!(total, text.len());
            }
        }
    }
}

//! Pattern dictionaries and match occurrences.

use std::collections::HashMap;

use crate::error::{DaacError, Result};

/// An ordered set of unique, non-empty UTF-8 patterns.
///
/// Pattern ids are dense and 0-based in insertion order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dictionary {
    patterns: Vec<String>,
    char_lens: Vec<u32>,
}

impl Dictionary {
    pub fn new<I, S>(patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let patterns: Vec<String> = patterns.into_iter().map(Into::into).collect();
        let mut seen: HashMap<&str, usize> = HashMap::with_capacity(patterns.len());
        for (i, p) in patterns.iter().enumerate() {
            if p.is_empty() {
                return Err(DaacError::EmptyPattern(i));
            }
            if let Some(&first) = seen.get(p.as_str()) {
                return Err(DaacError::DuplicatePattern { first, second: i });
            }
            seen.insert(p, i);
        }
        if u32::try_from(patterns.len()).is_err() {
            return Err(DaacError::Dictionary("too many patterns".into()));
        }
        let char_lens = patterns.iter().map(|p| p.chars().count() as u32).collect();
        Ok(Self {
            patterns,
            char_lens,
        })
    }

    /// Parses a dictionary file: UTF-8, one pattern per LF-terminated line.
    ///
    /// A single trailing LF is accepted. Empty lines, carriage returns and a
    /// leading byte-order mark are rejected.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(b"\xEF\xBB\xBF") {
            return Err(DaacError::Dictionary("byte-order mark not allowed".into()));
        }
        let text = std::str::from_utf8(bytes).map_err(|e| DaacError::Encoding(e.valid_up_to()))?;
        let body = text.strip_suffix('\n').unwrap_or(text);
        if body.is_empty() {
            return Err(DaacError::Dictionary("no patterns".into()));
        }
        let mut patterns = Vec::new();
        for (lineno, line) in body.split('\n').enumerate() {
            if line.is_empty() {
                return Err(DaacError::Dictionary(format!("empty line {}", lineno + 1)));
            }
            if line.contains('\r') {
                return Err(DaacError::Dictionary(format!(
                    "carriage return on line {}",
                    lineno + 1
                )));
            }
            patterns.push(line);
        }
        Self::new(patterns)
    }

    /// Serializes to the dictionary file format accepted by [`Dictionary::parse`].
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        for p in &self.patterns {
            out.extend_from_slice(p.as_bytes());
            out.push(b'\n');
        }
        out
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn pattern(&self, id: usize) -> &str {
        &self.patterns[id]
    }

    pub fn patterns(&self) -> &[String] {
        &self.patterns
    }

    pub fn byte_len(&self, id: usize) -> u32 {
        self.patterns[id].len() as u32
    }

    pub fn char_len(&self, id: usize) -> u32 {
        self.char_lens[id]
    }

    pub fn byte_lens(&self) -> Vec<u32> {
        self.patterns.iter().map(|p| p.len() as u32).collect()
    }
}

/// A pattern occurrence `text[start..end]`, offsets in bytes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occurrence {
    pub pattern_id: u32,
    pub start: usize,
    pub end: usize,
}

impl Occurrence {
    pub fn new(pattern_id: u32, start: usize, end: usize) -> Self {
        Self {
            pattern_id,
            start,
            end,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_duplicate() {
        assert!(matches!(
            Dictionary::new(["a", ""]),
            Err(DaacError::EmptyPattern(1))
        ));
        assert!(matches!(
            Dictionary::new(["ab", "b", "ab"]),
            Err(DaacError::DuplicatePattern {
                first: 0,
                second: 2
            })
        ));
    }

    #[test]
    fn lengths() {
        let d = Dictionary::new(["世界", "ab"]).unwrap();
        assert_eq!(d.byte_len(0), 6);
        assert_eq!(d.char_len(0), 2);
        assert_eq!(d.byte_len(1), 2);
        assert_eq!(d.char_len(1), 2);
    }

    #[test]
    fn parse_file() {
        let d = Dictionary::parse(b"ab\nb\nbab\n").unwrap();
        assert_eq!(d.patterns(), &["ab", "b", "bab"]);
        let d = Dictionary::parse(b"ab\nb").unwrap();
        assert_eq!(d.len(), 2);
        assert!(Dictionary::parse(b"\xEF\xBB\xBFab\n").is_err());
        assert!(Dictionary::parse(b"ab\n\nb\n").is_err());
        assert!(Dictionary::parse(b"ab\r\nb\n").is_err());
        assert!(Dictionary::parse(b"").is_err());
        assert!(Dictionary::parse(b"\n").is_err());
        assert!(matches!(
            Dictionary::parse(b"a\xFF\n"),
            Err(DaacError::Encoding(1))
        ));
    }

    #[test]
    fn file_round_trip() {
        let d = Dictionary::new(["ab", "世界", "x"]).unwrap();
        assert_eq!(Dictionary::parse(&d.to_file_bytes()).unwrap(), d);
    }
}

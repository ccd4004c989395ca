#![no_main]

use std::collections::BTreeSet;

use daac::{build, naive_find, AcAutomaton, BuildConfig, Dictionary, Encoder, Format, Scheme};
use libfuzzer_sys::fuzz_target;

// First line holds the patterns separated by '|', the rest is the text.
fuzz_target!(|data: &[u8]| {
    let split = data.iter().position(|&b| b == b'\n').unwrap_or(data.len());
    let Ok(head) = std::str::from_utf8(&data[..split]) else { return };
    let text = data.get(split + 1..).unwrap_or_default();
    let Ok(d) = Dictionary::new(head.split('|').filter(|p| !p.is_empty())) else { return };
    let want: BTreeSet<_> = naive_find(&d, text).into_iter().collect();
    for scheme in Scheme::ALL {
        let cfg = BuildConfig {
            scheme,
            format: if scheme == Scheme::Bytewise { Format::Compact } else { Format::Basic },
            ..BuildConfig::default()
        };
        let ac = AcAutomaton::new(&d, Encoder::for_scheme(scheme, &d));
        let (da, _) = build(&ac, &cfg).expect("build");
        match da.find_overlapping(text) {
            Ok((got, stats)) => {
                assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), want);
                assert!(stats.visited() <= 2 * stats.units_consumed);
            }
            Err(_) => assert!(scheme != Scheme::Bytewise && std::str::from_utf8(text).is_err()),
        }
    }
});

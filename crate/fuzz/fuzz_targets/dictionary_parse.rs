#![no_main]

use daac::Dictionary;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = Dictionary::parse(data) {
        let again = Dictionary::parse(&d.to_file_bytes()).expect("reparse");
        assert_eq!(again.patterns(), d.patterns());
    }
});

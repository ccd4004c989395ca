#![no_main]

use daac::serialize;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(a) = serialize::from_bytes(data) {
        assert_eq!(serialize::to_bytes(&a), data);
        let _ = a.find_overlapping(b"abacdd\xe4\xb8\x80ab");
    }
});

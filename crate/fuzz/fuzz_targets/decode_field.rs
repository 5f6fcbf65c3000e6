#![no_main]

use dbarlab::io::{decode_field, encode_field};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(f) = decode_field(data) {
        // Anything accepted must re-encode to the same bytes.
        assert_eq!(encode_field(&f), data);
    }
});

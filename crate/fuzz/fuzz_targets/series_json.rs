#![no_main]

use dbarlab::reparam::{compose, invert_near_identity, PowerSeries};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = serde_json::from_slice::<PowerSeries>(data) else {
        return;
    };
    let d = s.degree().min(12);
    let _ = compose(&s, &s, d);
    let _ = invert_near_identity(&s, d);
});

#![no_main]

use dbarlab::dbar::DbarProblem;
use dbarlab::io::from_versioned_json;
use dbarlab::kr::FeasibilityRecord;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(p) = from_versioned_json::<DbarProblem>(text) {
        let _ = p.validate();
        let _ = p.epsilon_schedule();
    }
    let _ = from_versioned_json::<FeasibilityRecord>(text);
});

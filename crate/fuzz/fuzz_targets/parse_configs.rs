#![no_main]

use dbarlab::selftest::SelftestOptions;
use dbarlab_cli::config::{parse, CertifyConfig, KrScanConfig, OdeConfig, SolveConfig};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(c) = parse::<SolveConfig>(text) {
        let _ = c.problem();
    }
    if let Ok(c) = parse::<CertifyConfig>(text) {
        let _ = c.validate();
    }
    if let Ok(c) = parse::<KrScanConfig>(text) {
        let _ = c.template();
    }
    if let Ok(c) = parse::<OdeConfig>(text) {
        let _ = c.validate();
    }
    let _ = parse::<SelftestOptions>(text);
});

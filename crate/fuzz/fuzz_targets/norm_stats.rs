#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::NormStats;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = NormStats::parse(s);
    }
});

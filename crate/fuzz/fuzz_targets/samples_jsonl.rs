#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::dataset::parse_samples_jsonl;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_samples_jsonl(s);
    }
});

#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::parse_text_jsonl;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_text_jsonl(s);
    }
});

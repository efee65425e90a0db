#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::Vocabulary;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        if let Ok(v) = Vocabulary::parse(s) {
            assert_eq!(Vocabulary::parse(&v.to_text()).ok(), Some(v));
        }
    }
});

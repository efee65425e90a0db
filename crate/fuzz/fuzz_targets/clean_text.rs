#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::clean_text;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let once = clean_text(s);
        assert_eq!(clean_text(&once), once);
    }
});

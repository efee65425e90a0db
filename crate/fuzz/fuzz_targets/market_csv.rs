#![no_main]

use libfuzzer_sys::fuzz_target;
use senti_risk::data::parse_market_csv;

fuzz_target!(|data: &[u8]| {
    if let Ok(bars) = parse_market_csv(data) {
        for b in &bars {
            assert!(b.validate().is_ok());
        }
    }
});
